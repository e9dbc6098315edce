//! Time evolution (unitary and dissipative), Liouvillian superoperators,
//! steady states, and the regression-theorem absorption spectrum.

use std::collections::BTreeMap;

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Domain, HilbertSpec, Operator, StateVector};
use crate::linalg::{c, dagger};
use crate::model::{
    hamiltonian_squeezed_parts, snapshot, DriveRamp, ModelParams,
};

pub mod integrator;
mod liouvillian;
mod spectrum;

pub use integrator::IntegratorOptions;
pub use liouvillian::{build_liouvillian, steady_state, vec_col, unvec_col};
pub use spectrum::{absorption_spectrum, SpectrumGrid, SpectrumResult};

/// Output sampling and integrator control for an evolution run.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt_out: f64,
    /// Per-step relative tolerance of the adaptive integrator.
    pub rel_tol: f64,
    /// Run the (eigenvalue-based) positivity check at every output sample.
    pub check_positivity: bool,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt_out: f64, rel_tol: f64) -> Result<Self> {
        if !(t_end > t_start) || !(dt_out > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "time grid requires t_end > t_start, dt_out > 0, rel_tol > 0: \
                 [{t_start}, {t_end}], dt_out={dt_out}, rel_tol={rel_tol}"
            )));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            dt_out,
            rel_tol,
            check_positivity: true,
        })
    }

    /// Uniform inclusive sample times from t_start to t_end.
    pub fn sample_times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let n = (span / self.dt_out).round().max(1.0) as usize;
        (0..=n)
            .map(|k| self.t_start + span * (k as f64) / (n as f64))
            .collect()
    }

    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions::with_rtol(self.rel_tol)
    }
}

/// Time grid plus per-time states and named scalar series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: States,
    pub scalars: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone)]
pub enum States {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
    /// Evolution ran with an observer; only scalars were retained.
    None,
}

impl Trajectory {
    pub fn scalar(&self, name: &str) -> Option<&[f64]> {
        self.scalars.get(name).map(|v| v.as_slice())
    }

    pub fn final_density(&self) -> Option<&DensityMatrix> {
        match &self.states {
            States::Mixed(v) => v.last(),
            _ => None,
        }
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        match &self.states {
            States::Pure(v) => v.last(),
            _ => None,
        }
    }
}

/// Hamiltonian source for a Lindblad problem: a static operator or a
/// function of time.
pub enum HamiltonianSource {
    Static(Operator),
    TimeDependent(Box<dyn Fn(f64) -> Operator + Sync>),
}

impl HamiltonianSource {
    pub fn at(&self, t: f64) -> Operator {
        match self {
            HamiltonianSource::Static(h) => h.clone(),
            HamiltonianSource::TimeDependent(f) => f(t),
        }
    }
}

/// Jump operators with nonnegative rates; static list or a function of time.
pub enum JumpSource {
    Static(Vec<(Operator, f64)>),
    TimeDependent(Box<dyn Fn(f64) -> Vec<(Operator, f64)> + Sync>),
}

impl JumpSource {
    pub fn at(&self, t: f64) -> Vec<(Operator, f64)> {
        match self {
            JumpSource::Static(j) => j.clone(),
            JumpSource::TimeDependent(f) => f(t),
        }
    }
}

/// A Lindblad master equation: drhodt = -i[H(t), rho] + sum_j r_j D[L_j] rho.
pub struct LindbladSpec {
    pub hamiltonian: HamiltonianSource,
    pub jumps: JumpSource,
    space: HilbertSpec,
}

impl LindbladSpec {
    pub fn new(hamiltonian: HamiltonianSource, jumps: Vec<(Operator, f64)>) -> Result<Self> {
        let h0 = hamiltonian.at(0.0);
        let space = *h0.space();
        for (op, rate) in &jumps {
            if *rate < 0.0 {
                return Err(Error::Config(format!("negative jump rate {rate}")));
            }
            if op.dim() != h0.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "jump operator dim {} != Hamiltonian dim {}",
                    op.dim(),
                    h0.dim()
                )));
            }
        }
        Ok(LindbladSpec {
            hamiltonian,
            jumps: JumpSource::Static(jumps),
            space,
        })
    }

    pub fn new_time_dependent(
        hamiltonian: HamiltonianSource,
        jumps: JumpSource,
        space: HilbertSpec,
    ) -> Self {
        LindbladSpec {
            hamiltonian,
            jumps,
            space,
        }
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }
}

/// The Eq.-6 lab master equation transformed into the squeezed frame at time
/// t: H = H_Rabi + H_Err + H_DA, jumps {(cosh r a + sinh r a^dag, kappa),
/// (sigma_-, gamma)} — the Bogoliubov image of the lab-frame vacuum noise.
pub fn lindblad_squeezed_frame_spec(
    params: &ModelParams,
    ramp: &DriveRamp,
    t: f64,
    space: HilbertSpec,
) -> Result<LindbladSpec> {
    let snap = snapshot(t, params, ramp);
    let (hr, he, hda) = hamiltonian_squeezed_parts(&snap, params, space)?;
    let h = hr.add(&he).add(&hda);
    let jumps = squeezed_frame_jumps(snap.r, params, space)?;
    LindbladSpec::new(HamiltonianSource::Static(h), jumps)
}

/// Squeezed-frame jump operators for lab-frame vacuum noise at squeeze
/// parameter r (kappa = 0 entries are dropped).
pub fn squeezed_frame_jumps(
    r: f64,
    params: &ModelParams,
    space: HilbertSpec,
) -> Result<Vec<(Operator, f64)>> {
    let a = crate::hilbert::embed(&crate::hilbert::annihilation(space), Domain::Cavity, space)?;
    let (sm, ..) = crate::hilbert::qubit_operators(space);
    let sm = crate::hilbert::embed(&sm, Domain::Qubit, space)?;
    let mut jumps = Vec::new();
    if params.kappa > 0.0 {
        let l = a.scaled(c(r.cosh(), 0.0)).add(&a.dagger().scaled(c(r.sinh(), 0.0)));
        jumps.push((l, params.kappa));
    }
    if params.gamma > 0.0 {
        jumps.push((sm, params.gamma));
    }
    Ok(jumps)
}

fn flatten(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().cloned())
}

fn unflatten(v: &Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_vec((d, d), v.to_vec()).expect("square state vector")
}

/// Lindblad right-hand side as G rho + rho G^dag + sum_j r_j L_j rho L_j^dag
/// with drift G = -iH - (1/2) sum_j r_j L_j^dag L_j.
struct MasterRhs<'a> {
    h_of_t: &'a (dyn Fn(f64) -> Array2<C64> + 'a),
    jumps_of_t: &'a (dyn Fn(f64) -> Vec<(Array2<C64>, f64)> + 'a),
    /// Precomputed -(1/2) sum_j r_j L_j^dag L_j and scaled jumps, when static.
    static_part: Option<(Array2<C64>, Vec<(Array2<C64>, Array2<C64>, f64)>)>,
}

impl<'a> MasterRhs<'a> {
    fn eval(&self, t: f64, rho: &Array2<C64>) -> Array2<C64> {
        let h = (self.h_of_t)(t);
        let mut out;
        match &self.static_part {
            Some((drift_extra, jumps)) => {
                let g = h.mapv(|x| x * c(0.0, -1.0)) + drift_extra;
                out = g.dot(rho) + rho.dot(&dagger(&g));
                for (l, ld, rate) in jumps {
                    let lr = l.dot(rho);
                    out = out + lr.dot(ld).mapv(|x| x * c(*rate, 0.0));
                }
            }
            None => {
                let jumps = (self.jumps_of_t)(t);
                let mut g = h.mapv(|x| x * c(0.0, -1.0));
                for (l, rate) in &jumps {
                    let m = dagger(l).dot(l);
                    g = g - m.mapv(|x| x * c(0.5 * rate, 0.0));
                }
                out = g.dot(rho) + rho.dot(&dagger(&g));
                for (l, rate) in &jumps {
                    let lr = l.dot(rho);
                    out = out + lr.dot(&dagger(l)).mapv(|x| x * c(*rate, 0.0));
                }
            }
        }
        out
    }
}

/// Coherent Schrodinger evolution of a normalized state under H(t), sampled
/// at the grid's output times. Norm preservation within 1e-8 is enforced.
pub fn evolve_schrodinger<H>(h_of_t: H, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory>
where
    H: Fn(f64) -> Operator,
{
    let mut states = Vec::new();
    let mut norms = Vec::new();
    let times = grid.sample_times();
    let space = *psi0.space();
    let domain = psi0.domain();
    if (psi0.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "initial state norm {} is not 1",
            psi0.norm()
        )));
    }
    let rhs = |t: f64, y: &Array1<C64>| {
        let h = h_of_t(t);
        h.matrix().dot(y).mapv(|x| x * c(0.0, -1.0))
    };
    integrator::integrate(
        rhs,
        grid.t_start,
        grid.t_end,
        psi0.amplitudes().clone(),
        &times,
        &grid.options(),
        |_, _, y| {
            let sv = StateVector::new(y.clone(), space, domain).expect("finite state");
            norms.push(sv.norm());
            states.push(sv);
        },
    )?;
    for (i, n) in norms.iter().enumerate() {
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvariantViolated(format!(
                "norm drifted to {n} at t = {}",
                times[i]
            )));
        }
    }
    let mut scalars = BTreeMap::new();
    scalars.insert("norm".to_string(), norms);
    Ok(Trajectory {
        times,
        states: States::Pure(states),
        scalars,
    })
}

/// Dissipative evolution under a Lindblad specification, storing the sampled
/// density matrices. Trace (1e-6), Hermiticity (1e-8) and positivity (1e-6,
/// when enabled) are enforced at every sample.
pub fn evolve_lindblad(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let mut stored: Vec<DensityMatrix> = Vec::new();
    let space = *rho0.space();
    let domain = rho0.domain();
    let traj = evolve_lindblad_observed(spec, rho0, grid, |_t, rho| {
        stored.push(
            DensityMatrix::new(rho.clone(), space, domain).expect("finite state"),
        );
    })?;
    Ok(Trajectory {
        times: traj.times,
        states: States::Mixed(stored),
        scalars: traj.scalars,
    })
}

/// Dissipative evolution with a per-sample observer instead of state storage
/// (the runners use this to compute observables on the fly).
pub fn evolve_lindblad_observed<O>(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    mut observe: O,
) -> Result<Trajectory>
where
    O: FnMut(f64, &Array2<C64>),
{
    rho0.validate(1e-8, 1e-6, 1e-6)?;
    let d = rho0.dim();
    let times = grid.sample_times();

    let h_of_t = |t: f64| spec.hamiltonian.at(t).into_matrix();
    let jumps_of_t = |t: f64| {
        spec.jumps
            .at(t)
            .into_iter()
            .map(|(op, r)| (op.into_matrix(), r))
            .collect::<Vec<_>>()
    };
    let static_part = match &spec.jumps {
        JumpSource::Static(js) => {
            let mut drift = Array2::<C64>::zeros((d, d));
            let mut jumps = Vec::new();
            for (op, rate) in js {
                let l = op.matrix().clone();
                let ld = dagger(&l);
                drift = drift - ld.dot(&l).mapv(|x| x * c(0.5 * rate, 0.0));
                jumps.push((l, ld, *rate));
            }
            Some((drift, jumps))
        }
        JumpSource::TimeDependent(_) => None,
    };
    let rhs_impl = MasterRhs {
        h_of_t: &h_of_t,
        jumps_of_t: &jumps_of_t,
        static_part,
    };

    let mut traces = Vec::with_capacity(times.len());
    let mut purities = Vec::with_capacity(times.len());
    let mut herm_defects = Vec::with_capacity(times.len());
    let mut violation: Option<Error> = None;

    integrator::integrate(
        |t, y: &Array1<C64>| {
            let rho = unflatten(y, d);
            flatten(&rhs_impl.eval(t, &rho))
        },
        grid.t_start,
        grid.t_end,
        flatten(rho0.matrix()),
        &times,
        &grid.options(),
        |_, t, y| {
            if violation.is_some() {
                return;
            }
            let rho = unflatten(y, d);
            let tr: C64 = rho.diag().iter().sum();
            let herm = crate::linalg::hermiticity_defect(&rho);
            traces.push(tr.re);
            purities.push(rho.iter().map(|x| x.norm_sqr()).sum());
            herm_defects.push(herm);
            if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
                violation = Some(Error::InvariantViolated(format!(
                    "trace {tr} deviates from 1 beyond 1e-6 at t = {t}"
                )));
                return;
            }
            if herm > 1e-8 {
                violation = Some(Error::InvariantViolated(format!(
                    "Hermiticity defect {herm:.3e} beyond 1e-8 at t = {t}"
                )));
                return;
            }
            if grid.check_positivity {
                let hsym = (&rho + &dagger(&rho)).mapv(|x| x * c(0.5, 0.0));
                match crate::linalg::eigvalsh(&hsym) {
                    Ok(w) => {
                        if w[0] < -1e-6 {
                            violation = Some(Error::Positivity { t, min_eig: w[0] });
                            return;
                        }
                    }
                    Err(e) => {
                        violation = Some(e);
                        return;
                    }
                }
            }
            observe(t, &rho);
        },
    )?;
    if let Some(e) = violation {
        return Err(e);
    }

    let mut scalars = BTreeMap::new();
    scalars.insert("trace".to_string(), traces);
    scalars.insert("purity".to_string(), purities);
    scalars.insert("herm_defect".to_string(), herm_defects);
    Ok(Trajectory {
        times,
        states: States::None,
        scalars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, embed, qubit_operators, StateVector};
    use crate::linalg::max_abs;
    use approx::assert_abs_diff_eq;

    fn spec_nf(nf: usize) -> HilbertSpec {
        HilbertSpec::new(nf).unwrap()
    }

    #[test]
    fn zero_hamiltonian_preserves_state() {
        let space = spec_nf(3);
        let psi0 = StateVector::basis(space, 1, 0).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 1.0, 1e-10).unwrap();
        let h = Operator::new(Array2::zeros((6, 6)), space, Domain::Composite).unwrap();
        let traj = evolve_schrodinger(|_| h.clone(), &psi0, &grid).unwrap();
        let last = traj.final_state().unwrap();
        assert!(last.overlap(&psi0) > 1.0 - 1e-12);
    }

    #[test]
    fn number_hamiltonian_gives_pure_phase() {
        let space = spec_nf(4);
        let omega = 0.7;
        let a = embed(&annihilation(space), Domain::Cavity, space).unwrap();
        let h = a.dagger().matmul(&a).scaled(c(omega, 0.0));
        let psi0 = StateVector::basis(space, 1, 1).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 2.5, 1e-11).unwrap();
        let traj = evolve_schrodinger(|_| h.clone(), &psi0, &grid).unwrap();
        if let States::Pure(states) = &traj.states {
            for (t, st) in traj.times.iter().zip(states) {
                let amp = st.amplitudes()[space.composite_index(1, 1)];
                let expect = c(0.0, -omega * t).exp();
                assert!((amp - expect).norm() < 1e-9, "t={t}");
                assert_abs_diff_eq!(st.overlap(&psi0), 1.0, epsilon = 1e-9);
            }
        } else {
            panic!("expected pure states");
        }
    }

    #[test]
    fn cavity_decay_matches_analytic_exponential() {
        let space = spec_nf(4);
        let kappa = 0.8;
        let a = embed(&annihilation(space), Domain::Cavity, space).unwrap();
        let h = Operator::new(Array2::zeros((8, 8)), space, Domain::Composite).unwrap();
        let spec = LindbladSpec::new(
            HamiltonianSource::Static(h),
            vec![(a.clone(), kappa)],
        )
        .unwrap();
        let rho0 = StateVector::basis(space, 1, 1).unwrap().to_density();
        let grid = TimeGrid::new(0.0, 3.0, 0.5, 1e-9).unwrap();
        let traj = evolve_lindblad(&spec, &rho0, &grid).unwrap();
        let n_op = a.dagger().matmul(&a);
        if let States::Mixed(states) = &traj.states {
            for (t, rho) in traj.times.iter().zip(states) {
                let n = rho.expectation(&n_op).re;
                assert!((n - (-kappa * t).exp()).abs() < 1e-6, "t={t}: {n}");
            }
        } else {
            panic!("expected densities");
        }
    }

    #[test]
    fn qubit_decay_matches_analytic_exponential() {
        let space = spec_nf(2);
        let gamma = 0.5;
        let (sm, sp, ..) = qubit_operators(space);
        let sm = embed(&sm, Domain::Qubit, space).unwrap();
        let sp = embed(&sp, Domain::Qubit, space).unwrap();
        let h = Operator::new(Array2::zeros((4, 4)), space, Domain::Composite).unwrap();
        let spec =
            LindbladSpec::new(HamiltonianSource::Static(h), vec![(sm.clone(), gamma)]).unwrap();
        let rho0 = StateVector::basis(space, 0, 0).unwrap().to_density();
        let grid = TimeGrid::new(0.0, 4.0, 1.0, 1e-9).unwrap();
        let traj = evolve_lindblad(&spec, &rho0, &grid).unwrap();
        let excited = sp.matmul(&sm);
        if let States::Mixed(states) = &traj.states {
            for (t, rho) in traj.times.iter().zip(states) {
                let p = rho.expectation(&excited).re;
                assert!((p - (-gamma * t).exp()).abs() < 1e-6, "t={t}");
            }
        }
    }

    #[test]
    fn jc_ground_state_is_stationary() {
        // |0,-z> is dark for H with diagonal detuning terms and both jumps
        let space = spec_nf(6);
        let params = ModelParams::new(1.0, 0.4, 0.15, 0.02, 0.01).unwrap();
        let snap = crate::model::snapshot_static(0.0, 0.0, &params);
        let h = crate::model::hamiltonian_lab(&snap, &params, space).unwrap();
        let a = embed(&annihilation(space), Domain::Cavity, space).unwrap();
        let (sm, ..) = qubit_operators(space);
        let sm = embed(&sm, Domain::Qubit, space).unwrap();
        let spec = LindbladSpec::new(
            HamiltonianSource::Static(h),
            vec![(a, params.kappa), (sm, params.gamma)],
        )
        .unwrap();
        let rho0 = StateVector::basis(space, 0, 1).unwrap().to_density();
        let grid = TimeGrid::new(0.0, 20.0, 5.0, 1e-10).unwrap();
        let traj = evolve_lindblad(&spec, &rho0, &grid).unwrap();
        let last = traj.final_density().unwrap();
        assert!(max_abs(&(last.matrix() - rho0.matrix())) < 1e-10);
    }

    #[test]
    fn squeezed_frame_spec_reduces_to_lab_at_r_zero() {
        let space = spec_nf(5);
        let params = ModelParams::new(1.0, 0.2, 0.1, 0.03, 0.01).unwrap();
        let ramp = DriveRamp::constant(0.0).unwrap();
        let spec = lindblad_squeezed_frame_spec(&params, &ramp, 0.0, space).unwrap();
        let h_sq = spec.hamiltonian.at(0.0);
        let snap = crate::model::snapshot_static(0.0, 0.0, &params);
        let h_lab = crate::model::hamiltonian_lab(&snap, &params, space).unwrap();
        assert!(max_abs(&(h_sq.matrix() - h_lab.matrix())) < 1e-13);
        let jumps = spec.jumps.at(0.0);
        assert_eq!(jumps.len(), 2);
        let a = embed(&annihilation(space), Domain::Cavity, space).unwrap();
        assert!(max_abs(&(jumps[0].0.matrix() - a.matrix())) < 1e-14);
    }

    #[test]
    fn squeezed_frame_jumps_drop_kappa_zero() {
        let space = spec_nf(4);
        let params = ModelParams::new(1.0, 0.0, 0.1, 0.0, 0.02).unwrap();
        let jumps = squeezed_frame_jumps(0.9, &params, space).unwrap();
        assert_eq!(jumps.len(), 1); // only sigma_-
        assert_abs_diff_eq!(jumps[0].1, 0.02, epsilon = 0.0);
    }
}
