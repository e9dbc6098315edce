//! Physical parameters, the tanh drive ramp, the squeeze transformation, and
//! every Hamiltonian of the model, in units where delta_c = 1 sets the scale.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result, Warning};
use crate::hilbert::{
    annihilation, embed, matrix_exponential, qubit_operators, DensityMatrix, Domain, HilbertSpec,
    Operator, StateVector,
};
use crate::linalg::c;

/// Tail-mass bound for conjugating by the squeeze unitary near the truncation
/// boundary (see `squeeze_unitary`).
pub const SQUEEZE_TAIL_LIMIT: f64 = 1e-8;

/// Physical rates and detunings. All frequencies are angular and expressed in
/// units of the cavity detuning delta_c; absolute frequencies never enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta_c: f64,
    pub delta_q: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(delta_c: f64, delta_q: f64, g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(delta_c > 0.0) {
            return Err(Error::Config(format!(
                "delta_c must be positive (negative detunings are rejected, not sign-flipped): {delta_c}"
            )));
        }
        if g < 0.0 || kappa < 0.0 || gamma < 0.0 {
            return Err(Error::Config(format!(
                "rates must be nonnegative: g={g}, kappa={kappa}, gamma={gamma}"
            )));
        }
        for v in [delta_c, delta_q, g, kappa, gamma] {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(ModelParams {
            delta_c,
            delta_q,
            g,
            kappa,
            gamma,
        })
    }
}

/// The tanh drive schedule r(t) = r_max tanh(t / 2 tau).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveRamp {
    pub r_max: f64,
    pub tau: f64,
    pub t_f: f64,
}

impl DriveRamp {
    pub fn new(r_max: f64, tau: f64, t_f: f64) -> Result<Self> {
        if r_max < 0.0 || !(tau > 0.0) || t_f < 0.0 {
            return Err(Error::Config(format!(
                "ramp requires r_max >= 0, tau > 0, t_f >= 0: r_max={r_max}, tau={tau}, t_f={t_f}"
            )));
        }
        Ok(DriveRamp { r_max, tau, t_f })
    }

    /// A frozen drive at fixed squeeze parameter r (r_dot = 0 for all t).
    pub fn constant(r: f64) -> Result<Self> {
        if r < 0.0 {
            return Err(Error::Config(format!("constant r must be >= 0: {r}")));
        }
        Ok(DriveRamp {
            r_max: r,
            tau: f64::INFINITY,
            t_f: 0.0,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.tau.is_infinite()
    }
}

/// Derived frame quantities at one instant of the drive schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSnapshot {
    pub r: f64,
    pub r_dot: f64,
    pub lambda: f64,
    pub omega_c_eff: f64,
    pub g_tilde: f64,
}

/// r = (1/2) artanh(lambda / delta_c); errors at the instability threshold.
pub fn r_from_lambda(lambda: f64, delta_c: f64) -> Result<f64> {
    if lambda.abs() >= delta_c {
        return Err(Error::Instability { lambda, delta_c });
    }
    Ok(0.5 * (lambda / delta_c).atanh())
}

pub fn lambda_from_r(r: f64, delta_c: f64) -> f64 {
    delta_c * (2.0 * r).tanh()
}

/// Parametric gain in dB: 10 log10(e^{2r}).
pub fn gain_db_from_r(r: f64) -> f64 {
    10.0 * (2.0 * r) / std::f64::consts::LN_10
}

pub fn r_from_gain_db(db: f64) -> f64 {
    db * std::f64::consts::LN_10 / 20.0
}

/// (r, r_dot) of the tanh ramp at time t.
pub fn ramp_r(t: f64, ramp: &DriveRamp) -> (f64, f64) {
    if ramp.is_constant() {
        return (ramp.r_max, 0.0);
    }
    let x = t / (2.0 * ramp.tau);
    let sech = 1.0 / x.cosh();
    (ramp.r_max * x.tanh(), ramp.r_max / (2.0 * ramp.tau) * sech * sech)
}

/// Frame quantities at time t along the ramp.
pub fn snapshot(t: f64, params: &ModelParams, ramp: &DriveRamp) -> FrameSnapshot {
    let (r, r_dot) = ramp_r(t, ramp);
    snapshot_static(r, r_dot, params)
}

/// Frame quantities at given (r, r_dot).
pub fn snapshot_static(r: f64, r_dot: f64, params: &ModelParams) -> FrameSnapshot {
    FrameSnapshot {
        r,
        r_dot,
        lambda: lambda_from_r(r, params.delta_c),
        omega_c_eff: params.delta_c / (2.0 * r).cosh(),
        g_tilde: 0.5 * params.g * r.exp(),
    }
}

/// Lab-frame Hamiltonian (rotating at half the parametric drive frequency):
/// delta_c a^dag a + (delta_q/2) sigma_z - (lambda/2)(a^dag^2 + a^2)
/// + g (a^dag sigma_- + sigma_+ a).
pub fn hamiltonian_lab(
    snap: &FrameSnapshot,
    params: &ModelParams,
    space: HilbertSpec,
) -> Result<Operator> {
    let a = embed(&annihilation(space), Domain::Cavity, space)?;
    let ad = a.dagger();
    let (sm, sp, sz, _) = qubit_operators(space);
    let sm = embed(&sm, Domain::Qubit, space)?;
    let sp = embed(&sp, Domain::Qubit, space)?;
    let sz = embed(&sz, Domain::Qubit, space)?;

    let mut h = ad.matmul(&a).matrix() * c(params.delta_c, 0.0);
    h = h + sz.matrix() * c(0.5 * params.delta_q, 0.0);
    let two_photon = ad.matmul(&ad).matrix() + a.matmul(&a).matrix();
    h = h - two_photon * c(0.5 * snap.lambda, 0.0);
    let jc = ad.matmul(&sm).matrix() + sp.matmul(&a).matrix();
    h = h + jc * c(params.g, 0.0);
    Operator::new(h, space, Domain::Composite)
}

/// The three squeezed-frame pieces (H_Rabi, H_Err, H_DA):
/// H_Rabi = Omega_c a^dag a + (delta_q/2) sigma_z + (g/2) e^r (a^dag + a)(sigma_+ + sigma_-)
/// H_Err  = -(g/2) e^{-r} (a^dag - a)(sigma_+ - sigma_-)
/// H_DA   = -(i r_dot / 2)(a^dag^2 - a^2)
pub fn hamiltonian_squeezed_parts(
    snap: &FrameSnapshot,
    params: &ModelParams,
    space: HilbertSpec,
) -> Result<(Operator, Operator, Operator)> {
    let a = embed(&annihilation(space), Domain::Cavity, space)?;
    let ad = a.dagger();
    let (sm, sp, sz, _) = qubit_operators(space);
    let sm = embed(&sm, Domain::Qubit, space)?;
    let sp = embed(&sp, Domain::Qubit, space)?;
    let sz = embed(&sz, Domain::Qubit, space)?;

    let x_cav = ad.matrix() + a.matrix();
    let sx = sp.matrix() + sm.matrix();
    let mut h_rabi = ad.matmul(&a).matrix() * c(snap.omega_c_eff, 0.0);
    h_rabi = h_rabi + sz.matrix() * c(0.5 * params.delta_q, 0.0);
    h_rabi = h_rabi + x_cav.dot(&sx) * c(snap.g_tilde, 0.0);

    let p_cav = ad.matrix() - a.matrix();
    let sy_like = sp.matrix() - sm.matrix();
    let h_err = p_cav.dot(&sy_like) * c(-0.5 * params.g * (-snap.r).exp(), 0.0);

    let quad = ad.matmul(&ad).matrix() - a.matmul(&a).matrix();
    let h_da = quad * c(0.0, -0.5 * snap.r_dot);

    Ok((
        Operator::new(h_rabi, space, Domain::Composite)?,
        Operator::new(h_err, space, Domain::Composite)?,
        Operator::new(h_da, space, Domain::Composite)?,
    ))
}

/// Probability mass of the squeezed vacuum U_S[r]|0> on the top two retained
/// Fock levels and beyond (the truncation-sensitivity diagnostic).
pub fn squeeze_tail_mass(r: f64, space: HilbertSpec) -> f64 {
    // |<2n|S(r)|0>|^2 = (2n)! / (2^n n!)^2 * tanh^{2n}|r| / cosh|r|, exact in
    // the untruncated space; sum the retained head and subtract.
    let nf = space.fock_cutoff();
    let t = r.abs().tanh();
    let ch = r.abs().cosh();
    if t == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / ch; // n = 0
    let mut kept = 0.0;
    let mut n = 0usize;
    while 2 * n < nf.saturating_sub(2) {
        kept += term;
        n += 1;
        let m = n as f64;
        term *= t * t * (2.0 * m - 1.0) / (2.0 * m);
    }
    (1.0 - kept).max(0.0)
}

/// U_S[r] = exp[r (a^2 - a^dag^2) / 2] on the composite space, with a
/// structured warning when the squeezed-vacuum tail criterion fails.
pub fn squeeze_unitary(r: f64, space: HilbertSpec) -> Result<(Operator, Option<Warning>)> {
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    let a = annihilation(space);
    let ad = a.dagger();
    let gen = (a.matmul(&a).matrix() - ad.matmul(&ad).matrix()).mapv(|x| x * c(0.5 * r, 0.0));
    let u_cav = crate::linalg::matrix_exponential_raw(&gen)?;
    let u = embed(
        &Operator::new(u_cav, space, Domain::Cavity)?,
        Domain::Cavity,
        space,
    )?;
    let tail = squeeze_tail_mass(r, space);
    let warning = (tail >= SQUEEZE_TAIL_LIMIT).then_some(Warning::CutoffTail {
        tail,
        limit: SQUEEZE_TAIL_LIMIT,
    });
    Ok((u, warning))
}

/// psi^S = U_S psi.
pub fn to_squeezed_frame_state(
    psi: &StateVector,
    r: f64,
) -> Result<(StateVector, Option<Warning>)> {
    let (u, w) = squeeze_unitary(r, *psi.space())?;
    Ok((psi.apply(&u), w))
}

/// rho^S = U_S rho U_S^dag.
pub fn to_squeezed_frame_density(
    rho: &DensityMatrix,
    r: f64,
) -> Result<(DensityMatrix, Option<Warning>)> {
    let (u, w) = squeeze_unitary(r, *rho.space())?;
    let m = u.matrix().dot(rho.matrix()).dot(u.dagger().matrix());
    Ok((DensityMatrix::new(m, *rho.space(), rho.domain())?, w))
}

/// Number operator expectation of a composite pure state, cavity factor.
pub fn mean_photon_number(psi: &StateVector) -> f64 {
    let nf = psi.space().fock_cutoff();
    let mut acc = 0.0;
    for m in 0..nf {
        for s in 0..2 {
            acc += m as f64 * psi.amplitudes()[2 * m + s].norm_sqr();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, max_abs};
    use approx::assert_abs_diff_eq;

    fn params(g: f64, dq: f64) -> ModelParams {
        ModelParams::new(1.0, dq, g, 0.0, 0.0).unwrap()
    }

    #[test]
    fn r_from_lambda_examples() {
        assert_abs_diff_eq!(r_from_lambda(0.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        // Fig. 4 gain: lambda/delta_c = tanh(2.5) -> r = 1.25, 10.86 dB
        let r = r_from_lambda(0.986_614_3, 1.0).unwrap();
        assert_abs_diff_eq!(r, 1.25, epsilon = 1e-5);
        assert_abs_diff_eq!(gain_db_from_r(1.25), 10.8574, epsilon = 1e-4);
        // 20 dB regime
        let r = r_from_lambda(0.9998, 1.0).unwrap();
        assert_abs_diff_eq!(r, 2.30258, epsilon = 1e-4);
        assert_abs_diff_eq!(gain_db_from_r(r), 20.0, epsilon = 2e-3);
    }

    #[test]
    fn r_from_lambda_rejects_instability() {
        assert!(matches!(
            r_from_lambda(1.0, 1.0),
            Err(Error::Instability { .. })
        ));
        assert!(matches!(
            r_from_lambda(-1.3, 1.0),
            Err(Error::Instability { .. })
        ));
    }

    #[test]
    fn r_lambda_round_trip() {
        for k in 0..=30 {
            let r = 0.1 * k as f64;
            let lam = lambda_from_r(r, 1.0);
            assert_abs_diff_eq!(r_from_lambda(lam, 1.0).unwrap(), r, epsilon = 1e-12);
        }
    }

    #[test]
    fn ramp_limits() {
        let ramp = DriveRamp::new(1.25, 100.0, 500.0).unwrap();
        let (r0, rd0) = ramp_r(0.0, &ramp);
        assert_eq!(r0, 0.0);
        assert_abs_diff_eq!(rd0, 1.25 / 200.0, epsilon = 1e-15);
        let (rinf, rdinf) = ramp_r(1e6, &ramp);
        assert_abs_diff_eq!(rinf, 1.25, epsilon = 1e-12);
        assert!(rdinf < 1e-12);
        let (r2tau, _) = ramp_r(200.0, &ramp);
        assert_abs_diff_eq!(r2tau, 1.25 * 1f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(r2tau, 0.95199, epsilon = 1e-5);
    }

    #[test]
    fn snapshot_values() {
        let p = params(0.1, 0.0);
        let s0 = snapshot_static(0.0, 0.0, &p);
        assert_abs_diff_eq!(s0.omega_c_eff, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s0.g_tilde, 0.05, epsilon = 1e-15);
        assert_eq!(s0.lambda, 0.0);

        let s = snapshot_static(1.25, 0.0, &p);
        assert_abs_diff_eq!(s.omega_c_eff, 0.163071, epsilon = 1e-6);
        assert_abs_diff_eq!(s.g_tilde, 0.174517, epsilon = 1e-6);

        let p2 = params(1e-4, 0.0);
        let s2 = snapshot_static(2.302585, 0.0, &p2);
        assert_abs_diff_eq!(s2.omega_c_eff, 0.019998, epsilon = 2e-6);
        assert_abs_diff_eq!(s2.g_tilde, 5.0e-4, epsilon = 1e-9);
    }

    #[test]
    fn omega_c_monotone_and_product_identity() {
        let p = params(0.1, 0.0);
        let mut prev = f64::INFINITY;
        for k in 0..=30 {
            let r = 0.1 * k as f64;
            let s = snapshot_static(r, 0.0, &p);
            assert!(s.omega_c_eff < prev);
            prev = s.omega_c_eff;
            // Omega_c(r) cosh(2r) = delta_c
            assert_abs_diff_eq!(s.omega_c_eff * (2.0 * r).cosh(), 1.0, epsilon = 1e-12);
            if k > 0 {
                let s_prev = snapshot_static(0.1 * (k - 1) as f64, 0.0, &p);
                assert!(s.g_tilde > s_prev.g_tilde);
            }
        }
    }

    #[test]
    fn lab_hamiltonian_structure() {
        let space = HilbertSpec::new(5).unwrap();
        let p = ModelParams::new(1.0, 0.3, 0.0, 0.0, 0.0).unwrap();
        // g = 0, lambda = 0: diagonal with entries delta_c n +- delta_q/2
        let snap = snapshot_static(0.0, 0.0, &p);
        let h = hamiltonian_lab(&snap, &p, space).unwrap();
        for n in 0..5 {
            for (s, sign) in [(0usize, 1.0), (1, -1.0)] {
                let idx = space.composite_index(n, s);
                assert_abs_diff_eq!(
                    h.matrix()[[idx, idx]].re,
                    n as f64 + sign * 0.15,
                    epsilon = 1e-14
                );
            }
        }
        // two-photon matrix element <2,q|H|0,q> = -(lambda/2) sqrt(2)
        let p2 = ModelParams::new(1.0, 0.3, 0.2, 0.0, 0.0).unwrap();
        let snap2 = snapshot_static(0.4, 0.0, &p2);
        let h2 = hamiltonian_lab(&snap2, &p2, space).unwrap();
        for q in 0..2 {
            let lo = space.composite_index(0, q);
            let hi = space.composite_index(2, q);
            assert_abs_diff_eq!(
                h2.matrix()[[hi, lo]].re,
                -0.5 * snap2.lambda * 2f64.sqrt(),
                epsilon = 1e-14
            );
        }
        assert!(h2.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn squeezed_parts_are_hermitian_and_hda_vanishes_statically() {
        let space = HilbertSpec::new(8).unwrap();
        let p = params(0.1, 0.2);
        let snap = snapshot_static(0.7, 0.0, &p);
        let (hr, he, hda) = hamiltonian_squeezed_parts(&snap, &p, space).unwrap();
        assert!(hr.hermiticity_defect() < 1e-12);
        assert!(he.hermiticity_defect() < 1e-12);
        assert_eq!(max_abs(hda.matrix()), 0.0);

        let snap_t = snapshot_static(0.7, 0.03, &p);
        let (_, _, hda_t) = hamiltonian_squeezed_parts(&snap_t, &p, space).unwrap();
        assert!(hda_t.hermiticity_defect() < 1e-12);
        assert!(max_abs(hda_t.matrix()) > 0.0);
    }

    #[test]
    fn h_err_scales_as_exp_minus_r() {
        let space = HilbertSpec::new(6).unwrap();
        let p = params(0.1, 0.0);
        let (_, he0, _) =
            hamiltonian_squeezed_parts(&snapshot_static(0.0, 0.0, &p), &p, space).unwrap();
        let (_, he2, _) =
            hamiltonian_squeezed_parts(&snapshot_static(2.0, 0.0, &p), &p, space).unwrap();
        let ratio = max_abs(he2.matrix()) / max_abs(he0.matrix());
        assert_abs_diff_eq!(ratio, (-2f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn squeeze_unitary_identity_inverse_and_photon_number() {
        let space = HilbertSpec::new(60).unwrap();
        let (u0, w0) = squeeze_unitary(0.0, space).unwrap();
        assert!(w0.is_none());
        assert!(max_abs(&(u0.matrix() - &eye(space.dim()))) < 1e-14);

        let (u, w) = squeeze_unitary(1.25, space).unwrap();
        assert!(w.is_none(), "tail should satisfy criterion at N_F=60: {w:?}");
        let (uinv, _) = squeeze_unitary(-1.25, space).unwrap();
        let prod = u.matmul(&uinv);
        assert!(max_abs(&(prod.matrix() - &eye(space.dim()))) < 1e-10);

        // U_S[r]|0,-z> has cavity mean photon number sinh^2(r)
        let psi0 = StateVector::basis(space, 0, 1).unwrap();
        let (psi_s, _) = to_squeezed_frame_state(&psi0, 1.25).unwrap();
        let expect = 1.25f64.sinh().powi(2);
        assert_abs_diff_eq!(mean_photon_number(&psi_s), expect, epsilon = 1e-8);
    }

    #[test]
    fn squeeze_unitary_unitarity_at_fig4_gain() {
        let space = HilbertSpec::new(40).unwrap();
        let (u, _) = squeeze_unitary(1.25, space).unwrap();
        let prod = u.matmul(&u.dagger());
        assert!(max_abs(&(prod.matrix() - &eye(space.dim()))) < 1e-10);
    }

    #[test]
    fn squeeze_tail_warning_fires_on_small_cutoff() {
        let space = HilbertSpec::new(8).unwrap();
        let (_, w) = squeeze_unitary(1.25, space).unwrap();
        assert!(matches!(w, Some(Warning::CutoffTail { .. })));
    }

    #[test]
    fn squeezed_frame_round_trip_and_vacuum_mapping() {
        let space = HilbertSpec::new(60).unwrap();
        let psi0 = StateVector::basis(space, 0, 1).unwrap();
        let (fwd, _) = to_squeezed_frame_state(&psi0, 1.25).unwrap();
        let (back, _) = to_squeezed_frame_state(&fwd, -1.25).unwrap();
        assert!(back.overlap(&psi0) > 1.0 - 1e-9);

        // lab squeezed vacuum U_S^dag|0> maps to vacuum in the squeezed frame
        let (lab, _) = to_squeezed_frame_state(&psi0, -1.25).unwrap();
        let (sq, _) = to_squeezed_frame_state(&lab, 1.25).unwrap();
        assert!(sq.overlap(&psi0) >= 1.0 - 1e-8);
    }

    #[test]
    fn squeezed_frame_density_round_trip() {
        let space = HilbertSpec::new(40).unwrap();
        let rho = StateVector::basis(space, 1, 0).unwrap().to_density();
        let (fwd, _) = to_squeezed_frame_density(&rho, 0.8).unwrap();
        let (back, _) = to_squeezed_frame_density(&fwd, -0.8).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-9);
    }
}
