//! Truncated cavity ⊗ qubit Hilbert space: operator and state types, ladder
//! and Pauli operators, tensor embeddings, partial trace/transpose.
//!
//! Ordering convention (fixed globally, asserted in tests): the composite
//! space is cavity-major, i.e. composite index = fock_index * 2 + qubit_index,
//! with qubit basis |+z> = 0, |-z> = 1. Equivalently, composite operators are
//! `kron(cavity_op, qubit_op)`.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, dagger, eigvalsh, hermiticity_defect, kron, matrix_exponential_raw};

/// Truncated space dimensions: `fock_cutoff` retained Fock levels |0..N_F-1>
/// tensored with a two-level qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    fock_cutoff: usize,
}

impl HilbertSpec {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::Config(format!(
                "fock_cutoff must be >= 2, got {fock_cutoff}"
            )));
        }
        Ok(HilbertSpec { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub const fn qubit_dim(&self) -> usize {
        2
    }

    /// Composite dimension 2 * N_F.
    pub fn dim(&self) -> usize {
        2 * self.fock_cutoff
    }

    pub fn composite_index(&self, fock: usize, qubit: usize) -> usize {
        debug_assert!(fock < self.fock_cutoff && qubit < 2);
        fock * 2 + qubit
    }
}

/// Which tensor factor an operator or state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Cavity,
    Qubit,
    Composite,
}

impl Domain {
    fn dim(&self, space: &HilbertSpec) -> usize {
        match self {
            Domain::Cavity => space.fock_cutoff(),
            Domain::Qubit => 2,
            Domain::Composite => space.dim(),
        }
    }
}

/// Dense complex matrix tied to a factor of the truncated space.
#[derive(Debug, Clone)]
pub struct Operator {
    mat: Array2<C64>,
    space: HilbertSpec,
    domain: Domain,
}

impl Operator {
    pub fn new(mat: Array2<C64>, space: HilbertSpec, domain: Domain) -> Result<Self> {
        let d = domain.dim(&space);
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, expected {d}x{d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Operator { mat, space, domain })
    }

    pub fn identity(space: HilbertSpec, domain: Domain) -> Self {
        Operator {
            mat: linalg::eye(domain.dim(&space)),
            space,
            domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn dagger(&self) -> Self {
        Operator {
            mat: dagger(&self.mat),
            space: self.space,
            domain: self.domain,
        }
    }

    /// max |A - A^dag|, the testable Hermiticity defect.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    pub fn scaled(&self, z: C64) -> Self {
        Operator {
            mat: self.mat.mapv(|x| x * z),
            space: self.space,
            domain: self.domain,
        }
    }

    pub fn matmul(&self, other: &Operator) -> Self {
        assert_eq!(self.domain, other.domain, "operator domains differ");
        Operator {
            mat: self.mat.dot(&other.mat),
            space: self.space,
            domain: self.domain,
        }
    }

    pub fn add(&self, other: &Operator) -> Self {
        assert_eq!(self.domain, other.domain, "operator domains differ");
        Operator {
            mat: &self.mat + &other.mat,
            space: self.space,
            domain: self.domain,
        }
    }

    pub fn sub(&self, other: &Operator) -> Self {
        assert_eq!(self.domain, other.domain, "operator domains differ");
        Operator {
            mat: &self.mat - &other.mat,
            space: self.space,
            domain: self.domain,
        }
    }
}

/// Pure state amplitudes on a factor of the truncated space.
#[derive(Debug, Clone)]
pub struct StateVector {
    vec: Array1<C64>,
    space: HilbertSpec,
    domain: Domain,
}

impl StateVector {
    pub fn new(vec: Array1<C64>, space: HilbertSpec, domain: Domain) -> Result<Self> {
        if vec.len() != domain.dim(&space) {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes, expected {}",
                vec.len(),
                domain.dim(&space)
            )));
        }
        if vec.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(StateVector { vec, space, domain })
    }

    /// Composite basis state |fock, qubit> (qubit: 0 = +z, 1 = -z).
    pub fn basis(space: HilbertSpec, fock: usize, qubit: usize) -> Result<Self> {
        if fock >= space.fock_cutoff() || qubit >= 2 {
            return Err(Error::DimensionMismatch(format!(
                "basis indices ({fock},{qubit}) outside N_F={}",
                space.fock_cutoff()
            )));
        }
        let mut v = Array1::zeros(space.dim());
        v[space.composite_index(fock, qubit)] = c(1.0, 0.0);
        Ok(StateVector {
            vec: v,
            space,
            domain: Domain::Composite,
        })
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        StateVector {
            vec: self.vec.mapv(|x| x / n),
            space: self.space,
            domain: self.domain,
        }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.vec
            .iter()
            .zip(other.vec.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|, the global-phase-insensitive overlap.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.vec.len();
        let mat = Array2::from_shape_fn((n, n), |(i, j)| self.vec[i] * self.vec[j].conj());
        DensityMatrix {
            mat,
            space: self.space,
            domain: self.domain,
        }
    }

    pub fn apply(&self, op: &Operator) -> StateVector {
        assert_eq!(self.domain, op.domain, "domains differ");
        StateVector {
            vec: op.mat.dot(&self.vec),
            space: self.space,
            domain: self.domain,
        }
    }
}

/// Dense density matrix on a factor of the truncated space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Array2<C64>,
    space: HilbertSpec,
    domain: Domain,
}

impl DensityMatrix {
    pub fn new(mat: Array2<C64>, space: HilbertSpec, domain: Domain) -> Result<Self> {
        let d = domain.dim(&space);
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, expected {d}x{d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DensityMatrix { mat, space, domain })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().iter().sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
        self.mat.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        assert_eq!(self.domain, op.domain, "domains differ");
        // Tr[rho A]
        self.mat
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| row.iter().zip(op.mat.column(i)).map(|(r, a)| r * a).sum::<C64>())
            .sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let h = self.mat.mapv(|x| x) + dagger(&self.mat);
        let w = eigvalsh(&h.mapv(|x| x * c(0.5, 0.0)))?;
        Ok(w[0])
    }

    /// Check the density-matrix invariants: Hermitian within `herm_tol`,
    /// unit trace within `trace_tol`, eigenvalues >= -`pos_tol`.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::NotHermitian {
                defect,
                tol: herm_tol,
            });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::Precondition(format!(
                "trace {tr} deviates from 1 beyond {trace_tol:.1e}"
            )));
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < -pos_tol {
            return Err(Error::Positivity { t: f64::NAN, min_eig });
        }
        Ok(())
    }
}

/// Cavity annihilation operator on the cavity factor: <n-1|a|n> = sqrt(n).
pub fn annihilation(space: HilbertSpec) -> Operator {
    let nf = space.fock_cutoff();
    let mut mat = Array2::zeros((nf, nf));
    for n in 1..nf {
        mat[[n - 1, n]] = c((n as f64).sqrt(), 0.0);
    }
    Operator {
        mat,
        space,
        domain: Domain::Cavity,
    }
}

/// Qubit ladder and Pauli operators (sigma_-, sigma_+, sigma_z, sigma_x) in
/// the |+z>, |-z> basis.
pub fn qubit_operators(space: HilbertSpec) -> (Operator, Operator, Operator, Operator) {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let sm = array![[zero, zero], [one, zero]];
    let sp = array![[zero, one], [zero, zero]];
    let sz = array![[one, zero], [zero, -one]];
    let sx = array![[zero, one], [one, zero]];
    let mk = |mat| Operator {
        mat,
        space,
        domain: Domain::Qubit,
    };
    (mk(sm), mk(sp), mk(sz), mk(sx))
}

/// Embed a single-factor operator into the composite space, acting trivially
/// on the other factor.
pub fn embed(op: &Operator, which: Domain, space: HilbertSpec) -> Result<Operator> {
    if op.domain != which {
        return Err(Error::DimensionMismatch(format!(
            "operator lives on {:?}, requested embedding of {:?}",
            op.domain, which
        )));
    }
    let mat = match which {
        Domain::Cavity => {
            if op.dim() != space.fock_cutoff() {
                return Err(Error::DimensionMismatch(format!(
                    "cavity operator dim {} != N_F {}",
                    op.dim(),
                    space.fock_cutoff()
                )));
            }
            kron(&op.mat, &linalg::eye(2))
        }
        Domain::Qubit => {
            if op.dim() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "qubit operator dim {} != 2",
                    op.dim()
                )));
            }
            kron(&linalg::eye(space.fock_cutoff()), &op.mat)
        }
        Domain::Composite => {
            return Err(Error::DimensionMismatch(
                "operator already lives on the composite space".into(),
            ))
        }
    };
    Ok(Operator {
        mat,
        space,
        domain: Domain::Composite,
    })
}

/// Reduced state on the kept factor.
pub fn partial_trace(rho: &DensityMatrix, keep: Domain) -> Result<DensityMatrix> {
    if rho.domain != Domain::Composite {
        return Err(Error::DimensionMismatch(
            "partial trace requires a composite state".into(),
        ));
    }
    let nf = rho.space.fock_cutoff();
    let mat = match keep {
        Domain::Cavity => {
            let mut out = Array2::zeros((nf, nf));
            for m in 0..nf {
                for n in 0..nf {
                    out[[m, n]] = rho.mat[[2 * m, 2 * n]] + rho.mat[[2 * m + 1, 2 * n + 1]];
                }
            }
            out
        }
        Domain::Qubit => {
            let mut out = Array2::zeros((2, 2));
            for s in 0..2 {
                for t in 0..2 {
                    let mut acc = c(0.0, 0.0);
                    for m in 0..nf {
                        acc += rho.mat[[2 * m + s, 2 * m + t]];
                    }
                    out[[s, t]] = acc;
                }
            }
            out
        }
        Domain::Composite => {
            return Err(Error::DimensionMismatch(
                "keep must name a single factor".into(),
            ))
        }
    };
    Ok(DensityMatrix {
        mat,
        space: rho.space,
        domain: keep,
    })
}

/// Transpose applied to the qubit factor's indices; returns a Hermitian
/// operator (not in general a density matrix).
pub fn partial_transpose(rho: &DensityMatrix) -> Result<Operator> {
    if rho.domain != Domain::Composite {
        return Err(Error::DimensionMismatch(
            "partial transpose requires a composite state".into(),
        ));
    }
    let nf = rho.space.fock_cutoff();
    let d = rho.dim();
    let mut out = Array2::zeros((d, d));
    for m in 0..nf {
        for n in 0..nf {
            for s in 0..2 {
                for t in 0..2 {
                    out[[2 * m + s, 2 * n + t]] = rho.mat[[2 * m + t, 2 * n + s]];
                }
            }
        }
    }
    Ok(Operator {
        mat: out,
        space: rho.space,
        domain: Domain::Composite,
    })
}

/// Sum of absolute eigenvalues of a Hermitian operator.
pub fn trace_norm(a: &Operator) -> Result<f64> {
    let defect = a.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::NotHermitian {
            defect,
            tol: 1e-8,
        });
    }
    let h = (&a.mat + &dagger(&a.mat)).mapv(|x| x * c(0.5, 0.0));
    let w = eigvalsh(&h)?;
    Ok(w.iter().map(|x| x.abs()).sum())
}

/// exp(A) with the domain of A.
pub fn matrix_exponential(a: &Operator) -> Result<Operator> {
    Ok(Operator {
        mat: matrix_exponential_raw(&a.mat)?,
        space: a.space,
        domain: a.domain,
    })
}

/// Coherent-state amplitudes |alpha> on the cavity factor (truncated and
/// renormalized; callers enforce their tail criteria).
pub fn coherent_state(alpha: C64, space: HilbertSpec) -> StateVector {
    let nf = space.fock_cutoff();
    let mut v = Array1::zeros(nf);
    let mut amp = c((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v[0] = amp;
    for n in 1..nf {
        amp = amp * alpha / c((n as f64).sqrt(), 0.0);
        v[n] = amp;
    }
    let sv = StateVector {
        vec: v,
        space,
        domain: Domain::Cavity,
    };
    sv.normalized()
}

/// Probability mass of |alpha> on Fock levels >= `from` (untruncated Poisson tail).
pub fn coherent_tail_mass(alpha: C64, from: usize) -> f64 {
    let lam = alpha.norm_sqr();
    if lam == 0.0 {
        return 0.0;
    }
    let mut p = (-lam).exp();
    let mut cdf = p;
    for n in 1..from {
        p *= lam / n as f64;
        cdf += p;
    }
    (1.0 - cdf).max(0.0)
}

/// Tensor product of a cavity state and a qubit state.
pub fn product_state(cavity: &StateVector, qubit: &StateVector) -> Result<StateVector> {
    if cavity.domain != Domain::Cavity || qubit.domain != Domain::Qubit {
        return Err(Error::DimensionMismatch(
            "product_state takes a cavity state and a qubit state".into(),
        ));
    }
    let nf = cavity.space.fock_cutoff();
    let mut v = Array1::zeros(2 * nf);
    for m in 0..nf {
        for s in 0..2 {
            v[2 * m + s] = cavity.vec[m] * qubit.vec[s];
        }
    }
    Ok(StateVector {
        vec: v,
        space: cavity.space,
        domain: Domain::Composite,
    })
}

/// Qubit basis states: (|+z>, |-z>, |+x>, |-x>).
pub fn qubit_states(space: HilbertSpec) -> (StateVector, StateVector, StateVector, StateVector) {
    let mk = |v: Array1<C64>| StateVector {
        vec: v,
        space,
        domain: Domain::Qubit,
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        mk(array![c(1.0, 0.0), c(0.0, 0.0)]),
        mk(array![c(0.0, 0.0), c(1.0, 0.0)]),
        mk(array![c(s, 0.0), c(s, 0.0)]),
        mk(array![c(s, 0.0), c(-s, 0.0)]),
    )
}
