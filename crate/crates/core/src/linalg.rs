//! Dense complex linear algebra helpers: Kronecker products, matrix
//! exponential, and thin wrappers over the LAPACK-backed decompositions.

use ndarray::prelude::*;
use ndarray_linalg::{Eig, Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product; composite index of `kron(a, b)` is `i_a * dim_b + i_b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ((i, j), &aij) in a.indexed_iter() {
        if aij == C64::new(0.0, 0.0) {
            continue;
        }
        let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
        block.assign(&b.mapv(|x| x * aij));
    }
    out
}

pub fn eye(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|x| x.conj())
}

/// max |A_ij - conj(A_ji)|
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let ad = dagger(a);
    (a - &ad).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0;
    for col in a.columns() {
        let s: f64 = col.iter().map(|x| x.norm()).sum();
        if s > best {
            best = s;
        }
    }
    best
}

// Pade coefficients and 1-norm thresholds from Higham's scaling-and-squaring
// algorithm (orders 3, 5, 7, 9, 13).
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

fn pade_coeffs(order: usize) -> Vec<f64> {
    match order {
        3 => vec![120., 60., 12., 1.],
        5 => vec![30240., 15120., 3360., 420., 30., 1.],
        7 => vec![17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
        9 => vec![
            17643225600.,
            8821612800.,
            2075673600.,
            302702400.,
            30270240.,
            2162160.,
            110880.,
            3960.,
            90.,
            1.,
        ],
        13 => vec![
            64764752532480000.,
            32382376266240000.,
            7771770303897600.,
            1187353796428800.,
            129060195264000.,
            10559470521600.,
            670442572800.,
            33522128640.,
            1323241920.,
            40840800.,
            960960.,
            16380.,
            182.,
            1.,
        ],
        _ => unreachable!(),
    }
}

fn pade_exp(a: &Array2<C64>, order: usize) -> Result<Array2<C64>> {
    let n = a.nrows();
    let b = pade_coeffs(order);
    let a2 = a.dot(a);
    // U = A * (odd terms), V = even terms, in powers of A^2
    let (u, v) = if order < 13 {
        let mut pow = eye(n);
        let mut u_acc = Array2::<C64>::zeros((n, n));
        let mut v_acc = Array2::<C64>::zeros((n, n));
        for k in 0..=(order / 2) {
            v_acc = v_acc + pow.mapv(|x| x * b[2 * k]);
            if 2 * k + 1 <= order {
                u_acc = u_acc + pow.mapv(|x| x * b[2 * k + 1]);
            }
            if k < order / 2 {
                pow = pow.dot(&a2);
            }
        }
        (a.dot(&u_acc), v_acc)
    } else {
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let u_hi = a6.mapv(|x| x * b[13]) + a4.mapv(|x| x * b[11]) + a2.mapv(|x| x * b[9]);
        let u_lo = a6.mapv(|x| x * b[7])
            + a4.mapv(|x| x * b[5])
            + a2.mapv(|x| x * b[3])
            + eye(n).mapv(|x| x * b[1]);
        let u = a.dot(&(a6.dot(&u_hi) + u_lo));
        let v_hi = a6.mapv(|x| x * b[12]) + a4.mapv(|x| x * b[10]) + a2.mapv(|x| x * b[8]);
        let v = a6.dot(&v_hi)
            + a6.mapv(|x| x * b[6])
            + a4.mapv(|x| x * b[4])
            + a2.mapv(|x| x * b[2])
            + eye(n).mapv(|x| x * b[0]);
        (u, v)
    };
    let p = &v + &u;
    let q = &v - &u;
    let qinv = q.inv().map_err(|e| Error::Linalg(e.to_string()))?;
    Ok(qinv.dot(&p))
}

/// Matrix exponential by scaling-and-squaring with Pade approximants.
pub fn matrix_exponential_raw(a: &Array2<C64>) -> Result<Array2<C64>> {
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = one_norm(a);
    for &(order, theta) in THETA.iter() {
        if norm <= theta {
            return pade_exp(a, order);
        }
    }
    let s = ((norm / THETA[4].1).log2().ceil()).max(0.0) as u32;
    let scaled = a.mapv(|x| x / 2f64.powi(s as i32));
    let mut e = pade_exp(&scaled, 13)?;
    for _ in 0..s {
        e = e.dot(&e);
    }
    Ok(e)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix (ascending eigenvalues).
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = a.eigh(UPLO::Lower)?;
    Ok((w, v))
}

pub fn eigvalsh(a: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(eigh(a)?.0)
}

/// Eigendecomposition of a general complex matrix.
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let (w, v) = Eig::eig(a)?;
    Ok((w, v))
}
