//! Adaptive embedded Runge-Kutta integration: the Dormand-Prince 5(4) pair
//! with fourth-order dense output, over complex state vectors.
//!
//! The right-hand side is evaluated at the integrator-internal stage times
//! (no piecewise-constant freezing of time-dependent generators), and output
//! samples are produced by the dense interpolant, so the step sequence is
//! independent of the requested sampling grid.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// e = b5 - b4, the embedded error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    /// Per-step relative error bound.
    pub rtol: f64,
    /// Absolute floor for the error weights; defaults to rtol * 1e-3.
    pub atol: f64,
    pub max_steps: usize,
}

impl IntegratorOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        IntegratorOptions {
            rtol,
            atol: rtol * 1e-3,
            max_steps: 50_000_000,
        }
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions::with_rtol(1e-9)
    }
}

fn wrms(err: &Array1<C64>, y0: &Array1<C64>, y1: &Array1<C64>, rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sc = atol + rtol * y0[i].norm().max(y1[i].norm());
        let r = err[i].norm() / sc;
        acc += r * r;
    }
    (acc / n).sqrt()
}

struct DenseSegment {
    t0: f64,
    h: f64,
    r1: Array1<C64>,
    r2: Array1<C64>,
    r3: Array1<C64>,
    r4: Array1<C64>,
    r5: Array1<C64>,
}

impl DenseSegment {
    fn eval(&self, t: f64) -> Array1<C64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        // r1 + s*(r2 + s1*(r3 + s*(r4 + s1*r5)))
        let mut acc = self.r4.mapv(|x| x * s1) + &self.r5.mapv(|x| x * (s1 * s1));
        acc.zip_mut_with(&self.r3, |a, &b| *a = (*a + b) * s);
        acc.zip_mut_with(&self.r2, |a, &b| *a = (*a + b) * s);
        acc + &self.r1
    }
}

/// Integrate dy/dt = f(t, y) from `t0` to `t1`, invoking `observe` with the
/// dense-output solution at each of `sample_times` (ascending, within
/// [t0, t1]). Returns the solution at `t1`.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: Array1<C64>,
    sample_times: &[f64],
    opts: &IntegratorOptions,
    mut observe: O,
) -> Result<Array1<C64>>
where
    F: FnMut(f64, &Array1<C64>) -> Array1<C64>,
    O: FnMut(usize, f64, &Array1<C64>),
{
    assert!(t1 > t0, "integration span must be forward");
    let rtol = opts.rtol;
    let atol = opts.atol;
    let span = t1 - t0;

    let mut sample_idx = 0;
    while sample_idx < sample_times.len() && sample_times[sample_idx] <= t0 {
        observe(sample_idx, sample_times[sample_idx], &y0);
        sample_idx += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    // initial step size: trial-step heuristic
    let d0 = (y.iter().map(|x| x.norm_sqr()).sum::<f64>() / y.len() as f64).sqrt();
    let d1 = (k1.iter().map(|x| x.norm_sqr()).sum::<f64>() / y.len() as f64).sqrt();
    let mut h = if d1 > 1e-12 {
        (0.01 * (d0.max(atol) / d1)).min(0.1 * span)
    } else {
        1e-6 * span
    };
    {
        let yt = &y + &k1.mapv(|x| x * h);
        let f1 = f(t + h, &yt);
        let d2 = ((&f1 - &k1).iter().map(|x| x.norm_sqr()).sum::<f64>() / y.len() as f64).sqrt()
            / h;
        let dm = d1.max(d2);
        if dm > 1e-15 {
            let h1 = (0.01 / dm).powf(0.2);
            h = h.min(h1).min(0.1 * span);
        }
    }

    let mut rejected = false;
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                t,
                h,
                err: f64::NAN,
                rtol,
            });
        }
        steps += 1;
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                h,
                err: f64::NAN,
                rtol,
            });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        let k2 = f(t + C2 * h, &(&y + &k1.mapv(|x| x * (A21 * h))));
        let k3 = f(
            t + C3 * h,
            &(&y + &k1.mapv(|x| x * (A31 * h)) + k2.mapv(|x| x * (A32 * h))),
        );
        let k4 = f(
            t + C4 * h,
            &(&y + &k1.mapv(|x| x * (A41 * h))
                + k2.mapv(|x| x * (A42 * h))
                + k3.mapv(|x| x * (A43 * h))),
        );
        let k5 = f(
            t + C5 * h,
            &(&y + &k1.mapv(|x| x * (A51 * h))
                + k2.mapv(|x| x * (A52 * h))
                + k3.mapv(|x| x * (A53 * h))
                + k4.mapv(|x| x * (A54 * h))),
        );
        let k6 = f(
            t + h,
            &(&y + &k1.mapv(|x| x * (A61 * h))
                + k2.mapv(|x| x * (A62 * h))
                + k3.mapv(|x| x * (A63 * h))
                + k4.mapv(|x| x * (A64 * h))
                + k5.mapv(|x| x * (A65 * h))),
        );
        // 5th-order solution (b row == a7 row, FSAL)
        let y1 = &y
            + &k1.mapv(|x| x * (A71 * h))
            + k3.mapv(|x| x * (A73 * h))
            + k4.mapv(|x| x * (A74 * h))
            + k5.mapv(|x| x * (A75 * h))
            + k6.mapv(|x| x * (A76 * h));
        let k7 = f(t + h, &y1);

        let err_vec = k1.mapv(|x| x * (E1 * h))
            + k3.mapv(|x| x * (E3 * h))
            + k4.mapv(|x| x * (E4 * h))
            + k5.mapv(|x| x * (E5 * h))
            + k6.mapv(|x| x * (E6 * h))
            + k7.mapv(|x| x * (E7 * h));
        let err = wrms(&err_vec, &y, &y1, rtol, atol);

        if err <= 1.0 {
            // emit samples covered by this step via dense output
            if sample_idx < sample_times.len() && sample_times[sample_idx] <= t + h {
                let ydiff = &y1 - &y;
                let bspl = k1.mapv(|x| x * h) - &ydiff;
                let seg = DenseSegment {
                    t0: t,
                    h,
                    r5: (k1.mapv(|x| x * D1)
                        + k3.mapv(|x| x * D3)
                        + k4.mapv(|x| x * D4)
                        + k5.mapv(|x| x * D5)
                        + k6.mapv(|x| x * D6)
                        + k7.mapv(|x| x * D7))
                    .mapv(|x| x * h),
                    r4: &ydiff - &k7.mapv(|x| x * h) - &bspl,
                    r3: bspl,
                    r2: ydiff,
                    r1: y.clone(),
                };
                while sample_idx < sample_times.len() && sample_times[sample_idx] <= t + h {
                    let ts = sample_times[sample_idx];
                    if (ts - (t + h)).abs() < 1e-12 * h.max(1e-300) {
                        observe(sample_idx, ts, &y1);
                    } else {
                        let ys = seg.eval(ts);
                        observe(sample_idx, ts, &ys);
                    }
                    sample_idx += 1;
                }
            }
            t += h;
            y = y1;
            k1 = k7;
            let facmax = if rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, facmax);
            h *= fac;
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            rejected = true;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration { t, h, err, rtol });
            }
        }
    }

    // samples exactly at t1 that were not emitted due to FP comparison
    while sample_idx < sample_times.len() && sample_times[sample_idx] <= t1 + 1e-12 * span {
        observe(sample_idx, sample_times[sample_idx], &y);
        sample_idx += 1;
    }
    Ok(y)
}
