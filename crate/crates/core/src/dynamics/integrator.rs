//! Explicit Runge–Kutta integration of complex ODE systems `y' = f(t, y)`
//! stored as flat slices, with output on a prescribed grid.

use crate::{Error, Result, C64};

use super::{Method, SolverOptions};

// Dormand–Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b5 − b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Hairer's continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// `out[i] = y[i] + h Σ_k a_k · ks[k][i]`
fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        *o = y[i] + acc * h;
    }
}

fn scaled_rms(err: &[C64], y: &[C64], y_new: &[C64], rtol: f64, atol: f64) -> f64 {
    let n = err.len().max(1);
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

/// Integrates from `outputs[0]` to the last output time, calling
/// `observe(j, t_j, y(t_j))` at every grid point (including the first).
/// Returns the state at the final time.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[C64],
    outputs: &[f64],
    opts: &SolverOptions,
    mut observe: O,
) -> Result<(Vec<C64>, StepStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if outputs.is_empty() {
        return Err(Error::invalid("output grid is empty"));
    }
    if outputs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("output times must be strictly increasing"));
    }
    observe(0, outputs[0], y0)?;
    if outputs.len() == 1 {
        return Ok((y0.to_vec(), StepStats::default()));
    }
    match opts.method {
        Method::DormandPrince45 => dopri5(&mut rhs, y0, outputs, opts, &mut observe),
        Method::Rk4 { max_step } => rk4(&mut rhs, y0, outputs, max_step, &mut observe),
    }
}

fn initial_step<F>(rhs: &mut F, t0: f64, y0: &[C64], f0: &[C64], opts: &SolverOptions, span: f64) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len().max(1) as f64;
    let sc = |y: &C64| opts.atol + opts.rtol * y.norm();
    let d0 = (y0.iter().map(|y| (y.norm() / sc(y)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(y0).map(|(f, y)| (f.norm() / sc(y)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
    rhs(t0 + h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(y0)
        .map(|((a, b), y)| ((a - b).norm() / sc(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

fn dopri5<F, O>(
    rhs: &mut F,
    y0: &[C64],
    outputs: &[f64],
    opts: &SolverOptions,
    observe: &mut O,
) -> Result<(Vec<C64>, StepStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let t_end = *outputs.last().unwrap();
    let mut t = outputs[0];
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];
    let mut dense = vec![zero; n];
    let mut interp = vec![zero; n];
    let mut stats = StepStats::default();

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;
    let mut h = initial_step(rhs, t, &y, &k1, opts, t_end - t);
    stats.rhs_evals += 1;
    let mut next_out = 1;
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let target = if opts.dense_output { t_end } else { outputs[next_out] };
        let clipped = t + h >= target;
        let h_free = h;
        if clipped {
            h = target - t;
        }

        combine(&mut stage, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &stage, &mut k2);
        combine(&mut stage, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &stage, &mut k3);
        combine(&mut stage, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &stage, &mut k4);
        combine(&mut stage, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &stage, &mut k5);
        combine(
            &mut stage,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + h, &stage, &mut k6);
        combine(
            &mut y_new,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if clipped { target } else { t + h };
        rhs(t_new, &y_new, &mut k7);
        stats.rhs_evals += 6;

        for (i, e) in err.iter_mut().enumerate() {
            *e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let err_norm = scaled_rms(&err, &y, &y_new, opts.rtol, opts.atol);
        if !err_norm.is_finite() {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: "non-finite error estimate".into(),
            });
        }

        if err_norm <= 1.0 {
            stats.accepted += 1;
            for (i, d) in dense.iter_mut().enumerate() {
                *d = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
            }
            while next_out < outputs.len() && outputs[next_out] <= t_new {
                let t_out = outputs[next_out];
                if t_out == t_new {
                    observe(next_out, t_out, &y_new)?;
                } else {
                    let s = (t_out - t) / h;
                    let s1 = 1.0 - s;
                    for i in 0..n {
                        let r2 = y_new[i] - y[i];
                        let r3 = k1[i] * h - r2;
                        let r4 = r2 - k7[i] * h - r3;
                        interp[i] = y[i] + (r2 + (r3 + (r4 + dense[i] * s1) * s) * s1) * s;
                    }
                    observe(next_out, t_out, &interp)?;
                }
                next_out += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            let mut fac = SAFETY * err_norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            if clipped && !last_rejected {
                // a short step onto an output time says nothing about the
                // admissible step size
                h = h.max(h_free);
            }
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            last_rejected = true;
        }
    }
    Ok((y, stats))
}

fn rk4<F, O>(rhs: &mut F, y0: &[C64], outputs: &[f64], max_step: f64, observe: &mut O) -> Result<(Vec<C64>, StepStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if !(max_step > 0.0) {
        return Err(Error::param("max_step", "must be > 0"));
    }
    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut stats = StepStats::default();
    for (j, w) in outputs.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let steps = ((b - a) / max_step).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        for s in 0..steps {
            let t = a + s as f64 * h;
            rhs(t, &y, &mut k1);
            combine(&mut stage, &y, h, &[(0.5, &k1)]);
            rhs(t + 0.5 * h, &stage, &mut k2);
            combine(&mut stage, &y, h, &[(0.5, &k2)]);
            rhs(t + 0.5 * h, &stage, &mut k3);
            combine(&mut stage, &y, h, &[(1.0, &k3)]);
            rhs(t + h, &stage, &mut k4);
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
            stats.accepted += 1;
            stats.rhs_evals += 4;
        }
        observe(j + 1, b, &y)?;
    }
    Ok((y, stats))
}
