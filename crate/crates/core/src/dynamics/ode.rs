//! Dormand-Prince RK5(4) for complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate y' = f(t, y) from `t0`, calling `observe` at each requested
/// output time (sorted, >= t0). Steps end exactly on output times.
pub fn dopri5<F, O>(mut f: F, t0: f64, y0: Vec<Complex64>, outputs: &[f64], opts: &OdeOptions, mut observe: O) -> Result<OdeStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(usize, f64, &[Complex64]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    if outputs.is_empty() {
        return Ok(stats);
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs[0] < t0 {
        return Err(Error::InvalidInput("output times must be sorted and start at or after t0".into()));
    }
    let span = (outputs[outputs.len() - 1] - t0).abs().max(f64::MIN_POSITIVE);
    let mut y = y0;
    let mut t = t0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);
    let mut h = (1e-3 * span).min(opts.h_max);
    let h_min = 1e-13 * span;
    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t {
        observe(next, t, &y);
        next += 1;
    }
    while next < outputs.len() {
        let target = outputs[next];
        let mut last = false;
        let mut step = h.min(opts.h_max);
        if t + step >= target {
            step = target - t;
            last = true;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += k[j][i] * (step * a);
                    }
                }
                tmp[i] = acc;
            }
            let (done, rest) = k.split_at_mut(s);
            let _ = done;
            f(t + C[s] * step, &tmp, &mut rest[0]);
            if s == 6 {
                ynew.copy_from_slice(&tmp);
            }
        }
        let mut err = 0.0;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, c) in E.iter().enumerate() {
                if *c != 0.0 {
                    e += k[j][i] * (step * c);
                }
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = if n > 0 { (err / n as f64).sqrt() } else { 0.0 };
        if !err.is_finite() {
            return Err(Error::Stiffness { t, msg: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t = if last { target } else { t + step };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            stats.steps += 1;
            while next < outputs.len() && outputs[next] <= t {
                observe(next, t, &y);
                next += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to land on an output does not shrink the next one.
            h = if last { h.max(step * fac) } else { step * fac };
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < h_min {
            return Err(Error::Stiffness {
                t,
                msg: format!("step size {h:.3e} underflow (span {span:.3e}); the amplitude equations are too stiff"),
            });
        }
        if stats.steps + stats.rejected > opts.max_steps {
            return Err(Error::Stiffness { t, msg: format!("more than {} steps", opts.max_steps) });
        }
    }
    Ok(stats)
}
