//! Franck-Condon overlaps between bound and continuum radial functions.
//!
//! Values exclude the electronic transition dipole; Rabi frequencies multiply
//! the field by the dipole and by these overlaps separately.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scattering::ContinuumState;
use crate::spectrum::BoundState;
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcKind {
    /// Dimensionless.
    BoundBound,
    /// Carries energy^(-1/2) from the energy-normalized continuum.
    ContinuumBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcValue {
    pub value: f64,
    pub kind: FcKind,
}

#[derive(Debug, Clone)]
pub struct FcEntry {
    pub lower: String,
    pub upper: String,
    pub lower_energy: f64,
    pub upper_energy: f64,
    pub fc: FcValue,
}

// 4-point Gauss-Legendre on [-1, 1]; exact through degree 7, so the
// product of two cubic pieces integrates exactly.
const GL_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Exact integral of the product of two splines over their common range,
/// on the union of both knot sets.
fn spline_product_integral(a: &CubicSpline, b: &CubicSpline) -> f64 {
    let lo = a.x_min().max(b.x_min());
    let hi = a.x_max().min(b.x_max());
    if !(hi > lo) {
        return 0.0;
    }
    let mut knots: Vec<f64> = a
        .knots()
        .0
        .iter()
        .chain(b.knots().0)
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut s = 0.0;
    for w in knots.windows(2) {
        let (c, d) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for k in 0..4 {
            let x = c + d * GL_X[k];
            s += d * GL_W[k] * a.eval(x) * b.eval(x);
        }
    }
    s
}

/// Offset such that `b[i] == a[i + off]` to within rounding, if the grids align.
fn alignment(a: &[f64], b: &[f64]) -> Option<usize> {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
    let off = a.iter().position(|&x| close(x, b[0]))?;
    let n = (a.len() - off).min(b.len());
    (0..n).all(|i| close(a[off + i], b[i])).then_some(off)
}

/// <a|b> summed over the channels the two states share.
///
/// States from one solver call share a grid and reduce to a direct weighted
/// sum; otherwise both are spline-interpolated and integrated exactly.
pub fn bound_bound_fc(a: &BoundState, b: &BoundState) -> Result<FcValue> {
    let channels = a.components.len().min(b.components.len());
    // Order-independent choice of which state's grid leads.
    let (p, q) = if (a.r[0], a.r.len()) <= (b.r[0], b.r.len()) { (a, b) } else { (b, a) };
    let value: f64 = if let Some(off) = alignment(&p.r, &q.r) {
        let n = (p.r.len() - off).min(q.r.len());
        (0..channels)
            .map(|c| {
                (0..n)
                    .map(|i| p.weights[off + i].min(q.weights[i]) * p.components[c][off + i] * q.components[c][i])
                    .sum::<f64>()
            })
            .sum()
    } else {
        (0..channels).map(|c| spline_product_integral(&p.spline(c), &q.spline(c))).sum()
    };
    if !value.is_finite() || value.abs() > 1.0 + 1e-6 {
        return Err(Error::Convergence(format!("bound-bound overlap {value} is not a valid overlap")));
    }
    Ok(FcValue { value, kind: FcKind::BoundBound })
}

/// <E|v> with the first channel of `bound` (the dipole-coupled component).
///
/// The trapezoid sum on the bound grid is checked against the exact
/// spline-product integral; disagreement means one of the two functions is
/// under-resolved on the other's grid.
pub fn continuum_bound_fc(c: &ContinuumState, bound: &BoundState) -> Result<FcValue> {
    let cs = c.spline();
    let bs = bound.spline(0);
    let (c_lo, c_hi) = (c.r[0], *c.r.last().unwrap());
    let mut coarse = 0.0;
    let mut scale = 0.0;
    for ((r, u), w) in bound.r.iter().zip(bound.u()).zip(&bound.weights) {
        if *r >= c_lo && *r <= c_hi {
            let t = w * u * cs.eval(*r);
            coarse += t;
            scale += t.abs();
        }
    }
    let fine = spline_product_integral(&cs, &bs);
    if (fine - coarse).abs() > 1e-4 * fine.abs() + 1e-6 * scale {
        return Err(Error::Convergence(format!(
            "continuum-bound overlap unconverged on refinement at E = {:.6e}: {coarse:.8e} vs {fine:.8e}",
            c.energy
        )));
    }
    Ok(FcValue { value: fine, kind: FcKind::ContinuumBound })
}

/// Overlaps between every lower and upper bound level.
pub fn fc_table(lower: &[BoundState], upper: &[BoundState]) -> Result<Vec<FcEntry>> {
    let pairs: Vec<(&BoundState, &BoundState)> = lower.iter().flat_map(|a| upper.iter().map(move |b| (a, b))).collect();
    pairs
        .par_iter()
        .map(|(a, b)| {
            Ok(FcEntry {
                lower: format!("v={} J={}", a.v, a.j),
                upper: format!("v={} J={}", b.v, b.j),
                lower_energy: a.energy,
                upper_energy: b.energy,
                fc: bound_bound_fc(a, b)?,
            })
        })
        .collect()
}

/// Overlaps between continuum states and upper bound levels.
pub fn fc_table_continuum(continua: &[ContinuumState], upper: &[BoundState]) -> Result<Vec<FcEntry>> {
    let pairs: Vec<(&ContinuumState, &BoundState)> =
        continua.iter().flat_map(|a| upper.iter().map(move |b| (a, b))).collect();
    pairs
        .par_iter()
        .map(|(a, b)| {
            Ok(FcEntry {
                lower: format!("E={:.6e}", a.energy),
                upper: format!("v={} J={}", b.v, b.j),
                lower_energy: a.energy,
                upper_energy: b.energy,
                fc: continuum_bound_fc(a, b)?,
            })
        })
        .collect()
}
