//! Bound vibrational levels by renormalized Numerov node counting.
//!
//! Each level is located by bisection on the eigenvalue count N(E) on three
//! (or more) successively halved grids, then Richardson-extrapolated with
//! the fourth-order error law of the Numerov scheme.

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::numerov::{CoupledProblem, ScalarProblem, Window};
use crate::potentials::{CoupledPotential, InnerBoundary, Potential};
use crate::spline::CubicSpline;
use crate::units::REDUCED_MASS_RB85;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub mass: f64,
    /// Grid map parameter; `None` picks 500 a.u. for walls and 0 for hard cores.
    pub beta: Option<f64>,
    /// Minimum points per local de Broglie wavelength on the coarsest grid.
    pub points_per_wavelength: f64,
    /// WKB decay action at which forbidden regions are truncated.
    pub decay_action: f64,
    /// Largest radius a grid may reach.
    pub r_cap: f64,
    /// Number of grid halvings beyond the first two.
    pub max_refinements: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mass: REDUCED_MASS_RB85,
            beta: None,
            points_per_wavelength: 20.0,
            decay_action: 25.0,
            r_cap: 1e5,
            max_refinements: 4,
            abs_tol: 1e-10,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundState {
    /// Eigenvalue index; equals the node count for a single channel.
    pub v: usize,
    pub j: u32,
    pub energy: f64,
    pub r: Vec<f64>,
    /// Quadrature weights matching `r`.
    pub weights: Vec<f64>,
    /// One component per channel, unit-normalized in total.
    pub components: Vec<Vec<f64>>,
    pub channel_weights: Vec<f64>,
    pub outer_turning_point: f64,
    /// |difference| between the last two Richardson estimates.
    pub richardson_change: f64,
}

impl BoundState {
    /// First (or only) channel amplitude.
    pub fn u(&self) -> &[f64] {
        &self.components[0]
    }

    /// Channel carrying most of the norm.
    pub fn dominant_channel(&self) -> usize {
        self.channel_weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.iter().zip(&self.weights).map(|(u, w)| u * u * w).sum::<f64>())
            .sum()
    }

    /// Interior sign changes of a channel, ignoring negligible amplitudes.
    pub fn nodes(&self, channel: usize) -> usize {
        count_nodes(&self.components[channel])
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    pub fn spline(&self, channel: usize) -> CubicSpline {
        CubicSpline::new(self.r.clone(), self.components[channel].clone()).expect("grid is increasing")
    }
}

pub fn count_nodes(u: &[f64]) -> usize {
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-9 * peak;
    let mut last = 0.0f64;
    let mut n = 0;
    for &x in u {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            n += 1;
        }
        last = x;
    }
    n
}

/// Spline-interpolated amplitude of the first channel.
pub fn wavefunction_at(s: &BoundState, r: f64) -> Result<f64> {
    let (lo, hi) = s.r_range();
    if r < lo || r > hi {
        return Err(Error::Domain(format!("r = {r} outside the grid [{lo}, {hi}]")));
    }
    Ok(s.spline(0).eval(r))
}

enum Problem {
    Scalar(ScalarProblem),
    Coupled(CoupledProblem),
}

impl Problem {
    fn window(&self, e: f64, action: f64, hard: bool) -> Option<Window> {
        let w = match self {
            Problem::Scalar(p) => p.window(e, action),
            Problem::Coupled(p) => p.window(e, action),
        }?;
        if hard {
            Some(Window { lo: 0, ..w })
        } else {
            Some(w)
        }
    }

    fn count(&self, e: f64, action: f64, hard: bool) -> usize {
        match self.window(e, action, hard) {
            None => 0,
            Some(w) => match self {
                Problem::Scalar(p) => p.count(e, w).0,
                Problem::Coupled(p) => p.count(e, w).0,
            },
        }
    }

    fn components(&self, e: f64, w: Window) -> Vec<Vec<f64>> {
        match self {
            Problem::Scalar(p) => vec![p.eigenvector(e, w)],
            Problem::Coupled(p) => p.eigenvector(e, w).to_vec(),
        }
    }
}

/// Lowest eigenvalue of the (centrifugal-augmented) potential matrix.
trait Curve: Sync {
    fn lowest(&self, r: f64) -> f64;
    fn asymptote(&self) -> f64;
    fn inner(&self) -> InnerBoundary;
    fn problem(&self, grid: &RadialGrid, j: u32, mass: f64) -> Problem;
}

struct Single<'a>(&'a dyn Potential);

impl Curve for Single<'_> {
    fn lowest(&self, r: f64) -> f64 {
        self.0.value(r)
    }
    fn asymptote(&self) -> f64 {
        self.0.asymptote()
    }
    fn inner(&self) -> InnerBoundary {
        self.0.inner()
    }
    fn problem(&self, grid: &RadialGrid, j: u32, mass: f64) -> Problem {
        let cf = (j * (j + 1)) as f64 / (2.0 * mass);
        let n = grid.len();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let r = grid.r[i];
            let g2 = grid.jac[i] * grid.jac[i];
            if r == 0.0 {
                a.push(0.0);
            } else {
                a.push(g2 * 2.0 * mass * (self.0.value(r) + cf / (r * r)) + grid.liouville[i]);
            }
            b.push(2.0 * mass * g2);
        }
        Problem::Scalar(ScalarProblem { a, b, h: grid.h })
    }
}

struct Pair<'a>(&'a CoupledPotential);

impl Curve for Pair<'_> {
    fn lowest(&self, r: f64) -> f64 {
        let m = self.0.matrix(r);
        let tr = m[(0, 0)] + m[(1, 1)];
        let d = m[(0, 0)] - m[(1, 1)];
        0.5 * tr - (0.25 * d * d + m[(0, 1)] * m[(0, 1)]).sqrt()
    }
    fn asymptote(&self) -> f64 {
        self.0.asymptote()
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Wall { r_min: self.0.r_min() }
    }
    fn problem(&self, grid: &RadialGrid, j: u32, mass: f64) -> Problem {
        let cf = (j * (j + 1)) as f64 / (2.0 * mass);
        let n = grid.len();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let r = grid.r[i];
            let g2 = grid.jac[i] * grid.jac[i];
            let mut v = self.0.matrix(r) + Matrix2::identity() * (cf / (r * r));
            v *= 2.0 * mass * g2;
            v += Matrix2::identity() * grid.liouville[i];
            a.push(v);
            b.push(2.0 * mass * g2);
        }
        Problem::Coupled(CoupledProblem { a, b, h: grid.h })
    }
}

fn effective(c: &dyn Curve, r: f64, j: u32, mass: f64) -> f64 {
    c.lowest(r) + (j * (j + 1)) as f64 / (2.0 * mass * r * r)
}

/// Outer classical turning point at `e` and the radius where the WKB decay
/// action beyond it reaches `action` (capped at `r_cap`).
fn outer_extent(c: &dyn Curve, j: u32, e: f64, mass: f64, r_start: f64, action: f64, r_cap: f64) -> Option<(f64, f64)> {
    let r0 = r_start.max(1e-6);
    let n = 40_000;
    let ratio = (r_cap / r0).ln() / n as f64;
    let mut last_allowed = None;
    for k in 0..=n {
        let r = r0 * (ratio * k as f64).exp();
        if effective(c, r, j, mass) < e {
            last_allowed = Some(k);
        }
    }
    let k = last_allowed?;
    let mut lo = r0 * (ratio * k as f64).exp();
    let mut hi = (r0 * (ratio * (k + 1) as f64).exp()).min(r_cap);
    if k == n {
        return Some((r_cap, r_cap));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if effective(c, mid, j, mass) < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let turning = 0.5 * (lo + hi);
    let mut r = turning;
    let mut s = 0.0;
    while s < action && r < r_cap {
        let kappa = (2.0 * mass * (effective(c, r, j, mass) - e)).max(0.0).sqrt();
        let dr = (0.05 / kappa.max(1e-12)).min(0.02 * r).max(1e-4);
        let k2 = (2.0 * mass * (effective(c, r + dr, j, mass) - e)).max(0.0).sqrt();
        s += 0.5 * (kappa + k2) * dr;
        r += dr;
    }
    Some((turning, r.min(r_cap)))
}

fn bisect_level(p: &Problem, v: usize, mut lo: f64, mut hi: f64, action: f64, hard: bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p.count(mid, action, hard) > v {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bracket a level on a new grid around an estimate from a coarser one.
fn bracket(p: &Problem, v: usize, guess: f64, floor: f64, ceil: f64, action: f64, hard: bool) -> (f64, f64) {
    let mut d = 1e-6 * guess.abs().max(1e-12);
    loop {
        let lo = (guess - d).max(floor);
        let hi = (guess + d).min(ceil);
        if p.count(lo, action, hard) <= v && p.count(hi, action, hard) > v {
            return (lo, hi);
        }
        if lo == floor && hi == ceil {
            return (lo, hi);
        }
        d *= 8.0;
    }
}

fn solve_levels(curve: &dyn Curve, j: u32, window: (f64, f64), opts: &SolverOptions) -> Result<Vec<BoundState>> {
    let (e_min, e_max) = window;
    let asym = curve.asymptote();
    if !(e_min < e_max) {
        return Err(Error::InvalidInput(format!("empty energy window [{e_min}, {e_max}]")));
    }
    if e_max > asym {
        return Err(Error::Domain(format!(
            "window top {e_max} lies above the asymptote {asym}; use the scattering module for continuum states"
        )));
    }
    let (r_start, hard) = match curve.inner() {
        InnerBoundary::Wall { r_min } => (r_min, false),
        InnerBoundary::Hard { r0 } => (r0, true),
    };
    let beta = opts.beta.unwrap_or(if hard { 0.0 } else { 500.0 });
    let beta = if r_start <= 0.0 { 0.0 } else { beta };
    // Extent: last bound energy of interest, kept strictly below the limit.
    let e_ext = if asym.is_finite() { e_max.min(asym - 1e-14 * asym.abs().max(1e-3)) } else { e_max };
    let Some((turn, r_end)) = outer_extent(curve, j, e_ext, opts.mass, r_start, opts.decay_action, opts.r_cap) else {
        return Ok(Vec::new());
    };
    // Step from the de Broglie wavelength at the window top.
    let mut h = f64::INFINITY;
    let samples = 4000;
    let lo_r = r_start.max(1e-6);
    for k in 0..=samples {
        let r = lo_r * ((turn / lo_r).ln() * k as f64 / samples as f64).exp();
        let ve = effective(curve, r, j, opts.mass);
        if ve < e_max {
            let kl = (2.0 * opts.mass * (e_max - ve)).sqrt();
            let jac = if beta == 0.0 { 1.0 } else { r / (r + beta) };
            h = h.min(2.0 * std::f64::consts::PI / (opts.points_per_wavelength * jac * kl));
        }
    }
    if !h.is_finite() {
        return Ok(Vec::new());
    }
    let base = RadialGrid::new(r_start, r_end.max(turn * 1.01), beta, h)?;
    let action = opts.decay_action;
    let mut grids = vec![base];
    let mut problems = vec![curve.problem(&grids[0], j, opts.mass)];
    let n_lo = problems[0].count(e_min, action, hard);
    let n_hi = problems[0].count(e_max, action, hard);
    let ceil = if asym.is_finite() { asym } else { e_max + (e_max - e_min) };
    let floor = e_min - (e_max - e_min);
    // Per level: estimates on successive grids, and (grid index, E, change) once converged.
    let mut estimates: Vec<Vec<f64>> = vec![Vec::new(); n_hi - n_lo];
    let mut done: Vec<Option<(usize, f64, f64)>> = vec![None; n_hi - n_lo];
    for k in 0..3 + opts.max_refinements {
        if k > 0 {
            let g = grids[0].refined(1 << k);
            problems.push(curve.problem(&g, j, opts.mass));
            grids.push(g);
        }
        let p = &problems[k];
        let active: Vec<usize> = (0..done.len()).filter(|&i| done[i].is_none()).collect();
        let fresh: Vec<(usize, f64)> = active
            .par_iter()
            .map(|&i| {
                let v = n_lo + i;
                let e = match estimates[i].last() {
                    None => bisect_level(p, v, e_min, ceil, action, hard),
                    Some(&g) => {
                        let (lo, hi) = bracket(p, v, g, floor, ceil, action, hard);
                        bisect_level(p, v, lo, hi, action, hard)
                    }
                };
                (i, e)
            })
            .collect();
        for (i, e) in fresh {
            estimates[i].push(e);
            let est = &estimates[i];
            let n = est.len();
            if n >= 3 {
                let r1 = (16.0 * est[n - 2] - est[n - 3]) / 15.0;
                let r2 = (16.0 * est[n - 1] - est[n - 2]) / 15.0;
                let change = (r2 - r1).abs();
                if change <= opts.abs_tol.max(opts.rel_tol * r2.abs()) {
                    done[i] = Some((k, r2, change));
                }
            }
        }
        if done.iter().all(Option::is_some) {
            break;
        }
    }
    if let Some(i) = done.iter().position(Option::is_none) {
        let est = &estimates[i];
        return Err(Error::Convergence(format!(
            "level v = {} (J = {j}) did not converge; estimates {:?}",
            n_lo + i,
            est
        )));
    }
    // Wavefunctions all live on the finest grid reached so overlaps align node by node.
    let kf = done.iter().map(|d| d.unwrap().0).max().unwrap_or(0);
    let ctx = StateContext { curve, j, opts, hard };
    let states: Vec<Result<Option<BoundState>>> = done
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let (k, e, change) = d.expect("all converged");
            if e < e_min || e > e_max {
                return Ok(None);
            }
            let v = n_lo + i;
            let last = *estimates[i].last().unwrap();
            let e_grid = if k == kf {
                last
            } else {
                let (lo, hi) = bracket(&problems[kf], v, last, floor, ceil, action, hard);
                bisect_level(&problems[kf], v, lo, hi, action, hard)
            };
            build_state(&ctx, &problems[kf], &grids[kf], v, e_grid, e, change).map(Some)
        })
        .collect();
    let mut out = Vec::new();
    for s in states {
        if let Some(s) = s? {
            out.push(s);
        }
    }
    Ok(out)
}

struct StateContext<'a> {
    curve: &'a dyn Curve,
    j: u32,
    opts: &'a SolverOptions,
    hard: bool,
}

fn build_state(
    l: &StateContext,
    p: &Problem,
    g: &RadialGrid,
    v: usize,
    e_grid: f64,
    e: f64,
    change: f64,
) -> Result<BoundState> {
    let j = l.j;
    let w = p
        .window(e_grid, l.opts.decay_action, l.hard)
        .ok_or_else(|| Error::Convergence(format!("level v = {v} has no classically allowed region")))?;
    let comps = p.components(e_grid, w);
    let (lo, hi) = (w.lo, w.hi);
    let r: Vec<f64> = g.r[lo..=hi].to_vec();
    let mut weights: Vec<f64> = g.jac[lo..=hi].iter().map(|j| j * g.h).collect();
    let n = weights.len();
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    let mut components: Vec<Vec<f64>> = comps
        .iter()
        .map(|phi| (lo..=hi).map(|i| g.jac[i].sqrt() * phi[i]).collect())
        .collect();
    let norms: Vec<f64> = components
        .iter()
        .map(|c| c.iter().zip(&weights).map(|(u, w)| u * u * w).sum::<f64>())
        .collect();
    let total: f64 = norms.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Convergence(format!("level v = {v}: wavefunction norm is {total}")));
    }
    // Sign: first significant lobe of the dominant channel positive.
    let dom = norms.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|x| x.0).unwrap_or(0);
    let peak = components[dom].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let first = components[dom].iter().find(|x| x.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
    let scale = first.signum() / total.sqrt();
    for c in &mut components {
        for x in c.iter_mut() {
            *x *= scale;
        }
    }
    let turn = outer_extent(l.curve, j, e, l.opts.mass, r[0], 0.0, l.opts.r_cap)
        .map(|t| t.0)
        .unwrap_or(f64::NAN);
    Ok(BoundState {
        v,
        j,
        energy: e,
        r,
        weights,
        channel_weights: norms.iter().map(|x| x / total).collect(),
        components,
        outer_turning_point: turn,
        richardson_change: change,
    })
}

/// All bound levels with energies in `window` for angular momentum `j`.
pub fn bound_levels(p: &dyn Potential, j: u32, window: (f64, f64), opts: &SolverOptions) -> Result<Vec<BoundState>> {
    solve_levels(&Single(p), j, window, opts)
}

/// Levels of a two-channel coupled manifold; `v` is the eigenvalue index.
pub fn bound_levels_coupled(
    p: &CoupledPotential,
    j: u32,
    window: (f64, f64),
    opts: &SolverOptions,
) -> Result<Vec<BoundState>> {
    solve_levels(&Pair(p), j, window, opts)
}

/// Single-grid eigenvalue of level `v` at step `h` (no extrapolation); used
/// to measure the convergence order of the scheme.
pub fn level_at_step(p: &dyn Potential, j: u32, v: usize, r_range: (f64, f64), h: f64, opts: &SolverOptions) -> Result<f64> {
    let c = Single(p);
    let (hard, beta) = match p.inner() {
        InnerBoundary::Hard { .. } => (true, 0.0),
        InnerBoundary::Wall { .. } => (false, opts.beta.unwrap_or(500.0)),
    };
    let grid = RadialGrid::new(r_range.0, r_range.1, beta, h)?;
    let prob = c.problem(&grid, j, opts.mass);
    let asym = p.asymptote();
    let ceil = if asym.is_finite() { asym } else { 1e3 };
    let floor = (0..grid.len()).map(|i| p.value(grid.r[i])).fold(f64::INFINITY, f64::min);
    Ok(bisect_level(&prob, v, floor, ceil, opts.decay_action, hard))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{Harmonic, Morse, Shifted};
    use proptest::prelude::*;

    fn harmonic() -> Harmonic {
        Harmonic { omega: 1e-3, r0: 10.0, mass: REDUCED_MASS_RB85 }
    }

    #[test]
    fn harmonic_spectrum() {
        let p = harmonic();
        let levels = bound_levels(&p, 0, (0.0, 5.2e-3), &SolverOptions::default()).unwrap();
        assert_eq!(levels.len(), 5);
        for s in &levels {
            let exact = (s.v as f64 + 0.5) * 1e-3;
            assert!((s.energy - exact).abs() / exact < 1e-8, "v = {}: {} vs {exact}", s.v, s.energy);
            assert!((s.norm() - 1.0).abs() < 1e-8);
            assert_eq!(s.nodes(0), s.v);
        }
    }

    #[test]
    fn morse_spectrum() {
        let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
        let m = REDUCED_MASS_RB85;
        let levels = bound_levels(&p, 0, (0.0, 0.01), &SolverOptions::default()).unwrap();
        assert!(levels.len() > 10);
        for s in &levels {
            let exact = p.analytic_level(s.v, m);
            assert!((s.energy - exact).abs() / exact < 1e-7, "v = {}", s.v);
        }
    }

    #[test]
    fn harmonic_ground_state_shape() {
        let p = harmonic();
        let s = &bound_levels(&p, 0, (0.0, 1e-3), &SolverOptions::default()).unwrap()[0];
        let mw = p.mass * p.omega;
        let mut max_err = 0.0f64;
        let mut r: f64 = 9.5;
        while r < 10.5 {
            let exact = (mw / std::f64::consts::PI).powf(0.25) * (-0.5 * mw * (r - 10.0).powi(2)).exp();
            max_err = max_err.max((wavefunction_at(s, r).unwrap() - exact).abs());
            r += 0.0037;
        }
        assert!(max_err < 1e-6, "max error {max_err}");
        // exact at nodes
        let i = s.r.len() / 2;
        assert_eq!(wavefunction_at(s, s.r[i]).unwrap(), s.u()[i]);
        assert!(wavefunction_at(s, 1e4).is_err());
    }

    #[test]
    fn interpolant_normalization() {
        let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
        let s = &bound_levels(&p, 0, (0.002, 0.004), &SolverOptions::default()).unwrap()[0];
        let sp = s.spline(0);
        let (lo, hi) = s.r_range();
        let n = 200_000;
        let d = (hi - lo) / n as f64;
        let norm: f64 = (0..n).map(|k| sp.eval(lo + (k as f64 + 0.5) * d).powi(2) * d).sum();
        assert!((norm - 1.0).abs() < 1e-6, "{norm}");
    }

    #[test]
    fn orthonormal_levels() {
        let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
        let levels = bound_levels(&p, 0, (0.0, 0.006), &SolverOptions::default()).unwrap();
        for a in &levels {
            for b in &levels {
                let ov = crate::franckcondon::bound_bound_fc(a, b).unwrap().value;
                let want = if a.v == b.v { 1.0 } else { 0.0 };
                assert!((ov - want).abs() < 1e-6, "<{}|{}> = {ov}", a.v, b.v);
            }
        }
    }

    #[test]
    fn numerov_order() {
        let p = harmonic();
        let opts = SolverOptions { beta: Some(0.0), ..Default::default() };
        let exact = 2.5e-3;
        let steps = [0.02, 0.01, 0.005];
        let errs: Vec<f64> = steps
            .iter()
            .map(|&h| (level_at_step(&p, 0, 2, (8.5, 11.5), h, &opts).unwrap() - exact).abs())
            .collect();
        let slope1 = (errs[0] / errs[1]).log2();
        let slope2 = (errs[1] / errs[2]).log2();
        assert!((3.7..=4.3).contains(&slope1), "{slope1}");
        assert!((3.7..=4.3).contains(&slope2), "{slope2}");
    }

    #[test]
    fn window_above_asymptote_rejected() {
        let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
        assert!(matches!(bound_levels(&p, 0, (0.0, 0.03), &SolverOptions::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn centrifugal_raises_levels() {
        let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
        let o = SolverOptions::default();
        let e0 = bound_levels(&p, 0, (0.0, 0.002), &o).unwrap()[0].energy;
        let e1 = bound_levels(&p, 1, (0.0, 0.002), &o).unwrap()[0].energy;
        let b = 1.0 / (REDUCED_MASS_RB85 * 64.0);
        assert!((e1 - e0 - b).abs() < 0.05 * b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn constant_shift_moves_levels(shift in -0.01f64..0.01) {
            let p = Morse { depth: 0.02, a: 0.5, r0: 8.0, offset: 0.0 };
            let q = Shifted { inner: p, shift };
            let o = SolverOptions::default();
            let a = bound_levels(&p, 0, (0.0, 0.004), &o).unwrap();
            let b = bound_levels(&q, 0, (shift, shift + 0.004), &o).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((y.energy - x.energy - shift).abs() < 1e-10);
            }
        }
    }
}
