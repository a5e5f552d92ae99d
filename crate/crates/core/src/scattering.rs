//! Energy-normalized s-wave continuum states and threshold quantities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::franckcondon::{continuum_bound_fc, FcValue};
use crate::grid::RadialGrid;
use crate::numerov::ScalarProblem;
use crate::potentials::{InnerBoundary, Potential};
use crate::spectrum::{count_nodes, BoundState};
use crate::spline::CubicSpline;
use crate::units::{microkelvin, REDUCED_MASS_RB85};

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ContinuumOptions {
    pub mass: f64,
    /// Grid map parameter; `None` picks 1e5 a.u. for walls and 0 for hard
    /// cores. A large value makes the grid nearly logarithmic, which keeps
    /// the long asymptotic tail cheap.
    pub beta: Option<f64>,
    pub points_per_wavelength: f64,
    pub decay_action: f64,
    /// Asymptotic wavelengths kept beyond the potential range.
    pub extra_wavelengths: f64,
    /// Explicit outer radius; must leave `extra_wavelengths` beyond the range.
    pub r_max: Option<f64>,
    /// The potential range ends where |V - asymptote| < range_tol * E.
    pub range_tol: f64,
    /// Energies (a.u.) of the scattering-length ladder, descending.
    pub ladder: Vec<f64>,
}

impl Default for ContinuumOptions {
    fn default() -> Self {
        Self {
            mass: REDUCED_MASS_RB85,
            beta: None,
            points_per_wavelength: 40.0,
            decay_action: 25.0,
            extra_wavelengths: 3.0,
            r_max: None,
            range_tol: 1e-4,
            ladder: vec![microkelvin(1.0), microkelvin(0.5), microkelvin(0.25)],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuumState {
    /// Kinetic energy above the asymptote.
    pub energy: f64,
    pub j: u32,
    pub k: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub weights: Vec<f64>,
    /// sqrt(2m/(pi k)), the asymptotic amplitude of an energy-normalized wave.
    pub amplitude: f64,
    /// Phase shift reduced to (-pi/2, pi/2].
    pub phase_shift: f64,
    /// Phase shift fixed by node counting (Levinson convention).
    pub absolute_phase: f64,
    pub nodes: usize,
    /// Largest change of u/amplitude from the Richardson step.
    pub richardson_change: f64,
}

impl ContinuumState {
    pub fn spline(&self) -> CubicSpline {
        CubicSpline::new(self.r.clone(), self.u.clone()).expect("grid is increasing")
    }

    /// Largest |u| for r below `r_cut`.
    pub fn inner_amplitude(&self, r_cut: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.u)
            .take_while(|(r, _)| **r <= r_cut)
            .fold(0.0f64, |m, (_, u)| m.max(u.abs()))
    }
}

/// Radius beyond which |V - asymptote| < tol * e.
pub fn potential_range(p: &dyn Potential, e: f64, tol: f64) -> f64 {
    let start = p.tail_start();
    if !start.is_finite() {
        return f64::INFINITY;
    }
    let asym = p.asymptote();
    let mut last = start;
    let mut r = start.max(1e-3);
    while r < 1e8 {
        if (p.value(r) - asym).abs() >= tol * e {
            last = r;
        }
        r *= 1.01;
    }
    last
}

fn reduce_half_pi(d: f64) -> f64 {
    let mut x = d.rem_euclid(PI);
    if x > 0.5 * PI {
        x -= PI;
    }
    x
}

/// Continuum wave at kinetic energy `e` above threshold.
pub fn continuum_wave(p: &dyn Potential, e: f64, j: u32, opts: &ContinuumOptions) -> Result<ContinuumState> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Domain(format!("continuum energy {e} must be positive")));
    }
    if j != 0 {
        return Err(Error::Domain("continuum states are computed for s waves (J = 0) only".into()));
    }
    let asym = p.asymptote();
    if !asym.is_finite() {
        return Err(Error::Domain("potential has no continuum".into()));
    }
    let m = opts.mass;
    let k = (2.0 * m * e).sqrt();
    let lambda = 2.0 * PI / k;
    let range = potential_range(p, e, opts.range_tol);
    let need = range + opts.extra_wavelengths * lambda;
    let r_end = match opts.r_max {
        Some(r) if r < need => {
            return Err(Error::Config(format!(
                "outer radius {r} a.u. leaves fewer than {} wavelengths beyond the potential range {range:.1} a.u. (need {need:.1})",
                opts.extra_wavelengths
            )))
        }
        Some(r) => r,
        None => need,
    };
    let (r_start, hard) = match p.inner() {
        InnerBoundary::Wall { r_min } => (r_min, false),
        InnerBoundary::Hard { r0 } => (r0, true),
    };
    let beta = if hard || r_start <= 0.0 { 0.0 } else { opts.beta.unwrap_or(1e5) };
    let jac_at = |r: f64| if beta == 0.0 { 1.0 } else { r / (r + beta) };
    // Step from the largest local wavenumber inside the range, or the
    // asymptotic one; the map stretches most at r_end.
    let mut h = 2.0 * PI / (opts.points_per_wavelength * jac_at(r_end) * k);
    if range > r_start {
        let lo = r_start.max(1e-6);
        let n = 4000;
        for i in 0..=n {
            let r = lo * ((range / lo).ln() * i as f64 / n as f64).exp();
            let t = e - (p.value(r) - asym);
            if t > 0.0 {
                let kl = (2.0 * m * t).sqrt();
                h = h.min(2.0 * PI / (opts.points_per_wavelength * jac_at(r) * kl));
            }
        }
    }
    let coarse = RadialGrid::new(r_start, r_end, beta, h)?;
    let fine = coarse.refined(2);
    let pc = radial_problem(p, &coarse, m);
    let start = if hard {
        0
    } else {
        pc.window(e, opts.decay_action).map(|w| w.lo).unwrap_or(0)
    };
    let pf = radial_problem(p, &fine, m);
    let wc = normalized_wave(&coarse, &pc, e, k, start)?;
    let wf = normalized_wave(&fine, &pf, e, k, 2 * start)?;
    // Numerov errors are O(h^4) at fixed nodes; combine on the coarse nodes.
    let mut change = 0.0f64;
    let u: Vec<f64> = (start..coarse.len())
        .map(|i| {
            let x = (16.0 * wf.u[2 * i] - wc.u[i]) / 15.0;
            change = change.max((x - wf.u[2 * i]).abs());
            x
        })
        .collect();
    let absolute = (16.0 * wf.absolute - wc.absolute) / 15.0;
    let amplitude = (2.0 * m / (PI * k)).sqrt();
    let r = coarse.r[start..].to_vec();
    let mut weights: Vec<f64> = coarse.weights()[start..].to_vec();
    weights[0] = 0.5 * coarse.h * coarse.jac[start];
    Ok(ContinuumState {
        energy: e,
        j,
        k,
        r,
        u,
        weights,
        amplitude,
        phase_shift: reduce_half_pi(absolute),
        absolute_phase: absolute,
        nodes: wf.nodes,
        richardson_change: change / amplitude,
    })
}

fn radial_problem(p: &dyn Potential, grid: &RadialGrid, m: f64) -> ScalarProblem {
    let asym = p.asymptote();
    let n = grid.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let g2 = grid.jac[i] * grid.jac[i];
        a.push(g2 * 2.0 * m * (p.value(grid.r[i]) - asym) + grid.liouville[i]);
        b.push(2.0 * m * g2);
    }
    ScalarProblem { a, b, h: grid.h }
}

struct Wave {
    u: Vec<f64>,
    absolute: f64,
    nodes: usize,
}

/// Outward solution scaled to sqrt(2m/(pi k)) sin(kr + delta) in the tail.
fn normalized_wave(grid: &RadialGrid, prob: &ScalarProblem, e: f64, k: f64, start: usize) -> Result<Wave> {
    let n = grid.len();
    let m = prob.b[n - 1] / (2.0 * grid.jac[n - 1] * grid.jac[n - 1]);
    let lambda = 2.0 * PI / k;
    let phi = prob.propagate_outward(e, start);
    let mut u: Vec<f64> = phi.iter().zip(&grid.jac).map(|(f, g)| f * g.sqrt()).collect();
    // Discrete free wavenumber of the scheme on a uniform grid.
    let k_match = if grid.beta == 0.0 {
        let t = -grid.h * grid.h * k * k / 12.0;
        let uu = (2.0 + 10.0 * t) / (1.0 - t);
        (0.5 * uu).acos() / grid.h
    } else {
        k
    };
    let i2 = n - 1;
    let i1 = grid.nearest(grid.r[i2] - 0.25 * lambda).min(i2 - 1);
    let (r1, r2) = (grid.r[i1], grid.r[i2]);
    let (s1, c1) = (k_match * r1).sin_cos();
    let (s2, c2) = (k_match * r2).sin_cos();
    let det = s1 * c2 - s2 * c1;
    if det.abs() < 1e-6 {
        return Err(Error::Config("matching radii are degenerate; enlarge the grid".into()));
    }
    let cc = (u[i1] * c2 - u[i2] * c1) / det;
    let dd = (s1 * u[i2] - s2 * u[i1]) / det;
    let delta = dd.atan2(cc);
    let nodes = count_nodes(&u[start..]);
    // Node counting fixes the branch: floor((kR + delta)/pi) equals the node count.
    let turns = nodes as f64 - ((k_match * r2 + delta) / PI).floor();
    let sign = if (turns as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let scale = sign * (2.0 * m / (PI * k)).sqrt() / cc.hypot(dd);
    for x in u.iter_mut() {
        *x *= scale;
    }
    Ok(Wave { u, absolute: delta + turns * PI, nodes })
}

#[derive(Debug, Clone)]
pub struct ScatteringLength {
    pub value: f64,
    /// Difference between the three-point and two-point extrapolations.
    pub residual: f64,
    /// True when the k cot(delta) form gave the smaller residual.
    pub from_k_cot: bool,
    /// (E, delta mod pi) at each rung of the ladder.
    pub ladder: Vec<(f64, f64)>,
}

/// Polynomial extrapolation to E = 0 through all points (Neville).
fn extrapolate(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut p: Vec<f64> = points.iter().map(|x| x.1).collect();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (points[i].0, points[i + m].0);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

pub fn scattering_length(p: &dyn Potential) -> Result<ScatteringLength> {
    scattering_length_with(p, &ContinuumOptions::default())
}

/// a = -lim tan(delta)/k from a descending energy ladder.
///
/// Both -tan(delta)/k and k cot(delta) are extrapolated to E = 0; the
/// form whose three-point and two-point extrapolations agree better wins.
pub fn scattering_length_with(p: &dyn Potential, opts: &ContinuumOptions) -> Result<ScatteringLength> {
    if !p.asymptote().is_finite() {
        return Err(Error::Domain("potential has no continuum".into()));
    }
    if opts.ladder.len() < 2 {
        return Err(Error::InvalidInput("scattering-length ladder needs at least two energies".into()));
    }
    let mut ladder = Vec::new();
    let mut t = Vec::new();
    let mut c = Vec::new();
    for &e in &opts.ladder {
        let s = continuum_wave(p, e, 0, opts)?;
        ladder.push((e, s.phase_shift));
        let tan = s.phase_shift.tan();
        t.push((e, -tan / s.k));
        c.push((e, s.k / tan));
    }
    let n = t.len();
    let a1 = extrapolate(&t);
    let res1 = (a1 - extrapolate(&t[n - 2..])).abs();
    let inv_c3 = extrapolate(&c);
    let inv_c2 = extrapolate(&c[n - 2..]);
    let a2 = -1.0 / inv_c3;
    let res2 = (a2 + 1.0 / inv_c2).abs();
    let (value, residual, from_k_cot) = if a2.is_finite() && res2.is_finite() && res2 < res1 {
        (a2, res2, true)
    } else {
        (a1, res1, false)
    };
    if !value.is_finite() || residual > 0.05 * value.abs() + 1.0 {
        return Err(Error::Convergence(format!(
            "scattering-length ladder does not converge (threshold resonance?): a = {value:.6e}, residual {residual:.3e}, ladder (E, delta) = {ladder:?}"
        )));
    }
    Ok(ScatteringLength { value, residual, from_k_cot, ladder })
}

/// Continuum-bound overlaps across a list of collision energies.
pub fn threshold_scan(
    p: &dyn Potential,
    bound: &BoundState,
    energies: &[f64],
    opts: &ContinuumOptions,
) -> Result<Vec<(f64, FcValue)>> {
    if energies.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("scan energies must be positive".into()));
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("scan energies must be sorted ascending".into()));
    }
    energies
        .par_iter()
        .map(|&e| {
            let c = continuum_wave(p, e, 0, opts)?;
            Ok((e, continuum_bound_fc(&c, bound)?))
        })
        .collect()
}

/// Least-squares slope of ln|FC| against ln E over the lowest decade of the scan.
pub fn loglog_slope(scan: &[(f64, f64)]) -> Option<f64> {
    let e0 = scan.first()?.0;
    let pts: Vec<(f64, f64)> = scan
        .iter()
        .filter(|(e, _)| *e <= 10.0 * e0 * (1.0 + 1e-12))
        .map(|(e, f)| (e.ln(), f.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
