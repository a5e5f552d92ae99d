//! Diatomic potential curves.
//!
//! A [`RadialPotential`] is a tabulated short-range curve joined to an
//! `asymptote - C6/r^6` tail by a cubic switch over
//! `[r_interp - w, r_interp + w]`. A [`CoupledPotential`] pairs two such
//! curves with an off-diagonal coupling table.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// How the radial problem is closed at small r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerBoundary {
    /// Smooth repulsive wall; the domain starts at `r_min` and the solver
    /// truncates wherever the wavefunction has decayed.
    Wall { r_min: f64 },
    /// Impenetrable core: u(r0) = 0.
    Hard { r0: f64 },
}

pub trait Potential: Send + Sync {
    /// Potential energy at r (a.u.); callers stay inside the domain.
    fn value(&self, r: f64) -> f64;
    /// Dissociation limit; `f64::INFINITY` for confining curves.
    fn asymptote(&self) -> f64;
    fn inner(&self) -> InnerBoundary;
    /// Radius beyond which the curve is at most a pure dispersion tail.
    fn tail_start(&self) -> f64;
}

impl<P: Potential + ?Sized> Potential for &P {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn asymptote(&self) -> f64 {
        (**self).asymptote()
    }
    fn inner(&self) -> InnerBoundary {
        (**self).inner()
    }
    fn tail_start(&self) -> f64 {
        (**self).tail_start()
    }
}

impl<P: Potential + ?Sized> Potential for Box<P> {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn asymptote(&self) -> f64 {
        (**self).asymptote()
    }
    fn inner(&self) -> InnerBoundary {
        (**self).inner()
    }
    fn tail_start(&self) -> f64 {
        (**self).tail_start()
    }
}

/// Cubic Hermite switch s(x) = 3x^2 - 2x^3 clamped to [0, 1].
pub fn switch(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

#[derive(Debug, Clone)]
pub struct RadialPotential {
    short_range: CubicSpline,
    pub c6: f64,
    pub r_interp: f64,
    pub blend_halfwidth: f64,
    pub asymptote: f64,
}

impl RadialPotential {
    pub fn new(
        r: Vec<f64>,
        v: Vec<f64>,
        c6: f64,
        r_interp: f64,
        blend_halfwidth: f64,
        asymptote: f64,
    ) -> Result<Self> {
        if let Some(i) = v.iter().chain(r.iter()).position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite table entry at position {i}")));
        }
        if !(blend_halfwidth > 0.0) {
            return Err(Error::InvalidInput("blend half-width must be positive".into()));
        }
        if !c6.is_finite() || !r_interp.is_finite() || !asymptote.is_finite() {
            return Err(Error::InvalidInput("non-finite potential parameter".into()));
        }
        let short_range = CubicSpline::new(r, v)?;
        if short_range.x_min() <= 0.0 {
            return Err(Error::InvalidInput("table must start at r > 0".into()));
        }
        if r_interp - blend_halfwidth < short_range.x_min() || r_interp + blend_halfwidth > short_range.x_max() {
            return Err(Error::InvalidInput(format!(
                "blend window [{}, {}] leaves the table range [{}, {}]",
                r_interp - blend_halfwidth,
                r_interp + blend_halfwidth,
                short_range.x_min(),
                short_range.x_max()
            )));
        }
        Ok(Self { short_range, c6, r_interp, blend_halfwidth, asymptote })
    }

    pub fn table(&self) -> (&[f64], &[f64]) {
        self.short_range.knots()
    }

    pub fn r_min(&self) -> f64 {
        self.short_range.x_min()
    }

    /// Same table and tail with a different interpolation radius.
    pub fn with_r_interp(&self, r_interp: f64) -> Result<Self> {
        let (r, v) = self.table();
        Self::new(r.to_vec(), v.to_vec(), self.c6, r_interp, self.blend_halfwidth, self.asymptote)
    }

    pub fn tail(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.asymptote - self.c6 / (r2 * r2 * r2)
    }

    /// dV/dr, using the analytic switch and tail derivatives.
    pub fn derivative(&self, r: f64) -> f64 {
        let lo = self.r_interp - self.blend_halfwidth;
        let hi = self.r_interp + self.blend_halfwidth;
        let tail_d = 6.0 * self.c6 / r.powi(7);
        if r >= hi {
            tail_d
        } else if r <= lo {
            self.short_range.derivative(r)
        } else {
            let w = 2.0 * self.blend_halfwidth;
            let x = (r - lo) / w;
            let s = switch(x);
            let ds = 6.0 * x * (1.0 - x) / w;
            let sr = self.short_range.eval(r);
            (1.0 - s) * self.short_range.derivative(r) + s * tail_d + ds * (self.tail(r) - sr)
        }
    }

    /// Checked evaluation.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("r = {r} must be positive")));
        }
        if r < self.r_min() {
            return Err(Error::Domain(format!("r = {r} is below the table minimum {}", self.r_min())));
        }
        Ok(self.value(r))
    }
}

impl Potential for RadialPotential {
    fn value(&self, r: f64) -> f64 {
        let lo = self.r_interp - self.blend_halfwidth;
        let hi = self.r_interp + self.blend_halfwidth;
        if r >= hi {
            self.tail(r)
        } else if r <= lo {
            self.short_range.eval(r)
        } else {
            let s = switch((r - lo) / (2.0 * self.blend_halfwidth));
            (1.0 - s) * self.short_range.eval(r) + s * self.tail(r)
        }
    }
    fn asymptote(&self) -> f64 {
        self.asymptote
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Wall { r_min: self.r_min() }
    }
    fn tail_start(&self) -> f64 {
        self.r_interp + self.blend_halfwidth
    }
}

/// Two diabatic curves with a symmetric coupling.
#[derive(Debug, Clone)]
pub struct CoupledPotential {
    pub channels: [RadialPotential; 2],
    coupling: CubicSpline,
}

impl CoupledPotential {
    pub fn new(a: RadialPotential, b: RadialPotential, r: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let coupling = CubicSpline::new(r, w)?;
        Ok(Self { channels: [a, b], coupling })
    }

    /// Off-diagonal element; constant beyond the table.
    pub fn coupling(&self, r: f64) -> f64 {
        let r = r.clamp(self.coupling.x_min(), self.coupling.x_max());
        self.coupling.eval(r)
    }

    pub fn matrix(&self, r: f64) -> Matrix2<f64> {
        let w = self.coupling(r);
        Matrix2::new(self.channels[0].value(r), w, w, self.channels[1].value(r))
    }

    /// Lowest eigenvalue of the potential matrix at infinity.
    pub fn asymptote(&self) -> f64 {
        let (a, b) = (self.channels[0].asymptote, self.channels[1].asymptote);
        let w = self.coupling(f64::INFINITY);
        0.5 * (a + b) - (0.25 * (a - b) * (a - b) + w * w).sqrt()
    }

    pub fn r_min(&self) -> f64 {
        self.channels[0].r_min().max(self.channels[1].r_min())
    }

    pub fn tail_start(&self) -> f64 {
        self.channels[0].tail_start().max(self.channels[1].tail_start()).max(self.coupling.x_max())
    }
}

/// Either kind of curve produced by [`load_potential`].
#[derive(Debug, Clone)]
pub enum LoadedPotential {
    Single(RadialPotential),
    Coupled(CoupledPotential),
}

/// V = m w^2 (r - r0)^2 / 2.
#[derive(Debug, Clone, Copy)]
pub struct Harmonic {
    pub omega: f64,
    pub r0: f64,
    pub mass: f64,
}

impl Potential for Harmonic {
    fn value(&self, r: f64) -> f64 {
        0.5 * self.mass * self.omega * self.omega * (r - self.r0).powi(2)
    }
    fn asymptote(&self) -> f64 {
        f64::INFINITY
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Wall { r_min: 1e-3 * self.r0 }
    }
    fn tail_start(&self) -> f64 {
        f64::INFINITY
    }
}

/// V = D (1 - exp(-a (r - r0)))^2 + offset.
#[derive(Debug, Clone, Copy)]
pub struct Morse {
    pub depth: f64,
    pub a: f64,
    pub r0: f64,
    pub offset: f64,
}

impl Morse {
    /// Closed-form levels relative to the minimum, for reduced mass `m`.
    pub fn analytic_level(&self, v: usize, m: f64) -> f64 {
        let w = self.a * (2.0 * self.depth / m).sqrt();
        let x = v as f64 + 0.5;
        self.offset + w * x - (w * x).powi(2) / (4.0 * self.depth)
    }
}

impl Potential for Morse {
    fn value(&self, r: f64) -> f64 {
        self.offset + self.depth * (1.0 - (-self.a * (r - self.r0)).exp()).powi(2)
    }
    fn asymptote(&self) -> f64 {
        self.offset + self.depth
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Wall { r_min: 0.25 * self.r0 }
    }
    fn tail_start(&self) -> f64 {
        self.r0 + 40.0 / self.a
    }
}

/// V = 0 outside an impenetrable sphere of radius R.
#[derive(Debug, Clone, Copy)]
pub struct HardSphere {
    pub radius: f64,
}

impl Potential for HardSphere {
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn asymptote(&self) -> f64 {
        0.0
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Hard { r0: self.radius }
    }
    fn tail_start(&self) -> f64 {
        self.radius
    }
}

/// Free particle.
#[derive(Debug, Clone, Copy)]
pub struct Zero;

impl Potential for Zero {
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn asymptote(&self) -> f64 {
        0.0
    }
    fn inner(&self) -> InnerBoundary {
        InnerBoundary::Hard { r0: 0.0 }
    }
    fn tail_start(&self) -> f64 {
        0.0
    }
}

/// A potential shifted by a constant.
#[derive(Debug, Clone, Copy)]
pub struct Shifted<P> {
    pub inner: P,
    pub shift: f64,
}

impl<P: Potential> Potential for Shifted<P> {
    fn value(&self, r: f64) -> f64 {
        self.inner.value(r) + self.shift
    }
    fn asymptote(&self) -> f64 {
        self.inner.asymptote() + self.shift
    }
    fn inner(&self) -> InnerBoundary {
        self.inner.inner()
    }
    fn tail_start(&self) -> f64 {
        self.inner.tail_start()
    }
}

/// Lennard-Jones 12-6 curve D((re/r)^12 - 2(re/r)^6) sampled on a uniform table.
pub fn lennard_jones_table(depth: f64, r_e: f64, r_lo: f64, r_hi: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ((r_hi - r_lo) / step).round() as usize;
    let r: Vec<f64> = (0..=n).map(|i| r_lo + step * i as f64).collect();
    let v = r
        .iter()
        .map(|&x| {
            let s6 = (r_e / x).powi(6);
            depth * (s6 * s6 - 2.0 * s6)
        })
        .collect();
    (r, v)
}

/// Dispersion coefficient of the ground-state model (a.u.).
pub const X_C6: f64 = 4426.0;
/// Well depth of the synthetic ground-state short-range curve.
pub const X_DEPTH: f64 = 0.01932;
/// Equilibrium distance of the synthetic ground-state curve.
pub const X_RE: f64 = 7.95;
/// Scan range for the interpolation radius during calibration.
pub const X_SCAN: (f64, f64) = (36.0, 56.0);
/// Radius near which the resonant branch is sought.
pub const X_REFERENCE_R: f64 = 42.0;

/// The uncalibrated synthetic ground-state curve at a given interpolation radius.
pub fn synthetic_x_curve(r_interp: f64) -> Result<RadialPotential> {
    let (r, v) = lennard_jones_table(X_DEPTH, X_RE, 4.0, 80.0, 0.01);
    RadialPotential::new(r, v, X_C6, r_interp, 1.0, 0.0)
}

/// Synthetic ground-state model whose s-wave scattering length is `target`.
///
/// The interpolation radius is scanned across [`X_SCAN`]; the resonance
/// (pole of a) nearest [`X_REFERENCE_R`] fixes a branch, and the radius is
/// refined by Brent's method on that branch. If the branch holds no root,
/// the root nearest the reference radius anywhere in the scan is used.
pub fn builtin_x_model(target: f64) -> Result<RadialPotential> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let hit = cache.lock().unwrap().get(&target.to_bits()).copied();
    if let Some(ri) = hit {
        return synthetic_x_curve(ri);
    }
    let p = builtin_x_model_with(target, &crate::scattering::ContinuumOptions::default())?;
    cache.lock().unwrap().insert(target.to_bits(), p.r_interp);
    Ok(p)
}

pub fn builtin_x_model_with(target: f64, opts: &crate::scattering::ContinuumOptions) -> Result<RadialPotential> {
    if !target.is_finite() || target == 0.0 {
        return Err(Error::InvalidInput(format!("scattering-length target {target} must be finite and nonzero")));
    }
    let base = synthetic_x_curve(X_REFERENCE_R)?;
    let a_of = |ri: f64| -> Result<f64> {
        let p = base.with_r_interp(ri)?;
        Ok(crate::scattering::scattering_length_with(&p, opts)?.value)
    };
    // Bracketing only needs a few digits; the final solve uses `opts`.
    let rough = crate::scattering::ContinuumOptions {
        points_per_wavelength: opts.points_per_wavelength.min(10.0),
        ..opts.clone()
    };
    let rough_a = |ri: f64| -> Result<f64> {
        let p = base.with_r_interp(ri)?;
        Ok(crate::scattering::scattering_length_with(&p, &rough)?.value)
    };
    let (lo, hi) = X_SCAN;
    let steps = ((hi - lo) / 0.25).round() as usize;
    let mut scan = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let ri = lo + 0.25 * i as f64;
        // Values straddling a threshold resonance fail the ladder; skip them.
        if let Ok(a) = rough_a(ri) {
            scan.push((ri, a));
        }
    }
    // Branch boundaries: a jumps from -inf to +inf as r_interp grows.
    let pole_windows: Vec<(f64, f64, f64)> = scan
        .windows(2)
        .filter(|w| w[0].1 < 0.0 && w[1].1 > 0.0 && (w[1].1 - w[0].1).abs() > 2000.0)
        .map(|w| (w[0].0, w[1].0, w[1].1))
        .collect();
    // Roots: f = a - target goes from positive to negative within a branch.
    let mut roots: Vec<(f64, f64)> = scan
        .windows(2)
        .filter(|w| w[0].1 - target > 0.0 && w[1].1 - target <= 0.0)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    let e_low = opts.ladder.iter().copied().fold(f64::INFINITY, f64::min);
    let mut poles = Vec::new();
    for &(x0, x1, a1) in &pole_windows {
        let pole = refine_pole(&base, x0, x1, e_low, &rough)?;
        poles.push(pole);
        // A large target can sit between the pole and the next scan point.
        if target > 0.0 && a1 < target {
            let mut d = 1e-3;
            while pole + d < x1 {
                if let Ok(a) = rough_a(pole + d) {
                    if a > target {
                        roots.push((pole + d, x1));
                    }
                    break;
                }
                d *= 2.0;
            }
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    let pole = poles
        .iter()
        .copied()
        .min_by(|a, b| (a - X_REFERENCE_R).abs().total_cmp(&(b - X_REFERENCE_R).abs()));
    let on_branch = pole.and_then(|p| {
        let next = poles.iter().copied().filter(|&q| q > p).fold(f64::INFINITY, f64::min);
        roots.iter().copied().find(|&(a, b)| a >= p && b <= next)
    });
    let bracket = on_branch
        .or_else(|| {
            roots.iter().copied().min_by(|x, y| {
                (x.0 - X_REFERENCE_R).abs().total_cmp(&(y.0 - X_REFERENCE_R).abs())
            })
        })
        .ok_or_else(|| {
            Error::Calibration(format!(
                "no interpolation radius in [{lo}, {hi}] reproduces a = {target} a.u."
            ))
        })?;
    let ri = brent(|x| a_of(x).map(|a| a - target), bracket.0, bracket.1, 1e-7)?;
    base.with_r_interp(ri)
}

/// Locate a threshold resonance in [x0, x1] by bisection on the sign of the
/// phase shift at the lowest ladder energy (it jumps through +-pi/2 there).
fn refine_pole(
    base: &RadialPotential,
    mut x0: f64,
    mut x1: f64,
    e: f64,
    opts: &crate::scattering::ContinuumOptions,
) -> Result<f64> {
    let sign = |x: f64| -> Result<bool> {
        let p = base.with_r_interp(x)?;
        Ok(crate::scattering::continuum_wave(&p, e, 0, opts)?.phase_shift > 0.0)
    };
    // a < 0 (positive phase) below the pole, a > 0 above it
    while x1 - x0 > 1e-5 {
        let mid = 0.5 * (x0 + x1);
        if sign(mid)? {
            x0 = mid;
        } else {
            x1 = mid;
        }
    }
    Ok(x1)
}

/// Brent's method for a bracketed sign change.
pub fn brent<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa * fb > 0.0 {
        return Err(Error::Calibration(format!("root not bracketed in [{a}, {b}]")));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let out = !((s > q.min(b)) && (s < q.max(b)));
        if out
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < tol)
            || (!mflag && (c - d).abs() < tol)
        {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(Error::Calibration("Brent iteration did not converge".into()))
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    let ok = !tok.is_empty()
        && tok.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && tok.chars().any(|c| c.is_ascii_digit());
    let v: f64 = if ok {
        tok.parse().map_err(|_| Error::Parse { line, msg: format!("'{tok}' is not a number") })?
    } else {
        return Err(Error::Parse { line, msg: format!("'{tok}' is not a decimal or scientific number") });
    };
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("'{tok}' is not finite") });
    }
    Ok(v)
}

/// Parse the plain-text potential format (see README).
pub fn parse_potential(text: &str) -> Result<LoadedPotential> {
    let mut c6 = None;
    let mut c6_b = None;
    let mut r_interp = None;
    let mut asymptote = 0.0;
    let mut asymptote_b = None;
    let mut blend = 1.0;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some((key, val)) = s.split_once('=') {
            let v = parse_number(val.trim(), line)?;
            match key.trim() {
                "c6" => c6 = Some(v),
                "c6_b" => c6_b = Some(v),
                "r_interp" => r_interp = Some(v),
                "asymptote" => asymptote = v,
                "asymptote_b" => asymptote_b = Some(v),
                "blend_halfwidth" => blend = v,
                other => return Err(Error::Parse { line, msg: format!("unknown directive '{other}'") }),
            }
            continue;
        }
        let cols = s.split_whitespace().map(|t| parse_number(t, line)).collect::<Result<Vec<_>>>()?;
        if cols.len() != 2 && cols.len() != 4 {
            return Err(Error::Parse { line, msg: format!("expected 2 or 4 columns, found {}", cols.len()) });
        }
        if let Some((pl, prev)) = rows.last() {
            if prev.len() != cols.len() {
                return Err(Error::Parse { line, msg: format!("column count changed from line {pl}") });
            }
            if cols[0] <= prev[0] {
                return Err(Error::Parse { line, msg: "r column is not strictly increasing".into() });
            }
        }
        rows.push((line, cols));
    }
    let last_line = text.lines().count();
    let c6 = c6.ok_or(Error::Parse { line: last_line, msg: "missing 'c6 = ...' directive".into() })?;
    if rows.len() < 4 {
        return Err(Error::Parse { line: last_line, msg: "table needs at least four rows".into() });
    }
    let r: Vec<f64> = rows.iter().map(|(_, c)| c[0]).collect();
    let r_hi = *r.last().unwrap();
    let r_interp = r_interp.unwrap_or(r_hi - blend);
    let wrap = |e: Error| match e {
        Error::InvalidInput(msg) => Error::Parse { line: last_line, msg },
        other => other,
    };
    let col = |k: usize| rows.iter().map(|(_, c)| c[k]).collect::<Vec<f64>>();
    if rows[0].1.len() == 2 {
        let p = RadialPotential::new(r, col(1), c6, r_interp, blend, asymptote).map_err(wrap)?;
        Ok(LoadedPotential::Single(p))
    } else {
        let a = RadialPotential::new(r.clone(), col(1), c6, r_interp, blend, asymptote).map_err(wrap)?;
        let b = RadialPotential::new(
            r.clone(),
            col(2),
            c6_b.unwrap_or(c6),
            r_interp,
            blend,
            asymptote_b.unwrap_or(asymptote),
        )
        .map_err(wrap)?;
        Ok(LoadedPotential::Coupled(CoupledPotential::new(a, b, r, col(3)).map_err(wrap)?))
    }
}

pub fn load_potential(path: impl AsRef<Path>) -> Result<LoadedPotential> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_potential(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> RadialPotential {
        synthetic_x_curve(42.0).unwrap()
    }

    #[test]
    fn far_tail_is_dispersion() {
        let p = model();
        let v = p.evaluate(1e6).unwrap();
        assert!((v - (-4.426e-33)).abs() < 1e-45);
        assert!(p.evaluate(1e100).unwrap().abs() < 1e-300);
    }

    #[test]
    fn mid_blend_matches_switch_formula() {
        let p = model();
        let r = p.r_interp + 0.3;
        let x: f64 = (r - (p.r_interp - 1.0)) / 2.0;
        let s = 3.0 * x * x - 2.0 * x * x * x;
        let s6 = (X_RE / r).powi(6);
        let lj = X_DEPTH * (s6 * s6 - 2.0 * s6);
        let tail = -X_C6 / r.powi(6);
        let expected = (1.0 - s) * lj + s * tail;
        assert!((p.evaluate(r).unwrap() - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn domain_errors() {
        let p = model();
        assert!(matches!(p.evaluate(0.0), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(-1.0), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn c1_continuity_across_blend() {
        let p = model();
        let lo = p.r_interp - p.blend_halfwidth;
        let hi = p.r_interp + p.blend_halfwidth;
        for edge in [lo, hi] {
            // one-sided slopes agree, and the gap closes linearly with eps
            let gap = |eps: f64| (p.derivative(edge + eps) - p.derivative(edge - eps)).abs();
            let v1 = p.derivative(edge).abs();
            assert!(gap(1e-10) < 1e-8 * v1, "slope mismatch at {edge}");
            assert!(gap(1e-7) < 2e-2 * gap(1e-5) + 1e-12 * v1);
        }
        // finite-difference scan: the slope agrees with the analytic derivative everywhere
        let d = 1e-6;
        let mut r = lo - 0.5;
        while r < hi + 0.5 {
            let fd = (p.value(r + d) - p.value(r - d)) / (2.0 * d);
            let an = p.derivative(r);
            assert!((fd - an).abs() < 1e-5 * an.abs() + 1e-16, "r = {r}: {fd} vs {an}");
            r += 0.01;
        }
    }

    #[test]
    fn parse_two_column() {
        let text = "# test\nc6 = 4426\nr_interp = 5.0\n1.0 1.0\n2.0 0.5\n3.0 0.2\n4.0 0.1\n5.0 0.05\n6.0 0.02\n7.0 0.01\n";
        match parse_potential(text).unwrap() {
            LoadedPotential::Single(p) => {
                assert_eq!(p.c6, 4426.0);
                assert_eq!(p.r_interp, 5.0);
            }
            _ => panic!("expected single channel"),
        }
    }

    #[test]
    fn parse_four_column() {
        let mut text = String::from("c6 = 100\nasymptote = 0.05\nasymptote_b = 0.06\n");
        for i in 0..10 {
            let r = 2.0 + i as f64;
            text += &format!("{r} {} {} 0.001\n", 1.0 / r, 2.0 / r);
        }
        match parse_potential(&text).unwrap() {
            LoadedPotential::Coupled(c) => {
                let m = c.matrix(4.0);
                assert_eq!(m[(0, 1)], m[(1, 0)]);
                assert!((c.coupling(1e9) - 0.001).abs() < 1e-15);
            }
            _ => panic!("expected coupled"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "c6 = 1\n1.0 1.0\n2.0 1.0\n1.5 1.0\n";
        match parse_potential(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let nan = "c6 = 1\n1.0 nan\n";
        assert!(matches!(parse_potential(nan), Err(Error::Parse { line: 2, .. })));
        let missing = "1.0 1.0\n2.0 1.0\n3.0 1.0\n4.0 1.0\n";
        assert!(matches!(parse_potential(missing), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn tail_exact_beyond_blend(r in 43.0f64..1e5) {
            let p = model();
            let v = p.value(r);
            let want = -X_C6 / (r * r * r * r * r * r);
            prop_assert!((v - p.asymptote - want).abs() <= 1e-15 * want.abs());
        }

        #[test]
        fn coupled_matrix_symmetric(r in 2.0f64..50.0) {
            let mut text = String::from("c6 = 100\n");
            for i in 0..20 {
                let x = 2.0 + i as f64 * 2.0;
                text += &format!("{x} {} {} {}\n", 1.0 / x, 2.0 / x, 0.01 / x);
            }
            if let LoadedPotential::Coupled(c) = parse_potential(&text).unwrap() {
                let m = c.matrix(r);
                prop_assert_eq!(m[(0, 1)], m[(1, 0)]);
            }
        }
    }
}
