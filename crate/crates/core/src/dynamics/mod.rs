//! Amplitude equations for photoassociation by adiabatic passage.
//!
//! Bound amplitudes b_i couple through pulses in the rotating-wave picture;
//! the scattering continuum enters either through its slowly-varying
//! elimination (a source F0(t) plus a loss pi |Omega_E|^2) or as an explicit
//! discretized band.

mod branching;
mod full;
pub mod ode;
mod svca;

pub use branching::{branching_from_fc, decay_accumulation, pi_pulse_intensity, Branching};
pub use full::{integrate_full_rwa, ContinuumGrid};
pub use svca::{integrate_bound, integrate_multilinkage, integrate_svca, phase_sweep, MultilinkageResult};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    SinSquared,
    Gaussian,
}

#[derive(Debug, Clone)]
pub struct PulseEnvelope {
    pub shape: PulseShape,
    /// Full width at half maximum of the field envelope.
    pub fwhm: f64,
    pub center: f64,
    pub peak_field: f64,
    /// Detuning of the carrier from its transition.
    pub detuning: f64,
    /// Carrier phase (radians).
    pub phase: f64,
    pub polarization: String,
}

impl PulseEnvelope {
    pub fn sin_squared(center: f64, fwhm: f64, peak_field: f64) -> Self {
        Self {
            shape: PulseShape::SinSquared,
            fwhm,
            center,
            peak_field,
            detuning: 0.0,
            phase: 0.0,
            polarization: String::new(),
        }
    }

    /// Real field envelope at `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::SinSquared => {
                // sin^2 over a support of twice the FWHM
                let x = (t - self.center + self.fwhm) / (2.0 * self.fwhm);
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    self.peak_field * (PI * x).sin().powi(2)
                }
            }
            PulseShape::Gaussian => {
                let s = (t - self.center) / self.fwhm;
                self.peak_field * (-4.0 * std::f64::consts::LN_2 * s * s).exp()
            }
        }
    }

    /// Complex field including the carrier phase.
    pub fn field(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.envelope(t), self.phase)
    }

    /// Interval outside which the envelope vanishes (Gaussians: below 1e-16 of peak).
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            PulseShape::SinSquared => (self.center - self.fwhm, self.center + self.fwhm),
            PulseShape::Gaussian => {
                let w = self.fwhm * (16.0 * std::f64::consts::LN_10 / (4.0 * std::f64::consts::LN_2)).sqrt();
                (self.center - w, self.center + w)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0) || !self.center.is_finite() || !(self.peak_field >= 0.0) || !self.detuning.is_finite() {
            return Err(Error::InvalidInput(format!(
                "pulse needs fwhm > 0, finite center/detuning and peak field >= 0 (got fwhm {}, field {})",
                self.fwhm, self.peak_field
            )));
        }
        Ok(())
    }
}

/// Energy dependence of a continuum coupling, relative to its value at the
/// reference energy.
#[derive(Debug, Clone, PartialEq)]
pub enum FcProfile {
    Constant,
    /// (E / e_ref)^exponent; the Wigner threshold law has exponent 1/4.
    PowerLaw { e_ref: f64, exponent: f64 },
    /// Linear interpolation in a table of factors; zero outside.
    Table { energies: Vec<f64>, factors: Vec<f64> },
}

impl FcProfile {
    pub fn factor(&self, e: f64) -> f64 {
        match self {
            FcProfile::Constant => 1.0,
            FcProfile::PowerLaw { e_ref, exponent } => {
                if e <= 0.0 {
                    0.0
                } else {
                    (e / e_ref).powf(*exponent)
                }
            }
            FcProfile::Table { energies, factors } => {
                let n = energies.len();
                if n == 0 || e < energies[0] || e > energies[n - 1] {
                    return 0.0;
                }
                let i = energies.partition_point(|x| *x <= e).clamp(1, n - 1);
                let (x0, x1) = (energies[i - 1], energies[i]);
                let w = if x1 > x0 { (e - x0) / (x1 - x0) } else { 0.0 };
                factors[i - 1] * (1.0 - w) + factors[i] * w
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundLevel {
    pub label: String,
    pub energy: f64,
    /// Loss rate Gamma_f out of the amplitude equations.
    pub decay: f64,
}

/// Bound-bound coupling; `lower` sits below `upper`.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub lower: usize,
    pub upper: usize,
    /// Transition dipole times FC factor.
    pub dipole_fc: f64,
    pub pulse: usize,
}

#[derive(Debug, Clone)]
pub struct ContinuumEdge {
    pub state: usize,
    /// Transition dipole times the continuum-bound FC factor (energy^-1/2).
    pub dipole_fc: f64,
    pub pulse: usize,
    pub profile: FcProfile,
}

#[derive(Debug, Clone, Default)]
pub struct LinkageScheme {
    pub states: Vec<BoundLevel>,
    pub couplings: Vec<Coupling>,
    pub continuum_edges: Vec<ContinuumEdge>,
}

impl LinkageScheme {
    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    /// Targets of continuum edges.
    pub fn intermediates(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.continuum_edges.iter().map(|e| e.state).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn validate(&self, n_pulses: usize) -> Result<()> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::InvalidInput("scheme has no bound states".into()));
        }
        for c in &self.couplings {
            if c.lower >= n || c.upper >= n || c.lower == c.upper {
                return Err(Error::InvalidInput(format!("coupling {}-{} references unknown states", c.lower, c.upper)));
            }
            if c.pulse >= n_pulses {
                return Err(Error::InvalidInput(format!("coupling references undeclared pulse {}", c.pulse)));
            }
        }
        for e in &self.continuum_edges {
            if e.state >= n || e.pulse >= n_pulses {
                return Err(Error::InvalidInput("continuum edge references an unknown state or pulse".into()));
            }
        }
        for s in &self.states {
            if !(s.decay >= 0.0) {
                return Err(Error::InvalidInput(format!("state {} has negative decay rate", s.label)));
            }
        }
        // Connectivity, with the continuum as an extra node.
        let mut parent: Vec<usize> = (0..=n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let join = |a: usize, b: usize, p: &mut Vec<usize>| {
            let (ra, rb) = (find(p, a), find(p, b));
            p[ra] = rb;
        };
        for c in &self.couplings {
            join(c.lower, c.upper, &mut parent);
        }
        for e in &self.continuum_edges {
            join(e.state, n, &mut parent);
        }
        let nodes = if self.continuum_edges.is_empty() { n } else { n + 1 };
        let root = find(&mut parent, 0);
        if (1..nodes).any(|i| find(&mut parent, i) != root) {
            return Err(Error::InvalidInput("coupling graph is not connected".into()));
        }
        Ok(())
    }
}

/// Initial scattering wave packet.
#[derive(Debug, Clone)]
pub struct ContinuumPacket {
    pub e0: f64,
    pub delta_e: f64,
    pub t0: f64,
    /// Energy resonant with the pump (zero of Delta_2); defaults to `e0`.
    pub e_ref: Option<f64>,
    /// Population carried by the packet (1 for a normalized packet).
    pub weight: f64,
    /// Explicit b_E(0) table replacing the Gaussian, sorted in E.
    pub profile: Option<Vec<(f64, Complex64)>>,
}

impl ContinuumPacket {
    pub fn gaussian(e0: f64, delta_e: f64, t0: f64) -> Self {
        Self { e0, delta_e, t0, e_ref: None, weight: 1.0, profile: None }
    }

    pub fn reference_energy(&self) -> f64 {
        self.e_ref.unwrap_or(self.e0)
    }

    /// b_E(0), including the packet weight.
    pub fn amplitude(&self, e: f64) -> Complex64 {
        let s = self.weight.sqrt();
        match &self.profile {
            None => {
                let d = e - self.e0;
                let mag = (self.delta_e * self.delta_e * PI).powf(-0.25) * (-d * d / (2.0 * self.delta_e * self.delta_e)).exp();
                Complex64::from_polar(s * mag, d * self.t0)
            }
            Some(tab) => {
                let n = tab.len();
                if n == 0 || e < tab[0].0 || e > tab[n - 1].0 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = tab.partition_point(|x| x.0 <= e).clamp(1, n - 1);
                let (a, b) = (tab[i - 1], tab[i]);
                let w = if b.0 > a.0 { (e - a.0) / (b.0 - a.0) } else { 0.0 };
                (a.1 * (1.0 - w) + b.1 * w) * s
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight >= 0.0) {
            return Err(Error::InvalidInput("packet weight must be non-negative".into()));
        }
        match &self.profile {
            None => {
                if !(self.delta_e > 0.0) {
                    return Err(Error::InvalidInput("packet energy width must be positive".into()));
                }
            }
            Some(tab) => {
                if tab.len() < 3 || tab.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidInput("packet table needs >= 3 strictly increasing energies".into()));
                }
                let norm: f64 = tab.windows(2).map(|w| 0.5 * (w[0].1.norm_sqr() + w[1].1.norm_sqr()) * (w[1].0 - w[0].0)).sum();
                if (norm - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidInput(format!("packet table carries norm {norm}, expected 1")));
                }
            }
        }
        Ok(())
    }
}

/// F0(t) = integral dE b_E(0) exp(i (E_ref - E) t).
pub fn source_function(packet: &ContinuumPacket, t: f64, e_ref: f64) -> Result<Complex64> {
    match &packet.profile {
        None => {
            let d = packet.delta_e;
            let s = t - packet.t0;
            let mag = packet.weight.sqrt() * (d * d * PI).powf(-0.25) * (2.0 * PI).sqrt() * d * (-0.5 * d * d * s * s).exp();
            Ok(Complex64::from_polar(mag, (e_ref - packet.e0) * t))
        }
        Some(tab) => {
            let s = packet.weight.sqrt();
            let term = |i: usize| tab[i].1 * Complex64::from_polar(1.0, (e_ref - tab[i].0) * t);
            let trap = |stride: usize| -> Complex64 {
                let idx: Vec<usize> = (0..tab.len()).step_by(stride).collect();
                idx.windows(2).map(|w| (term(w[0]) + term(w[1])) * (0.5 * (tab[w[1]].0 - tab[w[0]].0))).sum()
            };
            // the integrand must turn by well under a half cycle per cell
            let jump = (1..tab.len())
                .filter(|&i| tab[i].1.norm() > 0.0 && tab[i - 1].1.norm() > 0.0)
                .map(|i| (term(i) * term(i - 1).conj()).arg().abs())
                .fold(0.0, f64::max);
            let fine = trap(1);
            let coarse = trap(2);
            let scale: f64 = tab.windows(2).map(|w| w[0].1.norm() * (w[1].0 - w[0].0)).sum();
            if jump > 0.5 * PI || (tab.len() % 2 == 1 && (fine - coarse).norm() > 1e-3 * scale) {
                return Err(Error::Convergence(format!(
                    "packet table under-resolves exp(i Delta t) at t = {t:.6e}; refine the energy table"
                )));
            }
            Ok(fine * s)
        }
    }
}

/// F_corr(tau) = integral over the band of |dipole_fc * g(E)|^2 exp(i (E_c - E) tau),
/// with E_c the band centre.
pub fn correlation_kernel(band: (f64, f64), dipole_fc: f64, profile: &FcProfile, tau: f64) -> Result<Complex64> {
    let (lo, hi) = band;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidInput(format!("band [{lo}, {hi}] must be finite and ordered")));
    }
    let w = hi - lo;
    let mu2 = dipole_fc * dipole_fc;
    if w == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let FcProfile::Constant = profile {
        let x = 0.5 * w * tau;
        let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        return Ok(Complex64::new(mu2 * w * sinc, 0.0));
    }
    let c = 0.5 * (lo + hi);
    // Simpson with enough panels to follow both the phase and the profile.
    let integrate = |n: usize| -> Complex64 {
        let h = w / n as f64;
        (0..=n)
            .map(|i| {
                let e = lo + h * i as f64;
                let wt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                Complex64::from_polar(wt * mu2 * profile.factor(e).powi(2), (c - e) * tau)
            })
            .sum::<Complex64>()
            * (h / 3.0)
    };
    let mut n = (2 * ((w * tau.abs() / PI).ceil() as usize * 8 + 64)).min(1 << 22);
    let mut prev = integrate(n);
    for _ in 0..8 {
        n *= 2;
        let next = integrate(n);
        if (next - prev).norm() <= 1e-10 * next.norm().max(mu2 * w * 1e-6) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Convergence(format!("correlation kernel quadrature unconverged at tau = {tau:.6e}")))
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    /// Integration window; defaults to the union of the pulse supports.
    pub t_span: Option<(f64, f64)>,
    pub samples: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { t_span: None, samples: 401, rtol: 1e-9, atol: 1e-12 }
    }
}

impl IntegrationOptions {
    fn span(&self, pulses: &[PulseEnvelope]) -> Result<(f64, f64)> {
        if let Some(s) = self.t_span {
            if !(s.1 > s.0) {
                return Err(Error::InvalidInput("empty integration window".into()));
            }
            return Ok(s);
        }
        let lo = pulses.iter().map(|p| p.support().0).fold(f64::INFINITY, f64::min);
        let hi = pulses.iter().map(|p| p.support().1).fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::InvalidInput("no pulses to define the integration window".into()));
        }
        Ok((lo, hi))
    }

    fn sample_times(&self, span: (f64, f64)) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n).map(|i| span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64).collect()
    }

    fn ode(&self, pulses: &[PulseEnvelope]) -> ode::OdeOptions {
        let fwhm = pulses.iter().map(|p| p.fwhm).fold(f64::INFINITY, f64::min);
        ode::OdeOptions { rtol: self.rtol, atol: self.atol, h_max: 0.1 * fwhm, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub max_population: Vec<f64>,
    /// Largest population reached by any continuum-coupled state.
    pub max_intermediate: f64,
    /// Bound norm (SVCA) or bound plus continuum norm (full RWA) at each sample.
    pub norm_history: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// amplitudes[state][sample]
    pub amplitudes: Vec<Vec<Complex64>>,
    pub populations: Vec<Vec<f64>>,
    /// |F0(t)|^2 at each sample.
    pub source: Vec<f64>,
    pub final_populations: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl SimulationResult {
    fn new(scheme: &LinkageScheme, times: Vec<f64>) -> Self {
        let n = scheme.states.len();
        let m = times.len();
        Self {
            labels: scheme.states.iter().map(|s| s.label.clone()).collect(),
            amplitudes: vec![Vec::with_capacity(m); n],
            populations: vec![Vec::with_capacity(m); n],
            source: Vec::with_capacity(m),
            final_populations: vec![0.0; n],
            diagnostics: Diagnostics { max_population: vec![0.0; n], ..Default::default() },
            times,
        }
    }

    fn record(&mut self, bound: &[Complex64], source: f64, norm: f64) {
        for (i, b) in bound.iter().enumerate() {
            let p = b.norm_sqr();
            self.amplitudes[i].push(*b);
            self.populations[i].push(p);
            self.diagnostics.max_population[i] = self.diagnostics.max_population[i].max(p);
        }
        self.source.push(source);
        self.diagnostics.norm_history.push(norm);
    }

    fn finish(&mut self, scheme: &LinkageScheme, stats: ode::OdeStats) {
        for (i, p) in self.populations.iter().enumerate() {
            self.final_populations[i] = p.last().copied().unwrap_or(0.0);
        }
        self.diagnostics.max_intermediate = scheme
            .intermediates()
            .iter()
            .map(|&i| self.diagnostics.max_population[i])
            .fold(0.0, f64::max);
        self.diagnostics.steps = stats.steps;
        self.diagnostics.rejected = stats.rejected;
    }

    pub fn final_population(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.final_populations[i])
    }
}
