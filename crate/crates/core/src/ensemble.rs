//! Thermal averaging and campaign arithmetic for a trapped atomic gas.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::{ContinuumPacket, SimulationResult};
use crate::error::{Error, Result};
use crate::units::{micrometers, per_cm3, to_seconds, REDUCED_MASS_RB85};

/// Trap and pulse parameters, all in atomic units.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    /// Temperature as an energy, kT.
    pub temperature: f64,
    pub density: f64,
    pub reduced_mass: f64,
    pub pulse_duration: f64,
    /// Share of collisions on the addressed surface.
    pub singlet_fraction: f64,
    pub trap_length: f64,
    pub focus_diameter: f64,
    pub lattice_speed: Option<f64>,
    /// Duration of one pulse sequence.
    pub sequence_duration: f64,
    /// Fraction of the produced molecules that decay into the wanted level.
    pub branch_fraction: f64,
}

impl Default for EnsembleSpec {
    /// 100 uK, 1e11 cm^-3, 750 ns pulses, 20 um x 200 um focus, 2 us sequences.
    fn default() -> Self {
        Self {
            temperature: crate::units::microkelvin(100.0),
            density: per_cm3(1e11),
            reduced_mass: REDUCED_MASS_RB85,
            pulse_duration: crate::units::nanoseconds(750.0),
            singlet_fraction: 0.25,
            trap_length: micrometers(200.0),
            focus_diameter: micrometers(20.0),
            lattice_speed: None,
            sequence_duration: crate::units::nanoseconds(2000.0),
            branch_fraction: 0.075,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("temperature", self.temperature),
            ("density", self.density),
            ("reduced_mass", self.reduced_mass),
            ("trap_length", self.trap_length),
            ("focus_diameter", self.focus_diameter),
            ("sequence_duration", self.sequence_duration),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive (got {v})")));
            }
        }
        if !(self.pulse_duration >= 0.0) {
            return Err(Error::InvalidInput("pulse_duration must be non-negative".into()));
        }
        if !(self.singlet_fraction > 0.0 && self.singlet_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!("singlet_fraction {} outside (0, 1]", self.singlet_fraction)));
        }
        if !(self.branch_fraction > 0.0 && self.branch_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!("branch_fraction {} outside (0, 1]", self.branch_fraction)));
        }
        if let Some(v) = self.lattice_speed {
            if !(v > 0.0) {
                return Err(Error::InvalidInput("lattice_speed must be positive".into()));
            }
        }
        Ok(())
    }

    fn impact_parameter_sq(&self, e: f64, j: u32) -> f64 {
        let l = j as f64 + 0.5;
        l * l / (2.0 * self.reduced_mass * e)
    }
}

fn check_energy(e: f64) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Domain(format!("collision energy {e} must be positive")));
    }
    Ok(())
}

/// N = rho pi b^2 v tau with b = (J + 1/2) / sqrt(2 m E).
pub fn collisions_per_pulse(e: f64, spec: &EnsembleSpec, j: u32) -> Result<f64> {
    check_energy(e)?;
    let v = (2.0 * e / spec.reduced_mass).sqrt();
    Ok(spec.density * PI * spec.impact_parameter_sq(e, j) * v * spec.pulse_duration)
}

/// f(E) = P pi rho tau / (4 m^(3/2) (2E)^(1/2)).
pub fn fraction_per_pulse(p: f64, e: f64, spec: &EnsembleSpec) -> Result<f64> {
    check_energy(e)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("probability {p} outside [0, 1]")));
    }
    let m = spec.reduced_mass;
    Ok(p * PI * spec.density * spec.pulse_duration / (4.0 * m.powf(1.5) * (2.0 * e).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketParams {
    /// Mean separation of atoms undergoing an s-wave collision.
    pub r_st: f64,
    pub delta_e: f64,
    /// |F0|^2 at the packet centre.
    pub f0_sq_peak: f64,
}

pub fn wavepacket_params(spec: &EnsembleSpec, e: f64) -> Result<WavepacketParams> {
    check_energy(e)?;
    let r_st = 1.0 / (PI * spec.density * spec.impact_parameter_sq(e, 0));
    let delta_e = (e / (2.0 * spec.reduced_mass * r_st * r_st)).sqrt();
    Ok(WavepacketParams { r_st, delta_e, f0_sq_peak: 2.0 * PI.sqrt() * delta_e })
}

#[derive(Debug, Clone)]
pub struct CampaignBudget {
    pub n_sequences: f64,
    /// Removal-limited interval between sequences, when a lattice speed is set.
    pub removal_interval: Option<f64>,
    pub sequence_period: f64,
    /// n_sequences * sequence_period (a.u. time).
    pub wall_time: f64,
    pub atoms_in_focus: f64,
    pub molecules_per_sequence: f64,
    pub molecules_per_second: f64,
    /// per-sequence yield times the singlet fraction
    pub per_pulse_rate: f64,
    pub warnings: Vec<String>,
}

/// Sequence count, repetition period and production rate for a given
/// per-sequence yield. `molecules_per_sequence` overrides the
/// density-times-volume estimate.
pub fn campaign_budget(per_sequence_yield: f64, spec: &EnsembleSpec, molecules_per_sequence: Option<f64>) -> Result<CampaignBudget> {
    spec.validate()?;
    if !(per_sequence_yield > 0.0 && per_sequence_yield < 1.0) {
        return Err(Error::Domain(format!("per-sequence yield {per_sequence_yield} must lie in (0, 1)")));
    }
    let n_sequences = (1.0 / (per_sequence_yield * spec.singlet_fraction)).ceil();
    let removal_interval = spec.lattice_speed.map(|v| spec.focus_diameter / v);
    let sequence_period = removal_interval.map_or(spec.sequence_duration, |r| r.max(spec.sequence_duration));
    let radius = 0.5 * spec.focus_diameter;
    let atoms_in_focus = spec.density * PI * radius * radius * spec.trap_length;
    let estimate = atoms_in_focus * per_sequence_yield;
    let mut warnings = Vec::new();
    let molecules = match molecules_per_sequence {
        Some(m) => {
            if (m / estimate).log10().abs() > 1.0 {
                warnings.push(format!(
                    "{m:.4e} molecules per sequence disagrees with density x focus volume x yield = {estimate:.4e}"
                ));
            }
            m
        }
        None => estimate,
    };
    let per_second = molecules * spec.branch_fraction / to_seconds(sequence_period);
    Ok(CampaignBudget {
        n_sequences,
        removal_interval,
        sequence_period,
        wall_time: n_sequences * sequence_period,
        atoms_in_focus,
        molecules_per_sequence: molecules,
        molecules_per_second: per_second,
        per_pulse_rate: per_sequence_yield * spec.singlet_fraction,
        warnings,
    })
}

/// Gamma function for x > 0 (Lanczos, g = 7).
fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let s: f64 = G[0] + G[1..].iter().enumerate().map(|(i, g)| g / (x + i as f64 + 1.0)).sum::<f64>();
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

/// Nodes and weights of n-point Gauss quadrature for x^alpha e^-x on
/// [0, inf), from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("Gauss-Laguerre needs n >= 1 and alpha > -1 (got {n}, {alpha})")));
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
        if i + 1 < n {
            let b = ((i as f64 + 1.0) * (i as f64 + 1.0 + alpha)).sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mu0 = gamma(alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Quadrature settings for Maxwell-Boltzmann averages.
#[derive(Debug, Clone, Copy)]
pub struct ThermalQuadrature {
    pub nodes: usize,
    /// Energies below `guard * kT` are excluded.
    pub guard: Option<f64>,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for ThermalQuadrature {
    fn default() -> Self {
        Self { nodes: 16, guard: None, rel_tol: 1e-4, max_nodes: 256 }
    }
}

impl ThermalQuadrature {
    /// Excludes E < kT/100, where the eliminated-continuum picture fails.
    pub fn guarded() -> Self {
        Self { guard: Some(0.01), ..Self::default() }
    }

    /// Energies (in units of kT) and weights such that sum w P(kT x)
    /// approximates the thermal average.
    pub fn rule(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let norm = 2.0 / PI.sqrt();
        match self.guard {
            None => {
                let (x, w) = gauss_laguerre(n, 0.5)?;
                Ok((x, w.into_iter().map(|w| norm * w).collect()))
            }
            Some(c) => {
                // x = c + y: weight sqrt(c + y) e^-c e^-y
                let (y, w) = gauss_laguerre(n, 0.0)?;
                let x: Vec<f64> = y.iter().map(|y| c + y).collect();
                let w = x.iter().zip(&w).map(|(x, w)| norm * (-c).exp() * x.sqrt() * w).collect();
                Ok((x, w))
            }
        }
    }

    /// Maxwell-Boltzmann weight below the guard.
    pub fn excluded_weight(&self) -> f64 {
        match self.guard {
            None => 0.0,
            Some(c) => {
                let n = 64;
                // Simpson in s = sqrt(x): integrand 2 s^2 e^{-s^2} ds
                let sc = c.sqrt();
                let hs = sc / n as f64;
                let f = |s: f64| 2.0 * s * s * (-s * s).exp();
                let sum: f64 = (0..=n)
                    .map(|i| {
                        let wt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                        wt * f(hs * i as f64)
                    })
                    .sum();
                2.0 / PI.sqrt() * sum * hs / 3.0
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThermalAverage {
    pub value: f64,
    pub nodes: usize,
    /// |value(n) - value(n/2)| at the accepted rule.
    pub change: f64,
    pub excluded_weight: f64,
}

/// P_total = 2 / (sqrt(pi) (kT)^(3/2)) int dE P(E) sqrt(E) exp(-E/kT), with
/// node doubling until the relative change falls below `quad.rel_tol`.
pub fn thermal_average<F>(p: F, kt: f64, quad: &ThermalQuadrature) -> Result<ThermalAverage>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(kt > 0.0) {
        return Err(Error::InvalidInput(format!("kT must be positive (got {kt})")));
    }
    let eval = |n: usize| -> Result<f64> {
        let (x, w) = quad.rule(n)?;
        let vals: Vec<f64> = x.par_iter().map(|x| p(kt * x)).collect::<Result<_>>()?;
        Ok(vals.iter().zip(&w).map(|(v, w)| v * w).sum())
    };
    let mut n = quad.nodes.max(2);
    let mut prev = eval(n)?;
    loop {
        let next_n = 2 * n;
        if next_n > quad.max_nodes {
            return Err(Error::Convergence(format!("thermal average unconverged at {n} nodes")));
        }
        let next = eval(next_n)?;
        let change = (next - prev).abs();
        if change <= quad.rel_tol * next.abs() || change < 1e-300 {
            return Ok(ThermalAverage { value: next, nodes: next_n, change, excluded_weight: quad.excluded_weight() });
        }
        prev = next;
        n = next_n;
    }
}

/// Outcome of a thermally averaged dynamics run.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// Thermally weighted population histories, one per state.
    pub populations: Vec<Vec<f64>>,
    /// Thermally weighted |F0|^2.
    pub source: Vec<f64>,
    pub final_populations: Vec<f64>,
    /// (energy, final populations) at each node of the accepted rule.
    pub nodes: Vec<(f64, Vec<f64>)>,
    pub weights: Vec<f64>,
    pub change: f64,
    pub excluded_weight: f64,
}

impl EnsembleRun {
    /// Final thermally averaged population of the last state (the target).
    pub fn yield_(&self) -> f64 {
        self.final_populations.last().copied().unwrap_or(0.0)
    }
}

/// Per-energy packet: width from the collision geometry, centred at `t0`,
/// resonant with the pump at its own energy.
pub fn thermal_packet(spec: &EnsembleSpec, e: f64, t0: f64) -> Result<ContinuumPacket> {
    let w = wavepacket_params(spec, e)?;
    Ok(ContinuumPacket::gaussian(e, w.delta_e, t0))
}

/// Maxwell-Boltzmann average of a dynamics run over packet energies; `run`
/// maps a per-energy packet to its simulation. Node doubling controls the
/// final population of the last state.
pub fn ensemble_dynamics<F>(spec: &EnsembleSpec, t0: f64, quad: &ThermalQuadrature, run: F) -> Result<EnsembleRun>
where
    F: Fn(&ContinuumPacket) -> Result<SimulationResult> + Sync,
{
    spec.validate()?;
    let kt = spec.temperature;
    let run_rule = |n: usize| -> Result<(Vec<f64>, Vec<f64>, Vec<SimulationResult>)> {
        let (x, w) = quad.rule(n)?;
        // continuum profiles are evaluated at each packet's own energy
        let runs = x.par_iter().map(|x| run(&thermal_packet(spec, kt * x, t0)?)).collect::<Result<Vec<_>>>()?;
        Ok((x, w, runs))
    };
    let target = |runs: &[SimulationResult], w: &[f64]| -> f64 {
        runs.iter().zip(w).map(|(r, w)| w * r.final_populations.last().copied().unwrap_or(0.0)).sum()
    };
    let mut n = quad.nodes.max(2);
    let (_, w, runs) = run_rule(n)?;
    let mut prev = target(&runs, &w);
    loop {
        let next_n = 2 * n;
        if next_n > quad.max_nodes {
            return Err(Error::Convergence(format!("ensemble average unconverged at {n} nodes")));
        }
        let (x, w, runs) = run_rule(next_n)?;
        let next = target(&runs, &w);
        let change = (next - prev).abs();
        if change <= quad.rel_tol * next.abs() || change < 1e-300 {
            let first = &runs[0];
            let ns = first.labels.len();
            let m = first.times.len();
            let mut populations = vec![vec![0.0; m]; ns];
            let mut source = vec![0.0; m];
            for (r, wt) in runs.iter().zip(&w) {
                for s in 0..ns {
                    for k in 0..m {
                        populations[s][k] += wt * r.populations[s][k];
                    }
                }
                for k in 0..m {
                    source[k] += wt * r.source[k];
                }
            }
            let final_populations = populations.iter().map(|p| p.last().copied().unwrap_or(0.0)).collect();
            return Ok(EnsembleRun {
                labels: first.labels.clone(),
                times: first.times.clone(),
                populations,
                source,
                final_populations,
                nodes: x.iter().zip(&runs).map(|(x, r)| (kt * x, r.final_populations.clone())).collect(),
                weights: w,
                change,
                excluded_weight: quad.excluded_weight(),
            });
        }
        prev = next;
        n = next_n;
    }
}
