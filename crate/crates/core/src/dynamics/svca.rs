//! Bound amplitudes with the continuum eliminated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::ode::{dopri5, OdeStats};
use super::{source_function, ContinuumPacket, IntegrationOptions, LinkageScheme, PulseEnvelope, SimulationResult};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Pulse fields with carrier phase at time `t`.
pub(super) fn fields(pulses: &[PulseEnvelope], t: f64) -> Vec<Complex64> {
    pulses.iter().map(|p| p.field(t)).collect()
}

/// Bound-bound couplings and Gamma_f losses, accumulated into `db`.
pub(super) fn bound_block(scheme: &LinkageScheme, pulses: &[PulseEnvelope], f: &[Complex64], t: f64, b: &[Complex64], db: &mut [Complex64]) {
    for (i, s) in scheme.states.iter().enumerate() {
        db[i] = -s.decay * b[i];
    }
    for c in &scheme.couplings {
        let omega = f[c.pulse] * c.dipole_fc;
        if omega == Complex64::new(0.0, 0.0) {
            continue;
        }
        let rot = Complex64::from_polar(1.0, pulses[c.pulse].detuning * t);
        db[c.upper] += I * omega * rot * b[c.lower];
        db[c.lower] += I * omega.conj() * rot.conj() * b[c.upper];
    }
}

/// Integrate the eliminated-continuum equations from a scattering packet.
pub fn integrate_svca(scheme: &LinkageScheme, pulses: &[PulseEnvelope], packet: &ContinuumPacket, opts: &IntegrationOptions) -> Result<SimulationResult> {
    let n = scheme.states.len();
    run(scheme, pulses, packet, vec![Complex64::new(0.0, 0.0); n], opts)
}

/// Bound-only evolution from given initial amplitudes (no scattering packet).
pub fn integrate_bound(scheme: &LinkageScheme, pulses: &[PulseEnvelope], initial: &[Complex64], opts: &IntegrationOptions) -> Result<SimulationResult> {
    if initial.len() != scheme.states.len() {
        return Err(Error::Dimension(format!("{} initial amplitudes for {} states", initial.len(), scheme.states.len())));
    }
    let mut packet = ContinuumPacket::gaussian(0.0, 1.0, 0.0);
    packet.weight = 0.0;
    run(scheme, pulses, &packet, initial.to_vec(), opts)
}

fn run(scheme: &LinkageScheme, pulses: &[PulseEnvelope], packet: &ContinuumPacket, b0: Vec<Complex64>, opts: &IntegrationOptions) -> Result<SimulationResult> {
    scheme.validate(pulses.len())?;
    for p in pulses {
        p.validate()?;
    }
    packet.validate()?;
    let mut per_pulse = vec![0usize; pulses.len()];
    for e in &scheme.continuum_edges {
        per_pulse[e.pulse] += 1;
        if per_pulse[e.pulse] > 1 {
            return Err(Error::InvalidInput(format!("pulse {} drives more than one continuum edge", e.pulse)));
        }
    }
    let e_ref = packet.reference_energy();
    let mut warnings = Vec::new();
    // Continuum couplings frozen at the reference energy.
    let edges: Vec<(usize, usize, f64)> = scheme
        .continuum_edges
        .iter()
        .map(|e| (e.state, e.pulse, e.dipole_fc * e.profile.factor(e_ref)))
        .collect();
    for e in &scheme.continuum_edges {
        let p = &pulses[e.pulse];
        if let super::FcProfile::PowerLaw { exponent, .. } = e.profile {
            // spectral width of the pump against the scale on which the coupling changes
            let scale = e_ref / exponent.abs().max(1e-12);
            if 1.0 / p.fwhm > 0.1 * scale {
                warnings.push(format!(
                    "pulse {} bandwidth {:.3e} is not small against the coupling variation scale {:.3e}; SVCA may be inaccurate",
                    e.pulse,
                    1.0 / p.fwhm,
                    scale
                ));
            }
        }
    }
    let span = opts.span(pulses)?;
    let times = opts.sample_times(span);
    let mut result = SimulationResult::new(scheme, times.clone());
    let limit = b0.iter().map(|b| b.norm_sqr()).sum::<f64>() + packet.weight + 1e-4;

    let rhs = |t: f64, b: &[Complex64], db: &mut [Complex64]| {
        let f = fields(pulses, t);
        bound_block(scheme, pulses, &f, t, b, db);
        if edges.is_empty() {
            return;
        }
        let src = if packet.weight > 0.0 { source_function(packet, t, e_ref).unwrap_or_default() } else { Complex64::new(0.0, 0.0) };
        for &(u, p, mu) in &edges {
            let om = f[p] * mu;
            if om == Complex64::new(0.0, 0.0) {
                continue;
            }
            let rot = Complex64::from_polar(1.0, pulses[p].detuning * t);
            db[u] += I * om * rot * src;
            for &(u2, p2, mu2) in &edges {
                let om2 = f[p2] * mu2;
                let rot2 = Complex64::from_polar(1.0, pulses[p2].detuning * t);
                db[u] -= PI * om * om2.conj() * rot * rot2.conj() * b[u2];
            }
        }
    };
    // Surface unconverged packet tables before integrating.
    if packet.profile.is_some() && packet.weight > 0.0 {
        for &t in &times {
            source_function(packet, t, e_ref)?;
        }
    }
    let mut violation: Option<(f64, f64)> = None;
    let stats: OdeStats = dopri5(rhs, span.0, b0, &times, &opts.ode(pulses), |_, t, b| {
        let norm: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        if norm > limit && violation.is_none() {
            violation = Some((t, norm));
        }
        let s = if packet.weight > 0.0 { source_function(packet, t, e_ref).map(|c| c.norm_sqr()).unwrap_or(f64::NAN) } else { 0.0 };
        result.record(b, s, norm);
    })?;
    if let Some((t, norm)) = violation {
        return Err(Error::Tolerance(format!("bound norm {norm:.8} exceeds the available population {:.8} at t = {t:.6e}", limit - 1e-4)));
    }
    result.finish(scheme, stats);
    result.diagnostics.warnings = warnings;
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct MultilinkageResult {
    pub result: SimulationResult,
    /// Final population of each terminal state (never the upper end of a coupling).
    pub branches: Vec<(String, f64)>,
}

impl MultilinkageResult {
    pub fn total_transfer(&self) -> f64 {
        self.branches.iter().map(|b| b.1).sum()
    }
}

fn terminal_states(scheme: &LinkageScheme) -> Vec<usize> {
    let inter = scheme.intermediates();
    (0..scheme.states.len())
        .filter(|i| !scheme.couplings.iter().any(|c| c.upper == *i) && !inter.contains(i))
        .collect()
}

/// SVCA integration over an arbitrary linkage graph with per-branch totals.
pub fn integrate_multilinkage(scheme: &LinkageScheme, pulses: &[PulseEnvelope], packet: &ContinuumPacket, opts: &IntegrationOptions) -> Result<MultilinkageResult> {
    let result = integrate_svca(scheme, pulses, packet, opts)?;
    let branches = terminal_states(scheme)
        .into_iter()
        .map(|i| (scheme.states[i].label.clone(), result.final_populations[i]))
        .collect();
    Ok(MultilinkageResult { result, branches })
}

/// Total terminal population as the carrier phase of `pulse` is swept.
pub fn phase_sweep(
    scheme: &LinkageScheme,
    pulses: &[PulseEnvelope],
    packet: &ContinuumPacket,
    pulse: usize,
    phases: &[f64],
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, f64)>> {
    if pulse >= pulses.len() {
        return Err(Error::InvalidInput(format!("no pulse {pulse} to sweep")));
    }
    phases
        .par_iter()
        .map(|&phi| {
            let mut ps = pulses.to_vec();
            ps[pulse].phase = phi;
            integrate_multilinkage(scheme, &ps, packet, opts).map(|r| (phi, r.total_transfer()))
        })
        .collect()
}
