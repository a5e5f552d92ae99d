//! Bound amplitudes coupled to an explicitly discretized continuum band.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ode::dopri5;
use super::svca::{bound_block, fields};
use super::{ContinuumPacket, IntegrationOptions, LinkageScheme, PulseEnvelope, SimulationResult};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Midpoint discretization of [e_min, e_max] into `n` cells.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumGrid {
    pub e_min: f64,
    pub e_max: f64,
    pub n: usize,
}

impl ContinuumGrid {
    pub fn spacing(&self) -> f64 {
        (self.e_max - self.e_min) / self.n as f64
    }

    pub fn energies(&self) -> Vec<f64> {
        let de = self.spacing();
        (0..self.n).map(|k| self.e_min + (k as f64 + 0.5) * de).collect()
    }
}

/// Integrate bound and discretized continuum amplitudes together; the
/// returned norm history includes the continuum population.
pub fn integrate_full_rwa(
    scheme: &LinkageScheme,
    pulses: &[PulseEnvelope],
    packet: &ContinuumPacket,
    grid: ContinuumGrid,
    opts: &IntegrationOptions,
) -> Result<SimulationResult> {
    scheme.validate(pulses.len())?;
    for p in pulses {
        p.validate()?;
    }
    packet.validate()?;
    if grid.n == 0 || !(grid.e_max > grid.e_min) {
        return Err(Error::InvalidInput(format!("continuum grid [{}, {}] with {} points is empty", grid.e_min, grid.e_max, grid.n)));
    }
    let span = opts.span(pulses)?;
    let de = grid.spacing();
    // A uniform grid revives its initial packet after 2 pi / dE.
    if 2.0 * PI / de <= span.1 - span.0 {
        return Err(Error::Convergence(format!(
            "continuum spacing {de:.3e} recurs after {:.3e}, inside the run of {:.3e}; add points",
            2.0 * PI / de,
            span.1 - span.0
        )));
    }
    let nb = scheme.states.len();
    let energies = grid.energies();
    let e_ref = packet.reference_energy();
    let sq = de.sqrt();
    let mut y0 = vec![Complex64::new(0.0, 0.0); nb + grid.n];
    for (k, e) in energies.iter().enumerate() {
        y0[nb + k] = sq * packet.amplitude(*e);
    }
    let initial_norm: f64 = y0.iter().map(|c| c.norm_sqr()).sum();
    // sqrt(dE) mu g_e(E_k) for each edge and cell
    let couplings: Vec<Vec<f64>> = scheme
        .continuum_edges
        .iter()
        .map(|e| energies.iter().map(|x| sq * e.dipole_fc * e.profile.factor(*x)).collect())
        .collect();

    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let f = fields(pulses, t);
        let (b, a) = y.split_at(nb);
        let (db, da) = dy.split_at_mut(nb);
        bound_block(scheme, pulses, &f, t, b, db);
        da.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (edge, g) in scheme.continuum_edges.iter().zip(&couplings) {
            let field = f[edge.pulse];
            if field == Complex64::new(0.0, 0.0) {
                continue;
            }
            let d0 = pulses[edge.pulse].detuning + e_ref;
            let u = edge.state;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.len() {
                // Omega_e(E_k) exp(i Delta_e(E_k) t)
                let w = field * g[k] * Complex64::from_polar(1.0, (d0 - energies[k]) * t);
                acc += w * a[k];
                da[k] += I * w.conj() * b[u];
            }
            db[u] += I * acc;
        }
    };

    let times = opts.sample_times(span);
    let mut result = SimulationResult::new(scheme, times.clone());
    let stats = dopri5(rhs, span.0, y0, &times, &opts.ode(pulses), |_, _, y| {
        let norm: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        result.record(&y[..nb], 0.0, norm);
    })?;
    result.finish(scheme, stats);
    if scheme.states.iter().all(|s| s.decay == 0.0) {
        let drift = result.diagnostics.norm_history.iter().map(|n| (n - initial_norm).abs()).fold(0.0, f64::max);
        if drift > 1e-6 {
            result.diagnostics.warnings.push(format!("norm drift {drift:.3e} without decay"));
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::super::{integrate_svca, BoundLevel, ContinuumEdge, Coupling, FcProfile};
    use super::*;

    fn scheme(gamma: f64, mu_e: f64) -> LinkageScheme {
        LinkageScheme {
            states: vec![
                BoundLevel { label: "1".into(), energy: 0.0, decay: 0.0 },
                BoundLevel { label: "2".into(), energy: 0.0, decay: gamma },
            ],
            couplings: vec![Coupling { lower: 0, upper: 1, dipole_fc: 1.0, pulse: 0 }],
            continuum_edges: vec![ContinuumEdge { state: 1, dipole_fc: mu_e, pulse: 1, profile: FcProfile::Constant }],
        }
    }

    #[test]
    fn stationary_without_pulses() {
        let s = LinkageScheme {
            states: vec![BoundLevel { label: "x".into(), energy: 0.0, decay: 0.0 }],
            ..Default::default()
        };
        let pulses = vec![PulseEnvelope::sin_squared(5.0, 1.0, 0.0)];
        let packet = ContinuumPacket::gaussian(0.0, 0.5, 0.0);
        let opts = IntegrationOptions { t_span: Some((0.0, 10.0)), samples: 5, ..Default::default() };
        let r = integrate_full_rwa(&s, &pulses, &packet, ContinuumGrid { e_min: -4.0, e_max: 4.0, n: 40 }, &opts).unwrap();
        assert!(r.populations[0].iter().all(|p| *p == 0.0));
        let n0 = r.diagnostics.norm_history[0];
        assert!(r.diagnostics.norm_history.iter().all(|n| *n == n0));
    }

    #[test]
    fn unitary_without_decay() {
        let pulses = vec![PulseEnvelope::sin_squared(25.0, 15.0, 0.3), PulseEnvelope::sin_squared(35.0, 15.0, 1.0)];
        let packet = ContinuumPacket::gaussian(0.0, 0.4, 30.0);
        let opts = IntegrationOptions { t_span: Some((0.0, 60.0)), samples: 61, ..Default::default() };
        let grid = ContinuumGrid { e_min: -8.0, e_max: 8.0, n: 160 };
        let r = integrate_full_rwa(&scheme(0.0, 0.4), &pulses, &packet, grid, &opts).unwrap();
        let n0 = r.diagnostics.norm_history[0];
        let drift = r.diagnostics.norm_history.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-5, "{drift}");
        assert!(r.final_populations[0] > 1e-3);
    }

    #[test]
    fn recurrence_guard() {
        let pulses = vec![PulseEnvelope::sin_squared(25.0, 15.0, 0.3), PulseEnvelope::sin_squared(35.0, 15.0, 1.0)];
        let packet = ContinuumPacket::gaussian(0.0, 0.4, 30.0);
        let opts = IntegrationOptions { t_span: Some((0.0, 60.0)), ..Default::default() };
        let grid = ContinuumGrid { e_min: -8.0, e_max: 8.0, n: 20 };
        assert!(matches!(integrate_full_rwa(&scheme(0.0, 0.4), &pulses, &packet, grid, &opts), Err(Error::Convergence(_))));
    }

    #[test]
    fn agrees_with_eliminated_continuum() {
        let pulses = vec![PulseEnvelope::sin_squared(25.0, 15.0, 0.15), PulseEnvelope::sin_squared(35.0, 15.0, 1.0)];
        let packet = ContinuumPacket::gaussian(0.0, 0.4, 30.0);
        let opts = IntegrationOptions { t_span: Some((0.0, 60.0)), samples: 61, ..Default::default() };
        let s = scheme(0.01, 0.2);
        let grid = ContinuumGrid { e_min: -10.0, e_max: 10.0, n: 400 };
        let full = integrate_full_rwa(&s, &pulses, &packet, grid, &opts).unwrap();
        let svca = integrate_svca(&s, &pulses, &packet, &opts).unwrap();
        for i in 0..2 {
            let (a, b) = (full.final_populations[i], svca.final_populations[i]);
            assert!((a - b).abs() < 0.05 * a.max(b), "state {i}: {a} vs {b}");
        }
    }
}
