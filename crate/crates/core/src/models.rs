//! Rb2 photoassociation scenarios: the coherent two-pulse run, the
//! cascaded four-pulse sequence and the synthetic excited-state curve.

use crate::dynamics::{
    integrate_svca, BoundLevel, ContinuumEdge, ContinuumPacket, Coupling, FcProfile, IntegrationOptions, LinkageScheme, PulseEnvelope,
    SimulationResult,
};
use crate::error::{Error, Result};
use crate::potentials::{brent, Morse};
use crate::spectrum::{bound_levels, BoundState, SolverOptions};
use crate::units::{microkelvin, nanoseconds, w_per_cm2, DIPOLE_XA};

/// Continuum-bound FC factor of the pump transition at 100 uK (a.u.).
pub const FC_CONTINUUM: f64 = 31.5;
/// Bound-bound FC factor X(v=4) - |2> that gives a final target population
/// of 0.6 in the coherent run (see [`calibrate_fc21`]).
pub const FC21_CALIBRATED: f64 = 5.016_837_277e-4;
/// FC factors of the second pulse pair, |1> - |3> and |3> - |4>.
pub const FC13: f64 = 0.15;
pub const FC34: f64 = 0.2;
/// Level energies (hartree).
pub const E_X4: f64 = -0.01823;
pub const E_X0: f64 = -0.0193;
pub const E_INTERMEDIATE_2: f64 = 0.042848;
pub const E_INTERMEDIATE_3: f64 = 0.03309;

/// Synthetic A-state Morse curve; a single channel standing in for the
/// coupled A/b system.
pub fn a_state_model() -> Morse {
    Morse { depth: 0.027, a: 0.24, r0: 8.7, offset: 0.0303 }
}

/// Bound level of `p` nearest `energy` for rotation `j`.
pub fn level_near(p: &Morse, j: u32, energy: f64, opts: &SolverOptions) -> Result<BoundState> {
    let mut half = 2e-4;
    for _ in 0..6 {
        let levels = bound_levels(p, j, (energy - half, energy + half), opts)?;
        if let Some(s) = levels.into_iter().min_by(|a, b| (a.energy - energy).abs().total_cmp(&(b.energy - energy).abs())) {
            return Ok(s);
        }
        half *= 2.0;
    }
    Err(Error::Domain(format!("no level of the model within {half:.2e} of {energy}")))
}

/// Stokes and pump pulses of one adiabatic-passage pair (lab units converted).
#[derive(Debug, Clone)]
pub struct PulsePair {
    pub stokes_center: f64,
    pub pump_center: f64,
    pub fwhm: f64,
    /// W/cm^2
    pub stokes_intensity: f64,
    /// W/cm^2
    pub pump_intensity: f64,
}

impl PulsePair {
    fn pulses(&self) -> (PulseEnvelope, PulseEnvelope) {
        let mut s = PulseEnvelope::sin_squared(self.stokes_center, self.fwhm, w_per_cm2(self.stokes_intensity).sqrt());
        let mut p = PulseEnvelope::sin_squared(self.pump_center, self.fwhm, w_per_cm2(self.pump_intensity).sqrt());
        s.polarization = "sigma+".into();
        p.polarization = "sigma+".into();
        (s, p)
    }
}

/// Parameters of the cascaded photoassociation sequence.
#[derive(Debug, Clone)]
pub struct PapScenario {
    pub first: PulsePair,
    /// Second pair |1> -> |3> -> |4>; `None` for the two-state run.
    pub second: Option<PulsePair>,
    pub dipole: f64,
    pub fc_continuum: f64,
    pub fc21: f64,
    pub fc13: f64,
    pub fc34: f64,
    /// Loss rate of the excited intermediates.
    pub gamma_f: f64,
    pub continuum_profile: FcProfile,
    pub t_span: (f64, f64),
    pub samples: usize,
}

impl PapScenario {
    /// Coherent run: Stokes 7e3 W/cm^2 at 850 ns, pump 1e4 W/cm^2 at 1450 ns,
    /// 750 ns FWHM, 1/Gamma_f = 30 ns.
    pub fn coherent() -> Self {
        Self {
            first: PulsePair {
                stokes_center: nanoseconds(850.0),
                pump_center: nanoseconds(1450.0),
                fwhm: nanoseconds(750.0),
                stokes_intensity: 7e3,
                pump_intensity: 1e4,
            },
            second: None,
            dipole: DIPOLE_XA,
            fc_continuum: FC_CONTINUUM,
            fc21: FC21_CALIBRATED,
            fc13: FC13,
            fc34: FC34,
            gamma_f: 1.0 / nanoseconds(30.0),
            continuum_profile: FcProfile::Constant,
            t_span: (0.0, nanoseconds(2400.0)),
            samples: 481,
        }
    }

    /// Coherent run followed by the 10 W/cm^2 pair that moves X(v=4) to X(v=0),
    /// Stokes (|3>-|4>) at 2950 ns ahead of the pump (|1>-|3>) at 3550 ns.
    pub fn cascaded() -> Self {
        Self {
            second: Some(PulsePair {
                stokes_center: nanoseconds(2950.0),
                pump_center: nanoseconds(3550.0),
                fwhm: nanoseconds(750.0),
                stokes_intensity: 10.0,
                pump_intensity: 10.0,
            }),
            t_span: (0.0, nanoseconds(4400.0)),
            samples: 881,
            ..Self::coherent()
        }
    }

    /// Scattering packet of the coherent run: E0 = 100 uK, width 70 uK, t0 = 1150 ns.
    pub fn coherent_packet() -> ContinuumPacket {
        ContinuumPacket::gaussian(microkelvin(100.0), microkelvin(70.0), nanoseconds(1150.0))
    }

    /// Linkage scheme and pulse list. Pulse order: first Stokes, first pump,
    /// then (if present) second Stokes, second pump.
    pub fn build(&self) -> (LinkageScheme, Vec<PulseEnvelope>) {
        let gamma = self.gamma_f;
        let mut states = vec![
            BoundLevel { label: "X(v=4)".into(), energy: E_X4, decay: 0.0 },
            BoundLevel { label: "A2".into(), energy: E_INTERMEDIATE_2, decay: gamma },
        ];
        let (s1, p1) = self.first.pulses();
        let mut pulses = vec![s1, p1];
        let mut couplings = vec![Coupling { lower: 0, upper: 1, dipole_fc: self.dipole * self.fc21, pulse: 0 }];
        let continuum_edges = vec![ContinuumEdge {
            state: 1,
            dipole_fc: self.dipole * self.fc_continuum,
            pulse: 1,
            profile: self.continuum_profile.clone(),
        }];
        if let Some(pair) = &self.second {
            states.push(BoundLevel { label: "A3".into(), energy: E_INTERMEDIATE_3, decay: gamma });
            states.push(BoundLevel { label: "X(v=0)".into(), energy: E_X0, decay: 0.0 });
            let (s2, p2) = pair.pulses();
            pulses.push(s2);
            pulses.push(p2);
            couplings.push(Coupling { lower: 3, upper: 2, dipole_fc: self.dipole * self.fc34, pulse: 2 });
            couplings.push(Coupling { lower: 0, upper: 2, dipole_fc: self.dipole * self.fc13, pulse: 3 });
        }
        (LinkageScheme { states, couplings, continuum_edges }, pulses)
    }

    pub fn options(&self) -> IntegrationOptions {
        IntegrationOptions { t_span: Some(self.t_span), samples: self.samples, ..Default::default() }
    }

    /// Swap the Stokes and pump timing of the first pair.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        std::mem::swap(&mut s.first.stokes_center, &mut s.first.pump_center);
        s
    }

    pub fn run(&self, packet: &ContinuumPacket) -> Result<SimulationResult> {
        let (scheme, pulses) = self.build();
        integrate_svca(&scheme, &pulses, packet, &self.options())
    }
}

/// Bound-bound FC factor X(v=4) - |2> at which the coherent run ends with
/// population `target` in X(v=4). The smallest such value is returned.
pub fn calibrate_fc21(scenario: &PapScenario, packet: &ContinuumPacket, target: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::InvalidInput(format!("target population {target} outside [0, 1)")));
    }
    let p_of = |fc: f64| -> Result<f64> {
        let s = PapScenario { fc21: fc, second: None, ..scenario.clone() };
        Ok(s.run(packet)?.final_populations[0])
    };
    // log scan for the first crossing
    let mut lo = 1e-6;
    let mut p_lo = p_of(lo)? - target;
    while lo < 1.0 {
        let hi = lo * 1.5;
        let p_hi = p_of(hi)? - target;
        if p_lo < 0.0 && p_hi >= 0.0 {
            return brent(|fc| Ok(p_of(fc)? - target), lo, hi, 1e-9 * hi);
        }
        lo = hi;
        p_lo = p_hi;
    }
    Err(Error::Calibration(format!("no bound-bound FC factor in [1e-6, 1] reaches P = {target}")))
}

/// Final target population against pump intensity (W/cm^2) in the coherent run.
pub fn pump_intensity_scan(scenario: &PapScenario, packet: &ContinuumPacket, intensities: &[f64]) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    intensities
        .par_iter()
        .map(|&i| {
            let mut s = scenario.clone();
            s.first.pump_intensity = i;
            Ok((i, s.run(packet)?.final_populations[0]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_shapes() {
        let (s, p) = PapScenario::coherent().build();
        assert_eq!((s.states.len(), p.len()), (2, 2));
        s.validate(p.len()).unwrap();
        let (s, p) = PapScenario::cascaded().build();
        assert_eq!((s.states.len(), p.len()), (4, 4));
        s.validate(p.len()).unwrap();
        // Stokes precedes pump in both pairs
        assert!(p[0].center < p[1].center && p[2].center < p[3].center);
        // second pair starts after the first ends
        assert!(p[2].support().0 >= p[1].support().1 - 1.0);
    }

    #[test]
    fn calibrated_value_is_reproduced() {
        let s = PapScenario::coherent();
        let fc = calibrate_fc21(&s, &PapScenario::coherent_packet(), 0.6).unwrap();
        assert!((fc / FC21_CALIBRATED - 1.0).abs() < 1e-6, "{fc:.10e}");
    }
}
