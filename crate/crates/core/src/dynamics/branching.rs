//! Pi-pulse transfer followed by spontaneous decay into a lower manifold.

use crate::error::{Error, Result};
use crate::franckcondon::{bound_bound_fc, FcKind, FcValue};
use crate::spectrum::BoundState;
use crate::units::to_w_per_cm2;

#[derive(Debug, Clone)]
pub struct Branching {
    /// FC factor of the pi-pulse transition, when the source state is known.
    pub pi_fc: Option<f64>,
    /// (label, fraction) per lower level, renormalized to sum to one.
    pub fractions: Vec<(String, f64)>,
    /// Sum of FC^2 over the supplied manifold before renormalization.
    pub completeness: f64,
    pub warnings: Vec<String>,
}

impl Branching {
    pub fn dominant(&self) -> Option<(&str, f64)> {
        self.fractions
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, f)| (l.as_str(), *f))
    }

    pub fn fraction(&self, label: &str) -> Option<f64> {
        self.fractions.iter().find(|(l, _)| l == label).map(|x| x.1)
    }
}

/// Branching ratios FC^2 / sum FC^2 from a row of overlaps.
pub fn branching_from_fc(rows: &[(String, f64)]) -> Result<Branching> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty lower manifold".into()));
    }
    let total: f64 = rows.iter().map(|r| r.1 * r.1).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain("no decay channel has a non-zero FC factor".into()));
    }
    let mut warnings = Vec::new();
    if total < 0.9 {
        warnings.push(format!("lower manifold carries only {total:.4} of the FC^2 sum; branching is renormalized"));
    }
    Ok(Branching {
        pi_fc: None,
        fractions: rows.iter().map(|(l, f)| (l.clone(), f * f / total)).collect(),
        completeness: total,
        warnings,
    })
}

/// Move the population of `from` into `via` and distribute it over `lower`.
pub fn decay_accumulation(from: &BoundState, via: &BoundState, lower: &[BoundState]) -> Result<Branching> {
    let rows = lower
        .iter()
        .map(|s| Ok((format!("v={}", s.v), bound_bound_fc(via, s)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let mut b = branching_from_fc(&rows)?;
    b.pi_fc = Some(bound_bound_fc(from, via)?.value);
    Ok(b)
}

/// Average intensity (W/cm^2) of a rectangular pulse of the given duration
/// whose area dipole * FC * field * duration equals pi.
pub fn pi_pulse_intensity(fc: FcValue, duration: f64, dipole: f64) -> Result<f64> {
    if fc.kind != FcKind::BoundBound {
        return Err(Error::InvalidInput("a pi pulse needs a bound-bound FC factor".into()));
    }
    if !(duration > 0.0) || !(dipole > 0.0) {
        return Err(Error::InvalidInput("duration and dipole must be positive".into()));
    }
    if fc.value == 0.0 {
        return Err(Error::Domain("zero FC factor: no pulse area reaches pi".into()));
    }
    let field = std::f64::consts::PI / (dipole * fc.value.abs() * duration);
    Ok(to_w_per_cm2(field * field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{nanoseconds, DIPOLE_XA};

    fn bb(v: f64) -> FcValue {
        FcValue { value: v, kind: FcKind::BoundBound }
    }

    #[test]
    fn ground_state_branch() {
        // the remaining 0.98 - 0.27^2 of FC^2 spread over other levels
        let mut rows = vec![("v=0".to_string(), 0.27)];
        let rest = (0.98f64 - 0.27 * 0.27) / 10.0;
        rows.extend((1..=10).map(|v| (format!("v={v}"), rest.sqrt())));
        let b = branching_from_fc(&rows).unwrap();
        let f0 = b.fraction("v=0").unwrap();
        assert!((0.073..=0.075).contains(&f0), "{f0}");
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn sharp_maximum_collects_a_quarter() {
        // one strong overlap, weak neighbours, a broad flat remainder
        let mut rows = vec![("v=64".to_string(), 0.5), ("v=63".to_string(), 0.2), ("v=65".to_string(), 0.2)];
        let rest = ((1.0f64 - 0.25 - 0.08) / 75.0).sqrt();
        rows.extend((0..75).map(|v| (format!("v={v}"), rest)));
        let b = branching_from_fc(&rows).unwrap();
        let (label, peak) = b.dominant().unwrap();
        assert_eq!(label, "v=64");
        assert!((peak - 0.25).abs() < 0.01, "{peak}");
        for n in ["v=63", "v=65"] {
            assert!(b.fraction(n).unwrap() < 0.2 * peak);
        }
    }

    #[test]
    fn single_channel_and_incomplete_manifold() {
        let b = branching_from_fc(&[("v=0".into(), 1.0)]).unwrap();
        assert_eq!(b.fractions[0].1, 1.0);
        let b = branching_from_fc(&[("v=0".into(), 0.5)]).unwrap();
        assert_eq!(b.fractions[0].1, 1.0);
        assert_eq!(b.warnings.len(), 1);
        assert!(matches!(branching_from_fc(&[("v=0".into(), 0.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn pi_pulse_intensities() {
        let ps = 1e-3 * nanoseconds(1.0);
        let i = pi_pulse_intensity(bb(0.175), ps, DIPOLE_XA).unwrap();
        assert!(i > 7.4e8 / 2.0 && i < 7.4e8 * 2.0, "{i}");
        let i2 = pi_pulse_intensity(bb(0.175), 2.0 * ps, DIPOLE_XA).unwrap();
        assert!((i / i2 - 4.0).abs() < 1e-12);
        let i3 = pi_pulse_intensity(bb(0.174), ps, DIPOLE_XA).unwrap();
        assert!((i3 / i - 1.0).abs() < 0.02);
        assert!(matches!(pi_pulse_intensity(bb(0.0), ps, DIPOLE_XA), Err(Error::Domain(_))));
        let c = FcValue { value: 1.0, kind: FcKind::ContinuumBound };
        assert!(matches!(pi_pulse_intensity(c, ps, DIPOLE_XA), Err(Error::InvalidInput(_))));
    }
}
