//! Conversions between laboratory units and atomic units (hbar = m_e = e = 1).
//!
//! Every conversion constant of the crate lives in this file. Thermal tags
//! (K, mK, uK) convert straight to an energy k_B T.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Boltzmann constant in hartree per kelvin.
pub const HARTREE_PER_KELVIN: f64 = 3.166_811_563_456_453e-6;
/// Atomic unit of time in seconds.
pub const SECONDS_PER_AU_TIME: f64 = 2.418_884_326_586_4e-17;
/// Bohr radius in meters.
pub const METERS_PER_BOHR: f64 = 5.291_772_105_44e-11;
/// Cycle-averaged intensity of a field of one atomic unit, W/cm^2.
pub const INTENSITY_AU_W_PER_CM2: f64 = 3.509_445_527_731_628e16;
/// Hartree in wavenumbers (cm^-1).
pub const WAVENUMBERS_PER_HARTREE: f64 = 219_474.631_363_14;
/// Atomic unit of velocity in m/s.
pub const METERS_PER_SECOND_PER_AU_VELOCITY: f64 = 2_187_691.262_16;
/// Proton-to-electron mass ratio as rounded for the model diatomic.
pub const AMU_ROUNDED: f64 = 1823.0;
/// Reduced mass of two 85-amu atoms, m = 1823 * 85 / 2.
pub const REDUCED_MASS_RB85: f64 = AMU_ROUNDED * 85.0 / 2.0;
/// Electronic transition dipole of the model X-A transition.
pub const DIPOLE_XA: f64 = 3.0;

const CM_PER_BOHR: f64 = METERS_PER_BOHR * 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Energy,
    Time,
    Length,
    InverseVolume,
    FieldAmplitude,
    Intensity,
    Mass,
    Velocity,
    Dimensionless,
    InverseSqrtEnergy,
    SqrtEnergy,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Energy => "energy",
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::InverseVolume => "inverse-volume-density",
            Dimension::FieldAmplitude => "field-amplitude",
            Dimension::Intensity => "intensity",
            Dimension::Mass => "mass",
            Dimension::Velocity => "velocity",
            Dimension::Dimensionless => "dimensionless",
            Dimension::InverseSqrtEnergy => "inverse-sqrt-energy",
            Dimension::SqrtEnergy => "sqrt-energy",
        };
        f.write_str(s)
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "energy" => Dimension::Energy,
            "time" => Dimension::Time,
            "length" => Dimension::Length,
            "inverse-volume-density" => Dimension::InverseVolume,
            "field-amplitude" => Dimension::FieldAmplitude,
            "intensity" => Dimension::Intensity,
            "mass" => Dimension::Mass,
            "velocity" => Dimension::Velocity,
            "dimensionless" => Dimension::Dimensionless,
            "inverse-sqrt-energy" => Dimension::InverseSqrtEnergy,
            "sqrt-energy" => Dimension::SqrtEnergy,
            other => return Err(Error::InvalidInput(format!("unknown dimension '{other}'"))),
        })
    }
}

/// Laboratory unit tags accepted at the configuration boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Unit {
    Kelvin,
    Millikelvin,
    Microkelvin,
    Hartree,
    Wavenumber,
    Second,
    Microsecond,
    Nanosecond,
    Picosecond,
    Nanometer,
    Micrometer,
    Centimeter,
    WattPerCm2,
    PerCm3,
    CentimeterPerSecond,
    /// Value already in atomic units of the given dimension.
    Atomic(Dimension),
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Kelvin | Millikelvin | Microkelvin | Hartree | Wavenumber => Dimension::Energy,
            Second | Microsecond | Nanosecond | Picosecond => Dimension::Time,
            Nanometer | Micrometer | Centimeter => Dimension::Length,
            WattPerCm2 => Dimension::Intensity,
            PerCm3 => Dimension::InverseVolume,
            CentimeterPerSecond => Dimension::Velocity,
            Atomic(d) => d,
        }
    }

    /// Parse a unit tag. `a.u.` needs the expected dimension to be meaningful.
    pub fn parse(tag: &str, atomic_dimension: Dimension) -> Result<Unit> {
        use Unit::*;
        Ok(match tag.trim() {
            "K" => Kelvin,
            "mK" => Millikelvin,
            "uK" | "μK" | "µK" => Microkelvin,
            "Eh" | "hartree" => Hartree,
            "cm^-1" | "cm-1" => Wavenumber,
            "s" => Second,
            "us" | "μs" | "µs" => Microsecond,
            "ns" => Nanosecond,
            "ps" => Picosecond,
            "nm" => Nanometer,
            "um" | "μm" | "µm" => Micrometer,
            "cm" => Centimeter,
            "W/cm^2" | "W/cm2" => WattPerCm2,
            "cm^-3" | "cm-3" => PerCm3,
            "cm/s" => CentimeterPerSecond,
            "a.u." | "au" => Atomic(atomic_dimension),
            other => return Err(Error::InvalidInput(format!("unknown unit tag '{other}'"))),
        })
    }

    /// Multiplicative factor lab -> atomic, for the linear units.
    fn factor(self) -> Option<f64> {
        use Unit::*;
        Some(match self {
            Kelvin => HARTREE_PER_KELVIN,
            Millikelvin => HARTREE_PER_KELVIN * 1e-3,
            Microkelvin => HARTREE_PER_KELVIN * 1e-6,
            Hartree => 1.0,
            Wavenumber => 1.0 / WAVENUMBERS_PER_HARTREE,
            Second => 1.0 / SECONDS_PER_AU_TIME,
            Microsecond => 1e-6 / SECONDS_PER_AU_TIME,
            Nanosecond => 1e-9 / SECONDS_PER_AU_TIME,
            Picosecond => 1e-12 / SECONDS_PER_AU_TIME,
            Nanometer => 1e-9 / METERS_PER_BOHR,
            Micrometer => 1e-6 / METERS_PER_BOHR,
            Centimeter => 1.0 / CM_PER_BOHR,
            WattPerCm2 => 1.0 / INTENSITY_AU_W_PER_CM2,
            PerCm3 => CM_PER_BOHR * CM_PER_BOHR * CM_PER_BOHR,
            CentimeterPerSecond => 1e-2 / METERS_PER_SECOND_PER_AU_VELOCITY,
            Atomic(_) => 1.0,
        })
    }
}

/// A value in atomic units tagged with its physical dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dimension: Dimension) -> Self {
        Self { value, dimension }
    }

    pub fn energy(value: f64) -> Self {
        Self::new(value, Dimension::Energy)
    }

    pub fn time(value: f64) -> Self {
        Self::new(value, Dimension::Time)
    }

    pub fn dimensionless(value: f64) -> Self {
        Self::new(value, Dimension::Dimensionless)
    }

    fn same_dim(&self, other: &Quantity, op: &str) -> Result<()> {
        if self.dimension != other.dimension {
            return Err(Error::Dimension(format!(
                "cannot {op} {} and {}",
                self.dimension, other.dimension
            )));
        }
        Ok(())
    }

    pub fn checked_add(self, other: Quantity) -> Result<Quantity> {
        self.same_dim(&other, "add")?;
        Ok(Quantity::new(self.value + other.value, self.dimension))
    }

    pub fn checked_sub(self, other: Quantity) -> Result<Quantity> {
        self.same_dim(&other, "subtract")?;
        Ok(Quantity::new(self.value - other.value, self.dimension))
    }

    pub fn scale(self, s: f64) -> Quantity {
        Quantity::new(self.value * s, self.dimension)
    }

    /// Return the value after checking the dimension.
    pub fn expect(self, dimension: Dimension) -> Result<f64> {
        if self.dimension != dimension {
            return Err(Error::Dimension(format!("expected {dimension}, got {}", self.dimension)));
        }
        Ok(self.value)
    }

    /// Parse strings such as `"750 ns"`, `"1e11 cm^-3"` or `"0.5 a.u."`.
    pub fn parse(text: &str, expected: Dimension) -> Result<Quantity> {
        let t = text.trim();
        let split = t.find(char::is_whitespace).ok_or_else(|| {
            Error::InvalidInput(format!("'{t}' lacks a unit tag (write e.g. '750 ns' or '1 a.u.')"))
        })?;
        let (num, tag) = t.split_at(split);
        let value: f64 = num
            .parse()
            .map_err(|_| Error::InvalidInput(format!("'{num}' is not a number")))?;
        let unit = Unit::parse(tag, expected)?;
        let q = to_atomic(value, unit)?;
        if q.dimension != expected {
            return Err(Error::Dimension(format!(
                "'{t}' has dimension {}, expected {expected}",
                q.dimension
            )));
        }
        Ok(q)
    }
}

/// Convert a laboratory value to atomic units.
pub fn to_atomic(value: f64, unit: Unit) -> Result<Quantity> {
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite value {value}")));
    }
    let factor = unit.factor().expect("all unit tags are linear");
    Ok(Quantity::new(value * factor, unit.dimension()))
}

/// Convert a tag string and value, e.g. `to_atomic_tag(100.0, "uK")`.
pub fn to_atomic_tag(value: f64, tag: &str) -> Result<Quantity> {
    to_atomic(value, Unit::parse(tag, Dimension::Dimensionless)?)
}

/// Convert an atomic-unit quantity back to the given laboratory unit.
pub fn from_atomic(q: Quantity, unit: Unit) -> Result<f64> {
    if q.dimension != unit.dimension() {
        return Err(Error::Dimension(format!(
            "cannot express {} in a {} unit",
            q.dimension,
            unit.dimension()
        )));
    }
    Ok(q.value / unit.factor().expect("linear"))
}

/// Peak field amplitude (a.u.) of a laser of cycle-averaged intensity `intensity`.
pub fn field_from_intensity(intensity: Quantity) -> Result<Quantity> {
    let i = intensity.expect(Dimension::Intensity)?;
    if i < 0.0 {
        return Err(Error::Domain(format!("negative intensity {i}")));
    }
    Ok(Quantity::new(i.sqrt(), Dimension::FieldAmplitude))
}

/// Cycle-averaged intensity (a.u.) of a field amplitude.
pub fn intensity_from_field(field: Quantity) -> Result<Quantity> {
    let e = field.expect(Dimension::FieldAmplitude)?;
    Ok(Quantity::new(e * e, Dimension::Intensity))
}

/// Rabi frequency from a field and a dipole-weighted overlap.
///
/// Bound-bound: `dipole_times_fc` is dimensionless, result is an energy.
/// Continuum-bound: it carries energy^(-1/2), result is energy^(1/2).
pub fn rabi_frequency(field: Quantity, dipole_times_fc: Quantity) -> Result<Quantity> {
    let e = field.expect(Dimension::FieldAmplitude)?;
    let dim = match dipole_times_fc.dimension {
        Dimension::Dimensionless => Dimension::Energy,
        Dimension::InverseSqrtEnergy => Dimension::SqrtEnergy,
        other => {
            return Err(Error::Dimension(format!(
                "dipole coupling must be dimensionless or inverse-sqrt-energy, got {other}"
            )))
        }
    };
    Ok(Quantity::new(e * dipole_times_fc.value, dim))
}

pub fn hartree_to_wavenumber(e: f64) -> f64 {
    e * WAVENUMBERS_PER_HARTREE
}

pub fn kelvin(t: f64) -> f64 {
    t * HARTREE_PER_KELVIN
}

pub fn microkelvin(t: f64) -> f64 {
    t * HARTREE_PER_KELVIN * 1e-6
}

pub fn nanoseconds(t: f64) -> f64 {
    t * 1e-9 / SECONDS_PER_AU_TIME
}

pub fn w_per_cm2(i: f64) -> f64 {
    i / INTENSITY_AU_W_PER_CM2
}

pub fn to_w_per_cm2(i_au: f64) -> f64 {
    i_au * INTENSITY_AU_W_PER_CM2
}

pub fn per_cm3(rho: f64) -> f64 {
    rho * CM_PER_BOHR * CM_PER_BOHR * CM_PER_BOHR
}

pub fn micrometers(l: f64) -> f64 {
    l * 1e-6 / METERS_PER_BOHR
}

pub fn cm_per_s(v: f64) -> f64 {
    v * 1e-2 / METERS_PER_SECOND_PER_AU_VELOCITY
}

pub fn to_seconds(t_au: f64) -> f64 {
    t_au * SECONDS_PER_AU_TIME
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_maps_to_zero() {
        for tag in ["K", "uK", "ns", "nm", "W/cm^2", "cm^-3", "a.u."] {
            assert_eq!(to_atomic_tag(0.0, tag).unwrap().value, 0.0);
        }
    }

    #[test]
    fn thermal_energy() {
        let q = to_atomic(100.0, Unit::Microkelvin).unwrap();
        assert_eq!(q.dimension, Dimension::Energy);
        assert!((q.value - 3.16681e-6 * 1e-4).abs() / q.value < 1e-5);
    }

    #[test]
    fn nanoseconds_to_au() {
        let q = to_atomic(750.0, Unit::Nanosecond).unwrap();
        let oracle = 750e-9 / 2.41888e-17;
        assert!((q.value - oracle).abs() / oracle < 1e-5);
        assert!((q.value - 3.101e10).abs() / 3.101e10 < 1e-3);
    }

    #[test]
    fn intensity_to_field() {
        let i = to_atomic(1e4, Unit::WattPerCm2).unwrap();
        let e = field_from_intensity(i).unwrap();
        let oracle = (1e4f64 / 3.50945e16).sqrt();
        assert!((e.value - oracle).abs() / oracle < 1e-5);
        let i7 = field_from_intensity(to_atomic(7e3, Unit::WattPerCm2).unwrap()).unwrap();
        let oracle7 = (7e3f64 / 3.50945e16).sqrt();
        assert!((i7.value - oracle7).abs() / oracle7 < 1e-5);
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(matches!(to_atomic_tag(1.0, "furlong"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rabi_dimensions() {
        let field = Quantity::new(1.688e-5, Dimension::FieldAmplitude);
        let c = rabi_frequency(field, Quantity::new(3.0 * 31.5, Dimension::InverseSqrtEnergy)).unwrap();
        assert_eq!(c.dimension, Dimension::SqrtEnergy);
        assert!((c.value - 1.595e-3).abs() < 1e-6);
        let b = rabi_frequency(field, Quantity::dimensionless(0.3)).unwrap();
        assert_eq!(b.dimension, Dimension::Energy);
        let zero = rabi_frequency(Quantity::new(0.0, Dimension::FieldAmplitude), Quantity::dimensionless(3.0)).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(rabi_frequency(field, Quantity::energy(1.0)).is_err());
        assert!(rabi_frequency(Quantity::energy(1.0), Quantity::dimensionless(1.0)).is_err());
    }

    #[test]
    fn arithmetic_checks_dimension() {
        assert!(Quantity::energy(1.0).checked_add(Quantity::time(1.0)).is_err());
        assert_eq!(Quantity::energy(1.0).checked_sub(Quantity::energy(0.25)).unwrap().value, 0.75);
    }

    #[test]
    fn parse_quantity() {
        let q = Quantity::parse("750 ns", Dimension::Time).unwrap();
        assert!((q.value - nanoseconds(750.0)).abs() < 1e-3);
        assert!(Quantity::parse("750 ns", Dimension::Energy).is_err());
        assert!(Quantity::parse("750", Dimension::Time).is_err());
        assert_eq!(Quantity::parse("2.5 a.u.", Dimension::Length).unwrap().value, 2.5);
    }

    #[test]
    fn reduced_mass() {
        assert_eq!(REDUCED_MASS_RB85, 77477.5);
    }

    const ALL_UNITS: [Unit; 16] = [
        Unit::Kelvin,
        Unit::Millikelvin,
        Unit::Microkelvin,
        Unit::Hartree,
        Unit::Wavenumber,
        Unit::Second,
        Unit::Microsecond,
        Unit::Nanosecond,
        Unit::Picosecond,
        Unit::Nanometer,
        Unit::Micrometer,
        Unit::Centimeter,
        Unit::WattPerCm2,
        Unit::PerCm3,
        Unit::CentimeterPerSecond,
        Unit::Atomic(Dimension::Mass),
    ];

    proptest! {
        #[test]
        fn round_trip(idx in 0usize..ALL_UNITS.len(), x in -1e12f64..1e12) {
            let u = ALL_UNITS[idx];
            let back = from_atomic(to_atomic(x, u).unwrap(), u).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }
}
