//! Scenario files: TOML with a unit tag on every dimensional value.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Value;

use papsim_core::units::{Dimension, Quantity};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    /// Surface name to "builtin:<a in a.u.>", "builtin:morse-a" or "file:<path>".
    #[serde(default)]
    pub potential: BTreeMap<String, String>,
    pub levels: Option<LevelSelector>,
    pub scatter: Option<ScatterSection>,
    pub fc: Option<FcSection>,
    pub branching: Option<BranchingSection>,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub pulses: Vec<PulseSpec>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec>,
    #[serde(default)]
    pub continuum: Vec<ContinuumSpec>,
    pub packet: Option<PacketSpec>,
    pub run: Option<RunSpec>,
    pub scan: Option<ScanSpec>,
    pub ensemble: Option<EnsembleSection>,
    pub rates: Option<RatesSection>,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSelector {
    pub surface: String,
    #[serde(default)]
    pub j: u32,
    /// Two energies bounding the search.
    pub window: [String; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub start: String,
    pub stop: String,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusRange {
    pub start: String,
    pub stop: String,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSection {
    pub surface: String,
    #[serde(default = "default_true")]
    pub scattering_length: bool,
    pub energies: Option<EnergyRange>,
    /// Upper level for continuum-bound overlaps along the scan: the level
    /// nearest `energy` on `surface`.
    pub bound: Option<NearestLevel>,
    /// Interpolation radii of the synthetic ground curve to scan.
    pub r_interp: Option<RadiusRange>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearestLevel {
    pub surface: String,
    #[serde(default)]
    pub j: u32,
    pub energy: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcSection {
    pub lower: LevelSelector,
    pub upper: LevelSelector,
    /// Collision energies on the lower surface for continuum-bound rows.
    #[serde(default)]
    pub continuum_energies: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchingSection {
    /// (label, FC) rows of one upper level into a lower manifold.
    #[serde(default)]
    pub rows: Vec<(String, f64)>,
    pub pi_fc: Option<f64>,
    pub pi_duration: Option<String>,
    pub dipole: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    pub energy: String,
    /// Radiative lifetime; absent for a stable level.
    pub lifetime: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub name: String,
    #[serde(default = "default_shape")]
    pub shape: String,
    pub center: String,
    pub fwhm: String,
    pub intensity: String,
    pub detuning: Option<String>,
    /// Carrier phase in radians.
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_polarization")]
    pub polarization: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub lower: String,
    pub upper: String,
    pub pulse: String,
    pub fc: f64,
    pub dipole: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSpec {
    pub state: String,
    pub pulse: String,
    pub fc: String,
    pub dipole: String,
    /// "constant" or "wigner" (E^(1/4) about `e_ref`).
    #[serde(default = "default_profile")]
    pub profile: String,
    pub e_ref: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    /// "gaussian" or "from-ensemble".
    #[serde(default = "default_mode")]
    pub mode: String,
    pub e0: String,
    pub delta_e: Option<String>,
    pub t0: String,
    pub e_ref: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub e_min: String,
    pub e_max: String,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_start: Option<String>,
    pub t_end: Option<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// "svca" or "full".
    #[serde(default = "default_method")]
    pub method: String,
    pub grid: Option<GridSpec>,
    /// State whose final population is reported.
    pub target: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub pulse: String,
    pub intensities: Vec<String>,
    pub target: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub temperature: String,
    pub density: String,
    pub reduced_mass: String,
    pub pulse_duration: String,
    pub singlet_fraction: f64,
    pub trap_length: String,
    pub focus_diameter: String,
    pub lattice_speed: Option<String>,
    pub sequence_duration: String,
    pub branch_fraction: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Lowest sampled energy in units of kT; absent for the plain rule.
    pub guard: Option<f64>,
    #[serde(default = "default_ensemble_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
    pub t0: Option<String>,
    pub target: Option<String>,
    pub molecules_per_sequence: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub probability: f64,
    pub energy: String,
    pub per_sequence_yield: Option<f64>,
    pub molecules_per_sequence: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default = "default_true")]
    pub json: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { dir: default_out_dir(), csv: true, json: true }
    }
}

fn default_true() -> bool {
    true
}
fn default_shape() -> String {
    "sin2".into()
}
fn default_polarization() -> String {
    "sigma+".into()
}
fn default_profile() -> String {
    "constant".into()
}
fn default_mode() -> String {
    "gaussian".into()
}
fn default_samples() -> usize {
    401
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_atol() -> f64 {
    1e-12
}
fn default_method() -> String {
    "svca".into()
}
fn default_nodes() -> usize {
    16
}
fn default_ensemble_tol() -> f64 {
    1e-4
}
fn default_max_nodes() -> usize {
    256
}
fn default_out_dir() -> String {
    "out".into()
}

/// Parse a tagged quantity, naming the field on failure.
pub fn quantity(field: &str, text: &str, dim: Dimension) -> Result<f64, CliError> {
    Quantity::parse(text, dim)
        .map(|q| q.value)
        .map_err(|e| CliError::config("UNIT", format!("{field}: {e}")))
}

/// Where a scenario came from.
#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Preset(String),
}

impl Source {
    pub fn describe(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Preset(n) => format!("preset:{n}"),
        }
    }

    /// Directory that relative `file:` paths resolve against.
    pub fn base_dir(&self) -> PathBuf {
        match self {
            Source::File(p) => p.parent().map(Path::to_path_buf).unwrap_or_default(),
            Source::Preset(_) => PathBuf::from("."),
        }
    }
}

/// A scenario after overrides, with the tree it was built from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub tree: Value,
    pub source: Source,
}

impl Loaded {
    /// Canonical text of the effective configuration (keys sorted).
    pub fn canonical(&self) -> String {
        toml::to_string(&self.tree).unwrap_or_default()
    }

    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn load(source: Source, overrides: &[String]) -> Result<Loaded, CliError> {
    let text = match &source {
        Source::File(p) => std::fs::read_to_string(p).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::config("CONFIG_NOT_FOUND", format!("no config file at {}", p.display()))
            } else {
                CliError::config("CONFIG_READ", format!("{}: {e}", p.display()))
            }
        })?,
        Source::Preset(n) => presets::get(n)
            .ok_or_else(|| CliError::config("PRESET_UNKNOWN", format!("no preset '{n}' (have: {})", presets::NAMES.join(", "))))?
            .to_string(),
    };
    let mut tree: Value = toml::from_str(&text).map_err(|e| CliError::config("CONFIG_PARSE", e.to_string()))?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let scenario = Scenario::deserialize(tree.clone()).map_err(|e| CliError::config("CONFIG_INVALID", e.to_string()))?;
    Ok(Loaded { scenario, tree, source })
}

/// Apply `key.path=value` to an existing key. Array elements are addressed
/// by index or by their `name` / `label` field.
pub fn apply_override(tree: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config("OVERRIDE_SYNTAX", format!("'{spec}' is not key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let unknown = || CliError::config("OVERRIDE_UNKNOWN_KEY", format!("'{path}' does not name an existing key"));
    let mut node = tree;
    for seg in path.split('.') {
        node = match node {
            Value::Table(t) => t.get_mut(seg).ok_or_else(unknown)?,
            Value::Array(a) => {
                let idx = match seg.parse::<usize>() {
                    Ok(i) if i < a.len() => i,
                    _ => a
                        .iter()
                        .position(|v| {
                            ["name", "label"].iter().any(|k| v.get(k).and_then(Value::as_str) == Some(seg))
                        })
                        .ok_or_else(unknown)?,
                };
                &mut a[idx]
            }
            _ => return Err(unknown()),
        };
    }
    let bad = |what: &str| CliError::config("OVERRIDE_TYPE", format!("'{path}' expects {what}, got '{raw}'"));
    let new = match node {
        Value::String(_) => Value::String(raw.trim_matches('"').to_string()),
        Value::Integer(_) => Value::Integer(raw.parse().map_err(|_| bad("an integer"))?),
        Value::Float(_) => Value::Float(raw.parse().map_err(|_| bad("a number"))?),
        Value::Boolean(_) => Value::Boolean(raw.parse().map_err(|_| bad("true or false"))?),
        Value::Array(_) => {
            let wrapped: toml::Table = toml::from_str(&format!("v = {raw}")).map_err(|_| bad("an array"))?;
            match wrapped.get("v") {
                Some(v @ Value::Array(_)) => v.clone(),
                _ => return Err(bad("an array")),
            }
        }
        Value::Datetime(_) | Value::Table(_) => return Err(bad("a section; override its keys instead")),
    };
    *node = new;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree() -> Value {
        toml::from_str(
            r#"
            [run]
            samples = 5
            rtol = 1e-9
            [[pulses]]
            name = "S"
            intensity = "7e3 W/cm^2"
            [[pulses]]
            name = "P"
            intensity = "1e4 W/cm^2"
            "#,
        )
        .unwrap()
    }

    #[test]
    fn override_by_name_and_index() {
        let mut t = tree();
        apply_override(&mut t, "pulses.P.intensity=2e4 W/cm^2").unwrap();
        apply_override(&mut t, "pulses.0.intensity=1 W/cm^2").unwrap();
        apply_override(&mut t, "run.samples=9").unwrap();
        assert_eq!(t["pulses"][1]["intensity"].as_str(), Some("2e4 W/cm^2"));
        assert_eq!(t["pulses"][0]["intensity"].as_str(), Some("1 W/cm^2"));
        assert_eq!(t["run"]["samples"].as_integer(), Some(9));
    }

    #[test]
    fn override_rejects_new_keys_and_wrong_types() {
        let mut t = tree();
        let tag = |r: Result<(), CliError>| r.unwrap_err().tag().to_string();
        assert_eq!(tag(apply_override(&mut t, "run.method=full")), "OVERRIDE_UNKNOWN_KEY");
        assert_eq!(tag(apply_override(&mut t, "pulses.Q.intensity=1 W/cm^2")), "OVERRIDE_UNKNOWN_KEY");
        assert_eq!(tag(apply_override(&mut t, "run.samples=many")), "OVERRIDE_TYPE");
        assert_eq!(tag(apply_override(&mut t, "run")), "OVERRIDE_SYNTAX");
    }

    #[test]
    fn every_preset_parses() {
        for n in presets::NAMES {
            load(Source::Preset(n.to_string()), &[]).unwrap_or_else(|e| panic!("{n}: {e}"));
        }
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = toml::from_str::<Value>("[run]\nsamples = 5\nrtol = 1e-9\n").unwrap();
        let b = toml::from_str::<Value>("[run]\nrtol=1e-9\n\n# comment\nsamples=5").unwrap();
        assert_eq!(toml::to_string(&a).unwrap(), toml::to_string(&b).unwrap());
    }
}
