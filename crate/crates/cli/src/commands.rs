//! Subcommand bodies. Each turns a scenario into a set of artifacts.

use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use papsim_core::dynamics::{
    branching_from_fc, integrate_full_rwa, integrate_svca, pi_pulse_intensity, BoundLevel, ContinuumEdge, ContinuumGrid, ContinuumPacket,
    Coupling, FcProfile, IntegrationOptions, LinkageScheme, PulseEnvelope, PulseShape, SimulationResult,
};
use papsim_core::ensemble::{
    campaign_budget, collisions_per_pulse, ensemble_dynamics, fraction_per_pulse, wavepacket_params, CampaignBudget, EnsembleSpec,
    ThermalQuadrature,
};
use papsim_core::franckcondon::{continuum_bound_fc, fc_table, fc_table_continuum, FcEntry, FcKind, FcValue};
use papsim_core::models::a_state_model;
use papsim_core::potentials::{builtin_x_model, load_potential, synthetic_x_curve, CoupledPotential, LoadedPotential, Potential};
use papsim_core::scattering::{continuum_wave, loglog_slope, scattering_length, ContinuumOptions};
use papsim_core::spectrum::{bound_levels, bound_levels_coupled, BoundState, SolverOptions};
use papsim_core::units::{
    field_from_intensity, hartree_to_wavenumber, to_seconds, Dimension, Quantity, HARTREE_PER_KELVIN, SECONDS_PER_AU_TIME,
};

use crate::config::{quantity, EnsembleSection, LevelSelector, Loaded, NearestLevel, Scenario};
use crate::error::CliError;
use crate::output::{fmt_e, Artifacts, Table};

type Res<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Levels,
    Scatter,
    Fc,
    Dynamics,
    Ensemble,
    Rates,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Scatter => "scatter",
            Command::Fc => "fc",
            Command::Dynamics => "dynamics",
            Command::Ensemble => "ensemble",
            Command::Rates => "rates",
        }
    }
}

pub fn execute(cmd: Command, loaded: &Loaded) -> Res<Artifacts> {
    let sc = &loaded.scenario;
    let base = loaded.source.base_dir();
    let mut out = match cmd {
        Command::Levels => levels(sc, &base)?,
        Command::Scatter => scatter(sc, &base)?,
        Command::Fc => fc(sc, &base)?,
        Command::Dynamics => dynamics(sc)?,
        Command::Ensemble => ensemble(sc)?,
        Command::Rates => rates(sc)?,
    };
    out.retain_formats(sc.outputs.csv, sc.outputs.json);
    Ok(out)
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Res<&'a T> {
    s.as_ref().ok_or_else(|| CliError::config("CONFIG_INVALID", format!("scenario has no [{name}] section")))
}

fn energy(field: &str, text: &str) -> Res<f64> {
    quantity(field, text, Dimension::Energy)
}

fn time(field: &str, text: &str) -> Res<f64> {
    quantity(field, text, Dimension::Time)
}

fn to_microkelvin(e: f64) -> f64 {
    e / HARTREE_PER_KELVIN * 1e6
}

fn to_ns(t: f64) -> f64 {
    t * SECONDS_PER_AU_TIME * 1e9
}

// ---------------------------------------------------------------- surfaces

enum Surface {
    Single(Box<dyn Potential>),
    Coupled(CoupledPotential),
}

impl Surface {
    fn levels(&self, j: u32, window: (f64, f64)) -> Res<Vec<BoundState>> {
        let opts = SolverOptions::default();
        Ok(match self {
            Surface::Single(p) => bound_levels(p.as_ref(), j, window, &opts)?,
            Surface::Coupled(p) => bound_levels_coupled(p, j, window, &opts)?,
        })
    }

    fn single(&self, name: &str) -> Res<&dyn Potential> {
        match self {
            Surface::Single(p) => Ok(p.as_ref()),
            Surface::Coupled(_) => {
                Err(CliError::config("CONFIG_INVALID", format!("surface '{name}' is coupled; scattering needs a single channel")))
            }
        }
    }
}

fn surface(sc: &Scenario, name: &str, base: &Path) -> Res<Surface> {
    let spec = sc
        .potential
        .get(name)
        .ok_or_else(|| CliError::config("CONFIG_INVALID", format!("no surface '{name}' in [potential]")))?;
    let bad = || CliError::config("CONFIG_INVALID", format!("potential.{name} = '{spec}': expected builtin:<a in a.u.>, builtin:morse-a or file:<path>"));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    match (kind, arg) {
        ("builtin", "morse-a") => Ok(Surface::Single(Box::new(a_state_model()))),
        ("builtin", a) => {
            let target: f64 = a.trim().parse().map_err(|_| bad())?;
            Ok(Surface::Single(Box::new(builtin_x_model(target)?)))
        }
        ("file", path) => match load_potential(base.join(path))? {
            LoadedPotential::Single(p) => Ok(Surface::Single(Box::new(p))),
            LoadedPotential::Coupled(p) => Ok(Surface::Coupled(p)),
        },
        _ => Err(bad()),
    }
}

fn window(sel: &LevelSelector, field: &str) -> Res<(f64, f64)> {
    let lo = energy(&format!("{field}.window[0]"), &sel.window[0])?;
    let hi = energy(&format!("{field}.window[1]"), &sel.window[1])?;
    Ok((lo.min(hi), lo.max(hi)))
}

fn select_levels(sc: &Scenario, sel: &LevelSelector, field: &str, base: &Path) -> Res<Vec<BoundState>> {
    let w = window(sel, field)?;
    let levels = surface(sc, &sel.surface, base)?.levels(sel.j, w)?;
    if levels.is_empty() {
        return Err(CliError::Core(papsim_core::Error::Domain(format!("no levels of '{}' in {field}.window", sel.surface))));
    }
    Ok(levels)
}

/// Level nearest the requested energy, widening the search until one appears.
fn nearest_level(sc: &Scenario, sel: &NearestLevel, base: &Path) -> Res<BoundState> {
    let e = energy("bound.energy", &sel.energy)?;
    let s = surface(sc, &sel.surface, base)?;
    let mut half = 2e-4;
    for _ in 0..8 {
        let levels = s.levels(sel.j, (e - half, e + half))?;
        if let Some(l) = levels.into_iter().min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs())) {
            return Ok(l);
        }
        half *= 2.0;
    }
    Err(CliError::Core(papsim_core::Error::Domain(format!("no level of '{}' near {e:.6e}", sel.surface))))
}

// ---------------------------------------------------------------- levels

fn levels(sc: &Scenario, base: &Path) -> Res<Artifacts> {
    let sel = section(&sc.levels, "levels")?;
    let levels = select_levels(sc, sel, "levels", base)?;
    let mut t = Table::new(["v", "j", "energy_hartree", "energy_cm-1", "outer_turning_point_bohr", "richardson_change"]);
    for l in &levels {
        t.push(vec![
            l.v.to_string(),
            l.j.to_string(),
            fmt_e(l.energy),
            fmt_e(hartree_to_wavenumber(l.energy)),
            fmt_e(l.outer_turning_point),
            fmt_e(l.richardson_change),
        ]);
    }
    let mut out = Artifacts::default();
    out.csv("levels.csv", &t);
    out.json(
        "levels.json",
        &json!({
            "surface": sel.surface,
            "j": sel.j,
            "count": levels.len(),
            "energies_hartree": levels.iter().map(|l| l.energy).collect::<Vec<_>>(),
        }),
    );
    Ok(out)
}

// ---------------------------------------------------------------- scatter

fn grid_points(start: f64, stop: f64, n: usize, log: bool) -> Res<Vec<f64>> {
    if n < 2 || !(stop > start) || (log && start <= 0.0) {
        return Err(CliError::config("CONFIG_INVALID", "ranges need points >= 2 and 0 < start < stop"));
    }
    Ok((0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            if log {
                start * (stop / start).powf(s)
            } else {
                start + s * (stop - start)
            }
        })
        .collect())
}

fn scatter(sc: &Scenario, base: &Path) -> Res<Artifacts> {
    let sec = section(&sc.scatter, "scatter")?;
    let surf = surface(sc, &sec.surface, base)?;
    let p = surf.single(&sec.surface)?;
    let mut out = Artifacts::default();
    let mut summary = Map::new();
    summary.insert("surface".into(), json!(sec.surface));
    if sec.scattering_length {
        let a = scattering_length(p)?;
        summary.insert(
            "scattering_length".into(),
            json!({ "value_bohr": a.value, "residual_bohr": a.residual, "from_k_cot": a.from_k_cot }),
        );
    }
    if let Some(r) = &sec.energies {
        let es = grid_points(energy("scatter.energies.start", &r.start)?, energy("scatter.energies.stop", &r.stop)?, r.points, r.log)?;
        let bound = sec.bound.as_ref().map(|b| nearest_level(sc, b, base)).transpose()?;
        let opts = ContinuumOptions::default();
        let rows: Vec<(f64, f64, Option<f64>)> = es
            .par_iter()
            .map(|&e| {
                let c = continuum_wave(p, e, 0, &opts)?;
                let fc = bound.as_ref().map(|b| continuum_bound_fc(&c, b)).transpose()?;
                Ok((e, c.phase_shift, fc.map(|f| f.value)))
            })
            .collect::<papsim_core::Result<_>>()?;
        let mut t = Table::new(["energy_hartree", "energy_uK", "phase_shift_rad", "fc_au"]);
        for (e, d, f) in &rows {
            t.push_numbers(&[*e, to_microkelvin(*e), *d, f.unwrap_or(f64::NAN)]);
        }
        out.csv("scatter.csv", &t);
        if let Some(b) = &bound {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2.unwrap_or(0.0))).collect();
            summary.insert(
                "threshold".into(),
                json!({
                    "bound_energy_hartree": b.energy,
                    "bound_v": b.v,
                    "loglog_slope_lowest_decade": loglog_slope(&pts),
                }),
            );
        }
    }
    if let Some(r) = &sec.r_interp {
        if !sc.potential.get(&sec.surface).is_some_and(|s| s.starts_with("builtin:") && s != "builtin:morse-a") {
            return Err(CliError::config("CONFIG_INVALID", "scatter.r_interp needs the builtin ground surface"));
        }
        let lo = quantity("scatter.r_interp.start", &r.start, Dimension::Length)?;
        let hi = quantity("scatter.r_interp.stop", &r.stop, Dimension::Length)?;
        let radii = grid_points(lo, hi, r.points, false)?;
        let values: Vec<(f64, f64)> = radii
            .par_iter()
            .map(|&ri| {
                // a failed ladder near a pole is reported as NaN, not an error
                let a = synthetic_x_curve(ri).and_then(|p| scattering_length(&p)).map(|a| a.value).unwrap_or(f64::NAN);
                (ri, a)
            })
            .collect();
        let mut t = Table::new(["r_interp_bohr", "scattering_length_bohr"]);
        for (ri, a) in &values {
            t.push_numbers(&[*ri, *a]);
        }
        out.csv("r_interp.csv", &t);
        let poles = values.windows(2).filter(|w| (1.0 / w[0].1).signum() != (1.0 / w[1].1).signum()).count();
        summary.insert("r_interp_sign_changes_of_inverse_a".into(), json!(poles));
    }
    out.json("scatter.json", &Value::Object(summary));
    Ok(out)
}

// ---------------------------------------------------------------- fc

fn fc_rows_table(entries: &[FcEntry]) -> Table {
    let mut t = Table::new(["lower", "upper", "lower_energy_hartree", "upper_energy_hartree", "kind", "fc"]);
    for e in entries {
        let kind = match e.fc.kind {
            FcKind::BoundBound => "bound-bound",
            FcKind::ContinuumBound => "continuum-bound",
        };
        t.push(vec![e.lower.clone(), e.upper.clone(), fmt_e(e.lower_energy), fmt_e(e.upper_energy), kind.into(), fmt_e(e.fc.value)]);
    }
    t
}

fn branching_json(rows: &[(String, f64)]) -> Res<Value> {
    let b = branching_from_fc(rows)?;
    let (dl, df) = b.dominant().map(|(l, f)| (l.to_string(), f)).unwrap_or_default();
    let fractions: Map<String, Value> = b.fractions.iter().map(|(l, f)| (l.clone(), json!(f))).collect();
    Ok(json!({
        "fractions": fractions,
        "dominant": dl,
        "dominant_fraction": df,
        "completeness": b.completeness,
        "warnings": b.warnings,
    }))
}

fn fc(sc: &Scenario, base: &Path) -> Res<Artifacts> {
    if sc.fc.is_none() && sc.branching.is_none() {
        return Err(CliError::config("CONFIG_INVALID", "fc needs an [fc] or [branching] section"));
    }
    let mut out = Artifacts::default();
    let mut summary = Map::new();
    if let Some(sec) = &sc.fc {
        let lower = select_levels(sc, &sec.lower, "fc.lower", base)?;
        let upper = select_levels(sc, &sec.upper, "fc.upper", base)?;
        let mut entries = fc_table(&lower, &upper)?;
        if !sec.continuum_energies.is_empty() {
            let surf = surface(sc, &sec.lower.surface, base)?;
            let p = surf.single(&sec.lower.surface)?;
            let opts = ContinuumOptions::default();
            let continua = sec
                .continuum_energies
                .iter()
                .enumerate()
                .map(|(i, e)| Ok(continuum_wave(p, energy(&format!("fc.continuum_energies[{i}]"), e)?, sec.lower.j, &opts)?))
                .collect::<Res<Vec<_>>>()?;
            entries.extend(fc_table_continuum(&continua, &upper)?);
        }
        out.csv("fc.csv", &fc_rows_table(&entries));
        // decay of each upper level into the computed lower manifold
        let mut by_upper = Map::new();
        for u in &upper {
            let label = format!("v={} J={}", u.v, u.j);
            let rows: Vec<(String, f64)> = entries
                .iter()
                .filter(|e| e.upper == label && e.fc.kind == FcKind::BoundBound)
                .map(|e| (e.lower.clone(), e.fc.value))
                .collect();
            by_upper.insert(label, branching_json(&rows)?);
        }
        summary.insert("branching_by_upper".into(), Value::Object(by_upper));
    }
    if let Some(b) = &sc.branching {
        let mut v = Map::new();
        if !b.rows.is_empty() {
            v.insert("rows".into(), branching_json(&b.rows)?);
        }
        if let Some(fc) = b.pi_fc {
            let dur = time("branching.pi_duration", b.pi_duration.as_deref().unwrap_or(""))?;
            let dipole = quantity("branching.dipole", b.dipole.as_deref().unwrap_or(""), Dimension::Dimensionless)?;
            let i = pi_pulse_intensity(FcValue { value: fc, kind: FcKind::BoundBound }, dur, dipole)?;
            v.insert("pi_pulse".into(), json!({ "fc": fc, "duration_s": to_seconds(dur), "intensity_w_cm2": i }));
        }
        summary.insert("branching".into(), Value::Object(v));
    }
    out.json("fc.json", &Value::Object(summary));
    Ok(out)
}

// ---------------------------------------------------------------- dynamics

/// Linkage scheme, pulses and pulse names built from the scenario.
pub struct Linkage {
    pub scheme: LinkageScheme,
    pub pulses: Vec<PulseEnvelope>,
    pub names: Vec<String>,
}

fn index_of(names: &[String], name: &str, what: &str, field: &str) -> Res<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| CliError::config("CONFIG_INVALID", format!("{field}: no {what} named '{name}'")))
}

/// `e_ref_default` anchors Wigner profiles whose edge gives no reference energy.
pub fn linkage(sc: &Scenario, e_ref_default: f64) -> Res<Linkage> {
    if sc.states.is_empty() || sc.pulses.is_empty() {
        return Err(CliError::config("CONFIG_INVALID", "dynamics needs [[states]] and [[pulses]]"));
    }
    let mut states = Vec::new();
    for (i, s) in sc.states.iter().enumerate() {
        let decay = match &s.lifetime {
            Some(l) => {
                let tau = time(&format!("states[{i}].lifetime"), l)?;
                if !(tau > 0.0) {
                    return Err(CliError::config("CONFIG_INVALID", format!("states[{i}].lifetime must be positive")));
                }
                1.0 / tau
            }
            None => 0.0,
        };
        states.push(BoundLevel { label: s.label.clone(), energy: energy(&format!("states[{i}].energy"), &s.energy)?, decay });
    }
    let labels: Vec<String> = states.iter().map(|s| s.label.clone()).collect();
    let names: Vec<String> = sc.pulses.iter().map(|p| p.name.clone()).collect();
    let mut pulses = Vec::new();
    for (i, p) in sc.pulses.iter().enumerate() {
        let f = |k: &str| format!("pulses[{i}].{k}");
        let shape = match p.shape.as_str() {
            "sin2" => PulseShape::SinSquared,
            "gaussian" => PulseShape::Gaussian,
            other => return Err(CliError::config("CONFIG_INVALID", format!("{}: unknown shape '{other}'", f("shape")))),
        };
        let intensity = Quantity::parse(&p.intensity, Dimension::Intensity).map_err(|e| CliError::config("UNIT", format!("{}: {e}", f("intensity"))))?;
        pulses.push(PulseEnvelope {
            shape,
            fwhm: time(&f("fwhm"), &p.fwhm)?,
            center: time(&f("center"), &p.center)?,
            peak_field: field_from_intensity(intensity)?.value,
            detuning: p.detuning.as_deref().map(|d| energy(&f("detuning"), d)).transpose()?.unwrap_or(0.0),
            phase: p.phase,
            polarization: p.polarization.clone(),
        });
    }
    let mut used = vec![false; pulses.len()];
    let mut couplings = Vec::new();
    for (i, c) in sc.couplings.iter().enumerate() {
        let field = format!("couplings[{i}]");
        let pulse = index_of(&names, &c.pulse, "pulse", &field)?;
        used[pulse] = true;
        let dipole = quantity(&format!("{field}.dipole"), &c.dipole, Dimension::Dimensionless)?;
        couplings.push(Coupling {
            lower: index_of(&labels, &c.lower, "state", &field)?,
            upper: index_of(&labels, &c.upper, "state", &field)?,
            dipole_fc: dipole * c.fc,
            pulse,
        });
    }
    let mut continuum_edges = Vec::new();
    for (i, c) in sc.continuum.iter().enumerate() {
        let field = format!("continuum[{i}]");
        let pulse = index_of(&names, &c.pulse, "pulse", &field)?;
        used[pulse] = true;
        let fc = quantity(&format!("{field}.fc"), &c.fc, Dimension::InverseSqrtEnergy)?;
        let dipole = quantity(&format!("{field}.dipole"), &c.dipole, Dimension::Dimensionless)?;
        let profile = match c.profile.as_str() {
            "constant" => FcProfile::Constant,
            "wigner" => {
                let e_ref = c.e_ref.as_deref().map(|e| energy(&format!("{field}.e_ref"), e)).transpose()?.unwrap_or(e_ref_default);
                FcProfile::PowerLaw { e_ref, exponent: 0.25 }
            }
            other => return Err(CliError::config("CONFIG_INVALID", format!("{field}.profile: unknown profile '{other}'"))),
        };
        continuum_edges.push(ContinuumEdge { state: index_of(&labels, &c.state, "state", &field)?, dipole_fc: dipole * fc, pulse, profile });
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(CliError::config("CONFIG_INVALID", format!("pulse '{}' drives no coupling", names[i])));
    }
    let scheme = LinkageScheme { states, couplings, continuum_edges };
    scheme.validate(pulses.len())?;
    Ok(Linkage { scheme, pulses, names })
}

fn ensemble_spec(e: &EnsembleSection) -> Res<EnsembleSpec> {
    let spec = EnsembleSpec {
        temperature: energy("ensemble.temperature", &e.temperature)?,
        density: quantity("ensemble.density", &e.density, Dimension::InverseVolume)?,
        reduced_mass: quantity("ensemble.reduced_mass", &e.reduced_mass, Dimension::Mass)?,
        pulse_duration: time("ensemble.pulse_duration", &e.pulse_duration)?,
        singlet_fraction: e.singlet_fraction,
        trap_length: quantity("ensemble.trap_length", &e.trap_length, Dimension::Length)?,
        focus_diameter: quantity("ensemble.focus_diameter", &e.focus_diameter, Dimension::Length)?,
        lattice_speed: e.lattice_speed.as_deref().map(|v| quantity("ensemble.lattice_speed", v, Dimension::Velocity)).transpose()?,
        sequence_duration: time("ensemble.sequence_duration", &e.sequence_duration)?,
        branch_fraction: e.branch_fraction,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn packet(sc: &Scenario) -> Res<ContinuumPacket> {
    let p = section(&sc.packet, "packet")?;
    let e0 = energy("packet.e0", &p.e0)?;
    let t0 = time("packet.t0", &p.t0)?;
    let delta_e = match p.mode.as_str() {
        "gaussian" => energy("packet.delta_e", p.delta_e.as_deref().unwrap_or(""))?,
        "from-ensemble" => wavepacket_params(&ensemble_spec(section(&sc.ensemble, "ensemble")?)?, e0)?.delta_e,
        other => return Err(CliError::config("CONFIG_INVALID", format!("packet.mode: unknown mode '{other}'"))),
    };
    let mut k = ContinuumPacket::gaussian(e0, delta_e, t0);
    k.e_ref = p.e_ref.as_deref().map(|e| energy("packet.e_ref", e)).transpose()?;
    Ok(k)
}

enum Method {
    Svca,
    Full(ContinuumGrid),
}

fn run_options(sc: &Scenario) -> Res<(IntegrationOptions, Method, Option<String>)> {
    let Some(r) = &sc.run else {
        return Ok((IntegrationOptions::default(), Method::Svca, None));
    };
    let t_span = match (&r.t_start, &r.t_end) {
        (Some(a), Some(b)) => Some((time("run.t_start", a)?, time("run.t_end", b)?)),
        (None, None) => None,
        _ => return Err(CliError::config("CONFIG_INVALID", "run.t_start and run.t_end go together")),
    };
    let method = match r.method.as_str() {
        "svca" => Method::Svca,
        "full" => {
            let g = r.grid.as_ref().ok_or_else(|| CliError::config("CONFIG_INVALID", "run.method = \"full\" needs [run.grid]"))?;
            Method::Full(ContinuumGrid { e_min: energy("run.grid.e_min", &g.e_min)?, e_max: energy("run.grid.e_max", &g.e_max)?, n: g.n })
        }
        other => return Err(CliError::config("CONFIG_INVALID", format!("run.method: unknown method '{other}'"))),
    };
    Ok((IntegrationOptions { t_span, samples: r.samples, rtol: r.rtol, atol: r.atol }, method, r.target.clone()))
}

fn simulate(l: &Linkage, pulses: &[PulseEnvelope], packet: &ContinuumPacket, opts: &IntegrationOptions, method: &Method) -> papsim_core::Result<SimulationResult> {
    match method {
        Method::Svca => integrate_svca(&l.scheme, pulses, packet, opts),
        Method::Full(g) => integrate_full_rwa(&l.scheme, pulses, packet, *g, opts),
    }
}

fn history_table(labels: &[String], times: &[f64], populations: &[Vec<f64>], source: &[f64]) -> Table {
    let mut header = vec!["time_au".to_string(), "time_ns".to_string()];
    header.extend(labels.iter().cloned());
    header.push("source_f0_sq".into());
    let mut t = Table::new(header);
    for (k, &tk) in times.iter().enumerate() {
        let mut row = vec![tk, to_ns(tk)];
        row.extend(populations.iter().map(|p| p[k]));
        row.push(source[k]);
        t.push_numbers(&row);
    }
    t
}

fn target_index(labels: &[String], target: Option<&str>, field: &str) -> Res<usize> {
    match target {
        Some(t) => index_of(labels, t, "state", field),
        None => Ok(labels.len() - 1),
    }
}

fn dynamics(sc: &Scenario) -> Res<Artifacts> {
    let k = packet(sc)?;
    let l = linkage(sc, k.e0)?;
    let (opts, method, target) = run_options(sc)?;
    let labels: Vec<String> = l.scheme.states.iter().map(|s| s.label.clone()).collect();
    let ti = target_index(&labels, target.as_deref(), "run.target")?;
    let r = simulate(&l, &l.pulses, &k, &opts, &method)?;
    let mut out = Artifacts::default();
    out.csv("dynamics.csv", &history_table(&r.labels, &r.times, &r.populations, &r.source));
    let finals: Map<String, Value> = r.labels.iter().zip(&r.final_populations).map(|(l, p)| (l.clone(), json!(p))).collect();
    let mut summary = json!({
        "method": match method { Method::Svca => "svca", Method::Full(_) => "full" },
        "final_populations": finals,
        "target": labels[ti],
        "target_population": r.final_populations[ti],
        "max_intermediate_population": r.diagnostics.max_intermediate,
        "steps": r.diagnostics.steps,
        "rejected_steps": r.diagnostics.rejected,
        "warnings": r.diagnostics.warnings,
    });
    if let Some(scan) = &sc.scan {
        let pi = index_of(&l.names, &scan.pulse, "pulse", "scan.pulse")?;
        let si = index_of(&labels, &scan.target, "state", "scan.target")?;
        let intensities = scan
            .intensities
            .iter()
            .enumerate()
            .map(|(i, s)| quantity(&format!("scan.intensities[{i}]"), s, Dimension::Intensity))
            .collect::<Res<Vec<_>>>()?;
        let points: Vec<(f64, f64)> = intensities
            .par_iter()
            .map(|&i| {
                let mut ps = l.pulses.clone();
                ps[pi].peak_field = i.sqrt();
                Ok((i, simulate(&l, &ps, &k, &opts, &method)?.final_populations[si]))
            })
            .collect::<papsim_core::Result<_>>()?;
        let to_lab = |i: f64| i * papsim_core::units::INTENSITY_AU_W_PER_CM2;
        let mut t = Table::new(["intensity_w_cm2", "population"]);
        for (i, p) in &points {
            t.push_numbers(&[to_lab(*i), *p]);
        }
        out.csv("scan.csv", &t);
        let peak = points.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|p| to_lab(p.0));
        let rising = points.iter().position(|p| Some(to_lab(p.0)) == peak).unwrap_or(0);
        let monotone = points[..=rising].windows(2).all(|w| w[1].1 >= w[0].1);
        summary["scan"] = json!({
            "pulse": scan.pulse,
            "target": scan.target,
            "peak_intensity_w_cm2": peak,
            "monotone_up_to_peak": monotone,
            "loglog_slope_lowest_decade": loglog_slope(&points),
        });
    }
    out.json("dynamics.json", &summary);
    Ok(out)
}

// ---------------------------------------------------------------- ensemble

fn budget_json(b: &CampaignBudget) -> Value {
    json!({
        "n_sequences": b.n_sequences,
        "removal_interval_s": b.removal_interval.map(to_seconds),
        "sequence_period_s": to_seconds(b.sequence_period),
        "wall_time_s": to_seconds(b.wall_time),
        "atoms_in_focus": b.atoms_in_focus,
        "molecules_per_sequence": b.molecules_per_sequence,
        "molecules_per_second": b.molecules_per_second,
        "per_pulse_rate": b.per_pulse_rate,
        "warnings": b.warnings,
    })
}

fn ensemble(sc: &Scenario) -> Res<Artifacts> {
    let sec = section(&sc.ensemble, "ensemble")?;
    let spec = ensemble_spec(sec)?;
    let t0 = match (&sec.t0, &sc.packet) {
        (Some(t), _) => time("ensemble.t0", t)?,
        (None, Some(p)) => time("packet.t0", &p.t0)?,
        (None, None) => return Err(CliError::config("CONFIG_INVALID", "ensemble needs ensemble.t0 or [packet].t0")),
    };
    let l = linkage(sc, spec.temperature)?;
    let (opts, method, _) = run_options(sc)?;
    let labels: Vec<String> = l.scheme.states.iter().map(|s| s.label.clone()).collect();
    let ti = target_index(&labels, sec.target.as_deref(), "ensemble.target")?;
    if ti != labels.len() - 1 {
        return Err(CliError::config("CONFIG_INVALID", "ensemble.target must be the last declared state (node doubling tracks it)"));
    }
    let quad = ThermalQuadrature { nodes: sec.nodes, guard: sec.guard, rel_tol: sec.rel_tol, max_nodes: sec.max_nodes };
    let run = ensemble_dynamics(&spec, t0, &quad, |k| simulate(&l, &l.pulses, k, &opts, &method))?;
    let y = run.final_populations[ti];
    let mut out = Artifacts::default();
    out.csv("ensemble.csv", &history_table(&run.labels, &run.times, &run.populations, &run.source));
    let mut header = vec!["energy_hartree".to_string(), "energy_uK".to_string(), "weight".to_string()];
    header.extend(run.labels.iter().cloned());
    let mut nodes = Table::new(header);
    for ((e, pops), w) in run.nodes.iter().zip(&run.weights) {
        let mut row = vec![*e, to_microkelvin(*e), *w];
        row.extend(pops);
        nodes.push_numbers(&row);
    }
    out.csv("ensemble_nodes.csv", &nodes);
    let finals: Map<String, Value> = run.labels.iter().zip(&run.final_populations).map(|(l, p)| (l.clone(), json!(p))).collect();
    let budget = campaign_budget(y, &spec, sec.molecules_per_sequence).map(|b| budget_json(&b)).unwrap_or(Value::Null);
    out.json(
        "ensemble.json",
        &json!({
            "target": labels[ti],
            "yield": y,
            "final_populations": finals,
            "nodes": run.nodes.len(),
            "last_change": run.change,
            "excluded_weight": run.excluded_weight,
            "budget": budget,
        }),
    );
    Ok(out)
}

// ---------------------------------------------------------------- rates

fn rates(sc: &Scenario) -> Res<Artifacts> {
    let r = section(&sc.rates, "rates")?;
    let spec = ensemble_spec(section(&sc.ensemble, "ensemble")?)?;
    let e = energy("rates.energy", &r.energy)?;
    let f = fraction_per_pulse(r.probability, e, &spec)?;
    let n = collisions_per_pulse(e, &spec, 0)?;
    let w = wavepacket_params(&spec, e)?;
    let mut summary = json!({
        "probability": r.probability,
        "energy_hartree": e,
        "fraction_per_pulse": f,
        "collisions_per_pulse_j0": n,
        "wavepacket": { "r_st_bohr": w.r_st, "delta_e_hartree": w.delta_e, "f0_sq_peak_au": w.f0_sq_peak },
    });
    if let Some(y) = r.per_sequence_yield {
        summary["budget"] = budget_json(&campaign_budget(y, &spec, r.molecules_per_sequence)?);
    }
    let mut out = Artifacts::default();
    out.json("rates.json", &summary);
    Ok(out)
}
