//! Scenarios shipped with the binary.

pub const NAMES: [&str; 6] = ["fig3_scan", "fig5_coherent", "fig6_ensemble", "fig7_branching", "fig8_intensity_scan", "rates_paper"];

pub fn get(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3_scan" => include_str!("../presets/fig3_scan.toml"),
        "fig5_coherent" => include_str!("../presets/fig5_coherent.toml"),
        "fig6_ensemble" => include_str!("../presets/fig6_ensemble.toml"),
        "fig7_branching" => include_str!("../presets/fig7_branching.toml"),
        "fig8_intensity_scan" => include_str!("../presets/fig8_intensity_scan.toml"),
        "rates_paper" => include_str!("../presets/rates_paper.toml"),
        _ => return None,
    })
}
