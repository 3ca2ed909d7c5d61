use super::config::SweepConfig;
use crate::error::{Error, Result};

/// Figure presets shipped in `presets/`, embedded at build time.
pub const PRESETS: [(&str, &str); 24] = [
    ("fig1", include_str!("../../../../presets/fig1.json")),
    ("fig2", include_str!("../../../../presets/fig2.json")),
    ("fig3", include_str!("../../../../presets/fig3.json")),
    ("fig4", include_str!("../../../../presets/fig4.json")),
    ("fig5", include_str!("../../../../presets/fig5.json")),
    ("fig6", include_str!("../../../../presets/fig6.json")),
    ("fig7", include_str!("../../../../presets/fig7.json")),
    ("fig8", include_str!("../../../../presets/fig8.json")),
    ("fig9", include_str!("../../../../presets/fig9.json")),
    ("fig10", include_str!("../../../../presets/fig10.json")),
    ("fig11", include_str!("../../../../presets/fig11.json")),
    ("fig12", include_str!("../../../../presets/fig12.json")),
    ("fig13", include_str!("../../../../presets/fig13.json")),
    ("fig14", include_str!("../../../../presets/fig14.json")),
    ("fig15", include_str!("../../../../presets/fig15.json")),
    ("fig16", include_str!("../../../../presets/fig16.json")),
    ("fig17", include_str!("../../../../presets/fig17.json")),
    ("fig18", include_str!("../../../../presets/fig18.json")),
    ("fig19", include_str!("../../../../presets/fig19.json")),
    ("fig20", include_str!("../../../../presets/fig20.json")),
    ("fig21", include_str!("../../../../presets/fig21.json")),
    ("fig22", include_str!("../../../../presets/fig22.json")),
    ("fig23", include_str!("../../../../presets/fig23.json")),
    ("fig24", include_str!("../../../../presets/fig24.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset(name: &str) -> Result<SweepConfig> {
    let text = PRESETS
        .iter()
        .find(|p| p.0.eq_ignore_ascii_case(name))
        .map(|p| p.1)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset {name:?}; valid presets: {}",
                preset_names().collect::<Vec<_>>().join(", ")
            ))
        })?;
    SweepConfig::from_json(text)
}
