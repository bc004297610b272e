use std::sync::OnceLock;

use crate::shading::LightingParams;

pub const LIGHTING_BANK_SIZE: usize = 16;

const BANK_JSON: &str = include_str!("../../data/lighting_bank.json");

/// Fixed set of plausible SH lighting vectors (flattened `[k * 3 + channel]`):
/// an ambient term, one broad directional term from the upper front, and weak
/// band-2 detail, with slightly warm tints.
pub fn lighting_bank() -> &'static [LightingParams<f64>] {
    static BANK: OnceLock<Vec<LightingParams<f64>>> = OnceLock::new();
    BANK.get_or_init(|| {
        let raw: Vec<Vec<f64>> = serde_json::from_str(BANK_JSON).expect("bundled lighting bank is valid JSON");
        raw.iter()
            .map(|v| LightingParams::from_flat(v).expect("bundled lighting vectors have 27 entries"))
            .collect()
    })
}
