use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tf_outer::geometry::GeometryParams;
use tf_outer::harness::{Embedding, EnsembleConfig, GridConfig, InterpParams};
use tf_outer::outer::{CoverParams, Ladder};
use tf_outer::wavepackets::PacketQuadrature;

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavepacketConfig {
    pub c_minus: f64,
    pub c_plus: f64,
    pub margin: f64,
    pub quadrature: PacketQuadrature,
}

impl Default for WavepacketConfig {
    fn default() -> Self {
        Self { c_minus: 0.0, c_plus: 5.0, margin: 0.5, quadrature: PacketQuadrature::default() }
    }
}

/// Truncation ladder of the `operator var-truncation` pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorConfig {
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_scales: usize,
    pub sigma: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { t_lo: 0.25, t_hi: 8.0, n_scales: 10, sigma: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryParams,
    pub grid: GridConfig,
    pub ensemble: EnsembleConfig,
    /// Experiment studied by `sweep`.
    pub experiment: String,
    pub output_dir: Option<String>,
    /// Refinement levels `0..levels`.
    pub levels: usize,
    pub ladder: Ladder,
    pub cover: CoverParams,
    /// Default `λ` of `cover` as a fraction of the maximum of `M⁺_R`.
    pub cover_fraction: f64,
    pub interp: InterpParams,
    /// Embedding of `verify bounds`.
    pub embedding: Embedding,
    /// Allow `verify bounds` outside the stated exponent range.
    pub explore: bool,
    pub wavepackets: WavepacketConfig,
    pub operator: OperatorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryParams::default(),
            grid: GridConfig::default(),
            ensemble: EnsembleConfig::default(),
            experiment: "holder".into(),
            output_dir: None,
            levels: 1,
            ladder: Ladder::default(),
            cover: CoverParams { r: 2.0, q: 3.0, r0: None },
            cover_fraction: 0.5,
            interp: InterpParams::default(),
            embedding: Embedding::Energy,
            explore: false,
            wavepackets: WavepacketConfig::default(),
            operator: OperatorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.geometry.validate().map_err(|e| format!("geometry: {e}"))?;
        self.grid.validate().map_err(|e| format!("grid: {e}"))?;
        self.ensemble.validate().map_err(|e| format!("ensemble: {e}"))?;
        self.ladder.validate().map_err(|e| format!("ladder: {e}"))?;
        if self.levels == 0 {
            return Err("levels: must be at least 1".into());
        }
        if !(self.cover_fraction > 0.0 && self.cover_fraction <= 1.0) {
            return Err(format!("cover_fraction: must lie in (0, 1], got {}", self.cover_fraction));
        }
        Ok(())
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Set `key.path=value` inside a JSON tree; the path must already exist.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| format!("override `{assignment}` is not of the form key.path=value"))?;
    let mut node = tree;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| format!("unknown key path `{path}`"))?;
    }
    *node = parse_value(raw);
    Ok(())
}

/// Read a config (bundled default when `path` is `None`), apply overrides, validate.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, String> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let parsed: RunConfig = serde_json::from_str(&text).map_err(|e| format!("config: {e}"))?;
    let mut tree = serde_json::to_value(&parsed).map_err(|e| e.to_string())?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let cfg: RunConfig = serde_json::from_value(tree).map_err(|e| format!("config after overrides: {e}"))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_is_the_default() {
        let cfg: RunConfig = serde_json::from_str(DEFAULT_CONFIG).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let cfg = load(None, &["ensemble.size=3".into(), "grid.tent_thetas.1=1.25".into(), "experiment=rn".into()]).unwrap();
        assert_eq!(cfg.ensemble.size, 3);
        assert_eq!(cfg.grid.tent_thetas[1], 1.25);
        assert_eq!(cfg.experiment, "rn");
        assert!(load(None, &["ensemble.nope=1".into()]).unwrap_err().contains("ensemble.nope"));
        assert!(load(None, &["levels".into()]).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
