use std::path::{Path, PathBuf};

use linepuzzle_core::compat::MatchParams;
use linepuzzle_core::eval::EvalOptions;
use linepuzzle_core::geometry::GeometryConfig;
use linepuzzle_core::pipeline::PipelineConfig;
use linepuzzle_core::puzzle::{IrregularParams, PatternKind};
use linepuzzle_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Names the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "LINEPUZZLE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    Square,
    Polygonal,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSettings {
    pub width: f64,
    pub height: f64,
    pub lines: usize,
    pub categories: u32,
    pub cut: CutKind,
    pub rows: u32,
    pub cols: u32,
    pub pattern: PatternKind,
    pub seed: u64,
    pub rotations: u32,
    pub irregular: IrregularParams,
}

impl Default for GenerateSettings {
    fn default() -> Self {
        GenerateSettings {
            width: 400.0,
            height: 400.0,
            lines: 50,
            categories: 1,
            cut: CutKind::Square,
            rows: 3,
            cols: 3,
            pattern: PatternKind::Brick,
            seed: 0,
            rotations: 4,
            irregular: IrregularParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSettings {
    /// Overrides the rotation set stored in the descriptor.
    pub rotations: Option<u32>,
    /// Anchor piece id; chosen from the line counts when unset.
    pub anchor: Option<u32>,
}

/// Every tunable of every command. Config files hold any subset of it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub generate: GenerateSettings,
    pub solve: SolveSettings,
    pub geometry: GeometryConfig,
    pub matching: MatchParams,
    pub solver: SolverConfig,
    pub evaluate: EvalOptions,
}

impl Settings {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            geometry: self.geometry,
            matching: self.matching,
            solver: self.solver,
            anchor: self.solve.anchor,
        }
    }

    /// Defaults overlaid with the file from `--config` or the environment.
    pub fn load(explicit: Option<&Path>) -> Result<(Settings, Option<PathBuf>), CliError> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        };
        let Some(path) = path else {
            return Ok((Settings::default(), None));
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        let settings = parsed.map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
        Ok((settings, Some(path)))
    }
}
