//! JSON pipeline configuration. Every block is optional and unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shadowtrack_core::decompose::DecomposeParams;
use shadowtrack_core::detect::BlobParams;
use shadowtrack_core::interp::GsiParams;
use shadowtrack_core::metrics::EvalParams;
use shadowtrack_core::simulate::SceneConfig;
use shadowtrack_core::track::kalman::{MeasurementCov, StateCov};
use shadowtrack_core::track::{AssocConfig, KalmanModel, NoiseModel};

use crate::error::{CliError, Result};

/// Serializable form of the Kalman noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseConfig {
    /// Standard deviations as fractions of the box height.
    HeightScaled { position: f64, velocity: f64 },
    /// Diagonal `Q` (8 variances) and `R` (4 variances).
    FixedDiagonal { q: [f64; 8], r: [f64; 4] },
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::HeightScaled { position: 1.0 / 20.0, velocity: 1.0 / 160.0 }
    }
}

impl NoiseConfig {
    pub fn model(&self) -> KalmanModel {
        let noise = match self {
            NoiseConfig::HeightScaled { position, velocity } => NoiseModel::HeightScaled { position: *position, velocity: *velocity },
            NoiseConfig::FixedDiagonal { q, r } => NoiseModel::Fixed {
                q: StateCov::from_diagonal(&(*q).into()),
                r: MeasurementCov::from_diagonal(&(*r).into()),
            },
        };
        KalmanModel::constant_velocity(noise)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Switches {
    /// Decompose and enhance before detection; otherwise detect on raw frames.
    pub mtsd_on: bool,
    /// Second association phase and confidence-weighted updates.
    pub recall_on: bool,
    /// Gaussian-process smoothing of the output trajectories.
    pub gsi_on: bool,
}

impl Default for Switches {
    fn default() -> Self {
        Switches { mtsd_on: true, recall_on: true, gsi_on: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub frames: Option<PathBuf>,
    pub detections_in: Option<PathBuf>,
    pub detections_out: Option<PathBuf>,
    pub tracks_out: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub render_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scene: SceneConfig,
    pub decompose: DecomposeParams,
    pub blob: BlobParams,
    pub assoc: AssocConfig,
    pub kalman: NoiseConfig,
    pub gsi: GsiParams,
    pub eval: EvalParams,
    pub switches: Switches,
    pub paths: Paths,
}

impl PipelineConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::format(path, Some(format!("line {}", e.line())), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// Association settings after applying `recall_on`.
    pub fn effective_assoc(&self) -> AssocConfig {
        let mut a = self.assoc.clone();
        if !self.switches.recall_on {
            a.recall = false;
            a.confidence_gain = false;
        }
        a
    }

    pub fn validate(&self) -> Result<()> {
        self.blob.validate()?;
        self.effective_assoc().validate()?;
        self.kalman.model().validate()?;
        self.gsi.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        let c = PipelineConfig::from_json("{}", Path::new("c.json")).unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert!(c.switches.mtsd_on && c.switches.recall_on && c.switches.gsi_on);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        for text in [r#"{"blob": {"treshold_mode": "otsu"}}"#, r#"{"switchs": {}}"#, r#"{"kalman": {"kind": "height-scaled", "position": 0.1, "velocity": 0.1, "x": 1}}"#] {
            assert!(PipelineConfig::from_json(text, Path::new("c.json")).is_err(), "{text}");
        }
    }

    #[test]
    fn blocks_parse() {
        let text = r#"{
            "decompose": {"window": 20, "polarity": "bright-shadows"},
            "blob": {"threshold_mode": "mean_k_sigma", "connectivity": 4},
            "assoc": {"tau_high": 0.7, "lost_in_phase1": false},
            "kalman": {"kind": "fixed-diagonal", "q": [1,1,1,1,0.1,0.1,0.1,0.1], "r": [2,2,2,2]},
            "gsi": {"fill_only": true},
            "switches": {"recall_on": false},
            "scene": {"targets": [{"kind": "linear", "start": [10, 10], "velocity": [1, 0]}]},
            "paths": {"frames": "a.vsr"}
        }"#;
        let c = PipelineConfig::from_json(text, Path::new("c.json")).unwrap();
        assert_eq!(c.decompose.window, Some(20));
        assert_eq!(c.assoc.tau_high, 0.7);
        assert!(!c.effective_assoc().recall && !c.effective_assoc().confidence_gain);
        assert!(c.switches.mtsd_on);
        assert_eq!(c.scene.targets.len(), 1);
        c.validate().unwrap();
        let bad = PipelineConfig::from_json(r#"{"blob": {"connectivity": 6}}"#, Path::new("c.json"));
        assert!(bad.is_err());
    }
}
