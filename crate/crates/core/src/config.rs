//! Scenario files: the deployment recipe plus an optional frozen realization, in TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::montecarlo::FrozenScenario;
use crate::scenario::{
    realize, DeploymentConfig, JammerEmitter, JammerPreset, JammerScenario, SensorParams, SignalPolicy, WsnPreset,
    WsnScenario,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenWsn {
    pub n_antennas: usize,
    pub noise_power: f64,
    pub sensors: Vec<SensorParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenJammer {
    pub n_antennas: usize,
    #[serde(default)]
    pub policy: SignalPolicy,
    pub emitters: Vec<JammerEmitter>,
}

/// On-disk scenario. Derived matrices are never stored; they are rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub preset: String,
    pub jammer_preset: String,
    pub deployment: DeploymentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsn: Option<FrozenWsn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jammer: Option<FrozenJammer>,
}

impl ScenarioFile {
    pub fn from_preset(wsn: WsnPreset, jammer: JammerPreset, config: DeploymentConfig) -> Self {
        Self {
            preset: wsn.name().to_string(),
            jammer_preset: jammer.name().to_string(),
            deployment: config,
            wsn: None,
            jammer: None,
        }
    }

    /// Realize the deployment and store the result alongside the recipe.
    pub fn frozen(mut self) -> Result<Self> {
        let (wsn, jammer) = realize(&self.deployment)?;
        self.wsn = Some(FrozenWsn {
            n_antennas: wsn.n_antennas(),
            noise_power: wsn.noise_power(),
            sensors: wsn.sensors().to_vec(),
        });
        self.jammer = jammer.map(|j| FrozenJammer {
            n_antennas: j.n_antennas(),
            policy: j.policy().clone(),
            emitters: j.emitters().to_vec(),
        });
        Ok(self)
    }

    /// The frozen realization if present, otherwise a fresh one from the recipe.
    pub fn scenarios(&self) -> Result<(WsnScenario, Option<JammerScenario>)> {
        let (wsn, jammer) = match &self.wsn {
            Some(f) => (WsnScenario::new(f.sensors.clone(), f.n_antennas, f.noise_power)?, None),
            None => {
                let (w, j) = realize(&self.deployment)?;
                (w, j)
            }
        };
        let jammer = match (&self.jammer, jammer) {
            (Some(f), _) => Some(JammerScenario::new(f.emitters.clone(), f.n_antennas, f.policy.clone())?),
            (None, j) => j,
        };
        Ok((wsn, jammer))
    }

    pub fn frozen_scenario(&self) -> Result<FrozenScenario> {
        let (wsn, jammer) = self.scenarios()?;
        Ok(FrozenScenario {
            preset: self.preset.clone(),
            jammer_preset: self.jammer_preset.clone(),
            wsn,
            jammer,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FusionError::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| FusionError::Parse(e.to_string()))?;
        file.deployment.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_scenario() {
        let cfg = DeploymentConfig::preset(WsnPreset::Intermediate, JammerPreset::LosJam, 5, 4, 11);
        let file = ScenarioFile::from_preset(WsnPreset::Intermediate, JammerPreset::LosJam, cfg)
            .frozen()
            .unwrap();
        let text = file.to_toml().unwrap();
        let back = ScenarioFile::from_toml(&text).unwrap();
        assert_eq!(back, file);
        let (w0, j0) = file.scenarios().unwrap();
        let (w1, j1) = back.scenarios().unwrap();
        assert_eq!(w0.los_matrix(), w1.los_matrix());
        assert_eq!(j0.unwrap().steering(), j1.unwrap().steering());
    }

    #[test]
    fn recipe_only_file_realizes() {
        let cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::None, 3, 2, 1);
        let file = ScenarioFile::from_preset(WsnPreset::Los, JammerPreset::None, cfg);
        let (w, j) = file.scenarios().unwrap();
        assert_eq!(w.k_sensors(), 3);
        assert!(j.is_none());
        assert!(matches!(ScenarioFile::from_toml("preset = 3"), Err(FusionError::Parse(_))));
    }
}
