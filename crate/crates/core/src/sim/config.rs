//! Run configuration (TOML).
//!
//! Every key is optional except inside `[[scenarios]]` entries, where
//! `label` and `alpha_db_per_km` are required. Unknown keys are rejected.
//!
//! ```toml
//! master_seed = 2024
//! trials = 100
//! bits_per_trial = 32000
//! distances_km = [1.0, 2.0, 3.0, 4.0, 5.0]
//! output_dir = "results"
//! format = "csv"            # or "json"
//!
//! [system]
//! amplifier_gain_db = 15.0
//! lo_phase = "shared"       # or "independent"
//!
//! [system.receiver]
//! noise = true
//!
//! [metrics]
//! osnr_reference_bw_hz = 12.5e9
//!
//! [[scenarios]]
//! label = "light rain"
//! alpha_db_per_km = 2.97
//! turbulence = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelScenario, Turbulence};
use crate::error::{Error, Result};
use crate::linkbudget::{LinkGeometry, WeatherAttenuation};
use crate::metrics::{DEFAULT_OSNR_CEILING_DB, DEFAULT_OSNR_REFERENCE_BW_HZ};
use crate::phy::SystemConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub osnr_reference_bw_hz: f64,
    pub osnr_ceiling_db: f64,
    /// BER used for the receiver sensitivity and link margin.
    pub target_ber: f64,
    /// Maximum constellation points exported per cell.
    pub constellation_points: usize,
    /// Symbols drawn into each eye trace.
    pub eye_symbols: usize,
    pub eye_samples_per_symbol: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            osnr_reference_bw_hz: DEFAULT_OSNR_REFERENCE_BW_HZ,
            osnr_ceiling_db: DEFAULT_OSNR_CEILING_DB,
            target_ber: 1e-3,
            constellation_points: 2000,
            eye_symbols: 200,
            eye_samples_per_symbol: 16,
        }
    }
}

fn default_tx_aperture() -> f64 {
    LinkGeometry::<f64>::reference(1.0).tx_aperture_m
}
fn default_rx_aperture() -> f64 {
    LinkGeometry::<f64>::reference(1.0).rx_aperture_m
}
fn default_divergence() -> f64 {
    LinkGeometry::<f64>::reference(1.0).divergence_mrad
}
fn default_cn2() -> f64 {
    Turbulence::<f64>::default().cn2
}
fn default_wavelength() -> f64 {
    Turbulence::<f64>::default().wavelength_m
}
fn yes() -> bool {
    true
}

/// One weather condition; the sweep supplies the distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub label: String,
    pub alpha_db_per_km: f64,
    #[serde(default = "default_tx_aperture")]
    pub tx_aperture_m: f64,
    #[serde(default = "default_rx_aperture")]
    pub rx_aperture_m: f64,
    #[serde(default = "default_divergence")]
    pub divergence_mrad: f64,
    #[serde(default = "yes")]
    pub turbulence: bool,
    #[serde(default = "default_cn2")]
    pub cn2: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_m: f64,
    #[serde(default)]
    pub implementation_loss_db: f64,
    /// Samples per irradiance draw; omitted means one draw per frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fading_block: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_weather(w: &WeatherAttenuation<f64>) -> Self {
        ScenarioConfig {
            label: w.label.clone(),
            alpha_db_per_km: w.alpha_db_per_km,
            tx_aperture_m: default_tx_aperture(),
            rx_aperture_m: default_rx_aperture(),
            divergence_mrad: default_divergence(),
            turbulence: true,
            cn2: default_cn2(),
            wavelength_m: default_wavelength(),
            implementation_loss_db: 0.0,
            fading_block: None,
        }
    }

    pub fn channel(&self, distance_km: f64) -> Result<ChannelScenario<f64>> {
        let sc = ChannelScenario {
            geometry: LinkGeometry::new(
                self.tx_aperture_m,
                self.rx_aperture_m,
                self.divergence_mrad,
                distance_km,
            )?,
            attenuation: WeatherAttenuation::new(self.label.clone(), self.alpha_db_per_km)?,
            turbulence: self.turbulence.then_some(Turbulence {
                cn2: self.cn2,
                wavelength_m: self.wavelength_m,
            }),
            implementation_loss_db: self.implementation_loss_db,
            fading_block: self.fading_block,
        };
        sc.validate()?;
        Ok(sc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub master_seed: u64,
    pub trials: usize,
    pub bits_per_trial: usize,
    pub distances_km: Vec<f64>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub system: SystemConfig<f64>,
    pub metrics: MetricsConfig,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Default for RunConfig {
    /// Reference system, the four weather conditions, 1 to 5 km.
    fn default() -> Self {
        let master_seed = 2024;
        RunConfig {
            master_seed,
            trials: 100,
            bits_per_trial: 4 * 160 * 50,
            distances_km: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            output_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
            system: SystemConfig {
                seed: master_seed,
                ..SystemConfig::default()
            },
            metrics: MetricsConfig::default(),
            scenarios: WeatherAttenuation::reference_conditions()
                .iter()
                .map(ScenarioConfig::from_weather)
                .collect(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigFile(msg));
        if self.trials == 0 {
            return bad("trials: must be at least 1".into());
        }
        if self.bits_per_trial == 0 {
            return bad("bits_per_trial: must be at least 1".into());
        }
        if self.distances_km.is_empty() {
            return bad("distances_km: at least one distance is required".into());
        }
        for (i, d) in self.distances_km.iter().enumerate() {
            if !(d.is_finite() && *d > 0.0) {
                return bad(format!("distances_km[{i}]: must be positive, got {d}"));
            }
        }
        if self.scenarios.is_empty() {
            return bad("scenarios: at least one scenario is required".into());
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.label.trim().is_empty() {
                return bad(format!("scenarios[{i}].label: must not be empty"));
            }
            if let Err(e) = s.channel(self.distances_km[0]) {
                return bad(format!("scenarios[{i}] ({}): {e}", s.label));
            }
        }
        if let Err(e) = self.system.validate() {
            return bad(format!("system: {e}"));
        }
        let m = &self.metrics;
        if !(m.osnr_reference_bw_hz > 0.0 && m.osnr_reference_bw_hz.is_finite()) {
            return bad("metrics.osnr_reference_bw_hz: must be positive".into());
        }
        if !m.osnr_ceiling_db.is_finite() {
            return bad("metrics.osnr_ceiling_db: must be finite".into());
        }
        if !(m.target_ber > 0.0 && m.target_ber < 0.5) {
            return bad("metrics.target_ber: must lie in (0, 0.5)".into());
        }
        if m.eye_samples_per_symbol == 0 {
            return bad("metrics.eye_samples_per_symbol: must be at least 1".into());
        }
        Ok(())
    }

    /// Smallest non-zero BER a cell can report.
    pub fn ber_floor(&self) -> f64 {
        1.0 / (self.trials as f64 * self.bits_per_trial as f64)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::ConfigFile(e.to_string()))
    }
}

/// Parses and validates configuration text. The system seed follows `master_seed`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigFile(e.to_string()))?;
    cfg.system.seed = cfg.master_seed;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigFile(msg) => Error::ConfigFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}
