//! Atmospheric channel: deterministic link loss plus block Gamma-Gamma fading.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::{geometric_loss_db, LinkGeometry, WeatherAttenuation};
use crate::num::{db_to_linear, Real};
use crate::polarization::{CpdmField, PolarizedField};
use crate::turbulence::{gg_shape_params, rytov_variance, sample_scintillation, Scintillation, TurbulenceEnv};

/// Turbulence along the path; the path length comes from the scenario geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turbulence<T> {
    pub cn2: T,
    pub wavelength_m: T,
}

impl<T: Real> Default for Turbulence<T> {
    fn default() -> Self {
        let r = TurbulenceEnv::<T>::reference(T::one());
        Turbulence {
            cn2: r.cn2,
            wavelength_m: r.wavelength_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelScenario<T> {
    pub geometry: LinkGeometry<T>,
    pub attenuation: WeatherAttenuation<T>,
    /// `None` disables scintillation.
    pub turbulence: Option<Turbulence<T>>,
    pub implementation_loss_db: T,
    /// Samples per irradiance draw; `None` draws once per field.
    pub fading_block: Option<usize>,
}

impl<T: Real> ChannelScenario<T> {
    /// Reference geometry and turbulence under the given weather.
    pub fn reference(attenuation: WeatherAttenuation<T>, distance_km: T) -> Self {
        ChannelScenario {
            geometry: LinkGeometry::reference(distance_km),
            attenuation,
            turbulence: Some(Turbulence::default()),
            implementation_loss_db: T::zero(),
            fading_block: None,
        }
    }

    pub fn with_distance(&self, distance_km: T) -> Self {
        ChannelScenario {
            geometry: self.geometry.with_distance(distance_km),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.attenuation.validate()?;
        if let Some(env) = self.turbulence_env() {
            env.validate()?;
        }
        if !(self.implementation_loss_db >= T::zero()) || !self.implementation_loss_db.is_finite() {
            return Err(Error::invalid(format!(
                "implementation_loss_db must be finite and >= 0, got {}",
                self.implementation_loss_db
            )));
        }
        if self.fading_block == Some(0) {
            return Err(Error::invalid("fading_block must be at least 1"));
        }
        Ok(())
    }

    pub fn turbulence_env(&self) -> Option<TurbulenceEnv<T>> {
        self.turbulence.map(|t| TurbulenceEnv {
            cn2: t.cn2,
            wavelength_m: t.wavelength_m,
            distance_m: self.geometry.distance_km * T::lit(1000.0),
        })
    }

    pub fn scintillation(&self) -> Result<Scintillation<T>> {
        match self.turbulence_env() {
            None => Ok(Scintillation::None),
            Some(env) => gg_shape_params(rytov_variance(&env)?),
        }
    }

    /// `L_G − αD − implementation loss`, in dB.
    pub fn deterministic_gain_db(&self) -> Result<T> {
        self.validate()?;
        Ok(geometric_loss_db(&self.geometry)?
            - self.attenuation.loss_db(self.geometry.distance_km)
            - self.implementation_loss_db)
    }
}

/// Per-sample amplitude factors for a record of `n` samples.
fn amplitude_profile<T: Real, R: Rng + ?Sized>(n: usize, sc: &ChannelScenario<T>, rng: &mut R) -> Result<Vec<T>> {
    let base = db_to_linear(sc.deterministic_gain_db()?).sqrt();
    let scint = sc.scintillation()?;
    let block = sc.fading_block.unwrap_or(n.max(1));
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = base * sample_scintillation(&scint, rng).value().sqrt();
        let take = block.min(n - out.len());
        out.extend(std::iter::repeat_n(a, take));
    }
    Ok(out)
}

/// Applies link loss and block fading to a single-mode field.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    field: &PolarizedField<T>,
    sc: &ChannelScenario<T>,
    rng: &mut R,
) -> Result<PolarizedField<T>> {
    let amp = amplitude_profile(field.len(), sc, rng)?;
    let samples = field
        .samples()
        .iter()
        .zip(&amp)
        .map(|(s, &a)| s.scale(num_complex::Complex::new(a, T::zero())))
        .collect();
    PolarizedField::new(samples, field.sample_rate_hz())
}

/// Applies link loss and block fading to a multiplexed field. Both slots
/// see the same irradiance.
pub fn apply_channel_cpdm<T: Real, R: Rng + ?Sized>(
    field: &CpdmField<T>,
    sc: &ChannelScenario<T>,
    rng: &mut R,
) -> Result<CpdmField<T>> {
    let amp = amplitude_profile(field.len(), sc, rng)?;
    let mut out = field.clone();
    out.scale_each(|n| amp[n]);
    Ok(out)
}

/// Link budget summary for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport<T> {
    pub condition: String,
    pub distance_km: T,
    pub geometric_loss_db: T,
    /// Signed: `−αD`.
    pub attenuation_db: T,
    pub implementation_loss_db: T,
    pub rytov_variance: T,
    pub alpha: Option<T>,
    pub beta: Option<T>,
    pub scintillation_index: T,
    pub tx_power_dbm: T,
    pub expected_rx_power_dbm: T,
}

pub fn channel_report<T: Real>(sc: &ChannelScenario<T>, tx_power_dbm: T) -> Result<ChannelReport<T>> {
    sc.validate()?;
    let lg = geometric_loss_db(&sc.geometry)?;
    let att = -sc.attenuation.loss_db(sc.geometry.distance_km);
    let rytov = match sc.turbulence_env() {
        Some(env) => rytov_variance(&env)?,
        None => T::zero(),
    };
    let scint = sc.scintillation()?;
    Ok(ChannelReport {
        condition: sc.attenuation.label.clone(),
        distance_km: sc.geometry.distance_km,
        geometric_loss_db: lg,
        attenuation_db: att,
        implementation_loss_db: sc.implementation_loss_db,
        rytov_variance: rytov,
        alpha: scint.params().map(|p| p.alpha),
        beta: scint.params().map(|p| p.beta),
        scintillation_index: scint.scintillation_index(),
        tx_power_dbm,
        expected_rx_power_dbm: tx_power_dbm + lg + att - sc.implementation_loss_db,
    })
}
