//! Deterministic FSO link budget: geometric beam-spreading loss, weather
//! attenuation, received power, and Shannon capacity.
//!
//! Units follow the usual FSO datasheet convention: apertures in meters,
//! divergence in milliradians and distance in kilometers, so that the
//! product `divergence_mrad * distance_km` is the beam growth in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{db_to_linear, dbm_to_watts, watts_to_dbm, Real};

/// Transmit/receive telescope geometry and link length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGeometry<T> {
    /// Transmit aperture diameter (m).
    pub tx_aperture_m: T,
    /// Receive aperture diameter (m).
    pub rx_aperture_m: T,
    /// Full beam divergence (mrad).
    pub divergence_mrad: T,
    /// Link length (km).
    pub distance_km: T,
}

impl<T: Real> LinkGeometry<T> {
    pub fn new(tx_aperture_m: T, rx_aperture_m: T, divergence_mrad: T, distance_km: T) -> Result<Self> {
        let g = LinkGeometry {
            tx_aperture_m,
            rx_aperture_m,
            divergence_mrad,
            distance_km,
        };
        g.validate()?;
        Ok(g)
    }

    /// 7.5 cm / 20 cm apertures with 2 mrad divergence.
    pub fn reference(distance_km: T) -> Self {
        LinkGeometry {
            tx_aperture_m: T::lit(0.075),
            rx_aperture_m: T::lit(0.2),
            divergence_mrad: T::lit(2.0),
            distance_km,
        }
    }

    pub fn with_distance(self, distance_km: T) -> Self {
        LinkGeometry { distance_km, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tx_aperture_m", self.tx_aperture_m),
            ("rx_aperture_m", self.rx_aperture_m),
            ("divergence_mrad", self.divergence_mrad),
            ("distance_km", self.distance_km),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Beam diameter at the receiver plane (m).
    pub fn beam_diameter_m(&self) -> T {
        self.tx_aperture_m + self.divergence_mrad * self.distance_km
    }
}

/// Weather-dependent specific attenuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherAttenuation<T> {
    pub label: String,
    pub alpha_db_per_km: T,
}

impl<T: Real> WeatherAttenuation<T> {
    pub fn new(label: impl Into<String>, alpha_db_per_km: T) -> Result<Self> {
        let w = WeatherAttenuation {
            label: label.into(),
            alpha_db_per_km,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km >= T::zero()) {
            return Err(Error::invalid(format!(
                "attenuation `{}` must be finite and >= 0 dB/km, got {}",
                self.label, self.alpha_db_per_km
            )));
        }
        Ok(())
    }

    /// Measured coefficients for the four reference weather conditions,
    /// best to worst.
    pub fn reference_conditions() -> Vec<Self> {
        [
            ("light rain", 2.97),
            ("moderate rain", 6.55),
            ("light fog", 12.47),
            ("heavy rain", 23.12),
        ]
        .into_iter()
        .map(|(label, a)| WeatherAttenuation {
            label: label.to_string(),
            alpha_db_per_km: T::lit(a),
        })
        .collect()
    }

    /// Total attenuation over `distance_km`, as a positive dB figure.
    pub fn loss_db(&self, distance_km: T) -> T {
        self.alpha_db_per_km * distance_km
    }
}

/// Polarization multiplexing factor `m` of the capacity formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationFactor {
    Single = 1,
    Pdm = 2,
    Cpdm = 4,
}

impl PolarizationFactor {
    pub fn from_count(m: u32) -> Result<Self> {
        match m {
            1 => Ok(Self::Single),
            2 => Ok(Self::Pdm),
            4 => Ok(Self::Cpdm),
            _ => Err(Error::invalid(format!(
                "polarization factor must be 1, 2 or 4, got {m}"
            ))),
        }
    }

    pub fn count(self) -> u32 {
        self as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityQuery<T> {
    pub polarization: PolarizationFactor,
    pub bandwidth_hz: T,
    pub snr_linear: T,
}

/// Geometric (beam spreading) loss in dB; non-positive whenever the beam
/// is at least as wide as the receive aperture.
pub fn geometric_loss_db<T: Real>(geom: &LinkGeometry<T>) -> Result<T> {
    geom.validate()?;
    Ok(T::lit(20.0) * (geom.rx_aperture_m / geom.beam_diameter_m()).log10())
}

/// Received power in dBm: transmit power plus geometric loss minus
/// weather attenuation.
pub fn received_power_dbm<T: Real>(
    tx_power_dbm: T,
    geom: &LinkGeometry<T>,
    atten: &WeatherAttenuation<T>,
) -> Result<T> {
    atten.validate()?;
    if !tx_power_dbm.is_finite() {
        return Err(Error::invalid("transmit power must be finite"));
    }
    Ok(tx_power_dbm + geometric_loss_db(geom)? - atten.loss_db(geom.distance_km))
}

/// Linear-domain evaluation of the link equation, in watts.
///
/// Underflows to zero at very heavy attenuation; [`received_power_dbm`]
/// is the canonical path.
pub fn received_power_watts<T: Real>(
    tx_power_w: T,
    geom: &LinkGeometry<T>,
    atten: &WeatherAttenuation<T>,
) -> Result<T> {
    geom.validate()?;
    atten.validate()?;
    let spread = geom.rx_aperture_m / geom.beam_diameter_m();
    Ok(tx_power_w * spread * spread * db_to_linear(-atten.loss_db(geom.distance_km)))
}

/// Received power from the linear path, converted to dBm.
pub fn received_power_dbm_linear<T: Real>(
    tx_power_dbm: T,
    geom: &LinkGeometry<T>,
    atten: &WeatherAttenuation<T>,
) -> Result<T> {
    Ok(watts_to_dbm(received_power_watts(
        dbm_to_watts(tx_power_dbm),
        geom,
        atten,
    )?))
}

/// Shannon capacity `m B log2(1 + SNR)` in bit/s.
pub fn shannon_capacity_bps<T: Real>(q: &CapacityQuery<T>) -> Result<T> {
    if !(q.bandwidth_hz.is_finite() && q.bandwidth_hz >= T::zero()) {
        return Err(Error::invalid("bandwidth must be finite and >= 0"));
    }
    Ok(q.bandwidth_hz * spectral_efficiency_bps_hz(q.polarization, q.snr_linear)?)
}

/// Spectral efficiency `m log2(1 + SNR)` in bit/s/Hz.
pub fn spectral_efficiency_bps_hz<T: Real>(m: PolarizationFactor, snr_linear: T) -> Result<T> {
    if !(snr_linear >= T::zero()) {
        return Err(Error::invalid(format!("SNR must be >= 0, got {snr_linear}")));
    }
    Ok(T::lit(m.count() as f64) * snr_linear.ln_1p() / T::LN_2())
}
