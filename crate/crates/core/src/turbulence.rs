//! Gamma-Gamma scintillation.
//!
//! Turbulence strength enters through the plane-wave Rytov variance
//! `1.23 Cn² k^(7/6) L^(11/6)`. The large- and small-scale eddy shape
//! parameters follow from it in closed form, and the normalized irradiance
//! is the product of two independent unit-mean Gamma variates with those
//! shapes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::special::ln_bessel_k;

/// Path-integrated turbulence inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceEnv<T> {
    /// Refractive-index structure parameter, m^(-2/3).
    pub cn2: T,
    pub wavelength_m: T,
    pub distance_m: T,
}

impl<T: Real> TurbulenceEnv<T> {
    /// Moderate turbulence at 1550 nm (Cn² = 1.7e-14 m^(-2/3)).
    pub fn reference(distance_m: T) -> Self {
        TurbulenceEnv {
            cn2: T::lit(1.7e-14),
            wavelength_m: T::lit(1550e-9),
            distance_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cn2.is_finite() && self.cn2 >= T::zero()) {
            return Err(Error::invalid(format!("Cn2 must be finite and >= 0, got {}", self.cn2)));
        }
        if !(self.wavelength_m.is_finite() && self.wavelength_m > T::zero()) {
            return Err(Error::invalid(format!(
                "wavelength must be finite and > 0, got {}",
                self.wavelength_m
            )));
        }
        if !(self.distance_m.is_finite() && self.distance_m > T::zero()) {
            return Err(Error::invalid(format!(
                "distance must be finite and > 0, got {}",
                self.distance_m
            )));
        }
        Ok(())
    }
}

/// Rytov variance and the resulting Gamma-Gamma shape parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GgParams<T> {
    pub rytov_var: T,
    /// Large-scale eddy shape.
    pub alpha: T,
    /// Small-scale eddy shape.
    pub beta: T,
}

impl<T: Real> GgParams<T> {
    /// Builds parameters directly from the shapes (rytov_var is left at 0).
    pub fn from_shapes(alpha: T, beta: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha > T::zero() && beta.is_finite() && beta > T::zero()) {
            return Err(Error::invalid(format!(
                "Gamma-Gamma shapes must be finite and > 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(GgParams {
            rytov_var: T::zero(),
            alpha,
            beta,
        })
    }

    /// `E[I^2] - 1 = 1/alpha + 1/beta + 1/(alpha beta)`.
    pub fn scintillation_index(&self) -> T {
        T::one() / self.alpha + T::one() / self.beta + T::one() / (self.alpha * self.beta)
    }
}

/// Irradiance fading law: either no turbulence at all or Gamma-Gamma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scintillation<T> {
    /// Rytov variance zero: irradiance is identically one.
    None,
    GammaGamma(GgParams<T>),
}

impl<T: Real> Scintillation<T> {
    pub fn scintillation_index(&self) -> T {
        match self {
            Scintillation::None => T::zero(),
            Scintillation::GammaGamma(p) => p.scintillation_index(),
        }
    }

    pub fn params(&self) -> Option<&GgParams<T>> {
        match self {
            Scintillation::None => None,
            Scintillation::GammaGamma(p) => Some(p),
        }
    }
}

/// Normalized (unit-mean) received irradiance.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Irradiance<T>(T);

impl<T: Real> Irradiance<T> {
    pub fn new(value: T) -> Result<Self> {
        if !(value.is_finite() && value > T::zero()) {
            return Err(Error::invalid(format!(
                "irradiance must be finite and > 0, got {value}"
            )));
        }
        Ok(Irradiance(value))
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Plane-wave Rytov variance.
pub fn rytov_variance<T: Real>(env: &TurbulenceEnv<T>) -> Result<T> {
    env.validate()?;
    let k = T::TAU() / env.wavelength_m;
    Ok(T::lit(1.23) * env.cn2 * k.powf(T::lit(7.0) / T::lit(6.0)) * env.distance_m.powf(T::lit(11.0) / T::lit(6.0)))
}

/// Shape parameters for a given Rytov variance.
///
/// Both diverge as the variance goes to zero; a zero variance returns
/// [`Scintillation::None`].
pub fn gg_shape_params<T: Real>(rytov_var: T) -> Result<Scintillation<T>> {
    if !(rytov_var.is_finite() && rytov_var >= T::zero()) {
        return Err(Error::invalid(format!(
            "Rytov variance must be finite and >= 0, got {rytov_var}"
        )));
    }
    if rytov_var == T::zero() {
        return Ok(Scintillation::None);
    }
    let s = rytov_var;
    // delta^(12/5) = (delta^2)^(6/5)
    let s125 = s.powf(T::lit(6.0) / T::lit(5.0));
    let large = T::lit(0.49) * s / (T::one() + T::lit(1.11) * s125).powf(T::lit(7.0) / T::lit(6.0));
    let small = T::lit(0.51) * s / (T::one() + T::lit(0.69) * s125).powf(T::lit(5.0) / T::lit(6.0));
    let alpha = T::one() / large.exp_m1();
    let beta = T::one() / small.exp_m1();
    if !(alpha.is_finite() && beta.is_finite()) {
        return Ok(Scintillation::None);
    }
    Ok(Scintillation::GammaGamma(GgParams { rytov_var, alpha, beta }))
}

/// Log of the Gamma-Gamma density.
pub fn gg_ln_pdf<T: Real>(i: T, p: &GgParams<T>) -> Result<T> {
    if !(i.is_finite() && i > T::zero()) {
        return Err(Error::invalid(format!("irradiance must be > 0, got {i}")));
    }
    let (a, b) = (p.alpha, p.beta);
    let half_sum = (a + b) / T::lit(2.0);
    let ab = a * b;
    Ok(T::LN_2() + half_sum * ab.ln() - a.ln_gamma() - b.ln_gamma()
        + (half_sum - T::one()) * i.ln()
        + ln_bessel_k(a - b, T::lit(2.0) * (ab * i).sqrt())?)
}

/// Gamma-Gamma probability density of the normalized irradiance.
pub fn gg_pdf<T: Real>(i: Irradiance<T>, p: &GgParams<T>) -> Result<T> {
    Ok(gg_ln_pdf(i.value(), p)?.exp())
}

/// Draws one irradiance as the product of unit-mean Gamma(alpha) and Gamma(beta) variates.
pub fn sample_irradiance<T: Real, R: Rng + ?Sized>(p: &GgParams<T>, rng: &mut R) -> Irradiance<T> {
    let x = T::sample_gamma(p.alpha, T::one() / p.alpha, rng);
    let y = T::sample_gamma(p.beta, T::one() / p.beta, rng);
    // A zero draw is possible only through f64 underflow at tiny shapes.
    Irradiance((x * y).max(T::min_positive_value()))
}

/// Draws one irradiance under either fading law.
pub fn sample_scintillation<T: Real, R: Rng + ?Sized>(s: &Scintillation<T>, rng: &mut R) -> Irradiance<T> {
    match s {
        Scintillation::None => Irradiance(T::one()),
        Scintillation::GammaGamma(p) => sample_irradiance(p, rng),
    }
}
