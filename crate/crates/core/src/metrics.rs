//! BER counting, Q/BER conversion, OSNR and EVM estimation, CSV exports.
//!
//! CSV schemas:
//!
//! - constellation: `re,im`
//! - eye: `t_frac,amplitude` with `t_frac` in `[0, 2)` symbol periods

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::polarization::PolarizedField;

/// 0.1 nm at 1550 nm.
pub const DEFAULT_OSNR_REFERENCE_BW_HZ: f64 = 12.5e9;
pub const DEFAULT_OSNR_CEILING_DB: f64 = 100.0;

/// Fraction of differing positions. Bits are compared as bytes.
pub fn count_ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.len() != rx.len() {
        return Err(Error::invalid(format!(
            "bit streams differ in length ({} vs {})",
            tx.len(),
            rx.len()
        )));
    }
    if tx.is_empty() {
        return Err(Error::invalid("cannot count BER over zero bits"));
    }
    Ok(count_errors(tx, rx) as f64 / tx.len() as f64)
}

/// Number of differing positions over the common prefix.
pub fn count_errors(tx: &[u8], rx: &[u8]) -> usize {
    tx.iter().zip(rx).filter(|(a, b)| a != b).count()
}

/// `0.5·erfc(q/√2)`.
pub fn ber_from_q<T: Real>(q_linear: T) -> Result<T> {
    if !(q_linear >= T::zero()) {
        return Err(Error::invalid(format!("Q must be non-negative, got {q_linear}")));
    }
    Ok(T::lit(0.5) * (q_linear * T::FRAC_1_SQRT_2()).erfc())
}

/// Inverse of [`ber_from_q`] on `(0, 0.5]`.
pub fn q_from_ber<T: Real>(ber: T) -> Result<T> {
    if !(ber > T::zero() && ber <= T::lit(0.5)) {
        return Err(Error::invalid(format!("BER must lie in (0, 0.5], got {ber}")));
    }
    if ber == T::lit(0.5) {
        return Ok(T::zero());
    }
    // Newton on ln(ber_from_q(q)) - ln(ber), which is well conditioned in the tail.
    let target = ber.ln();
    let sqrt_2pi = (T::TAU()).sqrt();
    let mut q = T::lit(initial_q(ber.as_f64()).max(0.0));
    for _ in 0..100 {
        let p = T::lit(0.5) * (q * T::FRAC_1_SQRT_2()).erfc();
        let density = (-(q * q) / T::lit(2.0)).exp() / sqrt_2pi;
        let step = (p.ln() - target) * p / density;
        let next = (q + step).max(q / T::lit(2.0));
        let done = (next - q).abs() <= T::epsilon() * T::lit(4.0) * next.max(T::one());
        q = next;
        if done {
            break;
        }
    }
    Ok(q)
}

fn initial_q(ber: f64) -> f64 {
    if ber > 0.1 {
        (0.5 - ber) * (2.0 * std::f64::consts::PI).sqrt()
    } else {
        let t = (-2.0 * ber.ln()).sqrt();
        t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
            / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t)
    }
}

/// OSNR in dB, possibly clamped at the ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OsnrEstimate<T> {
    pub db: T,
    /// True when the noise power was zero and `db` is the ceiling.
    pub saturated: bool,
}

/// OSNR from mean powers measured over `measurement_bw_hz`, referred to `reference_bw_hz`.
pub fn osnr_from_powers<T: Real>(
    signal_w: T,
    noise_w: T,
    measurement_bw_hz: T,
    reference_bw_hz: T,
    ceiling_db: T,
) -> Result<OsnrEstimate<T>> {
    if !(reference_bw_hz > T::zero() && measurement_bw_hz > T::zero()) {
        return Err(Error::invalid("OSNR bandwidths must be positive"));
    }
    if !(signal_w >= T::zero() && noise_w >= T::zero()) {
        return Err(Error::invalid("OSNR powers must be non-negative"));
    }
    if noise_w == T::zero() {
        return Ok(OsnrEstimate {
            db: ceiling_db,
            saturated: true,
        });
    }
    let noise_in_ref = noise_w * reference_bw_hz / measurement_bw_hz;
    Ok(OsnrEstimate {
        db: T::lit(10.0) * (signal_w / noise_in_ref).log10(),
        saturated: false,
    })
}

/// OSNR of a signal field against a noise field sampled at the same rate.
/// The noise is taken to be white over the sample rate.
pub fn estimate_osnr_db<T: Real>(
    signal: &PolarizedField<T>,
    noise: &PolarizedField<T>,
    reference_bw_hz: T,
    ceiling_db: T,
) -> Result<OsnrEstimate<T>> {
    if signal.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::invalid("signal and noise fields have different sample rates"));
    }
    osnr_from_powers(
        signal.mean_power(),
        noise.mean_power(),
        signal.sample_rate_hz(),
        reference_bw_hz,
        ceiling_db,
    )
}

/// `100·√(mean|rx − ref|² / mean|ref|²)`.
pub fn evm_pct<T: Real>(rx: &[Complex<T>], reference: &[Complex<T>]) -> Result<T> {
    if rx.len() != reference.len() {
        return Err(Error::invalid(format!(
            "EVM needs equal lengths ({} vs {})",
            rx.len(),
            reference.len()
        )));
    }
    let (err, power) = evm_sums(rx, reference);
    if power == T::zero() {
        return Err(Error::invalid("EVM reference has zero power"));
    }
    Ok(T::lit(100.0) * (err / power).sqrt())
}

/// `(Σ|rx − ref|², Σ|ref|²)`, for pooling EVM over several records.
pub fn evm_sums<T: Real>(rx: &[Complex<T>], reference: &[Complex<T>]) -> (T, T) {
    rx.iter().zip(reference).fold((T::zero(), T::zero()), |(e, p), (r, s)| {
        (e + (r - s).norm_sqr(), p + s.norm_sqr())
    })
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let write = || -> std::io::Result<()> {
        writeln!(out, "{header}")?;
        for (a, b) in rows {
            writeln!(out, "{a:e},{b:e}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Writes symbols as `re,im` rows.
pub fn export_constellation<T: Real>(symbols: &[Complex<T>], path: &Path) -> Result<()> {
    write_csv(path, "re,im", symbols.iter().map(|z| (z.re.as_f64(), z.im.as_f64())))
}

/// Eye-trace points: sample `n` goes to `t_frac = (n mod 2P) / P`.
pub fn eye_points<T: Real>(waveform: &[T], symbol_period_samples: usize) -> Result<Vec<(f64, f64)>> {
    if symbol_period_samples == 0 {
        return Err(Error::invalid("symbol period must be at least one sample"));
    }
    let p = symbol_period_samples;
    Ok(waveform
        .iter()
        .enumerate()
        .map(|(n, v)| ((n % (2 * p)) as f64 / p as f64, v.as_f64()))
        .collect())
}

/// Writes the waveform folded over two symbol periods as `t_frac,amplitude` rows.
pub fn export_eye<T: Real>(waveform: &[T], symbol_period_samples: usize, path: &Path) -> Result<()> {
    let points = eye_points(waveform, symbol_period_samples)?;
    write_csv(path, "t_frac,amplitude", points.into_iter())
}

/// Holds each value for `samples_per_symbol` samples.
pub fn nrz<T: Real>(levels: &[T], samples_per_symbol: usize) -> Vec<T> {
    levels
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, samples_per_symbol))
        .collect()
}

/// Result row for one (scenario, distance) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub condition: String,
    pub scenario_index: usize,
    pub distance_km: f64,
    pub ber: f64,
    /// Q from the measured BER; at zero errors, Q of the Monte-Carlo floor.
    pub q_linear: f64,
    /// True when `q_linear` is a lower bound because no errors were seen.
    pub q_is_bound: bool,
    pub osnr_db: f64,
    pub osnr_saturated: bool,
    pub evm_pct: f64,
    pub n_bits: u64,
    pub n_errors: u64,
    /// Standard error of the BER from the spread of per-trial BERs.
    pub ber_std_err: f64,
    /// Smallest non-zero BER resolvable with `n_bits`.
    pub ber_floor: f64,
    pub rx_power_dbm: f64,
    pub expected_rx_power_dbm: f64,
    pub seed: u64,
}

impl MetricsRecord {
    /// Q for a measured BER, reporting the floor as a bound when no errors occurred.
    pub fn q_for(ber: f64, floor: f64) -> (f64, bool) {
        if ber <= 0.0 {
            (q_from_ber(floor.min(0.5)).unwrap_or(0.0), true)
        } else {
            (q_from_ber(ber.min(0.5)).unwrap_or(0.0), false)
        }
    }
}
