//! Optical transmit and receive building blocks.
//!
//! Fields are complex envelopes in √W. The optical carrier frequency only
//! enters the homodyne check and the ASE photon energy.

mod chain;

use num_complex::Complex;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{complex_gaussian, db_to_linear, dbm_to_watts, Real};
use crate::ofdm::OfdmConfig;
use crate::polarization::{CpdmField, JonesVector, PolarizedField};

pub use chain::{link_margin_db, receive, sensitivity_dbm, transmit, Reception, Transceiver, Transmission};

/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct LaserConfig<T> {
    pub power_dbm: T,
    pub frequency_thz: T,
    pub linewidth_hz: T,
    pub azimuth_deg: T,
}

impl<T: Real> Default for LaserConfig<T> {
    fn default() -> Self {
        LaserConfig {
            power_dbm: T::lit(20.0),
            frequency_thz: T::lit(193.1),
            linewidth_hz: T::lit(10e6),
            azimuth_deg: T::lit(45.0),
        }
    }
}

impl<T: Real> LaserConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.power_dbm.is_finite() {
            return Err(Error::Config("laser power_dbm must be finite".into()));
        }
        if !(self.frequency_thz > T::zero()) || !self.frequency_thz.is_finite() {
            return Err(Error::Config("laser frequency_thz must be positive".into()));
        }
        if !(self.linewidth_hz >= T::zero()) || !self.linewidth_hz.is_finite() {
            return Err(Error::Config("laser linewidth_hz must be non-negative".into()));
        }
        if !self.azimuth_deg.is_finite() {
            return Err(Error::Config("laser azimuth_deg must be finite".into()));
        }
        Ok(())
    }

    pub fn power_w(&self) -> T {
        dbm_to_watts(self.power_dbm)
    }

    pub fn state(&self) -> JonesVector<T> {
        JonesVector::linear(self.azimuth_deg.to_radians())
    }
}

/// Photodetector and front-end parameters.
///
/// `thermal_psd` is a one-sided current-noise density in A²/Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ReceiverConfig<T> {
    pub responsivity_a_per_w: T,
    pub dark_current_a: T,
    pub thermal_psd: T,
    pub noise_bandwidth_hz: T,
    pub optical_filter_bw_hz: T,
    /// Adds shot and thermal noise at the detectors.
    pub noise: bool,
}

impl<T: Real> Default for ReceiverConfig<T> {
    fn default() -> Self {
        ReceiverConfig {
            responsivity_a_per_w: T::lit(0.95),
            dark_current_a: T::lit(10e-9),
            thermal_psd: T::lit(1e-22),
            noise_bandwidth_hz: T::lit(10e9),
            optical_filter_bw_hz: T::lit(500e9),
            noise: true,
        }
    }
}

impl<T: Real> ReceiverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("responsivity_a_per_w", self.responsivity_a_per_w),
            ("dark_current_a", self.dark_current_a),
            ("thermal_psd", self.thermal_psd),
            ("noise_bandwidth_hz", self.noise_bandwidth_hz),
        ];
        for (name, v) in fields {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "receiver.{name} must be finite and non-negative"
                )));
            }
        }
        if !(self.optical_filter_bw_hz > T::zero()) {
            return Err(Error::Config("receiver.optical_filter_bw_hz must be positive".into()));
        }
        Ok(())
    }

    /// Per-quadrature noise variance (A²) for the given mean signal and LO powers.
    pub fn noise_variance(&self, signal_w: T, lo_w: T) -> T {
        if !self.noise {
            return T::zero();
        }
        let q = T::lit(ELEMENTARY_CHARGE);
        let photo = self.responsivity_a_per_w * (signal_w + lo_w);
        T::lit(2.0) * q * (photo + self.dark_current_a) * self.noise_bandwidth_hz
            + self.thermal_psd * self.noise_bandwidth_hz
    }
}

/// Phase relation between the transmit laser and the local oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoPhase {
    /// LO shares the transmit laser's phase trajectory (ideal homodyne).
    #[default]
    Shared,
    /// LO has its own phase noise; pilots track the common phase.
    Independent,
}

/// IQ modulator transfer characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IqTransfer<T> {
    #[default]
    Linear,
    /// Nested MZMs at quadrature bias: each rail is `sin(drive·x)/drive`.
    Mzm { drive: T },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SystemConfig<T> {
    pub laser: LaserConfig<T>,
    pub lo: LaserConfig<T>,
    pub receiver: ReceiverConfig<T>,
    pub ofdm: OfdmConfig,
    pub amplifier_gain_db: T,
    /// ASE noise figure; `None` keeps the amplifier noiseless.
    pub amplifier_noise_figure_db: Option<T>,
    pub aggregate_rate_bps: T,
    pub lo_phase: LoPhase,
    pub iq_transfer: IqTransfer<T>,
    /// Per-tributary enable flags in RCP-H, RCP-V, LCP-H, LCP-V order.
    pub tributaries: [bool; 4],
    /// Subtracted from the link margin only.
    pub noise_margin_db: T,
    /// Set from the run's master seed; not read from configuration files.
    #[serde(skip)]
    pub seed: u64,
}

impl<T: Real> Default for SystemConfig<T> {
    fn default() -> Self {
        SystemConfig {
            laser: LaserConfig::default(),
            lo: LaserConfig::default(),
            receiver: ReceiverConfig::default(),
            ofdm: OfdmConfig::default(),
            amplifier_gain_db: T::lit(15.0),
            amplifier_noise_figure_db: None,
            aggregate_rate_bps: T::lit(200e9),
            lo_phase: LoPhase::Shared,
            iq_transfer: IqTransfer::Linear,
            tributaries: [true; 4],
            noise_margin_db: T::lit(2.0),
            seed: 1,
        }
    }
}

impl<T: Real> SystemConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.laser.validate()?;
        self.lo.validate()?;
        self.receiver.validate()?;
        self.ofdm.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.laser.frequency_thz != self.lo.frequency_thz {
            return Err(Error::Config(format!(
                "homodyne receiver needs equal laser and LO frequencies ({} vs {} THz)",
                self.laser.frequency_thz, self.lo.frequency_thz
            )));
        }
        if !self.amplifier_gain_db.is_finite() {
            return Err(Error::Config("amplifier_gain_db must be finite".into()));
        }
        if let Some(nf) = self.amplifier_noise_figure_db {
            if !(nf >= T::zero()) || !nf.is_finite() {
                return Err(Error::Config("amplifier_noise_figure_db must be non-negative".into()));
            }
        }
        if !(self.aggregate_rate_bps > T::zero()) || !self.aggregate_rate_bps.is_finite() {
            return Err(Error::Config("aggregate_rate_bps must be positive".into()));
        }
        if let IqTransfer::Mzm { drive } = self.iq_transfer {
            if !(drive > T::zero()) || drive > T::FRAC_PI_2() {
                return Err(Error::Config("MZM drive must lie in (0, π/2]".into()));
            }
        }
        if !self.noise_margin_db.is_finite() {
            return Err(Error::Config("noise_margin_db must be finite".into()));
        }
        Ok(())
    }

    pub fn tributary_rate_bps(&self) -> T {
        self.aggregate_rate_bps / T::lit(4.0)
    }

    /// Sample rate implied by the per-tributary bit rate and the OFDM framing
    /// (training overhead excluded).
    pub fn sample_rate_hz(&self) -> T {
        let symbol_rate = self.tributary_rate_bps() / T::from_usize_lossy(self.ofdm.bits_per_symbol());
        symbol_rate * T::from_usize_lossy(self.ofdm.samples_per_symbol())
    }

    /// Mean launch power after the amplifier, in dBm.
    pub fn launch_power_dbm(&self) -> T {
        let active = self.tributaries.iter().filter(|&&on| on).count();
        self.laser.power_dbm
            + self.amplifier_gain_db
            + T::lit(10.0) * (T::from_usize_lossy(active) / T::lit(4.0)).log10()
    }

    /// IQ drive scale that makes the modulated field keep the carrier's mean power.
    pub fn modulation_scale(&self) -> T {
        (T::from_usize_lossy(self.ofdm.n_fft) / T::from_usize_lossy(self.ofdm.n_active())).sqrt()
    }
}

/// CW laser with Wiener phase noise, linearly polarized at the configured azimuth.
///
/// The phase starts at zero and takes steps drawn from
/// `Normal(0, 2π·linewidth/sample_rate)`.
pub fn laser_field<T: Real, R: Rng + ?Sized>(
    cfg: &LaserConfig<T>,
    n_samples: usize,
    sample_rate_hz: T,
    rng: &mut R,
) -> Result<PolarizedField<T>> {
    cfg.validate()?;
    if !(sample_rate_hz > T::zero()) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let amp = cfg.power_w().sqrt();
    let sigma = (T::TAU() * cfg.linewidth_hz / sample_rate_hz).sqrt();
    let mut phase = T::zero();
    let mut env = Vec::with_capacity(n_samples);
    for n in 0..n_samples {
        if n > 0 && sigma > T::zero() {
            phase += sigma * T::sample_standard_normal(rng);
        }
        env.push(Complex::from_polar(amp, phase));
    }
    PolarizedField::from_envelope(cfg.state(), &env, sample_rate_hz)
}

/// Ideal linear IQ modulation: `E_out = κ·(I + iQ)·E_carrier`.
pub fn iq_modulate<T: Real>(
    carrier: &PolarizedField<T>,
    i_waveform: &[T],
    q_waveform: &[T],
    kappa: T,
) -> Result<PolarizedField<T>> {
    IqModulator {
        kappa,
        transfer: IqTransfer::Linear,
    }
    .modulate(carrier, i_waveform, q_waveform)
}

/// IQ modulator with a drive scale and transfer characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IqModulator<T> {
    pub kappa: T,
    pub transfer: IqTransfer<T>,
}

impl<T: Real> IqModulator<T> {
    pub fn drive(&self, i: T, q: T) -> Complex<T> {
        let (i, q) = match self.transfer {
            IqTransfer::Linear => (i, q),
            IqTransfer::Mzm { drive } => ((drive * i).sin() / drive, (drive * q).sin() / drive),
        };
        Complex::new(i, q) * self.kappa
    }

    pub fn modulate(
        &self,
        carrier: &PolarizedField<T>,
        i_waveform: &[T],
        q_waveform: &[T],
    ) -> Result<PolarizedField<T>> {
        if i_waveform.len() != carrier.len() || q_waveform.len() != carrier.len() {
            return Err(Error::invalid(format!(
                "IQ drive lengths {}/{} do not match carrier length {}",
                i_waveform.len(),
                q_waveform.len(),
                carrier.len()
            )));
        }
        let samples = carrier
            .samples()
            .iter()
            .zip(i_waveform.iter().zip(q_waveform))
            .map(|(c, (&i, &q))| c.scale(self.drive(i, q)))
            .collect();
        PolarizedField::new(samples, carrier.sample_rate_hz())
    }
}

/// Gaussian amplitude response with 3 dB (power) full width `bw_hz`.
pub fn gaussian_response<T: Real>(freq_hz: T, bw_hz: T) -> T {
    let x = T::lit(2.0) * freq_hz / bw_hz;
    (-(T::LN_2() / T::lit(2.0)) * x * x).exp()
}

/// Applies a real frequency response to a sampled sequence by circular FFT filtering.
fn filter_in_place<T: Real>(
    data: &mut [Complex<T>],
    sample_rate_hz: T,
    planner: &mut FftPlanner<T>,
    response: impl Fn(T) -> T,
) {
    let n = data.len();
    if n == 0 {
        return;
    }
    planner.plan_fft_forward(n).process(data);
    let nf = T::from_usize_lossy(n);
    for (k, z) in data.iter_mut().enumerate() {
        let signed = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
        let f = T::lit(signed) * sample_rate_hz / nf;
        *z *= response(f) / nf;
    }
    planner.plan_fft_inverse(n).process(data);
}

/// Gaussian optical band-pass filter, applied to each polarization component.
pub fn gaussian_optical_filter<T: Real>(field: &PolarizedField<T>, bw_hz: T) -> Result<PolarizedField<T>> {
    let mut planner = FftPlanner::new();
    filter_field(field, bw_hz, &mut planner)
}

fn filter_field<T: Real>(
    field: &PolarizedField<T>,
    bw_hz: T,
    planner: &mut FftPlanner<T>,
) -> Result<PolarizedField<T>> {
    if !(bw_hz > T::zero()) {
        return Err(Error::invalid("filter bandwidth must be positive"));
    }
    let rate = field.sample_rate_hz();
    let mut ex = field.ex();
    let mut ey = field.ey();
    filter_in_place(&mut ex, rate, planner, |f| gaussian_response(f, bw_hz));
    filter_in_place(&mut ey, rate, planner, |f| gaussian_response(f, bw_hz));
    let samples = ex.into_iter().zip(ey).map(|(x, y)| JonesVector::new(x, y)).collect();
    PolarizedField::new(samples, rate)
}

/// Filters both slots of a multiplexed field.
pub fn gaussian_optical_filter_cpdm<T: Real>(field: &CpdmField<T>, bw_hz: T) -> Result<CpdmField<T>> {
    let mut planner = FftPlanner::new();
    let mut out = field.clone();
    for slot in out.slots_mut().iter_mut() {
        *slot = filter_field(slot, bw_hz, &mut planner)?;
    }
    Ok(out)
}

/// Noiseless amplifier gain, plus ASE when a noise figure is given.
///
/// ASE is white per Jones component with one-sided density
/// `(G − 1)·n_sp·h·ν`, `n_sp = NF/2`, sampled at the field's rate.
pub fn amplify<T: Real, R: Rng + ?Sized>(
    field: &mut CpdmField<T>,
    gain_db: T,
    noise_figure_db: Option<T>,
    frequency_thz: T,
    rng: &mut R,
) {
    let g = db_to_linear(gain_db);
    field.scale(g.sqrt());
    if let Some(nf) = noise_figure_db {
        let nsp = db_to_linear(nf) / T::lit(2.0);
        let photon = T::lit(PLANCK) * frequency_thz * T::lit(1e12);
        let density = (g - T::one()).max(T::zero()) * nsp * photon;
        let var = density * field.sample_rate_hz();
        for slot in field.slots_mut().iter_mut() {
            for s in slot.samples_mut() {
                s.ex += complex_gaussian(var, rng);
                s.ey += complex_gaussian(var, rng);
            }
        }
    }
}

/// Output of one balanced coherent detector pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Detected<T> {
    pub i: Vec<T>,
    pub q: Vec<T>,
    /// Per-quadrature noise variance that was added (A²).
    pub noise_variance: T,
    pub signal_power_w: T,
    pub lo_power_w: T,
}

impl<T: Real> Detected<T> {
    pub fn complex(&self) -> Vec<Complex<T>> {
        self.i.iter().zip(&self.q).map(|(&i, &q)| Complex::new(i, q)).collect()
    }
}

/// Balanced 90° hybrid: `i + jq = R·⟨E_lo, E_s⟩ + n`.
///
/// `lo_offset_hz` is the signal-to-LO carrier offset; anything other than
/// zero is rejected since the receiver is homodyne. Noise uses the record
/// mean of the signal and LO powers.
pub fn coherent_detect<T: Real, R: Rng + ?Sized>(
    signal: &PolarizedField<T>,
    lo: &PolarizedField<T>,
    lo_offset_hz: T,
    cfg: &ReceiverConfig<T>,
    rng: &mut R,
) -> Result<Detected<T>> {
    if lo_offset_hz != T::zero() {
        return Err(Error::Config(format!(
            "homodyne detection needs zero LO offset, got {lo_offset_hz} Hz"
        )));
    }
    if signal.len() != lo.len() {
        return Err(Error::invalid(format!(
            "signal has {} samples, LO has {}",
            signal.len(),
            lo.len()
        )));
    }
    let ps = signal.mean_power();
    let plo = lo.mean_power();
    let var = cfg.noise_variance(ps, plo);
    let sigma = var.sqrt();
    let r = cfg.responsivity_a_per_w;
    let mut i = Vec::with_capacity(signal.len());
    let mut q = Vec::with_capacity(signal.len());
    for (s, l) in signal.samples().iter().zip(lo.samples()) {
        let z = l.inner(s) * r;
        if sigma > T::zero() {
            i.push(z.re + sigma * T::sample_standard_normal(rng));
            q.push(z.im + sigma * T::sample_standard_normal(rng));
        } else {
            i.push(z.re);
            q.push(z.im);
        }
    }
    Ok(Detected {
        i,
        q,
        noise_variance: var,
        signal_power_w: ps,
        lo_power_w: plo,
    })
}
