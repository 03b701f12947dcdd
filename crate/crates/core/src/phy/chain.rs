//! Four-tributary CPDM transmitter and polarization-diversity receiver.

use num_complex::Complex;

use super::{
    amplify, coherent_detect, gaussian_optical_filter_cpdm, laser_field, IqModulator, LaserConfig, LoPhase,
    SystemConfig, ELEMENTARY_CHARGE,
};
use crate::error::{Error, Result};
use crate::metrics::q_from_ber;
use crate::num::{watts_to_dbm, Real};
use crate::ofdm::{qpsk_demap, qpsk_map, BitStream, OfdmModem};
use crate::polarization::{cpbs_split, pbc_combine, pbs_split, CpdmField, PolarizedField, Tributary};
use crate::rng::{Stream, TrialSeed};

/// Transmitted field plus what the receiver is compared against.
#[derive(Clone, Debug)]
pub struct Transmission<T> {
    pub field: CpdmField<T>,
    /// Input bits after zero padding, in tributary order.
    pub bits: BitStream,
    /// QPSK data symbols per tributary.
    pub symbols: [Vec<Complex<T>>; 4],
    pub data_symbols: usize,
}

/// Decoded bits and per-arm detector diagnostics.
#[derive(Clone, Debug)]
pub struct Reception<T> {
    pub bits: BitStream,
    /// Equalized data symbols per tributary.
    pub symbols: [Vec<Complex<T>>; 4],
    /// Mean optical power at each detector input (W).
    pub signal_power_w: [T; 4],
    pub lo_power_w: [T; 4],
    /// Per-quadrature electrical noise variance (A²).
    pub noise_variance: [T; 4],
    pub sample_rate_hz: T,
}

impl<T: Real> Reception<T> {
    /// Detector noise referred to the optical input of each arm, in W over
    /// the simulation bandwidth.
    pub fn input_noise_w(&self, responsivity: T) -> [T; 4] {
        std::array::from_fn(|k| {
            let g = responsivity * responsivity * self.lo_power_w[k];
            if g > T::zero() {
                T::lit(2.0) * self.noise_variance[k] / g
            } else {
                T::infinity()
            }
        })
    }
}

/// Transmitter and receiver sharing one configuration and modem.
pub struct Transceiver<T: Real> {
    sys: SystemConfig<T>,
    modem: OfdmModem<T>,
    sample_rate_hz: T,
}

impl<T: Real> Transceiver<T> {
    pub fn new(sys: SystemConfig<T>) -> Result<Self> {
        sys.validate()?;
        let modem = OfdmModem::new(sys.ofdm)?;
        let sample_rate_hz = sys.sample_rate_hz();
        Ok(Transceiver {
            sys,
            modem,
            sample_rate_hz,
        })
    }

    pub fn system(&self) -> &SystemConfig<T> {
        &self.sys
    }

    pub fn modem(&self) -> &OfdmModem<T> {
        &self.modem
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    /// Bits carried per frame-aligned block (all four tributaries).
    pub fn bits_per_block(&self) -> usize {
        4 * self.sys.ofdm.bits_per_symbol()
    }

    /// CPBS then a PBS on each circular arm, in [`Tributary::ALL`] order.
    fn split_arms(field: &PolarizedField<T>) -> [PolarizedField<T>; 4] {
        let (r, l) = cpbs_split(field);
        let (rh, rv) = pbs_split(&r);
        let (lh, lv) = pbs_split(&l);
        [rh, rv, lh, lv]
    }

    fn lo_arms(&self, n: usize, seed: TrialSeed) -> Result<[PolarizedField<T>; 4]> {
        let (cfg, stream) = match self.sys.lo_phase {
            LoPhase::Shared => (
                LaserConfig {
                    power_dbm: self.sys.lo.power_dbm,
                    azimuth_deg: self.sys.lo.azimuth_deg,
                    ..self.sys.laser
                },
                Stream::TxLaser,
            ),
            LoPhase::Independent => (self.sys.lo, Stream::LoLaser),
        };
        let lo = laser_field(&cfg, n, self.sample_rate_hz, &mut seed.rng(stream))?;
        Ok(Self::split_arms(&lo))
    }

    /// Splits `bits` (zero-padded to whole OFDM symbols) into four tributaries,
    /// modulates each onto its polarization arm, multiplexes and amplifies.
    pub fn transmit(&self, bits: &BitStream, seed: TrialSeed) -> Result<Transmission<T>> {
        if bits.is_empty() {
            return Err(Error::invalid("no bits to transmit"));
        }
        let bits = bits.padded_to(self.bits_per_block());
        let per_trib = bits.len() / 4;
        let data_symbols = per_trib / self.sys.ofdm.bits_per_symbol();
        let n = self.sys.ofdm.frame_len(data_symbols);

        let carrier = laser_field(&self.sys.laser, n, self.sample_rate_hz, &mut seed.rng(Stream::TxLaser))?;
        let arms = Self::split_arms(&carrier);
        let iq = IqModulator {
            kappa: self.sys.modulation_scale(),
            transfer: self.sys.iq_transfer,
        };
        let mut symbols: [Vec<Complex<T>>; 4] = Default::default();
        let mut modulated = Vec::with_capacity(4);
        for t in Tributary::ALL {
            let k = t.index();
            let seg = &bits.bits[k * per_trib..(k + 1) * per_trib];
            symbols[k] = qpsk_map(seg)?;
            let wave = self.modem.modulate(&symbols[k])?;
            let (i, q): (Vec<T>, Vec<T>) = if self.sys.tributaries[k] {
                wave.iter().map(|z| (z.re, z.im)).unzip()
            } else {
                (vec![T::zero(); n], vec![T::zero(); n])
            };
            modulated.push(iq.modulate(&arms[k], &i, &q)?);
        }
        let rcp = pbc_combine(&modulated[0], &modulated[1])?;
        let lcp = pbc_combine(&modulated[2], &modulated[3])?;
        let mut field = CpdmField::from_branches(&rcp, &lcp)?;
        amplify(
            &mut field,
            self.sys.amplifier_gain_db,
            self.sys.amplifier_noise_figure_db,
            self.sys.laser.frequency_thz,
            &mut seed.rng(Stream::Amplifier),
        );
        Ok(Transmission {
            field,
            bits,
            symbols,
            data_symbols,
        })
    }

    /// Filters, demultiplexes, detects and decodes all four tributaries.
    pub fn receive(&self, field: &CpdmField<T>, seed: TrialSeed) -> Result<Reception<T>> {
        let n = field.len();
        self.sys.ofdm.data_symbols_in(n)?;
        if field.sample_rate_hz() != self.sample_rate_hz {
            return Err(Error::Config(format!(
                "field sampled at {} Hz, system expects {} Hz",
                field.sample_rate_hz(),
                self.sample_rate_hz
            )));
        }
        let filtered = gaussian_optical_filter_cpdm(field, self.sys.receiver.optical_filter_bw_hz)?;
        let (rcp, lcp) = filtered.to_branches();
        let (rh, rv) = pbs_split(&rcp);
        let (lh, lv) = pbs_split(&lcp);
        let arms = [rh, rv, lh, lv];
        let lo = self.lo_arms(n, seed)?;
        let offset_hz = (self.sys.laser.frequency_thz - self.sys.lo.frequency_thz) * T::lit(1e12);

        let mut rng = seed.rng(Stream::Detector);
        let mut bits = Vec::with_capacity(4 * self.sys.ofdm.bits_per_symbol() * self.sys.ofdm.data_symbols_in(n)?);
        let mut symbols: [Vec<Complex<T>>; 4] = Default::default();
        let mut signal_power_w = [T::zero(); 4];
        let mut lo_power_w = [T::zero(); 4];
        let mut noise_variance = [T::zero(); 4];
        for t in Tributary::ALL {
            let k = t.index();
            let det = coherent_detect(&arms[k], &lo[k], offset_hz, &self.sys.receiver, &mut rng)?;
            let wave = det.complex();
            let est = self.modem.estimate(&wave)?;
            symbols[k] = self.modem.demodulate(&wave, &est)?;
            bits.extend(qpsk_demap(&symbols[k]));
            signal_power_w[k] = det.signal_power_w;
            lo_power_w[k] = det.lo_power_w;
            noise_variance[k] = det.noise_variance;
        }
        Ok(Reception {
            bits: BitStream::new(bits, self.sys.aggregate_rate_bps.as_f64()),
            symbols,
            signal_power_w,
            lo_power_w,
            noise_variance,
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Received power (dBm, all tributaries) at which the per-subcarrier
    /// symbol SNR reaches the value giving `target_ber` for Gray QPSK.
    /// Negative infinity when detector noise is disabled.
    pub fn sensitivity_dbm(&self, target_ber: T) -> Result<T> {
        let s = q_from_ber(target_ber)?.powi(2);
        let rx = &self.sys.receiver;
        if !rx.noise {
            return Ok(T::neg_infinity());
        }
        let q = T::lit(ELEMENTARY_CHARGE);
        let r = rx.responsivity_a_per_w;
        let plo = self.sys.lo.power_w() / T::lit(4.0);
        let kappa2 = self.sys.modulation_scale().powi(2);
        let os = T::from_usize_lossy(self.sys.ofdm.oversampling);
        let gain = r * r * plo * kappa2 * os / T::lit(2.0);
        let floor = rx.noise_variance(T::zero(), plo);
        let slope = T::lit(2.0) * q * r * rx.noise_bandwidth_hz;
        let denom = gain - s * slope;
        if !(denom > T::zero()) {
            return Err(Error::invalid("target BER is unreachable at any received power"));
        }
        let per_arm = s * floor / denom;
        Ok(watts_to_dbm(T::lit(4.0) * per_arm))
    }
}

/// One-shot transmit with a freshly built [`Transceiver`].
pub fn transmit<T: Real>(bits: &BitStream, sys: &SystemConfig<T>, seed: TrialSeed) -> Result<Transmission<T>> {
    Transceiver::new(sys.clone())?.transmit(bits, seed)
}

/// One-shot receive with a freshly built [`Transceiver`].
pub fn receive<T: Real>(field: &CpdmField<T>, sys: &SystemConfig<T>, seed: TrialSeed) -> Result<Reception<T>> {
    Transceiver::new(sys.clone())?.receive(field, seed)
}

/// See [`Transceiver::sensitivity_dbm`].
pub fn sensitivity_dbm<T: Real>(sys: &SystemConfig<T>, target_ber: T) -> Result<T> {
    Transceiver::new(sys.clone())?.sensitivity_dbm(target_ber)
}

/// Received power minus sensitivity minus the configured noise margin.
pub fn link_margin_db<T: Real>(rx_power_dbm: T, sensitivity_dbm: T, noise_margin_db: T) -> T {
    rx_power_dbm - sensitivity_dbm - noise_margin_db
}
