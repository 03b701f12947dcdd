//! Baseband OFDM modem.
//!
//! # Frame layout
//!
//! A frame is `n_training` training symbols followed by the data symbols.
//! Every OFDM symbol is `oversampling * (n_fft + cp_len)` samples: the
//! cyclic prefix (the last `oversampling * cp_len` body samples) and then
//! the body.
//!
//! Active subcarriers sit symmetrically about DC, which is never used.
//! With `k` active carriers, the frequency offsets are `-floor(k/2)..=-1`
//! followed by `1..=ceil(k/2)`. In [`PilotMode::Subcarriers`] the `n_pilot`
//! pilots take active-list positions `floor((j + 1/2) k / n_pilot)`, and the
//! data symbols fill the rest in ascending frequency order. For the default
//! 128/80/6 configuration the pilots sit at offsets ±8, ±22 and ±36.
//! [`subcarrier_table`] prints the full map.
//!
//! Oversampling models an ideal DAC/ADC behind a brick-wall anti-aliasing
//! filter. The IFFT is `oversampling * n_fft` long with the spectrum
//! zero-padded, and the receiver FFT keeps only the in-band bins. Both
//! transforms are unitary (1/√N), with an extra √oversampling so per-sample
//! power is independent of the oversampling factor.
//!
//! Training symbols and pilot values are fixed QPSK patterns drawn from
//! [`TRAINING_SEED`] and [`PILOT_SEED`].

mod prbs;
mod qpsk;

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

pub use prbs::{prbs_generate, BitStream, Prbs31, DEFAULT_RATE_BPS};
pub use qpsk::{qpsk_demap, qpsk_map, qpsk_point};

pub const TRAINING_SEED: u64 = 0x7EA1_0FD1;
pub const PILOT_SEED: u64 = 0x1107_5EED;

/// How the configured pilot count is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PilotMode {
    /// `n_pilot` pilot subcarriers in every data symbol.
    #[default]
    Subcarriers,
    /// `n_pilot` whole pilot OFDM symbols spread through the data.
    Symbols,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OfdmConfig {
    pub n_fft: usize,
    /// Data subcarriers.
    pub n_used: usize,
    pub cp_len: usize,
    pub n_training: usize,
    pub n_pilot: usize,
    pub oversampling: usize,
    pub pilot_mode: PilotMode,
}

impl Default for OfdmConfig {
    /// 128-point FFT, 80 data carriers, 20-sample prefix, 10 training
    /// symbols, 6 pilots, 2x oversampling.
    fn default() -> Self {
        OfdmConfig {
            n_fft: 128,
            n_used: 80,
            cp_len: 20,
            n_training: 10,
            n_pilot: 6,
            oversampling: 2,
            pilot_mode: PilotMode::Subcarriers,
        }
    }
}

impl OfdmConfig {
    pub fn with_oversampling(self, oversampling: usize) -> Self {
        OfdmConfig { oversampling, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_fft", self.n_fft),
            ("n_used", self.n_used),
            ("cp_len", self.cp_len),
            ("n_training", self.n_training),
            ("n_pilot", self.n_pilot),
            ("oversampling", self.oversampling),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("ofdm.{name} must be positive")));
            }
        }
        if self.cp_len >= self.n_fft {
            return Err(Error::invalid(format!(
                "ofdm.cp_len ({}) must be shorter than n_fft ({})",
                self.cp_len, self.n_fft
            )));
        }
        if self.n_active() >= self.n_fft {
            return Err(Error::invalid(format!(
                "{} active subcarriers do not fit in n_fft = {} with DC unused",
                self.n_active(),
                self.n_fft
            )));
        }
        Ok(())
    }

    /// Subcarriers that carry energy in a data symbol.
    pub fn n_active(&self) -> usize {
        match self.pilot_mode {
            PilotMode::Subcarriers => self.n_used + self.n_pilot,
            PilotMode::Symbols => self.n_used,
        }
    }

    fn n_pilot_carriers(&self) -> usize {
        match self.pilot_mode {
            PilotMode::Subcarriers => self.n_pilot,
            PilotMode::Symbols => 0,
        }
    }

    fn n_pilot_symbols(&self) -> usize {
        match self.pilot_mode {
            PilotMode::Subcarriers => 0,
            PilotMode::Symbols => self.n_pilot,
        }
    }

    pub fn fft_len(&self) -> usize {
        self.n_fft * self.oversampling
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.oversampling * (self.n_fft + self.cp_len)
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.n_used
    }

    /// OFDM symbols in a frame carrying `n_data` data symbols.
    pub fn symbols_per_frame(&self, n_data: usize) -> usize {
        self.n_training + n_data + self.n_pilot_symbols()
    }

    pub fn frame_len(&self, n_data: usize) -> usize {
        self.symbols_per_frame(n_data) * self.samples_per_symbol()
    }

    /// Data symbols in a frame of `len` samples.
    pub fn data_symbols_in(&self, len: usize) -> Result<usize> {
        let sps = self.samples_per_symbol();
        if !len.is_multiple_of(sps) {
            return Err(Error::Framing(format!(
                "{len} samples is not a whole number of {sps}-sample OFDM symbols"
            )));
        }
        let overhead = self.n_training + self.n_pilot_symbols();
        let total = len / sps;
        if total <= overhead {
            return Err(Error::Framing(format!(
                "{total} OFDM symbols cannot hold {overhead} overhead symbols and any data"
            )));
        }
        Ok(total - overhead)
    }

    /// Mean per-sample power of a frame with unit-energy symbols.
    pub fn nominal_sample_power<T: Real>(&self) -> T {
        T::from_usize_lossy(self.n_active()) / T::from_usize_lossy(self.n_fft)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarrierRole {
    Data,
    Pilot,
}

/// Frequency plan: active offsets (ascending) and their roles.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierMap {
    offsets: Vec<i64>,
    roles: Vec<CarrierRole>,
    data: Vec<usize>,
    pilots: Vec<usize>,
}

impl SubcarrierMap {
    pub fn new(cfg: &OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.n_active() as i64;
        let left = k / 2;
        let offsets: Vec<i64> = (-left..0).chain(1..=k - left).collect();
        let n_pilot = cfg.n_pilot_carriers();
        let mut roles = vec![CarrierRole::Data; offsets.len()];
        for j in 0..n_pilot {
            let pos = (2 * j + 1) * offsets.len() / (2 * n_pilot);
            roles[pos] = CarrierRole::Pilot;
        }
        let data = (0..offsets.len()).filter(|&i| roles[i] == CarrierRole::Data).collect();
        let pilots = (0..offsets.len()).filter(|&i| roles[i] == CarrierRole::Pilot).collect();
        Ok(SubcarrierMap {
            offsets,
            roles,
            data,
            pilots,
        })
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn roles(&self) -> &[CarrierRole] {
        &self.roles
    }

    /// Active-list positions of data carriers.
    pub fn data_positions(&self) -> &[usize] {
        &self.data
    }

    /// Active-list positions of pilot carriers.
    pub fn pilot_positions(&self) -> &[usize] {
        &self.pilots
    }

    /// FFT bin of active carrier `pos` in a transform of length `len`.
    pub fn bin(&self, pos: usize, len: usize) -> usize {
        self.offsets[pos].rem_euclid(len as i64) as usize
    }
}

/// Human-readable subcarrier map: one row per active carrier.
pub fn subcarrier_table(cfg: &OfdmConfig) -> Result<String> {
    let map = SubcarrierMap::new(cfg)?;
    let mut out = String::from("# position offset fft_bin role\n");
    for (pos, (&off, role)) in map.offsets.iter().zip(&map.roles).enumerate() {
        let role = match role {
            CarrierRole::Data => "data",
            CarrierRole::Pilot => "pilot",
        };
        out.push_str(&format!("{pos} {off} {} {role}\n", map.bin(pos, cfg.n_fft)));
    }
    Ok(out)
}

/// Kind of each OFDM symbol in a frame, in transmission order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Training(usize),
    Data(usize),
    Pilot(usize),
}

pub fn frame_layout(cfg: &OfdmConfig, n_data: usize) -> Vec<SymbolKind> {
    let mut out: Vec<SymbolKind> = (0..cfg.n_training).map(SymbolKind::Training).collect();
    let n_ps = cfg.n_pilot_symbols();
    let mut next_pilot = 0;
    for d in 0..n_data {
        while next_pilot < n_ps && d == (next_pilot + 1) * n_data / (n_ps + 1) {
            out.push(SymbolKind::Pilot(next_pilot));
            next_pilot += 1;
        }
        out.push(SymbolKind::Data(d));
    }
    while next_pilot < n_ps {
        out.push(SymbolKind::Pilot(next_pilot));
        next_pilot += 1;
    }
    out
}

fn known_qpsk<T: Real>(seed: u64, rows: usize, cols: usize) -> Vec<Vec<Complex<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| qpsk_point(rng.random_range(0..2u8), rng.random_range(0..2u8)))
                .collect()
        })
        .collect()
}

/// Known training symbols, one row per symbol over all active carriers.
pub fn training_symbols<T: Real>(cfg: &OfdmConfig) -> Vec<Vec<Complex<T>>> {
    known_qpsk(TRAINING_SEED, cfg.n_training, cfg.n_active())
}

/// Per-active-carrier channel gain and per-data-symbol common phase error.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate<T> {
    pub gains: Vec<Complex<T>>,
    pub cpe: Vec<T>,
}

impl<T: Real> ChannelEstimate<T> {
    /// Unit gains, no phase correction.
    pub fn identity(cfg: &OfdmConfig, n_data: usize) -> Self {
        Self::flat(cfg, n_data, Complex::new(T::one(), T::zero()))
    }

    pub fn flat(cfg: &OfdmConfig, n_data: usize, gain: Complex<T>) -> Self {
        ChannelEstimate {
            gains: vec![gain; cfg.n_active()],
            cpe: vec![T::zero(); n_data],
        }
    }

    /// Same gains with the phase tracking switched off.
    pub fn without_phase_tracking(&self) -> Self {
        ChannelEstimate {
            gains: self.gains.clone(),
            cpe: vec![T::zero(); self.cpe.len()],
        }
    }
}

/// Reusable modulator/demodulator with planned FFTs.
pub struct OfdmModem<T: Real> {
    cfg: OfdmConfig,
    map: SubcarrierMap,
    ifft: Arc<dyn Fft<T>>,
    fft: Arc<dyn Fft<T>>,
    training: Vec<Vec<Complex<T>>>,
    pilot_values: Vec<Complex<T>>,
    pilot_symbols: Vec<Vec<Complex<T>>>,
}

impl<T: Real> OfdmModem<T> {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        let map = SubcarrierMap::new(&cfg)?;
        let mut planner = FftPlanner::new();
        let n = cfg.fft_len();
        let pilot_values = known_qpsk(PILOT_SEED, 1, cfg.n_pilot).remove(0);
        let pilot_symbols = known_qpsk(PILOT_SEED ^ 1, cfg.n_pilot_symbols(), cfg.n_active());
        Ok(OfdmModem {
            cfg,
            map,
            ifft: planner.plan_fft_inverse(n),
            fft: planner.plan_fft_forward(n),
            training: training_symbols(&cfg),
            pilot_values,
            pilot_symbols,
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    pub fn map(&self) -> &SubcarrierMap {
        &self.map
    }

    pub fn training(&self) -> &[Vec<Complex<T>>] {
        &self.training
    }

    /// Number of data symbols needed for `n` constellation points.
    pub fn data_symbols_for(&self, n: usize) -> Result<usize> {
        if n == 0 || !n.is_multiple_of(self.cfg.n_used) {
            return Err(Error::invalid(format!(
                "symbol count {n} is not a positive multiple of {} data subcarriers",
                self.cfg.n_used
            )));
        }
        Ok(n / self.cfg.n_used)
    }

    /// IFFT of one active-carrier vector plus cyclic prefix, appended to `out`.
    fn emit_symbol(&self, active: &[Complex<T>], out: &mut Vec<Complex<T>>) {
        let n = self.cfg.fft_len();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for (pos, &v) in active.iter().enumerate() {
            buf[self.map.bin(pos, n)] = v;
        }
        self.emit_bins(buf, out);
    }

    fn emit_bins(&self, mut buf: Vec<Complex<T>>, out: &mut Vec<Complex<T>>) {
        let n = buf.len();
        self.ifft.process(&mut buf);
        let scale = (T::from_usize_lossy(self.cfg.oversampling) / T::from_usize_lossy(n)).sqrt();
        let cp = self.cfg.oversampling * self.cfg.cp_len;
        out.extend(buf[n - cp..].iter().map(|&z| z * scale));
        out.extend(buf.iter().map(|&z| z * scale));
    }

    /// Modulates raw FFT-bin vectors (length `n_fft`, natural order) with no
    /// framing: one OFDM symbol with prefix per input row.
    pub fn modulate_bins(&self, rows: &[Vec<Complex<T>>]) -> Result<Vec<Complex<T>>> {
        let n = self.cfg.n_fft;
        let big = self.cfg.fft_len();
        let mut out = Vec::with_capacity(rows.len() * self.cfg.samples_per_symbol());
        for row in rows {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "bin vector has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut buf = vec![Complex::new(T::zero(), T::zero()); big];
            for (k, &v) in row.iter().enumerate() {
                let off = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
                buf[off.rem_euclid(big as i64) as usize] = v;
            }
            self.emit_bins(buf, &mut out);
        }
        Ok(out)
    }

    /// Modulates data symbols into a complete frame (training first).
    pub fn modulate(&self, symbols: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n_data = self.data_symbols_for(symbols.len())?;
        let mut out = Vec::with_capacity(self.cfg.frame_len(n_data));
        let mut active = vec![Complex::new(T::zero(), T::zero()); self.cfg.n_active()];
        for kind in frame_layout(&self.cfg, n_data) {
            match kind {
                SymbolKind::Training(t) => self.emit_symbol(&self.training[t], &mut out),
                SymbolKind::Pilot(p) => self.emit_symbol(&self.pilot_symbols[p], &mut out),
                SymbolKind::Data(d) => {
                    let chunk = &symbols[d * self.cfg.n_used..(d + 1) * self.cfg.n_used];
                    for (&pos, &v) in self.map.data.iter().zip(chunk) {
                        active[pos] = v;
                    }
                    for (&pos, &v) in self.map.pilots.iter().zip(&self.pilot_values) {
                        active[pos] = v;
                    }
                    self.emit_symbol(&active, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// Strips the prefix of every OFDM symbol and returns its active-carrier values.
    pub fn active_grid(&self, samples: &[Complex<T>]) -> Result<Vec<Vec<Complex<T>>>> {
        let sps = self.cfg.samples_per_symbol();
        if samples.is_empty() || !samples.len().is_multiple_of(sps) {
            return Err(Error::Framing(format!(
                "{} samples is not a whole number of {sps}-sample OFDM symbols",
                samples.len()
            )));
        }
        let n = self.cfg.fft_len();
        let cp = sps - n;
        let scale = T::one() / (T::from_usize_lossy(n) * T::from_usize_lossy(self.cfg.oversampling)).sqrt();
        let mut grid = Vec::with_capacity(samples.len() / sps);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for sym in samples.chunks_exact(sps) {
            buf.copy_from_slice(&sym[cp..]);
            self.fft.process(&mut buf);
            grid.push(
                (0..self.map.offsets.len())
                    .map(|pos| buf[self.map.bin(pos, n)] * scale)
                    .collect(),
            );
        }
        Ok(grid)
    }

    /// Least-squares channel estimate from the training symbols against `known`,
    /// plus pilot-based common phase error for every data symbol.
    pub fn estimate_with(&self, samples: &[Complex<T>], known: &[Vec<Complex<T>>]) -> Result<ChannelEstimate<T>> {
        let n_data = self.cfg.data_symbols_in(samples.len())?;
        if known.len() != self.cfg.n_training || known.iter().any(|r| r.len() != self.cfg.n_active()) {
            return Err(Error::invalid(format!(
                "known training must be {} rows of {} values",
                self.cfg.n_training,
                self.cfg.n_active()
            )));
        }
        if known.iter().flatten().any(|z| z.norm_sqr() == T::zero()) {
            return Err(Error::invalid("known training symbol is zero"));
        }
        let grid = self.active_grid(samples)?;
        let layout = frame_layout(&self.cfg, n_data);

        let mut gains = vec![Complex::new(T::zero(), T::zero()); self.cfg.n_active()];
        for (kind, row) in layout.iter().zip(&grid) {
            if let SymbolKind::Training(t) = *kind {
                for (g, (y, x)) in gains.iter_mut().zip(row.iter().zip(&known[t])) {
                    *g += y / x;
                }
            }
        }
        let inv = T::one() / T::from_usize_lossy(self.cfg.n_training);
        gains.iter_mut().for_each(|g| *g *= inv);

        let mut cpe = Vec::with_capacity(n_data);
        let mut last_ref = T::zero();
        for (kind, row) in layout.iter().zip(&grid) {
            match *kind {
                SymbolKind::Training(_) => {}
                SymbolKind::Pilot(p) => {
                    last_ref = common_phase(row, &gains, &self.pilot_symbols[p], 0..row.len());
                }
                SymbolKind::Data(_) => match self.cfg.pilot_mode {
                    PilotMode::Subcarriers => {
                        let z = self
                            .map
                            .pilots
                            .iter()
                            .zip(&self.pilot_values)
                            .map(|(&pos, &known)| equalize(row[pos], gains[pos]) * known.conj())
                            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
                        cpe.push(if z.norm_sqr() > T::zero() { z.arg() } else { T::zero() });
                    }
                    PilotMode::Symbols => cpe.push(last_ref),
                },
            }
        }
        Ok(ChannelEstimate { gains, cpe })
    }

    /// [`estimate_with`](Self::estimate_with) against the modem's own training pattern.
    pub fn estimate(&self, samples: &[Complex<T>]) -> Result<ChannelEstimate<T>> {
        self.estimate_with(samples, &self.training)
    }

    /// Recovers the equalized data symbols of a frame.
    pub fn demodulate(&self, samples: &[Complex<T>], est: &ChannelEstimate<T>) -> Result<Vec<Complex<T>>> {
        let n_data = self.cfg.data_symbols_in(samples.len())?;
        if est.gains.len() != self.cfg.n_active() || est.cpe.len() != n_data {
            return Err(Error::Framing(format!(
                "estimate covers {} carriers / {} symbols, frame has {} / {}",
                est.gains.len(),
                est.cpe.len(),
                self.cfg.n_active(),
                n_data
            )));
        }
        let grid = self.active_grid(samples)?;
        let mut out = Vec::with_capacity(n_data * self.cfg.n_used);
        for (kind, row) in frame_layout(&self.cfg, n_data).iter().zip(&grid) {
            if let SymbolKind::Data(d) = *kind {
                let derotate = Complex::from_polar(T::one(), -est.cpe[d]);
                out.extend(
                    self.map
                        .data
                        .iter()
                        .map(|&pos| equalize(row[pos], est.gains[pos]) * derotate),
                );
            }
        }
        Ok(out)
    }
}

/// `y / g`, or zero when the carrier was estimated dead.
fn equalize<T: Real>(y: Complex<T>, g: Complex<T>) -> Complex<T> {
    if g.norm_sqr() > T::zero() {
        y / g
    } else {
        Complex::new(T::zero(), T::zero())
    }
}

fn common_phase<T: Real>(
    row: &[Complex<T>],
    gains: &[Complex<T>],
    known: &[Complex<T>],
    positions: std::ops::Range<usize>,
) -> T {
    let z = positions
        .map(|p| equalize(row[p], gains[p]) * known[p].conj())
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    if z.norm_sqr() > T::zero() {
        z.arg()
    } else {
        T::zero()
    }
}

/// One-shot modulation of data `symbols` into a framed baseband signal.
pub fn ofdm_modulate<T: Real>(symbols: &[Complex<T>], cfg: &OfdmConfig) -> Result<Vec<Complex<T>>> {
    OfdmModem::new(*cfg)?.modulate(symbols)
}

/// One-shot demodulation of a framed baseband signal.
pub fn ofdm_demodulate<T: Real>(
    samples: &[Complex<T>],
    cfg: &OfdmConfig,
    est: &ChannelEstimate<T>,
) -> Result<Vec<Complex<T>>> {
    OfdmModem::new(*cfg)?.demodulate(samples, est)
}

/// One-shot channel estimation against caller-supplied training symbols.
pub fn estimate_channel<T: Real>(
    received: &[Complex<T>],
    known_training: &[Vec<Complex<T>>],
    cfg: &OfdmConfig,
) -> Result<ChannelEstimate<T>> {
    OfdmModem::new(*cfg)?.estimate_with(received, known_training)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_symbols(n: usize, seed: u64) -> (Vec<u8>, Vec<Complex<f64>>) {
        let bits = prbs_generate(2 * n, seed).bits;
        let s = qpsk_map(&bits).unwrap();
        (bits, s)
    }

    #[test]
    fn default_map_is_symmetric_with_expected_pilots() {
        let cfg = OfdmConfig::default();
        let map = SubcarrierMap::new(&cfg).unwrap();
        assert_eq!(map.offsets().len(), 86);
        assert!(!map.offsets().contains(&0));
        let pilots: Vec<i64> = map.pilot_positions().iter().map(|&p| map.offsets()[p]).collect();
        assert_eq!(pilots, vec![-36, -22, -8, 8, 22, 36]);
        assert_eq!(map.data_positions().len(), 80);
        let table = subcarrier_table(&cfg).unwrap();
        assert_eq!(table.lines().count(), 87);
        assert!(table.contains("50 8 8 pilot"));
    }

    #[test]
    fn config_validation() {
        let ok = OfdmConfig::default();
        assert!(ok.validate().is_ok());
        assert!(OfdmConfig { cp_len: 128, ..ok }.validate().is_err());
        assert!(OfdmConfig { n_used: 122, ..ok }.validate().is_err());
        assert!(OfdmConfig { n_training: 0, ..ok }.validate().is_err());
        assert!(OfdmConfig { oversampling: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn symbol_length_matches_table_values() {
        let cfg = OfdmConfig::default().with_oversampling(1);
        let (_, s) = random_symbols(80, 1);
        let x = ofdm_modulate(&s, &cfg).unwrap();
        assert_eq!(cfg.samples_per_symbol(), 148);
        assert_eq!(x.len(), (1 + 10) * 148);
    }

    #[test]
    fn delta_on_one_subcarrier_is_a_complex_exponential() {
        let cfg = OfdmConfig::default().with_oversampling(1);
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        let k = 5;
        let mut row = vec![c(0.0, 0.0); 128];
        row[k] = c(1.0, 0.0);
        let x = modem.modulate_bins(&[row]).unwrap();
        let body = &x[20..];
        for (n, z) in body.iter().enumerate() {
            let ph = 2.0 * std::f64::consts::PI * (k * n) as f64 / 128.0;
            let expect = Complex::from_polar(1.0 / 128f64.sqrt(), ph);
            assert!((z - expect).norm() < 1e-14);
        }
        assert_eq!(&x[..20], &body[108..]);
    }

    #[test]
    fn parseval_holds() {
        for os in [1, 2] {
            let cfg = OfdmConfig::default().with_oversampling(os);
            let modem = OfdmModem::<f64>::new(cfg).unwrap();
            let mut rng = SimRng::seed_from_u64(4);
            let row: Vec<Complex<f64>> = (0..128)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let freq_power: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            let x = modem.modulate_bins(&[row]).unwrap();
            let body = &x[os * 20..];
            let time_power: f64 = body.iter().map(|z| z.norm_sqr()).sum::<f64>() / os as f64;
            assert!((time_power / freq_power - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn loopback_and_flat_gain() {
        let cfg = OfdmConfig::default();
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        let (bits, s) = random_symbols(80 * 20, 7);
        let x = modem.modulate(&s).unwrap();
        let y = modem.demodulate(&x, &ChannelEstimate::identity(&cfg, 20)).unwrap();
        assert!(y.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-9));
        assert_eq!(qpsk_demap(&y), bits);

        let g = Complex::from_polar(0.5, std::f64::consts::FRAC_PI_4);
        let xg: Vec<_> = x.iter().map(|z| z * g).collect();
        let est = modem.estimate(&xg).unwrap();
        assert!(est.gains.iter().all(|h| (h - g).norm() < 1e-9));
        let y = modem.demodulate(&xg, &ChannelEstimate::flat(&cfg, 20, g)).unwrap();
        assert!(y.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-9));
        let y = modem.demodulate(&xg, &est).unwrap();
        assert!(y.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn identity_estimate_is_unity() {
        let cfg = OfdmConfig::default();
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        let (_, s) = random_symbols(80 * 3, 9);
        let est = modem.estimate(&modem.modulate(&s).unwrap()).unwrap();
        assert!(est.gains.iter().all(|h| (h - c(1.0, 0.0)).norm() < 1e-12));
        assert!(est.cpe.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn framing_errors() {
        let cfg = OfdmConfig::default();
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        assert!(modem.modulate(&vec![c(1.0, 0.0); 79]).is_err());
        assert!(matches!(
            modem.demodulate(&vec![c(0.0, 0.0); 100], &ChannelEstimate::identity(&cfg, 1)),
            Err(Error::Framing(_))
        ));
        let only_training = vec![c(0.0, 0.0); 10 * cfg.samples_per_symbol()];
        assert!(modem.estimate(&only_training).is_err());
        let (_, s) = random_symbols(80, 1);
        let x = modem.modulate(&s).unwrap();
        assert!(modem.demodulate(&x, &ChannelEstimate::identity(&cfg, 2)).is_err());
    }

    #[test]
    fn zero_training_rejected() {
        let cfg = OfdmConfig::default();
        let (_, s) = random_symbols(80, 1);
        let x = ofdm_modulate(&s, &cfg).unwrap();
        let mut known = training_symbols::<f64>(&cfg);
        known[3][7] = c(0.0, 0.0);
        assert!(estimate_channel(&x, &known, &cfg).is_err());
    }

    #[test]
    fn dead_channel_decodes_to_zero_symbols() {
        let cfg = OfdmConfig::default();
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        let x = vec![c(0.0, 0.0); cfg.frame_len(2)];
        let est = modem.estimate(&x).unwrap();
        let y = modem.demodulate(&x, &est).unwrap();
        assert!(y.iter().all(|z| z.norm() == 0.0));
        assert!(qpsk_demap(&y).iter().all(|&b| b == 0));
    }

    #[test]
    fn pilot_symbol_mode_round_trips() {
        let cfg = OfdmConfig {
            pilot_mode: PilotMode::Symbols,
            ..OfdmConfig::default()
        };
        let modem = OfdmModem::<f64>::new(cfg).unwrap();
        let (bits, s) = random_symbols(80 * 14, 3);
        let x = modem.modulate(&s).unwrap();
        assert_eq!(x.len(), (10 + 14 + 6) * cfg.samples_per_symbol());
        let rot = Complex::from_polar(0.8, 1.0);
        let xr: Vec<_> = x.iter().map(|z| z * rot).collect();
        let est = modem.estimate(&xr).unwrap();
        assert_eq!(qpsk_demap(&modem.demodulate(&xr, &est).unwrap()), bits);
        let layout = frame_layout(&cfg, 14);
        assert_eq!(layout.iter().filter(|k| matches!(k, SymbolKind::Pilot(_))).count(), 6);
    }

    #[test]
    fn single_precision_loopback() {
        let cfg = OfdmConfig::default();
        let modem = OfdmModem::<f32>::new(cfg).unwrap();
        let bits = prbs_generate(160 * 4, 2).bits;
        let s: Vec<Complex<f32>> = qpsk_map(&bits).unwrap();
        let x = modem.modulate(&s).unwrap();
        let est = modem.estimate(&x).unwrap();
        assert_eq!(qpsk_demap(&modem.demodulate(&x, &est).unwrap()), bits);
    }
}
