//! Monte-Carlo sweep over (scenario, distance) cells.
//!
//! Trials run in parallel but every trial draws from streams derived from
//! `(master_seed, scenario, distance, trial)` and results are reduced in
//! trial order, so the output does not depend on the worker count.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::channel::{apply_channel_cpdm, channel_report, ChannelScenario};
use crate::error::{Error, Result};
use crate::metrics::{count_errors, evm_sums, nrz, osnr_from_powers, MetricsRecord};
use crate::num::watts_to_dbm;
use crate::ofdm::prbs_generate;
use crate::phy::Transceiver;
use crate::rng::{derive_seed, Stream, TrialSeed};

/// Plot data kept from the first trial of a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellArtifacts {
    /// Equalized data symbols, stride-sampled to at most the configured count.
    pub constellation: Vec<Complex<f64>>,
    /// NRZ waveform of the equalized in-phase rail of the first enabled tributary.
    pub eye: Vec<f64>,
}

/// Run-level facts written next to the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub master_seed: u64,
    pub seed_derivation: String,
    pub trials: usize,
    pub bits_per_trial: usize,
    pub bits_per_trial_padded: usize,
    pub aggregate_rate_bps: f64,
    pub tributary_rate_bps: f64,
    pub sample_rate_hz: f64,
    pub launch_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub target_ber: f64,
    pub ber_floor: f64,
    pub osnr_reference_bw_hz: f64,
    pub distances_km: Vec<f64>,
    pub conditions: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SweepResults {
    /// One record per cell, scenario-major.
    pub records: Vec<MetricsRecord>,
    pub artifacts: Vec<CellArtifacts>,
    pub metadata: RunMetadata,
}

impl SweepResults {
    pub fn record(&self, scenario_index: usize, distance_km: f64) -> Option<&MetricsRecord> {
        self.records
            .iter()
            .find(|r| r.scenario_index == scenario_index && r.distance_km == distance_km)
    }
}

struct TrialOutcome {
    n_bits: u64,
    n_errors: u64,
    signal_w: f64,
    noise_w: f64,
    evm_err: f64,
    evm_ref: f64,
    rx_power_w: f64,
    artifacts: Option<CellArtifacts>,
}

/// Seed of trial 0 in a cell; later trials follow the same derivation.
pub fn cell_seed(master: u64, scenario: usize, distance: usize) -> u64 {
    TrialSeed::for_cell(master, scenario, distance, 0).0
}

fn run_trial(
    trx: &Transceiver<f64>,
    cfg: &RunConfig,
    sc: &ChannelScenario<f64>,
    (si, di, trial): (usize, usize, usize),
) -> Result<TrialOutcome> {
    let seed = TrialSeed::for_cell(cfg.master_seed, si, di, trial);
    let bits = prbs_generate(cfg.bits_per_trial, derive_seed(seed.0, &[Stream::Bits as u64]));
    let tx = trx.transmit(&bits, seed)?;
    let rx_field = apply_channel_cpdm(&tx.field, sc, &mut seed.rng(Stream::Fading))?;
    let rx = trx.receive(&rx_field, seed)?;

    let sys = trx.system();
    let noise = rx.input_noise_w(sys.receiver.responsivity_a_per_w);
    let (mut evm_err, mut evm_ref, mut signal_w, mut noise_w) = (0.0, 0.0, 0.0, 0.0);
    for k in (0..4).filter(|&k| sys.tributaries[k]) {
        let (e, r) = evm_sums(&rx.symbols[k], &tx.symbols[k]);
        evm_err += e;
        evm_ref += r;
        signal_w += rx.signal_power_w[k];
        noise_w += noise[k];
    }

    let artifacts = (trial == 0).then(|| {
        let m = &cfg.metrics;
        let mut constellation = Vec::new();
        for k in (0..4).filter(|&k| sys.tributaries[k]) {
            constellation.extend_from_slice(&rx.symbols[k]);
        }
        if m.constellation_points > 0 && constellation.len() > m.constellation_points {
            let stride = constellation.len().div_ceil(m.constellation_points);
            constellation = constellation.into_iter().step_by(stride).collect();
        }
        let first = (0..4).find(|&k| sys.tributaries[k]).unwrap_or(0);
        let levels: Vec<f64> = rx.symbols[first].iter().take(m.eye_symbols).map(|z| z.re).collect();
        CellArtifacts {
            constellation,
            eye: nrz(&levels, m.eye_samples_per_symbol),
        }
    });

    Ok(TrialOutcome {
        n_bits: tx.bits.len() as u64,
        n_errors: count_errors(&tx.bits.bits, &rx.bits.bits) as u64,
        signal_w,
        noise_w,
        evm_err,
        evm_ref,
        rx_power_w: rx_field.mean_power(),
        artifacts,
    })
}

fn reduce_cell(
    cfg: &RunConfig,
    trx: &Transceiver<f64>,
    sc: &ChannelScenario<f64>,
    (si, di): (usize, usize),
    trials: Vec<TrialOutcome>,
) -> Result<(MetricsRecord, CellArtifacts)> {
    let n_bits: u64 = trials.iter().map(|t| t.n_bits).sum();
    let n_errors: u64 = trials.iter().map(|t| t.n_errors).sum();
    let ber = n_errors as f64 / n_bits as f64;
    let floor = 1.0 / n_bits as f64;

    // Fading makes trials far from independent Bernoulli draws, so the
    // spread of per-trial BERs is used whenever it exceeds the binomial value.
    let n = trials.len() as f64;
    let per_trial: Vec<f64> = trials.iter().map(|t| t.n_errors as f64 / t.n_bits as f64).collect();
    let mean = per_trial.iter().sum::<f64>() / n;
    let spread = if trials.len() > 1 {
        (per_trial.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let binomial = (ber * (1.0 - ber) / n_bits as f64).sqrt();

    let signal: f64 = trials.iter().map(|t| t.signal_w).sum();
    let noise: f64 = trials.iter().map(|t| t.noise_w).sum();
    let osnr = osnr_from_powers(
        signal,
        noise,
        trx.sample_rate_hz(),
        cfg.metrics.osnr_reference_bw_hz,
        cfg.metrics.osnr_ceiling_db,
    )?;
    let evm_err: f64 = trials.iter().map(|t| t.evm_err).sum();
    let evm_ref: f64 = trials.iter().map(|t| t.evm_ref).sum();
    let evm_pct = if evm_ref > 0.0 {
        100.0 * (evm_err / evm_ref).sqrt()
    } else {
        0.0
    };
    let rx_power_w = trials.iter().map(|t| t.rx_power_w).sum::<f64>() / n;

    let (q_linear, q_is_bound) = MetricsRecord::q_for(ber, floor);
    let report = channel_report(sc, trx.system().launch_power_dbm())?;
    let artifacts = trials
        .into_iter()
        .find_map(|t| t.artifacts)
        .ok_or_else(|| Error::invalid("cell produced no trials"))?;
    Ok((
        MetricsRecord {
            condition: sc.attenuation.label.clone(),
            scenario_index: si,
            distance_km: sc.geometry.distance_km,
            ber,
            q_linear,
            q_is_bound,
            osnr_db: osnr.db,
            osnr_saturated: osnr.saturated,
            evm_pct,
            n_bits,
            n_errors,
            ber_std_err: spread.max(binomial),
            ber_floor: floor,
            rx_power_dbm: watts_to_dbm(rx_power_w),
            expected_rx_power_dbm: report.expected_rx_power_dbm,
            seed: cell_seed(cfg.master_seed, si, di),
        },
        artifacts,
    ))
}

fn metadata(cfg: &RunConfig, trx: &Transceiver<f64>) -> Result<RunMetadata> {
    let sys = trx.system();
    let block = trx.bits_per_block();
    Ok(RunMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.master_seed,
        seed_derivation: "splitmix64 chain over [scenario, distance, trial], then [stream]".into(),
        trials: cfg.trials,
        bits_per_trial: cfg.bits_per_trial,
        bits_per_trial_padded: cfg.bits_per_trial.div_ceil(block) * block,
        aggregate_rate_bps: sys.aggregate_rate_bps,
        tributary_rate_bps: sys.tributary_rate_bps(),
        sample_rate_hz: trx.sample_rate_hz(),
        launch_power_dbm: sys.launch_power_dbm(),
        sensitivity_dbm: trx.sensitivity_dbm(cfg.metrics.target_ber)?,
        target_ber: cfg.metrics.target_ber,
        ber_floor: 1.0 / (cfg.trials as f64 * (cfg.bits_per_trial.div_ceil(block) * block) as f64),
        osnr_reference_bw_hz: cfg.metrics.osnr_reference_bw_hz,
        distances_km: cfg.distances_km.clone(),
        conditions: cfg.scenarios.iter().map(|s| s.label.clone()).collect(),
    })
}

/// Runs the sweep on the global thread pool.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResults> {
    run_sweep_with(cfg, None)
}

/// Runs the sweep on `workers` threads (`None` uses the global pool).
pub fn run_sweep_with(cfg: &RunConfig, workers: Option<usize>) -> Result<SweepResults> {
    cfg.validate()?;
    let mut sys = cfg.system.clone();
    sys.seed = cfg.master_seed;
    let trx = Transceiver::new(sys)?;

    let mut cells = Vec::new();
    for (si, s) in cfg.scenarios.iter().enumerate() {
        for (di, &d) in cfg.distances_km.iter().enumerate() {
            cells.push(((si, di), s.channel(d)?));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();

    let work = || -> Result<Vec<TrialOutcome>> {
        jobs.par_iter()
            .map(|&(c, t)| {
                let ((si, di), sc) = &cells[c];
                run_trial(&trx, cfg, sc, (*si, *di, t)).map_err(|e| Error::Cell {
                    scenario: sc.attenuation.label.clone(),
                    distance_km: sc.geometry.distance_km,
                    trial: t,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let outcomes = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut outcomes = outcomes.into_iter();
    let mut records = Vec::with_capacity(cells.len());
    let mut artifacts = Vec::with_capacity(cells.len());
    for (idx, sc) in &cells {
        let trials: Vec<TrialOutcome> = outcomes.by_ref().take(cfg.trials).collect();
        let (r, a) = reduce_cell(cfg, &trx, sc, *idx, trials)?;
        records.push(r);
        artifacts.push(a);
    }
    Ok(SweepResults {
        records,
        artifacts,
        metadata: metadata(cfg, &trx)?,
    })
}
