//! Fast invariant checks runnable from the command line.

use rand::SeedableRng;

use super::reference::REFERENCE_CELLS;
use crate::channel::{channel_report, ChannelScenario};
use crate::error::Result;
use crate::linkbudget::WeatherAttenuation;
use crate::metrics::{ber_from_q, count_errors};
use crate::ofdm::{prbs_generate, qpsk_map, OfdmConfig, OfdmModem};
use crate::phy::{SystemConfig, Transceiver};
use crate::polarization::{cpbs_arm_matrices, JonesVector};
use crate::rng::{SimRng, TrialSeed};
use crate::turbulence::{gg_shape_params, rytov_variance, sample_scintillation, TurbulenceEnv};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn link_budget() -> Result<(bool, String)> {
    let light = WeatherAttenuation::<f64>::reference_conditions().remove(0);
    let r = channel_report(&ChannelScenario::reference(light, 3.0), 35.0)?;
    let ok =
        (r.geometric_loss_db + 29.650_325_732).abs() < 1e-6 && (r.expected_rx_power_dbm + 3.560_325_732).abs() < 1e-6;
    Ok((
        ok,
        format!(
            "L_G = {:.6} dB, P_R = {:.6} dBm at 3 km",
            r.geometric_loss_db, r.expected_rx_power_dbm
        ),
    ))
}

fn q_ber_pairs() -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for c in &REFERENCE_CELLS {
        let ber = ber_from_q(c.q_linear)?;
        worst = worst.max((ber - c.ber).abs() / c.ber);
    }
    Ok((worst < 0.15, format!("worst relative BER mismatch {worst:.4}")))
}

fn fading_mean() -> Result<(bool, String)> {
    let env = TurbulenceEnv::<f64>::reference(3000.0);
    let s = gg_shape_params(rytov_variance(&env)?)?;
    let mut rng = SimRng::seed_from_u64(11);
    let n = 50_000;
    let mean = (0..n).map(|_| sample_scintillation(&s, &mut rng).value()).sum::<f64>() / n as f64;
    Ok(((mean - 1.0).abs() < 0.03, format!("mean irradiance {mean:.4}")))
}

fn cpbs_isolation() -> Result<(bool, String)> {
    let (r, l) = cpbs_arm_matrices::<f64>();
    let leak = r.apply(&JonesVector::lcp()).power() + l.apply(&JonesVector::rcp()).power();
    let db = 10.0 * leak.max(1e-300).log10();
    Ok((db <= -300.0, format!("cross-arm leakage {db:.1} dB")))
}

fn ofdm_loopback() -> Result<(bool, String)> {
    let modem = OfdmModem::<f64>::new(OfdmConfig::default())?;
    let bits = prbs_generate(160 * 8, 3);
    let syms = qpsk_map(&bits.bits)?;
    let samples = modem.modulate(&syms)?;
    let est = modem.estimate(&samples)?;
    let rx = modem.demodulate(&samples, &est)?;
    let err = rx.iter().zip(&syms).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok((err < 1e-9, format!("max symbol error {err:.2e}")))
}

fn back_to_back() -> Result<(bool, String)> {
    let trx = Transceiver::new(SystemConfig::<f64>::default())?;
    let bits = prbs_generate(1280, 5);
    let seed = TrialSeed(9);
    let tx = trx.transmit(&bits, seed)?;
    let rx = trx.receive(&tx.field, seed)?;
    let again = trx.transmit(&bits, seed)?;
    let errors = count_errors(&tx.bits.bits, &rx.bits.bits);
    let same = again.field == tx.field;
    Ok((errors == 0 && same, format!("{errors} bit errors, repeatable = {same}")))
}

/// Runs every check; none takes more than a fraction of a second.
pub fn run_selftest() -> Vec<Check> {
    vec![
        check("link budget", link_budget),
        check("Q/BER reference pairs", q_ber_pairs),
        check("Gamma-Gamma mean irradiance", fading_mean),
        check("circular splitter isolation", cpbs_isolation),
        check("OFDM loopback", ofdm_loopback),
        check("back-to-back transceiver", back_to_back),
    ]
}
