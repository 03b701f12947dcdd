//! Result files and console tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{OutputFormat, RunConfig};
use super::sweep::SweepResults;
use crate::channel::{channel_report, ChannelReport};
use crate::error::{Error, Result};
use crate::metrics::{export_constellation, export_eye, MetricsRecord};
use crate::ofdm::subcarrier_table;

/// Formats `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..6).contains(&mag) {
        format!("{:.*}", (5 - mag) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// File stem for one cell, e.g. `light_rain_3km`.
pub fn cell_stem(label: &str, distance_km: f64) -> String {
    format!("{}_{}km", slug(label), distance_km)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Link budget rows for every cell in the configuration.
pub fn budget_reports(cfg: &RunConfig) -> Result<Vec<ChannelReport<f64>>> {
    let tx = cfg.system.launch_power_dbm();
    let mut out = Vec::new();
    for s in &cfg.scenarios {
        for &d in &cfg.distances_km {
            out.push(channel_report(&s.channel(d)?, tx)?);
        }
    }
    Ok(out)
}

pub fn format_budget_table(rows: &[ChannelReport<f64>]) -> String {
    let mut s = format!(
        "{:<16} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "condition", "d_km", "L_G_dB", "atten_dB", "rx_dBm", "rytov", "scint_idx"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<16} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            r.condition,
            r.distance_km,
            sig6(r.geometric_loss_db),
            sig6(r.attenuation_db),
            sig6(r.expected_rx_power_dbm),
            sig6(r.rytov_variance),
            sig6(r.scintillation_index),
        ));
    }
    s
}

/// Console table; `floor` is the smallest BER the cell could resolve.
pub fn format_results_table(records: &[MetricsRecord]) -> String {
    let mut s = format!(
        "{:<16} {:>6} {:>13} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "condition", "d_km", "BER", "floor", "Q", "OSNR_dB", "EVM_%", "rx_dBm"
    );
    for r in records {
        let ber = if r.n_errors == 0 {
            format!("<{}", sig6(r.ber_floor))
        } else {
            sig6(r.ber)
        };
        let q = if r.q_is_bound {
            format!(">{}", sig6(r.q_linear))
        } else {
            sig6(r.q_linear)
        };
        s.push_str(&format!(
            "{:<16} {:>6} {:>13} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            r.condition,
            r.distance_km,
            ber,
            sig6(r.ber_floor),
            q,
            sig6(r.osnr_db),
            sig6(r.evm_pct),
            sig6(r.rx_power_dbm),
        ));
    }
    s
}

fn write_results_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    write_file(path, |out| {
        writeln!(out, "condition,distance_km,ber,q_linear,osnr_db,evm_pct,n_bits,seed")?;
        for r in records {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e},{},{}",
                csv_field(&r.condition),
                r.distance_km,
                r.ber,
                r.q_linear,
                r.osnr_db,
                r.evm_pct,
                r.n_bits,
                r.seed
            )?;
        }
        Ok(())
    })
}

fn write_detail_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    write_file(path, |out| {
        writeln!(
            out,
            "condition,distance_km,ber,ber_std_err,ber_floor,n_errors,n_bits,q_linear,q_is_bound,\
             osnr_db,osnr_saturated,evm_pct,rx_power_dbm,expected_rx_power_dbm,seed"
        )?;
        for r in records {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{},{},{:e},{},{:e},{},{:e},{:e},{:e},{}",
                csv_field(&r.condition),
                r.distance_km,
                r.ber,
                r.ber_std_err,
                r.ber_floor,
                r.n_errors,
                r.n_bits,
                r.q_linear,
                r.q_is_bound,
                r.osnr_db,
                r.osnr_saturated,
                r.evm_pct,
                r.rx_power_dbm,
                r.expected_rx_power_dbm,
                r.seed
            )?;
        }
        Ok(())
    })
}

fn write_vs_distance(
    path: &Path,
    header: &str,
    records: &[MetricsRecord],
    f: impl Fn(&MetricsRecord) -> String,
) -> Result<()> {
    write_file(path, |out| {
        writeln!(out, "condition,distance_km,{header}")?;
        for r in records {
            writeln!(out, "{},{},{}", csv_field(&r.condition), r.distance_km, f(r))?;
        }
        Ok(())
    })
}

fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    write_file(path, |out| writeln!(out, "{text}"))
}

/// Writes every result file into `dir` and returns their paths in write order.
pub fn emit_outputs(results: &SweepResults, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut push = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    let recs = &results.records;
    match cfg.format {
        OutputFormat::Csv => write_results_csv(&push("results.csv"), recs)?,
        OutputFormat::Json => write_json(&push("results.json"), recs)?,
    }
    write_detail_csv(&push("cells_detail.csv"), recs)?;
    write_vs_distance(
        &push("power_vs_distance.csv"),
        "rx_power_dbm,expected_rx_power_dbm",
        recs,
        |r| format!("{:e},{:e}", r.rx_power_dbm, r.expected_rx_power_dbm),
    )?;
    write_vs_distance(&push("osnr_vs_distance.csv"), "osnr_db,osnr_saturated", recs, |r| {
        format!("{:e},{}", r.osnr_db, r.osnr_saturated)
    })?;

    let table = subcarrier_table(&cfg.system.ofdm)?;
    let map_path = push("subcarrier_map.txt");
    write_file(&map_path, |out| out.write_all(table.as_bytes()))?;

    for (r, a) in recs.iter().zip(&results.artifacts) {
        let stem = cell_stem(&r.condition, r.distance_km);
        export_constellation(&a.constellation, &push(&format!("constellation_{stem}.csv")))?;
        export_eye(
            &a.eye,
            cfg.metrics.eye_samples_per_symbol,
            &push(&format!("eye_{stem}.csv")),
        )?;
    }

    write_json(&push("metadata.json"), &results.metadata)?;
    Ok(written)
}
