//! The four subcommands, as functions from configuration to output text.

use std::fs;
use std::path::Path;

use cyclic_caching::delivery::verify_plan;
use cyclic_caching::params::{complexity_order, complexity_report};
use cyclic_caching::simulator::simulate;
use cyclic_caching::{build_scheme, Scheme};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::planfile::{parse_plan, write_plan};

pub const CSV_HEADER: [&str; 12] = [
    "scheme",
    "beamformer",
    "K",
    "t",
    "L",
    "alpha",
    "K_f",
    "snr_db",
    "mean_rate_nats",
    "std_err",
    "draws",
    "seed",
];

/// Plan file text for the configured LIN or RED scheme.
pub fn plan(config: &RunConfig) -> Result<String, CliError> {
    let params = config.params()?;
    let scheme = config.scheme_or(Scheme::Lin);
    let plan = build_scheme(&params, scheme)?;
    Ok(write_plan(&plan, scheme))
}

/// Outcome of checking a plan file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub passed: bool,
    /// One line per violation, prefixed by the file line it points at.
    pub messages: Vec<String>,
    pub summary: String,
}

pub fn verify_text(text: &str) -> Result<VerifyReport, CliError> {
    let parsed = parse_plan(text)?;
    let report = verify_plan(&parsed.plan);
    let messages = report
        .violations
        .iter()
        .map(|v| {
            let line = v.location().and_then(|(tx, position)| {
                parsed
                    .stream_lines
                    .get(&(tx, position))
                    .or_else(|| parsed.transmission_lines.get(tx))
            });
            match line {
                Some(line) => format!("line {line}: {v}"),
                None => format!("plan: {v}"),
            }
        })
        .collect();
    Ok(VerifyReport {
        passed: report.passed(),
        messages,
        summary: format!(
            "{} plan: {} transmissions, {} streams, {} (user, packet) pairs covered",
            parsed.scheme,
            parsed.plan.transmissions.len(),
            report.streams_checked,
            report.pairs_covered
        ),
    })
}

pub fn verify(path: &Path) -> Result<VerifyReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    verify_text(&text)
}

/// Complexity table, as aligned text or CSV. With `orders`, the growth orders
/// for fixed (or, with `t_scales`, proportional) caching gain are appended.
pub fn complexity(
    config: &RunConfig,
    csv: bool,
    orders: bool,
    t_scales: bool,
) -> Result<String, CliError> {
    let params = config.params()?;
    let mut rows: Vec<Vec<String>> = vec![{
        let mut h = vec![
            "scheme".to_string(),
            "subpacketization".into(),
            "transmissions".into(),
        ];
        if orders {
            h.extend([
                "subpacketization_order".into(),
                "transmissions_order".into(),
            ]);
        }
        h
    }];
    for scheme in Scheme::ALL {
        let report = complexity_report(&params, scheme);
        let mut row = vec![
            scheme.to_string(),
            report.subpacketization.to_string(),
            report.transmissions.to_string(),
        ];
        if orders {
            let order = complexity_order(scheme, t_scales);
            row.extend([order.subpacketization.into(), order.transmissions.into()]);
        }
        rows.push(row);
    }
    if csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &rows {
            w.write_record(row)
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        return Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"));
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!(
        "K={} t={} L={} alpha={} K_f={} phi={}\n",
        params.users,
        params.caching_gain,
        params.antennas,
        params.multiplexing,
        params.phantoms,
        params.phi()
    );
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Rate sweep as CSV text, one row per SNR point.
pub fn simulate_csv(config: &RunConfig) -> Result<String, CliError> {
    let sim = config.sim_config()?;
    let points = simulate::<f64>(&sim)?;
    let p = &sim.params;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Validation(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for point in &points {
        w.write_record([
            sim.scheme.to_string(),
            sim.beamformer.to_string(),
            p.users.to_string(),
            p.caching_gain.to_string(),
            p.antennas.to_string(),
            p.multiplexing.to_string(),
            p.phantoms.to_string(),
            point.snr_db.to_string(),
            point.mean_rate.to_string(),
            point.std_err.to_string(),
            sim.draws.to_string(),
            sim.seed.to_string(),
        ])
        .map_err(io)?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"))
}
