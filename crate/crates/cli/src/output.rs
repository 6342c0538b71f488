use serde::Serialize;

use crate::commands::{LpOutput, SweepRow};
use crate::config::ExperimentConfig;
use crate::error::Result;

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub fn json<T: Serialize>(config: &ExperimentConfig, result: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { config, result })?;
    s.push('\n');
    Ok(s)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const SWEEP_HEADER: [&str; 5] = ["alpha", "p", "instance_id", "converged", "ratio"];

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_float(r.alpha),
            fmt_float(r.p),
            r.instance_id.to_string(),
            r.converged.to_string(),
            fmt_float(r.ratio),
        ])?;
    }
    finish(w)
}

pub fn lp_csv(out: &LpOutput) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "alpha", "p", "z", "x1", "x2", "x3", "x4", "dual_gamma", "beta", "delta", "gap", "feasible", "poa_bound",
        "certified",
    ])?;
    let mut row: Vec<String> = [out.alpha, out.p, out.lp.z].iter().map(|&v| fmt_float(v)).collect();
    row.extend(out.lp.x.iter().map(|&v| fmt_float(v)));
    row.extend([out.lp.dual.gamma, out.lp.dual.beta, out.lp.dual.delta, out.lp.gap].map(fmt_float));
    row.push(out.certificate.feasible.to_string());
    row.push(fmt_float(out.poa_bound));
    row.push(out.certified.to_string());
    w.write_record(&row)?;
    finish(w)
}
