//! Instance files: one JSON document, every number written as a decimal
//! string so a round trip through text is exact.

use std::collections::BTreeMap;
use std::path::Path;

use autobid_core::{Bidder, Instance, Query};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct BidderRecord {
    id: usize,
    target: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct QueryRecord {
    id: usize,
    values: BTreeMap<usize, String>,
    ctrs: BTreeMap<usize, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    bidders: Vec<BidderRecord>,
    queries: Vec<QueryRecord>,
}

/// Shortest decimal that parses back to the same value.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{what}: cannot parse {s:?}: {e}")))
}

pub fn instance_to_string(inst: &Instance) -> Result<String> {
    let n = inst.n_bidders();
    let record = InstanceRecord {
        bidders: inst
            .bidders()
            .iter()
            .map(|b| BidderRecord { id: b.id, target: format_number(b.target) })
            .collect(),
        queries: inst
            .queries()
            .iter()
            .map(|q| QueryRecord {
                id: q.id,
                values: (0..n).map(|i| (i, format_number(q.values[i]))).collect(),
                ctrs: (0..n).map(|i| (i, format_number(q.ctrs[i]))).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&record)?;
    s.push('\n');
    Ok(s)
}

pub fn instance_from_str(text: &str) -> Result<Instance> {
    let record: InstanceRecord = serde_json::from_str(text)?;
    let n = record.bidders.len();
    let bidders = record
        .bidders
        .iter()
        .map(|b| Ok(Bidder { id: b.id, target: parse_number(&b.target, &format!("bidder {} target", b.id))? }))
        .collect::<Result<Vec<_>>>()?;
    let column = |map: &BTreeMap<usize, String>, q: usize, what: &str| -> Result<Vec<f64>> {
        if map.len() != n || map.keys().any(|&k| k >= n) {
            return Err(CliError::Usage(format!("query {q}: {what} must cover bidders 0..{n}")));
        }
        map.values().map(|s| parse_number(s, &format!("query {q} {what}"))).collect()
    };
    let queries = record
        .queries
        .iter()
        .map(|q| Ok(Query { id: q.id, values: column(&q.values, q.id, "values")?, ctrs: column(&q.ctrs, q.id, "ctrs")? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(bidders, queries)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_str(&std::fs::read_to_string(path)?)
}
