//! Machine-readable outputs: TSV tables and JSON reports, each carrying the
//! run configuration and a digest of the inputs that produced it.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::action::GroupAction;
use crate::builder::ModelPath;
use crate::distribution::{Distribution, DistributionError};
use crate::lattice::LatticeSpace;
use crate::maxent::{FitReport, MaxEntModel};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Provenance attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub run_config: Value,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new<C: Serialize>(config: &C, input_digest: String, timestamp: bool) -> Self {
        let timestamp = timestamp.then(|| {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("unix:{secs}")
        });
        Self {
            run_config: serde_json::to_value(config).expect("config serializes"),
            input_digest,
            timestamp,
        }
    }

    /// `#`-prefixed header lines for TSV files.
    pub fn tsv_header(&self) -> String {
        let mut out = format!(
            "# run_config: {}\n# input_digest: {}\n",
            self.run_config, self.input_digest
        );
        if let Some(t) = &self.timestamp {
            writeln!(out, "# timestamp: {t}").unwrap();
        }
        out
    }

    /// Merges the provenance fields into a JSON object.
    pub fn attach(&self, mut body: Value) -> Value {
        if let Value::Object(map) = &mut body {
            map.insert("run_config".into(), self.run_config.clone());
            map.insert("input_digest".into(), json!(self.input_digest));
            if let Some(t) = &self.timestamp {
                map.insert("timestamp".into(), json!(t));
            }
        }
        body
    }
}

/// SHA-256 over named inputs, each framed by its name and length.
pub fn digest_inputs<'a>(inputs: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in inputs {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn format_signature(sig: &[Rational]) -> String {
    sig.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Orbit table: id, size, representative, signature.
pub fn orbit_table_tsv(action: &GroupAction, signatures: Option<&[Vec<Rational>]>, prov: &Provenance) -> String {
    let mut out = prov.tsv_header();
    out.push_str("orbit\tsize\trepresentative\tsignature\n");
    let orbits = action.orbits();
    for o in 0..orbits.len() {
        let sig = signatures.map_or_else(String::new, |s| format_signature(&s[o]));
        writeln!(
            out,
            "{o}\t{}\t{}\t{sig}",
            orbits.size(o),
            action.space().format_point(orbits.representative(o))
        )
        .unwrap();
    }
    out
}

/// Counts table: index, point coordinates, count.
pub fn counts_tsv(space: &LatticeSpace, counts: &[u64], prov: &Provenance) -> String {
    let mut out = prov.tsv_header();
    out.push_str("index\tpoint\tcount\n");
    for (k, c) in counts.iter().enumerate() {
        writeln!(out, "{k}\t{}\t{c}", space.format_point(k)).unwrap();
    }
    out
}

/// Distribution table: index, probability.
pub fn distribution_tsv(p: &Distribution, prov: &Provenance) -> String {
    let mut out = prov.tsv_header();
    out.push_str("index\tprobability\n");
    for (k, v) in p.probs().iter().enumerate() {
        writeln!(out, "{k}\t{v:e}").unwrap();
    }
    out
}

/// Density dump: index, point coordinates, probability.
pub fn density_tsv(space: &LatticeSpace, p: &Distribution, prov: &Provenance) -> String {
    let mut out = prov.tsv_header();
    out.push_str("index\tpoint\tprobability\n");
    for (k, v) in p.probs().iter().enumerate() {
        writeln!(out, "{k}\t{}\t{v:e}", space.format_point(k)).unwrap();
    }
    out
}

/// Reads a distribution or counts table: `#` lines are skipped, the first
/// column is the index and the last column the value. A header whose last
/// column is `count` marks counts, which are normalized.
pub fn read_distribution_tsv(text: &str, expected_len: usize) -> Result<Distribution, ReportError> {
    let mut values = vec![None; expected_len];
    let mut counts = false;
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let err = |message: String| ReportError::Parse { line: line_no, message };
        if !header_seen && cols[0].trim().parse::<usize>().is_err() {
            header_seen = true;
            counts = cols.last().map(|c| c.trim()) == Some("count");
            continue;
        }
        header_seen = true;
        let k: usize = cols[0]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad index {:?}", cols[0])))?;
        if k >= expected_len {
            return Err(err(format!("index {k} outside 0..{expected_len}")));
        }
        let last = cols.last().expect("split yields a column").trim();
        let v: f64 = last.parse().map_err(|_| err(format!("bad value {last:?}")))?;
        if values[k].replace(v).is_some() {
            return Err(err(format!("index {k} repeated")));
        }
    }
    let missing = values.iter().position(Option::is_none);
    if let Some(k) = missing {
        return Err(ReportError::Parse {
            line: 0,
            message: format!("no value for index {k}"),
        });
    }
    let values: Vec<f64> = values.into_iter().map(Option::unwrap).collect();
    if counts {
        Ok(Distribution::from_weights(&values)?)
    } else {
        Ok(Distribution::new(values)?)
    }
}

/// Fit body: exponent lists, pool, coefficients and diagnostics.
pub fn fit_json(model: &MaxEntModel, report: &FitReport, pool: &str, prov: &Provenance) -> Value {
    let a: Vec<Value> = model
        .terms
        .iter()
        .map(|t| json!({ "pool": t.pool, "exponents": t.index, "term": t.pretty() }))
        .collect();
    prov.attach(json!({
        "A": a,
        "pool": pool,
        "lambda": model.lambda,
        "psi": model.psi,
        "kl": report.kl_to_target,
        "entropy": report.entropy,
        "residual": report.residual_inf,
        "iterations": report.iterations,
        "moments": report.moments,
    }))
}

/// One row per step: l, term, pool, D_l, H_l, residual, iterations.
pub fn path_tsv(path: &ModelPath, prov: &Provenance) -> String {
    let mut out = prov.tsv_header();
    writeln!(out, "# terminal: {}", serde_json::to_value(path.terminal).unwrap().as_str().unwrap()).unwrap();
    out.push_str("l\tterm\tpool\tkl\tentropy\tresidual\titerations\n");
    for s in &path.steps {
        let (term, pool) = match &s.added {
            Some(t) => (t.tuple_notation(), t.pool.symbol()),
            None => ("1".to_string(), "-"),
        };
        writeln!(
            out,
            "{}\t{term}\t{pool}\t{:e}\t{:.12}\t{:e}\t{}",
            s.l, s.kl, s.entropy, s.residual, s.iterations
        )
        .unwrap();
    }
    out
}

pub fn path_json(path: &ModelPath, prov: &Provenance) -> Value {
    let steps: Vec<Value> = path
        .steps
        .iter()
        .map(|s| {
            json!({
                "l": s.l,
                "added": s.added.as_ref().map(|t| t.tuple_notation()),
                "kl": s.kl,
                "kl_symmetrized": s.kl_symmetrized,
                "entropy": s.entropy,
                "residual": s.residual,
                "iterations": s.iterations,
                "depth": s.depth.map(|d| d.to_string()),
                "candidates": s.candidates,
                "fit": {
                    "A": s.model.terms.iter().map(|t| t.tuple_notation()).collect::<Vec<_>>(),
                    "lambda": s.model.lambda,
                    "psi": s.model.psi,
                },
            })
        })
        .collect();
    prov.attach(json!({
        "pool": path.pool,
        "terminal": path.terminal,
        "note": path.note,
        "steps": steps,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance::new(&json!({"command": "test"}), digest_inputs([("a", b"x".as_slice())]), false)
    }

    #[test]
    fn digest_is_framed() {
        let a = digest_inputs([("a", b"bc".as_slice())]);
        let b = digest_inputs([("ab", b"c".as_slice())]);
        assert_ne!(a, b);
        assert!(a.starts_with("sha256:") && a.len() == 7 + 64);
    }

    #[test]
    fn distribution_roundtrip() {
        let p = Distribution::from_weights(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = distribution_tsv(&p, &prov());
        assert!(text.starts_with("# run_config: {\"command\":\"test\"}"));
        let back = read_distribution_tsv(&text, 4).unwrap();
        assert_eq!(back, p);
        assert!(read_distribution_tsv(&text, 5).is_err());
    }

    #[test]
    fn counts_are_normalized() {
        let space = LatticeSpace::centered_grid(2, 1).unwrap();
        let text = counts_tsv(&space, &[1, 3], &prov());
        let p = read_distribution_tsv(&text, 2).unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn no_timestamp_by_request() {
        let p = prov();
        assert!(!p.tsv_header().contains("timestamp"));
        let with = Provenance::new(&json!({}), String::new(), true);
        assert!(with.attach(json!({})).get("timestamp").is_some());
    }
}
