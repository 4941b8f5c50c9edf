//! Output records and their on-disk forms.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// One measured value. Model parameters not used by the experiment are
/// left empty so every experiment shares the same CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub n: usize,
    pub j_aklt: Option<f64>,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub j: Option<f64>,
    pub d: Option<f64>,
    pub e: Option<f64>,
    pub h: Option<f64>,
    /// Bond dimension of `value`, or the lower one of a difference.
    pub chi: usize,
    /// Upper bond dimension when `value` is `E_chi - E_chi_hi`.
    pub chi_hi: Option<usize>,
    pub sample: Option<usize>,
    pub sample_seed: Option<u64>,
    pub eigenstate: Option<usize>,
    pub mu: Option<f64>,
    pub energy: f64,
    pub value: f64,
    /// Unclamped difference, for differences only.
    pub raw: Option<f64>,
    /// `E_chi` and `E_chi_hi` behind a difference.
    pub value_lo: Option<f64>,
    pub value_hi: Option<f64>,
    /// Squared overlap with the best approximation (single values only).
    pub fidelity: Option<f64>,
    pub converged: bool,
    pub config_hash: String,
}

impl Record {
    pub fn new(experiment: &str, n: usize, chi: usize, energy: f64, value: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            j_aklt: None,
            j1: None,
            j2: None,
            j: None,
            d: None,
            e: None,
            h: None,
            chi,
            chi_hi: None,
            sample: None,
            sample_seed: None,
            eigenstate: None,
            mu: None,
            energy,
            value,
            raw: None,
            value_lo: None,
            value_hi: None,
            fidelity: None,
            converged: true,
            config_hash: String::new(),
        }
    }
}

/// Disorder average of one `(n, h, chi, chi_hi)` group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub n: usize,
    pub h: f64,
    pub chi: usize,
    pub chi_hi: usize,
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
    pub mean_lo: f64,
    pub mean_hi: f64,
    pub config_hash: String,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups difference records by `(n, h, chi, chi_hi)` in ascending order.
pub fn summarize(records: &[Record]) -> Vec<Summary> {
    let mut groups: BTreeMap<(usize, u64, usize, usize), Vec<&Record>> = BTreeMap::new();
    for r in records {
        if let (Some(h), Some(hi)) = (r.h, r.chi_hi) {
            // h >= 0, so the bit pattern orders like the value
            groups.entry((r.n, h.to_bits(), r.chi, hi)).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|((n, h, chi, chi_hi), rs)| {
            let pick = |f: fn(&Record) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (mean, stderr) = mean_and_stderr(&pick(|r| r.value));
            Summary {
                experiment: rs[0].experiment.clone(),
                n,
                h: f64::from_bits(h),
                chi,
                chi_hi,
                count: rs.len(),
                mean,
                stderr,
                mean_lo: mean_and_stderr(&pick(|r| r.value_lo.unwrap_or(f64::NAN))).0,
                mean_hi: mean_and_stderr(&pick(|r| r.value_hi.unwrap_or(f64::NAN))).0,
                config_hash: rs[0].config_hash.clone(),
            }
        })
        .collect()
}

/// Writes `items` as newline-delimited JSON.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

pub fn write_csv<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for item in items {
        w.serialize(item)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
    write_atomic(path, &bytes)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

/// Writes through a temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("moving {} into place", path.display()))
}
