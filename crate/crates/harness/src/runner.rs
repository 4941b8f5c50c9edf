//! Parallel execution, the resume journal and final output files.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::experiments::{plan, run_task};
use crate::records::{summarize, write_atomic, write_csv, write_jsonl, Record};

pub const OUT_DIR_ENV: &str = "GECHI_OUT_DIR";
pub const JOURNAL: &str = "records.partial.jsonl";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Reuse tasks already present in the journal.
    pub resume: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub tasks: usize,
    pub resumed: usize,
    pub records: usize,
}

/// Output directory: the explicit flag, then `GECHI_OUT_DIR`, then the
/// config, then `results/<experiment>`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("results").join(cfg.experiment.name()))
}

#[derive(Serialize, Deserialize)]
struct JournalHeader {
    experiment: ExperimentKind,
    config_hash: String,
}

#[derive(Serialize, Deserialize)]
struct JournalEntry {
    task: String,
    records: Vec<Record>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config_hash: &'a str,
    seed: u64,
    version: &'a str,
    tasks: usize,
    records: usize,
    files: BTreeMap<&'a str, String>,
    config: &'a ExperimentConfig,
}

/// Completed tasks of a previous run. A journal written for a different
/// config is an error rather than silently discarded.
fn read_journal(path: &Path, hash: &str) -> Result<HashMap<String, Vec<Record>>> {
    let mut done = HashMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut lines = reader.lines();
    let header: JournalHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?).context("journal header")?,
        None => return Ok(done),
    };
    if header.config_hash != hash {
        bail!(
            "{} belongs to a different config (hash {}); remove it or run without --resume",
            path.display(),
            header.config_hash
        );
    }
    for line in lines {
        let line = line?;
        // a torn final line from an interrupted write is dropped
        if let Ok(entry) = serde_json::from_str::<JournalEntry>(&line) {
            done.insert(entry.task, entry.records);
        }
    }
    Ok(done)
}

fn file_digest(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

/// Runs every task of `cfg` and writes `records.jsonl`, `records.csv`,
/// `manifest.json` and, for `mbl_scan`, `summary.jsonl` / `summary.csv`.
/// Records are ordered by task, so the files do not depend on the worker
/// count or on scheduling. If a task fails the remaining tasks still run,
/// the journal keeps every completed task and an error is returned.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate().map_err(|e| anyhow!("invalid config: {e}"))?;
    let hash = cfg.hash();
    let out = &opts.out_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let journal_path = out.join(JOURNAL);
    let mut done = if opts.resume { read_journal(&journal_path, &hash)? } else { HashMap::new() };
    let tasks = plan(cfg);
    done.retain(|key, _| tasks.iter().any(|t| &t.key == key));
    let resumed = done.len();

    // rewritten rather than appended so a torn last line cannot swallow the
    // next entry
    let mut text = serde_json::to_vec(&JournalHeader { experiment: cfg.experiment, config_hash: hash.clone() })?;
    text.push(b'\n');
    for task in tasks.iter().filter(|t| done.contains_key(&t.key)) {
        serde_json::to_writer(&mut text, &JournalEntry { task: task.key.clone(), records: done[&task.key].clone() })?;
        text.push(b'\n');
    }
    write_atomic(&journal_path, &text)?;
    let mut journal = OpenOptions::new().append(true).open(&journal_path)?;

    let pending: Vec<_> = tasks.iter().filter(|t| !done.contains_key(&t.key)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build()?;
    let (tx, rx) = mpsc::channel();
    let mut failures = Vec::new();
    std::thread::scope(|scope| -> Result<()> {
        let worker = scope.spawn(|| {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, task| {
                    let result = run_task(cfg, &hash, task).map_err(|e| format!("{}: {e:#}", task.key));
                    // the receiver only goes away if writing failed
                    let _ = tx.send((task.key.clone(), result));
                });
            })
        });
        // single writer: every finished task becomes one journal line
        for (key, result) in rx {
            match result {
                Ok(records) => {
                    serde_json::to_writer(&mut journal, &JournalEntry { task: key, records })?;
                    journal.write_all(b"\n")?;
                    journal.flush()?;
                }
                Err(message) => failures.push(message),
            }
        }
        worker.join().map_err(|_| anyhow!("worker pool panicked"))?;
        Ok(())
    })?;
    journal.sync_all()?;
    drop(journal);
    if !failures.is_empty() {
        failures.sort();
        bail!(
            "{} of {} tasks failed; completed tasks are kept in {} for --resume:\n  {}",
            failures.len(),
            tasks.len(),
            journal_path.display(),
            failures.join("\n  ")
        );
    }

    // the journal now holds every task; rebuild in canonical order from it
    let mut all = read_journal(&journal_path, &hash)?;
    let mut records = Vec::new();
    for task in &tasks {
        let recs = all.remove(&task.key).ok_or_else(|| anyhow!("task {} missing from the journal", task.key))?;
        records.extend(recs);
    }

    let mut files = BTreeMap::new();
    write_jsonl(&out.join("records.jsonl"), &records)?;
    write_csv(&out.join("records.csv"), &records)?;
    files.insert("records.jsonl", file_digest(&out.join("records.jsonl"))?);
    files.insert("records.csv", file_digest(&out.join("records.csv"))?);
    if cfg.experiment == ExperimentKind::MblScan {
        let summary = summarize(&records);
        write_jsonl(&out.join("summary.jsonl"), &summary)?;
        write_csv(&out.join("summary.csv"), &summary)?;
        files.insert("summary.jsonl", file_digest(&out.join("summary.jsonl"))?);
        files.insert("summary.csv", file_digest(&out.join("summary.csv"))?);
    }
    let manifest = Manifest {
        experiment: cfg.experiment.name(),
        config_hash: &hash,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        tasks: tasks.len(),
        records: records.len(),
        files,
        config: cfg,
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    write_atomic(&out.join("manifest.json"), &text)?;
    std::fs::remove_file(&journal_path)?;
    Ok(RunSummary { out_dir: out.clone(), tasks: tasks.len(), resumed, records: records.len() })
}
