//! Experiment definitions: how a config expands into independent tasks and
//! what each task measures.

use anyhow::{Context, Result};
use gechi_core::hamiltonians::{anisotropic_haldane_pinned, disordered_heisenberg, extended_haldane, j1j2, ModelSpec};
use gechi_core::measures::{ge_profile_with, relative_from, GeOptions};
use gechi_core::solvers::{dmrg_ground_state, sector_spectrum_with_cap, DmrgConfig};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::records::Record;

/// SplitMix64 output function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds `parts` into `seed`, one SplitMix64 round per part.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed of disorder sample `sample` at chain length `n`. It does not depend
/// on the disorder strength, so every `h` sees the same uniform draws.
pub fn sample_seed(seed: u64, n: usize, sample: usize) -> u64 {
    derive_seed(seed, &[n as u64, sample as u64])
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Aklt { j_aklt: f64 },
    Mg { j1: f64, j2: f64 },
    Haldane { j: f64, d: f64, e: f64, edge_field: f64 },
    Disorder { j: f64, h: f64, sample: usize },
}

/// One unit of work: a ground state or a disorder sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    /// Position in the canonical record order.
    pub index: usize,
    /// Stable identifier used by the resume journal.
    pub key: String,
    pub n: usize,
    pub params: Params,
}

/// Expands a config into tasks: sizes outermost, then grid values in
/// config order, then samples.
pub fn plan(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    let mut push = |n: usize, key: String, params: Params| {
        out.push(Task { index: out.len(), key: format!("n={n},{key}"), n, params });
    };
    for &n in &cfg.sizes {
        match cfg.experiment {
            ExperimentKind::AkltSweep => {
                let s = cfg.aklt_sweep.as_ref().expect("validated");
                for j_aklt in s.j_aklt.values() {
                    push(n, format!("j_aklt={j_aklt:?}"), Params::Aklt { j_aklt });
                }
            }
            ExperimentKind::MgSweep => {
                let s = cfg.mg_sweep.as_ref().expect("validated");
                for j2 in s.j2.values() {
                    push(n, format!("j2={j2:?}"), Params::Mg { j1: s.j1, j2 });
                }
            }
            ExperimentKind::HaldaneGrid => {
                let s = cfg.haldane_grid.as_ref().expect("validated");
                for d in s.d.values() {
                    for e in s.e.values() {
                        push(n, format!("d={d:?},e={e:?}"), Params::Haldane { j: s.j, d, e, edge_field: s.edge_field });
                    }
                }
            }
            ExperimentKind::MblScan | ExperimentKind::MblScatter => {
                let s = cfg.mbl.as_ref().expect("validated");
                for h in s.h.values() {
                    for sample in 0..s.samples {
                        push(n, format!("h={h:?},sample={sample}"), Params::Disorder { j: s.j, h, sample });
                    }
                }
            }
        }
    }
    out
}

fn ground_state_records(
    cfg: &ExperimentConfig,
    hash: &str,
    task: &Task,
    spec: &ModelSpec,
    seed_parts: &[u64],
) -> Result<Vec<Record>> {
    let solver = DmrgConfig { seed: derive_seed(cfg.seed, seed_parts), ..cfg.solver.clone() };
    let mpo = spec.to_mpo()?;
    let ground = dmrg_ground_state(&mpo, &solver).with_context(|| format!("DMRG failed for {}", task.key))?;
    let opts = GeOptions { refine_sweeps: cfg.refine_sweeps };
    let profile = ge_profile_with(&ground.state, &cfg.chi_list, &opts)?;
    Ok(profile
        .into_iter()
        .map(|r| {
            let mut rec = Record::new(cfg.experiment.name(), task.n, r.chi, ground.energy, r.value);
            rec.fidelity = Some(r.fidelity);
            rec.converged = ground.report.converged;
            rec.config_hash = hash.to_string();
            match task.params {
                Params::Aklt { j_aklt } => rec.j_aklt = Some(j_aklt),
                Params::Mg { j1, j2 } => {
                    rec.j1 = Some(j1);
                    rec.j2 = Some(j2);
                }
                Params::Haldane { j, d, e, .. } => {
                    rec.j = Some(j);
                    rec.d = Some(d);
                    rec.e = Some(e);
                }
                Params::Disorder { .. } => unreachable!("disorder tasks have no ground state"),
            }
            rec
        })
        .collect())
}

fn disorder_records(
    cfg: &ExperimentConfig,
    hash: &str,
    task: &Task,
    j: f64,
    h: f64,
    sample: usize,
) -> Result<Vec<Record>> {
    let mbl = cfg.mbl.as_ref().expect("validated");
    let seed = sample_seed(cfg.seed, task.n, sample);
    let (spec, _) = disordered_heisenberg(task.n, j, h, seed)?;
    let spectrum = sector_spectrum_with_cap(&spec.local_terms()?, mbl.dense_cap)?;
    let opts = GeOptions { refine_sweeps: cfg.refine_sweeps };
    let mut out = Vec::new();
    for (rank, (idx, psi)) in
        spectrum.mid_spectrum_in(mbl.eigenstates_per_sample, mbl.sector.twice_sz())?.into_iter().enumerate()
    {
        let profile = ge_profile_with(&psi, &cfg.chi_list, &opts)?;
        let base = |chi: usize, value: f64| {
            let mut rec = Record::new(cfg.experiment.name(), task.n, chi, spectrum.energies[idx], value);
            rec.j = Some(j);
            rec.h = Some(h);
            rec.sample = Some(sample);
            rec.sample_seed = Some(seed);
            rec.eigenstate = Some(rank);
            rec.mu = Some(spectrum.mu[idx]);
            rec.config_hash = hash.to_string();
            rec
        };
        if cfg.experiment == ExperimentKind::MblScan {
            for hi in &profile[1..] {
                let rel = relative_from(&profile[0], hi);
                let mut rec = base(rel.chi_lo, rel.value);
                rec.chi_hi = Some(rel.chi_hi);
                rec.raw = Some(rel.raw);
                rec.value_lo = Some(profile[0].value);
                rec.value_hi = Some(hi.value);
                out.push(rec);
            }
        } else {
            for r in &profile {
                let mut rec = base(r.chi, r.value);
                rec.fidelity = Some(r.fidelity);
                out.push(rec);
            }
        }
    }
    Ok(out)
}

/// Records of one task, in canonical order.
pub fn run_task(cfg: &ExperimentConfig, hash: &str, task: &Task) -> Result<Vec<Record>> {
    let n = task.n;
    match task.params {
        Params::Aklt { j_aklt } => {
            ground_state_records(cfg, hash, task, &extended_haldane(n, j_aklt)?, &[n as u64, j_aklt.to_bits()])
        }
        Params::Mg { j1, j2 } => {
            ground_state_records(cfg, hash, task, &j1j2(n, j1, j2)?, &[n as u64, j1.to_bits(), j2.to_bits()])
        }
        Params::Haldane { j, d, e, edge_field } => {
            let spec = anisotropic_haldane_pinned(n, j, d, e, edge_field)?;
            ground_state_records(cfg, hash, task, &spec, &[n as u64, j.to_bits(), d.to_bits(), e.to_bits()])
        }
        Params::Disorder { j, h, sample } => disorder_records(cfg, hash, task, j, h, sample),
    }
}
