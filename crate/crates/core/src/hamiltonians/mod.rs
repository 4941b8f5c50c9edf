//! Open spin chains used throughout the crate.
//!
//! * extended Haldane: `sum S_j.S_{j+1} + (j_aklt / 3) sum (S_j.S_{j+1})^2`
//!   with spin-1 bulk sites and spin-1/2 end sites. End bonds carry only the
//!   bilinear `S(1/2).S(1)` term; the biquadratic term acts on spin-1 pairs.
//!   At `j_aklt = 1` the bulk is the AKLT chain and the end spins pair up
//!   with the dangling bulk spin-1/2 degrees of freedom, leaving a unique
//!   ground state.
//! * anisotropic Haldane: `j sum S_j.S_{j+1} + d sum (S^z_j)^2
//!   + e sum ((S^x_j)^2 - (S^y_j)^2)` on spin-1 sites, with an optional
//!   field `-edge_field (S^z_1 + S^z_n)` on the two end sites.
//! * disordered Heisenberg: `j sum S_j.S_{j+1} + sum h_j S^z_j` on spin-1/2
//!   sites with `h_j` uniform in `[-h, h]`.
//! * J1-J2: `j1 sum S_j.S_{j+1} + j2 sum S_j.S_{j+2}` on spin-1/2 sites.

mod spin;
mod terms;

pub use spin::{exchange, SpinSite};
pub use terms::{Coupling, LocalTerms};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::MatrixProductOperator;
use crate::tensor::{c64, DenseTensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    ExtendedHaldane {
        j_aklt: f64,
    },
    AnisotropicHaldane {
        j: f64,
        d: f64,
        e: f64,
        #[serde(default)]
        edge_field: f64,
    },
    DisorderedHeisenberg {
        j: f64,
        h: f64,
        seed: u64,
        fields: Vec<f64>,
    },
    J1J2 {
        j1: f64,
        j2: f64,
    },
}

/// A fully specified Hamiltonian on an open chain of `n` sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    #[serde(flatten)]
    pub model: Model,
}

/// Random fields of one disorder sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    pub h: f64,
    pub fields: Vec<f64>,
}

impl DisorderRealization {
    /// Site `j` draws from its own ChaCha20 stream (stream id `j`) keyed by
    /// `seed`; the first 64-bit output `x` gives `u = (x >> 11) 2^-53` and
    /// `h_j = h (2u - 1)`.
    pub fn generate(n: usize, h: f64, seed: u64) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("disorder strength must be finite and non-negative, got {h}")));
        }
        let fields = (0..n)
            .map(|j| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(j as u64);
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                h * (2.0 * u - 1.0)
            })
            .collect();
        Ok(Self { seed, h, fields })
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("need at least {min} sites, got {n}")));
    }
    Ok(())
}

pub fn extended_haldane(n: usize, j_aklt: f64) -> Result<ModelSpec> {
    check_size(n, 3)?;
    check_finite("j_aklt", j_aklt)?;
    Ok(ModelSpec { n, model: Model::ExtendedHaldane { j_aklt } })
}

pub fn anisotropic_haldane(n: usize, j: f64, d: f64, e: f64) -> Result<ModelSpec> {
    anisotropic_haldane_pinned(n, j, d, e, 0.0)
}

/// [`anisotropic_haldane`] plus `-edge_field (S^z_1 + S^z_n)`.
///
/// In the Haldane phase an open chain has near-degenerate edge states whose
/// exact finite-size ground state entangles the two far ends. A weak field
/// selects one product configuration of the edge spins instead.
pub fn anisotropic_haldane_pinned(n: usize, j: f64, d: f64, e: f64, edge_field: f64) -> Result<ModelSpec> {
    check_size(n, 2)?;
    for (name, x) in [("j", j), ("d", d), ("e", e), ("edge_field", edge_field)] {
        check_finite(name, x)?;
    }
    Ok(ModelSpec { n, model: Model::AnisotropicHaldane { j, d, e, edge_field } })
}

pub fn disordered_heisenberg(n: usize, j: f64, h: f64, seed: u64) -> Result<(ModelSpec, DisorderRealization)> {
    check_size(n, 2)?;
    check_finite("j", j)?;
    let disorder = DisorderRealization::generate(n, h, seed)?;
    let spec = ModelSpec { n, model: Model::DisorderedHeisenberg { j, h, seed, fields: disorder.fields.clone() } };
    Ok((spec, disorder))
}

pub fn j1j2(n: usize, j1: f64, j2: f64) -> Result<ModelSpec> {
    check_size(n, 3)?;
    check_finite("j1", j1)?;
    check_finite("j2", j2)?;
    Ok(ModelSpec { n, model: Model::J1J2 { j1, j2 } })
}

impl ModelSpec {
    /// Re-validates a spec that did not come from one of the builders.
    pub fn validate(&self) -> Result<()> {
        match &self.model {
            Model::ExtendedHaldane { j_aklt } => extended_haldane(self.n, *j_aklt).map(|_| ()),
            Model::AnisotropicHaldane { j, d, e, edge_field } => {
                anisotropic_haldane_pinned(self.n, *j, *d, *e, *edge_field).map(|_| ())
            }
            Model::J1J2 { j1, j2 } => j1j2(self.n, *j1, *j2).map(|_| ()),
            Model::DisorderedHeisenberg { j, h, fields, .. } => {
                check_size(self.n, 2)?;
                check_finite("j", *j)?;
                if fields.len() != self.n {
                    return Err(Error::InvalidParameter(format!("{} fields for {} sites", fields.len(), self.n)));
                }
                if fields.iter().any(|f| !f.is_finite() || f.abs() > *h) {
                    return Err(Error::InvalidParameter("fields must lie in [-h, h]".into()));
                }
                Ok(())
            }
        }
    }

    pub fn sites(&self) -> Vec<SpinSite> {
        match self.model {
            Model::ExtendedHaldane { .. } => {
                (0..self.n).map(|k| if k == 0 || k + 1 == self.n { SpinSite::HALF } else { SpinSite::ONE }).collect()
            }
            Model::AnisotropicHaldane { .. } => vec![SpinSite::ONE; self.n],
            Model::DisorderedHeisenberg { .. } | Model::J1J2 { .. } => vec![SpinSite::HALF; self.n],
        }
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites().iter().map(SpinSite::dim).collect()
    }

    pub fn local_terms(&self) -> Result<LocalTerms> {
        self.validate()?;
        let sites = self.sites();
        let n = self.n;
        let mut terms = LocalTerms::new(sites.clone());
        let bond = |k: usize| exchange(sites[k], sites[k + 1]);
        match &self.model {
            Model::ExtendedHaldane { j_aklt } => {
                for k in 0..n - 1 {
                    let ss = bond(k);
                    let mut op = ss.clone();
                    if *j_aklt != 0.0 && sites[k] == SpinSite::ONE && sites[k + 1] == SpinSite::ONE {
                        op = op.add_scaled(&ss.matmul(&ss)?, c64(j_aklt / 3.0, 0.0))?;
                    }
                    terms.add_coupling(k, k + 1, op)?;
                }
            }
            Model::AnisotropicHaldane { j, d, e, edge_field } => {
                for k in 0..n - 1 {
                    terms.add_coupling(k, k + 1, bond(k).scale(c64(*j, 0.0)))?;
                }
                if *d != 0.0 || *e != 0.0 {
                    for (k, &s) in sites.iter().enumerate() {
                        let sq = |op: DenseTensor| op.matmul(&op).expect("square");
                        // (S^x)^2 - (S^y)^2 = ((S^+)^2 + (S^-)^2) / 2 keeps the matrix real
                        let ladder = sq(s.splus()).add_scaled(&sq(s.sminus()), c64(1.0, 0.0))?.scale(c64(0.5, 0.0));
                        terms.add_onsite(k, sq(s.sz()).scale(c64(*d, 0.0)).add_scaled(&ladder, c64(*e, 0.0))?)?;
                    }
                }
                if *edge_field != 0.0 {
                    for k in [0, n - 1] {
                        terms.add_onsite(k, sites[k].sz().scale(c64(-edge_field, 0.0)))?;
                    }
                }
            }
            Model::DisorderedHeisenberg { j, fields, .. } => {
                for k in 0..n - 1 {
                    terms.add_coupling(k, k + 1, bond(k).scale(c64(*j, 0.0)))?;
                }
                for (k, &h) in fields.iter().enumerate() {
                    if h != 0.0 {
                        terms.add_onsite(k, sites[k].sz().scale(c64(h, 0.0)))?;
                    }
                }
            }
            Model::J1J2 { j1, j2 } => {
                for k in 0..n - 1 {
                    terms.add_coupling(k, k + 1, bond(k).scale(c64(*j1, 0.0)))?;
                }
                if *j2 != 0.0 {
                    for k in 0..n - 2 {
                        terms.add_coupling(k, k + 2, exchange(sites[k], sites[k + 2]).scale(c64(*j2, 0.0)))?;
                    }
                }
            }
        }
        Ok(terms)
    }

    pub fn to_dense_matrix(&self) -> Result<DenseTensor> {
        self.local_terms()?.to_dense_matrix()
    }

    pub fn to_dense_matrix_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        self.local_terms()?.to_dense_matrix_with_cap(cap)
    }

    pub fn to_mpo(&self) -> Result<MatrixProductOperator> {
        self.local_terms()?.to_mpo()
    }

    pub fn conserves_sz(&self) -> Result<bool> {
        Ok(self.local_terms()?.conserves_sz())
    }
}

pub fn to_dense_matrix(spec: &ModelSpec) -> Result<DenseTensor> {
    spec.to_dense_matrix()
}

pub fn to_mpo(spec: &ModelSpec) -> Result<MatrixProductOperator> {
    spec.to_mpo()
}
