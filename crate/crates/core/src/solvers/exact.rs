//! Full diagonalization of small Hamiltonians and mid-spectrum selection.

use crate::error::{Error, Result};
use crate::hamiltonians::LocalTerms;
use crate::mps::{DenseState, DEFAULT_MAX_DENSE_STATES};
use crate::tensor::{eigh, DenseTensor, C64};

/// Absolute hermiticity tolerance, relative to the largest matrix entry.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Ascending.
    pub energies: Vec<f64>,
    pub states: Vec<DenseState>,
    /// `(E - E_min) / (E_max - E_min)`, zero for a flat spectrum.
    pub mu: Vec<f64>,
}

pub fn relative_energies(energies: &[f64]) -> Vec<f64> {
    let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    energies.iter().map(|&e| if width > 0.0 { ((e - lo) / width).clamp(0.0, 1.0) } else { 0.0 }).collect()
}

fn check_hermitian(h: &DenseTensor) -> Result<()> {
    let defect = h.hermiticity_defect()?;
    let scale = h.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    if defect > HERMITICITY_TOL * scale {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

fn column_state(vecs: &DenseTensor, col: usize, site_dims: &[usize]) -> Result<DenseState> {
    let rows = vecs.dims()[0];
    DenseState::new(site_dims.to_vec(), (0..rows).map(|i| vecs.at(i, col)).collect())
}

/// All eigenpairs of a Hermitian matrix acting on a chain with the given
/// local dimensions.
pub fn exact_spectrum(h: &DenseTensor, site_dims: &[usize]) -> Result<EigenSolution> {
    check_hermitian(h)?;
    let dim: usize = site_dims.iter().product();
    if h.dims() != [dim, dim] {
        return Err(Error::InvalidShape(format!("{:?} matrix for local dims {site_dims:?}", h.dims())));
    }
    let (energies, vecs) = eigh(h)?;
    let states = (0..dim).map(|c| column_state(&vecs, c, site_dims)).collect::<Result<Vec<_>>>()?;
    let mu = relative_energies(&energies);
    Ok(EigenSolution { energies, states, mu })
}

/// Indices of the `k` entries with `mu` closest to 1/2, ties resolved toward
/// lower energy, returned in order of increasing `mu`.
pub fn mid_spectrum_indices(energies: &[f64], mu: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > energies.len() {
        return Err(Error::InvalidParameter(format!("cannot select {k} of {} states", energies.len())));
    }
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&i, &j| {
        (mu[i] - 0.5).abs().total_cmp(&(mu[j] - 0.5).abs()).then(energies[i].total_cmp(&energies[j])).then(i.cmp(&j))
    });
    order.truncate(k);
    order.sort_by(|&i, &j| mu[i].total_cmp(&mu[j]).then(energies[i].total_cmp(&energies[j])).then(i.cmp(&j)));
    Ok(order)
}

pub fn mid_spectrum(sol: &EigenSolution, k: usize) -> Result<Vec<DenseState>> {
    Ok(mid_spectrum_indices(&sol.energies, &sol.mu, k)?.into_iter().map(|i| sol.states[i].clone()).collect())
}

/// Spectrum of a magnetization-conserving Hamiltonian obtained block by
/// block. Eigenvectors stay in their blocks until requested.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    site_dims: Vec<usize>,
    dim: usize,
    /// Ascending.
    pub energies: Vec<f64>,
    pub mu: Vec<f64>,
    /// `(block, column)` of each entry of `energies`.
    location: Vec<(usize, usize)>,
    /// `(2 S^z_total, basis, eigenvectors)` per block.
    blocks: Vec<(i32, Vec<usize>, DenseTensor)>,
}

impl SectorSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Eigenvector `index` as a full product-basis state.
    pub fn state(&self, index: usize) -> Result<DenseState> {
        let &(b, col) = self
            .location
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no eigenstate {index} among {}", self.len())))?;
        let (_, basis, vecs) = &self.blocks[b];
        let mut amps = vec![C64::new(0.0, 0.0); self.dim];
        for (row, &full) in basis.iter().enumerate() {
            amps[full] = vecs.at(row, col);
        }
        DenseState::new(self.site_dims.clone(), amps)
    }

    /// `2 S^z_total` of eigenstate `index`.
    pub fn twice_sz(&self, index: usize) -> Option<i32> {
        self.location.get(index).map(|&(b, _)| self.blocks[b].0)
    }

    /// The `k` eigenstates closest to the middle of the spectrum, as
    /// `(index, state)` in order of increasing `mu`.
    pub fn mid_spectrum(&self, k: usize) -> Result<Vec<(usize, DenseState)>> {
        self.mid_spectrum_in(k, None)
    }

    /// Like [`Self::mid_spectrum`], restricted to the sector
    /// `2 S^z_total = twice_sz` when given. `mu` stays relative to the
    /// extremes of the full spectrum.
    pub fn mid_spectrum_in(&self, k: usize, twice_sz: Option<i32>) -> Result<Vec<(usize, DenseState)>> {
        let candidates: Vec<usize> =
            (0..self.len()).filter(|&i| twice_sz.is_none() || self.twice_sz(i) == twice_sz).collect();
        if candidates.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "empty magnetization sector {}",
                twice_sz.unwrap_or_default()
            )));
        }
        let energies: Vec<f64> = candidates.iter().map(|&i| self.energies[i]).collect();
        let mu: Vec<f64> = candidates.iter().map(|&i| self.mu[i]).collect();
        mid_spectrum_indices(&energies, &mu, k)?
            .into_iter()
            .map(|j| Ok((candidates[j], self.state(candidates[j])?)))
            .collect()
    }
}

pub fn sector_spectrum(terms: &LocalTerms) -> Result<SectorSpectrum> {
    sector_spectrum_with_cap(terms, DEFAULT_MAX_DENSE_STATES)
}

pub fn sector_spectrum_with_cap(terms: &LocalTerms, cap: usize) -> Result<SectorSpectrum> {
    let site_dims = terms.site_dims();
    let mut blocks = Vec::new();
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for m in terms.sz_sectors() {
        let (basis, h) = terms.sector_matrix(m, cap)?;
        check_hermitian(&h)?;
        let (vals, vecs) = eigh(&h)?;
        let b = blocks.len();
        entries.extend(vals.iter().enumerate().map(|(c, &e)| (e, b, c)));
        blocks.push((m, basis, vecs));
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let energies: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let mu = relative_energies(&energies);
    let dim = site_dims.iter().product();
    Ok(SectorSpectrum { site_dims, dim, energies, mu, location: entries.iter().map(|e| (e.1, e.2)).collect(), blocks })
}
