//! Spin operators with hbar = 1. Local basis states are ordered by
//! decreasing magnetization, `m = s, s - 1, ..., -s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{c64, DenseTensor};

/// A site carrying spin `twice_spin / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinSite {
    twice_spin: u8,
}

impl SpinSite {
    pub const HALF: SpinSite = SpinSite { twice_spin: 1 };
    pub const ONE: SpinSite = SpinSite { twice_spin: 2 };

    pub fn new(spin: f64) -> Result<Self> {
        match spin {
            0.5 => Ok(Self::HALF),
            1.0 => Ok(Self::ONE),
            s => Err(Error::InvalidParameter(format!("unsupported spin {s}"))),
        }
    }

    pub fn spin(&self) -> f64 {
        self.twice_spin as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_spin as usize + 1
    }

    /// `2m` of local basis state `index`.
    pub fn twice_m(&self, index: usize) -> i32 {
        self.twice_spin as i32 - 2 * index as i32
    }

    pub fn sz(&self) -> DenseTensor {
        let d = self.dim();
        DenseTensor::matrix_from_fn(
            d,
            d,
            |i, j| if i == j { c64(self.twice_m(i) as f64 / 2.0, 0.0) } else { c64(0.0, 0.0) },
        )
    }

    /// Raising operator, `S+|m⟩ = sqrt(s(s+1) - m(m+1)) |m+1⟩`.
    pub fn splus(&self) -> DenseTensor {
        let d = self.dim();
        let s = self.spin();
        DenseTensor::matrix_from_fn(d, d, |i, j| {
            if i + 1 == j {
                let m = self.twice_m(j) as f64 / 2.0;
                c64((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    pub fn sminus(&self) -> DenseTensor {
        self.splus().adjoint().expect("square matrix")
    }

    pub fn sx(&self) -> DenseTensor {
        self.splus().add_scaled(&self.sminus(), c64(1.0, 0.0)).expect("same shape").scale(c64(0.5, 0.0))
    }

    pub fn sy(&self) -> DenseTensor {
        self.splus().add_scaled(&self.sminus(), c64(-1.0, 0.0)).expect("same shape").scale(c64(0.0, -0.5))
    }

    pub fn identity(&self) -> DenseTensor {
        DenseTensor::identity(self.dim())
    }
}

/// `S_a . S_b` on the product space of two sites, written through the ladder
/// operators so the matrix stays real.
pub fn exchange(a: SpinSite, b: SpinSite) -> DenseTensor {
    let zz = a.sz().kron(&b.sz()).expect("matrices");
    let pm = a.splus().kron(&b.sminus()).expect("matrices");
    let mp = a.sminus().kron(&b.splus()).expect("matrices");
    zz.add_scaled(&pm.add_scaled(&mp, c64(1.0, 0.0)).expect("shape"), c64(0.5, 0.0)).expect("shape")
}
