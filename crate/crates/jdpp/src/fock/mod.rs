//! Antisymmetric Fock space over G = H ⊕ H in the occupation basis.
//!
//! Modes `0..d` are the first copy of H and modes `d..2d` the second. A basis
//! state is a bitmask of occupied modes; creation operators carry the
//! Jordan-Wigner sign `(-1)^(number of occupied modes below k)`.

mod density;
mod dump;
mod fields;
mod operator;
mod sparse;

use rand::Rng;
use rand_distr::StandardNormal;

pub use density::{
    rho_delta, series_blocks, vacuum_expectation, vacuum_expectation_w, w_op, wick_product, RhoForm, SeriesBlock, Sign,
    WickRoute,
};
pub use dump::{dump_operator_csv, write_operator_csv};
pub use fields::{
    annihilation, bogoliubov_fields, creation, g_vector, gauge_fields, pair_annihilation, pair_creation,
    second_quantization, unit,
};
pub use operator::{FockOperator, DENSE_CAP};
pub use sparse::SparseOp;

use crate::error::{Error, Result};
use crate::space::{CVector, C64};

/// Largest supported number of modes (dimension 2^24).
pub const MAX_MODES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    d: usize,
}

impl FockSpace {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Empty("ground set"));
        }
        if 2 * d > MAX_MODES {
            return Err(Error::Infeasible { what: "Fock modes (2d)", requested: 2 * d, cap: MAX_MODES });
        }
        Ok(FockSpace { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn modes(&self) -> usize {
        2 * self.d
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.d)
    }

    pub fn dense_feasible(&self) -> bool {
        self.dim() <= DENSE_CAP
    }

    /// Mode of site `i` in the first copy.
    pub fn mode1(&self, i: usize) -> usize {
        i
    }

    /// Mode of site `i` in the second copy.
    pub fn mode2(&self, i: usize) -> usize {
        self.d + i
    }

    pub fn check_vector(&self, len: usize, expected: usize) -> Result<()> {
        if len != expected {
            return Err(Error::DimensionMismatch { expected, found: len });
        }
        Ok(())
    }
}

/// Single-mode creation or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Primitive {
    Create(usize),
    Annihilate(usize),
}

impl Primitive {
    pub fn mode(self) -> usize {
        match self {
            Primitive::Create(k) | Primitive::Annihilate(k) => k,
        }
    }

    pub fn adjoint(self) -> Primitive {
        match self {
            Primitive::Create(k) => Primitive::Annihilate(k),
            Primitive::Annihilate(k) => Primitive::Create(k),
        }
    }

    /// Action on basis state `n`: `Some((m, sign))` or `None` for zero.
    #[inline]
    pub fn apply(self, n: usize) -> Option<(usize, f64)> {
        let k = self.mode();
        let bit = 1usize << k;
        let occupied = n & bit != 0;
        let sign = if (n & (bit - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        match self {
            Primitive::Create(_) if !occupied => Some((n | bit, sign)),
            Primitive::Annihilate(_) if occupied => Some((n & !bit, sign)),
            _ => None,
        }
    }
}

/// State vector in the occupation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    coeffs: CVector,
}

impl FockVector {
    pub fn vacuum(fs: &FockSpace) -> Self {
        Self::basis(fs, 0)
    }

    pub fn basis(fs: &FockSpace, n: usize) -> Self {
        let mut coeffs = CVector::zeros(fs.dim());
        coeffs[n] = C64::new(1.0, 0.0);
        FockVector { coeffs }
    }

    pub fn from_coeffs(fs: &FockSpace, coeffs: CVector) -> Result<Self> {
        fs.check_vector(coeffs.len(), fs.dim())?;
        Ok(FockVector { coeffs })
    }

    /// Normalized vector with independent complex Gaussian coordinates.
    pub fn random<R: Rng>(fs: &FockSpace, rng: &mut R) -> Self {
        let v = CVector::from_fn(fs.dim(), |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let n = v.norm();
        FockVector { coeffs: v / C64::new(n, 0.0) }
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> CVector {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// (self, other), linear in the first argument.
    pub fn inner(&self, other: &FockVector) -> C64 {
        other.coeffs.dotc(&self.coeffs)
    }

    /// The n-particle component.
    pub fn grade(&self, n: u32) -> FockVector {
        let coeffs =
            CVector::from_fn(
                self.coeffs.len(),
                |k, _| {
                    if k.count_ones() == n {
                        self.coeffs[k]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                },
            );
        FockVector { coeffs }
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        FockVector { coeffs: &self.coeffs - &other.coeffs }
    }
}
