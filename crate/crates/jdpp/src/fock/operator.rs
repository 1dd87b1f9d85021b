use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseOp;
use super::{FockSpace, FockVector, Primitive};
use crate::error::{Error, Result};
use crate::space::{CMatrix, C64};

/// Dense matrices are only formed up to this dimension (2d ≤ 10).
pub const DENSE_CAP: usize = 1024;

/// Above this many multiply-adds a sparse product beyond the dense cap stays lazy.
const SPARSE_WORK_LIMIT: usize = 1 << 26;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Operator on a [`FockSpace`]: `body + shift·I`, with the identity part kept symbolic.
#[derive(Clone, Debug)]
pub struct FockOperator {
    fs: FockSpace,
    shift: C64,
    body: Body,
}

#[derive(Clone, Debug)]
enum Body {
    Zero,
    Sparse(Arc<SparseOp>),
    Dense(Arc<CMatrix>),
    /// Lazy product, leftmost factor first.
    Product(Arc<Vec<FockOperator>>),
    /// Lazy sum.
    Sum(Arc<Vec<FockOperator>>),
}

impl FockOperator {
    pub fn zero(fs: &FockSpace) -> Self {
        FockOperator { fs: *fs, shift: ZERO, body: Body::Zero }
    }

    pub fn identity(fs: &FockSpace) -> Self {
        Self::scalar(fs, ONE)
    }

    pub fn scalar(fs: &FockSpace, c: C64) -> Self {
        FockOperator { fs: *fs, shift: c, body: Body::Zero }
    }

    /// Σ coeff · word over products of primitive mode operators.
    pub fn from_terms(fs: &FockSpace, terms: &[(C64, Vec<Primitive>)]) -> Self {
        Self::from_sparse(fs, SparseOp::from_terms(fs.dim(), terms))
    }

    pub fn primitive(fs: &FockSpace, p: Primitive) -> Self {
        Self::from_terms(fs, &[(ONE, vec![p])])
    }

    pub fn from_sparse(fs: &FockSpace, s: SparseOp) -> Self {
        assert_eq!(s.dim(), fs.dim());
        FockOperator { fs: *fs, shift: ZERO, body: Body::Sparse(Arc::new(s)) }
    }

    pub fn from_dense(fs: &FockSpace, m: CMatrix) -> Result<Self> {
        if m.nrows() != fs.dim() || m.ncols() != fs.dim() {
            return Err(Error::DimensionMismatch { expected: fs.dim(), found: m.nrows() });
        }
        if !fs.dense_feasible() {
            return Err(Error::Infeasible { what: "dense Fock dimension", requested: fs.dim(), cap: DENSE_CAP });
        }
        Ok(FockOperator { fs: *fs, shift: ZERO, body: Body::Dense(Arc::new(m)) })
    }

    pub fn fs(&self) -> &FockSpace {
        &self.fs
    }

    /// Coefficient of the symbolic identity part.
    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.body, Body::Product(_) | Body::Sum(_))
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.body, Body::Dense(_))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.body, Body::Zero)
    }

    fn check_same(&self, other: &FockOperator) {
        assert_eq!(self.fs, other.fs, "operators on different Fock spaces");
    }

    pub fn scale(&self, c: C64) -> Self {
        let body = match &self.body {
            Body::Zero => Body::Zero,
            Body::Sparse(s) => Body::Sparse(Arc::new(s.scale(c))),
            Body::Dense(m) => Body::Dense(Arc::new(m.as_ref() * c)),
            Body::Product(fs) => {
                let mut v = fs.as_ref().clone();
                v[0] = v[0].scale(c);
                Body::Product(Arc::new(v))
            }
            Body::Sum(ts) => Body::Sum(Arc::new(ts.iter().map(|t| t.scale(c)).collect())),
        };
        FockOperator { fs: self.fs, shift: self.shift * c, body }
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn add(&self, other: &FockOperator) -> Self {
        self.check_same(other);
        let shift = self.shift + other.shift;
        let body = match (&self.body, &other.body) {
            (Body::Zero, b) | (b, Body::Zero) => b.clone(),
            (Body::Sparse(a), Body::Sparse(b)) => Body::Sparse(Arc::new(a.combine(ONE, b, ONE))),
            (Body::Dense(a), Body::Dense(b)) => Body::Dense(Arc::new(a.as_ref() + b.as_ref())),
            (Body::Dense(a), Body::Sparse(s)) | (Body::Sparse(s), Body::Dense(a)) => {
                let mut m = a.as_ref().clone();
                for c in 0..s.dim() {
                    for &(r, v) in s.column(c) {
                        m[(r, c)] += v;
                    }
                }
                Body::Dense(Arc::new(m))
            }
            _ => {
                let strip = |o: &FockOperator| FockOperator { fs: o.fs, shift: ZERO, body: o.body.clone() };
                let mut terms = Vec::new();
                for o in [self, other] {
                    match &o.body {
                        Body::Sum(ts) => terms.extend(ts.iter().cloned()),
                        _ => terms.push(strip(o)),
                    }
                }
                Body::Sum(Arc::new(terms))
            }
        };
        FockOperator { fs: self.fs, shift, body }
    }

    pub fn sub(&self, other: &FockOperator) -> Self {
        self.add(&other.neg())
    }

    /// Body with the shift folded in, as sparse or dense.
    fn folded(&self) -> Option<Body> {
        match &self.body {
            Body::Zero => Some(Body::Sparse(Arc::new(SparseOp::zero(self.fs.dim()).add_identity(self.shift)))),
            Body::Sparse(s) if self.shift == ZERO => Some(Body::Sparse(s.clone())),
            Body::Sparse(s) => Some(Body::Sparse(Arc::new(s.add_identity(self.shift)))),
            Body::Dense(m) if self.shift == ZERO => Some(Body::Dense(m.clone())),
            Body::Dense(m) => {
                let mut m = m.as_ref().clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += self.shift;
                }
                Some(Body::Dense(Arc::new(m)))
            }
            _ => None,
        }
    }

    pub fn mul(&self, other: &FockOperator) -> Self {
        self.check_same(other);
        if let Body::Zero = self.body {
            return other.scale(self.shift);
        }
        if let Body::Zero = other.body {
            return self.scale(other.shift);
        }
        let fs = self.fs;
        let lazy =
            || FockOperator { fs, shift: ZERO, body: Body::Product(Arc::new(vec![self.clone(), other.clone()])) };
        let (Some(a), Some(b)) = (self.folded(), other.folded()) else {
            return lazy();
        };
        let body = match (a, b) {
            (Body::Sparse(a), Body::Sparse(b)) => {
                let work: usize =
                    (0..b.dim()).map(|c| b.column(c).iter().map(|&(k, _)| a.column(k).len()).sum::<usize>()).sum();
                if !fs.dense_feasible() && work > SPARSE_WORK_LIMIT {
                    return lazy();
                }
                let p = a.mul(&b);
                if fs.dense_feasible() && p.nnz() > fs.dim() * fs.dim() / 4 {
                    Body::Dense(Arc::new(p.to_dense()))
                } else {
                    Body::Sparse(Arc::new(p))
                }
            }
            (Body::Dense(a), Body::Dense(b)) => Body::Dense(Arc::new(a.as_ref() * b.as_ref())),
            (Body::Dense(a), Body::Sparse(b)) => Body::Dense(Arc::new(b.left_dense(&a))),
            (Body::Sparse(a), Body::Dense(b)) => Body::Dense(Arc::new(a.right_dense(&b))),
            _ => unreachable!("folded bodies are sparse or dense"),
        };
        FockOperator { fs, shift: ZERO, body }
    }

    /// Product of several operators, leftmost first.
    pub fn product(fs: &FockSpace, factors: &[FockOperator]) -> Self {
        factors.iter().fold(Self::identity(fs), |acc, f| acc.mul(f))
    }

    pub fn commutator(&self, other: &FockOperator) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn anticommutator(&self, other: &FockOperator) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        let body = match &self.body {
            Body::Zero => Body::Zero,
            Body::Sparse(s) => Body::Sparse(Arc::new(s.adjoint())),
            Body::Dense(m) => Body::Dense(Arc::new(m.adjoint())),
            Body::Product(fs) => Body::Product(Arc::new(fs.iter().rev().map(|f| f.adjoint()).collect())),
            Body::Sum(ts) => Body::Sum(Arc::new(ts.iter().map(|t| t.adjoint()).collect())),
        };
        FockOperator { fs: self.fs, shift: self.shift.conj(), body }
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = match &self.body {
            Body::Zero => v.coeffs() * ZERO,
            Body::Sparse(s) => s.apply(v.coeffs()),
            Body::Dense(m) => m.as_ref() * v.coeffs(),
            Body::Product(fs) => fs.iter().rev().fold(v.clone(), |w, f| f.apply(&w)).into_coeffs(),
            Body::Sum(ts) => ts.iter().fold(v.coeffs() * ZERO, |acc, t| acc + t.apply(v).into_coeffs()),
        };
        if self.shift != ZERO {
            out.axpy(self.shift, v.coeffs(), ONE);
        }
        FockVector::from_coeffs(&self.fs, out).expect("dimension preserved")
    }

    /// Dense matrix including the identity part.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if !self.fs.dense_feasible() {
            return Err(Error::Infeasible { what: "dense Fock dimension", requested: self.fs.dim(), cap: DENSE_CAP });
        }
        let n = self.fs.dim();
        let mut m = match &self.body {
            Body::Zero => CMatrix::zeros(n, n),
            Body::Sparse(s) => s.to_dense(),
            Body::Dense(m) => m.as_ref().clone(),
            Body::Product(fs) => {
                let mut acc = CMatrix::identity(n, n);
                for f in fs.iter() {
                    acc *= f.to_dense()?;
                }
                acc
            }
            Body::Sum(ts) => {
                let mut acc = CMatrix::zeros(n, n);
                for t in ts.iter() {
                    acc += t.to_dense()?;
                }
                acc
            }
        };
        for i in 0..n {
            m[(i, i)] += self.shift;
        }
        Ok(m)
    }

    /// Converts lazy or sparse forms to a dense matrix when feasible.
    pub fn densify(&self) -> Result<Self> {
        let m = self.to_dense()?;
        Self::from_dense(&self.fs, m)
    }

    /// Matrix entry ⟨r| op |c⟩.
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        let id = if r == c { self.shift } else { ZERO };
        match &self.body {
            Body::Zero => id,
            Body::Sparse(s) => id + s.get(r, c),
            Body::Dense(m) => id + m[(r, c)],
            _ => self.apply(&FockVector::basis(&self.fs, c)).coeffs()[r],
        }
    }

    /// τ(op) = (op Ω, Ω).
    pub fn vacuum_expectation(&self) -> C64 {
        self.entry(0, 0)
    }

    /// Size of `self`: Frobenius norm when dense is feasible, otherwise a
    /// power-iteration estimate of the operator norm.
    pub fn norm(&self) -> f64 {
        match self.to_dense() {
            Ok(m) => m.norm(),
            Err(_) => self.power_norm(60, 0x5eed),
        }
    }

    /// Operator-norm estimate by power iteration on op†op from a seeded start.
    pub fn power_norm(&self, iters: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let adj = self.adjoint();
        let mut v = FockVector::random(&self.fs, &mut rng);
        let mut est = 0.0;
        for _ in 0..iters {
            let w = adj.apply(&self.apply(&v));
            let n = w.norm();
            if n == 0.0 {
                return 0.0;
            }
            est = n.sqrt();
            v = FockVector::from_coeffs(&self.fs, w.into_coeffs() / C64::new(n, 0.0)).expect("same dim");
        }
        est
    }

    pub fn distance(&self, other: &FockOperator) -> f64 {
        self.sub(other).norm()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    /// max ‖op v‖ over the given vectors.
    pub fn max_action(&self, vectors: &[FockVector]) -> f64 {
        vectors.iter().map(|v| self.apply(v).norm()).fold(0.0, f64::max)
    }
}
