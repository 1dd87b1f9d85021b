//! Finite ground set, kernels in flat coordinates, and the kernel bundle
//! (K, K̂, √K, √(1−K)).

// `!(x <= tol)` is kept so that NaN residuals fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sites::{SiteSet, MAX_SITES};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const DEFAULT_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    X1,
    X2,
}

impl Part {
    pub fn label(self) -> u8 {
        match self {
            Part::X1 => 1,
            Part::X2 => 2,
        }
    }
}

/// Sites with positive quadrature weights, split into X₁ and X₂.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacePartition {
    weights: Vec<f64>,
    parts: Vec<Part>,
    x1: SiteSet,
    x2: SiteSet,
}

pub fn build_space(d: usize, sigma: &[f64], part: &[u8]) -> Result<SpacePartition> {
    if d == 0 {
        return Err(Error::Empty("ground set"));
    }
    if d > MAX_SITES {
        return Err(Error::Infeasible { what: "ground set size", requested: d, cap: MAX_SITES });
    }
    if sigma.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: sigma.len() });
    }
    if part.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: part.len() });
    }
    for (index, &value) in sigma.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    let parts = part
        .iter()
        .enumerate()
        .map(|(index, &label)| match label {
            1 => Ok(Part::X1),
            2 => Ok(Part::X2),
            _ => Err(Error::InvalidPartLabel { index, label }),
        })
        .collect::<Result<Vec<_>>>()?;
    let x1 = SiteSet::from_indices(&(0..d).filter(|&i| parts[i] == Part::X1).collect::<Vec<_>>());
    Ok(SpacePartition { weights: sigma.to_vec(), parts, x1, x2: SiteSet::full(d).difference(x1) })
}

impl SpacePartition {
    /// Unit weights.
    pub fn uniform(part: &[u8]) -> Result<Self> {
        build_space(part.len(), &vec![1.0; part.len()], part)
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn labels(&self) -> Vec<u8> {
        self.parts.iter().map(|p| p.label()).collect()
    }

    pub fn part(&self, i: usize) -> Part {
        self.parts[i]
    }

    pub fn x1(&self) -> SiteSet {
        self.x1
    }

    pub fn x2(&self) -> SiteSet {
        self.x2
    }

    pub fn all(&self) -> SiteSet {
        SiteSet::full(self.d())
    }

    pub fn check(&self, s: SiteSet) -> Result<()> {
        s.check_range(self.d())
    }

    /// Diagonal coordinate projection P_S.
    pub fn projection(&self, s: SiteSet) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.d(), |i, _| if s.contains(i) { ONE } else { ZERO }))
    }

    /// J_S = P_{S∩X₁} − P_{S∩X₂}.
    pub fn j_delta(&self, s: SiteSet) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.d(), |i, _| {
            if !s.contains(i) {
                ZERO
            } else if self.parts[i] == Part::X1 {
                ONE
            } else {
                -ONE
            }
        }))
    }
}

/// Operator on the weighted sequence space, stored as the flat matrix
/// F = diag(√σ)·K·diag(√σ).
#[derive(Clone, Debug)]
pub struct Kernel {
    flat: CMatrix,
    space: Arc<SpacePartition>,
}

impl Kernel {
    pub fn from_flat(space: Arc<SpacePartition>, flat: CMatrix) -> Result<Self> {
        let d = space.d();
        if flat.nrows() != d || flat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if flat.nrows() != d { flat.nrows() } else { flat.ncols() },
            });
        }
        Ok(Kernel { flat, space })
    }

    /// From pointwise kernel values K(xᵢ,xⱼ).
    pub fn from_pointwise(space: Arc<SpacePartition>, values: CMatrix) -> Result<Self> {
        let d = space.d();
        if values.nrows() != d || values.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: values.nrows() });
        }
        let w = space.weights().to_vec();
        let flat = CMatrix::from_fn(d, d, |i, j| values[(i, j)] * (w[i] * w[j]).sqrt());
        Ok(Kernel { flat, space })
    }

    pub fn identity(space: Arc<SpacePartition>) -> Self {
        let d = space.d();
        Kernel { flat: CMatrix::identity(d, d), space }
    }

    pub fn zero(space: Arc<SpacePartition>) -> Self {
        let d = space.d();
        Kernel { flat: CMatrix::zeros(d, d), space }
    }

    pub fn flat(&self) -> &CMatrix {
        &self.flat
    }

    pub fn space(&self) -> &Arc<SpacePartition> {
        &self.space
    }

    pub fn d(&self) -> usize {
        self.space.d()
    }

    /// K(xᵢ,xⱼ) = Fᵢⱼ / √(σᵢσⱼ).
    pub fn pointwise(&self, i: usize, j: usize) -> C64 {
        let w = self.space.weights();
        self.flat[(i, j)] / (w[i] * w[j]).sqrt()
    }

    pub fn pointwise_matrix(&self) -> CMatrix {
        let d = self.d();
        CMatrix::from_fn(d, d, |i, j| self.pointwise(i, j))
    }

    /// Pointwise action (Kf)(xᵢ) = Σⱼ K(xᵢ,xⱼ) f(xⱼ) σⱼ.
    pub fn apply_pointwise(&self, f: &CVector) -> CVector {
        let w = self.space.weights();
        CVector::from_fn(self.d(), |i, _| (0..self.d()).map(|j| self.pointwise(i, j) * f[j] * w[j]).sum())
    }

    /// Flat submatrix on the given 0-based indices, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), idx.len(), |a, b| self.flat[(idx[a], idx[b])])
    }

    /// P_S F P_S.
    pub fn restrict(&self, s: SiteSet) -> CMatrix {
        CMatrix::from_fn(
            self.d(),
            self.d(),
            |i, j| {
                if s.contains(i) && s.contains(j) {
                    self.flat[(i, j)]
                } else {
                    ZERO
                }
            },
        )
    }

    pub fn trace_on(&self, s: SiteSet) -> C64 {
        s.iter().map(|i| self.flat[(i, i)]).sum()
    }

    /// Correlation weight det(F_S).
    pub fn weight(&self, s: SiteSet) -> C64 {
        let idx = s.indices();
        if idx.is_empty() {
            ONE
        } else {
            self.submatrix(&idx).determinant()
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.flat - self.flat.adjoint()).norm()
    }

    fn with_flat(&self, flat: CMatrix) -> Kernel {
        Kernel { flat, space: self.space.clone() }
    }
}

/// K̂ = K·P₁ + (1−K)·P₂: columns in X₂ are replaced by those of 1−K.
pub fn hat_transform(k: &Kernel) -> Kernel {
    let d = k.d();
    let space = k.space();
    let flat = CMatrix::from_fn(d, d, |i, j| match space.part(j) {
        Part::X1 => k.flat[(i, j)],
        Part::X2 if i == j => ONE - k.flat[(i, j)],
        Part::X2 => -k.flat[(i, j)],
    });
    k.with_flat(flat)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// U·diag(f(λ))·U†.
pub fn hermitian_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let s = f(v);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    scaled * vectors.adjoint()
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidityReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub tol: f64,
    pub passed: bool,
    pub failures: Vec<String>,
    pub note: &'static str,
}

const LOCAL_TRACE_NOTE: &str =
    "finite ground set: every restriction is finite rank, so the local trace-class conditions hold";

pub fn validate_correlation_operator(k: &Kernel, tol: f64) -> ValidityReport {
    let herm = k.hermiticity_residual();
    let (values, _) = hermitian_eigen(k.flat());
    let min = values.first().copied().unwrap_or(0.0);
    let max = values.last().copied().unwrap_or(0.0);
    let mut failures = Vec::new();
    if !(herm <= tol) {
        failures.push(format!("hermiticity_residual {herm:e} exceeds tol {tol:e}"));
    }
    if !(min >= -tol) {
        failures.push(format!("min_eigenvalue {min} below 0"));
    }
    if !(max <= 1.0 + tol) {
        failures.push(format!("max_eigenvalue {max} above 1"));
    }
    ValidityReport {
        hermiticity_residual: herm,
        min_eigenvalue: min,
        max_eigenvalue: max,
        tol,
        passed: failures.is_empty(),
        failures,
        note: LOCAL_TRACE_NOTE,
    }
}

fn require_valid(k: &Kernel, tol: f64) -> Result<ValidityReport> {
    let report = validate_correlation_operator(k, tol);
    if report.passed {
        Ok(report)
    } else {
        Err(Error::InvalidKernel(report.failures.join("; ")))
    }
}

/// (√K, √(1−K)) by eigendecomposition, clamping eigenvalues into [0,1].
pub fn sqrt_factors(k: &Kernel, tol: f64) -> Result<(Kernel, Kernel)> {
    require_valid(k, tol)?;
    let (values, vectors) = hermitian_eigen(k.flat());
    let k1 = hermitian_function(&values, &vectors, |l| l.clamp(0.0, 1.0).sqrt());
    let k2 = hermitian_function(&values, &vectors, |l| (1.0 - l.clamp(0.0, 1.0)).sqrt());
    Ok((k.with_flat(k1), k.with_flat(k2)))
}

#[derive(Clone, Debug, Serialize)]
pub struct JSelfAdjointReport {
    pub holds: bool,
    pub residual_11: f64,
    pub residual_22: f64,
    pub residual_21: f64,
}

/// Checks (M¹¹)† = M¹¹, (M²²)† = M²², (M²¹)† = −M¹².
pub fn check_j_self_adjoint(m: &Kernel, tol: f64) -> JSelfAdjointReport {
    let space = m.space();
    let f = m.flat();
    let (mut r11, mut r22, mut r21) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..m.d() {
        for j in 0..m.d() {
            match (space.part(i), space.part(j)) {
                (Part::X1, Part::X1) => r11 += (f[(i, j)] - f[(j, i)].conj()).norm_sqr(),
                (Part::X2, Part::X2) => r22 += (f[(i, j)] - f[(j, i)].conj()).norm_sqr(),
                // (M²¹)†[i,j] for i∈X₁, j∈X₂ is conj(M[j,i]); compare with −M[i,j].
                (Part::X1, Part::X2) => r21 += (f[(j, i)].conj() + f[(i, j)]).norm_sqr(),
                (Part::X2, Part::X1) => {}
            }
        }
    }
    let (r11, r22, r21) = (r11.sqrt(), r22.sqrt(), r21.sqrt());
    JSelfAdjointReport {
        holds: r11 <= tol && r22 <= tol && r21 <= tol,
        residual_11: r11,
        residual_22: r22,
        residual_21: r21,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssemblyReport {
    pub validity: ValidityReport,
    pub sqrt_residual_1: f64,
    pub sqrt_residual_2: f64,
    /// ‖𝕂 − (P₁K₁²P₁ + P₂K₂²P₂ + P₂KP₁ − (P₂KP₁)†)‖.
    pub block_residual: f64,
    pub involution_residual: f64,
    pub j_self_adjoint: JSelfAdjointReport,
    pub note: &'static str,
}

const DIAGONAL_NOTE: &str =
    "finite ground set: diagonal kernel values are matrix entries, no null-set choice is involved";

/// The kernel bundle (K, 𝕂 = K̂, K₁ = √K, K₂ = √(1−K)).
#[derive(Clone, Debug)]
pub struct JKernelBundle {
    k: Kernel,
    khat: Kernel,
    k1: Kernel,
    k2: Kernel,
    tol: f64,
    report: AssemblyReport,
}

pub fn assemble_j_kernel(k: &Kernel, tol: f64) -> Result<JKernelBundle> {
    let validity = require_valid(k, tol)?;
    let (k1, k2) = sqrt_factors(k, tol)?;
    let khat = hat_transform(k);
    let space = k.space();
    let d = k.d();
    let eye = CMatrix::identity(d, d);
    let k1sq = k1.flat() * k1.flat();
    let k2sq = k2.flat() * k2.flat();
    let p1 = space.projection(space.x1());
    let p2 = space.projection(space.x2());
    let k21 = &p2 * k.flat() * &p1;
    let blocks = &p1 * &k1sq * &p1 + &p2 * &k2sq * &p2 + &k21 - k21.adjoint();
    let report = AssemblyReport {
        validity,
        sqrt_residual_1: (&k1sq - k.flat()).norm(),
        sqrt_residual_2: (&k2sq - (&eye - k.flat())).norm(),
        block_residual: (khat.flat() - blocks).norm(),
        involution_residual: (hat_transform(&khat).flat() - k.flat()).norm(),
        j_self_adjoint: check_j_self_adjoint(&khat, tol),
        note: DIAGONAL_NOTE,
    };
    Ok(JKernelBundle { k: k.clone(), khat, k1, k2, tol, report })
}

impl JKernelBundle {
    /// Bundle generated by a J-self-adjoint kernel 𝕂, via K = hat(𝕂).
    pub fn from_j_kernel(kk: &Kernel, tol: f64) -> Result<Self> {
        assemble_j_kernel(&hat_transform(kk), tol)
    }

    pub fn k(&self) -> &Kernel {
        &self.k
    }

    /// 𝕂 = K̂.
    pub fn khat(&self) -> &Kernel {
        &self.khat
    }

    pub fn k1(&self) -> &Kernel {
        &self.k1
    }

    pub fn k2(&self) -> &Kernel {
        &self.k2
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn report(&self) -> &AssemblyReport {
        &self.report
    }

    pub fn space(&self) -> &Arc<SpacePartition> {
        self.k.space()
    }

    pub fn d(&self) -> usize {
        self.k.d()
    }
}

/// det[𝕂(xᵢ,xⱼ)] over distinct 0-based sites (pointwise values, real part).
pub fn correlation_determinant(kk: &Kernel, sites: &[usize]) -> Result<f64> {
    let d = kk.d();
    let mut seen = SiteSet::EMPTY;
    for &s in sites {
        if s >= d {
            return Err(Error::SiteOutOfRange { site: s + 1, d });
        }
        if seen.contains(s) {
            return Err(Error::RepeatedSite(s + 1));
        }
        seen = seen.union(SiteSet::singleton(s));
    }
    if sites.is_empty() {
        return Ok(1.0);
    }
    let m = CMatrix::from_fn(sites.len(), sites.len(), |a, b| kk.pointwise(sites[a], sites[b]));
    Ok(m.determinant().re)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthConstant {
    pub trace_norm_sum: f64,
    pub hilbert_schmidt: f64,
    pub operator_norm: f64,
    /// max of the three norms.
    pub general: f64,
    /// Row-energy constant of K₁ (Δ ⊆ X₁) or K₂ (Δ ⊆ X₂).
    pub refined: Option<f64>,
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn growth_bound_constant(bundle: &JKernelBundle, delta: SiteSet) -> Result<GrowthConstant> {
    let space = bundle.space();
    space.check(delta)?;
    if delta.is_empty() {
        return Ok(GrowthConstant {
            trace_norm_sum: 0.0,
            hilbert_schmidt: 0.0,
            operator_norm: 0.0,
            general: 0.0,
            refined: Some(0.0),
        });
    }
    let kk = bundle.khat();
    let trace_norm = |s: SiteSet| -> f64 { singular_values(&kk.restrict(s)).iter().sum() };
    let trace_norm_sum = trace_norm(delta.intersect(space.x1())) + trace_norm(delta.intersect(space.x2()));
    let restricted = kk.restrict(delta);
    let hilbert_schmidt = restricted.norm();
    let operator_norm = singular_values(&restricted).into_iter().fold(0.0, f64::max);
    let general = trace_norm_sum.max(hilbert_schmidt).max(operator_norm);
    let row_energy =
        |m: &CMatrix| -> f64 { delta.iter().map(|i| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum() };
    let refined = if delta.is_subset(space.x1()) {
        Some(row_energy(bundle.k1().flat()))
    } else if delta.is_subset(space.x2()) {
        Some(row_energy(bundle.k2().flat()))
    } else {
        None
    };
    Ok(GrowthConstant { trace_norm_sum, hilbert_schmidt, operator_norm, general, refined })
}

/// Frobenius distance.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real matrix literal helper.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}
