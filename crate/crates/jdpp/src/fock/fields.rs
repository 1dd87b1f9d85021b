//! CAR operators on G = H ⊕ H and the kernel-dependent field operators.
//!
//! G-vectors are length-2d coordinate vectors; H-vectors are length-d flat
//! coordinates.

use super::{FockOperator, FockSpace, Primitive};
use crate::error::{Error, Result};
use crate::space::{CMatrix, CVector, JKernelBundle, C64};

fn check_len(len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::DimensionMismatch { expected, found: len });
    }
    Ok(())
}

/// a⁺(g) = Σ g_k a⁺_k.
pub fn creation(g: &CVector, fs: &FockSpace) -> Result<FockOperator> {
    check_len(g.len(), fs.modes())?;
    let terms: Vec<_> = g.iter().enumerate().map(|(k, &c)| (c, vec![Primitive::Create(k)])).collect();
    Ok(FockOperator::from_terms(fs, &terms))
}

/// a⁻(g) = Σ conj(g_k) a⁻_k, the adjoint of a⁺(g).
pub fn annihilation(g: &CVector, fs: &FockSpace) -> Result<FockOperator> {
    check_len(g.len(), fs.modes())?;
    let terms: Vec<_> = g.iter().enumerate().map(|(k, &c)| (c.conj(), vec![Primitive::Annihilate(k)])).collect();
    Ok(FockOperator::from_terms(fs, &terms))
}

fn check_square(c: &CMatrix, n: usize) -> Result<()> {
    check_len(c.nrows(), n)?;
    check_len(c.ncols(), n)
}

/// Σ_{k,l} c_{kl} a⁺_k a⁺_l.
pub fn pair_creation(c: &CMatrix, fs: &FockSpace) -> Result<FockOperator> {
    check_square(c, fs.modes())?;
    let mut terms = Vec::new();
    for k in 0..fs.modes() {
        for l in 0..fs.modes() {
            terms.push((c[(k, l)], vec![Primitive::Create(k), Primitive::Create(l)]));
        }
    }
    Ok(FockOperator::from_terms(fs, &terms))
}

/// Adjoint of [`pair_creation`].
pub fn pair_annihilation(c: &CMatrix, fs: &FockSpace) -> Result<FockOperator> {
    Ok(pair_creation(c, fs)?.adjoint())
}

/// dΓ(B) = Σ_{k,l} B_{kl} a⁺_k a⁻_l.
pub fn second_quantization(b: &CMatrix, fs: &FockSpace) -> Result<FockOperator> {
    check_square(b, fs.modes())?;
    let mut terms = Vec::new();
    for k in 0..fs.modes() {
        for l in 0..fs.modes() {
            terms.push((b[(k, l)], vec![Primitive::Create(k), Primitive::Annihilate(l)]));
        }
    }
    Ok(FockOperator::from_terms(fs, &terms))
}

/// The G-vector (first, second).
pub fn g_vector(first: &CVector, second: &CVector) -> CVector {
    CVector::from_iterator(first.len() + second.len(), first.iter().chain(second.iter()).copied())
}

fn check_bundle(bundle: &JKernelBundle, phi: &CVector, fs: &FockSpace) -> Result<()> {
    check_len(fs.d(), bundle.d())?;
    check_len(phi.len(), bundle.d())
}

/// Sum a⁺(c) + a⁻(a) as a single operator.
fn field(c: &CVector, a: &CVector, fs: &FockSpace) -> Result<FockOperator> {
    let mut terms: Vec<_> = c.iter().enumerate().map(|(k, &x)| (x, vec![Primitive::Create(k)])).collect();
    terms.extend(a.iter().enumerate().map(|(k, &x)| (x.conj(), vec![Primitive::Annihilate(k)])));
    Ok(FockOperator::from_terms(fs, &terms))
}

/// Gauge-invariant pair 𝒜⁺(φ) = a⁺(0, K₂φ) + a⁻(𝒞K₁φ, 0) and its adjoint.
pub fn gauge_fields(bundle: &JKernelBundle, phi: &CVector, fs: &FockSpace) -> Result<(FockOperator, FockOperator)> {
    check_bundle(bundle, phi, fs)?;
    let zero = CVector::zeros(fs.d());
    let cr = g_vector(&zero, &(bundle.k2().flat() * phi));
    let an = g_vector(&(bundle.k1().flat() * phi).map(|z| z.conj()), &zero);
    let plus = field(&cr, &an, fs)?;
    let minus = field(&an, &cr, fs)?;
    Ok((plus, minus))
}

/// Bogoliubov pair A⁺(φ) = 𝒜⁺(P₁φ) + 𝒜⁻(P₂𝒞φ) and its adjoint, built from
/// the expanded form a⁺(𝒞K₁𝒞P₂φ, K₂P₁φ) + a⁻(𝒞K₁P₁φ, K₂P₂𝒞φ).
pub fn bogoliubov_fields(
    bundle: &JKernelBundle,
    phi: &CVector,
    fs: &FockSpace,
) -> Result<(FockOperator, FockOperator)> {
    check_bundle(bundle, phi, fs)?;
    let space = bundle.space();
    let p1 = space.projection(space.x1());
    let p2 = space.projection(space.x2());
    let k1 = bundle.k1().flat();
    let k2 = bundle.k2().flat();
    let conj = |v: CVector| v.map(|z| z.conj());
    let p1phi = &p1 * phi;
    let p2phi = &p2 * phi;
    let cr = g_vector(&conj(k1 * conj(p2phi.clone())), &(k2 * &p1phi));
    let an = g_vector(&conj(k1 * &p1phi), &(k2 * conj(p2phi)));
    let plus = field(&cr, &an, fs)?;
    let minus = field(&an, &cr, fs)?;
    Ok((plus, minus))
}

/// e_k in the given dimension.
pub fn unit(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = C64::new(1.0, 0.0);
    v
}
