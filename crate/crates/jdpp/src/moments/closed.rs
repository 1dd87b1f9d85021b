//! Two-point and low-order n-point functions of the Bogoliubov fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{bogoliubov_fields, FockSpace, FockVector};
use crate::space::{CMatrix, CVector, JKernelBundle, C64};

/// (f, g), linear in f.
fn ip(f: &CVector, g: &CVector) -> C64 {
    g.dotc(f)
}

fn conj(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormReport {
    pub fock: C64,
    pub closed_form: Option<C64>,
    pub residual: Option<f64>,
}

impl ClosedFormReport {
    fn new(fock: C64, closed_form: Option<C64>) -> Self {
        ClosedFormReport { fock, closed_form, residual: closed_form.map(|c| (c - fock).norm()) }
    }
}

fn check(bundle: &JKernelBundle, fs: &FockSpace, vs: &[&CVector]) -> Result<()> {
    if fs.d() != bundle.d() {
        return Err(Error::DimensionMismatch { expected: bundle.d(), found: fs.d() });
    }
    for v in vs {
        if v.len() != bundle.d() {
            return Err(Error::DimensionMismatch { expected: bundle.d(), found: v.len() });
        }
    }
    Ok(())
}

/// 𝕁φ = P₁φ + P₂𝒞φ.
pub fn j_map(bundle: &JKernelBundle, phi: &CVector) -> CVector {
    let space = bundle.space();
    space.projection(space.x1()) * phi + space.projection(space.x2()) * conj(phi)
}

/// T⁽²⁾(φ,ψ) = 2i Im(K𝕁φ, 𝕁ψ) + (𝕁ψ, 𝕁φ).
pub fn two_point_closed(bundle: &JKernelBundle, phi: &CVector, psi: &CVector) -> C64 {
    let jphi = j_map(bundle, phi);
    let jpsi = j_map(bundle, psi);
    let im = ip(&(bundle.k().flat() * &jphi), &jpsi).im;
    C64::new(0.0, 2.0 * im) + ip(&jpsi, &jphi)
}

/// τ(b(φ)b(ψ)) with b = A⁺ + A⁻, against the closed form.
pub fn two_point_t(bundle: &JKernelBundle, phi: &CVector, psi: &CVector, fs: &FockSpace) -> Result<ClosedFormReport> {
    check(bundle, fs, &[phi, psi])?;
    let (pp, pm) = bogoliubov_fields(bundle, phi, fs)?;
    let (qp, qm) = bogoliubov_fields(bundle, psi, fs)?;
    let bphi = pp.add(&pm);
    let bpsi = qp.add(&qm);
    let omega = FockVector::vacuum(fs);
    let v = bphi.apply(&bpsi.apply(&omega));
    let fock = v.inner(&omega);
    Ok(ClosedFormReport::new(fock, Some(two_point_closed(bundle, phi, psi))))
}

/// S⁽¹'¹⁾(φ,ψ) = ((P₁𝕂P₁ + P₂𝕂̄P₂)φ, ψ).
pub fn s11_closed(bundle: &JKernelBundle, phi: &CVector, psi: &CVector) -> C64 {
    let space = bundle.space();
    let p1 = space.projection(space.x1());
    let p2 = space.projection(space.x2());
    let kk = bundle.khat().flat();
    let m: CMatrix = &p1 * kk * &p1 + &p2 * kk.map(|z| z.conj()) * &p2;
    ip(&(m * phi), psi)
}

/// S⁽²'⁰⁾(φ,ψ) = τ(A⁺(φ)A⁺(ψ)) = (ψ, (𝒞P₂KP₁ − P₁KP₂𝒞)φ).
pub fn s20_closed(bundle: &JKernelBundle, phi: &CVector, psi: &CVector) -> C64 {
    let space = bundle.space();
    let p1 = space.projection(space.x1());
    let p2 = space.projection(space.x2());
    let k = bundle.k().flat();
    let v = conj(&(&p2 * k * &p1 * phi)) - &p1 * k * &p2 * conj(phi);
    ip(psi, &v)
}

/// S⁽⁰'²⁾(ψ₁,ψ₂) = τ(A⁻(ψ₁)A⁻(ψ₂)) = conj(S⁽²'⁰⁾(ψ₂,ψ₁)).
pub fn s02_closed(bundle: &JKernelBundle, psi1: &CVector, psi2: &CVector) -> C64 {
    s20_closed(bundle, psi2, psi1).conj()
}

pub const MAX_NPOINT: usize = 6;

/// S⁽ᵐ'ⁿ⁾ = τ(A⁺(φ₁)⋯A⁺(φ_m)A⁻(ψ₁)⋯A⁻(ψₙ)) on Fock space, with the closed
/// form attached for odd m+n (zero) and for (1,1), (2,0), (0,2).
pub fn npoint_s(
    bundle: &JKernelBundle,
    phis: &[CVector],
    psis: &[CVector],
    fs: &FockSpace,
) -> Result<ClosedFormReport> {
    let total = phis.len() + psis.len();
    if total > MAX_NPOINT {
        return Err(Error::Infeasible { what: "n-point order", requested: total, cap: MAX_NPOINT });
    }
    check(bundle, fs, &phis.iter().chain(psis).collect::<Vec<_>>())?;
    let mut ops = Vec::with_capacity(total);
    for phi in phis {
        ops.push(bogoliubov_fields(bundle, phi, fs)?.0);
    }
    for psi in psis {
        ops.push(bogoliubov_fields(bundle, psi, fs)?.1);
    }
    let omega = FockVector::vacuum(fs);
    let v = ops.iter().rev().fold(omega.clone(), |v, op| op.apply(&v));
    let fock = v.inner(&omega);
    let closed = if total % 2 == 1 {
        Some(C64::new(0.0, 0.0))
    } else {
        match (phis.len(), psis.len()) {
            (0, 0) => Some(C64::new(1.0, 0.0)),
            (1, 1) => Some(s11_closed(bundle, &phis[0], &psis[0])),
            (2, 0) => Some(s20_closed(bundle, &phis[0], &phis[1])),
            (0, 2) => Some(s02_closed(bundle, &psis[0], &psis[1])),
            _ => None,
        }
    };
    Ok(ClosedFormReport::new(fock, closed))
}
