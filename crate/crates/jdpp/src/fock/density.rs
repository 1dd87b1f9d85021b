//! Particle density ρ(Δ), the operator W(Δ,R), and Wick products.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{FockOperator, FockSpace, Primitive};
use crate::error::{Error, Result};
use crate::sites::SiteSet;
use crate::space::{CMatrix, JKernelBundle, Part, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoForm {
    /// Pair creation + pair annihilation + dΓ + trace scalar.
    Definition,
    /// Basis double sum over the c-coefficients.
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WickRoute {
    Recurrence,
    WChain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Coefficients of W(Δ∩X_l, R) for one part:
/// Σ_{i,j} Σ_{◇₁,◇₂} c^{◇₁◇₂}_{ij} X^{◇₁}_i R Y^{◇₂}_j.
///
/// With A⁺ᵢ = a⁺(mode d+i), A⁻ᵢ = a⁻(mode i), B⁺ᵢ = a⁺(mode i),
/// B⁻ᵢ = a⁻(mode d+i), the letters are (X,Y) = (A,B) on X₁ and (B,A) on X₂.
#[derive(Clone, Debug)]
pub struct SeriesBlock {
    pub part: Part,
    d: usize,
    c_pp: CMatrix,
    c_mm: CMatrix,
    c_pm: CMatrix,
    c_mp: CMatrix,
}

impl SeriesBlock {
    pub fn coeff(&self, x: Sign, y: Sign) -> &CMatrix {
        match (x, y) {
            (Sign::Plus, Sign::Plus) => &self.c_pp,
            (Sign::Minus, Sign::Minus) => &self.c_mm,
            (Sign::Plus, Sign::Minus) => &self.c_pm,
            (Sign::Minus, Sign::Plus) => &self.c_mp,
        }
    }

    fn a_letter(&self, s: Sign, i: usize) -> Primitive {
        match s {
            Sign::Plus => Primitive::Create(self.d + i),
            Sign::Minus => Primitive::Annihilate(i),
        }
    }

    fn b_letter(&self, s: Sign, i: usize) -> Primitive {
        match s {
            Sign::Plus => Primitive::Create(i),
            Sign::Minus => Primitive::Annihilate(self.d + i),
        }
    }

    /// Left letter X^s_i.
    pub fn x(&self, s: Sign, i: usize) -> Primitive {
        match self.part {
            Part::X1 => self.a_letter(s, i),
            Part::X2 => self.b_letter(s, i),
        }
    }

    /// Right letter Y^s_j.
    pub fn y(&self, s: Sign, j: usize) -> Primitive {
        match self.part {
            Part::X1 => self.b_letter(s, j),
            Part::X2 => self.a_letter(s, j),
        }
    }
}

/// One block per nonempty Δ∩X_l.
pub fn series_blocks(bundle: &JKernelBundle, delta: SiteSet) -> Result<Vec<SeriesBlock>> {
    let space = bundle.space();
    space.check(delta)?;
    let (k1, k2) = (bundle.k1().flat(), bundle.k2().flat());
    let mut blocks = Vec::new();
    for (part, s) in [(Part::X1, delta.intersect(space.x1())), (Part::X2, delta.intersect(space.x2()))] {
        if s.is_empty() {
            continue;
        }
        let p = space.projection(s);
        let k2pk1 = k2 * &p * k1;
        let k1pk2 = k1 * &p * k2;
        let k2pk2 = k2 * &p * k2;
        let k1pk1 = k1 * &p * k1;
        let block = match part {
            Part::X1 => SeriesBlock { part, d: bundle.d(), c_pp: k2pk1, c_mm: k1pk2, c_pm: k2pk2, c_mp: k1pk1 },
            Part::X2 => SeriesBlock {
                part,
                d: bundle.d(),
                c_pp: k2pk1.transpose(),
                c_mm: k1pk2.transpose(),
                c_pm: k1pk1.transpose(),
                c_mp: k2pk2.transpose(),
            },
        };
        blocks.push(block);
    }
    Ok(blocks)
}

fn check_fs(bundle: &JKernelBundle, fs: &FockSpace) -> Result<()> {
    if fs.d() != bundle.d() {
        return Err(Error::DimensionMismatch { expected: bundle.d(), found: fs.d() });
    }
    Ok(())
}

/// Tr 𝕂_{Δ∩X₁} + Tr 𝕂_{Δ∩X₂}.
fn split_trace(bundle: &JKernelBundle, delta: SiteSet) -> C64 {
    let space = bundle.space();
    let kk = bundle.khat();
    kk.trace_on(delta.intersect(space.x1())) + kk.trace_on(delta.intersect(space.x2()))
}

pub fn rho_delta(bundle: &JKernelBundle, delta: SiteSet, fs: &FockSpace, form: RhoForm) -> Result<FockOperator> {
    check_fs(bundle, fs)?;
    bundle.space().check(delta)?;
    let d = bundle.d();
    let mut terms: Vec<(C64, Vec<Primitive>)> = Vec::new();
    match form {
        RhoForm::Definition => {
            let j = bundle.space().j_delta(delta);
            let (k1, k2) = (bundle.k1().flat(), bundle.k2().flat());
            // Pair part: M_{ij} a⁺(mode d+i) a⁺(mode j) plus its adjoint.
            let m = k2 * &j * k1;
            for i in 0..d {
                for jj in 0..d {
                    let c = m[(i, jj)];
                    terms.push((c, vec![Primitive::Create(d + i), Primitive::Create(jj)]));
                    terms.push((c.conj(), vec![Primitive::Annihilate(jj), Primitive::Annihilate(d + i)]));
                }
            }
            // dΓ(−conj(K₁J_ΔK₁) ⊕ K₂J_ΔK₂).
            let b1 = (k1 * &j * k1).map(|z| -z.conj());
            let b2 = k2 * &j * k2;
            for k in 0..d {
                for l in 0..d {
                    terms.push((b1[(k, l)], vec![Primitive::Create(k), Primitive::Annihilate(l)]));
                    terms.push((b2[(k, l)], vec![Primitive::Create(d + k), Primitive::Annihilate(d + l)]));
                }
            }
            let op = FockOperator::from_terms(fs, &terms);
            Ok(op.add(&FockOperator::scalar(fs, split_trace(bundle, delta))))
        }
        RhoForm::Series => {
            for block in series_blocks(bundle, delta)? {
                for x in Sign::BOTH {
                    for y in Sign::BOTH {
                        let c = block.coeff(x, y);
                        for i in 0..d {
                            for jj in 0..d {
                                terms.push((c[(i, jj)], vec![block.x(x, i), block.y(y, jj)]));
                            }
                        }
                    }
                }
            }
            Ok(FockOperator::from_terms(fs, &terms))
        }
    }
}

/// W(Δ,R) = W(Δ∩X₁,R) + W(Δ∩X₂,R).
pub fn w_op(bundle: &JKernelBundle, delta: SiteSet, r: &FockOperator, fs: &FockSpace) -> Result<FockOperator> {
    check_fs(bundle, fs)?;
    if r.fs() != fs {
        return Err(Error::DimensionMismatch { expected: fs.dim(), found: r.fs().dim() });
    }
    let d = bundle.d();
    let mut acc = FockOperator::zero(fs);
    for block in series_blocks(bundle, delta)? {
        for x in Sign::BOTH {
            for y in Sign::BOTH {
                let c = block.coeff(x, y);
                for i in 0..d {
                    let right: Vec<_> = (0..d)
                        .filter(|&j| c[(i, j)] != C64::new(0.0, 0.0))
                        .map(|j| (c[(i, j)], vec![block.y(y, j)]))
                        .collect();
                    if right.is_empty() {
                        continue;
                    }
                    let left = FockOperator::primitive(fs, block.x(x, i));
                    let term = left.mul(r).mul(&FockOperator::from_terms(fs, &right));
                    acc = acc.add(&term);
                }
            }
        }
    }
    Ok(acc)
}

/// τ(W(Δ,R)) without forming W: only the (−,+) letters reach the vacuum,
/// giving Σ c⁻⁺_{ij} ⟨1_{mode X⁻ᵢ}| R |1_{mode Y⁺ⱼ}⟩.
pub fn vacuum_expectation_w(bundle: &JKernelBundle, delta: SiteSet, r: &FockOperator) -> Result<C64> {
    if r.fs().d() != bundle.d() {
        return Err(Error::DimensionMismatch { expected: bundle.d(), found: r.fs().d() });
    }
    let d = bundle.d();
    let mut total = C64::new(0.0, 0.0);
    for block in series_blocks(bundle, delta)? {
        let c = block.coeff(Sign::Minus, Sign::Plus);
        for i in 0..d {
            let row = 1usize << block.x(Sign::Minus, i).mode();
            for j in 0..d {
                if c[(i, j)] == C64::new(0.0, 0.0) {
                    continue;
                }
                let col = 1usize << block.y(Sign::Plus, j).mode();
                total += c[(i, j)] * r.entry(row, col);
            }
        }
    }
    Ok(total)
}

/// :ρ(Δ₁)⋯ρ(Δₙ):.
pub fn wick_product(
    bundle: &JKernelBundle,
    deltas: &[SiteSet],
    fs: &FockSpace,
    route: WickRoute,
) -> Result<FockOperator> {
    if deltas.is_empty() {
        return Err(Error::Empty("subset list"));
    }
    check_fs(bundle, fs)?;
    for &s in deltas {
        bundle.space().check(s)?;
    }
    match route {
        WickRoute::WChain => {
            let mut r = FockOperator::identity(fs);
            for &s in deltas {
                r = w_op(bundle, s, &r, fs)?;
            }
            Ok(r)
        }
        WickRoute::Recurrence => {
            let mut rho_cache = HashMap::new();
            let mut rho = |s: SiteSet| -> Result<FockOperator> {
                if let Some(op) = rho_cache.get(&s) {
                    return Ok(FockOperator::clone(op));
                }
                let op = rho_delta(bundle, s, fs, RhoForm::Definition)?;
                rho_cache.insert(s, op.clone());
                Ok(op)
            };
            recurrence(deltas, &mut rho)
        }
    }
}

fn recurrence(deltas: &[SiteSet], rho: &mut dyn FnMut(SiteSet) -> Result<FockOperator>) -> Result<FockOperator> {
    let n = deltas.len();
    if n == 1 {
        return rho(deltas[0]);
    }
    let last = deltas[n - 1];
    let head = &deltas[..n - 1];
    let mut acc = rho(last)?.mul(&recurrence(head, rho)?);
    for i in 0..n - 1 {
        let mut reduced = head.to_vec();
        reduced[i] = reduced[i].intersect(last);
        acc = acc.sub(&recurrence(&reduced, rho)?);
    }
    Ok(acc)
}

/// τ(op) = (opΩ, Ω).
pub fn vacuum_expectation(op: &FockOperator) -> C64 {
    op.vacuum_expectation()
}
