//! Determinant sums, Fock-side correlation measures and the pairing expansion.

use crate::error::{Error, Result};
use crate::fock::{vacuum_expectation_w, w_op, FockOperator, FockSpace, Primitive, SeriesBlock, Sign};
use crate::sites::SiteSet;
use crate::space::{JKernelBundle, C64};

use super::cycle::{check_deltas, real_part};
use super::pairing::quasi_free_word;

pub const MAX_DET_N: usize = 6;
pub const MAX_DET_TUPLES: usize = 1_000_000;
pub const MAX_FOCK_D: usize = 5;
pub const MAX_FOCK_N: usize = 4;
pub const MAX_PAIRING_N: usize = 3;
pub const MAX_PAIRING_D: usize = 3;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Σ over tuples (x₁∈Δ₁, …, xₙ∈Δₙ) of distinct sites of det[𝕂(xᵢ,xⱼ)]·Πσ,
/// i.e. det of the flat matrix on the tuple.
pub fn determinant_moment_sum(bundle: &JKernelBundle, deltas: &[SiteSet]) -> Result<f64> {
    check_deltas(bundle, deltas)?;
    let n = deltas.len();
    if n > MAX_DET_N {
        return Err(Error::Infeasible { what: "determinant-sum order", requested: n, cap: MAX_DET_N });
    }
    let members: Vec<Vec<usize>> = deltas.iter().map(|s| s.indices()).collect();
    let tuples = members.iter().try_fold(1usize, |acc, m| acc.checked_mul(m.len())).unwrap_or(usize::MAX);
    if tuples > MAX_DET_TUPLES {
        return Err(Error::Infeasible { what: "determinant-sum tuples", requested: tuples, cap: MAX_DET_TUPLES });
    }
    if tuples == 0 {
        return Ok(0.0);
    }
    let kk = bundle.khat();
    let mut pos = vec![0usize; n];
    let mut tuple = vec![0usize; n];
    let mut total = C64::new(0.0, 0.0);
    'outer: loop {
        let mut used = SiteSet::EMPTY;
        let mut distinct = true;
        for l in 0..n {
            tuple[l] = members[l][pos[l]];
            if used.contains(tuple[l]) {
                distinct = false;
            }
            used = used.union(SiteSet::singleton(tuple[l]));
        }
        if distinct {
            total += kk.submatrix(&tuple).determinant();
        }
        for l in (0..n).rev() {
            pos[l] += 1;
            if pos[l] < members[l].len() {
                continue 'outer;
            }
            pos[l] = 0;
        }
        break;
    }
    real_part(total)
}

fn check_fock(bundle: &JKernelBundle, fs: &FockSpace, n: usize) -> Result<()> {
    if fs.d() != bundle.d() {
        return Err(Error::DimensionMismatch { expected: bundle.d(), found: fs.d() });
    }
    if fs.d() > MAX_FOCK_D {
        return Err(Error::Infeasible { what: "Fock moment ground set size", requested: fs.d(), cap: MAX_FOCK_D });
    }
    if n > MAX_FOCK_N {
        return Err(Error::Infeasible { what: "Fock moment order", requested: n, cap: MAX_FOCK_N });
    }
    Ok(())
}

/// τ(:ρ(Δ₁)⋯ρ(Δₙ):) through the W-chain; the outermost W is only needed
/// through its vacuum entry.
pub fn wick_moment(bundle: &JKernelBundle, deltas: &[SiteSet], fs: &FockSpace) -> Result<f64> {
    check_deltas(bundle, deltas)?;
    let n = deltas.len();
    check_fock(bundle, fs, n)?;
    let mut r = FockOperator::identity(fs);
    for &s in &deltas[..n - 1] {
        r = w_op(bundle, s, &r, fs)?;
    }
    real_part(vacuum_expectation_w(bundle, deltas[n - 1], &r)?)
}

/// θ⁽ⁿ⁾(Δ₁×⋯×Δₙ) = τ(:ρ(Δ₁)⋯ρ(Δₙ):)/n!.
pub fn correlation_measure(bundle: &JKernelBundle, deltas: &[SiteSet], fs: &FockSpace) -> Result<f64> {
    Ok(wick_moment(bundle, deltas, fs)? / factorial(deltas.len()))
}

/// Expands τ(W(Δₙ, ⋯ W(Δ₁, I))) into c-coefficient products times quasi-free
/// expectations of the words X⁽ⁿ⁾⋯X⁽¹⁾Y⁽¹⁾⋯Y⁽ⁿ⁾.
pub fn pairing_expansion_moment(bundle: &JKernelBundle, deltas: &[SiteSet], fs: &FockSpace) -> Result<f64> {
    check_deltas(bundle, deltas)?;
    let n = deltas.len();
    if n > MAX_PAIRING_N {
        return Err(Error::Infeasible { what: "pairing-expansion order", requested: n, cap: MAX_PAIRING_N });
    }
    if bundle.d() > MAX_PAIRING_D {
        return Err(Error::Infeasible {
            what: "pairing-expansion ground set size",
            requested: bundle.d(),
            cap: MAX_PAIRING_D,
        });
    }
    if fs.d() != bundle.d() {
        return Err(Error::DimensionMismatch { expected: bundle.d(), found: fs.d() });
    }
    let d = bundle.d();
    // Per level: every (coefficient, X letter, Y letter) with a nonzero coefficient.
    let levels: Vec<Vec<(C64, Primitive, Primitive)>> = deltas
        .iter()
        .map(|&s| {
            let blocks: Vec<SeriesBlock> = crate::fock::series_blocks(bundle, s)?;
            let mut choices = Vec::new();
            for b in &blocks {
                for x in Sign::BOTH {
                    for y in Sign::BOTH {
                        let c = b.coeff(x, y);
                        for i in 0..d {
                            for j in 0..d {
                                if c[(i, j)] != C64::new(0.0, 0.0) {
                                    choices.push((c[(i, j)], b.x(x, i), b.y(y, j)));
                                }
                            }
                        }
                    }
                }
            }
            Ok(choices)
        })
        .collect::<Result<_>>()?;
    let mut word = vec![Primitive::Create(0); 2 * n];
    let mut total = C64::new(0.0, 0.0);
    fn rec(
        level: usize,
        coeff: C64,
        levels: &[Vec<(C64, Primitive, Primitive)>],
        word: &mut [Primitive],
        total: &mut C64,
    ) {
        let n = levels.len();
        if level == n {
            *total += coeff * quasi_free_word(word);
            return;
        }
        // Level l (0-based) places X at n−1−l and Y at n+l.
        for &(c, x, y) in &levels[level] {
            word[n - 1 - level] = x;
            word[n + level] = y;
            rec(level + 1, coeff * c, levels, word, total);
        }
    }
    rec(0, C64::new(1.0, 0.0), &levels, &mut word, &mut total);
    real_part(total)
}
