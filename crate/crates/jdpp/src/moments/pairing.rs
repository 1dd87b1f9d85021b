//! Pair partitions, crossings, and quasi-free vacuum expectations.

use crate::error::{Error, Result};
use crate::fock::{Primitive, Sign};
use crate::space::{CVector, C64};

/// Longest word handled by the pairing sums.
pub const MAX_PAIRING_LEN: usize = 12;

/// Pair partition of {0, .., 2n−1}; each pair is (i, j) with i < j,
/// listed by increasing i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPartition {
    pub pairs: Vec<(usize, usize)>,
    pub crossings: usize,
}

/// Number of pair pairs (i_k, j_k), (i_l, j_l) with i_k < i_l < j_k < j_l.
pub fn count_crossings(pairs: &[(usize, usize)]) -> usize {
    let mut n = 0;
    for (a, &(i1, j1)) in pairs.iter().enumerate() {
        for &(i2, j2) in &pairs[a + 1..] {
            if (i1 < i2 && i2 < j1 && j1 < j2) || (i2 < i1 && i1 < j2 && j2 < j1) {
                n += 1;
            }
        }
    }
    n
}

/// All (n2−1)!! pair partitions of {0, .., n2−1}, the smallest free index
/// being paired with each later index in increasing order.
pub fn pair_partitions(n2: usize) -> Result<impl Iterator<Item = PairPartition>> {
    if n2 % 2 == 1 {
        return Err(Error::OddLength(n2));
    }
    if n2 > MAX_PAIRING_LEN {
        return Err(Error::Infeasible { what: "pair partition length", requested: n2, cap: MAX_PAIRING_LEN });
    }
    fn rec(free: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, out: &mut Vec<PairPartition>) {
        if free.is_empty() {
            out.push(PairPartition { pairs: current.clone(), crossings: count_crossings(current) });
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let partner = free.remove(k);
            current.push((first, partner));
            rec(free, current, out);
            current.pop();
            free.insert(k, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(&mut (0..n2).collect(), &mut Vec::new(), &mut out);
    Ok(out.into_iter())
}

/// Σ_ν (−1)^Cross(ν) Π_k value(j_k, i_k) over pairings with `Minus` at every
/// smaller index i_k and `Plus` at every larger index j_k.
///
/// The crossing sign is accumulated pair by pair: pairing the smallest free
/// index p with q contributes (−1)^(free indices strictly between p and q).
fn admissible_pairing_sum(signs: &[Sign], value: &dyn Fn(usize, usize) -> C64) -> C64 {
    let n = signs.len();
    let plus = signs.iter().filter(|&&s| s == Sign::Plus).count();
    if n % 2 == 1 || 2 * plus != n {
        return C64::new(0.0, 0.0);
    }
    fn rec(free: &mut Vec<usize>, signs: &[Sign], value: &dyn Fn(usize, usize) -> C64) -> C64 {
        if free.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let p = free[0];
        if signs[p] != Sign::Minus {
            return C64::new(0.0, 0.0);
        }
        let mut total = C64::new(0.0, 0.0);
        for k in 1..free.len() {
            let q = free[k];
            if signs[q] != Sign::Plus {
                continue;
            }
            let v = value(q, p);
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
            free.remove(k);
            let first = free.remove(0);
            total += v * sign * rec(free, signs, value);
            free.insert(0, first);
            free.insert(k, q);
        }
        total
    }
    rec(&mut (0..n).collect(), signs, value)
}

/// Quasi-free vacuum expectation τ(a^{◇₁}(g₁)⋯a^{◇ₙ}(gₙ)) by the pairing sum.
/// Words with odd length or unequal numbers of `Plus` and `Minus` give 0.
pub fn quasi_free_expectation(vectors: &[CVector], signs: &[Sign]) -> Result<C64> {
    if vectors.len() != signs.len() {
        return Err(Error::DimensionMismatch { expected: vectors.len(), found: signs.len() });
    }
    if vectors.len() > MAX_PAIRING_LEN {
        return Err(Error::Infeasible { what: "word length", requested: vectors.len(), cap: MAX_PAIRING_LEN });
    }
    if let Some(first) = vectors.first() {
        for v in vectors {
            if v.len() != first.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), found: v.len() });
            }
        }
    }
    // (g_j, g_i), linear in g_j.
    Ok(admissible_pairing_sum(signs, &|j, i| vectors[i].dotc(&vectors[j])))
}

/// Same sum for a word of single-mode operators, where (e_k, e_l) = δ_kl.
pub fn quasi_free_word(word: &[Primitive]) -> C64 {
    let signs: Vec<Sign> = word
        .iter()
        .map(|p| match p {
            Primitive::Create(_) => Sign::Plus,
            Primitive::Annihilate(_) => Sign::Minus,
        })
        .collect();
    admissible_pairing_sum(&signs, &|j, i| {
        if word[j].mode() == word[i].mode() {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Reference evaluation summing over every pair partition and filtering
/// admissible ones; used to cross-check the pruned recursion.
pub fn quasi_free_by_partitions(vectors: &[CVector], signs: &[Sign]) -> Result<C64> {
    if vectors.len() % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut total = C64::new(0.0, 0.0);
    for nu in pair_partitions(vectors.len())? {
        if nu.pairs.iter().any(|&(i, j)| signs[i] != Sign::Minus || signs[j] != Sign::Plus) {
            continue;
        }
        let sign = if nu.crossings % 2 == 0 { 1.0 } else { -1.0 };
        let prod = nu.pairs.iter().fold(C64::new(sign, 0.0), |acc, &(i, j)| acc * vectors[i].dotc(&vectors[j]));
        total += prod;
    }
    Ok(total)
}
