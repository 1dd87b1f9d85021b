//! Wick moments as signed sums over permutations of cycle traces.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sites::SiteSet;
use crate::space::{CMatrix, JKernelBundle, C64};

pub const MAX_CYCLE_N: usize = 8;

/// Rearranges `p` into the next permutation in lexicographic order.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Cycles of ξ, each listed as (l₁, ξ(l₁), ξ²(l₁), …) from its smallest element.
pub fn cycles(xi: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; xi.len()];
    let mut out = Vec::new();
    for start in 0..xi.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut l = start;
        while !seen[l] {
            seen[l] = true;
            c.push(l);
            l = xi[l];
        }
        out.push(c);
    }
    out
}

/// Rejects imaginary parts above 1e−10 relative to max(1, |re|).
pub(crate) fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

pub(crate) fn check_deltas(bundle: &JKernelBundle, deltas: &[SiteSet]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::Empty("subset list"));
    }
    for &s in deltas {
        bundle.space().check(s)?;
    }
    Ok(())
}

/// τ(:ρ(Δ₁)⋯ρ(Δₙ):) = Σ_ξ sgn(ξ) Π_cycles 𝕋_ψ, with 1-cycles
/// Tr 𝕂_{Δ∩X₁} + Tr 𝕂_{Δ∩X₂} and k-cycles Tr(P_{Δ_{l₁}}𝕂 P_{Δ_{l₂}}𝕂 ⋯ P_{Δ_{l_k}}𝕂).
pub fn cycle_trace_moment(bundle: &JKernelBundle, deltas: &[SiteSet]) -> Result<f64> {
    check_deltas(bundle, deltas)?;
    let n = deltas.len();
    if n > MAX_CYCLE_N {
        return Err(Error::Infeasible { what: "cycle-trace moment order", requested: n, cap: MAX_CYCLE_N });
    }
    let space = bundle.space();
    let kk = bundle.khat();
    let factors: Vec<CMatrix> = deltas.iter().map(|&s| space.projection(s) * kk.flat()).collect();
    let mut memo: HashMap<Vec<usize>, C64> = HashMap::new();
    let mut cycle_value = |c: &[usize]| -> C64 {
        if let [l] = c {
            let s = deltas[*l];
            return kk.trace_on(s.intersect(space.x1())) + kk.trace_on(s.intersect(space.x2()));
        }
        *memo.entry(c.to_vec()).or_insert_with(|| {
            let mut m = factors[c[0]].clone();
            for &l in &c[1..] {
                m *= &factors[l];
            }
            m.trace()
        })
    };
    let mut xi: Vec<usize> = (0..n).collect();
    let mut total = C64::new(0.0, 0.0);
    loop {
        let cs = cycles(&xi);
        let sign = if (n - cs.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut term = C64::new(sign, 0.0);
        for c in &cs {
            term *= cycle_value(c);
        }
        total += term;
        if !next_permutation(&mut xi) {
            break;
        }
    }
    real_part(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_enumeration() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(
            seen,
            vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
        );
    }

    #[test]
    fn cycle_decomposition() {
        assert_eq!(cycles(&[1, 2, 0, 3]), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(cycles(&[0, 1]), vec![vec![0], vec![1]]);
    }
}
