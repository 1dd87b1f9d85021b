//! Independent reference computations for integration tests.
//!
//! Nothing here calls the library's Fock primitives, determinant routines or
//! subset tables; Fock operators are Kronecker products of 2×2 matrices and
//! determinants use the Leibniz expansion.

#![allow(dead_code)]

use jdpp::{CMatrix, JKernelBundle, SiteSet, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// a⁺ for `mode` among `modes`; basis index bit k is mode k, with the string
/// of Z factors on the lower modes.
pub fn kron_creation(modes: usize, mode: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let raise = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
    let mut out = CMatrix::identity(1, 1);
    for k in (0..modes).rev() {
        let f = if k > mode {
            &id
        } else if k == mode {
            &raise
        } else {
            &z
        };
        out = kron(&out, f);
    }
    out
}

pub struct KronFock {
    pub d: usize,
    pub plus: Vec<CMatrix>,
    pub minus: Vec<CMatrix>,
}

impl KronFock {
    pub fn new(d: usize) -> Self {
        let plus: Vec<CMatrix> = (0..2 * d).map(|m| kron_creation(2 * d, m)).collect();
        let minus = plus.iter().map(|p| p.adjoint()).collect();
        KronFock { d, plus, minus }
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.d)
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }
}

/// J_Δ as a diagonal matrix: +1 on Δ∩X₁, −1 on Δ∩X₂.
pub fn j_matrix(bundle: &JKernelBundle, delta: SiteSet) -> CMatrix {
    let d = bundle.d();
    let parts = bundle.space().labels();
    CMatrix::from_fn(
        d,
        d,
        |i, j| {
            if i == j && delta.contains(i) {
                c(if parts[i] == 1 { 1.0 } else { -1.0 })
            } else {
                c(0.0)
            }
        },
    )
}

/// 𝕂 computed directly from K: columns in X₂ replaced by those of 1 − K.
pub fn hat_oracle(bundle: &JKernelBundle) -> CMatrix {
    let k = bundle.k().flat();
    let parts = bundle.space().labels();
    let d = k.nrows();
    CMatrix::from_fn(d, d, |i, j| {
        if parts[j] == 1 {
            k[(i, j)]
        } else {
            let delta = if i == j { 1.0 } else { 0.0 };
            c(delta) - k[(i, j)]
        }
    })
}

/// Dense ρ(Δ) from the defining formula, built on Kronecker operators.
pub fn rho_oracle(bundle: &JKernelBundle, delta: SiteSet, f: &KronFock) -> CMatrix {
    let d = bundle.d();
    let j = j_matrix(bundle, delta);
    let k1 = bundle.k1().flat();
    let k2 = bundle.k2().flat();
    let m = k2 * &j * k1;
    let b1 = (k1 * &j * k1).map(|z| -z.conj());
    let b2 = k2 * &j * k2;
    let mut out = CMatrix::zeros(f.dim(), f.dim());
    for i in 0..d {
        for l in 0..d {
            let pair = &f.plus[d + i] * &f.plus[l];
            out += pair.scale(1.0) * m[(i, l)];
            out += pair.adjoint() * m[(i, l)].conj();
            out += &f.plus[i] * &f.minus[l] * b1[(i, l)];
            out += &f.plus[d + i] * &f.minus[d + l] * b2[(i, l)];
        }
    }
    let kk = hat_oracle(bundle);
    let shift: C64 = delta.indices().iter().map(|&i| kk[(i, i)]).sum();
    out + f.identity() * shift
}

/// τ(:ρ(Δ₁)⋯ρ(Δₙ):) through the recurrence on dense oracle matrices.
pub fn wick_oracle(bundle: &JKernelBundle, deltas: &[SiteSet], f: &KronFock) -> CMatrix {
    match deltas.len() {
        0 => f.identity(),
        n => {
            let last = deltas[n - 1];
            let head = &deltas[..n - 1];
            let mut out = rho_oracle(bundle, last, f) * wick_oracle(bundle, head, f);
            for i in 0..n - 1 {
                let mut t = head.to_vec();
                t[i] = t[i].intersect(last);
                out -= wick_oracle(bundle, &t, f);
            }
            out
        }
    }
}

pub fn leibniz_det(m: &CMatrix) -> C64 {
    let n = m.nrows();
    if n == 0 {
        return c(1.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = c(0.0);
    fn heap(k: usize, perm: &mut Vec<usize>, sign: &mut f64, m: &CMatrix, total: &mut C64) {
        if k == 1 {
            let term: C64 = perm.iter().enumerate().map(|(r, &col)| m[(r, col)]).product();
            *total += term * *sign;
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, sign, m, total);
            if i < k - 1 {
                let j = if k.is_multiple_of(2) { i } else { 0 };
                perm.swap(j, k - 1);
                *sign = -*sign;
            }
        }
    }
    let mut sign = 1.0;
    heap(n, &mut perm, &mut sign, m, &mut total);
    total
}

fn sub(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |r, col| m[(idx[r], idx[col])])
}

/// P(Y = A) for the DPP of `k` by inclusion–exclusion over supersets.
pub fn inclusion_exclusion(k: &CMatrix) -> Vec<f64> {
    let d = k.nrows();
    let full = 1usize << d;
    (0..full)
        .map(|a| {
            let mut p = 0.0;
            for b in 0..full {
                if b & a == a {
                    let idx: Vec<usize> = (0..d).filter(|i| b >> i & 1 == 1).collect();
                    let sign = if (b ^ a).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    p += sign * leibniz_det(&sub(k, &idx)).re;
                }
            }
            p
        })
        .collect()
}

/// P(Y = A) = |det(K − I_Ā)| for the DPP of `k`.
pub fn signed_determinant_probability(k: &CMatrix, a: usize) -> f64 {
    let d = k.nrows();
    let mut m = k.clone();
    for i in 0..d {
        if a >> i & 1 == 0 {
            m[(i, i)] -= c(1.0);
        }
    }
    leibniz_det(&m).re.abs()
}

/// Distribution of the 𝕂-process: DPP of K, then symmetric difference with X₂.
pub fn j_dpp_oracle(bundle: &JKernelBundle) -> Vec<f64> {
    let base = inclusion_exclusion(bundle.k().flat());
    let x2 = bundle.space().x2().mask() as usize;
    let mut out = vec![0.0; base.len()];
    for (a, p) in base.iter().enumerate() {
        out[a ^ x2] = *p;
    }
    out
}

/// Σ over distinct-site tuples of the Leibniz determinant of 𝕂 on the tuple.
pub fn det_sum_oracle(bundle: &JKernelBundle, deltas: &[SiteSet]) -> f64 {
    let kk = hat_oracle(bundle);
    fn rec(l: usize, deltas: &[SiteSet], tuple: &mut Vec<usize>, kk: &CMatrix, total: &mut C64) {
        if l == deltas.len() {
            *total += leibniz_det(&sub(kk, tuple));
            return;
        }
        for x in deltas[l].indices() {
            if !tuple.contains(&x) {
                tuple.push(x);
                rec(l + 1, deltas, tuple, kk, total);
                tuple.pop();
            }
        }
    }
    let mut total = c(0.0);
    rec(0, deltas, &mut Vec::new(), &kk, &mut total);
    total.re
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
