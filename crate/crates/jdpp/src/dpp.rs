//! Exact determinantal point processes on a finite ground set.
//!
//! Subsets are bitmasks: 0-based site `i` is bit `i` (site label `i+1`).

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::sites::SiteSet;
use crate::space::{
    hat_transform, hermitian_eigen, validate_correlation_operator, JKernelBundle, Kernel, SpacePartition, C64,
    DEFAULT_TOL,
};

/// Largest ground set for exhaustive tables (2^16 subsets).
pub const MAX_TABLE_D: usize = 16;

/// Negative probabilities down to this value are rounding noise and clamped.
pub const CLAMP_FLOOR: f64 = -1e-12;

#[derive(Clone, Debug)]
pub struct DppTable {
    space: Arc<SpacePartition>,
    probs: Vec<f64>,
    clamp_residual: f64,
    kernel: Kernel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableDocument {
    pub d: usize,
    pub probs: Vec<f64>,
    pub clamp_residual: f64,
}

impl DppTable {
    pub fn space(&self) -> &Arc<SpacePartition> {
        &self.space
    }

    pub fn d(&self) -> usize {
        self.space.d()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, s: SiteSet) -> f64 {
        self.probs[s.mask() as usize]
    }

    /// Total magnitude of negative entries clamped to zero.
    pub fn clamp_residual(&self) -> f64 {
        self.clamp_residual
    }

    /// Kernel whose correlation weights the table carries.
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn to_document(&self) -> TableDocument {
        TableDocument { d: self.d(), probs: self.probs.clone(), clamp_residual: self.clamp_residual }
    }

    /// E[Π_{x∈S} 1{x∈Y}] for every S, by the superset zeta transform.
    pub fn correlation_weights(&self) -> Vec<f64> {
        let mut w = self.probs.clone();
        for bit in 0..self.d() {
            let b = 1usize << bit;
            for m in 0..w.len() {
                if m & b == 0 {
                    w[m] += w[m | b];
                }
            }
        }
        w
    }
}

fn check_table_size(d: usize) -> Result<()> {
    if d > MAX_TABLE_D {
        return Err(Error::Infeasible { what: "subset table ground set size", requested: d, cap: MAX_TABLE_D });
    }
    Ok(())
}

/// P(Y=S) = Σ_{A⊇S} (−1)^{|A∖S|} det(F_A).
pub fn dpp_distribution(k: &Kernel) -> Result<DppTable> {
    let d = k.d();
    check_table_size(d)?;
    let report = validate_correlation_operator(k, DEFAULT_TOL);
    if !report.passed {
        return Err(Error::InvalidKernel(report.failures.join("; ")));
    }
    let mut p: Vec<f64> = SiteSet::all(d).map(|s| k.weight(s).re).collect();
    for bit in 0..d {
        let b = 1usize << bit;
        for m in 0..p.len() {
            if m & b == 0 {
                p[m] -= p[m | b];
            }
        }
    }
    let mut clamp_residual = 0.0;
    for (mask, v) in p.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < CLAMP_FLOOR {
                return Err(Error::NegativeProbability { mask: mask as u64, value: *v });
            }
            log::debug!("clamping P(mask {mask}) = {v:e} to 0");
            clamp_residual += -*v;
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidKernel(format!("table sums to {total}")));
    }
    Ok(DppTable { space: k.space().clone(), probs: p, clamp_residual, kernel: k.clone() })
}

/// Iγ = (γ∩X₁) ∪ (X₂∖γ), which is γ Δ X₂.
pub fn particle_hole(space: &SpacePartition, s: SiteSet) -> SiteSet {
    s.sym_difference(space.x2())
}

pub fn particle_hole_pushforward(table: &DppTable) -> DppTable {
    let x2 = table.space.x2().mask() as usize;
    let mut probs = vec![0.0; table.probs.len()];
    for (m, &v) in table.probs.iter().enumerate() {
        probs[m ^ x2] = v;
    }
    DppTable {
        space: table.space.clone(),
        probs,
        clamp_residual: table.clamp_residual,
        kernel: hat_transform(&table.kernel),
    }
}

/// The point process with correlation kernel 𝕂, as I_*(DPP(K)).
pub fn j_dpp_distribution(bundle: &JKernelBundle) -> Result<DppTable> {
    Ok(particle_hole_pushforward(&dpp_distribution(bundle.k())?))
}

/// E[Π_i |Y∩Δᵢ|].
pub fn moments_by_enumeration(table: &DppTable, deltas: &[SiteSet]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::Empty("subset list"));
    }
    for &s in deltas {
        table.space.check(s)?;
    }
    Ok(table
        .probs
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let y = SiteSet::from_mask(m as u64);
            p * deltas.iter().map(|&s| y.intersect(s).len() as f64).product::<f64>()
        })
        .sum())
}

/// Σ_{A⊇S} P(A).
pub fn correlation_from_distribution(table: &DppTable, s: SiteSet) -> Result<f64> {
    table.space.check(s)?;
    let s = s.mask() as usize;
    Ok(table.probs.iter().enumerate().filter(|(m, _)| m & s == s).map(|(_, &p)| p).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplerReport {
    pub count: usize,
    pub seed: u64,
    pub empirical_marginals: Vec<f64>,
    pub predicted_marginals: Vec<f64>,
    /// Largest |empirical − predicted| in binomial standard errors.
    pub max_marginal_z: f64,
}

#[derive(Clone, Debug)]
pub struct SampleRun {
    pub samples: Vec<SiteSet>,
    pub report: SamplerReport,
}

/// Generator for sample `index`: ChaCha8 seeded with `seed`, stream `index`.
/// Each sample owns its stream, so runs are reproducible and splittable.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Sequential sampling from the projection onto span of `cols`.
fn sample_projection<R: Rng>(rng: &mut R, mut cols: Vec<Vec<C64>>, d: usize) -> SiteSet {
    let mut out = SiteSet::EMPTY;
    while !cols.is_empty() {
        let weights: Vec<f64> = (0..d).map(|x| cols.iter().map(|c| c[x].norm_sqr()).sum()).collect();
        let x = pick(rng, &weights);
        out = out.union(SiteSet::singleton(x));
        let j = (0..cols.len()).max_by(|&a, &b| cols[a][x].norm().total_cmp(&cols[b][x].norm())).expect("nonempty");
        let pivot = cols.swap_remove(j);
        for c in cols.iter_mut() {
            let f = c[x] / pivot[x];
            for (ci, pi) in c.iter_mut().zip(&pivot) {
                *ci -= f * pi;
            }
        }
        // Gram-Schmidt on the remaining columns.
        for a in 0..cols.len() {
            for b in 0..a {
                let proj: C64 = cols[b].iter().zip(&cols[a]).map(|(u, v)| u.conj() * v).sum();
                let (lo, hi) = cols.split_at_mut(a);
                for (v, u) in hi[0].iter_mut().zip(&lo[b]) {
                    *v -= proj * u;
                }
            }
            let n: f64 = cols[a].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for v in cols[a].iter_mut() {
                *v /= n;
            }
        }
    }
    out
}

/// Exact samples of DPP(K): select eigenvectors with probability λ, then
/// sample the resulting projection process point by point.
pub fn hkpv_sample(k: &Kernel, seed: u64, count: usize) -> Result<SampleRun> {
    if count == 0 {
        return Err(Error::Empty("sample count"));
    }
    let report = validate_correlation_operator(k, DEFAULT_TOL);
    if !report.passed {
        return Err(Error::InvalidKernel(report.failures.join("; ")));
    }
    let d = k.d();
    let (values, vectors) = hermitian_eigen(k.flat());
    let samples: Vec<SiteSet> = (0..count as u64)
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let cols: Vec<Vec<C64>> = values
                .iter()
                .enumerate()
                .filter(|(_, &l)| rng.random::<f64>() < l.clamp(0.0, 1.0))
                .map(|(c, _)| vectors.column(c).iter().copied().collect())
                .collect();
            sample_projection(&mut rng, cols, d)
        })
        .collect();
    let predicted = (0..d).map(|i| k.flat()[(i, i)].re).collect();
    Ok(SampleRun { report: marginal_report(&samples, predicted, seed), samples })
}

/// Samples with correlation kernel 𝕂: DPP(K) samples mapped through I.
pub fn sample_j_dpp(bundle: &JKernelBundle, seed: u64, count: usize) -> Result<SampleRun> {
    let run = hkpv_sample(bundle.k(), seed, count)?;
    let space = bundle.space();
    let samples: Vec<SiteSet> = run.samples.iter().map(|&s| particle_hole(space, s)).collect();
    let predicted = (0..bundle.d()).map(|i| bundle.khat().flat()[(i, i)].re).collect();
    Ok(SampleRun { report: marginal_report(&samples, predicted, seed), samples })
}

fn marginal_report(samples: &[SiteSet], predicted: Vec<f64>, seed: u64) -> SamplerReport {
    let n = samples.len() as f64;
    let empirical: Vec<f64> =
        (0..predicted.len()).map(|i| samples.iter().filter(|s| s.contains(i)).count() as f64 / n).collect();
    let max_marginal_z = empirical
        .iter()
        .zip(&predicted)
        .map(|(&e, &p)| {
            let se = (p * (1.0 - p) / n).sqrt();
            if se > 0.0 {
                (e - p).abs() / se
            } else if (e - p).abs() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    SamplerReport {
        count: samples.len(),
        seed,
        empirical_marginals: empirical,
        predicted_marginals: predicted,
        max_marginal_z,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Subsets with expected count below 5, merged into one cell.
    pub pooled_cells: usize,
}

/// Pearson χ² of sample counts against the table.
pub fn chi_square_test(table: &DppTable, samples: &[SiteSet]) -> ChiSquareReport {
    let n = samples.len() as f64;
    let mut observed = vec![0usize; table.probs.len()];
    for s in samples {
        observed[s.mask() as usize] += 1;
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let (mut pool_obs, mut pool_exp, mut pooled) = (0.0, 0.0, 0usize);
    for (m, &p) in table.probs.iter().enumerate() {
        let e = p * n;
        let o = observed[m] as f64;
        if e >= 5.0 {
            statistic += (o - e).powi(2) / e;
            cells += 1;
        } else {
            pool_obs += o;
            pool_exp += e;
            pooled += 1;
        }
    }
    if pooled > 0 {
        if pool_exp > 0.0 {
            statistic += (pool_obs - pool_exp).powi(2) / pool_exp;
            cells += 1;
        } else if pool_obs > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.saturating_sub(1);
    let p_value = if !statistic.is_finite() {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map(|c| c.sf(statistic)).unwrap_or(0.0)
    };
    ChiSquareReport { statistic, dof, p_value, pooled_cells: pooled }
}

#[derive(Serialize)]
struct SampleLine {
    mask: u64,
    sites: Vec<usize>,
}

/// One JSON object `{"mask": .., "sites": [..]}` per line.
pub fn write_samples_jsonl<W: Write>(samples: &[SiteSet], mut out: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, &SampleLine { mask: s.mask(), sites: s.labels() })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
