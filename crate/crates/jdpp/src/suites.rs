//! Verification suites over sets of kernel bundles.
//!
//! Each suite reports named metrics against fixed tolerances. Suites are
//! deterministic given their parameters; only `runtime_ms` varies between runs.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::json;

use crate::dpp::{
    chi_square_test, j_dpp_distribution, moments_by_enumeration, particle_hole_pushforward, sample_j_dpp,
    write_samples_jsonl, MAX_TABLE_D,
};
use crate::error::{Error, Result};
use crate::fock::{
    annihilation, bogoliubov_fields, creation, gauge_fields, rho_delta, vacuum_expectation_w, w_op, wick_product,
    FockOperator, FockSpace, FockVector, RhoForm, WickRoute,
};
use crate::kernel_io::random_valid_kernel;
use crate::moments::{
    correlation_measure, cycle_trace_moment, determinant_moment_sum, factorial, growth_bound_check, npoint_s,
    pairing_expansion_moment, two_point_t, MAX_FOCK_D, MAX_PAIRING_D,
};
use crate::sites::{format_tuple, SiteSet};
use crate::space::{
    assemble_j_kernel, build_space, correlation_determinant, real_matrix, CVector, JKernelBundle, Kernel, C64,
    DEFAULT_TOL,
};

pub const SUITE_NAMES: [&str; 11] = [
    "car",
    "rho-algebra",
    "wick",
    "four-route",
    "moment-identity",
    "boo-pushforward",
    "nonnegativity",
    "worked-example",
    "growth-bounds",
    "quasi-free",
    "sampler",
];

/// Identifier of the statement each suite exercises.
pub fn exercises(suite: &str) -> &'static str {
    match suite {
        "car" => "car-relations-of-all-field-families",
        "rho-algebra" => "particle-density-definition-and-series",
        "wick" => "wick-recurrence-equals-w-chain",
        "four-route" => "correlation-measure-is-determinantal",
        "moment-identity" => "density-moments-equal-point-process-moments",
        "boo-pushforward" => "particle-hole-pushforward-kernel",
        "nonnegativity" => "j-hermitian-minors-nonnegative",
        "worked-example" => "rank-one-two-site-example",
        "growth-bounds" => "local-growth-bound",
        "quasi-free" => "quasi-free-closed-forms",
        "sampler" => "exact-sampler-goodness-of-fit",
        _ => "unknown",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `true` when `value` must stay at or below `tolerance`, `false` for at or above.
    pub upper: bool,
    pub passed: bool,
}

impl Metric {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Metric { name: name.into(), value, tolerance, upper: true, passed: value <= tolerance }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Metric { name: name.into(), value, tolerance, upper: false, passed: value >= tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub exercises: String,
    pub passed: bool,
    pub checks: usize,
    pub metrics: Vec<Metric>,
    pub details: serde_json::Value,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub seed: u64,
    pub car_pairs: usize,
    pub commutator_vectors: usize,
    pub wick_tuples: usize,
    pub wick_max_n: usize,
    pub moment_max_n: usize,
    pub pairing_max_n: usize,
    pub growth_max_n: usize,
    pub quasi_free_draws: usize,
    pub nonneg_draws: usize,
    pub nonneg_max_d: usize,
    pub sampler_count: usize,
    pub sampler_seeds: Vec<u64>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            seed: 0,
            car_pairs: 200,
            commutator_vectors: 50,
            wick_tuples: 8,
            wick_max_n: 3,
            moment_max_n: 3,
            pairing_max_n: 2,
            growth_max_n: 4,
            quasi_free_draws: 100,
            nonneg_draws: 1000,
            nonneg_max_d: 6,
            sampler_count: 100_000,
            sampler_seeds: vec![1, 2, 3],
        }
    }
}

/// Ground-set cap of each suite; `Err` names the violated cap.
pub fn check_feasible(suite: &str, d: usize) -> Result<()> {
    let (what, cap) = match suite {
        "car" | "rho-algebra" | "wick" | "four-route" | "growth-bounds" | "quasi-free" => {
            ("Fock suite ground set size", MAX_FOCK_D)
        }
        "moment-identity" => ("moment-identity ground set size", MAX_FOCK_D),
        "boo-pushforward" | "sampler" => ("subset table ground set size", MAX_TABLE_D),
        "nonnegativity" | "worked-example" => return Ok(()),
        other => return Err(Error::InvalidKernel(format!("unknown suite `{other}`"))),
    };
    if d > cap {
        return Err(Error::Infeasible { what, requested: d, cap });
    }
    Ok(())
}

pub fn run_suite(name: &str, bundles: &[JKernelBundle], params: &SuiteParams) -> Result<SuiteOutcome> {
    for b in bundles {
        check_feasible(name, b.d())?;
    }
    let start = Instant::now();
    let (metrics, checks, details) = match name {
        "car" => car(bundles, params)?,
        "rho-algebra" => rho_algebra(bundles, params)?,
        "wick" => wick(bundles, params)?,
        "four-route" => four_route(bundles, params)?,
        "moment-identity" => moment_identity(bundles, params)?,
        "boo-pushforward" => boo_pushforward(bundles)?,
        "nonnegativity" => nonnegativity(bundles, params)?,
        "worked-example" => worked_example()?,
        "growth-bounds" => growth_bounds(bundles, params)?,
        "quasi-free" => quasi_free(bundles, params)?,
        "sampler" => sampler(bundles, params)?,
        other => return Err(Error::InvalidKernel(format!("unknown suite `{other}`"))),
    };
    Ok(SuiteOutcome {
        suite: name.into(),
        exercises: exercises(name).into(),
        passed: metrics.iter().all(|m| m.passed),
        checks,
        metrics,
        details,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

type SuiteResult = Result<(Vec<Metric>, usize, serde_json::Value)>;

fn rng_for(params: &SuiteParams, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(salt);
    rng
}

pub fn random_cvector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_subset<R: Rng>(rng: &mut R, d: usize) -> SiteSet {
    SiteSet::from_mask(rng.random_range(0..1u64 << d))
}

/// Singletons, X₁, X₂, the whole set, adjacent pairs and ∅, deduplicated.
pub fn covering_family(bundle: &JKernelBundle) -> Vec<SiteSet> {
    let space = bundle.space();
    let d = space.d();
    let mut fam: Vec<SiteSet> = (0..d).map(SiteSet::singleton).collect();
    fam.extend([space.x1(), space.x2(), space.all()]);
    fam.extend((0..d.saturating_sub(1)).map(|i| SiteSet::from_indices(&[i, i + 1])));
    fam.push(SiteSet::EMPTY);
    let mut out = Vec::new();
    for s in fam {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Ordered n-tuples of indices into a family of size `m`.
fn index_tuples(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..m).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

fn max_into(slot: &mut f64, v: f64) {
    if v > *slot || v.is_nan() {
        *slot = v;
    }
}

fn car(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let tol = 1e-12;
    let (mut plain, mut gauge, mut bogo) = (0.0f64, 0.0f64, 0.0f64);
    let mut checks = 0;
    for (b, bundle) in bundles.iter().enumerate() {
        let d = bundle.d();
        let fs = FockSpace::new(d)?;
        let mut rng = rng_for(params, 100 + b as u64);
        let id = FockOperator::identity(&fs);
        let residuals = |p1: &FockOperator, m1: &FockOperator, p2: &FockOperator, m2: &FockOperator, ip: C64| {
            let r1 = p1.anticommutator(p2).norm();
            let r2 = m1.anticommutator(m2).norm();
            let r3 = m1.anticommutator(p2).sub(&id.scale(ip)).norm();
            r1.max(r2).max(r3)
        };
        for _ in 0..params.car_pairs {
            let g = random_cvector(&mut rng, 2 * d);
            let h = random_cvector(&mut rng, 2 * d);
            let ip = g.dotc(&h); // (h, g)
            let r = residuals(
                &creation(&g, &fs)?,
                &annihilation(&g, &fs)?,
                &creation(&h, &fs)?,
                &annihilation(&h, &fs)?,
                ip,
            );
            max_into(&mut plain, r);
            let phi = random_cvector(&mut rng, d);
            let psi = random_cvector(&mut rng, d);
            let ip = phi.dotc(&psi); // (ψ, φ)
            let (gp, gm) = gauge_fields(bundle, &phi, &fs)?;
            let (hp, hm) = gauge_fields(bundle, &psi, &fs)?;
            max_into(&mut gauge, residuals(&gp, &gm, &hp, &hm, ip));
            let (ap, am) = bogoliubov_fields(bundle, &phi, &fs)?;
            let (bp, bm) = bogoliubov_fields(bundle, &psi, &fs)?;
            max_into(&mut bogo, residuals(&ap, &am, &bp, &bm, ip));
            checks += 9;
        }
    }
    Ok((
        vec![
            Metric::at_most("plain_field_residual", plain, tol),
            Metric::at_most("gauge_field_residual", gauge, tol),
            Metric::at_most("bogoliubov_field_residual", bogo, tol),
        ],
        checks,
        json!({ "bundles": bundles.len(), "pairs_per_bundle": params.car_pairs }),
    ))
}

fn rho_algebra(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let (mut herm, mut comm, mut add, mut forms) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut checks = 0;
    for (b, bundle) in bundles.iter().enumerate() {
        let d = bundle.d();
        let fs = FockSpace::new(d)?;
        let mut rng = rng_for(params, 200 + b as u64);
        let subsets: Vec<SiteSet> = SiteSet::all(d).collect();
        let rho: Vec<FockOperator> =
            subsets.iter().map(|&s| rho_delta(bundle, s, &fs, RhoForm::Definition)).collect::<Result<_>>()?;
        for (s, r) in subsets.iter().zip(&rho) {
            max_into(&mut herm, r.hermiticity_residual());
            max_into(&mut forms, r.distance(&rho_delta(bundle, *s, &fs, RhoForm::Series)?));
            checks += 2;
        }
        let vectors: Vec<FockVector> =
            (0..params.commutator_vectors).map(|_| FockVector::random(&fs, &mut rng)).collect();
        for a in 0..subsets.len() {
            for c in a + 1..subsets.len() {
                let (ra, rc) = (&rho[a], &rho[c]);
                let worst = vectors
                    .iter()
                    .map(|v| ra.apply(&rc.apply(v)).sub(&rc.apply(&ra.apply(v))).norm())
                    .fold(0.0, f64::max);
                max_into(&mut comm, worst);
                checks += 1;
                if subsets[a].intersect(subsets[c]).is_empty() {
                    let u = subsets[a].union(subsets[c]).mask() as usize;
                    max_into(&mut add, rho[u].distance(&ra.add(rc)));
                    checks += 1;
                }
            }
        }
    }
    Ok((
        vec![
            Metric::at_most("hermiticity_residual", herm, 1e-11),
            Metric::at_most("commutator_on_vectors", comm, 1e-10),
            Metric::at_most("additivity_residual", add, 1e-12),
            Metric::at_most("definition_vs_series", forms, 1e-11),
        ],
        checks,
        json!({ "bundles": bundles.len(), "vectors": params.commutator_vectors }),
    ))
}

/// Distinct orderings of `t`.
fn permutations_of(t: &[SiteSet]) -> Vec<Vec<SiteSet>> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    let mut out: Vec<Vec<SiteSet>> = Vec::new();
    loop {
        let p: Vec<SiteSet> = idx.iter().map(|&i| t[i]).collect();
        if !out.contains(&p) {
            out.push(p);
        }
        if !crate::moments::next_permutation(&mut idx) {
            break;
        }
    }
    out
}

fn wick(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let (mut routes, mut sym, mut commutation) = (0.0f64, 0.0f64, 0.0f64);
    let mut checks = 0;
    for (b, bundle) in bundles.iter().enumerate() {
        let d = bundle.d();
        let fs = FockSpace::new(d)?;
        let mut rng = rng_for(params, 300 + b as u64);
        for n in 1..=params.wick_max_n {
            for _ in 0..params.wick_tuples {
                let t: Vec<SiteSet> = (0..n).map(|_| random_subset(&mut rng, d)).collect();
                let chain = wick_product(bundle, &t, &fs, WickRoute::WChain)?;
                let rec = wick_product(bundle, &t, &fs, WickRoute::Recurrence)?;
                max_into(&mut routes, chain.distance(&rec));
                checks += 1;
                for p in permutations_of(&t).into_iter().skip(1) {
                    max_into(&mut sym, wick_product(bundle, &p, &fs, WickRoute::WChain)?.distance(&chain));
                    checks += 1;
                }
            }
        }
        for _ in 0..params.wick_tuples {
            let (d1, d2, d3) = (random_subset(&mut rng, d), random_subset(&mut rng, d), random_subset(&mut rng, d));
            let r = rho_delta(bundle, d3, &fs, RhoForm::Definition)?;
            let rho1 = rho_delta(bundle, d1, &fs, RhoForm::Definition)?;
            let lhs = rho1.mul(&w_op(bundle, d2, &r, &fs)?);
            let rhs = w_op(bundle, d2, &rho1.mul(&r), &fs)?.add(&w_op(bundle, d1.intersect(d2), &r, &fs)?);
            max_into(&mut commutation, lhs.distance(&rhs));
            checks += 1;
        }
    }
    Ok((
        vec![
            Metric::at_most("recurrence_vs_w_chain", routes, 1e-10),
            Metric::at_most("permutation_symmetry", sym, 1e-12),
            Metric::at_most("rho_w_commutation_identity", commutation, 1e-10),
        ],
        checks,
        json!({ "bundles": bundles.len(), "tuples_per_order": params.wick_tuples, "max_n": params.wick_max_n }),
    ))
}

fn four_route(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let (mut fock_cycle, mut det_cycle, mut pairing_cycle) = (0.0f64, 0.0f64, 0.0f64);
    let mut checks = 0;
    let mut pairing_checks = 0;
    let mut rows = Vec::new();
    for bundle in bundles {
        let d = bundle.d();
        let fs = FockSpace::new(d)?;
        let fam = covering_family(bundle);
        let id = FockOperator::identity(&fs);
        // prefix[t] = W-chain over the family indices in t.
        let mut prefix: std::collections::HashMap<Vec<usize>, FockOperator> = std::collections::HashMap::new();
        prefix.insert(vec![], id);
        for n in 1..=params.moment_max_n {
            for t in index_tuples(fam.len(), n) {
                let deltas: Vec<SiteSet> = t.iter().map(|&i| fam[i]).collect();
                let head = &t[..n - 1];
                if n < params.moment_max_n {
                    let w = w_op(bundle, deltas[n - 1], &prefix[head], &fs)?;
                    prefix.insert(t.clone(), w);
                }
                let fock = vacuum_expectation_w(bundle, deltas[n - 1], &prefix[head])?;
                if fock.im.abs() > 1e-10 {
                    return Err(Error::ImaginaryResidue(fock.im));
                }
                let cycle = cycle_trace_moment(bundle, &deltas)?;
                let det = determinant_moment_sum(bundle, &deltas)?;
                max_into(&mut fock_cycle, (fock.re - cycle).abs());
                max_into(&mut det_cycle, (det - cycle).abs());
                checks += 2;
                if d <= MAX_PAIRING_D && n <= params.pairing_max_n {
                    let p = pairing_expansion_moment(bundle, &deltas, &fs)?;
                    max_into(&mut pairing_cycle, (p - cycle).abs());
                    pairing_checks += 1;
                }
                if rows.len() < 16 && n == 2 {
                    rows.push(
                        json!({ "d": d, "deltas": format_tuple(&deltas), "fock": fock.re, "cycle": cycle, "det": det }),
                    );
                }
            }
        }
    }
    Ok((
        vec![
            Metric::at_most("fock_vs_cycle", fock_cycle, 1e-8),
            Metric::at_most("determinant_vs_cycle", det_cycle, 1e-8),
            Metric::at_most("pairing_vs_cycle", pairing_cycle, 1e-8),
        ],
        checks + pairing_checks,
        json!({ "bundles": bundles.len(), "pairing_checks": pairing_checks, "max_n": params.moment_max_n, "sample_rows": rows }),
    ))
}

fn moment_identity(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for bundle in bundles {
        let d = bundle.d();
        let fs = FockSpace::new(d)?;
        let fam = covering_family(bundle);
        let table = j_dpp_distribution(bundle)?;
        let rho: Vec<FockOperator> =
            fam.iter().map(|&s| rho_delta(bundle, s, &fs, RhoForm::Definition)).collect::<Result<_>>()?;
        // suffix[t] = ρ(Δ_{t₀})⋯ρ(Δ_{t_last})Ω.
        let mut suffix: std::collections::HashMap<Vec<usize>, FockVector> = std::collections::HashMap::new();
        suffix.insert(vec![], FockVector::vacuum(&fs));
        for n in 1..=params.moment_max_n {
            for t in index_tuples(fam.len(), n) {
                let v = rho[t[0]].apply(&suffix[&t[1..]]);
                let fock = v.coeffs()[0];
                let deltas: Vec<SiteSet> = t.iter().map(|&i| fam[i]).collect();
                let enumerated = moments_by_enumeration(&table, &deltas)?;
                max_into(&mut worst, (fock - C64::new(enumerated, 0.0)).norm());
                checks += 1;
                suffix.insert(t, v);
            }
        }
    }
    Ok((
        vec![Metric::at_most("fock_vs_enumeration", worst, 1e-8)],
        checks,
        json!({ "bundles": bundles.len(), "max_n": params.moment_max_n }),
    ))
}

fn boo_pushforward(bundles: &[JKernelBundle]) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut involution_ok = true;
    let mut checks = 0;
    for bundle in bundles {
        let table = j_dpp_distribution(bundle)?;
        let weights = table.correlation_weights();
        for s in SiteSet::all(bundle.d()) {
            let det = bundle.khat().weight(s);
            max_into(&mut worst, (C64::new(weights[s.mask() as usize], 0.0) - det).norm());
            checks += 1;
        }
        let twice = particle_hole_pushforward(&particle_hole_pushforward(&table));
        involution_ok &= twice.probs() == table.probs();
        checks += 1;
    }
    Ok((
        vec![
            Metric::at_most("correlation_weight_residual", worst, 1e-9),
            Metric::at_least("involution_bit_exact", if involution_ok { 1.0 } else { 0.0 }, 1.0),
        ],
        checks,
        json!({ "bundles": bundles.len() }),
    ))
}

fn nonnegativity(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let mut min_det = f64::INFINITY;
    let mut checks = 0;
    let mut per_d = Vec::new();
    // Fresh random bundles per draw, plus every supplied bundle.
    for d in 1..=params.nonneg_max_d {
        let mut rng = rng_for(params, 700 + d as u64);
        let mut min_d = f64::INFINITY;
        for _ in 0..params.nonneg_draws {
            let space = crate::kernel_io::random_space(&mut rng, d, false);
            let k = random_valid_kernel(space, &mut rng, 2.0);
            let bundle = assemble_j_kernel(&k, DEFAULT_TOL)?;
            let size = rng.random_range(1..=d);
            let mut sites: Vec<usize> = (0..d).collect();
            for i in 0..size {
                let j = rng.random_range(i..d);
                sites.swap(i, j);
            }
            sites.truncate(size);
            let v = correlation_determinant(bundle.khat(), &sites)?;
            min_d = min_d.min(v);
            checks += 1;
        }
        per_d.push(json!({ "d": d, "min_det": min_d }));
        min_det = min_det.min(min_d);
    }
    for bundle in bundles {
        for s in SiteSet::all(bundle.d()).skip(1) {
            min_det = min_det.min(correlation_determinant(bundle.khat(), &s.indices())?);
            checks += 1;
        }
    }
    Ok((vec![Metric::at_least("min_determinant", min_det, -1e-10)], checks, json!({ "per_d": per_d })))
}

/// K = [[½,½],[½,½]] with sites split one per part.
pub fn worked_example_bundle() -> JKernelBundle {
    let space = std::sync::Arc::new(build_space(2, &[1.0, 1.0], &[1, 2]).expect("valid space"));
    let k = Kernel::from_flat(space, real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]])).expect("2x2");
    assemble_j_kernel(&k, DEFAULT_TOL).expect("projection kernel is valid")
}

fn worked_example() -> SuiteResult {
    let bundle = worked_example_bundle();
    let fs = FockSpace::new(2)?;
    let (x1, x2) = (SiteSet::singleton(0), SiteSet::singleton(1));
    let pair = [x1, x2];
    let table = j_dpp_distribution(&bundle)?;
    let values = [
        ("wick_w_chain", wick_product(&bundle, &pair, &fs, WickRoute::WChain)?.vacuum_expectation().re, 0.5),
        ("wick_recurrence", wick_product(&bundle, &pair, &fs, WickRoute::Recurrence)?.vacuum_expectation().re, 0.5),
        ("cycle_trace", cycle_trace_moment(&bundle, &pair)?, 0.5),
        ("determinant_sum", determinant_moment_sum(&bundle, &pair)?, 0.5),
        ("pairing_expansion", pairing_expansion_moment(&bundle, &pair, &fs)?, 0.5),
        ("theta_2", correlation_measure(&bundle, &pair, &fs)?, 0.25),
        ("cycle_theta_2", cycle_trace_moment(&bundle, &pair)? / factorial(2), 0.25),
        ("p_empty", table.prob(SiteSet::EMPTY), 0.5),
        ("p_full", table.prob(SiteSet::full(2)), 0.5),
        ("p_site_1", table.prob(x1), 0.0),
        ("p_site_2", table.prob(x2), 0.0),
        ("moment_enumeration", moments_by_enumeration(&table, &pair)?, 0.5),
        ("rho_1_expectation", rho_delta(&bundle, x1, &fs, RhoForm::Definition)?.vacuum_expectation().re, 0.5),
        ("det_kk", correlation_determinant(bundle.khat(), &[0, 1])?, 0.5),
    ];
    let worst = values.iter().map(|(_, v, e)| (v - e).abs()).fold(0.0, f64::max);
    let details: serde_json::Map<String, serde_json::Value> =
        values.iter().map(|(k, v, _)| (k.to_string(), json!(v))).collect();
    Ok((vec![Metric::at_most("anchor_deviation", worst, 1e-12)], values.len(), serde_json::Value::Object(details)))
}

fn growth_bounds(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let mut violations = 0usize;
    let mut checks = 0;
    let mut tightest = f64::INFINITY;
    for bundle in bundles {
        for s in SiteSet::all(bundle.d()) {
            let report = growth_bound_check(bundle, s, params.growth_max_n)?;
            violations += report.violations;
            for row in &report.rows {
                checks += 1 + usize::from(row.refined_bound.is_some());
                let bound = row.refined_bound.unwrap_or(row.general_bound).min(row.general_bound);
                tightest = tightest.min(bound - row.theta);
            }
        }
    }
    Ok((
        vec![Metric::at_most("violations", violations as f64, 0.0)],
        checks,
        json!({ "bundles": bundles.len(), "smallest_margin": tightest, "max_n": params.growth_max_n }),
    ))
}

fn quasi_free(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let (mut t2, mut s11, mut s20, mut s02) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut rng = rng_for(params, 1000);
    let mut checks = 0;
    if bundles.is_empty() {
        return Ok((vec![], 0, json!({})));
    }
    let mut spaces = std::collections::HashMap::new();
    for draw in 0..params.quasi_free_draws {
        let bundle = &bundles[draw % bundles.len()];
        let d = bundle.d();
        let fs = *spaces.entry(d).or_insert(FockSpace::new(d)?);
        let phi = random_cvector(&mut rng, d);
        let psi = random_cvector(&mut rng, d);
        let res = |r: crate::moments::ClosedFormReport| r.residual.unwrap_or(f64::INFINITY);
        max_into(&mut t2, res(two_point_t(bundle, &phi, &psi, &fs)?));
        max_into(&mut s11, res(npoint_s(bundle, std::slice::from_ref(&phi), std::slice::from_ref(&psi), &fs)?));
        max_into(&mut s20, res(npoint_s(bundle, &[phi.clone(), psi.clone()], &[], &fs)?));
        max_into(&mut s02, res(npoint_s(bundle, &[], &[phi, psi], &fs)?));
        checks += 4;
    }
    Ok((
        vec![
            Metric::at_most("two_point_residual", t2, 1e-11),
            Metric::at_most("s11_residual", s11, 1e-11),
            Metric::at_most("s20_residual", s20, 1e-11),
            Metric::at_most("s02_residual", s02, 1e-11),
        ],
        checks,
        json!({ "draws": params.quasi_free_draws }),
    ))
}

fn sampler(bundles: &[JKernelBundle], params: &SuiteParams) -> SuiteResult {
    let mut min_p = f64::INFINITY;
    let mut reproducible = true;
    let mut checks = 0;
    let mut runs = Vec::new();
    for bundle in bundles {
        let table = j_dpp_distribution(bundle)?;
        for &seed in &params.sampler_seeds {
            let run = sample_j_dpp(bundle, seed, params.sampler_count)?;
            let chi = chi_square_test(&table, &run.samples);
            let again = sample_j_dpp(bundle, seed, params.sampler_count)?;
            let (mut a, mut b) = (Vec::new(), Vec::new());
            write_samples_jsonl(&run.samples, &mut a)?;
            write_samples_jsonl(&again.samples, &mut b)?;
            reproducible &= a == b;
            min_p = min_p.min(chi.p_value);
            checks += 2;
            runs.push(json!({ "d": bundle.d(), "seed": seed, "chi_square": chi, "max_marginal_z": run.report.max_marginal_z }));
        }
    }
    Ok((
        vec![
            Metric::at_least("min_p_value", min_p, 0.001),
            Metric::at_least("byte_identical_rerun", if reproducible { 1.0 } else { 0.0 }, 1.0),
        ],
        checks,
        json!({ "runs": runs, "samples_per_run": params.sampler_count }),
    ))
}

/// Ordered tuples of the covering family, n ≤ `max_n`, as moment rows.
pub fn default_tuples(bundle: &JKernelBundle, max_n: usize) -> Vec<Vec<SiteSet>> {
    let singles: Vec<SiteSet> = (0..bundle.d()).map(SiteSet::singleton).collect();
    let mut out = Vec::new();
    for n in 1..=max_n {
        for t in index_tuples(singles.len(), n) {
            out.push(t.iter().map(|&i| singles[i]).collect());
        }
    }
    out
}
