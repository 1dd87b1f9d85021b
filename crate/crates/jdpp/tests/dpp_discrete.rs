mod common;

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use jdpp::dpp::*;
use jdpp::fock::{rho_delta, FockOperator, FockSpace, RhoForm};
use jdpp::kernel_io::{random_bundle, random_projection_kernel};
use jdpp::space::{c64, real_matrix};
use jdpp::suites::worked_example_bundle;
use jdpp::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(part: &[u8]) -> Arc<SpacePartition> {
    Arc::new(SpacePartition::uniform(part).unwrap())
}

fn diag(part: &[u8], values: &[f64]) -> Kernel {
    let d = values.len();
    let m = CMatrix::from_fn(d, d, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) });
    Kernel::from_flat(space(part), m).unwrap()
}

fn rank_one() -> Kernel {
    Kernel::from_flat(space(&[1, 2]), real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap()
}

fn set(labels: &[usize], d: usize) -> SiteSet {
    SiteSet::from_labels(labels, d).unwrap()
}

#[test]
fn dpp_distribution_examples() {
    let (p, q) = (0.3, 0.6);
    let t = dpp_distribution(&diag(&[1, 1], &[p, q])).unwrap();
    assert_abs_diff_eq!(t.prob(SiteSet::EMPTY), (1.0 - p) * (1.0 - q), epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(set(&[1], 2)), p * (1.0 - q), epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(set(&[2], 2)), (1.0 - p) * q, epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(set(&[1, 2], 2)), p * q, epsilon = 1e-15);

    let t = dpp_distribution(&rank_one()).unwrap();
    assert_abs_diff_eq!(t.prob(set(&[1], 2)), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(set(&[2], 2)), 0.5, epsilon = 1e-15);
    assert!(t.prob(SiteSet::EMPTY).abs() < 1e-15 && t.prob(set(&[1, 2], 2)).abs() < 1e-15);

    let t = dpp_distribution(&Kernel::identity(space(&[1, 2, 1]))).unwrap();
    assert_eq!(t.prob(SiteSet::full(3)), 1.0);

    assert!(matches!(dpp_distribution(&diag(&[1, 1], &[1.5, 0.0])), Err(Error::InvalidKernel(_))));
}

#[test]
fn tables_match_inclusion_exclusion_and_signed_determinants() {
    for d in 1..=5 {
        let b = random_bundle(d, 40 + d as u64);
        let t = dpp_distribution(b.k()).unwrap();
        let oracle = common::inclusion_exclusion(b.k().flat());
        for (m, (&p, &o)) in t.probs().iter().zip(&oracle).enumerate() {
            assert!((p - o).abs() < 1e-12, "d={d} mask={m}");
            assert!((p - common::signed_determinant_probability(b.k().flat(), m)).abs() < 1e-12);
        }
        assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let jt = j_dpp_distribution(&b).unwrap();
        for (&p, &o) in jt.probs().iter().zip(&common::j_dpp_oracle(&b)) {
            assert!((p - o).abs() < 1e-12);
        }
    }
}

#[test]
fn projection_kernels_clamp_rounding_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = random_projection_kernel(space(&[1, 2, 1, 2, 1]), &mut rng, 2);
    let t = dpp_distribution(&k).unwrap();
    assert!(t.probs().iter().all(|&p| p >= 0.0));
    assert!(t.clamp_residual() <= 32.0 * 1e-12);
    for (m, &p) in t.probs().iter().enumerate() {
        if (m as u64).count_ones() != 2 {
            assert!(p < 1e-10, "mask {m}: {p}");
        }
    }
}

#[test]
fn pushforward_examples() {
    let t = dpp_distribution(&diag(&[1, 1], &[0.2, 0.9])).unwrap();
    assert_eq!(particle_hole_pushforward(&t).probs(), t.probs());

    let sp = build_space(2, &[1.0, 1.0], &[1, 2]).unwrap();
    assert_eq!(particle_hole(&sp, set(&[1], 2)), set(&[1, 2], 2));
    assert_eq!(particle_hole(&sp, set(&[2], 2)), SiteSet::EMPTY);

    let b = random_bundle(4, 5);
    let t = dpp_distribution(b.k()).unwrap();
    assert_eq!(particle_hole_pushforward(&particle_hole_pushforward(&t)).probs(), t.probs());
}

#[test]
fn j_dpp_examples() {
    let b = worked_example_bundle();
    let t = j_dpp_distribution(&b).unwrap();
    assert_abs_diff_eq!(t.prob(SiteSet::EMPTY), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(t.prob(set(&[1, 2], 2)), 0.5, epsilon = 1e-15);
    assert!(t.prob(set(&[1], 2)).abs() < 1e-15 && t.prob(set(&[2], 2)).abs() < 1e-15);
    assert_abs_diff_eq!(correlation_from_distribution(&t, set(&[1, 2], 2)).unwrap(), 0.5, epsilon = 1e-15);

    let k = diag(&[1, 1, 1], &[0.1, 0.5, 0.8]);
    let b = assemble_j_kernel(&k, DEFAULT_TOL).unwrap();
    assert_eq!(j_dpp_distribution(&b).unwrap().probs(), dpp_distribution(b.khat()).unwrap().probs());

    let b = random_bundle(4, 6);
    let t = j_dpp_distribution(&b).unwrap();
    let w = t.correlation_weights();
    for s in SiteSet::all(4) {
        assert!((w[s.mask() as usize] - b.khat().weight(s).re).abs() < 1e-9);
        assert!(b.khat().weight(s).im.abs() < 1e-12);
    }
}

#[test]
fn moments_by_enumeration_examples() {
    let p = 0.35;
    let t = dpp_distribution(&diag(&[1], &[p])).unwrap();
    assert_abs_diff_eq!(moments_by_enumeration(&t, &[SiteSet::full(1)]).unwrap(), p, epsilon = 1e-15);

    let b = worked_example_bundle();
    let t = j_dpp_distribution(&b).unwrap();
    let pair = [SiteSet::singleton(0), SiteSet::singleton(1)];
    let enumerated = moments_by_enumeration(&t, &pair).unwrap();
    assert_abs_diff_eq!(enumerated, 0.5, epsilon = 1e-15);
    let fs = FockSpace::new(2).unwrap();
    let prod = FockOperator::product(
        &fs,
        &[
            rho_delta(&b, pair[0], &fs, RhoForm::Definition).unwrap(),
            rho_delta(&b, pair[1], &fs, RhoForm::Definition).unwrap(),
        ],
    );
    assert_abs_diff_eq!(prod.vacuum_expectation().re, enumerated, epsilon = 1e-14);

    assert_eq!(moments_by_enumeration(&t, &[SiteSet::full(2), SiteSet::EMPTY]).unwrap(), 0.0);
    assert!(moments_by_enumeration(&t, &[]).is_err());
}

#[test]
fn correlation_from_distribution_examples() {
    let (p, q) = (0.25, 0.7);
    let t = dpp_distribution(&diag(&[1, 2], &[p, q])).unwrap();
    assert_abs_diff_eq!(correlation_from_distribution(&t, SiteSet::EMPTY).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(correlation_from_distribution(&t, set(&[1], 2)).unwrap(), p, epsilon = 1e-15);
    assert!(correlation_from_distribution(&t, SiteSet::singleton(5)).is_err());
}

#[test]
fn sampler_examples() {
    let run = hkpv_sample(&Kernel::identity(space(&[1, 2, 1])), 1, 50).unwrap();
    assert!(run.samples.iter().all(|&s| s == SiteSet::full(3)));
    let run = hkpv_sample(&Kernel::zero(space(&[1, 2, 1])), 1, 50).unwrap();
    assert!(run.samples.iter().all(|s| s.is_empty()));

    let b = worked_example_bundle();
    let n = 100_000;
    let run = sample_j_dpp(&b, 2024, n).unwrap();
    let hits = run.samples.iter().filter(|s| s.contains(0)).count() as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((hits / n as f64 - 0.5).abs() < 4.0 * se);
    assert!(run.samples.iter().all(|&s| s.is_empty() || s == SiteSet::full(2)));
    assert!(run.report.max_marginal_z < 4.0);

    assert!(hkpv_sample(&diag(&[1], &[2.0]), 1, 10).is_err());
    assert!(hkpv_sample(b.k(), 1, 0).is_err());
}

#[test]
fn sampler_is_deterministic_and_prefix_stable() {
    let b = random_bundle(3, 7);
    let a = sample_j_dpp(&b, 9, 500).unwrap().samples;
    let again = sample_j_dpp(&b, 9, 500).unwrap().samples;
    assert_eq!(a, again);
    // Stream-per-sample: a shorter run is a prefix of a longer one.
    assert_eq!(&sample_j_dpp(&b, 9, 100).unwrap().samples[..], &a[..100]);
    assert_ne!(sample_j_dpp(&b, 10, 500).unwrap().samples, a);
}

#[test]
fn sampler_fits_exact_tables() {
    for d in 1..=3 {
        let b = random_bundle(d, 70 + d as u64);
        let table = j_dpp_distribution(&b).unwrap();
        for seed in [11, 12, 13] {
            let run = sample_j_dpp(&b, seed, 100_000).unwrap();
            let chi = chi_square_test(&table, &run.samples);
            assert!(chi.p_value >= 0.001, "d={d} seed={seed}: {chi:?}");
        }
    }
}

#[test]
fn chi_square_rejects_wrong_table() {
    let b = random_bundle(3, 80);
    let other = random_bundle(3, 81);
    let run = sample_j_dpp(&b, 1, 20_000).unwrap();
    let wrong = j_dpp_distribution(&other).unwrap();
    assert!(chi_square_test(&wrong, &run.samples).p_value < 1e-6);
}

#[test]
fn jsonl_lines() {
    let mut out = Vec::new();
    write_samples_jsonl(&[SiteSet::EMPTY, SiteSet::from_indices(&[0, 2])], &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "{\"mask\":0,\"sites\":[]}\n{\"mask\":5,\"sites\":[1,3]}\n");
}

#[test]
fn table_size_cap() {
    let k = Kernel::zero(space(&[1; 17]));
    assert!(matches!(dpp_distribution(&k), Err(Error::Infeasible { cap: 16, .. })));
}

#[test]
fn table_document_roundtrip() {
    let t = j_dpp_distribution(&random_bundle(3, 90)).unwrap();
    let text = serde_json::to_string(&t.to_document()).unwrap();
    let doc: TableDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.d, 3);
    assert_eq!(doc.probs, t.probs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tables_are_normalized_and_nonnegative(d in 1usize..=6, seed in any::<u64>()) {
        let b = random_bundle(d, seed);
        for t in [dpp_distribution(b.k()).unwrap(), j_dpp_distribution(&b).unwrap()] {
            prop_assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn pushforward_carries_the_j_kernel(d in 1usize..=5, seed in any::<u64>()) {
        let b = random_bundle(d, seed);
        let t = j_dpp_distribution(&b).unwrap();
        let w = t.correlation_weights();
        for s in SiteSet::all(d) {
            prop_assert!((w[s.mask() as usize] - b.khat().weight(s).re).abs() < 1e-9);
        }
        let twice = particle_hole_pushforward(&particle_hole_pushforward(&t));
        prop_assert_eq!(twice.probs(), t.probs());
    }

    #[test]
    fn enumeration_matches_fock_moments(d in 1usize..=3, seed in any::<u64>(), masks in prop::collection::vec(any::<u64>(), 1..=3)) {
        let b = random_bundle(d, seed);
        let fs = FockSpace::new(d).unwrap();
        let t: Vec<SiteSet> = masks.iter().map(|m| SiteSet::from_mask(m & ((1 << d) - 1))).collect();
        let ops: Vec<FockOperator> = t.iter().map(|&s| rho_delta(&b, s, &fs, RhoForm::Definition).unwrap()).collect();
        let fock = FockOperator::product(&fs, &ops).vacuum_expectation();
        let table = j_dpp_distribution(&b).unwrap();
        prop_assert!((fock.re - moments_by_enumeration(&table, &t).unwrap()).abs() < 1e-8);
        prop_assert!(fock.im.abs() < 1e-10);
    }
}
