mod common;

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use jdpp::kernel_io::{random_bundle, random_space, random_valid_kernel};
use jdpp::space::{c64, distance, real_matrix};
use jdpp::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_site() -> Arc<SpacePartition> {
    Arc::new(build_space(2, &[1.0, 1.0], &[1, 2]).unwrap())
}

fn rank_one() -> Kernel {
    Kernel::from_flat(two_site(), real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap()
}

fn diag(space: Arc<SpacePartition>, values: &[f64]) -> Kernel {
    let d = values.len();
    let m = CMatrix::from_fn(d, d, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) });
    Kernel::from_flat(space, m).unwrap()
}

#[test]
fn build_space_examples() {
    let s = build_space(1, &[1.0], &[1]).unwrap();
    assert_eq!((s.d(), s.x1(), s.x2()), (1, SiteSet::full(1), SiteSet::EMPTY));
    let s = build_space(2, &[1.0, 1.0], &[1, 2]).unwrap();
    assert_eq!((s.x1(), s.x2()), (SiteSet::singleton(0), SiteSet::singleton(1)));
    let s = build_space(3, &[0.5, 0.5, 1.0], &[1, 1, 2]).unwrap();
    assert_eq!(s.weights(), &[0.5, 0.5, 1.0]);
    assert_eq!(s.x2(), SiteSet::singleton(2));
}

#[test]
fn build_space_rejects_bad_input() {
    assert!(matches!(build_space(2, &[1.0], &[1, 2]), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(build_space(2, &[1.0, 0.0], &[1, 2]), Err(Error::NonPositiveWeight { index: 1, .. })));
    assert!(matches!(build_space(2, &[1.0, 1.0], &[1, 3]), Err(Error::InvalidPartLabel { .. })));
    assert!(build_space(0, &[], &[]).is_err());
}

#[test]
fn hat_transform_examples() {
    let id = Kernel::identity(two_site());
    assert_eq!(hat_transform(&id).flat(), &real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]]));
    let zero = Kernel::zero(two_site());
    assert_eq!(hat_transform(&zero).flat(), &real_matrix(&[&[0.0, 0.0], &[0.0, 1.0]]));
    assert_eq!(hat_transform(&rank_one()).flat(), &real_matrix(&[&[0.5, -0.5], &[0.5, 0.5]]));
}

#[test]
fn validation_examples() {
    let space = two_site();
    let r = validate_correlation_operator(&diag(space.clone(), &[0.3, 0.7]), DEFAULT_TOL);
    assert!(r.passed);
    assert_abs_diff_eq!(r.min_eigenvalue, 0.3, epsilon = 1e-14);
    assert_abs_diff_eq!(r.max_eigenvalue, 0.7, epsilon = 1e-14);

    let r = validate_correlation_operator(&diag(space.clone(), &[1.5, 0.0]), DEFAULT_TOL);
    assert!(!r.passed);
    assert!(r.failures.iter().any(|f| f.contains("max_eigenvalue")));

    let m = CMatrix::from_row_slice(2, 2, &[c64(0.5, 0.0), c64(0.0, 0.1), c64(0.0, 0.1), c64(0.5, 0.0)]);
    let r = validate_correlation_operator(&Kernel::from_flat(space, m).unwrap(), DEFAULT_TOL);
    assert!(!r.passed);
    assert!(r.hermiticity_residual > 0.1);
    assert!(r.failures.iter().any(|f| f.contains("hermiticity")));
}

#[test]
fn sqrt_factor_examples() {
    let space = two_site();
    let (k1, k2) = sqrt_factors(&diag(space.clone(), &[0.25, 1.0]), DEFAULT_TOL).unwrap();
    assert!(distance(k1.flat(), &real_matrix(&[&[0.5, 0.0], &[0.0, 1.0]])) < 1e-14);
    assert!(distance(k2.flat(), &real_matrix(&[&[0.75f64.sqrt(), 0.0], &[0.0, 0.0]])) < 1e-14);

    let (k1, k2) = sqrt_factors(&Kernel::zero(space.clone()), DEFAULT_TOL).unwrap();
    assert!(distance(k1.flat(), &CMatrix::zeros(2, 2)) < 1e-14);
    assert!(distance(k2.flat(), &CMatrix::identity(2, 2)) < 1e-14);

    let k = rank_one();
    let (k1, k2) = sqrt_factors(&k, DEFAULT_TOL).unwrap();
    assert!(distance(k1.flat(), k.flat()) < 1e-14);
    assert!(distance(k2.flat(), &(CMatrix::identity(2, 2) - k.flat())) < 1e-14);

    assert!(sqrt_factors(&diag(space, &[1.5, 0.0]), DEFAULT_TOL).is_err());
}

#[test]
fn sqrt_factors_clamp_small_violations() {
    let k = diag(two_site(), &[1.0 + 1e-12, -1e-12]);
    let (k1, k2) = sqrt_factors(&k, DEFAULT_TOL).unwrap();
    assert_abs_diff_eq!(k1.flat()[(0, 0)].re, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(k2.flat()[(1, 1)].re, 1.0, epsilon = 1e-12);
}

#[test]
fn assemble_examples() {
    let space = two_site();
    let (p, q) = (0.3, 0.8);
    let b = assemble_j_kernel(&diag(space, &[p, q]), DEFAULT_TOL).unwrap();
    assert!(distance(b.khat().flat(), &real_matrix(&[&[p, 0.0], &[0.0, 1.0 - q]])) < 1e-15);

    let b = assemble_j_kernel(&rank_one(), DEFAULT_TOL).unwrap();
    assert_eq!(b.khat().flat(), &real_matrix(&[&[0.5, -0.5], &[0.5, 0.5]]));
    assert!(b.report().j_self_adjoint.holds);
}

#[test]
fn assemble_block_identities_random_four_site() {
    let space = Arc::new(SpacePartition::uniform(&[1, 1, 2, 2]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let k = random_valid_kernel(space, &mut rng, 1.0);
    let b = assemble_j_kernel(&k, DEFAULT_TOL).unwrap();
    let r = b.report();
    assert!(r.block_residual < 1e-12, "{}", r.block_residual);
    assert!(r.involution_residual < 1e-14);
    // Independent block assembly: 𝕂¹¹ = K₁² and 𝕂²² = K₂² on the diagonal blocks.
    let k1sq = b.k1().flat() * b.k1().flat();
    let k2sq = b.k2().flat() * b.k2().flat();
    let kk = common::hat_oracle(&b);
    for i in 0..4 {
        for j in 0..4 {
            let expect = match (i < 2, j < 2) {
                (true, true) => k1sq[(i, j)],
                (false, false) => k2sq[(i, j)],
                (false, true) => k.flat()[(i, j)],
                (true, false) => -k.flat()[(j, i)].conj(),
            };
            assert!((kk[(i, j)] - expect).norm() < 1e-12);
            assert!((b.khat().flat()[(i, j)] - expect).norm() < 1e-12);
        }
    }
}

#[test]
fn j_self_adjoint_examples() {
    let space = two_site();
    assert!(check_j_self_adjoint(&diag(space.clone(), &[0.2, -3.0]), 1e-12).holds);
    let m = Kernel::from_flat(space.clone(), real_matrix(&[&[0.5, -0.5], &[0.5, 0.5]])).unwrap();
    assert!(check_j_self_adjoint(&m, 1e-12).holds);
    assert!(!check_j_self_adjoint(&rank_one(), 1e-12).holds);
}

#[test]
fn correlation_determinant_examples() {
    let b = assemble_j_kernel(&rank_one(), DEFAULT_TOL).unwrap();
    assert_abs_diff_eq!(correlation_determinant(b.khat(), &[0, 1]).unwrap(), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(correlation_determinant(b.khat(), &[1]).unwrap(), 0.5, epsilon = 1e-15);
    assert!(matches!(correlation_determinant(b.khat(), &[0, 0]), Err(Error::RepeatedSite(1))));
    assert!(correlation_determinant(b.khat(), &[2]).is_err());
}

#[test]
fn growth_constant_examples() {
    let b = random_bundle(3, 5);
    let g = growth_bound_constant(&b, SiteSet::EMPTY).unwrap();
    assert_eq!(g.general, 0.0);

    let p = 0.37;
    let space = Arc::new(build_space(1, &[1.0], &[1]).unwrap());
    let b = assemble_j_kernel(&diag(space, &[p]), DEFAULT_TOL).unwrap();
    let g = growth_bound_constant(&b, SiteSet::full(1)).unwrap();
    assert_abs_diff_eq!(g.refined.unwrap(), p, epsilon = 1e-14);

    // 𝕂 = [[.5,−.5],[.5,.5]] on Δ = {1,2}: trace-norm split 1, Frobenius 1,
    // spectral norm 1/√2; the general constant is their maximum.
    let b = assemble_j_kernel(&rank_one(), DEFAULT_TOL).unwrap();
    let g = growth_bound_constant(&b, SiteSet::full(2)).unwrap();
    let sv = b.khat().flat().clone().svd(false, false).singular_values;
    let frob = common::frob(b.khat().flat());
    assert_abs_diff_eq!(g.trace_norm_sum, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.hilbert_schmidt, frob, epsilon = 1e-12);
    assert_abs_diff_eq!(g.operator_norm, sv.max(), epsilon = 1e-12);
    assert_abs_diff_eq!(g.general, 1.0, epsilon = 1e-12);
    assert!(g.refined.is_none());
}

#[test]
fn degenerate_partition_reduces_to_k() {
    let space = Arc::new(SpacePartition::uniform(&[1, 1, 1]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = random_valid_kernel(space, &mut rng, 1.0);
    let b = assemble_j_kernel(&k, DEFAULT_TOL).unwrap();
    assert_eq!(b.khat().flat(), k.flat());
}

fn arb_bundle(max_d: usize) -> impl Strategy<Value = JKernelBundle> {
    (1..=max_d, any::<u64>()).prop_map(|(d, seed)| random_bundle(d, seed))
}

fn arb_kernel(max_d: usize) -> impl Strategy<Value = Kernel> {
    (1..=max_d, any::<u64>(), any::<bool>()).prop_map(|(d, seed, unit)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, d, unit);
        random_valid_kernel(space, &mut rng, 2.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hat_is_an_involution(k in arb_kernel(8)) {
        let twice = hat_transform(&hat_transform(&k));
        prop_assert!(distance(twice.flat(), k.flat()) < 1e-14);
    }

    #[test]
    fn hat_of_valid_kernel_is_j_self_adjoint(k in arb_kernel(8)) {
        let kk = hat_transform(&k);
        prop_assert!(check_j_self_adjoint(&kk, 1e-12).holds);
        prop_assert!(hat_transform(&kk).hermiticity_residual() < 1e-12);
    }

    #[test]
    fn sqrt_factors_square_back(k in arb_kernel(16)) {
        let (k1, k2) = sqrt_factors(&k, DEFAULT_TOL).unwrap();
        let one = CMatrix::identity(k.d(), k.d());
        prop_assert!(distance(&(k1.flat() * k1.flat()), k.flat()) < 1e-10);
        prop_assert!(distance(&(k2.flat() * k2.flat()), &(one - k.flat())) < 1e-10);
    }

    #[test]
    fn flat_and_pointwise_determinants_agree(k in arb_kernel(6), mask in any::<u64>()) {
        let s = SiteSet::from_mask(mask & ((1u64 << k.d()) - 1));
        let idx = s.indices();
        let flat = k.weight(s);
        let pw = CMatrix::from_fn(idx.len(), idx.len(), |r, c| k.pointwise(idx[r], idx[c]));
        let sigma: f64 = idx.iter().map(|&i| k.space().weights()[i]).product();
        let via_pointwise = common::leibniz_det(&pw) * sigma;
        prop_assert!((flat - via_pointwise).norm() <= 1e-10 * flat.norm().max(1e-3));
    }

    #[test]
    fn correlation_determinants_are_nonnegative(b in arb_bundle(6), mask in 1u64..64) {
        let s = SiteSet::from_mask(mask & ((1u64 << b.d()) - 1));
        prop_assume!(!s.is_empty());
        prop_assert!(correlation_determinant(b.khat(), &s.indices()).unwrap() >= -1e-12);
    }

    #[test]
    fn bundle_block_conditions(b in arb_bundle(8)) {
        let r = b.report();
        prop_assert!(r.j_self_adjoint.holds);
        prop_assert!(r.sqrt_residual_1 < 1e-10 && r.sqrt_residual_2 < 1e-10);
        prop_assert!(r.block_residual < 1e-10);
    }
}
