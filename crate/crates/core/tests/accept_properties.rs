//! Property tests over random matrices, spectra and instances.

use proptest::prelude::*;

use schatten_perturb::bounds::{
    bound_refined_projection, bound_sin_theta_thm5, bound_thm1, bound_thm2, projection_error, thm1_constant,
};
use schatten_perturb::constructions::{tightness_constant, tightness_instance, TightnessParams};
use schatten_perturb::matrix::io::{parse_matrix, write_matrix};
use schatten_perturb::matrix::sample_haar_frame;
use schatten_perturb::norms::{dual_witness, karamata_holds, schatten_norm, truncated_schatten_norm, SingularSpectrum};
use schatten_perturb::subspace::sin_theta_distance;
use schatten_perturb::verify::random_instance;
use schatten_perturb::{Matrix, RngSeed, SchattenIndex};

const SLACK: f64 = 1e-9;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn below(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + SLACK * (1.0 + lhs.abs())
}

fn matrix() -> impl Strategy<Value = Matrix> {
    (1usize..7, 1usize..7).prop_flat_map(|(m, n)| {
        prop::collection::vec(-10.0f64..10.0, m * n).prop_map(move |data| Matrix::from_row_slice(m, n, &data).unwrap())
    })
}

fn same_shape_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..6, 1usize..6).prop_flat_map(|(m, n)| {
        let entries = prop::collection::vec(-5.0f64..5.0, m * n);
        (entries.clone(), entries).prop_map(move |(a, b)| {
            (
                Matrix::from_row_slice(m, n, &a).unwrap(),
                Matrix::from_row_slice(m, n, &b).unwrap(),
            )
        })
    })
}

fn exponent() -> impl Strategy<Value = SchattenIndex> {
    prop_oneof![
        Just(SchattenIndex::infinity()),
        Just(SchattenIndex::one()),
        (1.0f64..8.0).prop_map(|q| SchattenIndex::new(q).unwrap()),
    ]
}

fn descending(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, len).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn truncated_norm_grows_with_rank_up_to_the_full_norm(x in matrix(), q in exponent()) {
        let full = schatten_norm(&x, q).unwrap();
        let mut previous = 0.0;
        for r in 1..=x.min_dim() {
            let t = truncated_schatten_norm(&x, r, q).unwrap();
            prop_assert!(t >= 0.0);
            prop_assert!(below(previous, t));
            prop_assert!(below(t, full));
            previous = t;
        }
        prop_assert!(close(previous, full, 1e-12));
        prop_assert!(truncated_schatten_norm(&x, x.min_dim() + 1, q).is_err());
    }

    #[test]
    fn truncated_norm_is_a_norm((a, b) in same_shape_pair(), q in exponent(), r in 1usize..4, c in -4.0f64..4.0) {
        let r = r.min(a.min_dim());
        let n = |m: &Matrix| truncated_schatten_norm(m, r, q).unwrap();
        prop_assert!(below(n(&(&a + &b)), n(&a) + n(&b)));
        prop_assert!(close(n(&a.scaled(c)), c.abs() * n(&a), 1e-10));
        prop_assert_eq!(n(&Matrix::zeros(a.nrows(), a.ncols())), 0.0);
    }

    #[test]
    fn schatten_norm_is_nonincreasing_in_q(x in matrix(), lo in 1.0f64..6.0, step in 0.0f64..6.0) {
        let small = SchattenIndex::new(lo).unwrap();
        let large = SchattenIndex::new(lo + step).unwrap();
        let (a, b) = (schatten_norm(&x, small).unwrap(), schatten_norm(&x, large).unwrap());
        prop_assert!(below(b, a));
        prop_assert!(below(schatten_norm(&x, SchattenIndex::infinity()).unwrap(), b));
    }

    #[test]
    fn dual_witness_is_a_unit_maximizer(x in matrix(), q in 1.05f64..8.0, r in 1usize..4) {
        let q = SchattenIndex::new(q).unwrap();
        prop_assume!(schatten_norm(&x, q).unwrap() > 1e-6);
        let r = r.min(x.min_dim());
        let w = dual_witness(&x, r, q).unwrap();
        prop_assert!(close(schatten_norm(&w, q).unwrap(), 1.0, 1e-9));
        let attained = w.inner_product(&x).unwrap();
        prop_assert!(close(attained, truncated_schatten_norm(&x, r, q.dual()).unwrap(), 1e-9));
        prop_assert!(schatten_perturb::matrix::svd(&w).unwrap().numerical_rank() <= r);
    }

    #[test]
    fn exponent_text_round_trips(q in exponent()) {
        let parsed: SchattenIndex = q.to_string().parse().unwrap();
        prop_assert_eq!(parsed, q);
        prop_assert_eq!(q.dual().dual(), q);
        if !q.is_infinite() && q.p().is_finite() {
            prop_assert!(close(1.0 / q.q() + 1.0 / q.p(), 1.0, 1e-12));
        }
    }

    #[test]
    fn averaging_a_sequence_reduces_convex_power_sums(y in descending(1..12), t in 0.0f64..1.0, p in 1.0f64..6.0) {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let x: Vec<f64> = y.iter().map(|v| t * v + (1.0 - t) * mean).collect();
        let cert = karamata_holds(&SingularSpectrum::new(x).unwrap(), &SingularSpectrum::new(y).unwrap(), p).unwrap();
        prop_assert!(cert.prefix_dominated);
        prop_assert_eq!(cert.conclusion(), Some(true));
    }

    #[test]
    fn matrix_csv_round_trips_exactly(x in matrix()) {
        let mut buffer = Vec::new();
        write_matrix(&x, &mut buffer).unwrap();
        let back = parse_matrix(buffer.as_slice()).unwrap();
        prop_assert_eq!(back.shape(), x.shape());
        prop_assert!(back.iter().zip(x.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn tightness_ratio_is_the_constant_over_one_plus_eta(r in 1usize..4, q in exponent(), frac in 0.01f64..0.99) {
        let eta = frac * TightnessParams::eta_limit(q);
        let params = TightnessParams::square(r, q, eta).unwrap();
        let inst = tightness_instance(&params).unwrap();
        let ratio = inst.estimation_error(q).unwrap() / inst.z_truncated_norm(q);
        let c = tightness_constant(q);
        prop_assert!(close(ratio, c / (1.0 + eta), 1e-10));
        prop_assert!(close(ratio, c - params.implied_epsilon(), 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sin_theta_is_a_symmetric_bounded_metric(seed in any::<u64>(), p in 3usize..12, r in 1usize..3, q in exponent()) {
        let frame = |k: u64| sample_haar_frame(p, r, RngSeed(seed).derive(&[k])).unwrap();
        let (u1, u2, u3) = (frame(1), frame(2), frame(3));
        let d = |a, b| sin_theta_distance(a, b, q).unwrap();
        prop_assert!(close(d(&u1, &u2), d(&u2, &u1), 1e-12));
        prop_assert!(d(&u1, &u1) < 1e-7);
        prop_assert!(below(d(&u1, &u3), d(&u1, &u2) + d(&u2, &u3)));
        prop_assert!(below(sin_theta_distance(&u1, &u2, SchattenIndex::infinity()).unwrap(), 1.0));
    }

    #[test]
    fn perturbation_bounds_hold_on_random_instances(seed in any::<u64>(), q in exponent()) {
        let inst = random_instance(&mut RngSeed(seed).rng()).unwrap();
        let r = inst.rank();
        let z = inst.z();
        let err = inst.estimation_error(q).unwrap();
        let thm1 = bound_thm1(z, r, q).unwrap();
        prop_assert!(below(err, thm1));
        prop_assert!(below(thm1, thm1_constant(q) * schatten_norm(z, q).unwrap()));

        let (left, right) = projection_error(&inst, q).unwrap();
        let thm2 = bound_thm2(z, r, q).unwrap();
        let (rl, rr) = bound_refined_projection(&inst, q).unwrap();
        prop_assert!(below(left, rl) && below(right, rr));
        prop_assert!(below(rl, thm2) && below(rr, thm2));

        let (sl, sr) = inst.sin_theta(q).unwrap();
        if let Some(b) = bound_sin_theta_thm5(&inst, q) {
            prop_assert!(below(sl.max(sr), b));
        }
    }

    #[test]
    fn seeded_instances_are_reproducible(seed in any::<u64>()) {
        let a = random_instance(&mut RngSeed(seed).rng()).unwrap();
        let b = random_instance(&mut RngSeed(seed).rng()).unwrap();
        prop_assert_eq!(a.b().as_inner(), b.b().as_inner());
        prop_assert_eq!(RngSeed(seed).derive(&[1, 2, 3]), RngSeed(seed).derive(&[1, 2, 3]));
        prop_assert_ne!(RngSeed(seed).derive(&[1, 2, 3]), RngSeed(seed).derive(&[1, 3, 2]));
    }
}
