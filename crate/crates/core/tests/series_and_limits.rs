use levelsearch_core::asymptotics::{lambda_n, local_limit_constant, solve_lambda};
use levelsearch_core::closed_forms::{total_b, total_d, total_d_trunc};
use levelsearch_core::enumeration::oracle_xy_sum;
use levelsearch_core::series::{
    b_series, c_pow_coeff, catalan_derivative_holds, catalan_series, d_series, f_eval_series,
};
use levelsearch_core::ExactRat;
use num_bigint::BigInt;

fn rat(p: i64, q: i64) -> ExactRat {
    ExactRat::new(BigInt::from(p), BigInt::from(q))
}

#[test]
fn bfs_generating_function_through_level_ten() {
    for l in 1..=10 {
        let s = b_series(l, 30).unwrap();
        for n in 0..=30 {
            assert_eq!(s.int_coeff(n as usize), total_b(n, l), "l = {l}, n = {n}");
        }
    }
}

#[test]
fn truncation_generating_function() {
    for l in 1..=8 {
        let s = d_series(l, 30).unwrap();
        for n in 0..=30 {
            assert_eq!(
                s.int_coeff(n as usize),
                (total_d(n, l) - total_d_trunc(n, l)) * 2,
                "l = {l}, n = {n}"
            );
        }
    }
}

#[test]
fn tree_function_matches_enumeration() {
    let points = [(rat(1, 2), rat(3, 1)), (rat(-2, 3), rat(1, 5)), (rat(5, 1), rat(-7, 4))];
    for l in 0..=4 {
        for (x0, y0) in &points {
            let s = f_eval_series(l, x0, y0, 10).unwrap();
            for n in l..=10 {
                assert_eq!(
                    s.coeff(n as usize),
                    oracle_xy_sum(n, l, x0, y0).unwrap(),
                    "l = {l}, n = {n}"
                );
            }
        }
    }
}

#[test]
fn catalan_powers() {
    let c = catalan_series(40);
    let mut power = c.clone();
    for m in 1..=20u64 {
        for n in 0..=40u64 {
            assert_eq!(
                power.int_coeff(n as usize),
                c_pow_coeff(m, n).unwrap(),
                "m = {m}, n = {n}"
            );
        }
        power = &power * &c;
    }
    assert!(catalan_derivative_holds(40));
}

#[test]
fn thresholds_approach_the_constant() {
    let lambda = solve_lambda(1e-12).unwrap();
    for n in [100u64, 1000, 10_000, 100_000, 1_000_000] {
        let r = lambda_n(n).unwrap();
        assert!((0.70..=0.88).contains(&r.ratio), "n = {n}: {r:?}");
        assert!(r.lstar as f64 <= lambda * (n as f64).sqrt() + 1.0);
    }
    let r = lambda_n(1_000_000).unwrap();
    assert!((r.ratio - lambda).abs() <= 0.02);
}

#[test]
fn local_limit_constant_is_stable() {
    let a = local_limit_constant(1000);
    let b = local_limit_constant(10_000);
    assert!(a > 0.0 && (a / b - 1.0).abs() < 0.01, "{a} vs {b}");
}
