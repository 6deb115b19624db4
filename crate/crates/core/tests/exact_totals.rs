use levelsearch_core::closed_forms::{level_count, total_b, total_d, total_d_trunc};
use levelsearch_core::combinatorics::{ballot, binom, catalan};
use levelsearch_core::enumeration::{half_pair_weight, oracle_table, oracle_trunc_diff_pairs};
use levelsearch_core::{ExactInt, ExactRat};
use num_bigint::BigInt;

#[test]
fn pascal_rule_exhaustive() {
    for n in 1..=200i64 {
        for k in 0..=n {
            let lhs = binom(n, k).unwrap();
            assert_eq!(
                lhs,
                binom(n - 1, k - 1).unwrap() + binom(n - 1, k).unwrap(),
                "C({n}, {k})"
            );
            assert_eq!(lhs, binom(n, n - k).unwrap());
        }
    }
    for n in 0..=50 {
        assert_eq!(ballot(n, n).unwrap(), catalan(n as u64));
    }
}

#[test]
fn every_node_is_reached_by_both_searches() {
    for n in 0..=12u64 {
        let rows = oracle_table(n).unwrap();
        let expect = catalan(n) * (n * (n + 1) / 2);
        let d: ExactInt = rows.iter().map(|r| r.totals.total_d.clone()).sum();
        let b: ExactInt = rows.iter().map(|r| r.totals.total_b.clone()).sum();
        assert_eq!(d, expect, "n = {n}");
        assert_eq!(b, expect, "n = {n}");
    }
}

#[test]
fn truncated_search_never_slower() {
    for n in 0..=12 {
        for l in 0..=n {
            let t = total_d_trunc(n, l);
            assert!(t <= total_d(n, l) && t <= total_b(n, l), "n = {n}, l = {l}");
        }
    }
}

#[test]
fn level_counts_from_enumeration() {
    for n in 0..=12 {
        for (l, row) in oracle_table(n).unwrap().iter().enumerate() {
            let l = l as u64;
            assert_eq!(row.totals.level_count, level_count(n, l));
            // (2l+1) C(2n+1, n-l) / (2n+1)
            let direct = ExactRat::new(
                binom(2 * n as i64 + 1, n as i64 - l as i64).unwrap() * (2 * l + 1),
                BigInt::from(2 * n + 1),
            );
            assert_eq!(ExactRat::from_integer(level_count(n, l)), direct);
        }
    }
}

#[test]
fn truncation_pairs_match_weight() {
    for n in 0..=10 {
        for l in 0..=n {
            let pairs = oracle_trunc_diff_pairs(n, l).unwrap();
            assert_eq!(
                ExactRat::from_integer(pairs),
                half_pair_weight(n, l).unwrap(),
                "n = {n}, l = {l}"
            );
        }
    }
}

#[test]
fn bfs_identity_through_dfs_totals() {
    // totalB(n, l) = totalD(n, l) + totalD(n, l+1) - C(2n, n-2l-1) - 2 sum_{j=l+1}^{2l} C(2n, n-j)
    for n in 0..=200u64 {
        for l in 0..=n {
            let c = |j: u64| binom(2 * n as i64, n as i64 - j as i64).unwrap();
            let tail: ExactInt = (l + 1..=2 * l).map(c).sum();
            let rhs = total_d(n, l) + total_d(n, l + 1) - c(2 * l + 1) - tail * 2;
            assert_eq!(total_b(n, l), rhs, "n = {n}, l = {l}");
        }
    }
}
