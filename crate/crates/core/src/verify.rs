//! Cross-checks between the exhaustive oracle, the closed forms and the
//! generating functions, returned as pass/fail matrices.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{
    average_level_exact, level_count, level_mass, paths_identity_lhs, takacs_moment, total_b, total_b_alt, total_d,
    total_d_trunc, trunc_difference,
};
use crate::combinatorics::binom;
use crate::enumeration::{oracle_table, MAX_EXHAUSTIVE_N};
use crate::series::{b_series, d_series, d_series_derivative_form, verify_lemmas, LemmaReport};
use crate::{Error, ExactInt, ExactRat, Result};

/// Oracle against closed forms at one `(n, l)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub n: u64,
    pub level: u64,
    pub total_d: bool,
    pub total_b: bool,
    pub total_b_alt: bool,
    pub total_d_trunc: bool,
    pub level_count: bool,
    pub moment_1: bool,
    pub moment_2: bool,
}

impl OracleCheck {
    pub const COLUMNS: [&'static str; 7] = [
        "total_d",
        "total_b",
        "total_b_alt",
        "total_d_trunc",
        "level_count",
        "moment_1",
        "moment_2",
    ];

    pub fn flags(&self) -> [bool; 7] {
        [
            self.total_d,
            self.total_b,
            self.total_b_alt,
            self.total_d_trunc,
            self.level_count,
            self.moment_1,
            self.moment_2,
        ]
    }

    pub fn passed(&self) -> bool {
        self.flags().iter().all(|&f| f)
    }
}

/// Every `(n, l)` with `n <= max_n`, in order.
pub fn oracle_check(max_n: u64) -> Result<Vec<OracleCheck>> {
    if max_n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge {
            n: max_n,
            max: MAX_EXHAUSTIVE_N,
        });
    }
    let mut out = Vec::new();
    for n in 0..=max_n {
        for (l, sums) in oracle_table(n)?.into_iter().enumerate() {
            let level = l as u64;
            let t = &sums.totals;
            out.push(OracleCheck {
                n,
                level,
                total_d: t.total_d == total_d(n, level),
                total_b: t.total_b == total_b(n, level),
                total_b_alt: t.total_b == total_b_alt(n, level),
                total_d_trunc: t.total_d_trunc == total_d_trunc(n, level),
                level_count: t.level_count == level_count(n, level),
                moment_1: sums.v_sum == takacs_moment(n, level, 1)?,
                moment_2: sums.v_pairs == takacs_moment(n, level, 2)?,
            });
        }
    }
    Ok(out)
}

/// Generating functions against closed forms at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesCheck {
    pub level: u64,
    pub order: usize,
    /// `[z^n] B_l = totalB(n, l)` for every `n <= order`
    pub b_coefficients: bool,
    /// `[z^n] D_l = 2 (totalD - totalDTrunc)` for every `n <= order`
    pub d_coefficients: bool,
    /// both forms of `D_l` agree coefficientwise
    pub d_forms_agree: bool,
}

impl SeriesCheck {
    pub fn passed(&self) -> bool {
        self.b_coefficients && self.d_coefficients && self.d_forms_agree
    }
}

/// Levels `1..=max_level`, series through `order`.
pub fn series_check(max_level: u64, order: usize) -> Result<Vec<SeriesCheck>> {
    (1..=max_level)
        .into_par_iter()
        .map(|level| {
            let b = b_series(level, order)?;
            let d = d_series(level, order)?;
            let d_alt = d_series_derivative_form(level, order)?;
            let ns = 0..=order as u64;
            Ok(SeriesCheck {
                level,
                order,
                b_coefficients: ns
                    .clone()
                    .all(|n| b.coeff(n as usize) == ExactRat::from_integer(total_b(n, level))),
                d_coefficients: ns.clone().all(|n| {
                    let expected = (total_d(n, level) - total_d_trunc(n, level)) * 2;
                    d.coeff(n as usize) == ExactRat::from_integer(expected)
                }),
                d_forms_agree: d == d_alt,
            })
        })
        .collect()
}

/// Exact identities over a range, with the first counterexample if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    /// lattice path identity, every `l <= n <= paths_max_n`
    pub paths_max_n: u64,
    pub paths_failure: Option<(u64, u64)>,
    /// `sum_l l * level_count(n, l) = (4^n - C(2n, n)) / 2`, every
    /// `n <= average_max_n`
    pub average_max_n: u64,
    pub average_failure: Option<u64>,
    /// closed form difference against `totalD - totalDTrunc`
    pub trunc_failure: Option<(u64, u64)>,
    pub lemmas: LemmaReport,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.paths_failure.is_none()
            && self.average_failure.is_none()
            && self.trunc_failure.is_none()
            && self.lemmas.all_passed()
    }
}

pub fn identity_check(paths_max_n: u64, average_max_n: u64, lemma_index: u64) -> Result<IdentityReport> {
    let paths_failure = (0..=paths_max_n)
        .into_par_iter()
        .flat_map_iter(|n| (0..=n).map(move |l| (n, l)))
        .filter(|&(n, l)| paths_identity_lhs(n, l) != binom(2 * n as i64, n as i64 - l as i64).unwrap())
        .min();
    let average_failure = (0..=average_max_n)
        .into_par_iter()
        .filter(|&n| {
            let mass: ExactInt = (1..=n).map(|l| level_count(n, l) * l).sum();
            let total: ExactInt = (0..=n).map(|l| level_count(n, l)).sum();
            mass != level_mass(n) || ExactRat::new(mass, total) != average_level_exact(n)
        })
        .min();
    let trunc_failure = (0..=paths_max_n)
        .into_par_iter()
        .flat_map_iter(|n| (0..=n).map(move |l| (n, l)))
        .filter(|&(n, l)| {
            total_d(n, l) - total_d_trunc(n, l) != trunc_difference(n, l) || trunc_difference(n, l) < BigInt::ZERO
        })
        .min();
    Ok(IdentityReport {
        paths_max_n,
        paths_failure,
        average_max_n,
        average_failure,
        trunc_failure,
        lemmas: verify_lemmas(lemma_index)?,
    })
}
