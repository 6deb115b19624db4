//! Large-`n` behaviour: the normal CDF, the crossover constant, integer
//! thresholds where breadth-first search stops beating depth-first search,
//! and checks of the limiting forms against exact totals.

use std::f64::consts::{PI, SQRT_2};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{average_level_exact, total_b, total_d};
use crate::combinatorics::{binom_range, rat_to_f64, scaled_to_f64};
use crate::{Error, ExactInt, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `erf(t)` for small `|t|` through the all-positive series
/// `2/sqrt(pi) e^(-t^2) sum 2^k t^(2k+1) / (1*3*...*(2k+1))`.
fn erf_series(t: f64) -> f64 {
    if t < 0.0 {
        return -erf_series(-t);
    }
    let t2 = t * t;
    let mut term = t;
    let mut sum = t;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= 2.0 * t2 / (2.0 * k + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    2.0 / SQRT_PI * (-t2).exp() * sum
}

/// `erfc(t)` for `t >= 2` by the continued fraction
/// `e^(-t^2)/sqrt(pi) / (t + (1/2)/(t + 1/(t + (3/2)/(t + ...))))`,
/// evaluated with the modified Lentz method.
fn erfc_fraction(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = t + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = t + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-t * t).exp() / SQRT_PI / f
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.abs() < 3.0 {
        0.5 + 0.5 * erf_series(x / SQRT_2)
    } else if x < 0.0 {
        0.5 * erfc_fraction(-x / SQRT_2)
    } else {
        1.0 - 0.5 * erfc_fraction(x / SQRT_2)
    }
}

fn normal_band(s: f64) -> f64 {
    std_normal_cdf(2.0 * SQRT_2 * s) - std_normal_cdf(SQRT_2 * s)
}

/// `x e^(-x^2) - 2 sqrt(pi) (Phi(2 sqrt2 x) - Phi(sqrt2 x))`. Negative just
/// above zero, positive at 2, with a single root in between.
pub fn crossover_function(x: f64) -> f64 {
    x * (-x * x).exp() - 2.0 * SQRT_PI * normal_band(x)
}

/// Limit of `totalB(n, s sqrt n) / 4^n`.
pub fn totalb_asymptotic(s: f64) -> f64 {
    2.0 * s / SQRT_PI * (-s * s).exp() - 2.0 * normal_band(s)
}

/// `2 s e^(-s^2) - 2 sqrt(pi) (Phi(2 sqrt2 s) - Phi(sqrt2 s))`.
pub fn k_const(s: f64) -> f64 {
    2.0 * s * (-s * s).exp() - 2.0 * SQRT_PI * normal_band(s)
}

/// Root of [`crossover_function`] by bisection on `[0.1, 2]`.
pub fn solve_lambda(tol: f64) -> Result<f64> {
    if tol.is_nan() || tol < 1e-14 {
        return Err(Error::Domain(format!("tolerance {tol} is below 1e-14")));
    }
    let (mut lo, mut hi) = (0.1f64, 2.0f64);
    let (flo, fhi) = (crossover_function(lo), crossover_function(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..60 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if crossover_function(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `totalB(n, l) - totalD(n, l)`.
pub fn crossover_difference(n: u64, level: u64) -> ExactInt {
    total_b(n, level) - total_d(n, level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMethod {
    /// every level evaluated exactly
    FullScan,
    /// exact evaluation up to the first positive level
    ExactScan,
    /// float location of the crossing, confirmed exactly on both sides
    Prefilter,
}

/// Integer threshold for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub n: u64,
    /// Last level before breadth-first search first becomes slower; `n` when
    /// it never does.
    pub lstar: u64,
    /// Whether the sign pattern of `totalB - totalD` over `0..n` switches
    /// exactly once; `None` when not checked.
    pub unique: Option<bool>,
    pub ratio: f64,
    pub method: ThresholdMethod,
}

/// Exhaustive evaluation up to this `n` also checks uniqueness.
pub const FULL_SCAN_MAX_N: u64 = 2000;
/// Exact scanning up to this `n`; a float prefilter is used beyond it.
pub const EXACT_SCAN_MAX_N: u64 = 50_000;

/// `C(2n, n-j)` for `j = 0..=max_j` and their prefix sums.
struct Column {
    values: Vec<ExactInt>,
    /// prefix[k] = sum_{j<k} values[j]
    prefix: Vec<ExactInt>,
}

impl Column {
    fn new(n: u64, max_j: u64) -> Self {
        let mut values = binom_range(2 * n, n as i64 - max_j as i64, n as i64);
        values.reverse();
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(BigInt::zero());
        for v in &values {
            let next = prefix.last().unwrap() + v;
            prefix.push(next);
        }
        Self { values, prefix }
    }

    fn len(&self) -> u64 {
        self.values.len() as u64
    }

    /// `(l+1) C_(l+1) - C_(2l+1) - 2 sum_{j=l+1}^{2l} C_j`
    fn difference(&self, level: u64) -> ExactInt {
        let l = level as usize;
        debug_assert!(2 * l + 1 < self.values.len());
        &self.values[l + 1] * (l + 1) - &self.values[2 * l + 1] - (&self.prefix[2 * l + 1] - &self.prefix[l + 1]) * 2
    }
}

/// Sign of `totalB(n, l) - totalD(n, l)` computed with the positive scaling
/// `W = prod_{i=1}^{2l+1} (n+i) / C(2n, n)`, so that every term becomes an
/// integer product of about `2l` small factors.
pub fn difference_sign(n: u64, level: u64) -> std::cmp::Ordering {
    let (n, l) = (BigInt::from(n), level);
    // G_j = n(n-1)...(n-j+1) * prod_{i=j+1}^{2l+1} (n+i)
    let mut g = BigInt::one();
    for i in 0..=l {
        g *= &n - i;
    }
    for i in l + 2..=2 * l + 1 {
        g *= &n + i;
    }
    let mut acc = &g * (l + 1);
    for j in l + 1..=2 * l {
        acc -= &g * 2u8;
        // G_{j+1} = G_j (n - j) / (n + j + 1), exact
        g = g * (&n - j) / (&n + j + 1);
    }
    acc -= &g;
    if acc.is_positive() {
        std::cmp::Ordering::Greater
    } else if acc.is_negative() {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Equal
    }
}

fn positive(n: u64, level: u64) -> bool {
    difference_sign(n, level) == std::cmp::Ordering::Greater
}

fn report(n: u64, lstar: u64, unique: Option<bool>, method: ThresholdMethod) -> ThresholdReport {
    ThresholdReport {
        n,
        lstar,
        unique,
        ratio: lstar as f64 / (n as f64).sqrt(),
        method,
    }
}

/// Float estimate of the first level where the difference is positive, from
/// the ratios `C(2n, n-j) / C(2n, n)`.
fn prefilter_first_positive(n: u64) -> u64 {
    let nf = n as f64;
    let max_j = ((8.0 * nf.sqrt()) as u64 + 16).min(2 * n + 1);
    let mut ratio = Vec::with_capacity(max_j as usize + 1);
    ratio.push(1.0f64);
    for j in 1..=max_j {
        let r = if j > n {
            0.0
        } else {
            ratio[j as usize - 1] * (nf - j as f64 + 1.0) / (nf + j as f64)
        };
        ratio.push(r);
    }
    let mut prefix = vec![0.0f64; ratio.len() + 1];
    for (j, r) in ratio.iter().enumerate() {
        prefix[j + 1] = prefix[j] + r;
    }
    let mut l = 1;
    while 2 * l < max_j {
        let lu = l as usize;
        let f = (l as f64 + 1.0) * ratio[lu + 1] - ratio[2 * lu + 1] - 2.0 * (prefix[2 * lu + 1] - prefix[lu + 1]);
        if f > 0.0 {
            return l;
        }
        l += 1;
    }
    l
}

/// Integer threshold: the level just before `totalB(n, l) - totalD(n, l)`
/// first turns positive.
pub fn lambda_n(n: u64) -> Result<ThresholdReport> {
    if n == 0 {
        return Err(Error::Domain("threshold needs n >= 1".into()));
    }
    if n <= FULL_SCAN_MAX_N {
        let col = Column::new(n, 2 * n + 1);
        let signs: Vec<bool> = (0..n).map(|l| col.difference(l).is_positive()).collect();
        let first = signs.iter().position(|&p| p);
        let lstar = first.map_or(n, |p| p as u64 - 1);
        let unique = match first {
            None => true,
            Some(p) => signs[p..].iter().all(|&s| s),
        };
        // the last level always gives zero
        let unique = unique && !col.difference(n).is_positive();
        return Ok(report(n, lstar, Some(unique), ThresholdMethod::FullScan));
    }
    if n <= EXACT_SCAN_MAX_N {
        let mut max_j = ((4.0 * (n as f64).sqrt()) as u64 + 16).min(2 * n + 1);
        let mut col = Column::new(n, max_j);
        let mut l = 1;
        loop {
            if 2 * l + 1 >= col.len() {
                max_j = (2 * max_j).min(2 * n + 1);
                col = Column::new(n, max_j);
            }
            if l >= n {
                return Ok(report(n, n, None, ThresholdMethod::ExactScan));
            }
            if col.difference(l).is_positive() {
                return Ok(report(n, l - 1, None, ThresholdMethod::ExactScan));
            }
            l += 1;
        }
    }
    let mut first = prefilter_first_positive(n).max(1);
    loop {
        if !positive(n, first) {
            first += 1;
        } else if first > 1 && positive(n, first - 1) {
            first -= 1;
        } else {
            break;
        }
    }
    Ok(report(n, first - 1, None, ThresholdMethod::Prefilter))
}

/// Thresholds for several `n` in parallel, reported in input order.
pub fn lambda_n_many(ns: &[u64]) -> Result<Vec<ThresholdReport>> {
    ns.par_iter().map(|&n| lambda_n(n)).collect()
}

/// `sqrt(pi n) / 2`.
pub fn average_level_asymptotic(n: u64) -> f64 {
    0.5 * (PI * n as f64).sqrt()
}

/// Exact average level beside its leading-order approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageLevel {
    pub n: u64,
    pub exact: f64,
    pub asymptotic: f64,
}

pub fn average_level(n: u64) -> AverageLevel {
    AverageLevel {
        n,
        exact: rat_to_f64(&average_level_exact(n)),
        asymptotic: average_level_asymptotic(n),
    }
}

/// `totalB(n, l) / 4^n` as a float.
pub fn scaled_total_b(n: u64, level: u64) -> f64 {
    scaled_to_f64(&total_b(n, level), 2 * n)
}

/// Level `floor(s sqrt n)`, tolerant to rounding when `s sqrt n` is an
/// integer.
pub fn level_for(n: u64, s: f64) -> u64 {
    ((s * (n as f64).sqrt() + 1e-9).floor().max(0.0) as u64).min(n)
}

/// One row of the scaling table at fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub s: f64,
    pub total_b_scaled_exact: f64,
    pub totalb_asymptotic: f64,
    pub k_const: f64,
}

pub fn plot_rows(n: u64, grid: &[f64]) -> Vec<PlotRow> {
    grid.par_iter()
        .map(|&s| PlotRow {
            s,
            total_b_scaled_exact: scaled_total_b(n, level_for(n, s)),
            totalb_asymptotic: totalb_asymptotic(s),
            k_const: k_const(s),
        })
        .collect()
}

/// `a, a + step, ...` up to `b` inclusive, each point rounded to 12 decimals
/// so that accumulated float drift does not leak into output.
pub fn grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(Error::Domain(format!("bad grid {a}:{b}:{step}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as u64;
    Ok((0..=count)
        .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Largest `|totalB(n, floor(s sqrt n)) / 4^n - totalb_asymptotic(s)|` over
/// the grid.
pub fn max_asymptotic_error(n: u64, grid: &[f64]) -> f64 {
    plot_rows(n, grid)
        .iter()
        .map(|r| (r.total_b_scaled_exact - r.totalb_asymptotic).abs())
        .fold(0.0, f64::max)
}

/// The deep-level tail estimate at `l = floor(n^(1/2 + eps))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub n: u64,
    pub level: u64,
    pub scaled_total_b: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `totalB(n, l) / 4^n <= 2 (l / sqrt n) sqrt n e^(-n^(2 eps))`.
pub fn exp_tail_check(n: u64, eps: f64) -> TailCheck {
    let nf = n as f64;
    let level = (nf.powf(0.5 + eps) + 1e-9).floor() as u64;
    let value = scaled_total_b(n, level.min(n));
    let bound = 2.0 * level as f64 * (-nf.powf(2.0 * eps)).exp();
    TailCheck {
        n,
        level,
        scaled_total_b: value,
        bound,
        holds: value <= bound,
    }
}

/// `max_l |C(2n, n-l)/4^n - e^(-l^2/n)/sqrt(pi n)| * n^(3/2)`, over
/// `l <= min(n, 10 sqrt n)`.
pub fn local_limit_constant(n: u64) -> f64 {
    let nf = n as f64;
    let max_l = ((10.0 * nf.sqrt()) as u64).min(n);
    let column = binom_range(2 * n, n as i64 - max_l as i64, n as i64);
    column
        .iter()
        .rev()
        .enumerate()
        .map(|(l, c)| {
            let exact = scaled_to_f64(c, 2 * n);
            let approx = (-(l as f64).powi(2) / nf).exp() / (PI * nf).sqrt();
            (exact - approx).abs() * nf.powf(1.5)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::total_b;

    /// Maclaurin series of erf, alternating, 30 terms.
    fn erf_taylor(t: f64) -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * t.powi(2 * k + 1) / (fact * (2 * k + 1) as f64);
        }
        2.0 / PI.sqrt() * sum
    }

    /// Leading terms of the asymptotic expansion of erfc.
    fn erfc_asymptotic(t: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..8 {
            term *= -((2 * k - 1) as f64) / (2.0 * t * t);
            sum += term;
        }
        (-t * t).exp() / (t * PI.sqrt()) * sum
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle = 0.5 + 0.5 * erf_taylor(1.0 / SQRT_2);
        assert!((std_normal_cdf(1.0) - oracle).abs() <= 1e-13);
        for i in -80..=80 {
            let x = i as f64 * 0.1;
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14, "x = {x}");
        }
        for i in 0..=25 {
            let x = i as f64 * 0.1;
            let oracle = 0.5 + 0.5 * erf_taylor(x / SQRT_2);
            assert!((std_normal_cdf(x) - oracle).abs() <= 1e-14, "x = {x}");
        }
        // far tail
        for x in [6.0, 8.0, 10.0] {
            let oracle = 0.5 * erfc_asymptotic(x / SQRT_2);
            assert!((std_normal_cdf(-x) / oracle - 1.0).abs() <= 1e-6, "x = {x}");
        }
        // continuity across the switch
        assert!((std_normal_cdf(3.0 - 1e-12) - std_normal_cdf(3.0)).abs() < 1e-14);
        assert!((std_normal_cdf(-3.0 + 1e-12) - std_normal_cdf(-3.0)).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_against_library_erf() {
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            let lib = 0.5 * statrs::function::erf::erfc(-x / SQRT_2);
            // the library erfc is only good to about 1e-13 relative
            assert!((std_normal_cdf(x) / lib - 1.0).abs() <= 1e-9, "x = {x}");
        }
    }

    #[test]
    fn crossover_shape() {
        assert_eq!(crossover_function(0.0), 0.0);
        assert!(crossover_function(0.5) < 0.0);
        assert!(crossover_function(1.2) > 0.0);
        let mut changes = 0;
        let mut prev = crossover_function(0.1) > 0.0;
        for i in 1..=10_000 {
            let x = 0.1 + 1.9 * i as f64 / 10_000.0;
            let now = crossover_function(x) > 0.0;
            if now != prev {
                changes += 1;
            }
            prev = now;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn lambda_root() {
        let lambda = solve_lambda(1e-9).unwrap();
        assert_eq!(format!("{lambda:.6}"), "0.789004");
        let lambda = solve_lambda(1e-14).unwrap();
        assert!(crossover_function(lambda).abs() <= 1e-12);
        assert!((k_const(lambda) - lambda * (-lambda * lambda).exp()).abs() <= 1e-12);
        assert!((k_const(lambda) - 0.4234).abs() <= 1e-4);
        assert!(solve_lambda(1e-16).is_err());
        assert!(average_level_asymptotic(1) / 1.0 > lambda);
    }

    #[test]
    fn constants_relate() {
        assert_eq!(totalb_asymptotic(0.0), 0.0);
        assert_eq!(k_const(0.0), 0.0);
        for i in 0..40 {
            let s = i as f64 * 0.05;
            assert!((SQRT_PI * totalb_asymptotic(s) - k_const(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn small_thresholds() {
        assert_eq!(crossover_difference(4, 1), BigInt::from(-8));
        assert_eq!(crossover_difference(4, 2), BigInt::from(6));
        assert_eq!(crossover_difference(3, 2), BigInt::from(1));
        let r = lambda_n(4).unwrap();
        assert_eq!((r.lstar, r.unique), (1, Some(true)));
        let r = lambda_n(3).unwrap();
        assert_eq!(r.lstar, 1);
        assert_eq!(lambda_n(1).unwrap().lstar, 1);
        assert_eq!(lambda_n(2).unwrap().lstar, 2);
        assert!(lambda_n(0).is_err());
    }

    #[test]
    fn scaled_sign_matches_exact_difference() {
        for n in 1..=80u64 {
            for l in 0..=n {
                let exact = crossover_difference(n, l);
                assert_eq!(difference_sign(n, l), exact.sign().cmp_zero(), "n = {n}, l = {l}");
            }
        }
    }

    trait CmpZero {
        fn cmp_zero(self) -> std::cmp::Ordering;
    }

    impl CmpZero for num_bigint::Sign {
        fn cmp_zero(self) -> std::cmp::Ordering {
            match self {
                num_bigint::Sign::Minus => std::cmp::Ordering::Less,
                num_bigint::Sign::NoSign => std::cmp::Ordering::Equal,
                num_bigint::Sign::Plus => std::cmp::Ordering::Greater,
            }
        }
    }

    #[test]
    fn regimes_agree() {
        // same n through the column scan and through the scaled sign test
        for n in [100u64, 777, 1500, 2000] {
            let full = lambda_n(n).unwrap();
            let l = full.lstar;
            assert!(!positive(n, l) && positive(n, l + 1), "n = {n}");
            assert_eq!(prefilter_first_positive(n), l + 1, "n = {n}");
        }
    }

    #[test]
    fn uniqueness_up_to_five_hundred() {
        for n in 1..=500 {
            assert_eq!(lambda_n(n).unwrap().unique, Some(true), "n = {n}");
        }
    }

    #[test]
    fn threshold_at_one_hundred() {
        let r = lambda_n(100).unwrap();
        assert_eq!(r.lstar, 7);
        assert!(crossover_difference(100, 7) <= BigInt::zero());
        assert!(crossover_difference(100, 8) > BigInt::zero());
    }

    #[test]
    fn average_levels() {
        let a = average_level(3);
        assert!((a.exact - 1.1).abs() < 1e-15);
        assert!((a.asymptotic - 1.535).abs() < 1e-3);
        let a = average_level(10_000);
        assert!((a.exact - a.asymptotic).abs() <= 1.0);
        assert!(0.5 * PI.sqrt() > solve_lambda(1e-9).unwrap());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(grid(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(grid(0.2, 1.6, 0.2).unwrap().len(), 8);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scaled_values() {
        assert_eq!(level_for(100, 0.8), 8);
        assert_eq!(level_for(10_000, 0.2), 20);
        let x = scaled_total_b(20, 3);
        let direct = total_b(20, 3).to_string().parse::<f64>().unwrap() / 4f64.powi(20);
        assert!((x / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_small() {
        let t = exp_tail_check(10_000, 0.2);
        assert_eq!(t.level, 630);
        assert!(t.holds, "{t:?}");
    }
}
