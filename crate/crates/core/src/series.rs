//! Truncated power series with exact rational coefficients, integer
//! polynomials, and the generating functions built from them.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::{catalan, choose, expect_integer};
use crate::{Error, ExactInt, ExactRat, Result};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 64;

/// `sum_{k <= order} c_k z^k`; coefficients beyond `order` are unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<ExactRat>,
}

impl TruncSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![ExactRat::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(ExactRat::one(), order)
    }

    pub fn constant(c: ExactRat, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c z^k`.
    pub fn monomial(k: usize, c: ExactRat, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// Pads with zeros or drops terms so the result has the given order.
    pub fn from_coeffs(mut coeffs: Vec<ExactRat>, order: usize) -> Self {
        coeffs.resize(order + 1, ExactRat::zero());
        Self { coeffs }
    }

    pub fn from_integers(coeffs: impl IntoIterator<Item = ExactInt>, order: usize) -> Self {
        Self::from_coeffs(
            coeffs.into_iter().take(order + 1).map(ExactRat::from_integer).collect(),
            order,
        )
    }

    pub fn from_polynomial(p: &Polynomial, order: usize) -> Self {
        Self::from_integers(p.coeffs.iter().cloned(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ExactRat] {
        &self.coeffs
    }

    /// Coefficient of `z^k`; zero beyond the order.
    pub fn coeff(&self, k: usize) -> ExactRat {
        self.coeffs.get(k).cloned().unwrap_or_else(ExactRat::zero)
    }

    /// Coefficient of `z^k`, which must be an integer.
    pub fn int_coeff(&self, k: usize) -> ExactInt {
        expect_integer(self.coeff(k), "series coefficient")
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(
            self.coeffs[..=order.min(self.order())].to_vec(),
            order.min(self.order()),
        )
    }

    pub fn scale(&self, c: &ExactRat) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&ExactRat::from_integer(c.into()))
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let order = self.order();
        let mut coeffs = vec![ExactRat::zero(); order + 1];
        if k <= order {
            coeffs[k..].clone_from_slice(&self.coeffs[..=order - k]);
        }
        Self { coeffs }
    }

    /// Term-by-term derivative. The result is exact only through `order - 1`,
    /// so the order drops by one.
    pub fn derivative(&self) -> Self {
        let order = self.order();
        if order == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=order)
            .map(|k| &self.coeffs[k] * ExactRat::from_integer(k.into()))
            .collect();
        Self { coeffs }
    }

    /// `1 / self`; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::Series("cannot invert a series with zero constant term".into()));
        }
        let order = self.order();
        let inv0 = c0.recip();
        let mut out = vec![ExactRat::zero(); order + 1];
        out[0] = inv0.clone();
        for k in 1..=order {
            let mut acc = ExactRat::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() {
                    acc += &self.coeffs[i] * &out[k - i];
                }
            }
            out[k] = -(acc * &inv0);
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inverse()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Rows `(k, numerator, denominator)` for `k = 0..=order`.
    pub fn rows(&self) -> Vec<SeriesRow> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| SeriesRow {
                k: k as u64,
                numerator: c.numer().to_string(),
                denominator: c.denom().to_string(),
            })
            .collect()
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;

    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order().min(rhs.order());
        TruncSeries {
            coeffs: (0..=order).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;

    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order().min(rhs.order());
        TruncSeries {
            coeffs: (0..=order).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect(),
        }
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;

    fn neg(self) -> TruncSeries {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;

    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![ExactRat::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncSeries { coeffs: out }
    }
}

/// One row of a series dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesRow {
    pub k: u64,
    pub numerator: String,
    pub denominator: String,
}

/// Integer polynomial, lowest degree first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<ExactInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<ExactInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeffs(&self) -> &[ExactInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k).collect())
    }

    /// `p(-z)`.
    pub fn negate_argument(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, z: &ExactRat) -> ExactRat {
        self.coeffs
            .iter()
            .rev()
            .fold(ExactRat::zero(), |acc, c| acc * z + ExactRat::from_integer(c.clone()))
    }

    /// `(-z)^n`.
    pub fn neg_z_power(n: usize) -> Self {
        let c = if n.is_multiple_of(2) { 1 } else { -1 };
        Self::from_i64(&[c]).shift(n)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigInt::zero();
        Polynomial::new(
            (0..len)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Catalan generating function through `order`.
pub fn catalan_series(order: usize) -> TruncSeries {
    TruncSeries::from_integers((0..=order as u64).map(catalan), order)
}

/// `sum_k C(n-k, k) z^k`; zero for negative `n`.
pub fn fib_poly(n: i64) -> Polynomial {
    if n < 0 {
        return Polynomial::zero();
    }
    Polynomial::new((0..=n / 2).map(|k| choose(n - k, k)).collect())
}

/// `f_n(-z)`.
fn fib_neg(n: i64) -> Polynomial {
    fib_poly(n).negate_argument()
}

/// `[z^n] C^m = m/(n+m) C(2n+m-1, n)`.
pub fn c_pow_coeff(m: u64, n: u64) -> Result<ExactInt> {
    if m == 0 {
        return Err(Error::Domain("power of the Catalan series must be at least 1".into()));
    }
    let (m, n) = (m as i64, n as i64);
    let value = ExactRat::new(choose(2 * n + m - 1, n) * m, BigInt::from(n + m));
    Ok(expect_integer(value, "Catalan power coefficient"))
}

/// `sum_k C(2k, k) z^k = (1 - 4z)^(-1/2)`.
pub fn central_binomial_series(order: usize) -> TruncSeries {
    TruncSeries::from_integers((0..=order as i64).map(|k| choose(2 * k, k)), order)
}

/// `sum_k 4^k z^k = (1 - 4z)^(-1)`.
pub fn geometric_four_series(order: usize) -> TruncSeries {
    let mut four = BigInt::one();
    let mut coeffs = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        coeffs.push(four.clone());
        four *= 4;
    }
    TruncSeries::from_integers(coeffs, order)
}

fn check_level(level: u64, order: usize) -> Result<()> {
    if level == 0 {
        return Err(Error::Domain("generating functions are defined for levels >= 1".into()));
    }
    if (level as usize) > order {
        return Err(Error::Domain(format!("order {order} is below level {level}")));
    }
    Ok(())
}

/// Powers `C^0 .. C^max` at one order.
fn catalan_powers(order: usize, max: usize) -> Vec<TruncSeries> {
    let c = catalan_series(order);
    let mut out = Vec::with_capacity(max + 1);
    out.push(TruncSeries::one(order));
    for i in 1..=max {
        let next = &out[i - 1] * &c;
        out.push(next);
    }
    out
}

fn poly(p: &Polynomial, order: usize) -> TruncSeries {
    TruncSeries::from_polynomial(p, order)
}

/// Generating function of the breadth-first totals at a fixed level:
/// `z^l C^(3l+1) (zC g_l' - g_(l+1)')` with `g_k(z) = f_k(-z)`.
pub fn b_series(level: u64, order: usize) -> Result<TruncSeries> {
    check_level(level, order)?;
    let l = level as usize;
    let c = catalan_series(order);
    let g_l = poly(&fib_neg(l as i64).derivative(), order);
    let g_next = poly(&fib_neg(l as i64 + 1).derivative(), order);
    let inner = &(&c * &g_l).shift(1) - &g_next;
    Ok(&c.pow(3 * l as u32 + 1).shift(l) * &inner)
}

/// Generating function of `2 (totalD - totalDTrunc)` at a fixed level,
/// written with `1/(1-4z)` and `1/sqrt(1-4z)` factors.
pub fn d_series(level: u64, order: usize) -> Result<TruncSeries> {
    check_level(level, order)?;
    let l = level as usize;
    let li = l as i64;
    let pw = catalan_powers(order, 3 * l + 2);
    let c = &pw[1];
    let g_prev = poly(&fib_neg(li - 1), order);
    let g_l = poly(&fib_neg(li), order);
    let dg_l = poly(&fib_neg(li).derivative(), order);
    let two = TruncSeries::constant(ExactRat::from_integer(2.into()), order);
    let geometric = geometric_four_series(order);
    let root = central_binomial_series(order);
    let zc2 = pw[2 * l].shift(l);

    let first = &(&pw[l] - &pw[3 * l + 2].shift(l + 1).scale_int(2)) * &g_prev;
    let second = &(&zc2 * &(&two - c)).scale_int(li + 1) * &geometric;
    let third = &(&zc2 + &TruncSeries::one(order)) * &root;
    let fourth = &(&pw[3 * l + 1].scale_int(2) - &pw[3 * l + 2]).shift(l + 1) * &dg_l;
    let fifth = (&pw[3 * l + 1].shift(l) * &g_l).scale_int(li - 1);
    Ok(&(&(&(&first + &second) - &third) + &fourth) - &fifth)
}

/// The same generating function assembled from derivatives of the Catalan
/// series, before the `1/(1-4z)` rewriting.
pub fn d_series_derivative_form(level: u64, order: usize) -> Result<TruncSeries> {
    check_level(level, order)?;
    let l = level as usize;
    let li = l as i64;
    let pw = catalan_powers(order, 3 * l + 2);
    let c = &pw[1];
    // z C' through `order` needs C through `order + 1`
    let z_dc = catalan_series(order + 1).derivative().shift(1);
    let g_l = poly(&fib_neg(li), order);
    let dg_l = poly(&fib_neg(li).derivative(), order);
    let dg_next = poly(&fib_neg(li + 1).derivative(), order);
    let g_before = poly(&fib_neg(li - 2), order);
    let g_prev = poly(&fib_neg(li - 1), order);

    let first = &pw[2 * l].shift(l) * &(&c.scale_int(li) + &z_dc.scale_int(2 * li + 1));
    let bracket = &(&(c * &dg_l).shift(1) - &dg_next) - &g_l;
    let second = &pw[3 * l + 1].shift(l) * &bracket;
    let fourth = (&pw[l + 1] * &g_before).shift(1);
    let fifth = (&pw[3 * l + 2] * &g_prev).shift(l + 1).scale_int(2);
    Ok(&(&(&(&first - &second) - &z_dc) + &fourth) - &fifth)
}

/// `F_l(x0, y0, z)`: the tree generating function marking non-root nodes
/// above the level with `x0` and nodes on it with `y0`.
pub fn f_eval_series(level: u64, x0: &ExactRat, y0: &ExactRat, order: usize) -> Result<TruncSeries> {
    let one = TruncSeries::one(order);
    let mut f = catalan_series(order).scale(y0);
    for i in 1..=level {
        let weight = if i == 1 { ExactRat::one() } else { x0.clone() };
        f = (&one - &f.scale(&weight).shift(1)).inverse()?;
    }
    Ok(f)
}

/// Result of one identity family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub checked: u64,
    /// smallest index where the identity fails
    pub first_failure: Option<u64>,
}

impl IdentityCheck {
    fn run(name: &'static str, range: impl IntoIterator<Item = u64>, mut holds: impl FnMut(u64) -> bool) -> Self {
        let mut checked = 0;
        let mut first_failure = None;
        for n in range {
            checked += 1;
            if first_failure.is_none() && !holds(n) {
                first_failure = Some(n);
            }
        }
        Self {
            name,
            checked,
            first_failure,
        }
    }

    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub max_index: u64,
    pub checks: Vec<IdentityCheck>,
    /// `'-'` or `'+'`: which sign of the last term of the second derivative
    /// identity holds everywhere, if exactly one does
    pub second_derivative_sign: Option<char>,
}

impl LemmaReport {
    /// Every identity passes, counting the second derivative identity as
    /// passing when one of its two signs holds.
    pub fn all_passed(&self) -> bool {
        self.second_derivative_sign.is_some()
            && self
                .checks
                .iter()
                .filter(|c| !c.name.starts_with("second derivative"))
                .all(IdentityCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks
            .iter()
            .find(|c| !c.passed() && !c.name.starts_with("second derivative"))
    }
}

/// Check the Fibonacci polynomial identities for every index `0..=max_index`,
/// with series identities compared through order `max_index`.
pub fn verify_lemmas(max_index: u64) -> Result<LemmaReport> {
    if max_index < 2 {
        return Err(Error::Domain("lemma checks need an index of at least 2".into()));
    }
    let order = max_index as usize;
    let range = || 0..=max_index;
    let f = |n: u64| fib_poly(n as i64);
    let g = |n: i64| fib_neg(n);
    let z = Polynomial::from_i64(&[0, 1]);

    let recurrence = IdentityCheck::run("recurrence", range(), |n| {
        f(n + 1) == &f(n) + &(&z * &fib_poly(n as i64 - 1))
    });
    let cassini = IdentityCheck::run("cassini", range(), |n| {
        let n = n as i64;
        &(&fib_poly(n) * &fib_poly(n)) - &(&fib_poly(n - 1) * &fib_poly(n + 1)) == Polynomial::neg_z_power(n as usize)
    });
    let c = catalan_series(order);
    let one = TruncSeries::one(order);
    let zc = c.shift(1);
    let denominator = IdentityCheck::run("denominator", range(), |n| {
        let n = n as i64;
        let d = &poly(&g(n), order) - &(&poly(&g(n - 1), order) * &zc);
        &d * &c.pow(n as u32) == one
    });
    let first_derivative = IdentityCheck::run("first derivative", range(), |n| {
        let ni = n as i64;
        let lhs = &g(ni).scale(ni) - &g(ni).derivative().shift(1).scale(2);
        lhs == g(ni + 1).derivative().scale(-1)
    });
    let second = |sign: i64| {
        move |n: u64| {
            let n = n as i64;
            let rhs = &(&g(n + 1).derivative() - &g(n).derivative().shift(1)) + &g(n + 2).derivative().scale(sign);
            g(n) == rhs
        }
    };
    let minus = IdentityCheck::run("second derivative (-)", range(), second(-1));
    let plus = IdentityCheck::run("second derivative (+)", range(), second(1));
    let functional = IdentityCheck::run("catalan functional equation", [max_index], |_| {
        c == &one + &(&c * &c).shift(1) && &(&one - &zc) * &c == one
    });
    let derivative = IdentityCheck::run("catalan derivative", [max_index], |_| catalan_derivative_holds(order));
    let second_derivative_sign = match (minus.passed(), plus.passed()) {
        (true, false) => Some('-'),
        (false, true) => Some('+'),
        _ => None,
    };
    Ok(LemmaReport {
        max_index,
        checks: vec![
            recurrence,
            cassini,
            denominator,
            first_derivative,
            minus,
            plus,
            functional,
            derivative,
        ],
        second_derivative_sign,
    })
}

/// `z C' (1 - 4z) = (2z - 1) C + 1` through `order`.
pub fn catalan_derivative_holds(order: usize) -> bool {
    let c = catalan_series(order);
    let z_dc = catalan_series(order + 1).derivative().shift(1);
    let one = TruncSeries::one(order);
    let lhs = &z_dc * &(&one - &TruncSeries::monomial(1, ExactRat::from_integer(4.into()), order));
    let rhs = &(&c * &TruncSeries::from_integers([BigInt::from(-1), BigInt::from(2)], order)) + &one;
    lhs == rhs
}
