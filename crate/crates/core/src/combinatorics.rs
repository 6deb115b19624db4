//! Exact combinatorial primitives.
//!
//! Every count in the crate is an [`ExactInt`]; every expectation is an
//! [`ExactRat`]. Binomials follow the convention `C(n, k) = 0` whenever
//! `k < 0` or `k > n`, which several of the closed forms rely on at small
//! levels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type ExactInt = BigInt;
pub type ExactRat = BigRational;

/// `C(n, k)`, zero outside `0 <= k <= n`. Negative `n` is rejected.
pub fn binom(n: i64, k: i64) -> Result<ExactInt> {
    if n < 0 {
        return Err(Error::Domain(format!("binomial upper index {n} is negative")));
    }
    Ok(choose(n, k))
}

/// Infallible binomial for internal formula evaluation, where the upper index
/// is nonnegative by construction.
pub(crate) fn choose(n: i64, k: i64) -> ExactInt {
    assert!(n >= 0, "binomial upper index {n} is negative");
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    if k < 64 {
        let mut acc = BigInt::one();
        for i in 1..=k {
            acc *= n - k + i;
            acc /= i;
        }
        return acc;
    }
    range_product(n - k + 1, n) / range_product(1, k)
}

/// `lo * (lo+1) * ... * hi` by balanced splitting, so the large
/// multiplications see operands of similar size.
fn range_product(lo: i64, hi: i64) -> ExactInt {
    if hi < lo {
        return BigInt::one();
    }
    if hi - lo < 16 {
        return (lo..=hi).fold(BigInt::one(), |acc, i| acc * i);
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

/// `C(m, k)` for every `k` in `lo..=hi`, computed with one direct evaluation
/// and then exact ratio steps. Much cheaper than independent calls when `m`
/// is large.
pub fn binom_range(m: u64, lo: i64, hi: i64) -> Vec<ExactInt> {
    if hi < lo {
        return Vec::new();
    }
    let m = m as i64;
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let first_valid = lo.max(0);
    for _ in lo..first_valid.min(hi + 1) {
        out.push(BigInt::zero());
    }
    if first_valid > hi || first_valid > m {
        out.resize((hi - lo + 1) as usize, BigInt::zero());
        return out;
    }
    let mut cur = choose(m, first_valid);
    out.push(cur.clone());
    for k in first_valid + 1..=hi {
        if k > m {
            out.push(BigInt::zero());
            continue;
        }
        // C(m, k) = C(m, k-1) * (m - k + 1) / k
        cur *= m - k + 1;
        cur /= k;
        out.push(cur.clone());
    }
    out
}

/// The `n`th Catalan number `C(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> ExactInt {
    let n = n as i64;
    let (q, r) = choose(2 * n, n).div_rem(&BigInt::from(n + 1));
    debug_assert!(r.is_zero());
    q
}

/// Number of monotone lattice paths from `(0, 0)` to `(i, j)` with unit
/// right/up steps that never pass below the diagonal.
pub fn ballot(i: i64, j: i64) -> Result<ExactInt> {
    if i < 0 || i > j {
        return Err(Error::Domain(format!("ballot({i}, {j}) requires 0 <= i <= j")));
    }
    let num = choose(j + i + 1, i) * (j + 1 - i);
    let (q, r) = num.div_rem(&BigInt::from(j + i + 1));
    assert!(r.is_zero(), "ballot({i}, {j}): division is not exact");
    Ok(q)
}

/// Stirling-series coefficients `B_{2k} / (2k (2k - 1))`, k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let mut shift = 1.0;
    let mut y = x;
    while y < 20.0 {
        shift *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut tail = 0.0;
    for c in STIRLING {
        tail += c * pow;
        pow *= inv2;
    }
    let base = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + tail;
    base - shift.ln()
}

/// `ln C(n, k)` via log-gamma. Intended for scans, never for reported values.
pub fn log_binom(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("log_binom({n}, {k}) requires k <= n")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

/// `x (x + 1) ... (x + k - 1)`.
pub fn rising_factorial(x: i64, k: u64) -> ExactInt {
    (0..k as i64).fold(BigInt::one(), |acc, i| acc * (x + i))
}

/// `x (x - 1) ... (x - k + 1)`.
pub fn falling_factorial(x: i64, k: u64) -> ExactInt {
    (0..k as i64).fold(BigInt::one(), |acc, i| acc * (x - i))
}

/// `x / 2^e` as a float, without overflowing on huge `x`.
pub fn scaled_to_f64(x: &ExactInt, e: u64) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::NAN) * (-(e as f64)).exp2();
    }
    // keep 128 significant bits
    let drop = bits - 128;
    let top = (x >> drop).to_f64().unwrap_or(f64::NAN);
    top * (drop as f64 - e as f64).exp2()
}

/// Float value of an exact rational, robust to huge numerators/denominators.
pub fn rat_to_f64(r: &ExactRat) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    if n.is_zero() {
        return 0.0;
    }
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // scale so the quotient carries ~64 significant bits
    let shift = 64 - (nb - db);
    let q = if shift >= 0 {
        (n.abs() << shift as u64) / d
    } else {
        (n.abs() >> (-shift) as u64) / d
    };
    let v = q.to_f64().unwrap_or(f64::NAN) * (-(shift as f64)).exp2();
    if n.is_negative() {
        -v
    } else {
        v
    }
}

/// Render an exact rational as `p/q` (or just `p` when integral).
pub fn rat_string(r: &ExactRat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> ExactRat {
    BigRational::new(n.into(), d.into())
}

/// Convert an exact rational that must be integral, panicking otherwise.
pub(crate) fn expect_integer(r: ExactRat, what: &str) -> ExactInt {
    assert!(r.is_integer(), "{what}: expected an integer, got {}", rat_string(&r));
    r.to_integer()
}
