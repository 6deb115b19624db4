//! Exact closed forms for the level totals.
//!
//! All arguments are `(n, level)` with `n` edges. Binomials vanish outside
//! their range, which keeps the formulas valid at small levels without case
//! splits.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::{binom_range, choose, expect_integer, falling_factorial, rat, rat_string, rising_factorial};
use crate::{Error, ExactInt, ExactRat, Result};

fn sign(k: u64) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn ni(x: u64) -> i64 {
    x as i64
}

/// Nodes at `level` summed over all trees: `(2l+1)/(2n+1) C(2n+1, n-l)`.
pub fn level_count(n: u64, level: u64) -> ExactInt {
    if level > n {
        return BigInt::zero();
    }
    let (n, l) = (ni(n), ni(level));
    let num = choose(2 * n + 1, n - l) * (2 * l + 1);
    let (q, r) = (&num / (2 * n + 1), &num % (2 * n + 1));
    assert!(r.is_zero(), "level count division is not exact");
    q
}

/// Depth-first step counts summed over all level-`l` nodes: `l C(2n, n-l)`.
pub fn total_d(n: u64, level: u64) -> ExactInt {
    choose(2 * ni(n), ni(n) - ni(level)) * level
}

/// Mean depth-first score of a level-`l` node: `l (n+l+1) / (2l+1)`. Zero at
/// the root level and beyond `n`.
pub fn expected_dfs(n: u64, level: u64) -> ExactRat {
    if level == 0 || level > n {
        return ExactRat::zero();
    }
    rat(level * (n + level + 1), 2 * level + 1)
}

/// `C(2n, n-j)` for `j` in `lo..=hi`.
fn central_column(n: u64, lo: u64, hi: u64) -> Vec<ExactInt> {
    // C(2n, n-j) for j = hi down to lo, then reversed
    let mut col = binom_range(2 * n, ni(n) - ni(hi), ni(n) - ni(lo));
    col.reverse();
    col
}

/// Breadth-first step counts summed over all level-`l` nodes.
pub fn total_b(n: u64, level: u64) -> ExactInt {
    if level > n {
        return BigInt::zero();
    }
    let l = level;
    // col[j - l] = C(2n, n-j), j = l..=2l+1
    let col = central_column(n, l, 2 * l + 1);
    let lead = ExactRat::new(&col[0] * (n * (2 * l + 1)), BigInt::from(n + l + 1));
    let lead = expect_integer(lead, "leading breadth-first term");
    let tail: ExactInt = col[1..=l as usize].iter().sum();
    lead - &col[l as usize + 1] - tail * 2
}

/// The same total through the alternating double sum obtained from the
/// generating function.
pub fn total_b_alt(n: u64, level: u64) -> ExactInt {
    if level > n {
        return BigInt::zero();
    }
    let (n, l) = (ni(n), ni(level));
    let mut acc = ExactRat::zero();
    for k in 1..=(l + 1) / 2 {
        let c =
            choose(l - k + 1, k) * k * sign(k as u64 - 1) * (3 * l + 1) * choose(2 * n - 2 * k + l + 2, n - l - k + 1);
        acc += ExactRat::new(c, BigInt::from(n - k + 2 * l + 2));
    }
    for k in 1..=l / 2 {
        let c = choose(l - k, k) * k * sign(k as u64 - 1) * (3 * l + 2) * choose(2 * n - 2 * k + l + 1, n - l - k);
        acc -= ExactRat::new(c, BigInt::from(n - k + 2 * l + 2));
    }
    expect_integer(acc, "alternating breadth-first sum")
}

/// Order 1: `sum_T v_T(l)`. Order 2: `sum_T C(v_T(l), 2)`.
pub fn takacs_moment(n: u64, level: u64, order: u8) -> Result<ExactInt> {
    if level > n {
        return Err(Error::Domain(format!("level {level} exceeds n = {n}")));
    }
    let (n, l) = (ni(n), ni(level));
    match order {
        1 => Ok(choose(2 * n, n - l)),
        2 => {
            let first = ExactRat::from_integer(choose(2 * n, n - l) * (n + l));
            let second = ExactRat::new(choose(2 * n, n - 2 * l) * (n + 2 * l), BigInt::from(2));
            let sum: ExactInt = (l..2 * l).map(|j| choose(2 * n, n - j)).sum();
            let value = first - second - ExactRat::from_integer(sum * (2 * l));
            Ok(expect_integer(value, "second moment"))
        }
        other => Err(Error::Domain(format!("moment order {other} is not 1 or 2"))),
    }
}

/// `totalD - totalDTrunc`, assembled as one rational and checked integral.
pub fn trunc_difference(n: u64, level: u64) -> ExactInt {
    if level == 0 || level > n {
        return BigInt::zero();
    }
    let (n, l) = (ni(n), ni(level));
    let half = rat(1, 2);
    let mut acc = ExactRat::zero();
    for k in 0..=(l - 1) / 2 {
        let m = n - k;
        let weight = choose(l - 1 - k, k) * sign(k as u64);
        let a = ExactRat::new(choose(2 * m + l - 1, m) * l, BigInt::from(m + l));
        let b = ExactRat::new(
            choose(2 * m + l - 1, m - l - 1) * (6 * l + 4),
            BigInt::from(m + 2 * l + 1),
        );
        acc += ExactRat::from_integer(weight) * (a - b);
    }
    for k in 0..=l / 2 {
        let m = n - k;
        let weight = choose(l - k, k) * sign(k as u64);
        let a = ExactRat::new(
            choose(2 * m + l, m - l) * ((3 * l + 1) * (2 * k - l + 1)),
            BigInt::from(m + 2 * l + 1),
        );
        let b = ExactRat::new(
            choose(2 * m + l + 1, m - l) * ((3 * l + 2) * k),
            BigInt::from(m + 2 * l + 2),
        );
        acc += ExactRat::from_integer(weight) * (a - b);
    }
    let mut four = BigInt::one();
    for k in 0..=n - l {
        let inner = &four * 4 * (l + 1) - choose(2 * k, k) * 2;
        let a = ExactRat::new(
            inner * l * choose(2 * n - 2 * k - 1, n - k - l),
            BigInt::from(n - k + l),
        );
        let b = ExactRat::new(
            &four * ((2 * l + 1) * (l + 1)) * choose(2 * n - 2 * k, n - k - l),
            BigInt::from(n - k + l + 1),
        );
        acc += a - b;
        four *= 4;
    }
    acc -= ExactRat::from_integer(choose(2 * n, n));
    expect_integer(acc * half, "truncation difference")
}

/// Truncated depth-first step counts summed over all level-`l` nodes.
pub fn total_d_trunc(n: u64, level: u64) -> ExactInt {
    if level == 0 {
        return BigInt::zero();
    }
    total_d(n, level) - trunc_difference(n, level)
}

/// Left side of the lattice path identity whose right side is `C(2n, n-l)`.
pub fn paths_identity_lhs(n: u64, level: u64) -> ExactInt {
    let (n, l) = (ni(n), ni(level));
    let mut acc = ExactRat::zero();
    for j in l.max(0)..=n {
        let first = if j == 0 {
            // C(-1, -1) = 1: the empty path
            BigInt::one()
        } else {
            choose(2 * j - l - 1, j - 1)
        };
        let c = first * (l + 1) * choose(2 * n - 2 * j + l + 1, n - j);
        acc += ExactRat::new(c, BigInt::from(2 * n - 2 * j + l + 1));
    }
    expect_integer(acc, "path identity")
}

/// `sum_l l * level_count(n, l)`, i.e. `(4^n - C(2n, n)) / 2`.
pub fn level_mass(n: u64) -> ExactInt {
    let four = BigInt::one() << (2 * n);
    (four - choose(2 * ni(n), ni(n))) / 2
}

/// Average level of a node, over all trees with `n` edges.
pub fn average_level_exact(n: u64) -> ExactRat {
    ExactRat::new(level_mass(n), choose(2 * ni(n), ni(n)))
}

/// One row of the exact table, with totals as decimal strings and the mean
/// scores as `p/q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactRow {
    pub n: u64,
    pub level: u64,
    pub total_d: String,
    pub total_b: String,
    pub total_d_trunc: String,
    pub level_count: String,
    pub expected_dfs: String,
    pub expected_bfs: String,
}

pub fn exact_row(n: u64, level: u64) -> ExactRow {
    let count = level_count(n, level);
    let b = total_b(n, level);
    let expected_bfs = if count.is_zero() {
        ExactRat::zero()
    } else {
        ExactRat::new(b.clone(), count.clone())
    };
    ExactRow {
        n,
        level,
        total_d: total_d(n, level).to_string(),
        total_b: b.to_string(),
        total_d_trunc: total_d_trunc(n, level).to_string(),
        level_count: count.to_string(),
        expected_dfs: rat_string(&expected_dfs(n, level)),
        expected_bfs: rat_string(&expected_bfs),
    }
}

/// Printed polynomials for the truncation difference at odd levels `2l-1`,
/// highest degree first, for `l = 1..=5`.
pub const ODD_LEVEL_TABLE: [&[i64]; 5] = [
    &[1],
    &[3, 4, 37],
    &[5, 20, 837, 988, 6646],
    &[7, 56, 5222, 16456, 446751, 499008, 2946420],
    &[
        9, 120, 19614, 115968, 6593985, 18449640, 411932616, 445776672, 2451690576,
    ],
];

/// Printed polynomials for even levels `2l`, highest degree first.
pub const EVEN_LEVEL_TABLE: [&[i64]; 5] = [
    &[1],
    &[2, 4, 114],
    &[3, 16, 113, 1792, 36312],
    &[4, 40, 5272, 20824, 947764, 1334176, 23465040],
    &[
        5,
        80,
        16922,
        120272,
        9620645,
        32459360,
        1207925628,
        1584695808,
        25795264320,
    ],
];

/// How the shifted factorial of the denominator is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorialReading {
    Rising,
    Falling,
}

impl FactorialReading {
    pub const ALL: [FactorialReading; 2] = [FactorialReading::Rising, FactorialReading::Falling];

    fn apply(self, x: i64, k: u64) -> ExactInt {
        match self {
            FactorialReading::Rising => rising_factorial(x, k),
            FactorialReading::Falling => falling_factorial(x, k),
        }
    }
}

/// Which of the two level families a table row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// The level the row describes.
    pub fn level(self, l: u64) -> u64 {
        match self {
            Parity::Odd => 2 * l - 1,
            Parity::Even => 2 * l,
        }
    }

    pub fn table(self, l: u64) -> &'static [i64] {
        match self {
            Parity::Odd => ODD_LEVEL_TABLE[l as usize - 1],
            Parity::Even => EVEN_LEVEL_TABLE[l as usize - 1],
        }
    }

    fn shift(self, l: u64) -> i64 {
        match self {
            Parity::Odd => 2 * ni(l) + 2,
            Parity::Even => 2 * ni(l) + 4,
        }
    }

    /// The binomial factor at `n`.
    fn binomial(self, n: u64, l: u64) -> ExactInt {
        let (n, l) = (ni(n), ni(l));
        match self {
            Parity::Odd => choose(2 * n, n - 2 * l - 1),
            Parity::Even => choose(2 * n + 1, n - 2 * l - 2),
        }
    }

    /// The polynomial value the difference implies at `n` under a reading,
    /// or `None` when the binomial factor vanishes.
    fn implied_value(self, n: u64, l: u64, reading: FactorialReading) -> Option<ExactRat> {
        let binomial = self.binomial(n, l);
        if binomial.is_zero() {
            return None;
        }
        let denom = reading.apply(ni(n) + self.shift(l), 2 * l - 2);
        Some(ExactRat::new(trunc_difference(n, self.level(l)) * denom, binomial))
    }
}

fn eval_poly(coeffs_high_first: &[i64], x: i64) -> ExactInt {
    coeffs_high_first.iter().fold(BigInt::zero(), |acc, &c| acc * x + c)
}

/// Check at one `n`: `diff * shifted_factorial == poly(n) * binomial`.
fn table_holds(parity: Parity, n: u64, l: u64, reading: FactorialReading) -> bool {
    let level = parity.level(l);
    let lhs = trunc_difference(n, level) * reading.apply(ni(n) + parity.shift(l), 2 * l - 2);
    let rhs = eval_poly(parity.table(l), ni(n)) * parity.binomial(n, l);
    lhs == rhs
}

/// Outcome for one table row under one reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingResult {
    pub reading: FactorialReading,
    pub checked: u64,
    pub failures: Vec<u64>,
}

impl ReadingResult {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exact polynomial recovered from the computed differences, compared with
/// the printed one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interpolation {
    pub reading: FactorialReading,
    /// highest degree first, as `p/q` strings
    pub coefficients: Vec<String>,
    /// `(power of n, printed, recovered)` for each disagreeing coefficient
    pub mismatches: Vec<(u64, String, String)>,
    /// the recovered polynomial reproduces every checked `n`
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableCheck {
    pub parity: Parity,
    pub level: u64,
    pub readings: Vec<ReadingResult>,
    pub interpolations: Vec<Interpolation>,
}

impl TableCheck {
    /// The unique reading under which the printed polynomial holds at every
    /// checked `n`.
    pub fn reading(&self) -> Option<FactorialReading> {
        let holding: Vec<_> = self.readings.iter().filter(|r| r.holds()).collect();
        match holding.as_slice() {
            [one] => Some(one.reading),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub l: u64,
    pub n_from: u64,
    pub n_to: u64,
    pub odd: TableCheck,
    pub even: TableCheck,
}

impl ConjectureReport {
    /// The reading shared by both rows, when each row has exactly one.
    pub fn reading(&self) -> Option<FactorialReading> {
        match (self.odd.reading(), self.even.reading()) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    /// At `l = 1` the shifted factorial is an empty product, so both readings
    /// are the same formula and cannot be told apart.
    pub fn readings_coincide(&self) -> bool {
        self.l == 1
    }

    /// Both rows hold under one reading, or under every reading when the
    /// readings coincide.
    pub fn settled(&self) -> bool {
        if self.readings_coincide() {
            [&self.odd, &self.even]
                .iter()
                .all(|row| row.readings.iter().all(ReadingResult::holds))
        } else {
            self.reading().is_some()
        }
    }
}

/// Newton interpolation through `(x_i, y_i)`, returned in the monomial basis
/// with the constant term first.
fn interpolate(points: &[(i64, ExactRat)]) -> Vec<ExactRat> {
    let m = points.len();
    let mut table: Vec<ExactRat> = points.iter().map(|p| p.1.clone()).collect();
    for order in 1..m {
        for i in (order..m).rev() {
            let dx = points[i].0 - points[i - order].0;
            table[i] = (&table[i] - &table[i - 1]) / ExactRat::from_integer(dx.into());
        }
    }
    // Horner expansion of the Newton form
    let mut poly = vec![ExactRat::zero(); m];
    for i in (0..m).rev() {
        // poly = poly * (x - x_i) + table[i]
        let xi = ExactRat::from_integer(points[i].0.into());
        let mut next = vec![ExactRat::zero(); m];
        for d in 0..m {
            if poly[d].is_zero() {
                continue;
            }
            if d + 1 < m {
                next[d + 1] += &poly[d];
            }
            next[d] -= &poly[d] * &xi;
        }
        next[0] += &table[i];
        poly = next;
    }
    poly
}

fn check_row(parity: Parity, l: u64, n_from: u64, n_to: u64) -> TableCheck {
    let level = parity.level(l);
    let ns: Vec<u64> = (n_from.max(level).max(1)..=n_to).collect();
    let readings = FactorialReading::ALL
        .iter()
        .map(|&reading| ReadingResult {
            reading,
            checked: ns.len() as u64,
            failures: ns
                .iter()
                .copied()
                .filter(|&n| !table_holds(parity, n, l, reading))
                .collect(),
        })
        .collect();
    let printed = parity.table(l);
    let degree = printed.len() - 1;
    let interpolations = FactorialReading::ALL
        .iter()
        .filter_map(|&reading| {
            let usable: Vec<(i64, ExactRat)> = ns
                .iter()
                .filter_map(|&n| parity.implied_value(n, l, reading).map(|v| (ni(n), v)))
                .collect();
            if usable.len() <= degree {
                return None;
            }
            let poly = interpolate(&usable[..=degree]);
            let consistent = usable[degree + 1..].iter().all(|(x, y)| {
                let mut acc = ExactRat::zero();
                for c in poly.iter().rev() {
                    acc = acc * ExactRat::from_integer((*x).into()) + c;
                }
                acc == *y
            });
            let mut mismatches = Vec::new();
            for (power, recovered) in poly.iter().enumerate() {
                let printed_coeff = printed[degree - power];
                if *recovered != ExactRat::from_integer(printed_coeff.into()) {
                    mismatches.push((power as u64, printed_coeff.to_string(), rat_string(recovered)));
                }
            }
            Some(Interpolation {
                reading,
                coefficients: poly.iter().rev().map(rat_string).collect(),
                mismatches,
                consistent,
            })
        })
        .collect();
    TableCheck {
        parity,
        level,
        readings,
        interpolations,
    }
}

/// Compare the computed truncation differences at levels `2l-1` and `2l`
/// with the printed polynomials over `n_from..=n_to`, under both readings of
/// the shifted factorial.
pub fn conjecture_check(l: u64, n_from: u64, n_to: u64) -> Result<ConjectureReport> {
    if !(1..=5).contains(&l) {
        return Err(Error::Domain(format!("tables cover l = 1..=5, got {l}")));
    }
    if n_from > n_to {
        return Err(Error::Domain(format!("empty range {n_from}..={n_to}")));
    }
    Ok(ConjectureReport {
        l,
        n_from,
        n_to,
        odd: check_row(Parity::Odd, l, n_from, n_to),
        even: check_row(Parity::Even, l, n_from, n_to),
    })
}

/// Number of nonzero coefficients in a printed table row; used to sanity
/// check the degree claim `2l - 2`.
pub fn table_degree(parity: Parity, l: u64) -> usize {
    parity.table(l).len() - 1
}
