//! Exhaustive enumeration of ordered trees with `n` edges.
//!
//! Trees are enumerated through their Dyck words in lexicographic order
//! (`U < D`). The word space can be cut into prefix classes; each class is a
//! contiguous lexicographic range, so classes can be processed in parallel and
//! concatenated back in order.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::tree::{score_tree, tree_from_dyck, DyckWord, Step};
use crate::{Error, ExactInt, ExactRat, Result};

/// Largest `n` accepted by the exhaustive oracles (about 2.7 million trees).
pub const MAX_EXHAUSTIVE_N: u64 = 14;
/// Largest `n` accepted by the quadratic pair-counting oracle.
pub const MAX_PAIR_N: u64 = 12;

/// Lexicographic stream of the Dyck words of semilength `n` that start with a
/// fixed prefix.
#[derive(Debug, Clone)]
pub struct DyckIter {
    n: usize,
    fixed: usize,
    current: Option<Vec<Step>>,
}

impl DyckIter {
    pub fn new(n: u64) -> Self {
        Self::with_prefix(n, &[])
    }

    /// Words extending `prefix`. An invalid or uncompletable prefix yields an
    /// empty stream.
    pub fn with_prefix(n: u64, prefix: &[Step]) -> Self {
        let n = n as usize;
        let (mut ups, mut downs) = (0usize, 0usize);
        let mut valid = prefix.len() <= 2 * n;
        for s in prefix {
            match s {
                Step::Up => ups += 1,
                Step::Down => downs += 1,
            }
            if downs > ups || ups > n {
                valid = false;
            }
        }
        let current = valid.then(|| {
            let mut w = prefix.to_vec();
            w.extend(std::iter::repeat_n(Step::Up, n - ups));
            w.extend(std::iter::repeat_n(Step::Down, n - downs));
            w
        });
        Self {
            n,
            fixed: prefix.len(),
            current,
        }
    }

    /// Advance `w` to its lexicographic successor among words sharing the
    /// first `fixed` steps. Returns false when `w` is the last one.
    fn advance(w: &mut [Step], n: usize, fixed: usize) -> bool {
        // height before each position, scanning from the right
        let mut ups_after = 0usize;
        let mut downs_after = 0usize;
        let total = w.len();
        for i in (fixed..total).rev() {
            let ups_before = n - ups_after - usize::from(w[i] == Step::Up);
            let downs_before = n - downs_after - usize::from(w[i] == Step::Down);
            if w[i] == Step::Up && ups_before > downs_before {
                // turn this U into D and complete with the smallest suffix
                w[i] = Step::Down;
                let ups_left = n - ups_before;
                for s in w[i + 1..i + 1 + ups_left].iter_mut() {
                    *s = Step::Up;
                }
                for s in w[i + 1 + ups_left..].iter_mut() {
                    *s = Step::Down;
                }
                return true;
            }
            match w[i] {
                Step::Up => ups_after += 1,
                Step::Down => downs_after += 1,
            }
        }
        false
    }
}

impl Iterator for DyckIter {
    type Item = DyckWord;

    fn next(&mut self) -> Option<DyckWord> {
        let w = self.current.as_mut()?;
        let out = DyckWord::from_steps_unchecked(w.clone());
        if !Self::advance(w, self.n, self.fixed) {
            self.current = None;
        }
        Some(out)
    }
}

pub fn iterate_dyck(n: u64) -> DyckIter {
    DyckIter::new(n)
}

/// All completable prefixes of length `min(len, 2n)`, in lexicographic order.
/// The word space is the disjoint union of their ranges.
pub fn dyck_prefixes(n: u64, len: usize) -> Vec<Vec<Step>> {
    let n = n as usize;
    let len = len.min(2 * n);
    let mut out = Vec::new();
    let mut stack = vec![(Vec::with_capacity(len), 0usize, 0usize)];
    while let Some((p, ups, downs)) = stack.pop() {
        if p.len() == len {
            out.push(p);
            continue;
        }
        // push D first so U is popped (and emitted) first
        if downs < ups {
            let mut q = p.clone();
            q.push(Step::Down);
            stack.push((q, ups, downs + 1));
        }
        if ups < n {
            let mut q = p;
            q.push(Step::Up);
            stack.push((q, ups + 1, downs));
        }
    }
    out
}

/// Prefix length giving a few hundred work units for moderate `n`.
fn split_len(n: u64) -> usize {
    (n as usize).min(8)
}

fn check_size(n: u64, max: u64) -> Result<()> {
    if n > max {
        Err(Error::TooLarge { n, max })
    } else {
        Ok(())
    }
}

/// Brute-force totals at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTotals {
    pub total_d: ExactInt,
    pub total_b: ExactInt,
    pub total_d_trunc: ExactInt,
    pub level_count: ExactInt,
}

/// Every exhaustive sum at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSums {
    pub totals: OracleTotals,
    /// `sum_T v_T(l)`
    pub v_sum: ExactInt,
    /// `sum_T C(v_T(l), 2)`
    pub v_pairs: ExactInt,
    /// `sum_T (m - 1)(n - k - m)`, with `m` nodes at the level and `k` non-root
    /// nodes above it
    pub pair_weight: ExactInt,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    d: Vec<u128>,
    b: Vec<u128>,
    trunc: Vec<u128>,
    count: Vec<u128>,
    v: Vec<u128>,
    v2: Vec<u128>,
    pw: Vec<i128>,
}

impl Acc {
    fn new(levels: usize) -> Self {
        Self {
            d: vec![0; levels],
            b: vec![0; levels],
            trunc: vec![0; levels],
            count: vec![0; levels],
            v: vec![0; levels],
            v2: vec![0; levels],
            pw: vec![0; levels],
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        fn add<T: std::ops::AddAssign + Copy>(a: &mut [T], b: &[T]) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        add(&mut self.d, &other.d);
        add(&mut self.b, &other.b);
        add(&mut self.trunc, &other.trunc);
        add(&mut self.count, &other.count);
        add(&mut self.v, &other.v);
        add(&mut self.v2, &other.v2);
        add(&mut self.pw, &other.pw);
        self
    }

    fn absorb(&mut self, word: &DyckWord, n: usize) {
        let tree = tree_from_dyck(word);
        let scores = score_tree(&tree, n as u64);
        let levels = n + 1;
        // nodes are numbered in preorder by tree_from_dyck
        let mut seen_at = vec![0u128; levels];
        let mut h = vec![0u128; levels];
        for v in 0..tree.node_count() {
            let l = scores.level[v] as usize;
            let trunc: u128 = seen_at[..=l].iter().sum();
            seen_at[l] += 1;
            h[l] += 1;
            self.d[l] += u128::from(scores.dfs[v]);
            self.b[l] += u128::from(scores.bfs[v]);
            self.trunc[l] += trunc;
            self.count[l] += 1;
        }
        let nodes = (n + 1) as u128;
        let mut above = 0u128;
        for (l, &width) in h.iter().enumerate().take(levels) {
            let tail = nodes - above;
            self.v[l] += tail;
            self.v2[l] += tail * tail.saturating_sub(1) / 2;
            let m = width as i128;
            let k = above.saturating_sub(1) as i128;
            self.pw[l] += (m - 1) * (n as i128 - k - m);
            above += width;
        }
    }
}

fn run_parallel<T, F, M>(n: u64, init: impl Fn() -> T + Sync, absorb: F, merge: M) -> T
where
    T: Send,
    F: Fn(&mut T, &DyckWord) + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let parts = dyck_prefixes(n, split_len(n));
    let partials: Vec<T> = parts
        .par_iter()
        .map(|p| {
            let mut acc = init();
            for w in DyckIter::with_prefix(n, p) {
                absorb(&mut acc, &w);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(init(), merge)
}

fn big(x: u128) -> BigInt {
    BigInt::from(x)
}

/// Every exhaustive sum at every level `0..=n`.
pub fn oracle_table(n: u64) -> Result<Vec<LevelSums>> {
    check_size(n, MAX_EXHAUSTIVE_N)?;
    let levels = n as usize + 1;
    let acc = run_parallel(n, || Acc::new(levels), |a, w| a.absorb(w, n as usize), Acc::merge);
    Ok((0..levels)
        .map(|l| LevelSums {
            totals: OracleTotals {
                total_d: big(acc.d[l]),
                total_b: big(acc.b[l]),
                total_d_trunc: big(acc.trunc[l]),
                level_count: big(acc.count[l]),
            },
            v_sum: big(acc.v[l]),
            v_pairs: big(acc.v2[l]),
            pair_weight: BigInt::from(acc.pw[l]),
        })
        .collect())
}

/// Same as [`oracle_table`] but on the calling thread only, walking the words
/// in one sequential pass.
pub fn oracle_table_sequential(n: u64) -> Result<Vec<LevelSums>> {
    check_size(n, MAX_EXHAUSTIVE_N)?;
    let levels = n as usize + 1;
    let mut acc = Acc::new(levels);
    for w in iterate_dyck(n) {
        acc.absorb(&w, n as usize);
    }
    Ok((0..levels)
        .map(|l| LevelSums {
            totals: OracleTotals {
                total_d: big(acc.d[l]),
                total_b: big(acc.b[l]),
                total_d_trunc: big(acc.trunc[l]),
                level_count: big(acc.count[l]),
            },
            v_sum: big(acc.v[l]),
            v_pairs: big(acc.v2[l]),
            pair_weight: BigInt::from(acc.pw[l]),
        })
        .collect())
}

fn level_in_range(n: u64, level: u64) -> Result<()> {
    if level > n {
        Err(Error::Domain(format!("level {level} exceeds n = {n}")))
    } else {
        Ok(())
    }
}

pub fn oracle_totals(n: u64, level: u64) -> Result<OracleTotals> {
    level_in_range(n, level)?;
    Ok(oracle_table(n)?.swap_remove(level as usize).totals)
}

/// `sum_T v_T(l)` for order 1, `sum_T C(v_T(l), 2)` for order 2.
pub fn oracle_moment_v(n: u64, level: u64, order: u8) -> Result<ExactInt> {
    level_in_range(n, level)?;
    let row = oracle_table(n)?.swap_remove(level as usize);
    match order {
        1 => Ok(row.v_sum),
        2 => Ok(row.v_pairs),
        other => Err(Error::Domain(format!("moment order {other} is not 1 or 2"))),
    }
}

/// `sum_T x0^k(T) y0^m(T)`, where `k` counts non-root nodes above the level
/// and `m` the nodes on it.
pub fn oracle_xy_sum(n: u64, level: u64, x0: &ExactRat, y0: &ExactRat) -> Result<ExactRat> {
    check_size(n, MAX_EXHAUSTIVE_N)?;
    let size = n as usize + 2;
    let l = level as usize;
    // histogram[k][m]
    let hist = run_parallel(
        n,
        || vec![0u128; size * size],
        |hist, w| {
            let (mut k, mut m, mut depth) = (0usize, 0usize, 0usize);
            if l == 0 {
                m = 1;
            }
            for s in w.steps() {
                match s {
                    Step::Up => {
                        depth += 1;
                        if depth < l {
                            k += 1;
                        } else if depth == l {
                            m += 1;
                        }
                    }
                    Step::Down => depth -= 1,
                }
            }
            hist[k * size + m] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += *y;
            }
            a
        },
    );
    let mut total = ExactRat::zero();
    for k in 0..size {
        for m in 0..size {
            let c = hist[k * size + m];
            if c > 0 {
                total += ExactRat::from_integer(big(c)) * pow(x0, k) * pow(y0, m);
            }
        }
    }
    Ok(total)
}

fn pow(x: &ExactRat, e: usize) -> ExactRat {
    (0..e).fold(ExactRat::one(), |acc, _| acc * x)
}

/// Count pairs `(x, y)` over all trees with `x` on the level, `y` strictly
/// deeper, `y` visited before `x` by depth-first search, and `y` not a
/// descendant of `x`.
pub fn oracle_trunc_diff_pairs(n: u64, level: u64) -> Result<ExactInt> {
    check_size(n, MAX_PAIR_N)?;
    let total = run_parallel(
        n,
        || 0u128,
        |acc, w| {
            let tree = tree_from_dyck(w);
            let s = score_tree(&tree, level);
            let count = tree.node_count();
            for x in 0..count {
                if u64::from(s.level[x]) != level {
                    continue;
                }
                let (lo, hi) = (s.dfs[x], s.dfs[x] + s.descendants[x]);
                for y in 0..count {
                    let deeper = u64::from(s.level[y]) > level;
                    let before = s.dfs[y] < s.dfs[x];
                    let descendant = s.dfs[y] > lo && s.dfs[y] <= hi;
                    if deeper && before && !descendant {
                        *acc += 1;
                    }
                }
            }
        },
        |a, b| a + b,
    );
    Ok(big(total))
}

/// One CSV row of the exhaustive dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRow {
    pub n: u64,
    pub level: u64,
    pub total_d: String,
    pub total_b: String,
    pub total_d_trunc: String,
    pub level_count: String,
}

pub fn oracle_rows(max_n: u64) -> Result<Vec<OracleRow>> {
    check_size(max_n, MAX_EXHAUSTIVE_N)?;
    let mut rows = Vec::new();
    for n in 0..=max_n {
        for (l, sums) in oracle_table(n)?.into_iter().enumerate() {
            let t = sums.totals;
            rows.push(OracleRow {
                n,
                level: l as u64,
                total_d: t.total_d.to_string(),
                total_b: t.total_b.to_string(),
                total_d_trunc: t.total_d_trunc.to_string(),
                level_count: t.level_count.to_string(),
            });
        }
    }
    Ok(rows)
}

/// `(m - 1)(n - k - m) / 2` summed over all trees, which the pair oracle must
/// reproduce.
pub fn half_pair_weight(n: u64, level: u64) -> Result<ExactRat> {
    level_in_range(n, level)?;
    let row = oracle_table(n)?.swap_remove(level as usize);
    Ok(ExactRat::new(row.pair_weight, 2.into()))
}
