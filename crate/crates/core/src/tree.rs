//! Ordered trees, their Dyck-word encoding, and the search traversals.
//!
//! A tree with `n` edges has `n + 1` nodes. Children are stored in a compact
//! offset table so that trees with millions of nodes stay cheap; every
//! traversal uses an explicit worklist.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// One step of a Dyck word. `Up < Down`, so the derived order on step
/// sequences is the lexicographic order with `U < D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Up,
    Down,
}

impl Step {
    pub fn as_char(self) -> char {
        match self {
            Step::Up => 'U',
            Step::Down => 'D',
        }
    }
}

/// A sequence of `2n` steps in which every prefix has at least as many
/// `Up` as `Down` steps, and the totals agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyckWord {
    steps: Vec<Step>,
}

impl DyckWord {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let mut height = 0i64;
        for (i, s) in steps.iter().enumerate() {
            height += match s {
                Step::Up => 1,
                Step::Down => -1,
            };
            if height < 0 {
                return Err(Error::InvalidDyck(format!(
                    "prefix of length {} dips below zero",
                    i + 1
                )));
            }
        }
        if height != 0 {
            return Err(Error::InvalidDyck(format!("ends at height {height}")));
        }
        Ok(Self { steps })
    }

    /// Caller guarantees validity.
    pub(crate) fn from_steps_unchecked(steps: Vec<Step>) -> Self {
        debug_assert!(Self::new(steps.clone()).is_ok());
        Self { steps }
    }

    pub fn empty() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn semilength(&self) -> u64 {
        self.steps.len() as u64 / 2
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }
}

impl fmt::Display for DyckWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for DyckWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .trim()
            .chars()
            .map(|c| match c {
                'U' => Ok(Step::Up),
                'D' => Ok(Step::Down),
                other => Err(Error::InvalidDyck(format!("unexpected symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        DyckWord::new(steps)
    }
}

/// A rooted tree whose children are linearly ordered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedTree {
    // children of v are child_list[offsets[v]..offsets[v + 1]]
    offsets: Vec<usize>,
    child_list: Vec<usize>,
    root: usize,
}

impl OrderedTree {
    /// Build from per-node child lists. The lists must describe a single tree
    /// rooted at `root` that covers every node exactly once.
    pub fn from_children(children: Vec<Vec<usize>>, root: usize) -> Result<Self> {
        let count = children.len();
        if root >= count {
            return Err(Error::InvalidTree(format!(
                "root {root} out of range for {count} nodes"
            )));
        }
        let mut seen = vec![false; count];
        seen[root] = true;
        let mut edges = 0usize;
        for (v, list) in children.iter().enumerate() {
            for &c in list {
                if c >= count {
                    return Err(Error::InvalidTree(format!("node {v} has out-of-range child {c}")));
                }
                if seen[c] {
                    return Err(Error::InvalidTree(format!(
                        "node {c} has more than one parent or is the root"
                    )));
                }
                seen[c] = true;
                edges += 1;
            }
        }
        if edges + 1 != count {
            return Err(Error::InvalidTree(format!("{count} nodes but {edges} edges")));
        }
        let tree = Self::from_children_unchecked(&children, root);
        // every node has one parent; reachability rules out detached cycles
        if tree.preorder().len() != count {
            return Err(Error::InvalidTree("not connected".into()));
        }
        Ok(tree)
    }

    fn from_children_unchecked(children: &[Vec<usize>], root: usize) -> Self {
        let mut offsets = Vec::with_capacity(children.len() + 1);
        let mut child_list = Vec::with_capacity(children.len().saturating_sub(1));
        offsets.push(0);
        for list in children {
            child_list.extend_from_slice(list);
            offsets.push(child_list.len());
        }
        Self {
            offsets,
            child_list,
            root,
        }
    }

    /// The path with `n` edges.
    pub fn path(n: usize) -> Self {
        let children = (0..=n)
            .map(|v| if v < n { vec![v + 1] } else { vec![] })
            .collect::<Vec<_>>();
        Self::from_children_unchecked(&children, 0)
    }

    /// The root with `n` leaf children.
    pub fn star(n: usize) -> Self {
        let mut children = vec![Vec::new(); n + 1];
        children[0] = (1..=n).collect();
        Self::from_children_unchecked(&children, 0)
    }

    /// Decode a preorder out-degree sequence (a Łukasiewicz word). The
    /// sequence must sum to `len - 1` and keep every proper prefix sum of
    /// `degree - 1` nonnegative.
    pub fn from_preorder_degrees(degrees: &[u32]) -> Result<Self> {
        let count = degrees.len();
        if count == 0 {
            return Err(Error::InvalidTree("empty degree sequence".into()));
        }
        let mut children = vec![Vec::new(); count];
        // (node, remaining child slots)
        let mut stack: Vec<(usize, u32)> = Vec::new();
        if degrees[0] > 0 {
            stack.push((0, degrees[0]));
        }
        for (v, &d) in degrees.iter().enumerate().skip(1) {
            let Some(top) = stack.last_mut() else {
                return Err(Error::InvalidTree(format!("node {v} has no open parent slot")));
            };
            children[top.0].push(v);
            top.1 -= 1;
            if top.1 == 0 {
                stack.pop();
            }
            if d > 0 {
                stack.push((v, d));
            }
        }
        if !stack.is_empty() {
            return Err(Error::InvalidTree("degree sequence leaves open child slots".into()));
        }
        Ok(Self::from_children_unchecked(&children, 0))
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> u64 {
        self.node_count() as u64 - 1
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.child_list[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn child_lists(&self) -> Vec<Vec<usize>> {
        (0..self.node_count()).map(|v| self.children(v).to_vec()).collect()
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.node_count()];
        for v in 0..self.node_count() {
            for &c in self.children(v) {
                parent[c] = Some(v);
            }
        }
        parent
    }

    /// Nodes in depth-first (pre-order) visiting order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children(v).iter().rev());
        }
        order
    }

    /// Nodes in breadth-first visiting order, children queued left to right.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut queue = VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            queue.extend(self.children(v));
        }
        order
    }

    pub fn levels(&self) -> Vec<u32> {
        let mut level = vec![0u32; self.node_count()];
        for v in self.bfs_order() {
            for &c in self.children(v) {
                level[c] = level[v] + 1;
            }
        }
        level
    }

    pub fn height(&self) -> u32 {
        self.levels().into_iter().max().unwrap_or(0)
    }

    /// Number of proper descendants of every node.
    pub fn descendant_counts(&self) -> Vec<u64> {
        let mut count = vec![0u64; self.node_count()];
        for &v in self.preorder().iter().rev() {
            count[v] = self.children(v).iter().map(|&c| count[c] + 1).sum();
        }
        count
    }

    pub fn to_dyck(&self) -> DyckWord {
        dyck_from_tree(self)
    }
}

/// Nodes are numbered in pre-order, so node `i` is the `i`th node a depth-first
/// search reaches.
pub fn tree_from_dyck(word: &DyckWord) -> OrderedTree {
    let n = word.semilength() as usize;
    let mut children = vec![Vec::new(); n + 1];
    let mut stack = vec![0usize];
    let mut next = 1usize;
    for step in word.steps() {
        match step {
            Step::Up => {
                let parent = *stack.last().expect("valid Dyck word keeps the root on the stack");
                children[parent].push(next);
                stack.push(next);
                next += 1;
            }
            Step::Down => {
                stack.pop();
            }
        }
    }
    OrderedTree::from_children_unchecked(&children, 0)
}

pub fn dyck_from_tree(tree: &OrderedTree) -> DyckWord {
    let mut steps = Vec::with_capacity(2 * tree.edge_count() as usize);
    // (node, index of next child to descend into)
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((v, next)) = stack.last_mut() {
        let kids = tree.children(*v);
        if *next < kids.len() {
            let c = kids[*next];
            *next += 1;
            steps.push(Step::Up);
            stack.push((c, 0));
        } else {
            stack.pop();
            if !stack.is_empty() {
                steps.push(Step::Down);
            }
        }
    }
    DyckWord::from_steps_unchecked(steps)
}

/// Reverse every child list. Node ids are preserved, so node `x` of the input
/// corresponds to node `x` of the output.
pub fn mirror(tree: &OrderedTree) -> OrderedTree {
    let mut child_list = tree.child_list.clone();
    for v in 0..tree.node_count() {
        child_list[tree.offsets[v]..tree.offsets[v + 1]].reverse();
    }
    OrderedTree {
        offsets: tree.offsets.clone(),
        child_list,
        root: tree.root,
    }
}

/// Per-node step counts of the three searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    pub level: Vec<u32>,
    pub bfs: Vec<u64>,
    pub dfs: Vec<u64>,
    /// Rank under depth-first search that skips nodes below the query level;
    /// `None` for those skipped nodes.
    pub trunc: Vec<Option<u64>>,
    pub descendants: Vec<u64>,
    query_level: u64,
}

impl ScoreTable {
    pub fn query_level(&self) -> u64 {
        self.query_level
    }

    /// Recompute the truncated scores for another query level, reusing the
    /// level-independent ones.
    pub fn retarget(&mut self, query_level: u64) {
        let mut by_dfs = vec![0usize; self.dfs.len()];
        for (v, &d) in self.dfs.iter().enumerate() {
            by_dfs[d as usize] = v;
        }
        let mut rank = 0u64;
        for v in by_dfs {
            self.trunc[v] = if u64::from(self.level[v]) <= query_level {
                rank += 1;
                Some(rank - 1)
            } else {
                None
            };
        }
        self.query_level = query_level;
    }
}

pub fn score_tree(tree: &OrderedTree, query_level: u64) -> ScoreTable {
    let count = tree.node_count();
    let level = tree.levels();
    let mut bfs = vec![0u64; count];
    for (rank, v) in tree.bfs_order().into_iter().enumerate() {
        bfs[v] = rank as u64;
    }
    let mut dfs = vec![0u64; count];
    for (rank, v) in tree.preorder().into_iter().enumerate() {
        dfs[v] = rank as u64;
    }
    let mut table = ScoreTable {
        level,
        bfs,
        dfs,
        trunc: vec![None; count],
        descendants: tree.descendant_counts(),
        query_level,
    };
    table.retarget(query_level);
    table
}

/// Level-by-level occupancy of one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    node_count: u64,
    /// nodes at each level
    pub h: Vec<u64>,
    /// nodes at levels `<= l`
    pub cumulative: Vec<u64>,
    /// nodes at levels `>= l`
    pub tail: Vec<u64>,
    /// sum of BFS scores at each level
    pub bfs_sum: Vec<u64>,
}

impl LevelProfile {
    /// Build from the per-level node counts alone; valid because BFS visits
    /// the levels in order, so level `l` holds the BFS ranks
    /// `H(l-1) .. H(l) - 1`.
    pub fn from_level_counts(h: Vec<u64>) -> Self {
        let node_count: u64 = h.iter().sum();
        let mut cumulative = Vec::with_capacity(h.len());
        let mut tail = Vec::with_capacity(h.len());
        let mut bfs_sum = Vec::with_capacity(h.len());
        let mut before = 0u64;
        for &count in &h {
            tail.push(node_count - before);
            bfs_sum.push(pairs(before + count) - pairs(before));
            before += count;
            cumulative.push(before);
        }
        Self {
            node_count,
            h,
            cumulative,
            tail,
            bfs_sum,
        }
    }

    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    /// `h(l)`; zero beyond the height.
    pub fn level_count(&self, level: u64) -> u64 {
        self.h.get(level as usize).copied().unwrap_or(0)
    }

    /// `H(l)`; `H(-1)` is written `cumulative_before(0)`.
    pub fn cumulative(&self, level: u64) -> u64 {
        self.cumulative.get(level as usize).copied().unwrap_or(self.node_count)
    }

    pub fn cumulative_before(&self, level: u64) -> u64 {
        if level == 0 {
            0
        } else {
            self.cumulative(level - 1)
        }
    }

    /// `v(l)`.
    pub fn tail(&self, level: u64) -> u64 {
        self.tail.get(level as usize).copied().unwrap_or(0)
    }

    /// `S(l)`.
    pub fn bfs_sum(&self, level: u64) -> u64 {
        self.bfs_sum.get(level as usize).copied().unwrap_or(0)
    }
}

fn pairs(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Profile from an already computed score table. The BFS sums are taken from
/// the scores themselves, not from the counting identity.
pub fn level_profile(tree: &OrderedTree, scores: &ScoreTable) -> LevelProfile {
    assert_eq!(
        scores.level.len(),
        tree.node_count(),
        "score table belongs to another tree"
    );
    let height = scores.level.iter().copied().max().unwrap_or(0) as usize;
    let mut h = vec![0u64; height + 1];
    let mut bfs_sum = vec![0u64; height + 1];
    for (v, &l) in scores.level.iter().enumerate() {
        h[l as usize] += 1;
        bfs_sum[l as usize] += scores.bfs[v];
    }
    let node_count = tree.node_count() as u64;
    let mut cumulative = Vec::with_capacity(h.len());
    let mut tail = Vec::with_capacity(h.len());
    let mut before = 0u64;
    for &count in &h {
        tail.push(node_count - before);
        before += count;
        cumulative.push(before);
    }
    LevelProfile {
        node_count,
        h,
        cumulative,
        tail,
        bfs_sum,
    }
}
