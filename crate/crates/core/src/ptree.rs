//! Finite filtered probability spaces encoded as rooted trees.
//!
//! Level `n` of the tree is the partition generating the sigma-algebra `G_n`;
//! each edge carries a conditional probability and the martingale increment
//! `d_n` realised on that branch. The root carries `M_0 = d_0`. All norms are
//! computed by exhaustive enumeration of the nodes at the requested level, which
//! is the same as enumerating the paths truncated at that level.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::{norm_pow, norm_sq, pairwise_sum, pow_nonneg};

/// Largest number of root-to-leaf paths accepted for exact enumeration.
pub const MAX_PATHS: usize = 10_000_000;

/// Absolute tolerance on probability sums and conditional means.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Moment exponent `p ∈ [2, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(try_from = "f64", into = "f64"))]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 2.0 {
            Ok(Self(p))
        } else {
            Err(Error::Exponent(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Recursive tree description, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf,
    Internal(Vec<Branch>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub prob: f64,
    pub incr: Vec<f64>,
    pub node: TreeNode,
}

impl TreeNode {
    pub fn internal(branches: impl IntoIterator<Item = Branch>) -> Self {
        Self::Internal(branches.into_iter().collect())
    }

    fn leaf_depths(&self, level: usize, out: &mut (usize, usize)) {
        match self {
            TreeNode::Leaf => {
                out.0 = out.0.min(level);
                out.1 = out.1.max(level);
            }
            TreeNode::Internal(children) => {
                for b in children {
                    b.node.leaf_depths(level + 1, out);
                }
            }
        }
    }

    fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf => 1,
            TreeNode::Internal(children) => {
                children.iter().map(|b| b.node.leaf_count()).fold(0usize, usize::saturating_add)
            }
        }
    }

    /// Extends every shallow leaf with a chain of probability-one,
    /// zero-increment branches down to `depth`.
    fn padded(&self, level: usize, depth: usize, dim: usize) -> TreeNode {
        match self {
            TreeNode::Leaf if level < depth => TreeNode::Internal(vec![Branch {
                prob: 1.0,
                incr: vec![0.0; dim],
                node: TreeNode::Leaf.padded(level + 1, depth, dim),
            }]),
            TreeNode::Leaf => TreeNode::Leaf,
            TreeNode::Internal(children) => TreeNode::Internal(
                children
                    .iter()
                    .map(|b| Branch { prob: b.prob, incr: b.incr.clone(), node: b.node.padded(level + 1, depth, dim) })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ViolationKind {
    ProbabilitySum,
    Martingale,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    /// Node path from the root, e.g. `root/1/0`.
    pub node: String,
    pub kind: ViolationKind,
    pub residual: f64,
}

/// Result of checking the probability and martingale invariants.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let what = match v.kind {
                ViolationKind::ProbabilitySum => "probability sum",
                ViolationKind::Martingale => "martingale",
            };
            write!(f, "{what} violation at {} (residual {:e})", v.node, v.residual)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Node {
    parent: usize,
    children: Range<usize>,
    cond_prob: f64,
    path_prob: f64,
    /// `max_{ν ≤ level} ‖M_ν‖²` along the path to this node.
    sup_sq: f64,
    /// `Σ_{k ≤ level} ‖d_k‖²` along the path to this node.
    quad_sum: f64,
}

/// Values of the martingale on one level of the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProcess {
    pub level: usize,
    pub dim: usize,
    /// Path probability of each node on the level.
    pub probs: Vec<f64>,
    /// `M_level` at each node, `dim` entries per node.
    pub values: Vec<f64>,
}

impl LevelProcess {
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.probs.iter().copied().zip(self.values.chunks_exact(self.dim))
    }
}

/// A finite filtered probability space carrying an `R^d`-valued process.
///
/// Construction guarantees the structural invariants (uniform depth, matching
/// dimensions, probabilities in `]0, 1]`, path cap); the probabilistic
/// invariants are checked once and reported by [`ProbTree::validate`].
#[derive(Debug, Clone)]
pub struct ProbTree {
    dim: usize,
    depth: usize,
    nodes: Vec<Node>,
    /// Increment on the edge into each node; the root holds `M_0`.
    increments: Vec<f64>,
    /// `M_level` at each node.
    values: Vec<f64>,
    levels: Vec<Range<usize>>,
    validation: Validation,
}

impl ProbTree {
    /// Builds a tree whose leaves must all sit at the same depth.
    pub fn new(dim: usize, m0: Vec<f64>, root: TreeNode) -> Result<Self> {
        let mut span = (usize::MAX, 0);
        root.leaf_depths(0, &mut span);
        if span.0 != span.1 {
            return Err(Error::Structure(format!(
                "leaves at depths {} and {}; uniform depth required",
                span.0, span.1
            )));
        }
        Self::build(dim, m0, &root)
    }

    /// Builds a tree, padding shallow leaves with zero increments.
    pub fn new_padded(dim: usize, m0: Vec<f64>, root: TreeNode) -> Result<Self> {
        let mut span = (usize::MAX, 0);
        root.leaf_depths(0, &mut span);
        if span.0 == span.1 {
            return Self::build(dim, m0, &root);
        }
        check_leaf_cap(&root)?;
        Self::build(dim, m0, &root.padded(0, span.1, dim))
    }

    fn build(dim: usize, m0: Vec<f64>, root: &TreeNode) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structure("dimension must be at least 1".into()));
        }
        if m0.len() != dim {
            return Err(Error::Structure(format!("M0 has {} entries, dimension is {dim}", m0.len())));
        }
        if m0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Structure("M0 has non-finite entries".into()));
        }
        check_leaf_cap(root)?;

        let m0_sq = norm_sq(&m0);
        let mut nodes = vec![Node {
            parent: usize::MAX,
            children: 0..0,
            cond_prob: 1.0,
            path_prob: 1.0,
            sup_sq: m0_sq,
            quad_sum: m0_sq,
        }];
        let mut increments = m0.clone();
        let mut values = m0;
        let mut levels = alloc::vec::Vec::new();
        levels.push(0..1);
        let mut queue: VecDeque<(usize, &TreeNode)> = VecDeque::from([(0usize, root)]);
        let mut level_of = vec![0usize];

        while let Some((idx, tnode)) = queue.pop_front() {
            let TreeNode::Internal(children) = tnode else {
                continue;
            };
            if children.is_empty() {
                return Err(Error::Structure(format!("internal node {} has no children", path_of(&nodes, idx))));
            }
            let level = level_of[idx] + 1;
            let start = nodes.len();
            for (ci, b) in children.iter().enumerate() {
                if !(b.prob > 0.0 && b.prob <= 1.0) {
                    return Err(Error::Structure(format!(
                        "branch {}/{ci} has probability {} outside ]0, 1]",
                        path_of(&nodes, idx),
                        b.prob
                    )));
                }
                if b.incr.len() != dim {
                    return Err(Error::Structure(format!(
                        "branch {}/{ci} has increment of length {}, dimension is {dim}",
                        path_of(&nodes, idx),
                        b.incr.len()
                    )));
                }
                if b.incr.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Structure(format!(
                        "branch {}/{ci} has non-finite increment",
                        path_of(&nodes, idx)
                    )));
                }
                let parent = &nodes[idx];
                let base = idx * dim;
                let value: Vec<f64> = (0..dim).map(|i| values[base + i] + b.incr[i]).collect();
                let node = Node {
                    parent: idx,
                    children: 0..0,
                    cond_prob: b.prob,
                    path_prob: parent.path_prob * b.prob,
                    sup_sq: parent.sup_sq.max(norm_sq(&value)),
                    quad_sum: parent.quad_sum + norm_sq(&b.incr),
                };
                nodes.push(node);
                increments.extend_from_slice(&b.incr);
                values.extend_from_slice(&value);
                level_of.push(level);
                queue.push_back((nodes.len() - 1, &b.node));
            }
            let end = nodes.len();
            nodes[idx].children = start..end;
            if levels.len() <= level {
                levels.push(start..end);
            } else {
                levels[level].end = end;
            }
        }

        let mut tree =
            Self { dim, depth: levels.len() - 1, nodes, increments, values, levels, validation: Validation::default() };
        tree.validation = tree.check_invariants();
        Ok(tree)
    }

    fn check_invariants(&self) -> Validation {
        let mut violations = Vec::new();
        let mut mean = vec![0.0; self.dim];
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                continue;
            }
            let prob_sum: f64 = self.nodes[node.children.clone()].iter().map(|c| c.cond_prob).sum();
            let residual = (prob_sum - 1.0).abs();
            if residual > VALIDATION_TOL {
                violations.push(Violation {
                    node: path_of(&self.nodes, idx),
                    kind: ViolationKind::ProbabilitySum,
                    residual,
                });
            }
            mean.iter_mut().for_each(|m| *m = 0.0);
            for c in node.children.clone() {
                let w = self.nodes[c].cond_prob;
                for (m, x) in mean.iter_mut().zip(self.increment(c)) {
                    *m += w * x;
                }
            }
            let residual = libm::sqrt(norm_sq(&mean));
            if residual > VALIDATION_TOL {
                violations.push(Violation {
                    node: path_of(&self.nodes, idx),
                    kind: ViolationKind::Martingale,
                    residual,
                });
            }
        }
        Validation { violations }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `N`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn m0(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn path_count(&self) -> usize {
        self.levels[self.depth].len()
    }

    pub fn validate(&self) -> Validation {
        self.validation.clone()
    }

    pub fn is_valid(&self) -> bool {
        self.validation.is_ok()
    }

    fn increment(&self, idx: usize) -> &[f64] {
        &self.increments[idx * self.dim..(idx + 1) * self.dim]
    }

    fn value(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    fn level(&self, n: usize) -> Result<Range<usize>> {
        if !self.validation.is_ok() {
            return Err(Error::InvalidTree(self.validation.clone()));
        }
        self.levels.get(n).cloned().ok_or(Error::Level { level: n, depth: self.depth })
    }

    fn expect_level<F>(&self, n: usize, f: F) -> Result<f64>
    where
        F: Fn(usize) -> f64,
    {
        let range = self.level(n)?;
        let terms: Vec<f64> = range.map(|i| self.nodes[i].path_prob * f(i)).collect();
        Ok(pairwise_sum(&terms))
    }

    /// The martingale at level `n` as a finite distribution.
    pub fn level_process(&self, n: usize) -> Result<LevelProcess> {
        let range = self.level(n)?;
        Ok(LevelProcess {
            level: n,
            dim: self.dim,
            probs: range.clone().map(|i| self.nodes[i].path_prob).collect(),
            values: range.flat_map(|i| self.value(i).iter().copied()).collect(),
        })
    }

    /// `‖M_n‖²_{L^p}`.
    pub fn lp_norm_sq(&self, n: usize, p: Exponent) -> Result<f64> {
        let p = p.get();
        let moment = self.expect_level(n, |i| norm_pow(self.value(i), p))?;
        Ok(pow_nonneg(moment, 2.0 / p))
    }

    /// `‖M_n‖_{L^p}`.
    pub fn lp_norm(&self, n: usize, p: Exponent) -> Result<f64> {
        let p = p.get();
        let moment = self.expect_level(n, |i| norm_pow(self.value(i), p))?;
        Ok(pow_nonneg(moment, 1.0 / p))
    }

    /// `‖ sup_{ν ≤ n} ‖M_ν‖ ‖²_{L^p}`.
    pub fn sup_lp_norm_sq(&self, n: usize, p: Exponent) -> Result<f64> {
        let p = p.get();
        let moment = self.expect_level(n, |i| pow_nonneg(self.nodes[i].sup_sq, p / 2.0))?;
        Ok(pow_nonneg(moment, 2.0 / p))
    }

    /// `‖ sup_{ν ≤ n} ‖M_ν‖ ‖_{L^p}`.
    pub fn sup_lp_norm(&self, n: usize, p: Exponent) -> Result<f64> {
        let p = p.get();
        let moment = self.expect_level(n, |i| pow_nonneg(self.nodes[i].sup_sq, p / 2.0))?;
        Ok(pow_nonneg(moment, 1.0 / p))
    }

    /// `‖ Σ_{k=0}^n ‖d_k‖² ‖_{L^{p/2}}`, with `d_0 = M_0`.
    pub fn quadratic_sum_norm(&self, n: usize, p: Exponent) -> Result<f64> {
        let q = p.get() / 2.0;
        let moment = self.expect_level(n, |i| pow_nonneg(self.nodes[i].quad_sum, q))?;
        Ok(pow_nonneg(moment, 1.0 / q))
    }

    /// `‖d_k‖²_{L^p}` for a single level `k` (`k = 0` gives `‖M_0‖²`).
    pub fn increment_lp_norm_sq(&self, k: usize, p: Exponent) -> Result<f64> {
        let p = p.get();
        let moment = self.expect_level(k, |i| norm_pow(self.increment(i), p))?;
        Ok(pow_nonneg(moment, 2.0 / p))
    }

    /// `Σ_{k=0}^n ‖d_k‖²_{L^p}`.
    pub fn increment_lp_sum(&self, n: usize, p: Exponent) -> Result<f64> {
        self.level(n)?;
        (0..=n).map(|k| self.increment_lp_norm_sq(k, p)).sum()
    }

    /// Rebuilds the recursive description of the tree.
    pub fn to_node(&self) -> TreeNode {
        self.node_at(0)
    }

    fn node_at(&self, idx: usize) -> TreeNode {
        let children = self.nodes[idx].children.clone();
        if children.is_empty() {
            return TreeNode::Leaf;
        }
        TreeNode::Internal(
            children
                .map(|c| Branch {
                    prob: self.nodes[c].cond_prob,
                    incr: self.increment(c).to_vec(),
                    node: self.node_at(c),
                })
                .collect(),
        )
    }

    /// Same filtration and probabilities with `M_0` and all increments scaled.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        fn scale(node: &TreeNode, factor: f64) -> TreeNode {
            match node {
                TreeNode::Leaf => TreeNode::Leaf,
                TreeNode::Internal(children) => TreeNode::Internal(
                    children
                        .iter()
                        .map(|b| Branch {
                            prob: b.prob,
                            incr: b.incr.iter().map(|x| x * factor).collect(),
                            node: scale(&b.node, factor),
                        })
                        .collect(),
                ),
            }
        }
        let m0 = self.m0().iter().map(|x| x * factor).collect();
        Self::build(self.dim, m0, &scale(&self.to_node(), factor))
    }
}

fn check_leaf_cap(root: &TreeNode) -> Result<()> {
    let leaves = root.leaf_count();
    if leaves > MAX_PATHS {
        return Err(Error::Structure(format!("{leaves} paths exceed the enumeration cap of {MAX_PATHS}")));
    }
    Ok(())
}

fn path_of(nodes: &[Node], mut idx: usize) -> String {
    let mut steps = Vec::new();
    while idx != 0 {
        let parent = nodes[idx].parent;
        steps.push(idx - nodes[parent].children.start);
        idx = parent;
    }
    let mut out = String::from("root");
    for s in steps.iter().rev() {
        out.push_str(&format!("/{s}"));
    }
    out
}

/// Shape of randomly generated martingale trees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTreeConfig {
    pub depth: usize,
    pub dim: usize,
    pub min_branching: usize,
    pub max_branching: usize,
}

impl Default for RandomTreeConfig {
    fn default() -> Self {
        Self { depth: 3, dim: 1, min_branching: 2, max_branching: 3 }
    }
}

/// Draws a valid martingale tree.
///
/// Branch weights are uniform on `[0.05, 1)` and normalized; raw increments
/// are uniform on `[-1, 1]^d` and the conditional mean is subtracted at every
/// node, which enforces the martingale property to roundoff.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomTreeConfig) -> Result<ProbTree> {
    if cfg.min_branching == 0 || cfg.min_branching > cfg.max_branching {
        return Err(Error::Config(format!("branching range {}..={} is empty", cfg.min_branching, cfg.max_branching)));
    }
    fn grow<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomTreeConfig, level: usize) -> TreeNode {
        if level == cfg.depth {
            return TreeNode::Leaf;
        }
        let k = rng.random_range(cfg.min_branching..=cfg.max_branching);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let raw: Vec<Vec<f64>> = (0..k).map(|_| (0..cfg.dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
        let children = centred_branches(&probs, raw)
            .into_iter()
            .map(|(prob, incr)| Branch { prob, incr, node: grow(rng, cfg, level + 1) })
            .collect();
        TreeNode::Internal(children)
    }
    let m0 = (0..cfg.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let root = grow(rng, cfg, 0);
    ProbTree::new(cfg.dim, m0, root)
}

/// Subtracts the probability-weighted mean from each raw increment.
pub(crate) fn centred_branches(probs: &[f64], mut raw: Vec<Vec<f64>>) -> Vec<(f64, Vec<f64>)> {
    let dim = raw.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for (w, v) in probs.iter().zip(&raw) {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += w * x;
        }
    }
    for v in &mut raw {
        for (x, m) in v.iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    probs.iter().copied().zip(raw).collect()
}
