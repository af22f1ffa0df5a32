//! Extremal-ratio search.
//!
//! The sharpness witness for the one-step inequality is the symmetric
//! two-point perturbation `X ≡ a`, `Y = ±b`: as `b/a → 0` its gain
//! `(‖X+Y‖² - ‖X‖²)/‖Y‖²` tends to `p - 1`. The search driver explores this
//! and two further families (asymmetric two-point laws and fixed-topology
//! trees) and reports the largest ratio it finds against the proven constant.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ineq::{eval_discrete, InequalityId, RioAtom, RioPair, SATISFACTION_TOL};
use crate::nelder_mead::NelderMead;
use crate::ptree::{centred_branches, Branch, Exponent, ProbTree, TreeNode};
use crate::rng;

/// Gain of the symmetric two-point perturbation `X ≡ a`, `Y = ±b`.
pub fn rio_gain(a: f64, b: f64, p: Exponent) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Precondition(format!("rio_gain needs a, b > 0 (got {a}, {b})")));
    }
    let p = p.get();
    if p == 2.0 {
        // E(a+Y)² = a² + b² exactly.
        return Ok(1.0);
    }
    let u = b / a;
    let rel = if u < 1.0 {
        // E|1 + Y/a|^p - 1, free of the first-order cancellation.
        let inner = 0.5 * (libm::expm1(p * libm::log1p(u)) + libm::expm1(p * libm::log1p(-u)));
        libm::expm1(2.0 / p * libm::log1p(inner))
    } else {
        let inner = 0.5 * (libm::pow(1.0 + u, p) + libm::pow(u - 1.0, p));
        libm::pow(inner, 2.0 / p) - 1.0
    };
    Ok(rel / (u * u))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GainProbe {
    pub p: Exponent,
    pub b: Vec<f64>,
    pub gains: Vec<f64>,
    /// `p - 1`.
    pub limit: f64,
    /// `|gain(b_last) - (p-1)| ≤ 10·b_last`.
    pub within_envelope: bool,
}

/// Gains `rio_gain(1, b, p)` along a decreasing sequence of `b`.
pub fn asymptotic_gain_probe(p: Exponent, b_sequence: &[f64]) -> Result<GainProbe> {
    if b_sequence.is_empty() {
        return Err(Error::Precondition("empty b sequence".into()));
    }
    if b_sequence.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::Precondition("b values must lie in ]0, 1]".into()));
    }
    if b_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("b sequence must be strictly decreasing".into()));
    }
    let gains = b_sequence.iter().map(|&b| rio_gain(1.0, b, p)).collect::<Result<Vec<_>>>()?;
    let limit = p.get() - 1.0;
    let last = b_sequence[b_sequence.len() - 1];
    let within_envelope = (gains[gains.len() - 1] - limit).abs() <= 10.0 * last;
    Ok(GainProbe { p, b: b_sequence.to_vec(), gains, limit, within_envelope })
}

/// Closed search interval for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    /// Geometric spacing / log-uniform sampling.
    #[cfg_attr(feature = "serde", serde(default))]
    pub log: bool,
}

impl ParamRange {
    pub const fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v, log: false }
    }

    pub const fn linear(lo: f64, hi: f64) -> Self {
        Self { lo, hi, log: false }
    }

    pub const fn log(lo: f64, hi: f64) -> Self {
        Self { lo, hi, log: true }
    }

    fn check(&self, name: &str) -> Result<()> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi;
        if !ok || (self.log && self.lo <= 0.0) {
            return Err(Error::Config(format!("invalid range for `{name}`: {self:?}")));
        }
        Ok(())
    }

    fn is_free(&self) -> bool {
        self.hi > self.lo
    }

    /// Maps `u ∈ [0, 1]` (clamped) into the range.
    fn at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if !self.is_free() {
            self.lo
        } else if self.log {
            libm::exp(libm::log(self.lo) + u * (libm::log(self.hi) - libm::log(self.lo)))
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind"))]
pub enum Family {
    /// `X ≡ a`, `Y = ±b`.
    #[cfg_attr(feature = "serde", serde(rename = "RIO-TWO-POINT"))]
    RioTwoPoint { a: ParamRange, b: ParamRange },
    /// `X ≡ a`, `Y = b` w.p. `q`, `-bq/(1-q)` otherwise.
    #[cfg_attr(feature = "serde", serde(rename = "ASYM-TWO-POINT"))]
    AsymTwoPoint { a: ParamRange, b: ParamRange, q: ParamRange },
    /// Fixed-topology tree; every parameter lives in `[-1, 1]`.
    #[cfg_attr(feature = "serde", serde(rename = "RANDOM-TREE"))]
    RandomTree {
        depth: usize,
        branching: usize,
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        dim: usize,
        seed: u64,
    },
}

#[cfg(feature = "serde")]
fn one() -> usize {
    1
}

/// Largest parameter count accepted for the tree family.
const MAX_TREE_PARAMS: usize = 4096;

impl Family {
    fn ranges(&self) -> Result<Vec<ParamRange>> {
        match self {
            Family::RioTwoPoint { a, b } => {
                a.check("a")?;
                b.check("b")?;
                if a.lo <= 0.0 || b.lo <= 0.0 {
                    return Err(Error::Config("RIO-TWO-POINT needs a, b > 0".into()));
                }
                Ok(vec![*a, *b])
            }
            Family::AsymTwoPoint { a, b, q } => {
                a.check("a")?;
                b.check("b")?;
                q.check("q")?;
                if q.lo <= 0.0 || q.hi >= 1.0 || b.lo <= 0.0 {
                    return Err(Error::Config("ASYM-TWO-POINT needs b > 0 and q in ]0, 1[".into()));
                }
                Ok(vec![*a, *b, *q])
            }
            Family::RandomTree { depth, branching, dim, .. } => {
                if *branching == 0 || *dim == 0 {
                    return Err(Error::Config("RANDOM-TREE needs branching, dim ≥ 1".into()));
                }
                let mut internal = 0usize;
                let mut width = 1usize;
                for _ in 0..*depth {
                    internal = internal.saturating_add(width);
                    width = width.saturating_mul(*branching);
                }
                let count = internal.saturating_mul(branching * (dim + 1)).saturating_add(*dim);
                if count > MAX_TREE_PARAMS {
                    return Err(Error::Config(format!("RANDOM-TREE has {count} parameters (limit {MAX_TREE_PARAMS})")));
                }
                Ok(vec![ParamRange::linear(-1.0, 1.0); count])
            }
        }
    }

    fn check_target(&self, target: InequalityId) -> Result<()> {
        let ok = match self {
            Family::RioTwoPoint { .. } | Family::AsymTwoPoint { .. } => target == InequalityId::RioStep,
            Family::RandomTree { .. } => target.is_tree(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("target {target} does not apply to this family")))
        }
    }
}

/// Builds the fixed-topology tree encoded by `theta` (entries in `[-1, 1]`).
///
/// Layout: `M_0` first, then per internal node in depth-first order and per
/// child a logit followed by the raw increment. Probabilities are
/// `softmax(4·logit)`; raw increments are centred at every node.
pub fn parametric_tree(depth: usize, branching: usize, dim: usize, theta: &[f64]) -> Result<ProbTree> {
    fn grow(
        level: usize,
        depth: usize,
        branching: usize,
        dim: usize,
        theta: &mut core::slice::Iter<'_, f64>,
    ) -> Option<TreeNode> {
        if level == depth {
            return Some(TreeNode::Leaf);
        }
        let mut logits = Vec::with_capacity(branching);
        let mut raw = Vec::with_capacity(branching);
        for _ in 0..branching {
            logits.push(4.0 * *theta.next()?);
            raw.push((0..dim).map(|_| theta.next().copied()).collect::<Option<Vec<f64>>>()?);
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| libm::exp(l - top)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut children = Vec::with_capacity(branching);
        for (prob, incr) in centred_branches(&probs, raw) {
            let node = grow(level + 1, depth, branching, dim, theta)?;
            children.push(Branch { prob, incr, node });
        }
        Some(TreeNode::Internal(children))
    }
    let mut it = theta.iter();
    let m0: Vec<f64> = it.by_ref().take(dim).copied().collect();
    let root = grow(0, depth, branching, dim, &mut it)
        .filter(|_| m0.len() == dim && it.next().is_none())
        .ok_or_else(|| Error::Config("parameter vector does not match the tree shape".into()))?;
    ProbTree::new(dim, m0, root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Grid,
    Random,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub family: Family,
    pub p: Exponent,
    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    /// `RIO-STEP` maximizes the gain ratio; tree ids maximize
    /// `lhs / (rhs / constant)`.
    pub target: InequalityId,
    /// Tree level for tree targets; defaults to the full depth.
    #[cfg_attr(feature = "serde", serde(default))]
    pub level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracePoint {
    pub evaluation: usize,
    pub params: Vec<f64>,
    pub ratio: f64,
}

/// A ratio that exceeded its proven constant, re-evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ViolationCandidate {
    pub id: InequalityId,
    pub params: Vec<f64>,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchResult {
    pub best_ratio: f64,
    /// The proven constant the ratio is measured against.
    pub bound: f64,
    pub best_params: Vec<f64>,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    pub violation: Option<ViolationCandidate>,
}

impl SearchResult {
    /// `best_ratio / bound`; at most one for a sound pipeline.
    pub fn normalized(&self) -> f64 {
        self.best_ratio / self.bound
    }
}

struct Objective<'a> {
    config: &'a SearchConfig,
    level: usize,
}

impl Objective<'_> {
    fn ratio(&self, params: &[f64]) -> Result<f64> {
        let p = self.config.p;
        match &self.config.family {
            Family::RioTwoPoint { .. } => rio_gain(params[0], params[1], p),
            Family::AsymTwoPoint { .. } => {
                let (a, b, q) = (params[0], params[1], params[2]);
                let pair = RioPair {
                    dim: 1,
                    atoms: vec![RioAtom {
                        prob: 1.0,
                        x: vec![a],
                        y: vec![(q, vec![b]), (1.0 - q, vec![-b * q / (1.0 - q)])],
                    }],
                };
                Ok(pair.terms(p)?.gain())
            }
            Family::RandomTree { depth, branching, dim, .. } => {
                let tree = parametric_tree(*depth, *branching, *dim, params)?;
                Ok(eval_discrete(&tree, self.level, p, self.config.target)?.effective_constant())
            }
        }
    }
}

struct Tracker {
    best: Option<(Vec<f64>, f64)>,
    trace: Vec<TracePoint>,
    evaluations: usize,
    error: Option<Error>,
}

impl Tracker {
    fn record(&mut self, params: &[f64], ratio: Result<f64>) -> f64 {
        self.evaluations += 1;
        let ratio = match ratio {
            Ok(r) if r.is_finite() => r,
            Ok(_) => f64::NEG_INFINITY,
            Err(e) => {
                self.error.get_or_insert(e);
                return f64::NEG_INFINITY;
            }
        };
        let better = match &self.best {
            None => true,
            Some((bp, br)) => ratio > *br || (ratio == *br && lex_less(params, bp)),
        };
        if better {
            self.best = Some((params.to_vec(), ratio));
            self.trace.push(TracePoint { evaluation: self.evaluations, params: params.to_vec(), ratio });
        }
        ratio
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Largest `n` with `n^k ≤ budget`.
fn grid_points(budget: usize, k: u32) -> usize {
    let mut n = 1usize;
    while (n + 1).checked_pow(k).is_some_and(|v| v <= budget) {
        n += 1;
    }
    n
}

/// Runs the configured search. Deterministic in the whole configuration.
pub fn search(config: &SearchConfig) -> Result<SearchResult> {
    if config.budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    config.family.check_target(config.target)?;
    let ranges = config.family.ranges()?;
    let level = match (&config.family, config.level) {
        (Family::RandomTree { depth, .. }, Some(n)) if n > *depth => {
            return Err(Error::Config(format!("level {n} exceeds tree depth {depth}")))
        }
        (Family::RandomTree { depth, .. }, None) => *depth,
        (_, n) => n.unwrap_or(1),
    };
    let objective = Objective { config, level };
    let to_params = |u: &[f64]| -> Vec<f64> { ranges.iter().zip(u).map(|(r, &x)| r.at(x)).collect() };
    let mut tracker = Tracker { best: None, trace: Vec::new(), evaluations: 0, error: None };

    match config.method {
        Method::Grid => {
            let free: Vec<usize> = (0..ranges.len()).filter(|&i| ranges[i].is_free()).collect();
            if free.len() > 4 {
                return Err(Error::Config(format!(
                    "grid search supports at most 4 free parameters, family has {}",
                    free.len()
                )));
            }
            let per_dim = grid_points(config.budget, free.len() as u32);
            let total = per_dim.pow(free.len() as u32);
            let mut u = vec![0.0; ranges.len()];
            for idx in 0..total {
                let mut rest = idx;
                for &dim in free.iter().rev() {
                    let i = rest % per_dim;
                    rest /= per_dim;
                    u[dim] = if per_dim == 1 { 0.5 } else { i as f64 / (per_dim - 1) as f64 };
                }
                let params = to_params(&u);
                tracker.record(&params, objective.ratio(&params));
            }
        }
        Method::Random => {
            let mut draw = rng::stream(config.seed, 0);
            for _ in 0..config.budget {
                let u: Vec<f64> = ranges.iter().map(|_| draw.random::<f64>()).collect();
                let params = to_params(&u);
                tracker.record(&params, objective.ratio(&params));
            }
        }
        Method::NelderMead => {
            let start_seed = match &config.family {
                Family::RandomTree { seed, .. } => *seed,
                _ => config.seed,
            };
            let mut draw = rng::stream(start_seed, 1);
            let u0: Vec<f64> = ranges.iter().map(|_| draw.random::<f64>()).collect();
            NelderMead::default().minimize(
                |u| {
                    let params = to_params(u);
                    let r = objective.ratio(&params);
                    -tracker.record(&params, r)
                },
                &u0,
                config.budget,
            );
        }
    }

    if let Some(e) = tracker.error {
        return Err(e);
    }
    let (best_params, best_ratio) =
        tracker.best.ok_or_else(|| Error::Config("search performed no evaluations".into()))?;
    let bound = config.target.constant(config.p);
    let violation = if best_ratio > bound + SATISFACTION_TOL {
        let ratio = objective.ratio(&best_params)?;
        (ratio > bound + SATISFACTION_TOL).then(|| ViolationCandidate {
            id: config.target,
            params: best_params.clone(),
            ratio,
            bound,
        })
    } else {
        None
    };
    Ok(SearchResult {
        best_ratio,
        bound,
        best_params,
        evaluations: tracker.evaluations,
        trace: tracker.trace,
        violation,
    })
}
