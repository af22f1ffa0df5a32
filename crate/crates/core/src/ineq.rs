//! Evaluators for the discrete martingale inequalities.
//!
//! Every evaluator returns an [`InequalityReport`] carrying both sides in the
//! form the inequality is written in (squared norms for the Burkholder-type
//! bounds, plain norms for Doob's maximal inequality).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ptree::{Exponent, ProbTree};
use crate::quad::{self, Tolerance};
use crate::stats::{norm_pow, norm_sq, pairwise_sum, pow_increment, pow_nonneg};
use crate::wiener::McEstimate;

/// Absolute slack allowed on `lhs ≤ rhs` for exact evaluators.
pub const SATISFACTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InequalityId {
    /// `‖M_n‖² ≤ (p-1)² ‖Σ‖d_k‖²‖_{p/2}`
    #[cfg_attr(feature = "serde", serde(rename = "D-BURK-1"))]
    DBurk1,
    /// `‖sup‖M_ν‖‖² ≤ p² ‖Σ‖d_k‖²‖_{p/2}`
    #[cfg_attr(feature = "serde", serde(rename = "D-BURK-2"))]
    DBurk2,
    /// `‖M_n‖² ≤ (p-1) Σ‖d_k‖²_p`
    #[cfg_attr(feature = "serde", serde(rename = "PROP1-MAIN"))]
    Prop1Main,
    /// `‖sup‖M_ν‖‖² ≤ p²/(p-1) Σ‖d_k‖²_p`
    #[cfg_attr(feature = "serde", serde(rename = "PROP1-MAX"))]
    Prop1Max,
    /// `‖X+Y‖² ≤ ‖X‖² + (p-1)‖Y‖²` for `E[Y|G] = 0`
    #[cfg_attr(feature = "serde", serde(rename = "RIO-STEP"))]
    RioStep,
    /// `‖M_n‖² ≤ ‖M_0‖² + (p-1) Σ_{k≥1}‖d_k‖²_p`
    #[cfg_attr(feature = "serde", serde(rename = "RIO-CHAIN"))]
    RioChain,
    /// `‖sup‖M_ν‖‖ ≤ p/(p-1) ‖M_n‖`
    #[cfg_attr(feature = "serde", serde(rename = "DOOB"))]
    Doob,
    #[cfg_attr(feature = "serde", serde(rename = "C-BURK-1"))]
    CBurk1,
    #[cfg_attr(feature = "serde", serde(rename = "C-BURK-2"))]
    CBurk2,
    #[cfg_attr(feature = "serde", serde(rename = "ZAKAI-MAIN"))]
    ZakaiMain,
    #[cfg_attr(feature = "serde", serde(rename = "ZAKAI-MAX"))]
    ZakaiMax,
}

impl InequalityId {
    pub const ALL: [InequalityId; 11] = [
        Self::DBurk1,
        Self::DBurk2,
        Self::Prop1Main,
        Self::Prop1Max,
        Self::RioStep,
        Self::RioChain,
        Self::Doob,
        Self::CBurk1,
        Self::CBurk2,
        Self::ZakaiMain,
        Self::ZakaiMax,
    ];

    /// Ids evaluable on a probability tree.
    pub const TREE: [InequalityId; 6] =
        [Self::DBurk1, Self::DBurk2, Self::Prop1Main, Self::Prop1Max, Self::RioChain, Self::Doob];

    pub const CONTINUOUS: [InequalityId; 4] = [Self::CBurk1, Self::CBurk2, Self::ZakaiMain, Self::ZakaiMax];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DBurk1 => "D-BURK-1",
            Self::DBurk2 => "D-BURK-2",
            Self::Prop1Main => "PROP1-MAIN",
            Self::Prop1Max => "PROP1-MAX",
            Self::RioStep => "RIO-STEP",
            Self::RioChain => "RIO-CHAIN",
            Self::Doob => "DOOB",
            Self::CBurk1 => "C-BURK-1",
            Self::CBurk2 => "C-BURK-2",
            Self::ZakaiMain => "ZAKAI-MAIN",
            Self::ZakaiMax => "ZAKAI-MAX",
        }
    }

    pub fn is_tree(self) -> bool {
        Self::TREE.contains(&self)
    }

    pub fn is_continuous(self) -> bool {
        Self::CONTINUOUS.contains(&self)
    }

    /// Multiplicative constant on the right-hand side.
    pub fn constant(self, p: Exponent) -> f64 {
        let p = p.get();
        match self {
            Self::DBurk1 | Self::CBurk1 => (p - 1.0) * (p - 1.0),
            Self::DBurk2 | Self::CBurk2 => p * p,
            Self::Prop1Main | Self::RioStep | Self::RioChain | Self::ZakaiMain => p - 1.0,
            Self::Prop1Max | Self::ZakaiMax => p * p / (p - 1.0),
            Self::Doob => p / (p - 1.0),
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown inequality id `{s}`")))
    }
}

/// Where an inequality was evaluated: a tree level or a continuous time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum At {
    Level(usize),
    Time(f64),
}

impl At {
    pub fn as_f64(self) -> f64 {
        match self {
            At::Level(n) => n as f64,
            At::Time(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    Satisfied,
    /// Monte Carlo confidence intervals overlap.
    Inconclusive,
    /// Exact: `lhs > rhs + tol`. Monte Carlo: the lhs lower bound exceeds the
    /// rhs upper bound.
    Violation,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "true",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violation => "false",
        }
    }
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub id: InequalityId,
    pub p: Exponent,
    pub at: At,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub ratio: f64,
    pub satisfied: bool,
    pub verdict: Verdict,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub lhs_estimate: Option<McEstimate>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub rhs_estimate: Option<McEstimate>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub note: Option<String>,
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

impl InequalityReport {
    /// Report for exactly computed sides.
    pub fn exact(id: InequalityId, p: Exponent, at: At, lhs: f64, rhs: f64, constant: f64) -> Self {
        let satisfied = lhs <= rhs + SATISFACTION_TOL;
        Self {
            id,
            p,
            at,
            lhs,
            rhs,
            constant,
            ratio: ratio(lhs, rhs),
            satisfied,
            verdict: if satisfied { Verdict::Satisfied } else { Verdict::Violation },
            lhs_estimate: None,
            rhs_estimate: None,
            note: None,
        }
    }

    /// `lhs / (rhs / constant)`: the smallest constant that would still make
    /// this instance hold.
    pub fn effective_constant(&self) -> f64 {
        if self.rhs == 0.0 {
            return if self.lhs == 0.0 { 0.0 } else { f64::INFINITY };
        }
        self.lhs * self.constant / self.rhs
    }
}

/// Evaluates one tree inequality at level `n`.
pub fn eval_discrete(tree: &ProbTree, n: usize, p: Exponent, id: InequalityId) -> Result<InequalityReport> {
    let c = id.constant(p);
    let (lhs, rhs) = match id {
        InequalityId::DBurk1 => (tree.lp_norm_sq(n, p)?, c * tree.quadratic_sum_norm(n, p)?),
        InequalityId::DBurk2 => (tree.sup_lp_norm_sq(n, p)?, c * tree.quadratic_sum_norm(n, p)?),
        InequalityId::Prop1Main => (tree.lp_norm_sq(n, p)?, c * tree.increment_lp_sum(n, p)?),
        InequalityId::Prop1Max => (tree.sup_lp_norm_sq(n, p)?, c * tree.increment_lp_sum(n, p)?),
        InequalityId::RioChain => {
            let head = tree.increment_lp_norm_sq(0, p)?;
            let tail = tree.increment_lp_sum(n, p)? - head;
            (tree.lp_norm_sq(n, p)?, head + c * tail)
        }
        InequalityId::Doob => (tree.sup_lp_norm(n, p)?, c * tree.lp_norm(n, p)?),
        other => return Err(Error::Config(format!("{other} is not evaluable on a probability tree"))),
    };
    Ok(InequalityReport::exact(id, p, At::Level(n), lhs, rhs, c))
}

/// Evaluates every tree inequality at every level `0..=N`.
pub fn eval_all_levels(tree: &ProbTree, p: Exponent, ids: &[InequalityId]) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::with_capacity(ids.len() * (tree.depth() + 1));
    for n in 0..=tree.depth() {
        for &id in ids {
            out.push(eval_discrete(tree, n, p, id)?);
        }
    }
    Ok(out)
}

/// One atom of `X` together with the conditional law of `Y` on that atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RioAtom {
    pub prob: f64,
    pub x: Vec<f64>,
    /// `(conditional probability, y)` pairs.
    pub y: Vec<(f64, Vec<f64>)>,
}

/// A finite joint law of `(X, Y)` with `X` measurable with respect to the
/// conditioning sigma-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct RioPair {
    pub dim: usize,
    pub atoms: Vec<RioAtom>,
}

/// Squared `L^p` norms appearing in the one-step inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RioTerms {
    pub x_sq: f64,
    pub y_sq: f64,
    pub sum_sq: f64,
    /// `‖X+Y‖² - ‖X‖²`, computed without cancellation.
    pub excess_sq: f64,
}

impl RioTerms {
    /// `(‖X+Y‖² - ‖X‖²) / ‖Y‖²`.
    pub fn gain(&self) -> f64 {
        self.excess_sq / self.y_sq
    }
}

impl RioPair {
    /// Checks probabilities and `E[Y | X = x] = 0` on every atom.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(msg));
        if self.atoms.is_empty() {
            return fail("X has no atoms".into());
        }
        let total: f64 = self.atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > crate::ptree::VALIDATION_TOL {
            return fail(format!("X probabilities sum to {total}"));
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.prob.is_nan() || atom.prob <= 0.0 || atom.x.len() != self.dim {
                return fail(format!("atom {i} of X is malformed"));
            }
            let cond: f64 = atom.y.iter().map(|(q, _)| q).sum();
            if (cond - 1.0).abs() > crate::ptree::VALIDATION_TOL {
                return fail(format!("conditional law of Y on atom {i} sums to {cond}"));
            }
            let mut mean = alloc::vec![0.0; self.dim];
            for (q, y) in &atom.y {
                if q.is_nan() || *q <= 0.0 || y.len() != self.dim {
                    return fail(format!("conditional law of Y on atom {i} is malformed"));
                }
                mean.iter_mut().zip(y).for_each(|(m, v)| *m += q * v);
            }
            let residual = libm::sqrt(norm_sq(&mean));
            if residual > crate::ptree::VALIDATION_TOL {
                return fail(format!("E[Y | X] = {residual:e} ≠ 0 on atom {i}"));
            }
        }
        Ok(())
    }

    pub fn terms(&self, p: Exponent) -> Result<RioTerms> {
        self.check()?;
        let p = p.get();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut sums = Vec::new();
        let mut excess = Vec::new();
        let mut buf = alloc::vec![0.0; self.dim];
        for atom in &self.atoms {
            xs.push(atom.prob * norm_pow(&atom.x, p));
            for (q, y) in &atom.y {
                let w = atom.prob * q;
                ys.push(w * norm_pow(y, p));
                buf.iter_mut().zip(atom.x.iter().zip(y)).for_each(|(b, (x, y))| *b = x + y);
                sums.push(w * norm_pow(&buf, p));
                let x_norm_sq = norm_sq(&atom.x);
                let cross: f64 = atom.x.iter().zip(y).map(|(a, b)| a * b).sum();
                excess.push(w * pow_increment(x_norm_sq, 2.0 * cross + norm_sq(y), p / 2.0));
            }
        }
        let sq = |v: &[f64]| pow_nonneg(pairwise_sum(v), 2.0 / p);
        let x_pow = pairwise_sum(&xs);
        let excess_sq = pow_increment(x_pow, pairwise_sum(&excess), 2.0 / p);
        Ok(RioTerms { x_sq: sq(&xs), y_sq: sq(&ys), sum_sq: sq(&sums), excess_sq })
    }

    /// `X ≡ a`, `Y = ±b` with probability ½ each (scalar case).
    pub fn symmetric(a: f64, b: f64) -> Self {
        Self {
            dim: 1,
            atoms: alloc::vec![RioAtom {
                prob: 1.0,
                x: alloc::vec![a],
                y: alloc::vec![(0.5, alloc::vec![b]), (0.5, alloc::vec![-b])],
            }],
        }
    }
}

/// `‖X+Y‖² ≤ ‖X‖² + (p-1)‖Y‖²`.
pub fn eval_rio_step(pair: &RioPair, p: Exponent) -> Result<InequalityReport> {
    eval_rio_step_with_constant(pair, p, InequalityId::RioStep.constant(p))
}

/// The one-step inequality with an arbitrary constant in front of `‖Y‖²`.
pub fn eval_rio_step_with_constant(pair: &RioPair, p: Exponent, constant: f64) -> Result<InequalityReport> {
    let t = pair.terms(p)?;
    Ok(InequalityReport::exact(InequalityId::RioStep, p, At::Level(1), t.sum_sq, t.x_sq + constant * t.y_sq, constant))
}

/// Draws a random finite `(X, Y)` law with `E[Y | X] = 0`.
pub fn random_rio_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_atoms: usize) -> RioPair {
    let weights = |rng: &mut R, k: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    };
    let scale = rng.random_range(0.1..4.0);
    let nx = rng.random_range(1..=max_atoms.max(1));
    let px = weights(rng, nx);
    let atoms = px
        .into_iter()
        .map(|prob| {
            let x = (0..dim).map(|_| scale * rng.random_range(-1.0..=1.0)).collect();
            let ny = rng.random_range(2..=max_atoms.max(2));
            let py = weights(rng, ny);
            let raw = (0..ny).map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
            RioAtom { prob, x, y: crate::ptree::centred_branches(&py, raw) }
        })
        .collect();
    RioPair { dim, atoms }
}

/// Outcome of the pointwise second-order Taylor bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaylorCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Slack granted for quadrature and rounding error.
    pub tolerance: f64,
    pub satisfied: bool,
    /// Value of `∫_0^1 ‖x+ty‖^{p-2} ‖y‖² (1-t) dt`.
    pub integral: f64,
}

/// Collinear `(x, y)` make the bound an equality, so the integral must be
/// accurate well below the rounding slack on the comparison.
const TAYLOR_TOL: Tolerance = Tolerance { abs: 1e-15, rel: 1e-13 };

/// Checks `‖x+y‖^p ≤ ‖x‖^p + p‖x‖^{p-2}⟨x,y⟩ + p(p-1)∫_0^1 ‖x+ty‖^{p-2}‖y‖²(1-t) dt`.
pub fn taylor_pointwise(x: &[f64], y: &[f64], p: Exponent) -> Result<TaylorCheck> {
    if x.len() != y.len() {
        return Err(Error::Precondition(format!("x has {} entries, y has {}", x.len(), y.len())));
    }
    let p = p.get();
    let yy = norm_sq(y);
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let x_p = norm_pow(x, p);
    let lhs = {
        let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        norm_pow(&s, p)
    };
    let (integral, quad_err) = if yy == 0.0 {
        (0.0, 0.0)
    } else {
        // ‖x+ty‖ is smallest at t*; when it vanishes there the integrand has an
        // |t - t*|^{p-2} cusp. Substituting t = a ± ℓv⁴ on each side of the
        // clamped anchor turns it into a smooth-enough power of v.
        let t_star = -xy / yy;
        let anchor = t_star.clamp(0.0, 1.0);
        // ‖x+ty‖² = ‖y‖²(t-t*)² + ‖x+t*y‖², free of cancellation near t*.
        let closest: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t_star * b).collect();
        let gap = norm_sq(&closest);
        let integrand = |t: f64| {
            let r2 = yy * (t - t_star) * (t - t_star) + gap;
            pow_nonneg(r2, (p - 2.0) / 2.0) * yy * (1.0 - t)
        };
        let mut total = (0.0, 0.0);
        for (sign, len) in [(-1.0, anchor), (1.0, 1.0 - anchor)] {
            if len > 0.0 {
                let v4 = |v: f64| v * v * v * v;
                let q = quad::integrate(
                    |v| integrand(anchor + sign * len * v4(v)) * 4.0 * len * v * v * v,
                    0.0,
                    1.0,
                    &[],
                    TAYLOR_TOL,
                )?;
                total = (total.0 + q.value, total.1 + q.error);
            }
        }
        total
    };
    let linear = p * pow_nonneg(norm_sq(x), (p - 2.0) / 2.0) * xy;
    let rhs = x_p + linear + p * (p - 1.0) * integral;
    let scale = x_p + linear.abs() + p * (p - 1.0) * integral.abs() + lhs;
    let tolerance = p * (p - 1.0) * quad_err + 1e-12 * scale;
    Ok(TaylorCheck { lhs, rhs, tolerance, satisfied: lhs <= rhs + tolerance, integral })
}

/// Classical versus improved constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantComparison {
    pub p: Exponent,
    /// `(p-1)²`
    pub classic_main: f64,
    /// `p-1`
    pub new_main: f64,
    /// `p²`
    pub classic_max: f64,
    /// `p²/(p-1)`
    pub new_max: f64,
    /// `new_main < classic_main`
    pub main_improved: bool,
    /// `new_max < classic_max`
    pub max_improved: bool,
}

pub fn compare_constants(p: Exponent) -> ConstantComparison {
    let classic_main = InequalityId::DBurk1.constant(p);
    let new_main = InequalityId::Prop1Main.constant(p);
    let classic_max = InequalityId::DBurk2.constant(p);
    let new_max = InequalityId::Prop1Max.constant(p);
    ConstantComparison {
        p,
        classic_main,
        new_main,
        classic_max,
        new_max,
        main_improved: new_main < classic_main,
        max_improved: new_max < classic_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptree::fixtures::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ids_parse_and_reject_unknown() {
        for id in InequalityId::ALL {
            assert_eq!(id.as_str().parse::<InequalityId>().unwrap(), id);
        }
        assert!("PROP3".parse::<InequalityId>().is_err());
    }

    #[test]
    fn coin_prop1_main_is_equality_at_p2() {
        let r = eval_discrete(&coin_walk(1, 0.0), 1, p(2.0), InequalityId::Prop1Main).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-15);
        assert!(r.satisfied);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn shifted_coin_prop1_main_at_p4() {
        // M_1 ∈ {2, 0}: (E M_1⁴)^{1/2} = (16/2)^{1/2} = √8; rhs = 3·(1 + 1)
        let r = eval_discrete(&two_point(1.0, 1.0), 1, p(4.0), InequalityId::Prop1Main).unwrap();
        assert_abs_diff_eq!(r.lhs, 8f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 6.0, epsilon = 1e-14);
        assert!(r.satisfied);
    }

    #[test]
    fn walk_prop1_max_at_p2() {
        let r = eval_discrete(&coin_walk(2, 0.0), 2, p(2.0), InequalityId::Prop1Max).unwrap();
        assert_abs_diff_eq!(r.lhs, 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 8.0, epsilon = 1e-14);
        assert!(r.satisfied);
    }

    #[test]
    fn rio_chain_and_doob_on_shifted_coin() {
        let tree = two_point(1.0, 1.0);
        let chain = eval_discrete(&tree, 1, p(4.0), InequalityId::RioChain).unwrap();
        assert_abs_diff_eq!(chain.rhs, 1.0 + 3.0, epsilon = 1e-14);
        // sup over {M_0, M_1} ∈ {max(1,2), max(1,0)} = {2, 1}
        let doob = eval_discrete(&tree, 1, p(2.0), InequalityId::Doob).unwrap();
        assert_abs_diff_eq!(doob.lhs, 2.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(doob.rhs, 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn continuous_ids_rejected_on_trees() {
        let r = eval_discrete(&coin_walk(1, 0.0), 1, p(2.0), InequalityId::ZakaiMain);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn zero_martingale_has_zero_ratio() {
        let r = eval_discrete(&two_point(0.0, 0.0), 1, p(3.0), InequalityId::Prop1Main).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        assert!(r.satisfied);
    }

    #[test]
    fn rio_step_examples() {
        let r = eval_rio_step(&RioPair::symmetric(1.0, 1.0), p(4.0)).unwrap();
        assert_abs_diff_eq!(r.lhs, 8f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 4.0, epsilon = 1e-14);
        assert!(r.satisfied);

        let r = eval_rio_step(&RioPair::symmetric(1.5, 0.0), p(5.0)).unwrap();
        assert_abs_diff_eq!(r.lhs, 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 2.25, epsilon = 1e-14);

        // Enumeration oracle (mpmath): 2.999600119956018
        let t = RioPair::symmetric(1.0, 0.01).terms(p(4.0)).unwrap();
        assert_abs_diff_eq!(t.gain(), 2.999_600_119_956_018, epsilon = 1e-8);
    }

    #[test]
    fn rio_step_rejects_biased_y() {
        let mut pair = RioPair::symmetric(1.0, 1.0);
        pair.atoms[0].y[1].1[0] = -0.5;
        assert!(matches!(eval_rio_step(&pair, p(3.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn rio_step_negative_control() {
        let pair = RioPair::symmetric(1.0, 1e-3);
        let q = p(4.0);
        assert!(eval_rio_step(&pair, q).unwrap().satisfied);
        let weakened = eval_rio_step_with_constant(&pair, q, 0.9 * 3.0).unwrap();
        assert_eq!(weakened.verdict, Verdict::Violation);
    }

    #[test]
    fn random_rio_pairs_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let pair = random_rio_pair(&mut rng, 3, 4);
            pair.check().unwrap();
        }
    }

    #[test]
    fn taylor_examples() {
        let r = taylor_pointwise(&[1.0, 0.0], &[0.0, 1.0], p(4.0)).unwrap();
        assert_abs_diff_eq!(r.lhs, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 8.0, epsilon = 1e-9);
        assert!(r.satisfied);

        let r = taylor_pointwise(&[0.3, -1.2, 2.0], &[0.0; 3], p(3.5)).unwrap();
        assert_eq!(r.lhs, r.rhs);

        let r = taylor_pointwise(&[1.0], &[-1.0], p(4.0)).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 0.0, epsilon = 1e-9);
        assert!(r.satisfied);
    }

    #[test]
    fn taylor_at_p2_is_the_polarization_identity() {
        let (x, y) = ([0.7, -0.2], [1.1, 0.4]);
        let r = taylor_pointwise(&x, &y, p(2.0)).unwrap();
        assert_abs_diff_eq!(r.lhs, r.rhs, epsilon = 1e-13);
    }

    #[test]
    fn taylor_rejects_dimension_mismatch() {
        assert!(taylor_pointwise(&[1.0], &[1.0, 2.0], p(3.0)).is_err());
    }

    #[test]
    fn constant_comparison_examples() {
        let c = compare_constants(p(2.0));
        assert_eq!((c.classic_main, c.new_main, c.classic_max, c.new_max), (1.0, 1.0, 4.0, 4.0));
        assert!(!c.main_improved && !c.max_improved);

        let c = compare_constants(p(4.0));
        assert_eq!((c.classic_main, c.new_main, c.classic_max), (9.0, 3.0, 16.0));
        assert_abs_diff_eq!(c.new_max, 16.0 / 3.0, epsilon = 1e-15);
        assert!(c.main_improved && c.max_improved);

        let c = compare_constants(p(8.0));
        assert_eq!((c.classic_main, c.new_main, c.classic_max), (49.0, 7.0, 64.0));
        assert_abs_diff_eq!(c.new_max, 9.142_857_142_857_142, epsilon = 1e-12);
    }
}
