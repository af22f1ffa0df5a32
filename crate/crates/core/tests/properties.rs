use martineq_core::ineq::{
    eval_all_levels, eval_discrete, eval_rio_step, random_rio_pair, taylor_pointwise, SATISFACTION_TOL,
};
use martineq_core::ptree::{random_tree, RandomTreeConfig};
use martineq_core::rng::stream;
use martineq_core::sharpness::{rio_gain, search, Family, Method, ParamRange, SearchConfig};
use martineq_core::{Exponent, InequalityId, ProbTree};
use proptest::prelude::*;

const PS: [f64; 5] = [2.0, 2.5, 3.0, 4.0, 8.0];

fn p(x: f64) -> Exponent {
    Exponent::new(x).unwrap()
}

fn tree(seed: u64, depth: usize, dim: usize) -> ProbTree {
    let cfg = RandomTreeConfig { depth, dim, min_branching: 2, max_branching: 3 };
    random_tree(&mut stream(seed, 0), &cfg).unwrap()
}

fn tree_strategy() -> impl Strategy<Value = ProbTree> {
    (any::<u64>(), 1usize..=4, 1usize..=3).prop_map(|(s, depth, dim)| tree(s, depth, dim))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn p2_orthogonality(t in tree_strategy()) {
        for n in 0..=t.depth() {
            let lhs = t.lp_norm_sq(n, p(2.0)).unwrap();
            let rhs = t.increment_lp_sum(n, p(2.0)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn norms_are_monotone_in_p(t in tree_strategy(), lo in 2.0f64..6.0, gap in 0.0f64..6.0) {
        for n in 0..=t.depth() {
            let a = t.lp_norm(n, p(lo)).unwrap();
            let b = t.lp_norm(n, p(lo + gap)).unwrap();
            prop_assert!(a <= b + 1e-12);
            prop_assert!(t.sup_lp_norm(n, p(lo)).unwrap() >= a - 1e-12);
        }
    }

    #[test]
    fn cumulative_norms_are_nondecreasing(t in tree_strategy(), q in 2.0f64..10.0) {
        for n in 1..=t.depth() {
            prop_assert!(t.quadratic_sum_norm(n, p(q)).unwrap() >= t.quadratic_sum_norm(n - 1, p(q)).unwrap() - 1e-12);
            prop_assert!(t.increment_lp_sum(n, p(q)).unwrap() >= t.increment_lp_sum(n - 1, p(q)).unwrap());
        }
    }

    #[test]
    fn every_tree_inequality_holds(t in tree_strategy()) {
        for &q in &PS {
            for r in eval_all_levels(&t, p(q), &InequalityId::TREE).unwrap() {
                prop_assert!(r.satisfied, "{r:?}");
                if r.rhs > 0.0 {
                    prop_assert!(r.ratio <= 1.0 + SATISFACTION_TOL);
                }
            }
        }
    }

    #[test]
    fn rio_chain_is_tighter_and_doob_factorizes(t in tree_strategy(), q in 2.0f64..12.0) {
        let q = p(q);
        for n in 0..=t.depth() {
            let chain = eval_discrete(&t, n, q, InequalityId::RioChain).unwrap();
            let main = eval_discrete(&t, n, q, InequalityId::Prop1Main).unwrap();
            prop_assert!(chain.rhs <= main.rhs + 1e-12);
            let max = eval_discrete(&t, n, q, InequalityId::Prop1Max).unwrap();
            let pp = q.get();
            let composed = (pp / (pp - 1.0)).powi(2) * (pp - 1.0) * t.increment_lp_sum(n, q).unwrap();
            prop_assert!((max.rhs - composed).abs() <= 1e-12 * composed.max(1.0));
        }
    }

    #[test]
    fn scale_equivariance(t in tree_strategy(), lambda in 0.1f64..10.0, q in 2.0f64..9.0) {
        let s = t.scaled(lambda).unwrap();
        for id in InequalityId::TREE {
            let a = eval_discrete(&t, t.depth(), p(q), id).unwrap();
            let b = eval_discrete(&s, s.depth(), p(q), id).unwrap();
            let factor = if id == InequalityId::Doob { lambda } else { lambda * lambda };
            prop_assert!(close(b.lhs, a.lhs * factor, 1e-12), "{id}: {} vs {}", b.lhs, a.lhs * factor);
            prop_assert!(close(b.rhs, a.rhs * factor, 1e-12), "{id}: {} vs {}", b.rhs, a.rhs * factor);
            prop_assert_eq!(a.satisfied, b.satisfied);
        }
    }

    #[test]
    fn rio_gain_bounds_and_scale_invariance(a in 1e-3f64..1e3, b in 1e-3f64..1e3, q in 2.0f64..16.0, lambda in 1e-2f64..1e2) {
        let g = rio_gain(a, b, p(q)).unwrap();
        prop_assert!(g > 0.0 && g <= q - 1.0 + 1e-9, "gain {g}");
        let scaled = rio_gain(lambda * a, lambda * b, p(q)).unwrap();
        prop_assert!(close(scaled, g, 1e-12), "{scaled} vs {g}");
    }
}

#[test]
fn deterministic_tree_norms_equal_start() {
    use martineq_core::ptree::Branch;
    use martineq_core::TreeNode;
    let leaf = || TreeNode::Leaf;
    let zero = |prob| Branch { prob, incr: vec![0.0, 0.0], node: leaf() };
    let root = TreeNode::internal([zero(0.25), zero(0.75)]);
    let t = ProbTree::new(2, vec![3.0, 4.0], root).unwrap();
    for q in PS {
        assert_eq!(t.lp_norm(1, p(q)).unwrap(), 5.0);
        assert_eq!(t.sup_lp_norm(1, p(q)).unwrap(), 5.0);
    }
}

#[test]
fn taylor_bound_fuzz() {
    let mut rng = stream(2024, 7);
    use rand::Rng;
    for case in 0..10_000 {
        let d = rng.random_range(1..=4);
        let mut vector = |r: f64| -> Vec<f64> { (0..d).map(|_| rng.random_range(-r..r)).collect() };
        let (x, y) = (vector(10.0 / 2.0), vector(10.0 / 2.0));
        let q = rng.random_range(2.1..12.0);
        let check =
            taylor_pointwise(&x, &y, p(q)).unwrap_or_else(|e| panic!("case {case}: x={x:?} y={y:?} p={q}: {e}"));
        assert!(check.satisfied, "case {case}: x={x:?} y={y:?} p={q}: {check:?}");
    }
}

#[test]
fn rio_step_fuzz() {
    let mut rng = stream(99, 3);
    use rand::Rng;
    for case in 0..10_000 {
        let dim = rng.random_range(1..=3);
        let pair = random_rio_pair(&mut rng, dim, 3);
        let q = rng.random_range(2.0..12.0);
        let r = eval_rio_step(&pair, p(q)).unwrap();
        assert!(r.satisfied, "case {case}: {r:?}");
    }
}

#[test]
fn searches_never_exceed_bound() {
    let families = [
        Family::RioTwoPoint { a: ParamRange::log(1e-2, 1e2), b: ParamRange::log(1e-4, 1e2) },
        Family::AsymTwoPoint {
            a: ParamRange::fixed(1.0),
            b: ParamRange::log(1e-5, 10.0),
            q: ParamRange::linear(0.01, 0.99),
        },
    ];
    for family in families {
        for method in [Method::Grid, Method::Random, Method::NelderMead] {
            for q in [2.0, 3.0, 4.5, 8.0] {
                let cfg = SearchConfig {
                    family: family.clone(),
                    p: p(q),
                    method,
                    budget: 300,
                    seed: 5,
                    target: InequalityId::RioStep,
                    level: None,
                };
                let r = search(&cfg).unwrap();
                assert!(r.best_ratio <= r.bound + 1e-9, "{family:?} {method:?} p={q}: {r:?}");
                assert!(r.violation.is_none());
                assert_eq!(search(&cfg).unwrap(), r);
            }
        }
    }
    for target in [InequalityId::Prop1Main, InequalityId::Prop1Max, InequalityId::RioChain] {
        let cfg = SearchConfig {
            family: Family::RandomTree { depth: 2, branching: 2, dim: 1, seed: 11 },
            p: p(3.0),
            method: Method::NelderMead,
            budget: 200,
            seed: 1,
            target,
            level: None,
        };
        let r = search(&cfg).unwrap();
        assert!(r.best_ratio <= r.bound + 1e-9, "{target}: {r:?}");
    }
}
