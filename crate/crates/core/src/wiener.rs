//! Monte Carlo evaluation of the Itô-integral inequalities.
//!
//! Integrands are piecewise constant on a uniform grid and are evaluated at
//! the left endpoint of each step, so the simulated sum
//! `X_{t_n} = Σ_j Σ_{i<n} f^j(t_i) ΔW^j_i` is exactly the Itô integral of the
//! step process. Each path draws from its own stream `(seed, path index)`, and
//! paths are processed in fixed-size chunks whose partial results are merged in
//! chunk order, so a batch is bit-identical however the chunks are scheduled.
//!
//! Only the samples needed by the estimators are kept: per-path values at the
//! observed grid times, and per-step moment accumulators for the integrand
//! profile `u ↦ ‖Σ_j ‖f^j_u‖²‖_{L^{p/2}}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ineq::{ratio, At, InequalityId, InequalityReport, Verdict};
use crate::ptree::Exponent;
use crate::quad::{self, Tolerance};
use crate::rng;
use crate::stats::{norm_sq, pairwise_sum, pow_nonneg, Moments};

/// Paths per chunk. Part of the reproducibility contract: changing it changes
/// the floating-point reduction order.
pub const CHUNK_PATHS: usize = 4096;

/// Default bound on the number of stored `f64` samples in a batch.
pub const DEFAULT_SAMPLE_CAP: u64 = 1 << 27;

/// z-value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// One integrand rule, evaluated at the left endpoint `t_i` of a step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Rule {
    /// `c`
    Const(Vec<f64>),
    /// `c · W^k(t_i)`
    Lin { k: usize, c: Vec<f64> },
    /// `c · sign(W^k(t_i))`, with `sign(0) = 0`.
    Sign { k: usize, c: Vec<f64> },
}

impl Rule {
    fn coefficient(&self) -> &[f64] {
        match self {
            Rule::Const(c) | Rule::Lin { c, .. } | Rule::Sign { c, .. } => c,
        }
    }

    /// Scalar multiplier of the coefficient given the current `W(t_i)`.
    #[inline]
    fn factor(&self, w: &[f64]) -> f64 {
        match self {
            Rule::Const(_) => 1.0,
            Rule::Lin { k, .. } => w[*k],
            Rule::Sign { k, .. } => {
                let v = w[*k];
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Assigns `rule` to component `j` on steps `start..end`. Later entries
/// override earlier ones; unassigned `(step, j)` pairs are zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuleEntry {
    pub steps: (usize, usize),
    pub j: usize,
    pub rule: Rule,
}

/// Piecewise-constant adapted integrands `f^1, …, f^m: [0, T] → R^d`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegrandSpec {
    pub d: usize,
    pub m: usize,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: f64,
    pub steps: usize,
    pub rules: Vec<RuleEntry>,
}

impl IntegrandSpec {
    /// `f^j ≡ c_j` on the whole horizon.
    pub fn constant(horizon: f64, steps: usize, coefficients: Vec<Vec<f64>>) -> Self {
        let d = coefficients.first().map_or(1, Vec::len);
        let m = coefficients.len();
        let rules = coefficients
            .into_iter()
            .enumerate()
            .map(|(j, c)| RuleEntry { steps: (0, steps), j, rule: Rule::Const(c) })
            .collect();
        Self { d, m, horizon, steps, rules }
    }

    /// Scalar `f ≡ 1` against a one-dimensional Wiener process.
    pub fn unit(horizon: f64, steps: usize) -> Self {
        Self::constant(horizon, steps, vec![vec![1.0]])
    }

    /// The shipped test zoo: constant, linear and sign integrands.
    pub fn zoo(steps: usize) -> Vec<(&'static str, IntegrandSpec)> {
        let whole = (0, steps);
        vec![
            ("constant", Self::unit(1.0, steps)),
            ("constant-2x2", Self::constant(1.0, steps, vec![vec![1.0, 0.5], vec![-0.3, 2.0]])),
            (
                "linear",
                IntegrandSpec {
                    d: 1,
                    m: 1,
                    horizon: 1.0,
                    steps,
                    rules: vec![RuleEntry { steps: whole, j: 0, rule: Rule::Lin { k: 0, c: vec![1.0] } }],
                },
            ),
            (
                "sign",
                IntegrandSpec {
                    d: 1,
                    m: 1,
                    horizon: 1.0,
                    steps,
                    rules: vec![RuleEntry { steps: whole, j: 0, rule: Rule::Sign { k: 0, c: vec![1.0] } }],
                },
            ),
            (
                "mixed-2x2",
                IntegrandSpec {
                    d: 2,
                    m: 2,
                    horizon: 1.0,
                    steps,
                    rules: vec![
                        RuleEntry { steps: whole, j: 0, rule: Rule::Const(vec![1.0, 0.0]) },
                        RuleEntry { steps: whole, j: 1, rule: Rule::Lin { k: 0, c: vec![0.0, 1.0] } },
                        RuleEntry { steps: (steps / 2, steps), j: 1, rule: Rule::Sign { k: 1, c: vec![0.5, 0.5] } },
                    ],
                },
            ),
        ]
    }

    pub fn step_size(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Grid time `t_i = T·i/S`.
    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.steps as f64
    }

    /// Grid index of `t`, if `t` is a grid point.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let off = || Error::OffGrid { t, horizon: self.horizon, steps: self.steps };
        if !t.is_finite() || t < 0.0 {
            return Err(off());
        }
        let x = t / self.horizon * self.steps as f64;
        let idx = libm::round(x);
        if (x - idx).abs() > 1e-9 * x.max(1.0) || idx > self.steps as f64 {
            return Err(off());
        }
        Ok(idx as usize)
    }

    /// Same integrand rules on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            steps: self.steps * factor,
            rules: self
                .rules
                .iter()
                .map(|r| RuleEntry { steps: (r.steps.0 * factor, r.steps.1 * factor), ..r.clone() })
                .collect(),
            ..self.clone()
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d == 0 || self.m == 0 {
            return bad("d and m must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon T = {} must be positive", self.horizon));
        }
        if self.steps == 0 {
            return bad("grid needs at least one step".into());
        }
        for (n, e) in self.rules.iter().enumerate() {
            let (start, end) = e.steps;
            if start >= end || end > self.steps {
                return bad(format!("rule {n}: step range {start}..{end} outside 0..{}", self.steps));
            }
            if e.j >= self.m {
                return bad(format!("rule {n}: j = {} but m = {}", e.j, self.m));
            }
            if let Rule::Lin { k, .. } | Rule::Sign { k, .. } = e.rule {
                if k >= self.m {
                    return bad(format!("rule {n}: references W^{k} but m = {}", self.m));
                }
            }
            let c = e.rule.coefficient();
            if c.len() != self.d || c.iter().any(|x| !x.is_finite()) {
                return bad(format!("rule {n}: coefficient must be {} finite reals", self.d));
            }
        }
        Ok(())
    }
}

/// Point estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `1.96 · std_error`.
    pub half_width: f64,
    pub samples: u64,
}

impl McEstimate {
    pub fn new(estimate: f64, std_error: f64, samples: u64) -> Self {
        Self { estimate, std_error, half_width: Z95 * std_error, samples }
    }

    pub fn exact(value: f64, samples: u64) -> Self {
        Self::new(value, 0.0, samples)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.estimate * factor, self.std_error * factor.abs(), self.samples)
    }

    pub fn lower(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.estimate + self.half_width
    }

    /// `μ̂^e` with the first-order propagated error, from moments of samples.
    fn from_power_mean(m: &Moments, outer: f64) -> Self {
        if m.mean <= 0.0 {
            return Self::exact(0.0, m.count);
        }
        let estimate = pow_nonneg(m.mean, outer);
        let slope = outer.abs() * pow_nonneg(m.mean, outer - 1.0);
        Self::new(estimate, slope * m.std_error(), m.count)
    }
}

/// Which per-path quantity an `L^p` estimate is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Statistic {
    /// `‖X_t‖`, estimated in `L^p`.
    Norm,
    /// `max_{t_i ≤ t} ‖X_{t_i}‖`, estimated in `L^p`.
    GridSup,
    /// `∫_0^t Σ_j ‖f^j_u‖² du`, estimated in `L^{p/2}`.
    RiemannSum,
}

/// Simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub paths: usize,
    pub seed: u64,
    /// Grid indices at which per-path samples are kept.
    pub observe: Vec<usize>,
    /// Exponents `p` for which the integrand profile is accumulated.
    pub profile_exponents: Vec<Exponent>,
    pub sample_cap: u64,
}

impl SamplingPlan {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self { paths, seed, observe: Vec::new(), profile_exponents: Vec::new(), sample_cap: DEFAULT_SAMPLE_CAP }
    }

    pub fn observe(mut self, step: usize) -> Self {
        self.observe.push(step);
        self
    }

    pub fn profile(mut self, p: Exponent) -> Self {
        self.profile_exponents.push(p);
        self
    }

    pub fn cap(mut self, cap: u64) -> Self {
        self.sample_cap = cap;
        self
    }
}

/// Per-path samples at one observed grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub step: usize,
    /// `X_{t}` per path, `d` entries each.
    pub x: Vec<f64>,
    /// `W_{t}` per path, `m` entries each.
    pub w: Vec<f64>,
    /// Running grid supremum of `‖X‖` per path.
    pub sup: Vec<f64>,
    /// `∫_0^t Σ_j ‖f^j_u‖² du` per path.
    pub riemann: Vec<f64>,
}

/// `‖Σ_j ‖f^j_{t_i}‖²‖_{L^{p/2}}` on each step of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pub p: Exponent,
    pub norms: Vec<McEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WienerBatch {
    pub spec: IntegrandSpec,
    pub seed: u64,
    pub paths: usize,
    /// Grid steps simulated per path.
    pub simulated_steps: usize,
    pub observations: Vec<Observation>,
    pub profiles: Vec<StepProfile>,
    /// Mean of all drawn increments per Wiener component.
    pub increment_mean: Vec<f64>,
}

/// Output of one chunk of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchChunk {
    index: usize,
    observations: Vec<Observation>,
    /// `[exponent][step]`
    profile: Vec<Vec<Moments>>,
    increment_sum: Vec<f64>,
}

/// Compiled integrand plus plan; shareable across worker threads.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: IntegrandSpec,
    plan: SamplingPlan,
    /// Rule index per `(step, j)`, `u32::MAX` for zero.
    table: Vec<u32>,
    /// `Some(g)` when `Σ_j ‖f^j‖²` is deterministic on the step.
    deterministic: Vec<Option<f64>>,
    observe: Vec<usize>,
    last_step: usize,
}

const NO_RULE: u32 = u32::MAX;

impl Sampler {
    pub fn new(spec: &IntegrandSpec, plan: &SamplingPlan) -> Result<Self> {
        spec.check()?;
        if plan.paths < 2 {
            return Err(Error::Config(format!("need at least 2 paths, got {}", plan.paths)));
        }
        let mut observe = plan.observe.clone();
        if observe.is_empty() {
            observe.push(spec.steps);
        }
        observe.sort_unstable();
        observe.dedup();
        if let Some(&bad) = observe.iter().find(|&&s| s > spec.steps) {
            return Err(Error::Config(format!("observation step {bad} beyond grid of {}", spec.steps)));
        }
        let last_step = *observe.last().unwrap_or(&0);

        let per_path = (observe.len() * (spec.d + spec.m + 2)) as u64;
        let profile = (plan.profile_exponents.len() * last_step * 3) as u64;
        let requested = (plan.paths as u64).saturating_mul(per_path).saturating_add(profile);
        if requested > plan.sample_cap {
            return Err(Error::Resource { requested, cap: plan.sample_cap });
        }

        let mut table = vec![NO_RULE; spec.steps * spec.m];
        for (n, e) in spec.rules.iter().enumerate() {
            for i in e.steps.0..e.steps.1 {
                table[i * spec.m + e.j] = n as u32;
            }
        }
        let deterministic = (0..spec.steps)
            .map(|i| {
                let mut g = 0.0;
                for j in 0..spec.m {
                    match table[i * spec.m + j] {
                        NO_RULE => {}
                        r => match &spec.rules[r as usize].rule {
                            Rule::Const(c) => g += norm_sq(c),
                            _ => return None,
                        },
                    }
                }
                Some(g)
            })
            .collect();
        Ok(Self { spec: spec.clone(), plan: plan.clone(), table, deterministic, observe, last_step })
    }

    pub fn chunk_count(&self) -> usize {
        self.plan.paths.div_ceil(CHUNK_PATHS)
    }

    /// Simulates paths `index·CHUNK_PATHS ..` of the batch.
    pub fn run_chunk(&self, index: usize) -> BatchChunk {
        let spec = &self.spec;
        let (d, m) = (spec.d, spec.m);
        let start = index * CHUNK_PATHS;
        let end = (start + CHUNK_PATHS).min(self.plan.paths);
        let n = end - start;
        let sqrt_h = libm::sqrt(spec.step_size());
        let riemann_scale = spec.horizon / spec.steps as f64;
        let exps: Vec<f64> = self.plan.profile_exponents.iter().map(|p| p.get() / 2.0).collect();

        let mut observations: Vec<Observation> = self
            .observe
            .iter()
            .map(|&step| Observation {
                step,
                x: Vec::with_capacity(n * d),
                w: Vec::with_capacity(n * m),
                sup: Vec::with_capacity(n),
                riemann: Vec::with_capacity(n),
            })
            .collect();
        let mut profile = vec![vec![Moments::default(); self.last_step]; exps.len()];
        let mut increment_sum = vec![0.0; m];

        let mut w = vec![0.0; m];
        let mut x = vec![0.0; d];
        let mut dw = vec![0.0; m];
        for path in start..end {
            let mut rng = rng::stream(self.plan.seed, path as u64);
            w.iter_mut().for_each(|v| *v = 0.0);
            x.iter_mut().for_each(|v| *v = 0.0);
            let mut sup_sq: f64 = 0.0;
            let mut g_sum = 0.0;
            let mut next_obs = 0;
            let record = |obs: &mut Observation, x: &[f64], w: &[f64], sup_sq: f64, g_sum: f64| {
                obs.x.extend_from_slice(x);
                obs.w.extend_from_slice(w);
                obs.sup.push(libm::sqrt(sup_sq));
                obs.riemann.push(g_sum * riemann_scale);
            };
            if self.observe[0] == 0 {
                record(&mut observations[0], &x, &w, sup_sq, g_sum);
                next_obs = 1;
            }
            for i in 0..self.last_step {
                for v in dw.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = sqrt_h * z;
                }
                let mut g = 0.0;
                for (j, &dwj) in dw.iter().enumerate() {
                    let r = self.table[i * m + j];
                    if r == NO_RULE {
                        continue;
                    }
                    let rule = &spec.rules[r as usize].rule;
                    let factor = rule.factor(&w);
                    let c = rule.coefficient();
                    let mut c_sq = 0.0;
                    for (xk, ck) in x.iter_mut().zip(c) {
                        *xk += ck * factor * dwj;
                        c_sq += ck * ck;
                    }
                    g += c_sq * factor * factor;
                }
                if self.deterministic[i].is_none() {
                    for (acc, &q) in profile.iter_mut().zip(&exps) {
                        acc[i].push(pow_nonneg(g, q));
                    }
                }
                for (wk, dk) in w.iter_mut().zip(&dw) {
                    *wk += dk;
                }
                for (s, dk) in increment_sum.iter_mut().zip(&dw) {
                    *s += dk;
                }
                g_sum += g;
                sup_sq = sup_sq.max(norm_sq(&x));
                if next_obs < self.observe.len() && self.observe[next_obs] == i + 1 {
                    record(&mut observations[next_obs], &x, &w, sup_sq, g_sum);
                    next_obs += 1;
                }
            }
        }
        BatchChunk { index, observations, profile, increment_sum }
    }

    /// Joins chunk outputs (in any order) into a batch.
    pub fn assemble(&self, mut chunks: Vec<BatchChunk>) -> Result<WienerBatch> {
        chunks.sort_by_key(|c| c.index);
        if chunks.len() != self.chunk_count() || chunks.iter().enumerate().any(|(i, c)| c.index != i) {
            return Err(Error::Config("chunk set is incomplete".into()));
        }
        let spec = &self.spec;
        let mut observations: Vec<Observation> = self
            .observe
            .iter()
            .map(|&step| Observation { step, x: Vec::new(), w: Vec::new(), sup: Vec::new(), riemann: Vec::new() })
            .collect();
        let mut moments = vec![vec![Moments::default(); self.last_step]; self.plan.profile_exponents.len()];
        let mut increment_sum = vec![0.0; spec.m];
        for chunk in chunks {
            for (dst, src) in observations.iter_mut().zip(chunk.observations) {
                dst.x.extend(src.x);
                dst.w.extend(src.w);
                dst.sup.extend(src.sup);
                dst.riemann.extend(src.riemann);
            }
            for (dst, src) in moments.iter_mut().zip(&chunk.profile) {
                for (a, b) in dst.iter_mut().zip(src) {
                    *a = a.merge(b);
                }
            }
            for (a, b) in increment_sum.iter_mut().zip(&chunk.increment_sum) {
                *a += b;
            }
        }
        let paths = self.plan.paths as u64;
        let profiles = self
            .plan
            .profile_exponents
            .iter()
            .zip(moments)
            .map(|(&p, per_step)| StepProfile {
                p,
                norms: per_step
                    .iter()
                    .enumerate()
                    .map(|(i, mo)| match self.deterministic[i] {
                        Some(g) => McEstimate::exact(g, paths),
                        None => McEstimate::from_power_mean(mo, 2.0 / p.get()),
                    })
                    .collect(),
            })
            .collect();
        let draws = (self.plan.paths * self.last_step) as f64;
        let increment_mean = increment_sum.iter().map(|s| if draws > 0.0 { s / draws } else { 0.0 }).collect();
        Ok(WienerBatch {
            spec: spec.clone(),
            seed: self.plan.seed,
            paths: self.plan.paths,
            simulated_steps: self.last_step,
            observations,
            profiles,
            increment_mean,
        })
    }

    /// Runs every chunk sequentially.
    pub fn run(&self) -> Result<WienerBatch> {
        let chunks = (0..self.chunk_count()).map(|i| self.run_chunk(i)).collect();
        self.assemble(chunks)
    }
}

/// Simulates `paths` paths observed at the horizon.
pub fn simulate(spec: &IntegrandSpec, paths: usize, seed: u64) -> Result<WienerBatch> {
    simulate_with(spec, &SamplingPlan::new(paths, seed))
}

pub fn simulate_with(spec: &IntegrandSpec, plan: &SamplingPlan) -> Result<WienerBatch> {
    Sampler::new(spec, plan)?.run()
}

impl WienerBatch {
    pub fn observation(&self, step: usize) -> Result<&Observation> {
        self.observations
            .iter()
            .find(|o| o.step == step)
            .ok_or_else(|| Error::Config(format!("grid step {step} was not observed in this batch")))
    }

    /// Grid times `t_0, …, t_S`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.spec.steps).map(|i| self.spec.time(i)).collect()
    }

    /// `(E s^q)^{outer}` for the chosen statistic, `q = p` (norms) or `p/2`
    /// (Riemann sums).
    fn power_estimate(&self, step: usize, statistic: Statistic, p: Exponent, squared: bool) -> Result<McEstimate> {
        let obs = self.observation(step)?;
        let p = p.get();
        let d = self.spec.d;
        let powered: Vec<f64> = match statistic {
            Statistic::Norm => obs.x.chunks_exact(d).map(|v| pow_nonneg(norm_sq(v), p / 2.0)).collect(),
            Statistic::GridSup => obs.sup.iter().map(|&s| pow_nonneg(s * s, p / 2.0)).collect(),
            Statistic::RiemannSum => obs.riemann.iter().map(|&r| pow_nonneg(r, p / 2.0)).collect(),
        };
        let q = if statistic == Statistic::RiemannSum { p / 2.0 } else { p };
        let outer = if squared { 2.0 / q } else { 1.0 / q };
        let m = Moments::from_slice(&powered);
        if m.count == 0 {
            return Err(Error::Config("batch is empty".into()));
        }
        // Constant samples: report the exact value instead of a noisy power.
        if powered.iter().all(|&v| v == powered[0]) {
            return Ok(McEstimate::exact(pow_nonneg(powered[0], outer), m.count));
        }
        Ok(McEstimate::from_power_mean(&m, outer))
    }

    /// Estimate of `‖s‖_{L^p}` (norm and supremum) or `‖s‖_{L^{p/2}}`
    /// (Riemann sum) at grid step `step`.
    pub fn estimate_lp(&self, step: usize, statistic: Statistic, p: Exponent) -> Result<McEstimate> {
        self.power_estimate(step, statistic, p, false)
    }

    /// `∫_0^{t_step} ‖Σ_j ‖f^j_u‖²‖_{L^{p/2}} du`: exact for the step
    /// integrand (one-sided trapezoid on each panel). The standard error is the
    /// sum of per-step errors, which bounds the error of the sum.
    pub fn profile_integral(&self, step: usize, p: Exponent) -> Result<McEstimate> {
        let profile = self
            .profiles
            .iter()
            .find(|pr| pr.p == p)
            .ok_or_else(|| Error::Config(format!("no integrand profile for p = {p}")))?;
        if step > profile.norms.len() {
            return Err(Error::Config(format!("profile covers {} steps, asked {step}", profile.norms.len())));
        }
        let h = self.spec.horizon / self.spec.steps as f64;
        let values: Vec<f64> = profile.norms[..step].iter().map(|e| e.estimate).collect();
        let errors: Vec<f64> = profile.norms[..step].iter().map(|e| e.std_error).collect();
        Ok(McEstimate::new(
            pairwise_sum(&values) * self.spec.horizon / self.spec.steps as f64,
            pairwise_sum(&errors) * h,
            self.paths as u64,
        ))
    }

    /// Evaluates continuous inequalities at grid step `step`, all on this batch.
    pub fn evaluate(&self, step: usize, p: Exponent, ids: &[InequalityId]) -> Result<Vec<InequalityReport>> {
        let t = self.spec.time(step);
        ids.iter()
            .map(|&id| {
                let constant = id.constant(p);
                let (lhs, rhs, note) = match id {
                    InequalityId::CBurk1 => (
                        self.power_estimate(step, Statistic::Norm, p, true)?,
                        self.estimate_lp(step, Statistic::RiemannSum, p)?,
                        None,
                    ),
                    InequalityId::CBurk2 => (
                        self.power_estimate(step, Statistic::GridSup, p, true)?,
                        self.estimate_lp(step, Statistic::RiemannSum, p)?,
                        Some(GRID_SUP_NOTE),
                    ),
                    InequalityId::ZakaiMain => {
                        (self.power_estimate(step, Statistic::Norm, p, true)?, self.profile_integral(step, p)?, None)
                    }
                    InequalityId::ZakaiMax => (
                        self.power_estimate(step, Statistic::GridSup, p, true)?,
                        self.profile_integral(step, p)?,
                        Some(GRID_SUP_NOTE),
                    ),
                    other => return Err(Error::Config(format!("{other} is not a continuous-time inequality"))),
                };
                Ok(mc_report(id, p, At::Time(t), lhs, rhs.scaled(constant), constant, note))
            })
            .collect()
    }
}

const GRID_SUP_NOTE: &str = "supremum taken over grid points only (biased low)";

fn mc_report(
    id: InequalityId,
    p: Exponent,
    at: At,
    lhs: McEstimate,
    rhs: McEstimate,
    constant: f64,
    note: Option<&str>,
) -> InequalityReport {
    let verdict = if lhs.upper() <= rhs.lower() {
        Verdict::Satisfied
    } else if lhs.lower() > rhs.upper() {
        Verdict::Violation
    } else {
        Verdict::Inconclusive
    };
    InequalityReport {
        id,
        p,
        at,
        lhs: lhs.estimate,
        rhs: rhs.estimate,
        constant,
        ratio: ratio(lhs.estimate, rhs.estimate),
        satisfied: verdict == Verdict::Satisfied,
        verdict,
        lhs_estimate: Some(lhs),
        rhs_estimate: Some(rhs),
        note: note.map(String::from),
    }
}

/// The plan `eval_continuous` uses for time step `step`.
pub fn plan_for(paths: usize, seed: u64, step: usize, p: Exponent) -> SamplingPlan {
    SamplingPlan::new(paths, seed).observe(step).profile(p)
}

/// Monte Carlo evaluation of continuous inequalities at time `t`, all ids on
/// one batch (common random numbers).
pub fn eval_continuous_many(
    spec: &IntegrandSpec,
    t: f64,
    p: Exponent,
    ids: &[InequalityId],
    paths: usize,
    seed: u64,
) -> Result<Vec<InequalityReport>> {
    spec.check()?;
    let step = spec.grid_index(t)?;
    let batch = simulate_with(spec, &plan_for(paths, seed, step, p))?;
    batch.evaluate(step, p, ids)
}

pub fn eval_continuous(
    spec: &IntegrandSpec,
    t: f64,
    p: Exponent,
    id: InequalityId,
    paths: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let mut reports = eval_continuous_many(spec, t, p, &[id], paths, seed)?;
    Ok(reports.remove(0))
}

/// `E|Z|^p` for standard normal `Z`, by adaptive quadrature.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Precondition(format!("moment order {p} must be a finite p ≥ 0")));
    }
    let peak = libm::sqrt(p);
    let upper = peak + 40.0;
    let norm = 2.0 / libm::sqrt(2.0 * core::f64::consts::PI);
    let q = quad::integrate(
        |z| norm * pow_nonneg(z, p) * libm::exp(-0.5 * z * z),
        0.0,
        upper,
        &[peak, peak + 10.0],
        Tolerance { abs: 1e-300, rel: 1e-12 },
    )?;
    Ok(q.value)
}
