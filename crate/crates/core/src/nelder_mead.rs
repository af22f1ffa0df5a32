//! Budgeted Nelder–Mead minimization with restarts on simplex collapse.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Edge length of the initial (and every restarted) simplex.
    pub initial_step: f64,
    /// Restart once the simplex diameter falls below this.
    pub collapse_diameter: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.25,
            collapse_diameter: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub restarts: usize,
}

struct Counted<F> {
    f: F,
    used: usize,
    budget: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        Some(v)
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` using at most `budget` evaluations.
    pub fn minimize<F>(&self, f: F, x0: &[f64], budget: usize) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut counted = Counted { f, used: 0, budget: budget.max(1), best: None };
        let mut restarts = 0;
        let mut start = x0.to_vec();
        while self.run(&mut counted, &start).is_some() {
            restarts += 1;
            start = counted.best.as_ref().map(|(x, _)| x.clone()).unwrap_or_else(|| x0.to_vec());
        }
        let (x, value) = counted.best.unwrap_or_else(|| (x0.to_vec(), f64::INFINITY));
        Minimum { x, value, evaluations: counted.used, restarts }
    }

    /// Runs until collapse (`Some`) or budget exhaustion (`None`).
    fn run<F: FnMut(&[f64]) -> f64>(&self, c: &mut Counted<F>, start: &[f64]) -> Option<()> {
        let k = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
        simplex.push((start.to_vec(), c.eval(start)?));
        for i in 0..k {
            let mut x = start.to_vec();
            x[i] += self.initial_step;
            let v = c.eval(&x)?;
            simplex.push((x, v));
        }
        if k == 0 {
            // Nothing to move; spend the budget re-evaluating the single point.
            loop {
                c.eval(start)?;
            }
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < self.collapse_diameter {
                return Some(());
            }
            let mut centroid = vec![0.0; k];
            for (x, _) in &simplex[..k] {
                centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / k as f64);
            }
            let toward = |from: &[f64], coef: f64| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, w)| c + coef * (w - c)).collect()
            };
            let worst = simplex[k].clone();
            let xr = toward(&worst.0, -self.reflection);
            let fr = c.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = toward(&xr, self.expansion);
                let fe = c.eval(&xe)?;
                simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[k - 1].1 {
                simplex[k] = (xr, fr);
                continue;
            }
            let (xc, fc, accept) = if fr < worst.1 {
                let xc = toward(&xr, self.contraction);
                let fc = c.eval(&xc)?;
                (xc, fc, fc <= fr)
            } else {
                let xc = toward(&worst.0, self.contraction);
                let fc = c.eval(&xc)?;
                (xc, fc, fc < worst.1)
            };
            if accept {
                simplex[k] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + self.shrink * (v - b)).collect();
                let v = c.eval(&x)?;
                *vertex = (x, v);
            }
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            d = d.max(libm::sqrt(dist));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let m = NelderMead::default().minimize(
            |x| (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5),
            &[0.0, 0.0],
            500,
        );
        assert!(m.value < 1e-12, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] + 0.5).abs() < 1e-6);
        assert!(m.evaluations <= 500);
    }

    #[test]
    fn rosenbrock_with_restarts() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let m = NelderMead::default().minimize(rosen, &[-1.2, 1.0], 5000);
        assert!(m.value < 1e-10, "{m:?}");
        assert!(m.restarts >= 1);
    }

    #[test]
    fn respects_budget_and_is_deterministic() {
        let f = |x: &[f64]| libm::sin(3.0 * x[0]) + libm::cos(2.0 * x[1]) + 0.1 * x[0] * x[1];
        let a = NelderMead::default().minimize(f, &[0.3, 0.1], 37);
        let b = NelderMead::default().minimize(f, &[0.3, 0.1], 37);
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 37);
    }
}
