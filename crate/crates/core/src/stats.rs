//! Deterministic reductions.

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so the result is independent of how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Running count / mean / centred second moment.
///
/// Merging follows Chan et al.; merging partial results in a fixed order gives
/// a schedule-independent total.
/// `(base + delta)^e - base^e` for `base ≥ 0`, `base + delta ≥ 0`, accurate
/// when `|delta| ≪ base`.
pub fn pow_increment(base: f64, delta: f64, e: f64) -> f64 {
    if e == 1.0 {
        return delta;
    }
    if base <= 0.0 {
        return pow_nonneg((base + delta).max(0.0), e);
    }
    let rel = (delta / base).max(-1.0);
    pow_nonneg(base, e) * libm::expm1(e * libm::log1p(rel))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn from_slice(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = pairwise_sum(values) / n;
        let mut dev = alloc::vec::Vec::with_capacity(values.len());
        dev.extend(values.iter().map(|v| (v - mean) * (v - mean)));
        Self { count: values.len() as u64, mean, m2: pairwise_sum(&dev) }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        Self { count, mean: self.mean + delta * nb / n, m2: self.m2 + other.m2 + delta * delta * na * nb / n }
    }

    /// Unbiased sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        libm::sqrt(self.variance() / self.count as f64)
    }
}

/// Euclidean norm squared.
#[inline]
pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(norm_sq(v))
}

/// `‖v‖^p` computed from the squared norm so that `p = 2` stays exact.
#[inline]
pub fn norm_pow(v: &[f64], p: f64) -> f64 {
    pow_nonneg(norm_sq(v), p / 2.0)
}

/// `x^e` for `x ≥ 0`, with `0^e = 0` for `e > 0` and `x^1 = x` exactly.
#[inline]
pub fn pow_nonneg(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if x == 0.0 {
        if e == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        libm::pow(x, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pow_increment_is_accurate_for_tiny_steps() {
        // (1 + 1e-12)^3 - 1 = 3e-12 + 3e-24 + …
        let got = pow_increment(1.0, 1e-12, 3.0);
        assert!((got - (3e-12 + 3e-24)).abs() < 3e-27, "{got}");
        assert_eq!(pow_increment(4.0, 5.0, 0.5), 1.0);
        assert_eq!(pow_increment(0.0, 4.0, 0.5), 2.0);
        assert_eq!(pow_increment(2.0, -0.5, 1.0), -0.5);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn merged_moments_match_direct() {
        let v: Vec<f64> = (0..257).map(|i| libm::sin(i as f64) * 3.0).collect();
        let direct = Moments::from_slice(&v);
        let mut a = Moments::default();
        v[..100].iter().for_each(|&x| a.push(x));
        let b = Moments::from_slice(&v[100..]);
        let merged = a.merge(&b);
        assert_eq!(merged.count, 257);
        assert!((merged.mean - direct.mean).abs() < 1e-14);
        assert!((merged.variance() - direct.variance()).abs() < 1e-12);
    }

    #[test]
    fn pow_edge_cases() {
        assert_eq!(pow_nonneg(0.0, 2.5), 0.0);
        assert_eq!(pow_nonneg(0.0, 0.0), 1.0);
        assert_eq!(pow_nonneg(3.0, 1.0), 3.0);
        assert_eq!(norm_pow(&[3.0, 4.0], 2.0), 25.0);
    }
}
