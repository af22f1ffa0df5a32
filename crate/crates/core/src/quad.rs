//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The panel with the largest Kronrod/Gauss difference is bisected until the
//! summed difference meets the tolerance. Callers pass the points where the
//! integrand is known to be non-smooth as breakpoints so that no panel straddles
//! a kink.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maximum number of panels before giving up.
const MAX_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of per-panel error estimates.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-10 }
    }
}

/// Kronrod estimate and QUADPACK's calibrated error estimate on `[a, b]`.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut k_abs = WGK[7] * fc.abs();
    let mut samples = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        samples[j] = (f1, f2);
        k += WGK[j] * (f1 + f2);
        k_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((samples[j].0 - mean).abs() + (samples[j].1 - mean).abs());
    }
    let (asc, k_abs) = (asc * half.abs(), k_abs * half.abs());
    let mut err = ((k - g) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * libm::pow(200.0 * err / asc, 1.5).min(1.0);
    }
    if k_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * k_abs);
    }
    (k * half, err)
}

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint strictly
/// inside the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: Tolerance) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    let mut edges: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(a);
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b && x.is_finite()).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| {
            let (value, error) = kronrod(&f, w[0], w[1]);
            Panel { lo: w[0], hi: w[1], value, error }
        })
        .collect();
    let width = b - a;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature { achieved: error });
        }
        if error <= target {
            panels.sort_by(|x, y| x.lo.total_cmp(&y.lo));
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Quadrature { value, error, panels: panels.len() });
        }
        let (worst, _) =
            panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("at least one panel");
        let Panel { lo, hi, .. } = panels[worst];
        if panels.len() >= MAX_PANELS || hi - lo <= 4.0 * f64::EPSILON * width {
            return Err(Error::Quadrature { achieved: error });
        }
        let mid = 0.5 * (lo + hi);
        let (lv, le) = kronrod(&f, lo, mid);
        let (rv, re) = kronrod(&f, mid, hi);
        panels[worst] = Panel { lo, hi: mid, value: lv, error: le };
        panels.push(Panel { lo: mid, hi, value: rv, error: re });
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|t| (1.0 + t * t) * (1.0 - t), 0.0, 1.0, &[], Tolerance::default()).unwrap();
        assert_abs_diff_eq!(q.value, 7.0 / 12.0, epsilon = 1e-15);
        assert_eq!(q.panels, 1);
    }

    #[test]
    fn smooth_transcendental() {
        let q = integrate(libm::exp, 0.0, 2.0, &[], Tolerance::default()).unwrap();
        assert_abs_diff_eq!(q.value, libm::exp(2.0) - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kink_at_breakpoint() {
        // ∫_0^1 |t - 0.3|^{0.5} dt = (0.3^{1.5} + 0.7^{1.5}) / 1.5
        let exact = (libm::pow(0.3, 1.5) + libm::pow(0.7, 1.5)) / 1.5;
        let q = integrate(|t| libm::sqrt((t - 0.3).abs()), 0.0, 1.0, &[0.3], Tolerance::default()).unwrap();
        assert_abs_diff_eq!(q.value, exact, epsilon = 1e-10);
    }

    #[test]
    fn endpoint_singularity_converges_adaptively() {
        // ∫_0^1 t^{0.2} dt = 1/1.2
        let q = integrate(|t| libm::pow(t, 0.2), 0.0, 1.0, &[], Tolerance::default()).unwrap();
        assert_abs_diff_eq!(q.value, 1.0 / 1.2, epsilon = 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|t| 1.0 / t, 0.0, 1.0, &[], Tolerance::default());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
