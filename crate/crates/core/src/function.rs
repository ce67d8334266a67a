//! Compactly supported test functions with gradient access.

use serde::{Deserialize, Serialize};

use crate::region::AxisBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C1,
    Lipschitz,
}

/// Radial profile `u(x) = g(|x|)` about the origin.
pub trait RadialFunction: Sync {
    fn profile(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
    /// `g(r) = 0` for `r ≥ support_radius`; infinite for unbounded support.
    fn support_radius(&self) -> f64;
    /// Points where `g` or `g'` is not smooth (cutoff joins, plateau edges).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// A scalar function on ℝⁿ with compact support.
pub trait TestFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Analytic gradient where available; central differences otherwise.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        central_difference_gradient(|y| self.value(y), x)
    }
    /// Axis box containing the support.
    fn support(&self) -> AxisBox;
    /// Radius of a ball about the origin containing the support.
    fn support_radius(&self) -> f64 {
        let b = self.support();
        b.lo.iter()
            .zip(&b.hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C1
    }
    /// `Some` when the function is radial about the origin.
    fn radial(&self) -> Option<&dyn RadialFunction> {
        None
    }
    fn describe(&self) -> String;
}

/// Step used by the central-difference fallback: ε^{1/3}(1 + |x|).
pub fn difference_step(x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    f64::EPSILON.cbrt() * (1.0 + norm)
}

pub fn central_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let h = difference_step(x);
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn radial_gradient(g_prime: f64, x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    if r == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|xi| g_prime * xi / r).collect()
}

/// Quintic smoothstep: 0 for t ≤ 0, 1 for t ≥ 1, C² in between.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smoothstep_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (t - 1.0) * (t - 1.0)
    }
}

/// `amplitude·(1 - s²)^power` with `s² = Σ((xᵢ - cᵢ)/σᵢ)²`, zero for s ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub amplitude: f64,
    pub power: u32,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        let n = center.len();
        Self { center, radii: vec![radius; n], amplitude: 1.0, power: 4 }
    }

    pub fn anisotropic(center: Vec<f64>, radii: Vec<f64>, amplitude: f64) -> Self {
        Self { center, radii, amplitude, power: 4 }
    }

    fn s2(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.radii)
            .map(|((xi, ci), ri)| ((xi - ci) / ri).powi(2))
            .sum()
    }

    fn is_radial(&self) -> bool {
        self.center.iter().all(|c| *c == 0.0) && self.radii.iter().all(|r| *r == self.radii[0])
    }
}

impl RadialFunction for Bump {
    fn profile(&self, r: f64) -> f64 {
        let s2 = (r / self.radii[0]).powi(2);
        if s2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s2).powi(self.power as i32)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        let rho = self.radii[0];
        let s2 = (r / rho).powi(2);
        if s2 >= 1.0 {
            0.0
        } else {
            let k = self.power as f64;
            -self.amplitude * k * (1.0 - s2).powi(self.power as i32 - 1) * 2.0 * r / (rho * rho)
        }
    }

    fn support_radius(&self) -> f64 {
        self.radii[0]
    }
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s2 = self.s2(x);
        if s2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s2).powi(self.power as i32)
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s2 = self.s2(x);
        if s2 >= 1.0 {
            return vec![0.0; x.len()];
        }
        let k = self.power as f64;
        let common = -self.amplitude * k * (1.0 - s2).powi(self.power as i32 - 1) * 2.0;
        x.iter()
            .zip(&self.center)
            .zip(&self.radii)
            .map(|((xi, ci), ri)| common * (xi - ci) / (ri * ri))
            .collect()
    }

    fn support(&self) -> AxisBox {
        AxisBox {
            lo: self.center.iter().zip(&self.radii).map(|(c, r)| c - r).collect(),
            hi: self.center.iter().zip(&self.radii).map(|(c, r)| c + r).collect(),
        }
    }

    fn radial(&self) -> Option<&dyn RadialFunction> {
        if self.is_radial() {
            Some(self)
        } else {
            None
        }
    }

    fn describe(&self) -> String {
        format!("bump(center={:?}, radii={:?}, amplitude={})", self.center, self.radii, self.amplitude)
    }
}

/// Generic radial function in dimension `n` built from a profile.
pub struct Radial<G: RadialFunction> {
    pub n: usize,
    pub profile: G,
    pub smoothness: Smoothness,
    pub label: String,
}

impl<G: RadialFunction> TestFunction for Radial<G> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile.profile(norm(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        radial_gradient(self.profile.derivative(norm(x)), x)
    }

    fn support(&self) -> AxisBox {
        let r = self.profile.support_radius();
        AxisBox { lo: vec![-r; self.n], hi: vec![r; self.n] }
    }

    fn support_radius(&self) -> f64 {
        self.profile.support_radius()
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn radial(&self) -> Option<&dyn RadialFunction> {
        Some(&self.profile)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Profile `(a + b r^{p'})^{1-D/p}` multiplied by a smooth cutoff that is 1
/// on `[0, R]` and 0 beyond `2R` (no cutoff when `R` is infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalProfile {
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub cutoff: f64,
}

impl ExtremalProfile {
    fn pc(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn exponent(&self) -> f64 {
        1.0 - self.d / self.p
    }

    pub fn raw(&self, r: f64) -> f64 {
        (self.a + self.b * r.powf(self.pc())).powf(self.exponent())
    }

    pub fn raw_derivative(&self, r: f64) -> f64 {
        let pc = self.pc();
        let base = self.a + self.b * r.powf(pc);
        self.exponent() * base.powf(self.exponent() - 1.0) * self.b * pc * r.powf(pc - 1.0)
    }

    fn eta(&self, r: f64) -> (f64, f64) {
        if !self.cutoff.is_finite() || r <= self.cutoff {
            return (1.0, 0.0);
        }
        let t = (r - self.cutoff) / self.cutoff;
        (1.0 - smoothstep(t), -smoothstep_derivative(t) / self.cutoff)
    }
}

impl RadialFunction for ExtremalProfile {
    fn profile(&self, r: f64) -> f64 {
        let (eta, _) = self.eta(r);
        if eta == 0.0 {
            0.0
        } else {
            eta * self.raw(r)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        let (eta, deta) = self.eta(r);
        if eta == 0.0 && deta == 0.0 {
            return 0.0;
        }
        eta * self.raw_derivative(r) + deta * self.raw(r)
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.cutoff
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.cutoff.is_finite() {
            vec![self.cutoff, 2.0 * self.cutoff]
        } else {
            Vec::new()
        }
    }
}

/// Smoothed indicator: `height` on `[0, ρ]`, quintic decay to 0 on `[ρ, ρ+ε]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauProfile {
    pub radius: f64,
    pub band: f64,
    pub height: f64,
}

impl RadialFunction for PlateauProfile {
    fn profile(&self, r: f64) -> f64 {
        self.height * (1.0 - smoothstep((r - self.radius) / self.band))
    }

    fn derivative(&self, r: f64) -> f64 {
        -self.height * smoothstep_derivative((r - self.radius) / self.band) / self.band
    }

    fn support_radius(&self) -> f64 {
        self.radius + self.band
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.radius, self.radius + self.band]
    }
}

/// Truncated logarithm `min(L, ln(1/r))₊`, the Moser family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProfile {
    pub level: f64,
}

impl RadialFunction for LogProfile {
    fn profile(&self, r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (-r.ln()).min(self.level)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        if r >= 1.0 || r <= (-self.level).exp() {
            0.0
        } else {
            -1.0 / r
        }
    }

    fn support_radius(&self) -> f64 {
        1.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![(-self.level).exp(), 1.0]
    }
}

/// `x ↦ u(λx)`.
pub struct Dilated<'a> {
    inner: &'a dyn TestFunction,
    lambda: f64,
    radial: Option<DilatedProfile<'a>>,
}

impl<'a> Dilated<'a> {
    pub fn new(inner: &'a dyn TestFunction, lambda: f64) -> Self {
        let radial = inner.radial().map(|g| DilatedProfile { inner: g, lambda });
        Self { inner, lambda, radial }
    }
}

struct DilatedProfile<'a> {
    inner: &'a dyn RadialFunction,
    lambda: f64,
}

impl RadialFunction for DilatedProfile<'_> {
    fn profile(&self, r: f64) -> f64 {
        self.inner.profile(self.lambda * r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.lambda * self.inner.derivative(self.lambda * r)
    }
    fn support_radius(&self) -> f64 {
        self.inner.support_radius() / self.lambda
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints().iter().map(|b| b / self.lambda).collect()
    }
}

impl TestFunction for Dilated<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v * self.lambda).collect();
        self.inner.value(&y)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = x.iter().map(|v| v * self.lambda).collect();
        self.inner.gradient(&y).into_iter().map(|g| g * self.lambda).collect()
    }

    fn support(&self) -> AxisBox {
        self.inner.support().scaled(1.0 / self.lambda)
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn radial(&self) -> Option<&dyn RadialFunction> {
        self.radial.as_ref().map(|g| g as &dyn RadialFunction)
    }

    fn describe(&self) -> String {
        format!("dilate({}, {})", self.inner.describe(), self.lambda)
    }
}

/// `x ↦ c·u(x)`.
pub struct Scaled<'a> {
    inner: &'a dyn TestFunction,
    factor: f64,
    radial: Option<ScaledProfile<'a>>,
}

impl<'a> Scaled<'a> {
    pub fn new(inner: &'a dyn TestFunction, factor: f64) -> Self {
        let radial = inner.radial().map(|g| ScaledProfile { inner: g, factor });
        Self { inner, factor, radial }
    }
}

struct ScaledProfile<'a> {
    inner: &'a dyn RadialFunction,
    factor: f64,
}

impl RadialFunction for ScaledProfile<'_> {
    fn profile(&self, r: f64) -> f64 {
        self.factor * self.inner.profile(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.factor * self.inner.derivative(r)
    }
    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

impl TestFunction for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.inner.gradient(x).into_iter().map(|g| g * self.factor).collect()
    }

    fn support(&self) -> AxisBox {
        self.inner.support()
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn radial(&self) -> Option<&dyn RadialFunction> {
        self.radial.as_ref().map(|g| g as &dyn RadialFunction)
    }

    fn describe(&self) -> String {
        format!("{}*{}", self.factor, self.inner.describe())
    }
}

/// Closure-backed test function; gradient by central differences unless supplied.
pub struct FnFunction<F, G = fn(&[f64]) -> Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub n: usize,
    pub f: F,
    pub grad: Option<G>,
    pub support: AxisBox,
    pub smoothness: Smoothness,
    pub label: String,
}

impl<F> FnFunction<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(support: AxisBox, f: F, label: &str) -> Self {
        Self {
            n: support.dim(),
            f,
            grad: None,
            support,
            smoothness: Smoothness::C1,
            label: label.to_string(),
        }
    }
}

impl<F, G> TestFunction for FnFunction<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x),
            None => central_difference_gradient(&self.f, x),
        }
    }

    fn support(&self) -> AxisBox {
        self.support.clone()
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_gradient_matches_central_differences() {
        let b = Bump::anisotropic(vec![1.0, 2.0], vec![0.7, 0.4], 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.random_range(0.3..1.7), rng.random_range(1.6..2.4)];
            let g = b.gradient(&x);
            let fd = central_difference_gradient(|y| b.value(y), &x);
            for i in 0..2 {
                assert!((g[i] - fd[i]).abs() < 1e-6, "{g:?} vs {fd:?}");
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let b = Bump::new(vec![2.0, 2.0], 0.5);
        assert_eq!(b.value(&[2.6, 2.0]), 0.0);
        assert_eq!(b.value(&[2.0, 2.0]), 1.0);
        assert!(b.radial().is_none());
        assert!(Bump::new(vec![0.0, 0.0], 1.0).radial().is_some());
    }

    #[test]
    fn extremal_profile_derivative() {
        let e = ExtremalProfile { d: 4.0, p: 2.0, a: 1.0, b: 1.0, cutoff: 5.0 };
        assert_eq!(e.profile(0.0), 1.0);
        for &r in &[0.3, 1.0, 4.0, 6.0, 9.5] {
            let h = 1e-6;
            let fd = (e.profile(r + h) - e.profile(r - h)) / (2.0 * h);
            assert!((fd - e.derivative(r)).abs() < 1e-7, "r = {r}");
        }
        assert_eq!(e.profile(10.0), 0.0);
    }

    #[test]
    fn dilation_and_scaling() {
        let b = Bump::new(vec![1.0, 1.0], 0.5);
        let d = Dilated::new(&b, 2.0);
        assert_eq!(d.value(&[0.5, 0.5]), 1.0);
        let s = Scaled::new(&b, 5.0);
        assert_eq!(s.value(&[1.0, 1.0]), 5.0);
    }

    #[test]
    fn fallback_gradient_is_second_order() {
        let f = FnFunction::new(AxisBox::unit(2), |x: &[f64]| (x[0] * 3.0).sin() * x[1].exp(), "trig");
        let x = [0.4, 0.2];
        let g = f.gradient(&x);
        let exact = [3.0 * (1.2f64).cos() * 0.2f64.exp(), 1.2f64.sin() * 0.2f64.exp()];
        assert!((g[0] - exact[0]).abs() < 1e-9 && (g[1] - exact[1]).abs() < 1e-9);
    }
}
