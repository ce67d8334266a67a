//! Weighted integrals of a test function and of its gradient norm, routed
//! through the radial reduction for radial functions and through tensor
//! quadrature over the support box otherwise.

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::function::TestFunction;
use crate::quadrature::{function_rule, radial_integrate, Decay};
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Radial,
    Tensor,
}

/// Values and gradient norms of `u` at the nodes of a tensor rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
}

impl Samples {
    pub fn integrate_value<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let t: Vec<f64> = self.weights.iter().zip(&self.values).map(|(w, v)| w * f(*v)).collect();
        pairwise_sum(&t)
    }

    pub fn integrate_gradient<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let t: Vec<f64> = self.weights.iter().zip(&self.grad_norms).map(|(w, g)| w * f(*g)).collect();
        pairwise_sum(&t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    /// Gauss nodes per panel and axis.
    pub order: usize,
    /// Panels per axis for the tensor route.
    pub panels: usize,
    pub exec: Exec,
    /// Forces the tensor route even for radial functions.
    pub force_tensor: bool,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { order: 12, panels: 6, exec: Exec::default(), force_tensor: false }
    }
}

impl Integrator {
    pub fn with_resolution(order: usize, panels: usize) -> Self {
        Self { order, panels, ..Self::default() }
    }

    pub fn tensor(self) -> Self {
        Self { force_tensor: true, ..self }
    }

    pub fn route(&self, u: &dyn TestFunction) -> Route {
        if !self.force_tensor && u.radial().is_some() {
            Route::Radial
        } else {
            Route::Tensor
        }
    }

    /// Samples `u` on the tensor rule covering its support in ℝⁿ_*.
    pub fn sample(&self, a: &WeightVector, u: &dyn TestFunction) -> Result<Samples> {
        if u.dim() != a.dim() {
            return Err(Error::InvalidArgument(format!("function dimension {} does not match weight dimension {}", u.dim(), a.dim())));
        }
        let Some(rule) = function_rule(a, u, self.order, self.panels)? else {
            return Ok(Samples { weights: vec![], values: vec![], grad_norms: vec![], nodes: vec![] });
        };
        let rows = self.exec.map_range(rule.len(), |i| {
            let x = rule.node(i);
            let v = u.value(x);
            let g = u.gradient(x).iter().map(|c| c * c).sum::<f64>().sqrt();
            (v, g)
        });
        let mut values = Vec::with_capacity(rows.len());
        let mut grad_norms = Vec::with_capacity(rows.len());
        for (i, (v, g)) in rows.into_iter().enumerate() {
            if !v.is_finite() || !g.is_finite() {
                let bad = if v.is_finite() { g } else { v };
                return Err(Error::NonFiniteIntegrand { node: rule.node(i).to_vec(), value: bad });
            }
            values.push(v);
            grad_norms.push(g);
        }
        let nodes = (0..rule.len()).map(|i| rule.node(i).to_vec()).collect();
        Ok(Samples { weights: rule.weights().to_vec(), values, grad_norms, nodes })
    }

    fn radial_parts(u: &dyn TestFunction) -> Result<(f64, Vec<f64>)> {
        let g = u.radial().expect("radial route");
        let r = g.support_radius();
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!("{} has unbounded support", u.describe())));
        }
        Ok((r, g.breakpoints()))
    }

    /// `∫_{ℝⁿ_*} f(u(x)) x^A dx`.
    pub fn integrate_value<F: Fn(f64) -> f64>(&self, a: &WeightVector, u: &dyn TestFunction, f: F) -> Result<f64> {
        match self.route(u) {
            Route::Radial => {
                let (r, bp) = Self::radial_parts(u)?;
                let g = u.radial().expect("radial route");
                radial_integrate(a, |s| f(g.profile(s)), Decay::Compact(r), &bp)
            }
            Route::Tensor => Ok(self.sample(a, u)?.integrate_value(f)),
        }
    }

    /// `∫_{ℝⁿ_*} f(|∇u(x)|) x^A dx`.
    pub fn integrate_gradient<F: Fn(f64) -> f64>(&self, a: &WeightVector, u: &dyn TestFunction, f: F) -> Result<f64> {
        match self.route(u) {
            Route::Radial => {
                let (r, bp) = Self::radial_parts(u)?;
                let g = u.radial().expect("radial route");
                radial_integrate(a, |s| f(g.derivative(s).abs()), Decay::Compact(r), &bp)
            }
            Route::Tensor => Ok(self.sample(a, u)?.integrate_gradient(f)),
        }
    }

    /// `(‖u‖_{L^q(x^A)}, ‖∇u‖_{L^p(x^A)})` in one pass.
    pub fn norms(&self, a: &WeightVector, u: &dyn TestFunction, q: f64, p: f64) -> Result<(f64, f64)> {
        match self.route(u) {
            Route::Radial => Ok((
                self.integrate_value(a, u, |v| v.abs().powf(q))?.powf(1.0 / q),
                self.integrate_gradient(a, u, |g| g.powf(p))?.powf(1.0 / p),
            )),
            Route::Tensor => {
                let s = self.sample(a, u)?;
                Ok((
                    s.integrate_value(|v| v.abs().powf(q)).powf(1.0 / q),
                    s.integrate_gradient(|g| g.powf(p)).powf(1.0 / p),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Bump, PlateauProfile, Radial, Smoothness};

    #[test]
    fn radial_and_tensor_routes_agree() {
        for a in [WeightVector::new(vec![1.0, 1.0]).unwrap(), WeightVector::new(vec![0.0, 0.5, 0.0]).unwrap()] {
            let u = Bump::new(vec![0.0; a.dim()], 1.3);
            let radial = Integrator::default();
            let tensor = Integrator::with_resolution(12, 8).tensor();
            assert_eq!(radial.route(&u), Route::Radial);
            for q in [1.0, 3.0] {
                let r = radial.integrate_value(&a, &u, |v| v.powf(q)).unwrap();
                let t = tensor.integrate_value(&a, &u, |v| v.powf(q)).unwrap();
                assert!((r / t - 1.0).abs() < 1e-5, "{r} {t}");
            }
            let r = radial.integrate_gradient(&a, &u, |g| g * g).unwrap();
            let t = tensor.integrate_gradient(&a, &u, |g| g * g).unwrap();
            assert!((r / t - 1.0).abs() < 1e-5, "{r} {t}");
        }
    }

    #[test]
    fn plateau_integral_matches_closed_form() {
        let a = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let u = Radial {
            n: 2,
            profile: PlateauProfile { radius: 0.5, band: 1e-9, height: 2.0 },
            smoothness: Smoothness::C1,
            label: "plateau".into(),
        };
        let v = Integrator::default().integrate_value(&a, &u, |x| x).unwrap();
        let exact = 2.0 * 0.5f64.powi(4) / 8.0;
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn empty_support_is_zero() {
        let a = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let u = Bump::new(vec![-3.0, 1.0], 1.0);
        assert_eq!(Integrator::default().integrate_value(&a, &u, |v| v).unwrap(), 0.0);
    }
}
