use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::function::{Smoothness, TestFunction};
use crate::integrals::Integrator;
use crate::quadrature::composite_box_rule;
use crate::region::AxisBox;
use crate::report::VerificationReport;
use crate::weights::{critical_exponent, sobolev_constant, WeightVector};

/// Relative agreement required between the two pipelines.
pub const COV_PIPELINE_TOL: f64 = 1e-3;

/// Constant bookkeeping of the substitution `y_i = x_i^{1-α_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovConstants {
    /// `A_i = α_i/(1-α_i)`.
    pub a: Vec<f64>,
    /// `D' = n + Σ A_i`.
    pub d: f64,
    pub p_star: f64,
    /// Sharp constant of the weighted inequality in `y`.
    pub c_p: f64,
    /// Jacobian `dx/dy = Γ y^A` with `Γ = ∏ 1/(1-α_i)`.
    pub jacobian: f64,
    /// `min_i (1 - α_i)`, from `x_i^{α_i} u_{x_i} = (1-α_i) v_{y_i}`.
    pub min_factor: f64,
    /// `max(1, n^{p/2-1})`, comparing `|∇v|^p` with `Σ|v_{y_i}|^p`.
    pub norm_factor: f64,
    /// `C_p Γ^{-1/D'} κ^{1/p} / min(1-α_i)`.
    pub constant: f64,
}

pub fn cov_constants(alpha: &[f64], p: f64) -> Result<CovConstants> {
    let a = WeightVector::from_gradient_powers(alpha)?;
    let d = a.effective_dimension();
    let c_p = sobolev_constant(&a, p)?;
    let p_star = critical_exponent(&a, p)?;
    let jacobian: f64 = alpha.iter().map(|t| 1.0 / (1.0 - t)).product();
    let min_factor = alpha.iter().map(|t| 1.0 - t).fold(1.0f64, f64::min);
    let norm_factor = (alpha.len() as f64).powf(p / 2.0 - 1.0).max(1.0);
    let constant = c_p * jacobian.powf(-1.0 / d) * norm_factor.powf(1.0 / p) / min_factor;
    Ok(CovConstants { a: a.exponents().to_vec(), d, p_star, c_p, jacobian, min_factor, norm_factor, constant })
}

/// Integrals of the unweighted formulation in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovIntegrals {
    /// `∫ |u|^{p_*} dx` over ℝⁿ_*.
    pub value: f64,
    /// `Σ_i ∫ |x_i|^{pα_i} |u_{x_i}|^p dx` over ℝⁿ_*.
    pub gradient: f64,
}

fn region_weight(alpha: &[f64]) -> Result<WeightVector> {
    WeightVector::from_gradient_powers(alpha)
}

/// Direct quadrature in `x`: each gradient term carries its own one-axis
/// power weight `x_i^{pα_i}`, integrated exactly by Gauss–Jacobi.
pub fn cov_integrals_x(alpha: &[f64], p: f64, u: &dyn TestFunction, integ: &Integrator) -> Result<CovIntegrals> {
    let consts = cov_constants(alpha, p)?;
    let region = region_weight(alpha)?;
    let n = alpha.len();
    if u.dim() != n {
        return Err(Error::InvalidArgument("function dimension does not match alpha".into()));
    }
    let Some(b) = u.support().clip_to_region(&region) else {
        return Ok(CovIntegrals { value: 0.0, gradient: 0.0 });
    };
    let flat = composite_box_rule(&WeightVector::zeros(n), &b, integ.order, integ.panels)?;
    let value = flat.integrate_with(integ.exec, |x| u.value(x).abs().powf(consts.p_star));
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = p * alpha[i];
        let rule = composite_box_rule(&WeightVector::new(e)?, &b, integ.order, integ.panels)?;
        terms.push(rule.integrate_with(integ.exec, |x| u.gradient(x)[i].abs().powf(p)));
    }
    Ok(CovIntegrals { value, gradient: pairwise_sum(&terms) })
}

/// `v(y) = u(x)` with `x_i = y_i^{1/(1-α_i)}` (sign-preserving on free axes).
pub struct Transported<'a> {
    pub inner: &'a dyn TestFunction,
    pub alpha: Vec<f64>,
}

impl Transported<'_> {
    fn to_x(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.alpha)
            .map(|(v, t)| if *t == 0.0 { *v } else { v.max(0.0).powf(1.0 / (1.0 - t)) })
            .collect()
    }
}

impl TestFunction for Transported<'_> {
    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.inner.value(&self.to_x(y))
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let g = self.inner.gradient(&self.to_x(y));
        g.iter()
            .zip(y.iter().zip(&self.alpha))
            .map(|(gi, (yi, t))| {
                if *t == 0.0 {
                    *gi
                } else {
                    let ai = t / (1.0 - t);
                    gi * (1.0 + ai) * yi.max(0.0).powf(ai)
                }
            })
            .collect()
    }

    fn support(&self) -> AxisBox {
        let s = self.inner.support();
        let map = |v: f64, t: f64| if t == 0.0 { v } else { v.max(0.0).powf(1.0 - t) };
        AxisBox {
            lo: s.lo.iter().zip(&self.alpha).map(|(v, t)| map(*v, *t)).collect(),
            hi: s.hi.iter().zip(&self.alpha).map(|(v, t)| map(*v, *t)).collect(),
        }
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn describe(&self) -> String {
        format!("transport({}, alpha={:?})", self.inner.describe(), self.alpha)
    }
}

/// The same integrals through the weighted pipeline in `y`, scaled back by
/// the Jacobian: `Γ ∫|v|^{p_*} y^A` and `Γ ∫ Σ(1-α_i)^p |v_{y_i}|^p y^A`.
pub fn cov_integrals_y(alpha: &[f64], p: f64, u: &dyn TestFunction, integ: &Integrator) -> Result<CovIntegrals> {
    let consts = cov_constants(alpha, p)?;
    let a = WeightVector::new(consts.a.clone())?;
    let v = Transported { inner: u, alpha: alpha.to_vec() };
    let Some(b) = v.support().clip_to_region(&a) else {
        return Ok(CovIntegrals { value: 0.0, gradient: 0.0 });
    };
    let rule = composite_box_rule(&a, &b, integ.order, integ.panels)?;
    let value = rule.integrate_with(integ.exec, |y| v.value(y).abs().powf(consts.p_star));
    let gradient = rule.integrate_with(integ.exec, |y| {
        v.gradient(y).iter().zip(alpha).map(|(g, t)| ((1.0 - t) * g.abs()).powf(p)).sum::<f64>()
    });
    Ok(CovIntegrals { value: consts.jacobian * value, gradient: consts.jacobian * gradient })
}

/// `‖u‖_{L^{p_*}(ℝⁿ_*)} ≤ C (Σ_i ∫ |x_i|^{pα_i}|u_{x_i}|^p dx)^{1/p}` with
/// `C` transported from the weighted constant.
pub fn cov_verify(alpha: &[f64], p: f64, u: &dyn TestFunction, integ: &Integrator, tol: f64) -> Result<VerificationReport> {
    let consts = cov_constants(alpha, p)?;
    let x = cov_integrals_x(alpha, p, u, integ)?;
    if !(x.gradient > 0.0) {
        return Err(Error::InvalidArgument(format!("{} has zero weighted gradient", u.describe())));
    }
    let lhs = x.value.powf(1.0 / consts.p_star);
    let grad = x.gradient.powf(1.0 / p);
    let rhs = consts.constant * grad;
    let margin = rhs - lhs;
    Ok(VerificationReport::new("change_of_variables", lhs, rhs, consts.constant, margin, margin >= -tol * grad)
        .with_meta("function", u.describe())
        .with_meta("alpha", alpha.to_vec())
        .with_meta("p", p)
        .with_meta("ratio", lhs / grad)
        .with_meta("provenance", "closed-form")
        .with_meta("constants", serde_json::to_value(&consts).expect("serializable")))
}

/// Relative differences `(value, gradient)` between the two pipelines.
pub fn cov_pipeline_agreement(alpha: &[f64], p: f64, u: &dyn TestFunction, integ: &Integrator) -> Result<(f64, f64)> {
    let x = cov_integrals_x(alpha, p, u, integ)?;
    let y = cov_integrals_y(alpha, p, u, integ)?;
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    Ok((rel(x.value, y.value), rel(x.gradient, y.gradient)))
}
