//! The monomial weight `x^A = |x_1|^{A_1}···|x_n|^{A_n}` and every closed-form
//! constant attached to it.
//!
//! Sobolev constants follow the convention
//! `‖u‖_{L^{p*}(x^A)} ≤ C_p ‖∇u‖_{L^p(x^A)}`, while the isoperimetric constant
//! `C₁ = P(B₁*)/m(B₁*)^{(D-1)/D}` is the lower bound of the isoperimetric
//! quotient. The two are reciprocal at p = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_beta, ln_gamma};

/// Nonnegative exponent vector of the weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    exponents: Vec<f64>,
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.exponents
    }
}

impl WeightVector {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidWeight("dimension must be at least 1".into()));
        }
        if let Some(a) = exponents.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::InvalidWeight(format!("exponent {a} is not a finite nonnegative number")));
        }
        Ok(Self { exponents })
    }

    /// The unweighted case `A = 0` in dimension `n`.
    pub fn zeros(n: usize) -> Self {
        Self { exponents: vec![0.0; n.max(1)] }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// D = A₁ + ··· + Aₙ + n.
    pub fn effective_dimension(&self) -> f64 {
        self.exponents.iter().sum::<f64>() + self.dim() as f64
    }

    /// Number of strictly positive exponents.
    pub fn positive_count(&self) -> usize {
        self.exponents.iter().filter(|a| **a > 0.0).count()
    }

    pub fn is_weighted(&self, axis: usize) -> bool {
        self.exponents[axis] > 0.0
    }

    /// Evaluates `∏ |x_i|^{A_i}`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, xi)| xi.abs().powf(*a))
            .product()
    }

    /// Membership in the closure of ℝⁿ_* (xᵢ ≥ 0 whenever Aᵢ > 0).
    pub fn in_closed_region(&self, x: &[f64]) -> bool {
        self.exponents.iter().zip(x).all(|(a, xi)| *a == 0.0 || *xi >= 0.0)
    }

    /// Exponents of the change of variables `y_i = x_i^{1-α_i}`:
    /// `A_i = α_i/(1-α_i)`.
    pub fn from_gradient_powers(alpha: &[f64]) -> Result<Self> {
        if let Some(a) = alpha.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!("alpha entry {a} is outside [0, 1)")));
        }
        Self::new(alpha.iter().map(|a| a / (1.0 - a)).collect())
    }
}

/// Conjugate exponent p' = p/(p-1); infinite at p = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conjugate {
    Infinite,
    Finite(f64),
}

impl Conjugate {
    pub fn of(p: f64) -> Self {
        if p == 1.0 {
            Conjugate::Infinite
        } else {
            Conjugate::Finite(p / (p - 1.0))
        }
    }

    /// 1/p', which is 1 at p' = ∞.
    pub fn reciprocal(self) -> f64 {
        match self {
            Conjugate::Infinite => 1.0,
            Conjugate::Finite(q) => 1.0 / q,
        }
    }
}

/// Exponent bookkeeping for a given effective dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub d: f64,
}

impl Exponents {
    pub fn new(d: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::ExponentOutOfRange(format!("p = {p} must satisfy p >= 1")));
        }
        Ok(Self { p, d })
    }

    /// Rejects p ≥ D with a regime-specific error.
    pub fn require_subcritical(&self) -> Result<()> {
        if self.p == self.d {
            Err(Error::CriticalExponent { p: self.p, d: self.d })
        } else if self.p > self.d {
            Err(Error::SupercriticalExponent { p: self.p, d: self.d })
        } else {
            Ok(())
        }
    }

    /// p_* = pD/(D-p).
    pub fn critical(&self) -> Result<f64> {
        self.require_subcritical()?;
        Ok(self.p * self.d / (self.d - self.p))
    }

    pub fn conjugate(&self) -> Conjugate {
        Conjugate::of(self.p)
    }

    /// Hölder exponent α = 1 - D/p, defined for p > D.
    pub fn holder_alpha(&self) -> Result<f64> {
        if self.p <= self.d {
            return Err(Error::ExponentOutOfRange(format!(
                "Morrey exponent needs p > D (p = {}, D = {})",
                self.p, self.d
            )));
        }
        Ok(1.0 - self.d / self.p)
    }
}

pub fn effective_dimension(a: &WeightVector) -> f64 {
    a.effective_dimension()
}

pub fn critical_exponent(a: &WeightVector, p: f64) -> Result<f64> {
    Exponents::new(a.effective_dimension(), p)?.critical()
}

fn ln_ball_measure(a: &WeightVector) -> f64 {
    let d = a.effective_dimension();
    let num: f64 = a.exponents().iter().map(|ai| ln_gamma((ai + 1.0) / 2.0)).sum();
    num - a.positive_count() as f64 * std::f64::consts::LN_2 - ln_gamma(1.0 + d / 2.0)
}

/// m(B₁*) = ∏Γ((Aᵢ+1)/2) / (2^k Γ(1 + D/2)).
pub fn ball_measure(a: &WeightVector) -> f64 {
    ln_ball_measure(a).exp()
}

/// P(B₁*) = D·m(B₁*).
pub fn ball_perimeter(a: &WeightVector) -> f64 {
    a.effective_dimension() * ball_measure(a)
}

/// C₁ = D·m(B₁*)^{1/D}, the minimum of P(Ω)/m(Ω)^{(D-1)/D}.
pub fn isoperimetric_constant(a: &WeightVector) -> f64 {
    let d = a.effective_dimension();
    d * (ln_ball_measure(a) / d).exp()
}

/// Measure of the full ball B₁ (all orthants), 2^k·m(B₁*).
pub fn full_ball_measure(a: &WeightVector) -> f64 {
    (ln_ball_measure(a) + a.positive_count() as f64 * std::f64::consts::LN_2).exp()
}

/// Isoperimetric quotient of the full ball: 2^{k/D}·C₁.
pub fn full_ball_quotient(a: &WeightVector) -> f64 {
    let d = a.effective_dimension();
    2f64.powf(a.positive_count() as f64 / d) * isoperimetric_constant(a)
}

/// Best constant C_p in ‖u‖_{L^{p*}(x^A)} ≤ C_p‖∇u‖_{L^p(x^A)}.
///
/// At p = 1 this is 1/C₁. For 1 < p < D it is evaluated through log-Gamma:
/// `C_p = D^{1-1/D-1/p} ((p-1)/(D-p))^{1/p'} (p'Γ(D)/(Γ(D/p)Γ(D/p')))^{1/D} / C₁`.
pub fn sobolev_constant(a: &WeightVector, p: f64) -> Result<f64> {
    let d = a.effective_dimension();
    let ex = Exponents::new(d, p)?;
    ex.require_subcritical()?;
    let c1 = isoperimetric_constant(a);
    match ex.conjugate() {
        Conjugate::Infinite => Ok(1.0 / c1),
        Conjugate::Finite(pc) => {
            let ln_c = -c1.ln() + (1.0 - 1.0 / d - 1.0 / p) * d.ln()
                + ((p - 1.0) / (d - p)).ln() / pc
                + (pc.ln() + ln_gamma(d) - ln_gamma(d / p) - ln_gamma(d / pc)) / d;
            Ok(ln_c.exp())
        }
    }
}

/// Constant K·b^{-1/D} of the elementary proof for monotone functions,
/// K = √n / min Aᵢ and b = ∏ 1/(Aᵢ+1).
pub fn monotone_sobolev_constant(a: &WeightVector) -> Result<f64> {
    let min = a.exponents().iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::InvalidWeight(
            "monotone constant requires every exponent to be positive (it blows up as A_i -> 0)".into(),
        ));
    }
    let k = (a.dim() as f64).sqrt() / min;
    let ln_b: f64 = a.exponents().iter().map(|ai| -(ai + 1.0).ln()).sum();
    Ok(k * (-ln_b / a.effective_dimension()).exp())
}

/// One-dimensional Sobolev quotient of φ(r) = (a + b r^{p'})^{1-m/p} against r^{m-1}dr:
/// `J = m^{-1/p} ((p-1)/(m-p))^{1/p'} [B(m/p, m/p')/p']^{-1/m}`.
pub fn talenti_j(m: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::ExponentOutOfRange(format!("talenti_j needs p > 1, got {p}")));
    }
    if p >= m {
        return Err(Error::ExponentOutOfRange(format!("talenti_j needs p < m (p = {p}, m = {m})")));
    }
    let pc = p / (p - 1.0);
    let ln_j = -m.ln() / p + ((p - 1.0) / (m - p)).ln() / pc - (ln_beta(m / p, m / pc) - pc.ln()) / m;
    Ok(ln_j.exp())
}

/// C_p / p_*^{1-1/D}; bounded on 1 < p < D.
pub fn cp_growth_ratio(a: &WeightVector, p: f64) -> Result<f64> {
    let d = a.effective_dimension();
    if !(p > 1.0) {
        return Err(Error::ExponentOutOfRange(format!("growth ratio needs p > 1, got {p}")));
    }
    let c = sobolev_constant(a, p)?;
    let ps = critical_exponent(a, p)?;
    Ok(c / ps.powf(1.0 - 1.0 / d))
}

/// Maximum of `cp_growth_ratio` over a p-grid; serves as C₀ in the Trudinger series.
pub fn growth_constant(a: &WeightVector, p_grid: &[f64]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for &p in p_grid {
        best = best.max(cp_growth_ratio(a, p)?);
    }
    Ok(best)
}

/// Default grid over [1.1, D - 0.01] (geometric toward D).
pub fn default_growth_grid(a: &WeightVector, points: usize) -> Vec<f64> {
    let d = a.effective_dimension();
    let (lo, hi) = (1.1f64, d - 0.01);
    if hi <= lo {
        return vec![(1.0 + d) / 2.0];
    }
    let points = points.max(2);
    (0..points)
        .map(|i| {
            // cluster points near D, where the ratio varies fastest
            let t = i as f64 / (points - 1) as f64;
            let gap = (d - lo) * ((d - hi) / (d - lo)).powf(t);
            d - gap
        })
        .collect()
}
