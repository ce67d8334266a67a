use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::integrals::Integrator;
use crate::isoperimetry::{shape_measure, Shape};
use crate::quadrature::legendre_unit;
use crate::report::VerificationReport;
use crate::weights::{ball_perimeter, default_growth_grid, growth_constant, isoperimetric_constant, WeightVector};

use super::morrey::check_support_in;

/// Fraction of the largest admissible `c₁` that is used.
pub const SERIES_SAFETY: f64 = 0.99;
/// Points in the default `C_p/p_*^{1-1/D}` grid.
pub const GROWTH_GRID_POINTS: usize = 400;

fn require_dimension(a: &WeightVector) -> Result<f64> {
    let d = a.effective_dimension();
    if d <= 1.0 {
        return Err(Error::InvalidArgument(format!("exponential integrability needs D > 1 (D = {d})")));
    }
    Ok(d)
}

/// `D/(D-1)`.
pub fn trudinger_exponent(a: &WeightVector) -> Result<f64> {
    let d = require_dimension(a)?;
    Ok(d / (d - 1.0))
}

/// `C₀`: supremum of `C_p / p_*^{1-1/D}` over the default p-grid together
/// with its value at `p = 1` (`p_* = D/(D-1)`), which the first series term uses.
pub fn growth_c0(a: &WeightVector) -> Result<f64> {
    let d = require_dimension(a)?;
    let grid = default_growth_grid(a, GROWTH_GRID_POINTS);
    let at_one = (1.0 / isoperimetric_constant(a)) / (d / (d - 1.0)).powf(1.0 - 1.0 / d);
    if d <= 1.1 {
        return Ok(at_one);
    }
    Ok(growth_constant(a, &grid)?.max(at_one))
}

/// `Σ_{k≥0} k^k/k! x^k` (with `0^0 = 1`); diverges for `x ≥ 1/e`.
pub fn series_bound(x: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::E.recip()).contains(&x) {
        return Err(Error::InvalidArgument(format!("series argument {x} must lie in [0, 1/e)")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 1.0;
    let lx = x.ln();
    for k in 1..10_000_000u64 {
        let kf = k as f64;
        let term = (kf * kf.ln() - crate::special::ln_gamma(kf + 1.0) + kf * lx).exp();
        sum += term;
        if term < 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence("series bound".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCriterion {
    pub c0: f64,
    pub c1: f64,
    /// `(D/(D-1))(c₁C₀)^{D/(D-1)}`, below `1/e`.
    pub x: f64,
    /// Bound on the normalized functional implied by the series.
    pub c2: f64,
}

/// Admissible `c₁` from `(D/(D-1))(c₁C₀)^{D/(D-1)} < 1/e`, scaled by
/// [`SERIES_SAFETY`], with the resulting series bound.
pub fn series_criterion(a: &WeightVector) -> Result<SeriesCriterion> {
    let d = require_dimension(a)?;
    let c0 = growth_c0(a)?;
    let c1 = SERIES_SAFETY * ((d - 1.0) / (d * std::f64::consts::E)).powf((d - 1.0) / d) / c0;
    let x = d / (d - 1.0) * (c1 * c0).powf(d / (d - 1.0));
    Ok(SeriesCriterion { c0, c1, x, c2: series_bound(x)? })
}

pub fn trudinger_functional(a: &WeightVector, u: &dyn TestFunction, shape: &Shape, c1: f64, integ: &Integrator) -> Result<f64> {
    trudinger_functional_with_exponent(a, u, shape, c1, trudinger_exponent(a)?, integ)
}

/// `(1/m(Ω)) ∫_Ω exp((c₁|u|/‖∇u‖_{L^D})^γ) x^A dx`; equals 1 for `u ≡ 0`.
pub fn trudinger_functional_with_exponent(
    a: &WeightVector,
    u: &dyn TestFunction,
    shape: &Shape,
    c1: f64,
    gamma: f64,
    integ: &Integrator,
) -> Result<f64> {
    let d = require_dimension(a)?;
    if !(c1 > 0.0) {
        return Err(Error::InvalidArgument(format!("c1 = {c1} must be positive")));
    }
    check_support_in(a, u, shape)?;
    let m = shape_measure(a, shape)?;
    let g = integ.integrate_gradient(a, u, |v| v.powf(d))?.powf(1.0 / d);
    if g == 0.0 {
        return Ok(1.0);
    }
    let excess = integ.integrate_value(a, u, |v| ((c1 * v.abs() / g).powf(gamma)).exp_m1())?;
    if !excess.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: vec![], value: excess });
    }
    Ok((m + excess) / m)
}

pub fn trudinger_check(
    a: &WeightVector,
    u: &dyn TestFunction,
    shape: &Shape,
    c1: f64,
    constant: f64,
    provenance: &str,
    integ: &Integrator,
) -> Result<VerificationReport> {
    let f = trudinger_functional(a, u, shape, c1, integ)?;
    let margin = constant - f;
    Ok(VerificationReport::new("trudinger", f, constant, constant, margin, margin >= 0.0)
        .with_meta("function", u.describe())
        .with_meta("shape", shape.describe())
        .with_meta("c1", c1)
        .with_meta("provenance", provenance))
}

fn logsumexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Gauss points per graded piece of the log-family integral.
const PIECE_ORDER: usize = 30;

/// `ln ∫_0^{len} exp(h(t)) dt` for convex `h`. Breakpoints are graded
/// geometrically from both ends so that endpoint peaks of unit width are
/// resolved on intervals of any length; a fixed Gauss rule per piece avoids
/// chasing the rounding noise of `h` at large arguments.
fn ln_integral_convex<H: Fn(f64) -> f64>(h: H, len: f64) -> Result<f64> {
    let peak = h(0.0).max(h(len));
    let mut pts = vec![0.0, len];
    let mut s = 1.0 / 64.0;
    while s < len / 2.0 {
        pts.push(s);
        pts.push(len - s);
        s *= 2.0;
    }
    pts.push(len / 2.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // convexity bounds each piece by width·exp(endpoint max); largest first,
    // pieces that cannot change the sum are skipped
    let mut pieces: Vec<(f64, f64, f64)> = pts
        .windows(2)
        .map(|w| (w[0], w[1], (w[1] - w[0]) * (h(w[0]).max(h(w[1])) - peak).exp()))
        .collect();
    pieces.sort_by(|p, q| q.2.total_cmp(&p.2));
    let mut total = 0.0;
    for (lo, hi, bound) in pieces {
        if bound <= 1e-17 * total || bound == 0.0 {
            continue;
        }
        total += legendre_unit(PIECE_ORDER).mapped(lo, hi).integrate(|t| (h(t) - peak).exp());
    }
    if !total.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: vec![len], value: total });
    }
    Ok(peak + total.ln())
}

/// `ln` of the normalized functional with exponent `γ` for the truncated
/// logarithm `min(L, ln 1/|x|)₊` on `B₁*`.
///
/// With `κ = c₁^γ (P L)^{-γ/D}` and `f(s) = κs^γ - Ds` the functional is
/// `e^{f(L)} + D ∫_0^L e^{f(s)} ds`. Evaluated in log space; the half of
/// the integral next to `s = L` uses `f(L-σ) - f(L)` in cancellation-free form.
pub fn log_family_ln_functional(a: &WeightVector, c1: f64, gamma: f64, level: f64) -> Result<f64> {
    let d = require_dimension(a)?;
    if !(c1 > 0.0 && gamma > 0.0 && level > 0.0) {
        return Err(Error::InvalidArgument("c1, gamma and level must be positive".into()));
    }
    let p = ball_perimeter(a);
    let ln_kappa = gamma * c1.ln() - gamma / d * (p * level).ln();
    let big = (ln_kappa + gamma * level.ln()).exp();
    let f_l = big - d * level;
    let half = level / 2.0;
    let f = |s: f64| (ln_kappa + gamma * s.ln()).exp() - d * s;
    // f(L - σ) - f(L)
    let near_end = |sigma: f64| big * (gamma * (-sigma / level).ln_1p()).exp_m1() + d * sigma;
    let ln_left = ln_integral_convex(|s| if s == 0.0 { 0.0 } else { f(s) }, half)?;
    let ln_right = f_l + ln_integral_convex(near_end, half)?;
    let ln_int = logsumexp(ln_left, ln_right);
    Ok(logsumexp(f_l, d.ln() + ln_int))
}
