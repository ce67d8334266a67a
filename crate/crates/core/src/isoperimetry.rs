//! Weighted measure and perimeter of shape families, the isoperimetric
//! quotient, and a descent search over planar star-shaped profiles.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::quadrature::{orthant_angles, polar_rule, sphere_orthant_rule};
use crate::region::{axis_moment, AxisBox, Region};
use crate::report::VerificationReport;
use crate::weights::{ball_measure, ball_perimeter, isoperimetric_constant, WeightVector};

/// Angular nodes per half-angle for curved shapes.
const ANGULAR_ORDER_2D: usize = 32;
const ANGULAR_ORDER_3D: usize = 14;
const ANGULAR_ORDER_HIGH: usize = 6;
const RADIAL_ORDER: usize = 16;
pub const MAX_STAR_COEFFS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ShapeKind {
    /// `B_r(0) ∩ ℝⁿ_*`.
    SectorBall { r: f64 },
    /// `B_r(c)`, which must lie in the closure of ℝⁿ_*.
    ShiftedBall { r: f64, c: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{Σ xᵢ²/aᵢ² < 1} ∩ ℝⁿ_*`.
    EllipsoidSector { axes: Vec<f64> },
    /// `{r(cos θ, sin θ) : 0 ≤ r < ρ(θ), 0 ≤ θ ≤ π/2}` with
    /// `ρ(θ) = Σ_j c_j cos(2jθ)`.
    Star2d { coeffs: Vec<f64> },
}

/// A shape together with its containment tag. With `symmetric` set, the
/// domain is the union of the reflections of the described piece across
/// every hyperplane `x_i = 0` with `A_i > 0`, so measure and perimeter pick
/// up a factor `2^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default)]
    pub symmetric: bool,
}

/// Serialized corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDoc {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(rename = "A")]
    pub a: WeightVector,
    pub n: usize,
}

impl Shape {
    pub fn new(kind: ShapeKind) -> Self {
        Self { kind, symmetric: false }
    }

    pub fn symmetric(kind: ShapeKind) -> Self {
        Self { kind, symmetric: true }
    }

    pub fn sector_ball(r: f64) -> Self {
        Self::new(ShapeKind::SectorBall { r })
    }

    pub fn unit_box(n: usize) -> Self {
        Self::new(ShapeKind::Box { lo: vec![0.0; n], hi: vec![1.0; n] })
    }

    pub fn describe(&self) -> String {
        let tag = if self.symmetric { " (symmetric)" } else { "" };
        match &self.kind {
            ShapeKind::SectorBall { r } => format!("sector_ball(r={r}){tag}"),
            ShapeKind::ShiftedBall { r, c } => format!("shifted_ball(r={r}, c={c:?}){tag}"),
            ShapeKind::Box { lo, hi } => format!("box({lo:?}, {hi:?}){tag}"),
            ShapeKind::EllipsoidSector { axes } => format!("ellipsoid_sector({axes:?}){tag}"),
            ShapeKind::Star2d { coeffs } => format!("star2d({coeffs:?}){tag}"),
        }
    }

    /// The dilation `λ·Ω`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * lambda).collect::<Vec<_>>();
        let kind = match &self.kind {
            ShapeKind::SectorBall { r } => ShapeKind::SectorBall { r: r * lambda },
            ShapeKind::ShiftedBall { r, c } => ShapeKind::ShiftedBall { r: r * lambda, c: s(c) },
            ShapeKind::Box { lo, hi } => ShapeKind::Box { lo: s(lo), hi: s(hi) },
            ShapeKind::EllipsoidSector { axes } => ShapeKind::EllipsoidSector { axes: s(axes) },
            ShapeKind::Star2d { coeffs } => ShapeKind::Star2d { coeffs: s(coeffs) },
        };
        Self { kind, symmetric: self.symmetric }
    }

    /// Checks the parameters against the dimension and region of `a`.
    pub fn validate(&self, a: &WeightVector) -> Result<()> {
        let n = a.dim();
        let bad = |msg: String| Err(Error::InvalidDomain(msg));
        match &self.kind {
            ShapeKind::SectorBall { r } => {
                if !(*r > 0.0 && r.is_finite()) {
                    return bad(format!("sector ball radius {r} must be positive"));
                }
            }
            ShapeKind::ShiftedBall { r, c } => {
                if c.len() != n {
                    return bad(format!("center has dimension {}, weight has {n}", c.len()));
                }
                if !(*r > 0.0 && r.is_finite()) {
                    return bad(format!("ball radius {r} must be positive"));
                }
                for i in 0..n {
                    if a.is_weighted(i) && c[i] - r < 0.0 {
                        return bad(format!("ball crosses the hyperplane x_{} = 0 where A_{} > 0", i + 1, i + 1));
                    }
                }
            }
            ShapeKind::Box { lo, hi } => {
                let b = AxisBox::new(lo.clone(), hi.clone())?;
                if b.dim() != n {
                    return bad(format!("box has dimension {}, weight has {n}", b.dim()));
                }
                b.check_in_region(a)?;
            }
            ShapeKind::EllipsoidSector { axes } => {
                if axes.len() != n || axes.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad(format!("ellipsoid semi-axes {axes:?} must be {n} positive values"));
                }
            }
            ShapeKind::Star2d { coeffs } => {
                if n != 2 {
                    return bad("star2d shapes are planar".into());
                }
                if coeffs.is_empty() || coeffs.len() > MAX_STAR_COEFFS {
                    return bad(format!("star profile needs 1..={MAX_STAR_COEFFS} coefficients"));
                }
                if star_min(coeffs) <= 0.0 {
                    return bad("star profile must be strictly positive".into());
                }
            }
        }
        Ok(())
    }

    fn symmetry_factor(&self, a: &WeightVector) -> f64 {
        if self.symmetric {
            2f64.powi(a.positive_count() as i32)
        } else {
            1.0
        }
    }
}

fn angular_order(n: usize) -> usize {
    match n {
        0..=2 => ANGULAR_ORDER_2D,
        3 => ANGULAR_ORDER_3D,
        _ => ANGULAR_ORDER_HIGH,
    }
}

pub fn star_profile(coeffs: &[f64], theta: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, c)| c * (2.0 * j as f64 * theta).cos()).sum()
}

pub fn star_profile_derivative(coeffs: &[f64], theta: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| -2.0 * j as f64 * c * (2.0 * j as f64 * theta).sin())
        .sum()
}

/// Minimum of the profile on a fine grid of `[0, π/2]`.
pub fn star_min(coeffs: &[f64]) -> f64 {
    (0..=1024)
        .map(|i| star_profile(coeffs, FRAC_PI_2 * i as f64 / 1024.0))
        .fold(f64::INFINITY, f64::min)
}

/// `(θ, w)` with `w` the weight of `cos^{A₁}θ sin^{A₂}θ dθ` on `[0, π/2]`.
fn planar_angle_rule(a: &WeightVector, order: usize) -> Vec<(f64, f64)> {
    orthant_angles(a.exponents(), order)
        .iter()
        .map(|(v, w)| (v[1].atan2(v[0]), *w))
        .collect()
}

/// Full-sphere rule in `n` dimensions for the unweighted surface measure.
fn full_sphere(n: usize, order: usize) -> crate::quadrature::QuadratureRule {
    sphere_orthant_rule(&WeightVector::zeros(n), order)
}

/// Weighted volume `m(Ω) = ∫_Ω x^A dx`.
pub fn shape_measure(a: &WeightVector, s: &Shape) -> Result<f64> {
    s.validate(a)?;
    let d = a.effective_dimension();
    let n = a.dim();
    let m = match &s.kind {
        ShapeKind::SectorBall { r } => r.powf(d) * ball_measure(a),
        ShapeKind::Box { lo, hi } => (0..n).map(|i| axis_moment(a.exponents()[i], lo[i], hi[i])).product(),
        ShapeKind::EllipsoidSector { axes } => {
            let scale: f64 = axes.iter().zip(a.exponents()).map(|(ax, ai)| ax.powf(ai + 1.0)).product();
            scale * ball_measure(a)
        }
        ShapeKind::ShiftedBall { r, c } => {
            let rule = polar_rule(&WeightVector::zeros(n), *r, n as f64 - 1.0, RADIAL_ORDER, angular_order(n));
            rule.integrate(|y| {
                let x: Vec<f64> = y.iter().zip(c).map(|(yi, ci)| yi + ci).collect();
                a.eval(&x)
            })
        }
        ShapeKind::Star2d { coeffs } => {
            let terms: Vec<f64> = planar_angle_rule(a, ANGULAR_ORDER_2D)
                .into_iter()
                .map(|(t, w)| w * star_profile(coeffs, t).powf(d) / d)
                .collect();
            pairwise_sum(&terms)
        }
    };
    Ok(m * s.symmetry_factor(a))
}

/// Weighted perimeter `P(Ω) = ∫_{∂Ω} x^A dσ`; pieces of the boundary on
/// weighted hyperplanes carry zero weight and are skipped.
pub fn shape_perimeter(a: &WeightVector, s: &Shape) -> Result<f64> {
    s.validate(a)?;
    let d = a.effective_dimension();
    let n = a.dim();
    let ex = a.exponents();
    let p = match &s.kind {
        ShapeKind::SectorBall { r } => r.powf(d - 1.0) * ball_perimeter(a),
        ShapeKind::Box { lo, hi } => {
            let mut total = 0.0;
            for i in 0..n {
                let rest: f64 = (0..n).filter(|&j| j != i).map(|j| axis_moment(ex[j], lo[j], hi[j])).product();
                // 0^0 = 1: an unweighted face on x_i = 0 is genuine boundary
                total += (lo[i].abs().powf(ex[i]) + hi[i].abs().powf(ex[i])) * rest;
            }
            total
        }
        ShapeKind::EllipsoidSector { axes } => {
            let scale: f64 = axes.iter().zip(ex).map(|(ax, ai)| ax.powf(ai + 1.0)).product();
            let rule = sphere_orthant_rule(a, angular_order(n));
            scale * rule.integrate(|t| t.iter().zip(axes).map(|(ti, ai)| (ti / ai).powi(2)).sum::<f64>().sqrt())
        }
        ShapeKind::ShiftedBall { r, c } => {
            if n == 1 {
                (c[0] - r).abs().powf(ex[0]) + (c[0] + r).abs().powf(ex[0])
            } else {
                let rule = full_sphere(n, angular_order(n));
                r.powi(n as i32 - 1)
                    * rule.integrate(|t| {
                        let x: Vec<f64> = t.iter().zip(c).map(|(ti, ci)| ci + r * ti).collect();
                        a.eval(&x)
                    })
            }
        }
        ShapeKind::Star2d { coeffs } => {
            let terms: Vec<f64> = planar_angle_rule(a, ANGULAR_ORDER_2D)
                .into_iter()
                .map(|(t, w)| {
                    let rho = star_profile(coeffs, t);
                    let dr = star_profile_derivative(coeffs, t);
                    w * rho.powf(d - 2.0) * (rho * rho + dr * dr).sqrt()
                })
                .collect();
            let mut arc = pairwise_sum(&terms);
            // radial segments on unweighted axes
            if ex[1] == 0.0 {
                arc += star_profile(coeffs, 0.0).powf(ex[0] + 1.0) / (ex[0] + 1.0);
            }
            if ex[0] == 0.0 {
                arc += star_profile(coeffs, FRAC_PI_2).powf(ex[1] + 1.0) / (ex[1] + 1.0);
            }
            arc
        }
    };
    Ok(p * s.symmetry_factor(a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub shape: String,
    pub measure: f64,
    pub perimeter: f64,
    pub quotient: f64,
    pub c1: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub discretization: String,
}

impl IsoperimetricReport {
    pub fn to_verification(&self) -> VerificationReport {
        VerificationReport::new("isoperimetric", self.perimeter, self.measure, self.c1, self.margin, self.pass)
            .with_meta("shape", self.shape.clone())
            .with_meta("quotient", self.quotient)
            .with_meta("discretization", self.discretization.clone())
    }
}

pub const ISOPERIMETRIC_TOL: f64 = 1e-6;

fn discretization(s: &Shape, n: usize) -> String {
    match s.kind {
        ShapeKind::SectorBall { .. } | ShapeKind::Box { .. } => "closed form".into(),
        ShapeKind::EllipsoidSector { .. } => format!("closed-form measure; orthant sphere rule, {} nodes per half-angle", angular_order(n)),
        ShapeKind::ShiftedBall { .. } => format!(
            "polar rule: {RADIAL_ORDER} radial nodes, {} angular nodes per half-angle",
            angular_order(n)
        ),
        ShapeKind::Star2d { .. } => format!("{} angular nodes per half-angle", ANGULAR_ORDER_2D),
    }
}

/// `Q = P/m^{(D-1)/D}` compared with the sharp constant `C₁`.
pub fn isoperimetric_quotient(a: &WeightVector, s: &Shape) -> Result<IsoperimetricReport> {
    let d = a.effective_dimension();
    let m = shape_measure(a, s)?;
    let p = shape_perimeter(a, s)?;
    let q = p / m.powf((d - 1.0) / d);
    let c1 = isoperimetric_constant(a);
    let margin = q - c1;
    Ok(IsoperimetricReport {
        shape: s.describe(),
        measure: m,
        perimeter: p,
        quotient: q,
        c1,
        margin,
        tolerance: ISOPERIMETRIC_TOL,
        pass: margin >= -ISOPERIMETRIC_TOL,
        discretization: discretization(s, a.dim()),
    })
}

/// Quotient for a batch of shapes, evaluated under `exec`.
pub fn isoperimetric_sweep(a: &WeightVector, shapes: &[Shape], exec: Exec) -> Result<Vec<IsoperimetricReport>> {
    exec.map(shapes, |s| isoperimetric_quotient(a, s)).into_iter().collect()
}

/// Splitting check: for disjoint pieces of a domain separated by weighted
/// hyperplanes (each reflected into ℝⁿ_*), the quotient of the union is at
/// least the smallest quotient among the pieces. Returns
/// `(Q(union), min_j Q(piece_j))`.
pub fn splitting_check(a: &WeightVector, pieces: &[Shape]) -> Result<(f64, f64)> {
    if pieces.is_empty() {
        return Err(Error::InvalidArgument("no pieces given".into()));
    }
    let d = a.effective_dimension();
    let mut m = 0.0;
    let mut p = 0.0;
    let mut qmin = f64::INFINITY;
    for s in pieces {
        let r = isoperimetric_quotient(a, s)?;
        m += r.measure;
        p += r.perimeter;
        qmin = qmin.min(r.quotient);
    }
    Ok((p / m.powf((d - 1.0) / d), qmin))
}

/// `(∏ wᵢ^{λᵢ}, ((Σλᵢwᵢ)/Σλᵢ)^{Σλᵢ})`.
pub fn weighted_amgm(w: &[f64], lambda: &[f64]) -> Result<(f64, f64)> {
    if w.len() != lambda.len() {
        return Err(Error::InvalidArgument("w and λ must have equal length".into()));
    }
    if w.iter().chain(lambda).any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("w and λ must be finite and nonnegative".into()));
    }
    let total: f64 = lambda.iter().sum();
    if total == 0.0 {
        return Err(Error::InvalidArgument("λ must not vanish identically".into()));
    }
    let gm = w
        .iter()
        .zip(lambda)
        .filter(|(_, l)| **l > 0.0)
        .map(|(wi, li)| wi.powf(*li))
        .product();
    let am = (w.iter().zip(lambda).map(|(wi, li)| wi * li).sum::<f64>() / total).powf(total);
    Ok((gm, am))
}

// ---------------------------------------------------------------- star search

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarSearchConfig {
    pub steps: usize,
    pub step_size: f64,
    /// Stop once the gradient norm falls below this value.
    pub gradient_tol: f64,
}

impl Default for StarSearchConfig {
    fn default() -> Self {
        Self { steps: 400, step_size: 0.5, gradient_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSearchResult {
    pub coeffs: Vec<f64>,
    /// Quotient after initialization and after every accepted step.
    pub trace: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub aborted: bool,
    pub c1: f64,
}

impl StarSearchResult {
    pub fn final_quotient(&self) -> f64 {
        *self.trace.last().expect("trace is never empty")
    }

    /// sup_θ |ρ(θ)/ρ̄ - 1| with ρ̄ the mean of ρ on the same grid.
    pub fn distance_from_constant(&self) -> f64 {
        let grid: Vec<f64> = (0..=512).map(|i| star_profile(&self.coeffs, FRAC_PI_2 * i as f64 / 512.0)).collect();
        let mean = grid.iter().sum::<f64>() / grid.len() as f64;
        grid.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn star_quotient(a: &WeightVector, coeffs: &[f64]) -> Result<f64> {
    Ok(isoperimetric_quotient(a, &Shape::new(ShapeKind::Star2d { coeffs: coeffs.to_vec() }))?.quotient)
}

/// Rescales so that `m(Ω) = m(B₁*)`.
fn normalize_area(a: &WeightVector, coeffs: &[f64]) -> Result<Vec<f64>> {
    let m = shape_measure(a, &Shape::new(ShapeKind::Star2d { coeffs: coeffs.to_vec() }))?;
    let s = (ball_measure(a) / m).powf(1.0 / a.effective_dimension());
    Ok(coeffs.iter().map(|c| c * s).collect())
}

/// Projected gradient descent of the isoperimetric quotient over star2d
/// cosine coefficients. Rejected steps (lost positivity or no decrease)
/// halve the step size; 20 consecutive rejections abort the search.
pub fn star_shape_search(a: &WeightVector, init: &[f64], config: StarSearchConfig) -> Result<StarSearchResult> {
    if a.dim() != 2 {
        return Err(Error::InvalidArgument("star search is planar".into()));
    }
    Shape::new(ShapeKind::Star2d { coeffs: init.to_vec() }).validate(a)?;
    let c1 = isoperimetric_constant(a);
    let mut coeffs = normalize_area(a, init)?;
    let mut q = star_quotient(a, &coeffs)?;
    let mut trace = vec![q];
    let mut eta = config.step_size;
    let (mut accepted, mut rejected, mut streak) = (0, 0, 0);
    let mut aborted = false;
    for _ in 0..config.steps {
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let h = 1e-4 * norm;
        let mut grad = vec![0.0; coeffs.len()];
        for j in 0..coeffs.len() {
            let mut up = coeffs.clone();
            let mut dn = coeffs.clone();
            up[j] += h;
            dn[j] -= h;
            grad[j] = (star_quotient(a, &up)? - star_quotient(a, &dn)?) / (2.0 * h);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < config.gradient_tol {
            break;
        }
        let trial: Vec<f64> = coeffs.iter().zip(&grad).map(|(c, g)| c - eta * g).collect();
        let candidate = if star_min(&trial) > 0.0 { Some(normalize_area(a, &trial)?) } else { None };
        let improved = match &candidate {
            Some(c) => {
                let qc = star_quotient(a, c)?;
                (qc < q).then_some(qc)
            }
            None => None,
        };
        match (candidate, improved) {
            (Some(c), Some(qc)) => {
                coeffs = c;
                q = qc;
                trace.push(q);
                accepted += 1;
                streak = 0;
                eta *= 1.25;
            }
            _ => {
                rejected += 1;
                streak += 1;
                eta *= 0.5;
                if streak >= 20 {
                    aborted = true;
                    break;
                }
            }
        }
    }
    Ok(StarSearchResult { coeffs, trace, accepted, rejected, aborted, c1 })
}

impl Region for ShapeRegion<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn contains(&self, x: &[f64]) -> bool {
        if !self.a.in_closed_region(x) {
            return false;
        }
        match &self.shape.kind {
            ShapeKind::SectorBall { r } => x.iter().map(|v| v * v).sum::<f64>() < r * r,
            ShapeKind::ShiftedBall { r, c } => x.iter().zip(c).map(|(v, ci)| (v - ci).powi(2)).sum::<f64>() < r * r,
            ShapeKind::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v >= l && v <= h),
            ShapeKind::EllipsoidSector { axes } => x.iter().zip(axes).map(|(v, ax)| (v / ax).powi(2)).sum::<f64>() < 1.0,
            ShapeKind::Star2d { coeffs } => {
                if x[0] < 0.0 || x[1] < 0.0 {
                    return false;
                }
                let t = x[1].atan2(x[0]);
                x[0].hypot(x[1]) < star_profile(coeffs, t)
            }
        }
    }

    fn bounding_box(&self) -> AxisBox {
        let n = self.a.dim();
        let lo_for = |i: usize, extent: f64| if self.a.is_weighted(i) { 0.0 } else { -extent };
        match &self.shape.kind {
            ShapeKind::SectorBall { r } => AxisBox { lo: (0..n).map(|i| lo_for(i, *r)).collect(), hi: vec![*r; n] },
            ShapeKind::ShiftedBall { r, c } => AxisBox::cube(c, *r),
            ShapeKind::Box { lo, hi } => AxisBox { lo: lo.clone(), hi: hi.clone() },
            ShapeKind::EllipsoidSector { axes } => {
                AxisBox { lo: (0..n).map(|i| lo_for(i, axes[i])).collect(), hi: axes.clone() }
            }
            ShapeKind::Star2d { coeffs } => {
                let rmax = coeffs.iter().map(|c| c.abs()).sum::<f64>();
                AxisBox { lo: vec![0.0; 2], hi: vec![rmax; 2] }
            }
        }
    }
}

/// Membership view of the described piece of a shape (symmetric tag
/// ignored), used by the Monte Carlo backend.
pub struct ShapeRegion<'a> {
    pub a: &'a WeightVector,
    pub shape: &'a Shape,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::monte_carlo_integrate;
    use crate::weights::full_ball_quotient;

    fn w(a: &[f64]) -> WeightVector {
        WeightVector::new(a.to_vec()).unwrap()
    }

    #[test]
    fn measure_examples() {
        let a = w(&[1.0, 1.0]);
        assert!((shape_measure(&a, &Shape::sector_ball(2.0)).unwrap() - 2.0).abs() < 1e-14);
        assert!((shape_measure(&a, &Shape::unit_box(2)).unwrap() - 0.25).abs() < 1e-15);
        let z = WeightVector::zeros(2);
        assert!((shape_measure(&z, &Shape::sector_ball(1.0)).unwrap() - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn perimeter_examples() {
        let a = w(&[1.0, 1.0]);
        assert!((shape_perimeter(&a, &Shape::sector_ball(1.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!((shape_perimeter(&a, &Shape::unit_box(2)).unwrap() - 1.0).abs() < 1e-15);
        let z = WeightVector::zeros(2);
        let s = Shape::new(ShapeKind::ShiftedBall { r: 1.0, c: vec![3.0, 3.0] });
        assert!((shape_perimeter(&z, &s).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn box_quotient_anchor() {
        let a = w(&[1.0, 1.0]);
        let r = isoperimetric_quotient(&a, &Shape::unit_box(2)).unwrap();
        assert!((r.quotient - 4f64.powf(0.75)).abs() < 1e-13);
        assert!((r.c1 - 4.0 * 8f64.powf(-0.25)).abs() < 1e-13);
        assert!(r.pass && (r.margin - 0.4505).abs() < 1e-3);
    }

    #[test]
    fn sector_balls_have_zero_margin() {
        let a = w(&[1.0, 1.0]);
        for r in [0.5, 1.0, 3.0] {
            let rep = isoperimetric_quotient(&a, &Shape::sector_ball(r)).unwrap();
            assert!(rep.margin.abs() < 1e-12);
        }
    }

    #[test]
    fn full_ball_symmetric_tag() {
        let a = w(&[1.0, 1.0]);
        let rep = isoperimetric_quotient(&a, &Shape::symmetric(ShapeKind::SectorBall { r: 1.0 })).unwrap();
        assert!((rep.quotient - full_ball_quotient(&a)).abs() < 1e-12);
        assert!((rep.quotient / rep.c1 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shifted_ball_matches_monte_carlo() {
        let a = w(&[1.0, 0.5]);
        let s = Shape::new(ShapeKind::ShiftedBall { r: 0.4, c: vec![0.6, 0.5] });
        let m = shape_measure(&a, &s).unwrap();
        let region = ShapeRegion { a: &a, shape: &s };
        let est = monte_carlo_integrate(&a, &region.bounding_box(), Some(&region), |_| 1.0, 200_000, 11, Exec::default()).unwrap();
        assert!((est.value - m).abs() < 4.0 * est.std_error);
    }

    #[test]
    fn ellipsoid_reduces_to_ball() {
        let a = w(&[0.5, 2.0, 0.0]);
        let e = Shape::new(ShapeKind::EllipsoidSector { axes: vec![1.0; 3] });
        let p = shape_perimeter(&a, &e).unwrap();
        assert!((p / ball_perimeter(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circle_star_matches_sector() {
        for a in [w(&[1.0, 1.0]), w(&[0.0, 2.5]), w(&[0.3, 0.0])] {
            let star = isoperimetric_quotient(&a, &Shape::new(ShapeKind::Star2d { coeffs: vec![1.0] })).unwrap();
            // the star covers only the positive quadrant; free axes halve the sector
            let free = 2 - a.positive_count() as i32;
            let m = shape_measure(&a, &Shape::sector_ball(1.0)).unwrap() / 2f64.powi(free);
            assert!((star.measure / m - 1.0).abs() < 1e-12);
            if a.positive_count() == 2 {
                assert!(star.margin.abs() < 1e-10);
            } else {
                assert!(star.margin > 0.0);
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let a = w(&[1.5, 0.5]);
        let shapes = [
            Shape::new(ShapeKind::ShiftedBall { r: 0.3, c: vec![0.5, 0.7] }),
            Shape::new(ShapeKind::Box { lo: vec![0.1, 0.0], hi: vec![0.4, 2.0] }),
            Shape::new(ShapeKind::Star2d { coeffs: vec![1.0, 0.2, -0.05] }),
        ];
        for s in &shapes {
            let q = isoperimetric_quotient(&a, s).unwrap().quotient;
            for lam in [0.5, 2.0] {
                let ql = isoperimetric_quotient(&a, &s.scaled(lam)).unwrap().quotient;
                assert!((ql / q - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn crossing_shapes_rejected() {
        let a = w(&[1.0, 0.0]);
        let s = Shape::new(ShapeKind::ShiftedBall { r: 1.0, c: vec![0.5, 0.0] });
        assert!(matches!(shape_measure(&a, &s), Err(Error::InvalidDomain(_))));
        assert!(shape_measure(&a, &Shape::new(ShapeKind::ShiftedBall { r: 1.0, c: vec![1.5, -0.2] })).is_ok());
    }

    #[test]
    fn splitting_monotone() {
        let a = w(&[1.0, 1.0]);
        let pieces = [
            Shape::new(ShapeKind::Box { lo: vec![0.0, 0.2], hi: vec![0.5, 1.0] }),
            Shape::new(ShapeKind::Box { lo: vec![0.0, 0.2], hi: vec![1.3, 1.0] }),
        ];
        let (whole, qmin) = splitting_check(&a, &pieces).unwrap();
        assert!(whole > qmin);
        let equal = [Shape::unit_box(2), Shape::unit_box(2)];
        let (whole, qmin) = splitting_check(&a, &equal).unwrap();
        assert!(whole > qmin);
        let (one, q1) = splitting_check(&a, &equal[..1]).unwrap();
        assert_eq!(one, q1);
    }

    #[test]
    fn amgm_examples() {
        assert_eq!(weighted_amgm(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), (1.0, 1.0));
        let (gm, am) = weighted_amgm(&[2.0, 8.0], &[1.0, 1.0]).unwrap();
        assert!((gm - 16.0).abs() < 1e-12 && (am - 25.0).abs() < 1e-12);
        let (gm, am) = weighted_amgm(&[3.0; 3], &[0.5, 1.0, 2.0]).unwrap();
        assert!((gm - am).abs() < 1e-12 && (gm - 3f64.powf(3.5)).abs() < 1e-11);
        assert_eq!(weighted_amgm(&[0.0, 2.0], &[0.0, 1.0]).unwrap().0, 2.0);
    }

    #[test]
    fn constant_star_is_stationary() {
        let a = w(&[1.0, 1.0]);
        let res = star_shape_search(&a, &[1.0], StarSearchConfig::default()).unwrap();
        assert_eq!(res.accepted, 0);
        assert!((res.final_quotient() - res.c1).abs() < 1e-4);
    }

    #[test]
    fn ellipse_like_star_relaxes_to_arc() {
        let a = w(&[1.0, 1.0]);
        let res = star_shape_search(&a, &[1.0, 0.3], StarSearchConfig::default()).unwrap();
        assert!(res.trace.windows(2).all(|p| p[1] <= p[0]));
        assert!((res.final_quotient() - res.c1).abs() < 1e-3, "{:?}", res.trace.last());
        assert!(res.distance_from_constant() < 0.02, "{:?}", res.coeffs);
    }

    #[test]
    fn shape_doc_roundtrip() {
        let doc = ShapeDoc { shape: Shape::unit_box(2), a: w(&[1.0, 1.0]), n: 2 };
        let s = serde_json::to_string(&doc).unwrap();
        assert!(s.contains("\"kind\":\"box\""));
        assert_eq!(serde_json::from_str::<ShapeDoc>(&s).unwrap(), doc);
    }
}
