use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::item_rng;
use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::integrals::Integrator;
use crate::isoperimetry::{star_profile, Shape, ShapeKind, ShapeRegion};
use crate::quadrature::{orthant_angles, polar_rule};
use crate::region::{AxisBox, Region};
use crate::report::VerificationReport;
use crate::weights::{Exponents, WeightVector};

/// Safety factor applied to corpus maxima.
pub const ENVELOPE_SAFETY: f64 = 1.2;
/// Relative disagreement between two resolutions that flags the singular integral.
pub const POTENTIAL_SELF_TOL: f64 = 1e-3;

/// Hölder exponent `1 - D/p`; rejects `p ≤ D`.
pub fn holder_exponent(a: &WeightVector, p: f64) -> Result<f64> {
    Exponents::new(a.effective_dimension(), p)?.holder_alpha()
}

pub fn holder_ratio(u: &dyn TestFunction, x: &[f64], y: &[f64], alpha: f64) -> f64 {
    let dist = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if dist == 0.0 {
        return 0.0;
    }
    (u.value(x) - u.value(y)).abs() / dist.powf(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ratio: f64,
}

/// Box in which pairs are drawn: the support box widened by half its width
/// on each side and clipped to the closure of ℝⁿ_*.
fn pair_box(a: &WeightVector, u: &dyn TestFunction) -> AxisBox {
    let s = u.support();
    let lo = (0..s.dim())
        .map(|i| {
            let l = s.lo[i] - 0.5 * (s.hi[i] - s.lo[i]);
            if a.is_weighted(i) { l.max(0.0) } else { l }
        })
        .collect();
    let hi = (0..s.dim()).map(|i| s.hi[i] + 0.5 * (s.hi[i] - s.lo[i])).collect();
    AxisBox { lo, hi }
}

/// `count` seeded point pairs around the support of `u`. Points are drawn
/// in box-relative coordinates, so dilating `u` dilates the pairs.
pub fn sample_pairs(a: &WeightVector, u: &dyn TestFunction, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let b = pair_box(a, u);
    let mut rng = item_rng(seed, 0);
    let point = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..b.dim()).map(|i| b.lo[i] + rng.random::<f64>() * (b.hi[i] - b.lo[i])).collect()
    };
    (0..count)
        .map(|_| {
            let x = point(&mut rng);
            let y = point(&mut rng);
            (x, y)
        })
        .collect()
}

/// Compass search on the pair `(x, y)` that increases the Hölder ratio.
/// Steps are fractions of the pair box, halved on failure.
fn refine_pair(a: &WeightVector, u: &dyn TestFunction, alpha: f64, start: &PairRatio, b: &AxisBox) -> PairRatio {
    let n = b.dim();
    let mut best = start.clone();
    let mut step = 1.0 / 16.0;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..2 * n {
            for sign in [1.0, -1.0] {
                let i = k % n;
                let mut cand = best.clone();
                let target = if k < n { &mut cand.x } else { &mut cand.y };
                target[i] += sign * step * (b.hi[i] - b.lo[i]);
                if a.is_weighted(i) && target[i] < 0.0 {
                    continue;
                }
                cand.ratio = holder_ratio(u, &cand.x, &cand.y, alpha);
                if cand.ratio > best.ratio {
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Largest ratio found; a lower bound for the Hölder seminorm.
    pub seminorm: f64,
    pub best: PairRatio,
    pub pairs: usize,
}

/// Hölder seminorm estimate: maximum over sampled pairs, then compass
/// refinement of the best `refine` pairs.
pub fn holder_seminorm(a: &WeightVector, u: &dyn TestFunction, alpha: f64, pairs: &[(Vec<f64>, Vec<f64>)], refine: usize) -> HolderEstimate {
    let b = pair_box(a, u);
    let mut ranked: Vec<PairRatio> = pairs
        .iter()
        .map(|(x, y)| PairRatio { x: x.clone(), y: y.clone(), ratio: holder_ratio(u, x, y, alpha) })
        .collect();
    ranked.sort_by(|p, q| q.ratio.total_cmp(&p.ratio));
    let mut best = ranked.first().cloned().unwrap_or(PairRatio { x: b.lo.clone(), y: b.hi.clone(), ratio: 0.0 });
    for start in ranked.iter().take(refine) {
        if start.ratio == 0.0 {
            break;
        }
        let r = refine_pair(a, u, alpha, start, &b);
        if r.ratio > best.ratio {
            best = r;
        }
    }
    HolderEstimate { seminorm: best.ratio, best, pairs: pairs.len() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyQuotient {
    pub holder: HolderEstimate,
    pub grad_norm: f64,
    /// Hölder estimate over `‖∇u‖_{L^p(x^A)}`.
    pub ratio: f64,
}

pub const DEFAULT_PAIRS: usize = 2000;
pub const DEFAULT_REFINE: usize = 6;

pub fn morrey_quotient(a: &WeightVector, p: f64, u: &dyn TestFunction, seed: u64, integ: &Integrator) -> Result<MorreyQuotient> {
    let alpha = holder_exponent(a, p)?;
    let pairs = sample_pairs(a, u, DEFAULT_PAIRS, seed);
    let holder = holder_seminorm(a, u, alpha, &pairs, DEFAULT_REFINE);
    let grad_norm = integ.integrate_gradient(a, u, |g| g.powf(p))?.powf(1.0 / p);
    let ratio = if grad_norm > 0.0 { holder.seminorm / grad_norm } else { 0.0 };
    Ok(MorreyQuotient { holder, grad_norm, ratio })
}

/// Empirical constant: safety factor times the corpus maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub max_ratio: f64,
    pub constant: f64,
    pub samples: usize,
    pub provenance: String,
}

pub fn envelope_from_ratios(ratios: &[f64]) -> Result<Envelope> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("empty corpus for envelope".into()));
    }
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    if !max_ratio.is_finite() || ratios.iter().any(|r| !r.is_finite()) {
        return Err(Error::NoConvergence("non-finite ratio in envelope corpus".into()));
    }
    Ok(Envelope { max_ratio, constant: ENVELOPE_SAFETY * max_ratio, samples: ratios.len(), provenance: "empirical".into() })
}

/// Hölder form of Morrey's inequality over explicit pairs with an
/// empirical constant.
pub fn morrey_check(
    a: &WeightVector,
    p: f64,
    u: &dyn TestFunction,
    pairs: &[(Vec<f64>, Vec<f64>)],
    constant: f64,
    integ: &Integrator,
    tol: f64,
) -> Result<VerificationReport> {
    let alpha = holder_exponent(a, p)?;
    let ratios: Vec<f64> = pairs.iter().map(|(x, y)| holder_ratio(u, x, y, alpha)).collect();
    let lhs = ratios.iter().cloned().fold(0.0f64, f64::max);
    let grad = integ.integrate_gradient(a, u, |g| g.powf(p))?.powf(1.0 / p);
    let rhs = constant * grad;
    let margin = rhs - lhs;
    Ok(VerificationReport::new("morrey", lhs, rhs, constant, margin, margin >= -tol * rhs.max(f64::MIN_POSITIVE))
        .with_meta("function", u.describe())
        .with_meta("p", p)
        .with_meta("alpha", alpha)
        .with_meta("grad_norm", grad)
        .with_meta("provenance", "empirical")
        .with_meta("pairs", pairs.len())
        .with_meta("pair_ratios", ratios))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialBound {
    /// `|u(y) - u(0)|`.
    pub lhs: f64,
    /// `∫_{B*_{2|y|}} |∇u(x)| |x|^{1-D} x^A dx`.
    pub rhs_integral: f64,
    /// Relative change between the two resolutions.
    pub self_difference: f64,
    pub converged: bool,
}

fn potential_integral(a: &WeightVector, u: &dyn TestFunction, radius: f64, radial: usize, angular: usize) -> f64 {
    let rule = polar_rule(a, radius, 0.0, radial, angular);
    rule.integrate(|x| u.gradient(x).iter().map(|g| g * g).sum::<f64>().sqrt())
}

fn potential_orders(n: usize) -> (usize, usize) {
    match n {
        0..=2 => (40, 24),
        3 => (40, 10),
        _ => (32, 4),
    }
}

/// Pointwise potential estimate at `y`, with the `|x|^{1-D}` singularity
/// absorbed into a polar rule. Evaluated at two resolutions; `converged`
/// is false when they disagree by more than [`POTENTIAL_SELF_TOL`].
pub fn morrey_potential_bound(a: &WeightVector, u: &dyn TestFunction, y: &[f64]) -> Result<PotentialBound> {
    if y.len() != a.dim() {
        return Err(Error::InvalidArgument("point dimension does not match the weight".into()));
    }
    if !a.in_closed_region(y) {
        return Err(Error::InvalidArgument(format!("{y:?} is outside the closure of the weighted region")));
    }
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::InvalidArgument("potential bound needs y != 0".into()));
    }
    let lhs = (u.value(y) - u.value(&vec![0.0; y.len()])).abs();
    let (rad, ang) = potential_orders(a.dim());
    let coarse = potential_integral(a, u, 2.0 * r, rad, ang);
    let fine = potential_integral(a, u, 2.0 * r, 2 * rad, 2 * ang);
    if !fine.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: y.to_vec(), value: fine });
    }
    let self_difference = if fine == 0.0 { (coarse - fine).abs() } else { (coarse - fine).abs() / fine.abs() };
    Ok(PotentialBound { lhs, rhs_integral: fine, self_difference, converged: self_difference <= POTENTIAL_SELF_TOL })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainingResult {
    /// Largest `(|u(y)-u(w)| + |u(w)-u(z)|)/|y-z|^α` with `w = min(y, z)`.
    pub triangle: f64,
    /// Largest direct ratio over the pairs and their chained legs.
    pub direct: f64,
    pub within_factor_two: bool,
}

pub fn chaining_check(u: &dyn TestFunction, alpha: f64, pairs: &[(Vec<f64>, Vec<f64>)]) -> ChainingResult {
    let mut triangle = 0.0f64;
    let mut direct = 0.0f64;
    for (y, z) in pairs {
        let w: Vec<f64> = y.iter().zip(z).map(|(a, b)| a.min(*b)).collect();
        let dist = y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist == 0.0 {
            continue;
        }
        let (uy, uz, uw) = (u.value(y), u.value(z), u.value(&w));
        triangle = triangle.max(((uy - uw).abs() + (uw - uz).abs()) / dist.powf(alpha));
        direct = direct
            .max(holder_ratio(u, y, z, alpha))
            .max(holder_ratio(u, y, &w, alpha))
            .max(holder_ratio(u, &w, z, alpha));
    }
    ChainingResult { triangle, direct, within_factor_two: triangle <= 2.0 * direct * (1.0 + 1e-12) }
}

/// Diameter of a shape; exact for balls and boxes, from a dense boundary
/// sample (including the corners on the hyperplanes) otherwise.
pub fn shape_diameter(a: &WeightVector, s: &Shape) -> f64 {
    let n = a.dim();
    let k = a.positive_count();
    match &s.kind {
        ShapeKind::SectorBall { r } => {
            if s.symmetric || k < n {
                2.0 * r
            } else if n == 1 {
                *r
            } else {
                r * std::f64::consts::SQRT_2
            }
        }
        ShapeKind::ShiftedBall { r, .. } => 2.0 * r,
        ShapeKind::Box { lo, hi } => (0..n)
            .map(|i| {
                let lo_i = if s.symmetric && a.is_weighted(i) { -hi[i] } else { lo[i] };
                (hi[i] - lo_i).powi(2)
            })
            .sum::<f64>()
            .sqrt(),
        ShapeKind::EllipsoidSector { axes } => {
            let dirs = orthant_angles(&vec![0.0; n], 24);
            let mut pts: Vec<Vec<f64>> = vec![vec![0.0; n]];
            for (v, _) in dirs.iter() {
                pts.push(v.iter().zip(axes).map(|(t, ax)| t * ax).collect());
            }
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = axes[i];
                pts.push(e);
            }
            max_distance(&reflect(a, pts, s.symmetric))
        }
        ShapeKind::Star2d { coeffs } => {
            let mut pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0]];
            for j in 0..=512 {
                let t = std::f64::consts::FRAC_PI_2 * j as f64 / 512.0;
                let r = star_profile(coeffs, t);
                pts.push(vec![r * t.cos(), r * t.sin()]);
            }
            max_distance(&reflect(a, pts, s.symmetric))
        }
    }
}

/// Images of the points under reflection across free axes (always part of
/// the shape) and across weighted axes (only with the symmetric tag).
fn reflect(a: &WeightVector, mut pts: Vec<Vec<f64>>, symmetric: bool) -> Vec<Vec<f64>> {
    for i in 0..a.dim() {
        if symmetric || !a.is_weighted(i) {
            let extra: Vec<Vec<f64>> = pts
                .iter()
                .filter(|p| p[i] != 0.0)
                .map(|p| {
                    let mut q = p.clone();
                    q[i] = -q[i];
                    q
                })
                .collect();
            pts.extend(extra);
        }
    }
    pts
}

fn max_distance(pts: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            best = best.max(p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>());
        }
    }
    best.sqrt()
}

/// `sup|u|` over ℝⁿ_*: best tensor sample, then compass search.
pub fn sup_abs(a: &WeightVector, u: &dyn TestFunction, integ: &Integrator) -> Result<f64> {
    let s = integ.tensor().sample(a, u)?;
    let Some((start, _)) = s.nodes.iter().zip(&s.values).max_by(|p, q| p.1.abs().total_cmp(&q.1.abs())) else {
        return Ok(0.0);
    };
    let b = u.support();
    let mut x = start.clone();
    let mut best = u.value(&x).abs();
    let mut step = 1.0 / (integ.order * integ.panels) as f64;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut c = x.clone();
                c[i] += sign * step * (b.hi[i] - b.lo[i]);
                if a.is_weighted(i) && c[i] < 0.0 {
                    continue;
                }
                let v = u.value(&c).abs();
                if v > best {
                    best = v;
                    x = c;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Errors unless every tensor node where `u ≠ 0` lies in the closure of `Ω`.
pub fn check_support_in(a: &WeightVector, u: &dyn TestFunction, shape: &Shape) -> Result<()> {
    shape.validate(a)?;
    let region = ShapeRegion { a, shape };
    let probe = Integrator::with_resolution(6, 6).tensor().sample(a, u)?;
    for (x, v) in probe.nodes.iter().zip(&probe.values) {
        if *v != 0.0 && !region.contains(&fold(a, x, shape.symmetric)) {
            return Err(Error::InvalidDomain(format!("{} is nonzero at {x:?}, outside {}", u.describe(), shape.describe())));
        }
    }
    Ok(())
}

/// Representative of `x` in the described piece for symmetric shapes.
fn fold(a: &WeightVector, x: &[f64], symmetric: bool) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, v)| if symmetric && a.is_weighted(i) { v.abs() } else { *v })
        .collect()
}

/// `sup|u| / (diam(Ω)^α ‖∇u‖_{L^p(Ω, x^A)})`.
pub fn sup_ratio(a: &WeightVector, p: f64, u: &dyn TestFunction, shape: &Shape, integ: &Integrator) -> Result<f64> {
    let alpha = holder_exponent(a, p)?;
    check_support_in(a, u, shape)?;
    let sup = sup_abs(a, u, integ)?;
    let grad = integ.integrate_gradient(a, u, |g| g.powf(p))?.powf(1.0 / p);
    if grad == 0.0 {
        return Ok(0.0);
    }
    Ok(sup / (shape_diameter(a, shape).powf(alpha) * grad))
}

/// `sup|u| ≤ Ĉ diam(Ω)^{1-D/p} ‖∇u‖_{L^p(Ω, x^A)}` with an empirical `Ĉ`.
pub fn sup_bound_check(
    a: &WeightVector,
    p: f64,
    u: &dyn TestFunction,
    shape: &Shape,
    constant: f64,
    integ: &Integrator,
    tol: f64,
) -> Result<VerificationReport> {
    let alpha = holder_exponent(a, p)?;
    check_support_in(a, u, shape)?;
    let lhs = sup_abs(a, u, integ)?;
    let grad = integ.integrate_gradient(a, u, |g| g.powf(p))?.powf(1.0 / p);
    let diam = shape_diameter(a, shape);
    let rhs = constant * diam.powf(alpha) * grad;
    let margin = rhs - lhs;
    Ok(VerificationReport::new("morrey_sup", lhs, rhs, constant, margin, margin >= -tol * rhs.max(f64::MIN_POSITIVE))
        .with_meta("function", u.describe())
        .with_meta("shape", shape.describe())
        .with_meta("diameter", diam)
        .with_meta("alpha", alpha)
        .with_meta("grad_norm", grad)
        .with_meta("provenance", "empirical"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_bumps, BumpLayout};
    use crate::function::{Bump, Dilated, Radial, Scaled, Smoothness};
    use crate::quadrature::adaptive_integrate;
    use crate::weights::ball_perimeter;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_subcritical_p() {
        let a = w(&[1.0, 1.0]);
        assert!(holder_exponent(&a, 4.0).is_err());
        assert!((holder_exponent(&a, 6.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dilation_invariance_of_the_ratio() {
        let a = w(&[1.0, 1.0]);
        let u = Bump::anisotropic(vec![0.4, 0.2], vec![1.0, 0.8], 1.5);
        let integ = Integrator::default();
        let base = morrey_quotient(&a, 6.0, &u, 3, &integ).unwrap().ratio;
        for lambda in [0.5, 2.0] {
            let d = Dilated::new(&u, lambda);
            let r = morrey_quotient(&a, 6.0, &d, 3, &integ).unwrap().ratio;
            assert!((r - base).abs() < 1e-6 * base, "{r} vs {base}");
        }
    }

    #[test]
    fn zero_function_has_zero_lhs() {
        let a = w(&[1.0, 1.0]);
        let b = Bump::new(vec![1.0, 1.0], 0.5);
        let z = Scaled::new(&b, 0.0);
        let pairs = sample_pairs(&a, &z, 50, 1);
        let rep = morrey_check(&a, 6.0, &z, &pairs, 1.0, &Integrator::default(), 0.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn small_corpus_envelope_is_finite_and_holds() {
        let a = w(&[1.0, 1.0]);
        let integ = Integrator::default();
        let specs = random_bumps(&a, 8, 17, BumpLayout::NearOrigin);
        let mut ratios = Vec::new();
        for s in &specs {
            let u = s.build(&a, 6.0).unwrap();
            ratios.push(morrey_quotient(&a, 6.0, u.as_ref(), 5, &integ).unwrap().ratio);
        }
        let env = envelope_from_ratios(&ratios).unwrap();
        assert!(env.constant.is_finite() && env.constant > 0.0);
        for s in &specs {
            let u = s.build(&a, 6.0).unwrap();
            let pairs = sample_pairs(&a, u.as_ref(), 500, 99);
            assert!(morrey_check(&a, 6.0, u.as_ref(), &pairs, env.constant, &integ, 0.0).unwrap().pass);
        }
    }

    #[test]
    fn potential_bound_matches_radial_reduction() {
        let a = w(&[1.0, 0.5]);
        let u = Bump::new(vec![0.0, 0.0], 1.0);
        let y = [0.3, 0.2];
        let r = (0.13f64).sqrt();
        let pb = morrey_potential_bound(&a, &u, &y).unwrap();
        let g = u.radial().unwrap();
        assert!((pb.lhs - (g.profile(r) - g.profile(0.0)).abs()).abs() < 1e-14);
        let exact = ball_perimeter(&a) * adaptive_integrate(|s| g.derivative(s).abs(), 0.0, 2.0 * r, 1e-13).unwrap();
        assert!((pb.rhs_integral - exact).abs() < 1e-8 * exact);
        assert!(pb.converged);
    }

    #[test]
    fn potential_bound_of_locally_constant_function() {
        let a = w(&[1.0, 1.0]);
        let u = Radial {
            n: 2,
            profile: crate::function::PlateauProfile { radius: 1.0, band: 0.5, height: 2.0 },
            smoothness: Smoothness::C1,
            label: "plateau".into(),
        };
        let pb = morrey_potential_bound(&a, &u, &[0.2, 0.1]).unwrap();
        assert_eq!(pb.lhs, 0.0);
        assert_eq!(pb.rhs_integral, 0.0);
        assert!(morrey_potential_bound(&a, &u, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn chaining_within_factor_two() {
        let a = w(&[1.0, 1.0]);
        let u = Bump::anisotropic(vec![0.5, 0.3], vec![0.8, 1.1], 1.0);
        let pairs = sample_pairs(&a, &u, 400, 8);
        let c = chaining_check(&u, 1.0 / 3.0, &pairs);
        assert!(c.within_factor_two && c.triangle > 0.0);
    }

    #[test]
    fn diameters() {
        let a = w(&[1.0, 1.0]);
        assert!((shape_diameter(&a, &Shape::sector_ball(2.0)) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(shape_diameter(&w(&[1.0, 0.0]), &Shape::sector_ball(2.0)), 4.0);
        assert!((shape_diameter(&a, &Shape::unit_box(2)) - 2f64.sqrt()).abs() < 1e-15);
        let e = Shape::new(ShapeKind::EllipsoidSector { axes: vec![1.0, 1.0] });
        assert!((shape_diameter(&a, &e) - 2f64.sqrt()).abs() < 1e-12);
        let st = Shape::new(ShapeKind::Star2d { coeffs: vec![1.0] });
        assert!((shape_diameter(&a, &st) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sup_bound_inflation_widens_margin() {
        let a = w(&[1.0, 1.0]);
        let u = Bump::new(vec![1.0, 1.0], 0.5);
        let integ = Integrator::default();
        let omega = Shape::sector_ball(2.0);
        let r1 = sup_bound_check(&a, 6.0, &u, &omega, 1.0, &integ, 0.0).unwrap();
        let r2 = sup_bound_check(&a, 6.0, &u, &omega.scaled(2.0), 1.0, &integ, 0.0).unwrap();
        assert!((r1.lhs - 1.0).abs() < 1e-12 && r1.lhs == r2.lhs);
        assert!(r2.rhs >= r1.rhs * 2f64.powf(1.0 / 3.0) * (1.0 - 1e-12));
        assert!(r2.margin > r1.margin);
        assert!(sup_bound_check(&a, 6.0, &u, &Shape::sector_ball(1.0), 1.0, &integ, 0.0).is_err());
    }

    #[test]
    fn sup_bound_of_zero() {
        let a = w(&[1.0, 1.0]);
        let b = Bump::new(vec![1.0, 1.0], 0.5);
        let z = Scaled::new(&b, 0.0);
        let rep = sup_bound_check(&a, 6.0, &z, &Shape::sector_ball(2.0), 1.0, &Integrator::default(), 0.0).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        assert!(rep.pass);
    }
}
