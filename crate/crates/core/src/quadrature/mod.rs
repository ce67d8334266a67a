//! Integration against the weight `x^A`: tensor Gauss–Jacobi rules on
//! boxes, polar rules on sector balls, radial reduction with tail
//! compactification, boundary patches, and a Monte Carlo backend.

mod gauss;
mod monte_carlo;
mod radial;
mod surface;

pub use gauss::{jacobi_at_origin, jacobi_unit, legendre_unit, power_weight_rule, Rule1d};
pub use monte_carlo::{monte_carlo_integrate, McEstimate};
pub use radial::{adaptive_integrate, radial_integrate, Decay, ADAPTIVE_REL_TOL};
pub use surface::{surface_integrate, Patch, SurfaceParam};

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::function::TestFunction;
use crate::region::AxisBox;
use crate::weights::WeightVector;

/// Default number of nodes per axis (per panel) for n ≤ 3.
pub const DEFAULT_ORDER: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    Box,
    Ball,
    RadialRay,
    BoundaryPatch,
}

/// Nodes in ℝⁿ_* with positive weights that already include `x^A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub tag: DomainTag,
    pub order: usize,
}

impl QuadratureRule {
    pub fn from_parts(dim: usize, nodes: Vec<f64>, weights: Vec<f64>, tag: DomainTag, order: usize) -> Self {
        assert_eq!(nodes.len(), dim * weights.len());
        Self { dim, nodes, weights, tag, order }
    }

    pub fn empty(dim: usize, tag: DomainTag) -> Self {
        Self { dim, nodes: Vec::new(), weights: Vec::new(), tag, order: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Σ wᵢ f(xᵢ), evaluated under `exec` and reduced pairwise.
    pub fn integrate_with<F>(&self, exec: Exec, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let terms = exec.map_range(self.len(), |i| self.weights[i] * f(self.node(i)));
        pairwise_sum(&terms)
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.integrate_with(Exec::default(), f)
    }

    /// Like `integrate_with` for several integrands sharing one pass over the
    /// nodes; `f` fills `out` (length `k`) at each node.
    pub fn integrate_many<F>(&self, exec: Exec, k: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        let rows = exec.map_range(self.len(), |i| {
            let mut out = vec![0.0; k];
            f(self.node(i), &mut out);
            out
        });
        let mut sums = Vec::with_capacity(k);
        for j in 0..k {
            let mut terms = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                if !row[j].is_finite() {
                    return Err(Error::NonFiniteIntegrand { node: self.node(i).to_vec(), value: row[j] });
                }
                terms.push(self.weights[i] * row[j]);
            }
            sums.push(pairwise_sum(&terms));
        }
        Ok(sums)
    }

    /// Concatenates rules of equal dimension.
    pub fn concat(rules: Vec<QuadratureRule>) -> Option<QuadratureRule> {
        let first = rules.first()?;
        let (dim, tag, order) = (first.dim, first.tag, first.order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for r in rules {
            assert_eq!(r.dim, dim);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Some(Self { dim, nodes, weights, tag, order })
    }

    /// Adds mirror copies across every hyperplane `x_i = 0` with `A_i = 0`,
    /// turning a positive-orthant rule into a rule on the whole of ℝⁿ_*.
    pub fn reflect_free_axes(self, a: &WeightVector) -> Self {
        let free: Vec<usize> = (0..self.dim).filter(|&i| !a.is_weighted(i)).collect();
        let mut out = self.clone();
        for mask in 1u32..(1 << free.len()) {
            let mut copy = self.nodes.clone();
            for (bit, &axis) in free.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    for node in copy.chunks_mut(self.dim) {
                        node[axis] = -node[axis];
                    }
                }
            }
            out.nodes.extend(copy);
            out.weights.extend_from_slice(&self.weights);
        }
        out
    }

    /// Same rule for the dilated domain `s·Ω`: nodes scale by `s`, weights
    /// by `s^D`.
    pub fn scaled(&self, a: &WeightVector, s: f64) -> Self {
        let f = s.powf(a.effective_dimension());
        Self {
            dim: self.dim,
            nodes: self.nodes.iter().map(|x| x * s).collect(),
            weights: self.weights.iter().map(|w| w * f).collect(),
            tag: self.tag,
            order: self.order,
        }
    }
}

fn tensor(rules: &[Rule1d], tag: DomainTag, order: usize) -> QuadratureRule {
    let dim = rules.len();
    let total: usize = rules.iter().map(|r| r.len()).product();
    let mut nodes = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut w = 1.0;
        for (axis, r) in rules.iter().enumerate() {
            nodes.push(r.nodes[idx[axis]]);
            w *= r.weights[idx[axis]];
        }
        weights.push(w);
        for axis in (0..dim).rev() {
            idx[axis] += 1;
            if idx[axis] < rules[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    QuadratureRule { dim, nodes, weights, tag, order }
}

fn axis_rule(a: f64, lo: f64, hi: f64, order: usize) -> Rule1d {
    if a == 0.0 {
        legendre_unit(order).mapped(lo, hi)
    } else {
        power_weight_rule(order, a, lo, hi)
    }
}

/// Tensor Gauss rule on a box inside the closure of ℝⁿ_*, exact for
/// polynomials of degree ≤ 2·order − 1 per axis against `∏ x_i^{A_i}`.
pub fn box_rule(a: &WeightVector, b: &AxisBox, order: usize) -> Result<QuadratureRule> {
    composite_box_rule(a, b, order, 1)
}

/// Composite version of [`box_rule`] with `panels` equal panels per axis.
pub fn composite_box_rule(a: &WeightVector, b: &AxisBox, order: usize, panels: usize) -> Result<QuadratureRule> {
    if order == 0 || panels == 0 {
        return Err(Error::InvalidArgument("order and panel count must be positive".into()));
    }
    if b.dim() != a.dim() {
        return Err(Error::InvalidArgument("box dimension does not match the weight".into()));
    }
    b.check_in_region(a)?;
    let rules: Vec<Rule1d> = (0..a.dim())
        .map(|i| {
            let (lo, hi) = (b.lo[i], b.hi[i]);
            let h = (hi - lo) / panels as f64;
            let mut r = Rule1d { nodes: Vec::new(), weights: Vec::new() };
            for j in 0..panels {
                let pl = lo + h * j as f64;
                let ph = if j + 1 == panels { hi } else { pl + h };
                let sub = axis_rule(a.exponents()[i], pl, ph, order);
                r.nodes.extend(sub.nodes);
                r.weights.extend(sub.weights);
            }
            r
        })
        .collect();
    Ok(tensor(&rules, DomainTag::Box, order))
}

/// Rule on the part of the support box of `f` lying in ℝⁿ_*; `None` when
/// that part is empty.
pub fn function_rule(a: &WeightVector, f: &dyn TestFunction, order: usize, panels: usize) -> Result<Option<QuadratureRule>> {
    match f.support().clip_to_region(a) {
        None => Ok(None),
        Some(b) => composite_box_rule(a, &b, order, panels).map(Some),
    }
}

/// `(unit vector, weight)` pairs on the positive orthant of the sphere with
/// the weight `θ^A`. Each polar angle is split at π/4 so that both endpoint
/// singularities are absorbed by one-sided Jacobi rules.
pub(crate) fn orthant_angles(exps: &[f64], order: usize) -> Arc<Vec<(Vec<f64>, f64)>> {
    type Cache = Mutex<HashMap<(Vec<u64>, usize), Arc<Vec<(Vec<f64>, f64)>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (exps.iter().map(|e| e.to_bits()).collect::<Vec<_>>(), order);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("rule cache poisoned").get(&key) {
        return hit.clone();
    }
    let rule = Arc::new(build_orthant_angles(exps, order));
    cache.lock().expect("rule cache poisoned").insert(key, rule.clone());
    rule
}

fn build_orthant_angles(exps: &[f64], order: usize) -> Vec<(Vec<f64>, f64)> {
    let n = exps.len();
    if n == 1 {
        return vec![(vec![1.0], 1.0)];
    }
    let lower = orthant_angles(&exps[..n - 1], order);
    let a_last = exps[n - 1];
    let d_prev: f64 = exps[..n - 1].iter().sum::<f64>() + (n - 1) as f64;
    let b = d_prev - 1.0;
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    // φ-nodes with weights for cos^{b}φ sin^{a}φ on [0, π/2]
    let mut phis: Vec<(f64, f64)> = Vec::with_capacity(2 * order);
    for (t, w) in jacobi_or_legendre(order, a_last, FRAC_PI_4) {
        phis.push((t, w * sinc(t).powf(a_last) * t.cos().powf(b)));
    }
    for (s, w) in jacobi_or_legendre(order, b, FRAC_PI_4) {
        phis.push((2.0 * FRAC_PI_4 - s, w * sinc(s).powf(b) * s.cos().powf(a_last)));
    }
    let mut out = Vec::with_capacity(phis.len() * lower.len());
    for (phi, wphi) in &phis {
        let (s, c) = phi.sin_cos();
        for (theta, wt) in lower.iter() {
            let mut v: Vec<f64> = theta.iter().map(|t| c * t).collect();
            v.push(s);
            out.push((v, wphi * wt));
        }
    }
    out
}

fn jacobi_or_legendre(order: usize, a: f64, len: f64) -> Vec<(f64, f64)> {
    let r = if a == 0.0 { legendre_unit(order).mapped(0.0, len) } else { jacobi_at_origin(order, a, len) };
    r.nodes.into_iter().zip(r.weights).collect()
}

/// Rule on `S^{n-1} ∩ ℝⁿ_*` for the weight `θ^A dσ`.
pub fn sphere_orthant_rule(a: &WeightVector, order: usize) -> QuadratureRule {
    let pts = orthant_angles(a.exponents(), order);
    let mut nodes = Vec::with_capacity(pts.len() * a.dim());
    let mut weights = Vec::with_capacity(pts.len());
    for (v, w) in pts.iter() {
        nodes.extend_from_slice(v);
        weights.push(*w);
    }
    QuadratureRule { dim: a.dim(), nodes, weights, tag: DomainTag::BoundaryPatch, order }.reflect_free_axes(a)
}

/// Polar rule on `B_R*` for the measure `r^{s}dr · θ^A dσ`.
///
/// With `s = D - 1` this integrates against `x^A dx`; with `s = 0` it
/// integrates `f(x)·|x|^{1-D} x^A dx`, absorbing the potential singularity.
pub fn polar_rule(a: &WeightVector, radius: f64, radial_exponent: f64, radial_order: usize, angular_order: usize) -> QuadratureRule {
    let radial = if radial_exponent == 0.0 {
        legendre_unit(radial_order).mapped(0.0, radius)
    } else {
        jacobi_at_origin(radial_order, radial_exponent, radius)
    };
    let sphere = sphere_orthant_rule(a, angular_order);
    let n = a.dim();
    let mut nodes = Vec::with_capacity(radial.len() * sphere.len() * n);
    let mut weights = Vec::with_capacity(radial.len() * sphere.len());
    for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
        for j in 0..sphere.len() {
            nodes.extend(sphere.node(j).iter().map(|t| r * t));
            weights.push(wr * sphere.weight(j));
        }
    }
    QuadratureRule { dim: n, nodes, weights, tag: DomainTag::Ball, order: radial_order }
}

/// Polar rule on `B_R*` against `x^A dx`.
pub fn ball_rule(a: &WeightVector, radius: f64, order: usize) -> QuadratureRule {
    polar_rule(a, radius, a.effective_dimension() - 1.0, order, order)
}

/// Σ wᵢ f(xᵢ); a non-finite value at a node is an error naming the node.
pub fn integrate_weighted(f: &dyn TestFunction, rule: &QuadratureRule) -> Result<f64> {
    integrate_weighted_with(f, rule, Exec::default())
}

pub fn integrate_weighted_with(f: &dyn TestFunction, rule: &QuadratureRule, exec: Exec) -> Result<f64> {
    Ok(rule.integrate_many(exec, 1, |x, out| out[0] = f.value(x))?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Bump, FnFunction};
    use crate::weights::ball_measure;

    fn w(a: &[f64]) -> WeightVector {
        WeightVector::new(a.to_vec()).unwrap()
    }

    #[test]
    fn box_rule_monomial_example() {
        let r = box_rule(&w(&[2.0]), &AxisBox::unit(1), 4).unwrap();
        let v = r.integrate(|x| x[0].powi(3));
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn box_rule_reduces_to_legendre() {
        let r = box_rule(&WeightVector::zeros(2), &AxisBox::unit(2), 5).unwrap();
        let l = legendre_unit(5);
        assert!((r.node(0)[1] - l.nodes[0]).abs() < 1e-15);
        assert!((r.weight(0) - l.weights[0] * l.weights[0]).abs() < 1e-15);
    }

    #[test]
    fn box_rule_unit_square_constant() {
        let r = box_rule(&w(&[1.0, 1.0]), &AxisBox::unit(2), 3).unwrap();
        assert!((r.total_weight() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn box_rule_rejects_crossing() {
        let b = AxisBox::new(vec![-0.5, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(box_rule(&w(&[1.0, 1.0]), &b, 3), Err(Error::InvalidDomain(_))));
        assert!(box_rule(&w(&[0.0, 1.0]), &b, 3).is_ok());
    }

    #[test]
    fn ball_rule_measure() {
        for a in [w(&[1.0, 1.0]), w(&[0.5, 2.3]), w(&[0.0, 0.0, 0.0]), w(&[2.0, 0.0, 1.5])] {
            let v = ball_rule(&a, 1.0, 12).total_weight();
            let m = ball_measure(&a);
            assert!((v - m).abs() / m < 1e-12, "{a:?}: {v} vs {m}");
        }
    }

    #[test]
    fn integrate_weighted_constant_and_zero() {
        let a = w(&[1.0, 1.0]);
        let rule = ball_rule(&a, 1.0, 16);
        let one = FnFunction::new(AxisBox::unit(2), |_: &[f64]| 1.0, "one");
        let zero = FnFunction::new(AxisBox::unit(2), |_: &[f64]| 0.0, "zero");
        assert!((integrate_weighted(&one, &rule).unwrap() - 0.125).abs() < 1e-12);
        assert_eq!(integrate_weighted(&zero, &rule).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_value_reports_node() {
        let a = w(&[1.0, 1.0]);
        let rule = box_rule(&a, &AxisBox::unit(2), 4).unwrap();
        let bad = FnFunction::new(AxisBox::unit(2), |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 1.0 }, "bad");
        match integrate_weighted(&bad, &rule) {
            Err(Error::NonFiniteIntegrand { node, .. }) => assert!(node[0] > 0.5),
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn bump_self_convergence() {
        let a = w(&[1.0, 1.0]);
        let u = Bump::new(vec![1.2, 0.9], 0.6);
        // the bump is only C³ across its support sphere, so convergence is algebraic
        let coarse = integrate_weighted(&u, &function_rule(&a, &u, 12, 4).unwrap().unwrap()).unwrap();
        let fine = integrate_weighted(&u, &function_rule(&a, &u, 12, 8).unwrap().unwrap()).unwrap();
        assert!((coarse - fine).abs() < 1e-6 * fine.abs(), "{coarse} {fine}");
    }

    #[test]
    fn free_axis_reflection_covers_half_ball() {
        let a = w(&[2.0, 0.0]);
        let r = ball_rule(&a, 1.0, 10);
        assert!(r.len() > 0);
        assert!((0..r.len()).any(|i| r.node(i)[1] < 0.0));
        assert!((0..r.len()).all(|i| r.node(i)[0] > 0.0));
    }
}
