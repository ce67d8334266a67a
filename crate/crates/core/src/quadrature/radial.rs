//! One-dimensional reduction for radial integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{ball_perimeter, WeightVector};

pub const ADAPTIVE_REL_TOL: f64 = 1e-9;

/// Decay information for a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    /// `g(r) = 0` for `r ≥ R`.
    Compact(f64),
    /// `|g(r)| ≤ C r^{-δ}` for large `r`.
    Power(f64),
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        if !(f1.is_finite() && f2.is_finite()) {
            let (node, value) = if f1.is_finite() { (c + x, f2) } else { (c - x, f1) };
            return Err(Error::NonFiniteIntegrand { node: vec![node], value });
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: vec![c], value: fc });
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Adaptive Gauss–Kronrod 7-15 with global bisection of the worst interval.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b)?;
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let scale = parts.iter().map(|p| p.2.abs()).sum::<f64>();
        if err <= rel_tol * scale.max(f64::MIN_POSITIVE) || err <= 1e-300 {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            if err <= 1e3 * rel_tol * scale {
                return Ok(total);
            }
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled with error estimate {err:e}"
            )));
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `∫_{ℝⁿ_*} g(|x|) x^A dx = P(B₁*) ∫_0^∞ r^{D-1} g(r) dr`.
///
/// Compact profiles are integrated on `[0, R]` split at `breakpoints`;
/// power-law tails go through `r = s/(1-s)`. A declared decay `δ ≤ D`
/// cannot be integrable and is rejected.
pub fn radial_integrate<G: Fn(f64) -> f64>(a: &WeightVector, g: G, decay: Decay, breakpoints: &[f64]) -> Result<f64> {
    let d = a.effective_dimension();
    let integrand = |r: f64| if r == 0.0 { 0.0 } else { r.powf(d - 1.0) * g(r) };
    let one_d = match decay {
        Decay::Compact(radius) => {
            if !(radius >= 0.0) || !radius.is_finite() {
                return Err(Error::InvalidArgument(format!("support radius {radius} must be finite and non-negative")));
            }
            let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > 0.0 && b < radius).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![0.0];
            edges.extend(cuts);
            edges.push(radius);
            let mut s = 0.0;
            for w in edges.windows(2) {
                s += adaptive_integrate(integrand, w[0], w[1], ADAPTIVE_REL_TOL)?;
            }
            s
        }
        Decay::Power(delta) => {
            if delta <= d {
                return Err(Error::DivergentTail { required: d, declared: delta });
            }
            let mapped = |s: f64| {
                if s >= 1.0 {
                    return 0.0;
                }
                let r = s / (1.0 - s);
                integrand(r) / ((1.0 - s) * (1.0 - s))
            };
            let mut cuts: Vec<f64> = breakpoints.iter().filter(|&&b| b > 0.0).map(|b| b / (1.0 + b)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![0.0];
            edges.extend(cuts);
            edges.push(1.0);
            let mut s = 0.0;
            for w in edges.windows(2) {
                s += adaptive_integrate(mapped, w[0], w[1], ADAPTIVE_REL_TOL)?;
            }
            s
        }
    };
    Ok(ball_perimeter(a) * one_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::ball_measure;

    #[test]
    fn gk_polynomial() {
        let v = adaptive_integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn gk_sqrt_endpoint() {
        let v = adaptive_integrate(f64::sqrt, 0.0, 1.0, 1e-11).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn indicator_gives_ball_measure() {
        let a = WeightVector::new(vec![0.5, 1.5]).unwrap();
        let v = radial_integrate(&a, |_| 1.0, Decay::Compact(1.0), &[]).unwrap();
        assert!((v / ball_measure(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_tail_example() {
        // ∫ (1+r²)^{-3} over ℝ³ = π²/4
        let a = WeightVector::zeros(3);
        let v = radial_integrate(&a, |r| (1.0 + r * r).powi(-3), Decay::Power(6.0), &[]).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 4.0;
        assert!((v - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn divergent_tail_rejected() {
        let a = WeightVector::zeros(3);
        let r = radial_integrate(&a, |r| (1.0 + r * r).powi(-1), Decay::Power(2.0), &[]);
        assert!(matches!(r, Err(Error::DivergentTail { .. })));
    }
}
