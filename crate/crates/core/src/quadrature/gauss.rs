//! One-dimensional Gauss rules.
//!
//! Everything the crate integrates against `x^a` reduces to rules for the
//! weight `t^a` on `[0, 1]` (shifted Jacobi with α = 0, β = a), whose total
//! mass `1/(a+1)` is elementary. Nodes and weights come from the
//! Golub–Welsch eigen-solve of the three-term recurrence.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a one-dimensional rule, sorted by node.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Affine map of `[0, 1]` onto `[a, b]` for an unweighted rule.
    pub fn mapped(&self, a: f64, b: f64) -> Rule1d {
        let h = b - a;
        Rule1d {
            nodes: self.nodes.iter().map(|t| a + h * t).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }
}

fn golub_welsch(diag: &[f64], offdiag_sq: &[f64], mu0: f64) -> Rule1d {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            let b = offdiag_sq[i].sqrt();
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Jacobi rule on `[0, 1]` for the weight `t^a`, `a > -1`.
///
/// Exact for `∫₀¹ t^a q(t) dt` with `deg q ≤ 2n - 1`.
pub fn jacobi_unit(n: usize, a: f64) -> Rule1d {
    assert!(n >= 1 && a > -1.0);
    // Jacobi(α = 0, β = a) on [-1, 1], then t = (1 + x)/2.
    let (al, be) = (0.0f64, a);
    let s = al + be;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let d = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            (be * be - al * al) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
        };
        diag.push(0.5 * (1.0 + d));
        if k + 1 < n {
            let j = kf + 1.0;
            let num = 4.0 * j * (j + al) * (j + be) * (j + s);
            let den = (2.0 * j + s).powi(2) * (2.0 * j + s + 1.0) * (2.0 * j + s - 1.0);
            off.push(0.25 * num / den);
        }
    }
    golub_welsch(&diag, &off, 1.0 / (a + 1.0))
}

/// Gauss–Legendre rule on `[0, 1]`.
pub fn legendre_unit(n: usize) -> Rule1d {
    jacobi_unit(n, 0.0)
}

/// Gauss rule on `[0, len]` for the weight `x^a`; weights include `x^a`.
pub fn jacobi_at_origin(n: usize, a: f64, len: f64) -> Rule1d {
    let r = jacobi_unit(n, a);
    let scale = len.powf(a + 1.0);
    Rule1d {
        nodes: r.nodes.iter().map(|t| t * len).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
    }
}

/// Gauss rule on `[lo, hi]` (with `lo ≥ 0`) for the weight `x^a`; weights
/// include `x^a`.
///
/// For `lo = 0` this is the Jacobi rule. For `lo > 0` the recurrence is
/// obtained by the discretized Stieltjes procedure on a geometrically graded
/// composite Gauss–Legendre discretization of the weight.
pub fn power_weight_rule(n: usize, a: f64, lo: f64, hi: f64) -> Rule1d {
    assert!(lo >= 0.0 && hi > lo);
    if a == 0.0 {
        return legendre_unit(n).mapped(lo, hi);
    }
    if lo == 0.0 {
        return jacobi_at_origin(n, a, hi);
    }
    // Discretize x^a on [lo, hi] with panels whose endpoint ratio is ≤ 2.
    let base = legendre_unit(2 * n + 24);
    let mut edges = vec![lo];
    while *edges.last().unwrap() * 2.0 < hi {
        let next = edges.last().unwrap() * 2.0;
        edges.push(next);
    }
    edges.push(hi);
    // Work on the normalized variable y = (2x - lo - hi)/(hi - lo) ∈ [-1, 1].
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for e in edges.windows(2) {
        let r = base.mapped(e[0], e[1]);
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            ys.push((x - c) / h);
            ws.push(w * x.powf(a));
        }
    }
    let total: f64 = ws.iter().sum();
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    let mut p_prev = vec![0.0; ys.len()];
    let mut p_cur = vec![1.0; ys.len()];
    let mut norm_prev = 1.0;
    let mut norm_cur: f64 = total;
    for k in 0..n {
        let num: f64 = ys.iter().zip(&ws).zip(&p_cur).map(|((y, w), p)| w * y * p * p).sum();
        let alpha = num / norm_cur;
        diag.push(alpha);
        let beta = if k == 0 { 0.0 } else { norm_cur / norm_prev };
        if k > 0 {
            off.push(beta);
        }
        if k + 1 == n {
            break;
        }
        let next: Vec<f64> = ys
            .iter()
            .zip(&p_cur)
            .zip(&p_prev)
            .map(|((y, pc), pp)| (y - alpha) * pc - beta * pp)
            .collect();
        p_prev = std::mem::replace(&mut p_cur, next);
        norm_prev = norm_cur;
        norm_cur = ws.iter().zip(&p_cur).map(|(w, p)| w * p * p).sum();
    }
    let r = golub_welsch(&diag, &off, total);
    Rule1d {
        nodes: r.nodes.iter().map(|y| c + h * y).collect(),
        weights: r.weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = legendre_unit(6);
        for m in 0..12 {
            let v = r.integrate(|x| x.powi(m));
            assert!((v - 1.0 / (m as f64 + 1.0)).abs() < 1e-14, "m = {m}");
        }
    }

    #[test]
    fn jacobi_exactness() {
        for &a in &[0.3, 1.0, 2.0, 5.5] {
            let n = 8;
            let r = jacobi_unit(n, a);
            for m in 0..(2 * n) {
                let v = r.integrate(|x| x.powi(m as i32));
                let exact = 1.0 / (a + m as f64 + 1.0);
                assert!((v - exact).abs() / exact < 1e-12, "a = {a}, m = {m}");
            }
            assert!(r.nodes.iter().all(|x| *x > 0.0 && *x < 1.0));
            assert!(r.weights.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn singular_exponent_near_minus_one() {
        let r = jacobi_unit(10, -0.5);
        // ∫₀¹ t^{-1/2} cos(t) dt
        let v = r.integrate(|t| t.cos());
        let reference = 1.809_048_475_800_544; // √(2π)·C(√(2/π))
        assert!((v - reference).abs() < 1e-12);
    }

    #[test]
    fn shifted_power_weight_exactness() {
        for &(a, lo, hi) in &[(1.5, 0.2, 1.7), (0.7, 1e-3, 2.0), (3.0, 2.0, 2.5)] {
            let n = 7;
            let r = power_weight_rule(n, a, lo, hi);
            for m in 0..(2 * n) {
                let mf = m as f64;
                let exact = (hi.powf(a + mf + 1.0) - lo.powf(a + mf + 1.0)) / (a + mf + 1.0);
                let v = r.integrate(|x| x.powi(m as i32));
                assert!((v - exact).abs() / exact < 1e-12, "a = {a} lo = {lo} m = {m}: {v} vs {exact}");
            }
            assert!(r.nodes.iter().all(|x| *x > lo && *x < hi));
        }
    }
}
