//! Weighted surface integrals `∫_Σ f x^A dS` over parametrized patches.

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::quadrature::legendre_unit;
use crate::weights::WeightVector;

/// Map from a parameter box in ℝ^{n-1} into ℝⁿ.
pub trait SurfaceParam: Sync {
    fn ambient_dim(&self) -> usize;
    fn point(&self, u: &[f64]) -> Vec<f64>;
    /// Columns are the partial derivatives `∂x/∂u_j`; finite differences by default.
    fn tangents(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let h = f64::EPSILON.cbrt();
        (0..u.len())
            .map(|j| {
                let mut up = u.to_vec();
                let mut dn = u.to_vec();
                up[j] += h;
                dn[j] -= h;
                let (p, m) = (self.point(&up), self.point(&dn));
                p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect()
    }
}

pub struct Patch<'a> {
    pub param: &'a dyn SurfaceParam,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// sqrt(det(TᵀT)) for the tangent vectors `t`.
fn area_element(t: &[Vec<f64>]) -> f64 {
    let k = t.len();
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            g[i][j] = t[i].iter().zip(&t[j]).map(|(a, b)| a * b).sum();
        }
    }
    let det = match k {
        0 => 1.0,
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        _ => nalgebra::DMatrix::from_fn(k, k, |i, j| g[i][j]).determinant(),
    };
    det.max(0.0).sqrt()
}

/// Tensor Gauss–Legendre over the parameter box with `panels` panels per
/// parameter. A vanishing or non-finite area element at a node is reported
/// as a degenerate parametrization.
pub fn surface_integrate<F>(a: &WeightVector, patch: &Patch<'_>, f: F, order: usize, panels: usize, exec: Exec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let k = patch.lo.len();
    let base = legendre_unit(order);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..k)
        .map(|j| {
            let h = (patch.hi[j] - patch.lo[j]) / panels as f64;
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for p in 0..panels {
                let r = base.mapped(patch.lo[j] + h * p as f64, patch.lo[j] + h * (p + 1) as f64);
                nodes.extend(r.nodes);
                weights.extend(r.weights);
            }
            (nodes, weights)
        })
        .collect();
    let count: usize = axes.iter().map(|a| a.0.len()).product();
    let terms = exec.map_range(count, |mut idx| -> Result<f64> {
        let mut u = vec![0.0; k];
        let mut w = 1.0;
        for j in (0..k).rev() {
            let len = axes[j].0.len();
            u[j] = axes[j].0[idx % len];
            w *= axes[j].1[idx % len];
            idx /= len;
        }
        let x = patch.param.point(&u);
        let da = area_element(&patch.param.tangents(&u));
        if !(da.is_finite() && da > 0.0) {
            return Err(Error::DegenerateParametrization(da));
        }
        let v = f(&x) * a.eval(&x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: x, value: v });
        }
        Ok(w * da * v)
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}
