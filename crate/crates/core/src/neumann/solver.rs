use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::report::VerificationReport;
use crate::weights::{ball_measure, ball_perimeter, WeightVector};

use super::domain::{GridDomain2D, Shape2D};

/// Relative residual at which the conjugate-gradient iteration stops.
pub const SOLVER_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Defaults to `20 N + 1000` for `N` unknowns.
    pub max_iterations: Option<usize>,
    pub rel_tol: f64,
    pub exec: Exec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: None, rel_tol: SOLVER_REL_TOL, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSolution {
    /// Cell values, zero weighted mean.
    pub u: Vec<f64>,
    /// `b = P_h / m_h`.
    pub b: f64,
    pub perimeter: f64,
    pub measure: f64,
    pub iterations: usize,
    /// `‖g - bV - Mu‖₂ / ‖g - bV‖₂` of the final iterate.
    pub residual: f64,
    pub h: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    pairwise_sum(&x.iter().zip(y).map(|(a, b)| a * b).collect::<Vec<_>>())
}

/// Net weighted flux into each cell, `Σ_faces T (u_l - u_k)`.
pub fn flux_apply(dom: &GridDomain2D, u: &[f64], exec: Exec) -> Vec<f64> {
    exec.map_range(dom.cells.len(), |k| {
        let uk = u[k];
        dom.cells[k].neighbors.iter().map(|&(l, t)| t * (u[l] - uk)).sum()
    })
}

fn check_weight(a: &WeightVector, dom: &GridDomain2D) -> Result<()> {
    if *a != dom.a {
        return Err(Error::InvalidArgument(format!(
            "domain was discretized for A = {:?}, not {:?}",
            dom.a.exponents(),
            a.exponents()
        )));
    }
    dom.validate()
}

/// `x^{-A} div(x^A ∇u)` as the cell average: interior fluxes over the
/// weighted cell measure. Cut cells get the homogeneous part only.
pub fn operator_apply(a: &WeightVector, u: &[f64], dom: &GridDomain2D) -> Result<Vec<f64>> {
    operator_apply_with(a, u, dom, Exec::default())
}

pub fn operator_apply_with(a: &WeightVector, u: &[f64], dom: &GridDomain2D, exec: Exec) -> Result<Vec<f64>> {
    check_weight(a, dom)?;
    if u.len() != dom.cells.len() {
        return Err(Error::InvalidArgument(format!("{} values for {} cells", u.len(), dom.cells.len())));
    }
    let k = flux_apply(dom, u, exec);
    Ok(k.iter().zip(&dom.cells).map(|(f, c)| f / c.volume).collect())
}

/// `Σ V_k u_k v_k`.
pub fn weighted_inner(dom: &GridDomain2D, u: &[f64], v: &[f64]) -> f64 {
    pairwise_sum(&dom.cells.iter().zip(u.iter().zip(v)).map(|(c, (x, y))| c.volume * x * y).collect::<Vec<_>>())
}

pub fn solve_neumann(a: &WeightVector, dom: &GridDomain2D) -> Result<NeumannSolution> {
    solve_neumann_with(a, dom, SolverOptions::default())
}

/// `div(x^A ∇u) = b x^A`, `∂u/∂ν = 1` on the polygonal boundary, by
/// Jacobi-preconditioned conjugate gradients on the mean-zero subspace.
pub fn solve_neumann_with(a: &WeightVector, dom: &GridDomain2D, opts: SolverOptions) -> Result<NeumannSolution> {
    check_weight(a, dom)?;
    let n = dom.cells.len();
    let perimeter = dom.perimeter();
    let measure = dom.measure();
    let b = perimeter / measure;
    // M u = g - bV with M = -K positive semidefinite, kernel = constants
    let rhs: Vec<f64> = dom.cells.iter().map(|c| c.boundary_flux - b * c.volume).collect();
    let mut r = rhs.clone();
    project_mean_zero(&mut r);
    let rhs_norm = dot(&r, &r).sqrt();
    let diag: Vec<f64> = dom
        .cells
        .iter()
        .map(|c| {
            let d: f64 = c.neighbors.iter().map(|e| e.1).sum();
            if d > 0.0 {
                d
            } else {
                1.0
            }
        })
        .collect();
    let apply_m = |x: &[f64]| -> Vec<f64> { flux_apply(dom, x, opts.exec).into_iter().map(|v| -v).collect() };
    let max_it = opts.max_iterations.unwrap_or(20 * n + 1000);
    let mut u = vec![0.0; n];
    let mut iterations = 0;
    if rhs_norm > 0.0 {
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        loop {
            if dot(&r, &r).sqrt() <= opts.rel_tol * rhs_norm {
                break;
            }
            if iterations >= max_it {
                return Err(Error::SolverDiverged { iterations, residual: dot(&r, &r).sqrt() / rhs_norm });
            }
            let ap = apply_m(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::SolverDiverged { iterations, residual: dot(&r, &r).sqrt() / rhs_norm });
            }
            let alpha = rz / pap;
            for k in 0..n {
                u[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            project_mean_zero(&mut r);
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            iterations += 1;
        }
    }
    let mean = weighted_inner(dom, &u, &vec![1.0; n]) / measure;
    u.iter_mut().for_each(|v| *v -= mean);
    let mu = apply_m(&u);
    let res: Vec<f64> = rhs.iter().zip(&mu).map(|(f, m)| f - m).collect();
    let full_norm = dot(&rhs, &rhs).sqrt();
    let residual = if full_norm > 0.0 { dot(&res, &res).sqrt() / full_norm } else { 0.0 };
    Ok(NeumannSolution { u, b, perimeter, measure, iterations, residual, h: dom.h })
}

fn project_mean_zero(r: &mut [f64]) {
    let mean = pairwise_sum(r) / r.len() as f64;
    r.iter_mut().for_each(|v| *v -= mean);
}

/// Tolerance on `|b - P/m|` relative to `b`.
pub fn compatibility_tolerance(h: f64) -> f64 {
    (5.0 * h * h).max(1e-3)
}

/// Compatibility of the solver constant with the exact `P(Ω)/m(Ω)` and the
/// isoperimetric chain `(b/D)^D m ≥ m(B₁*)`.
pub fn compatibility_report(a: &WeightVector, shape: &Shape2D, sol: &NeumannSolution) -> Result<VerificationReport> {
    let (p, m) = shape.exact_measures(a)?;
    let exact = p / m;
    let err = (sol.b - exact).abs();
    let rhs = compatibility_tolerance(sol.h) * sol.b;
    let d = a.effective_dimension();
    let chain = (sol.b / d).powf(d) * sol.measure;
    let ball = ball_measure(a);
    let chain_ok = chain >= ball * (1.0 - compatibility_tolerance(sol.h));
    let margin = rhs - err;
    Ok(VerificationReport::new("neumann_compatibility", err, rhs, exact, margin, margin >= 0.0 && chain_ok)
        .with_meta("shape", shape.describe())
        .with_meta("h", sol.h)
        .with_meta("b_solver", sol.b)
        .with_meta("p_over_m", exact)
        .with_meta("relative_error", err / sol.b)
        .with_meta("abp_lhs", chain)
        .with_meta("abp_rhs", ball)
        .with_meta("iterations", sol.iterations)
        .with_meta("residual", sol.residual))
}

/// `log₂(e_coarse / e_fine)` for a halved grid spacing.
pub fn convergence_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Checks that `u = |x|²/2` solves the problem on `B₁*`: the operator
/// `Δu + Σ (A_i/x_i) u_{x_i}` equals `D`, `u_ν = x·x = 1` on the unit
/// sphere, hence `b = D = P(B₁*)/m(B₁*)`.
pub fn ball_solution_certificate(a: &WeightVector) -> VerificationReport {
    let n = a.dim();
    let d = a.effective_dimension();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut op_dev = 0.0f64;
    let mut normal_dev = 0.0f64;
    for _ in 0..64 {
        let dir: Vec<f64> = (0..n)
            .map(|i| {
                let v: f64 = rng.random_range(-1.0..1.0);
                if a.is_weighted(i) {
                    v.abs().max(1e-3)
                } else {
                    v
                }
            })
            .collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = dir.iter().map(|v| v / len).collect();
        let radius: f64 = rng.random_range(0.05..1.0);
        let x: Vec<f64> = unit.iter().map(|v| v * radius).collect();
        // Hessian of |x|²/2 is the identity; ∇u = x
        let op = n as f64 + a.exponents().iter().zip(&x).map(|(ai, xi)| if *ai > 0.0 { ai * xi / xi } else { 0.0 }).sum::<f64>();
        op_dev = op_dev.max((op - d).abs());
        let u_nu: f64 = unit.iter().map(|v| v * v).sum();
        normal_dev = normal_dev.max((u_nu - 1.0).abs());
    }
    let ratio = ball_perimeter(a) / ball_measure(a);
    let ratio_dev = (ratio - d).abs() / d;
    let tol = 1e-12;
    let worst = op_dev.max(normal_dev).max(ratio_dev * d);
    VerificationReport::new("neumann_ball", ratio, d, d, tol * d - worst, worst <= tol * d)
        .with_meta("operator_deviation", op_dev)
        .with_meta("normal_derivative_deviation", normal_dev)
        .with_meta("perimeter_over_measure", ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn tube() -> Shape2D {
        Shape2D::ArcTube { center: [0.0, 0.0], radius: 2.0, width: 0.4, theta0: 0.35, theta1: 1.2 }
    }

    #[test]
    fn quadratic_maps_to_dimension_on_full_cells() {
        for v in [[0.0, 0.0], [1.0, 1.0], [0.5, 2.3]] {
            let a = w(&v);
            let dom = GridDomain2D::from_shape(&a, &Shape2D::Disk { center: [1.5, 1.5], radius: 1.0 }, 0.05).unwrap();
            let u: Vec<f64> = dom.cells.iter().map(|c| 0.5 * (c.center[0].powi(2) + c.center[1].powi(2))).collect();
            let lu = operator_apply(&a, &u, &dom).unwrap();
            let d = a.effective_dimension();
            let mut count = 0;
            for (k, v) in lu.iter().enumerate() {
                if dom.is_full(k) {
                    assert!((v - d).abs() < 1e-10 * d, "{v} vs {d}");
                    count += 1;
                }
            }
            assert!(count > 500);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let a = w(&[1.0, 2.0]);
        let dom = GridDomain2D::from_shape(&a, &tube(), 0.05).unwrap();
        let lu = operator_apply(&a, &vec![3.7; dom.cells.len()], &dom).unwrap();
        assert!(lu.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_function_gives_cell_average_of_a1_over_x1() {
        let a = w(&[1.5, 0.5]);
        let h = 0.05;
        let dom = GridDomain2D::from_shape(&a, &Shape2D::Disk { center: [1.5, 1.2], radius: 0.8 }, h).unwrap();
        let u: Vec<f64> = dom.cells.iter().map(|c| c.center[0]).collect();
        let lu = operator_apply(&a, &u, &dom).unwrap();
        let g = crate::quadrature::legendre_unit(10);
        for (k, c) in dom.cells.iter().enumerate() {
            if !dom.is_full(k) {
                continue;
            }
            // ∫ A₁ x^{A₁-1} y^{A₂} / ∫ x^{A₁} y^{A₂} over the cell
            let (x0, y0) = (c.center[0] - h / 2.0, c.center[1] - h / 2.0);
            let (mut num, mut den) = (0.0, 0.0);
            for (s, ws) in g.nodes.iter().zip(&g.weights) {
                for (t, wt) in g.nodes.iter().zip(&g.weights) {
                    let (x, y) = (x0 + s * h, y0 + t * h);
                    num += ws * wt * 1.5 * x.powf(0.5) * y.powf(0.5);
                    den += ws * wt * x.powf(1.5) * y.powf(0.5);
                }
            }
            assert!((lu[k] - num / den).abs() < 1e-10 * lu[k]);
            assert!((lu[k] - 1.5 / c.center[0]).abs() < h * h * 1.5 / c.center[0].powi(3));
        }
    }

    #[test]
    fn operator_is_self_adjoint() {
        let a = w(&[1.0, 1.0]);
        let dom = GridDomain2D::from_shape(&a, &tube(), 0.04).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..dom.cells.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..dom.cells.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lu = operator_apply(&a, &u, &dom).unwrap();
        let lv = operator_apply(&a, &v, &dom).unwrap();
        let (x, y) = (weighted_inner(&dom, &lu, &v), weighted_inner(&dom, &u, &lv));
        assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()), "{x} {y}");
    }

    #[test]
    fn unweighted_disk_reproduces_quadratic() {
        let a = w(&[0.0, 0.0]);
        let shape = Shape2D::Disk { center: [3.0, 3.0], radius: 1.0 };
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let dom = GridDomain2D::from_shape(&a, &shape, h).unwrap();
            let sol = solve_neumann(&a, &dom).unwrap();
            assert!((sol.b - 2.0).abs() <= 5.0 * h * h * 2.0, "b = {}", sol.b);
            assert!(sol.residual < 1e-9);
            let q: Vec<f64> =
                dom.cells.iter().map(|c| 0.5 * ((c.center[0] - 3.0).powi(2) + (c.center[1] - 3.0).powi(2))).collect();
            let qm = weighted_inner(&dom, &q, &vec![1.0; q.len()]) / sol.measure;
            let err = sol.u.iter().zip(&q).map(|(u, q)| (u - (q - qm)).abs()).fold(0.0, f64::max);
            assert!(err < h * h, "h = {h}: {err}");
            errs.push(err);
        }
        assert!(convergence_order(errs[0], errs[1]) > 1.5, "{errs:?}");
    }

    #[test]
    fn weighted_tube_matches_exact_ratio() {
        let a = w(&[1.0, 1.0]);
        let shape = tube();
        for h in [0.04, 0.02] {
            let dom = GridDomain2D::from_shape(&a, &shape, h).unwrap();
            let sol = solve_neumann(&a, &dom).unwrap();
            let rep = compatibility_report(&a, &shape, &sol).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn exact_measures_of_unweighted_shapes() {
        let z = w(&[0.0, 0.0]);
        let (p, m) = Shape2D::Disk { center: [2.0, 2.0], radius: 0.5 }.exact_measures(&z).unwrap();
        assert!((p - std::f64::consts::PI).abs() < 1e-12 && (m - std::f64::consts::PI / 4.0).abs() < 1e-12);
        let (p, m) = tube().exact_measures(&z).unwrap();
        // annular sector plus one full disk of radius `width`
        let (r, wd, th) = (2.0, 0.4, 1.2 - 0.35);
        assert!((m - (2.0 * r * wd * th + std::f64::consts::PI * wd * wd)).abs() < 1e-12);
        assert!((p - (2.0 * r * th + 2.0 * std::f64::consts::PI * wd)).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let a = w(&[1.0, 1.0]);
        let close = Shape2D::Disk { center: [0.5, 0.5], radius: 0.45 };
        assert!(matches!(GridDomain2D::from_shape(&a, &close, 0.02), Err(Error::InvalidDomain(_))));
        let two = |x: [f64; 2]| {
            let d1 = (x[0] - 1.0).hypot(x[1] - 1.0) - 0.3;
            let d2 = (x[0] - 2.5).hypot(x[1] - 1.0) - 0.3;
            d1.min(d2)
        };
        let err = GridDomain2D::from_level_set(&a, &two, [0.6, 0.6], [2.9, 1.4], 0.05);
        assert!(matches!(err, Err(Error::InvalidDomain(ref m)) if m.contains("disconnected")));
        let dom = GridDomain2D::from_shape(&a, &tube(), 0.05).unwrap();
        let opts = SolverOptions { max_iterations: Some(2), ..Default::default() };
        assert!(matches!(solve_neumann_with(&a, &dom, opts), Err(Error::SolverDiverged { iterations: 2, .. })));
        assert!(operator_apply(&w(&[0.0, 1.0]), &vec![0.0; dom.cells.len()], &dom).is_err());
    }

    #[test]
    fn isoperimetric_chain_holds() {
        let a = w(&[1.0, 1.0]);
        for shape in [tube(), Shape2D::Ellipse { center: [1.6, 1.4], semi: [1.0, 0.6] }] {
            let dom = GridDomain2D::from_shape(&a, &shape, 0.04).unwrap();
            let sol = solve_neumann(&a, &dom).unwrap();
            let rep = compatibility_report(&a, &shape, &sol).unwrap();
            assert!(rep.meta["abp_lhs"].as_f64().unwrap() >= rep.meta["abp_rhs"].as_f64().unwrap());
        }
    }

    #[test]
    fn ball_certificate_is_exact() {
        for v in [vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 2.3, 0.0]] {
            let rep = ball_solution_certificate(&w(&v));
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn policies_agree_bitwise() {
        let a = w(&[1.0, 1.0]);
        let dom = GridDomain2D::from_shape(&a, &tube(), 0.04).unwrap();
        let s = solve_neumann_with(&a, &dom, SolverOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
        let p = solve_neumann_with(&a, &dom, SolverOptions { exec: Exec::Parallel, ..Default::default() }).unwrap();
        assert_eq!(s, p);
    }
}
