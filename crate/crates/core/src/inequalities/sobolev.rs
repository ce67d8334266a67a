use crate::error::{Error, Result};
use crate::function::{ExtremalProfile, Radial, Smoothness, TestFunction};
use crate::integrals::{Integrator, Route};
use crate::quadrature::{adaptive_integrate, ADAPTIVE_REL_TOL};
use crate::report::VerificationReport;
use crate::weights::{critical_exponent, sobolev_constant, Exponents, WeightVector};

/// Admissible excess of the quotient over `C_p`.
pub const SOBOLEV_TOL: f64 = 1e-3;
/// Fraction of the `L^{p_*}` mass of `u_{a,b}` allowed beyond the cutoff.
pub const EXTREMAL_TAIL: f64 = 1e-8;
/// Relative disagreement of the radial and tensor routes that flags a report.
pub const BACKEND_MISMATCH_TOL: f64 = 1e-4;

/// `(‖u‖_{L^{p_*}(x^A)}, ‖∇u‖_{L^p(x^A)})`.
pub fn sobolev_norms(a: &WeightVector, p: f64, u: &dyn TestFunction, integ: &Integrator) -> Result<(f64, f64)> {
    let ps = critical_exponent(a, p)?;
    integ.norms(a, u, ps, p)
}

pub fn sobolev_quotient(a: &WeightVector, p: f64, u: &dyn TestFunction) -> Result<f64> {
    sobolev_quotient_with(a, p, u, &Integrator::default())
}

pub fn sobolev_quotient_with(a: &WeightVector, p: f64, u: &dyn TestFunction, integ: &Integrator) -> Result<f64> {
    let (num, den) = sobolev_norms(a, p, u, integ)?;
    if !(den > 0.0) {
        return Err(Error::InvalidArgument(format!("{} has zero gradient norm in the weighted region", u.describe())));
    }
    Ok(num / den)
}

/// Sobolev inequality with the sharp constant. With `cross_check`, radial
/// functions are also integrated on the tensor route and a relative
/// disagreement above [`BACKEND_MISMATCH_TOL`] is recorded in the report.
pub fn sobolev_check(
    a: &WeightVector,
    p: f64,
    u: &dyn TestFunction,
    integ: &Integrator,
    tol: f64,
    cross_check: bool,
) -> Result<VerificationReport> {
    let c = sobolev_constant(a, p)?;
    let ps = critical_exponent(a, p)?;
    let (num, den) = sobolev_norms(a, p, u, integ)?;
    if !(den > 0.0) {
        return Err(Error::InvalidArgument(format!("{} has zero gradient norm in the weighted region", u.describe())));
    }
    let rhs = c * den;
    let margin = rhs - num;
    let route = integ.route(u);
    let mut rep = VerificationReport::new("sobolev", num, rhs, c, margin, margin >= -tol * den)
        .with_meta("function", u.describe())
        .with_meta("p", p)
        .with_meta("p_star", ps)
        .with_meta("quotient", num / den)
        .with_meta("provenance", "closed-form")
        .with_meta("route", format!("{route:?}").to_lowercase())
        .with_meta("order", integ.order)
        .with_meta("panels", integ.panels);
    if cross_check && route == Route::Radial {
        let (tn, td) = sobolev_norms(a, p, u, &integ.tensor())?;
        let mismatch = ((tn / td) - num / den).abs() / (num / den);
        rep = rep.with_meta("backend_mismatch", mismatch).with_meta("backend_flag", mismatch > BACKEND_MISMATCH_TOL);
    }
    Ok(rep)
}

/// `u_{a,b}(x) = (a + b|x|^{p'})^{1-D/p}` times a smooth cutoff between
/// `R` and `2R`, with `R` doubled until the `L^{p_*}` tail beyond `R` holds
/// less than [`EXTREMAL_TAIL`] of the total mass.
pub fn extremal_function(a: &WeightVector, p: f64, ca: f64, cb: f64) -> Result<Radial<ExtremalProfile>> {
    let d = a.effective_dimension();
    let ex = Exponents::new(d, p)?;
    ex.require_subcritical()?;
    if p == 1.0 {
        return Err(Error::ExponentOutOfRange("the sharp constant is not attained at p = 1; no extremal function".into()));
    }
    if !(ca > 0.0 && cb > 0.0 && ca.is_finite() && cb.is_finite()) {
        return Err(Error::InvalidArgument(format!("extremal parameters a = {ca}, b = {cb} must be positive")));
    }
    let ps = ex.critical()?;
    let pc = p / (p - 1.0);
    let raw = ExtremalProfile { d, p, a: ca, b: cb, cutoff: f64::INFINITY };
    let density = |r: f64| r.powf(d - 1.0) * raw.raw(r).powf(ps);
    // ∫_R^∞ via r = R/s
    let tail = |r0: f64| adaptive_integrate(|s| density(r0 / s) * r0 / (s * s), 0.0, 1.0, ADAPTIVE_REL_TOL);
    let scale = (ca / cb).powf(1.0 / pc);
    let total = adaptive_integrate(density, 0.0, scale, ADAPTIVE_REL_TOL)? + tail(scale)?;
    let mut r = scale;
    let mut doublings = 0;
    while tail(r)? > EXTREMAL_TAIL * total {
        r *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::NoConvergence("extremal truncation radius".into()));
        }
    }
    Ok(Radial {
        n: a.dim(),
        profile: ExtremalProfile { cutoff: r, ..raw },
        smoothness: Smoothness::C1,
        label: format!("extremal(a={ca}, b={cb}, p={p}, R={r})"),
    })
}
