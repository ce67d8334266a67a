use std::path::Path;

use monoweight::corpus::{item_rng, random_bumps, random_shapes, BumpLayout, CorpusEntry, FunctionSpec};
use monoweight::function::TestFunction;
use monoweight::inequalities::cov::COV_PIPELINE_TOL;
use monoweight::inequalities::morrey::DEFAULT_PAIRS;
use monoweight::inequalities::{
    cov_pipeline_agreement, cov_verify, envelope_from_ratios, morrey_check, morrey_quotient, sample_pairs,
    series_criterion, sobolev_check, trudinger_check, SOBOLEV_TOL,
};
use monoweight::integrals::Integrator;
use monoweight::isoperimetry::{
    isoperimetric_quotient, star_min, star_shape_search, Shape, ShapeDoc, StarSearchConfig, ISOPERIMETRIC_TOL,
};
use monoweight::neumann::{
    ball_solution_certificate, compatibility_report, grid_function_csv, solve_neumann, DomainExport, GridDomain2D,
    Shape2D,
};
use monoweight::rearrangement::{rearrange_with, rearrangement_integrator, rearrangement_report, LEVELS, POLYA_SZEGO_REL_TOL};
use monoweight::report::VerificationReport;
use monoweight::weights::{
    ball_measure, ball_perimeter, critical_exponent, full_ball_quotient, isoperimetric_constant, sobolev_constant,
};
use monoweight::{Exec, WeightVector};
use rand::Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::Record;
use crate::CliError;

/// Reports plus plot-ready side files (relative path, contents).
pub struct Outcome {
    pub records: Vec<Record>,
    pub files: Vec<(String, String)>,
}

pub fn default_tol(command: &str) -> f64 {
    match command {
        "verify-sobolev" | "cov-verify" => SOBOLEV_TOL,
        "verify-isop" | "shape-search" => ISOPERIMETRIC_TOL,
        "rearrange" => POLYA_SZEGO_REL_TOL,
        _ => 0.0,
    }
}

fn weight(cfg: &RunConfig) -> Result<WeightVector, CliError> {
    if cfg.a.is_empty() {
        return Err(CliError::Usage("missing --A".into()));
    }
    Ok(WeightVector::new(cfg.a.clone())?)
}

fn record(cfg: &RunConfig, id: String, report: VerificationReport) -> Record {
    Record { id, pass: report.pass, report, config: cfg.clone() }
}

/// Ordered fan-out over corpus items; the first failing item aborts with its id.
fn sweep<T, F>(items: &[T], f: F) -> Result<Vec<Record>, CliError>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<Record, CliError> + Sync + Send,
{
    let indexed: Vec<(usize, &T)> = items.iter().enumerate().collect();
    Exec::default().map(&indexed, |(k, t)| f(*k, t)).into_iter().collect()
}

fn format_p(p: f64) -> String {
    format!("{p}")
}

/// Function corpus for `cfg`: generated from the seed or read from a
/// JSON-lines file of corpus entries for the same weight.
fn function_corpus(cfg: &RunConfig, a: &WeightVector, default: BumpLayout) -> Result<Vec<FunctionSpec>, CliError> {
    match cfg.corpus.as_str() {
        "random" => Ok(random_bumps(a, cfg.count, cfg.seed, default)),
        "near-origin" => Ok(random_bumps(a, cfg.count, cfg.seed, BumpLayout::NearOrigin)),
        "off-center" => Ok(random_bumps(a, cfg.count, cfg.seed, BumpLayout::OffCenter)),
        "extremal" => Ok((0..cfg.count)
            .map(|k| {
                let mut rng = item_rng(cfg.seed, k);
                FunctionSpec::Extremal { a: rng.random_range(0.5..2.0), b: rng.random_range(0.5..2.0) }
            })
            .collect()),
        path => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Usage(format!("unknown corpus '{path}' ({e})")))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let e: CorpusEntry =
                        serde_json::from_str(l).map_err(|e| CliError::Usage(format!("bad corpus line: {e}")))?;
                    if e.a != *a {
                        return Err(CliError::Usage(format!("corpus entry has A = {:?}", e.a.exponents())));
                    }
                    Ok(e.spec)
                })
                .collect()
        }
    }
}

fn build(spec: &FunctionSpec, a: &WeightVector, p: f64, id: &str) -> Result<Box<dyn TestFunction + Send>, CliError> {
    spec.build(a, p).map_err(|e| CliError::from(e).context(id))
}

#[derive(Serialize)]
struct ExponentRow {
    p: f64,
    p_star: f64,
    c_p: f64,
}

#[derive(Serialize)]
struct TrudingerRow {
    c0: f64,
    c1: f64,
    c2: f64,
}

#[derive(Serialize)]
struct ConstantsTable {
    #[serde(rename = "A")]
    a: Vec<f64>,
    n: usize,
    #[serde(rename = "D")]
    d: f64,
    k: usize,
    ball_measure: f64,
    ball_perimeter: f64,
    c1: f64,
    full_ball_quotient: f64,
    exponents: Vec<ExponentRow>,
    trudinger: Option<TrudingerRow>,
    config: RunConfig,
}

/// Constant table as pretty JSON.
pub fn constants(cfg: &RunConfig) -> Result<String, CliError> {
    let a = weight(cfg)?;
    let d = a.effective_dimension();
    let exponents = cfg
        .exponents(&[])
        .into_iter()
        .map(|p| Ok(ExponentRow { p, p_star: critical_exponent(&a, p)?, c_p: sobolev_constant(&a, p)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let trudinger = if d > 1.0 {
        let s = series_criterion(&a)?;
        Some(TrudingerRow { c0: s.c0, c1: s.c1, c2: s.c2 })
    } else {
        None
    };
    let table = ConstantsTable {
        a: cfg.a.clone(),
        n: a.dim(),
        d,
        k: a.positive_count(),
        ball_measure: ball_measure(&a),
        ball_perimeter: ball_perimeter(&a),
        c1: isoperimetric_constant(&a),
        full_ball_quotient: full_ball_quotient(&a),
        exponents,
        trudinger,
        config: cfg.clone(),
    };
    Ok(serde_json::to_string_pretty(&table).expect("table serializes") + "\n")
}

pub fn verify_sobolev(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    let ps = cfg.exponents(&[]);
    if ps.is_empty() {
        return Err(CliError::Usage("verify-sobolev needs --p or --p-grid".into()));
    }
    for p in &ps {
        critical_exponent(&a, *p)?;
    }
    let specs = function_corpus(cfg, &a, BumpLayout::NearOrigin)?;
    let items: Vec<(f64, usize)> = ps.iter().flat_map(|p| (0..specs.len()).map(move |k| (*p, k))).collect();
    let integ = Integrator::default();
    let records = sweep(&items, |_, &(p, k)| {
        let id = format!("sobolev-p{}-{k:04}", format_p(p));
        let u = build(&specs[k], &a, p, &id)?;
        let rep = sobolev_check(&a, p, u.as_ref(), &integ, cfg.tol, false).map_err(|e| CliError::from(e).context(&id))?;
        Ok(record(cfg, id, rep))
    })?;
    Ok(Outcome { records, files: Vec::new() })
}

fn shape_corpus(cfg: &RunConfig, a: &WeightVector) -> Result<Vec<Shape>, CliError> {
    match cfg.corpus.as_str() {
        "random" => Ok(random_shapes(a, cfg.count, cfg.seed)),
        "sector" => Ok([0.5, 1.0, 3.0].into_iter().map(Shape::sector_ball).collect()),
        path => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Usage(format!("unknown shape corpus '{path}' ({e})")))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let doc: ShapeDoc =
                        serde_json::from_str(l).map_err(|e| CliError::Usage(format!("bad shape line: {e}")))?;
                    if doc.a != *a {
                        return Err(CliError::Usage(format!("shape entry has A = {:?}", doc.a.exponents())));
                    }
                    Ok(doc.shape)
                })
                .collect()
        }
    }
}

pub fn verify_isop(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    let shapes = shape_corpus(cfg, &a)?;
    let records = sweep(&shapes, |k, s| {
        let id = format!("isop-{k:04}");
        s.validate(&a).map_err(|e| CliError::from(e).context(&id))?;
        let rep = isoperimetric_quotient(&a, s).map_err(|e| CliError::from(e).context(&id))?;
        let mut v = rep.to_verification();
        v.pass = rep.margin >= -cfg.tol;
        Ok(record(cfg, id, v.with_meta("tolerance", cfg.tol)))
    })?;
    Ok(Outcome { records, files: Vec::new() })
}

/// Seed of the independent calibration corpus for empirical envelopes.
fn calibration_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_ca1b
}

pub fn verify_morrey(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    let p = cfg.p.ok_or_else(|| CliError::Usage("verify-morrey needs --p".into()))?;
    monoweight::inequalities::holder_exponent(&a, p)?;
    let integ = Integrator::default();
    let calib_cfg = RunConfig { seed: calibration_seed(cfg.seed), ..cfg.clone() };
    let calib = function_corpus(&calib_cfg, &a, BumpLayout::NearOrigin)?;
    let ratios: Vec<f64> = Exec::default()
        .map(&calib.iter().enumerate().collect::<Vec<_>>(), |(k, s)| -> Result<f64, CliError> {
            let id = format!("calibration-{k:04}");
            let u = build(s, &a, p, &id)?;
            Ok(morrey_quotient(&a, p, u.as_ref(), calib_cfg.seed.wrapping_add(*k as u64), &integ)
                .map_err(|e| CliError::from(e).context(&id))?
                .ratio)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let env = envelope_from_ratios(&ratios)?;
    let specs = function_corpus(cfg, &a, BumpLayout::NearOrigin)?;
    let records = sweep(&specs, |k, s| {
        let id = format!("morrey-{k:04}");
        let u = build(s, &a, p, &id)?;
        let pairs = sample_pairs(&a, u.as_ref(), DEFAULT_PAIRS, cfg.seed.wrapping_add(k as u64));
        let mut rep = morrey_check(&a, p, u.as_ref(), &pairs, env.constant, &integ, cfg.tol)
            .map_err(|e| CliError::from(e).context(&id))?;
        rep.meta.remove("pair_ratios");
        Ok(record(
            cfg,
            id,
            rep.with_meta("envelope_max_ratio", env.max_ratio)
                .with_meta("envelope_samples", env.samples)
                .with_meta("calibration_seed", calib_cfg.seed),
        ))
    })?;
    Ok(Outcome { records, files: Vec::new() })
}

/// Smallest sector ball holding the support box of `u`.
fn enclosing_sector_ball(u: &dyn TestFunction) -> Shape {
    let s = u.support();
    let r = s.lo.iter().zip(&s.hi).map(|(l, h)| l.abs().max(h.abs()).powi(2)).sum::<f64>().sqrt();
    Shape::sector_ball(r * (1.0 + 1e-9))
}

pub fn verify_trudinger(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    let crit = series_criterion(&a)?;
    let d = a.effective_dimension();
    let specs = function_corpus(cfg, &a, BumpLayout::NearOrigin)?;
    let integ = Integrator::default();
    let records = sweep(&specs, |k, s| {
        let id = format!("trudinger-{k:04}");
        let u = build(s, &a, d, &id)?;
        let omega = enclosing_sector_ball(u.as_ref());
        let mut rep = trudinger_check(&a, u.as_ref(), &omega, crit.c1, crit.c2, "series", &integ)
            .map_err(|e| CliError::from(e).context(&id))?;
        rep.pass = rep.margin >= -cfg.tol * crit.c2;
        Ok(record(cfg, id, rep.with_meta("c0", crit.c0).with_meta("series_x", crit.x)))
    })?;
    Ok(Outcome { records, files: Vec::new() })
}

pub fn rearrange(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    let ps = cfg.exponents(&[1.0, 2.0]);
    for p in &ps {
        critical_exponent(&a, *p)?;
    }
    let specs = function_corpus(cfg, &a, BumpLayout::OffCenter)?;
    let integ = rearrangement_integrator();
    let results: Vec<(Vec<Record>, (String, String))> = Exec::default()
        .map(&specs.iter().enumerate().collect::<Vec<_>>(), |(k, s)| -> Result<_, CliError> {
            let base = format!("rearrange-{k:04}");
            let u = build(s, &a, ps[0], &base)?;
            let r = rearrange_with(&a, u.as_ref(), &integ, LEVELS).map_err(|e| CliError::from(e).context(&base))?;
            let mut recs = Vec::new();
            for p in &ps {
                let id = format!("{base}-p{}", format_p(*p));
                let rep = rearrangement_report(&a, u.as_ref(), &r, *p, cfg.tol, &integ)
                    .map_err(|e| CliError::from(e).context(&id))?;
                recs.push(record(cfg, id, rep));
            }
            Ok((recs, (format!("profiles/{base}.csv"), r.profile.to_csv())))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut files = Vec::new();
    for (r, f) in results {
        records.extend(r);
        files.push(f);
    }
    Ok(Outcome { records, files })
}

fn random_star(seed: u64, k: usize) -> Vec<f64> {
    let mut rng = item_rng(seed, k);
    let mut coeffs = vec![1.0];
    for j in 1..=3 {
        coeffs.push(rng.random_range(-0.2..0.2) / j as f64);
    }
    while star_min(&coeffs) < 0.3 {
        coeffs.iter_mut().skip(1).for_each(|c| *c *= 0.5);
    }
    let scale = rng.random_range(0.7..1.3);
    coeffs.iter().map(|c| c * scale).collect()
}

pub fn shape_search(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    if a.dim() != 2 {
        return Err(CliError::Usage("shape-search is planar: --A needs two entries".into()));
    }
    let config = StarSearchConfig { steps: cfg.steps.unwrap_or(StarSearchConfig::default().steps), ..Default::default() };
    let inits: Vec<Vec<f64>> = (0..cfg.count).map(|k| random_star(cfg.seed, k)).collect();
    let results: Vec<(Record, (String, String))> = Exec::default()
        .map(&inits.iter().enumerate().collect::<Vec<_>>(), |(k, init)| -> Result<_, CliError> {
            let id = format!("shape-search-{k:04}");
            let res = star_shape_search(&a, init, config).map_err(|e| CliError::from(e).context(&id))?;
            let q = res.final_quotient();
            let monotone = res.trace.windows(2).all(|w| w[1] <= w[0]);
            let margin = q - res.c1;
            let rep = VerificationReport::new("shape_search", q, res.c1, res.c1, margin, margin >= -cfg.tol && monotone)
                .with_meta("initial_quotient", res.trace[0])
                .with_meta("accepted", res.accepted)
                .with_meta("rejected", res.rejected)
                .with_meta("aborted", res.aborted)
                .with_meta("monotone", monotone)
                .with_meta("distance_from_constant", res.distance_from_constant())
                .with_meta("coeffs", res.coeffs.clone());
            let mut trace = String::from("step,quotient\n");
            for (i, v) in res.trace.iter().enumerate() {
                trace.push_str(&format!("{i},{v:e}\n"));
            }
            Ok((record(cfg, id.clone(), rep), (format!("traces/{id}.csv"), trace)))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let (records, files) = results.into_iter().unzip();
    Ok(Outcome { records, files })
}

/// Default planar test domains, all at least 0.28 from both axes.
pub fn default_domains() -> Vec<Shape2D> {
    vec![
        Shape2D::ArcTube { center: [0.0, 0.0], radius: 2.0, width: 0.4, theta0: 0.35, theta1: 1.2 },
        Shape2D::Disk { center: [1.5, 1.3], radius: 0.9 },
        Shape2D::Ellipse { center: [1.6, 1.4], semi: [1.0, 0.6] },
    ]
}

pub fn solve_neumann_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = weight(cfg)?;
    if a.dim() != 2 {
        return Err(CliError::Usage("solve-neumann is planar: --A needs two entries".into()));
    }
    let h = cfg.h.unwrap_or(0.02);
    if !(h > 0.0 && h <= 0.1) {
        return Err(CliError::Usage(format!("grid spacing h = {h} must lie in (0, 0.1]")));
    }
    let domains = match &cfg.domain {
        Some(d) => vec![d.clone()],
        None => default_domains(),
    };
    let mut records = vec![record(cfg, "ball-certificate".into(), ball_solution_certificate(&a))];
    let mut files = Vec::new();
    for (k, shape) in domains.iter().enumerate() {
        let id = format!("neumann-{k:02}");
        let ctx = |e: monoweight::Error| CliError::from(e).context(&id);
        let dom = GridDomain2D::from_shape(&a, shape, h).map_err(ctx)?;
        let sol = solve_neumann(&a, &dom).map_err(ctx)?;
        let rep = compatibility_report(&a, shape, &sol).map_err(ctx)?;
        files.push((
            format!("neumann/{id}-domain.json"),
            serde_json::to_string(&DomainExport::of(&dom)).expect("domain serializes") + "\n",
        ));
        files.push((format!("neumann/{id}-u.csv"), grid_function_csv(&dom, &sol.u).map_err(ctx)?));
        records.push(record(cfg, id, rep));
    }
    Ok(Outcome { records, files })
}

pub fn cov_verify_cmd(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let alpha = match (&cfg.alpha, cfg.a.is_empty()) {
        (Some(al), _) => al.clone(),
        (None, false) => cfg.a.iter().map(|t| t / (1.0 + t)).collect(),
        (None, true) => return Err(CliError::Usage("cov-verify needs --alpha or --A".into())),
    };
    let a = WeightVector::from_gradient_powers(&alpha)?;
    if !cfg.a.is_empty() && cfg.a.len() != alpha.len() {
        return Err(CliError::Usage("--A and --alpha have different lengths".into()));
    }
    cfg.a = a.exponents().to_vec();
    cfg.n = alpha.len();
    cfg.alpha = Some(alpha.clone());
    let cfg = &*cfg;
    let p = cfg.p.unwrap_or(2.0);
    critical_exponent(&a, p)?;
    let specs = function_corpus(cfg, &a, BumpLayout::NearOrigin)?;
    let integ = Integrator::with_resolution(12, 8);
    let records = sweep(&specs, |k, s| {
        let id = format!("cov-{k:04}");
        let u = build(s, &a, p, &id)?;
        let ctx = |e: monoweight::Error| CliError::from(e).context(&id);
        let mut rep = cov_verify(&alpha, p, u.as_ref(), &integ, cfg.tol).map_err(ctx)?;
        let (dv, dg) = cov_pipeline_agreement(&alpha, p, u.as_ref(), &integ).map_err(ctx)?;
        rep.pass = rep.pass && dv <= COV_PIPELINE_TOL && dg <= COV_PIPELINE_TOL;
        Ok(record(cfg, id, rep.with_meta("pipeline_value_diff", dv).with_meta("pipeline_gradient_diff", dg)))
    })?;
    Ok(Outcome { records, files: Vec::new() })
}
