//! Serializable test-function specifications and seeded random corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Bump, PlateauProfile, Radial, Smoothness, TestFunction};
use crate::inequalities::extremal_function;
use crate::isoperimetry::{star_min, Shape, ShapeKind};
use crate::weights::WeightVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    Bump { center: Vec<f64>, radii: Vec<f64>, amplitude: f64 },
    /// `u_{a,b}` for the entry's weight and exponent.
    Extremal { a: f64, b: f64 },
    Plateau { radius: f64, band: f64, height: f64 },
}

/// One corpus document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub spec: FunctionSpec,
    #[serde(rename = "A")]
    pub a: WeightVector,
    pub p: f64,
    pub seed: u64,
}

impl FunctionSpec {
    pub fn build(&self, a: &WeightVector, p: f64) -> Result<Box<dyn TestFunction + Send>> {
        let n = a.dim();
        match self {
            FunctionSpec::Bump { center, radii, amplitude } => {
                if center.len() != n || radii.len() != n {
                    return Err(Error::InvalidArgument(format!("bump dimension does not match n = {n}")));
                }
                if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::InvalidArgument(format!("bump radii {radii:?} must be positive")));
                }
                Ok(Box::new(Bump::anisotropic(center.clone(), radii.clone(), *amplitude)))
            }
            FunctionSpec::Extremal { a: ca, b: cb } => Ok(Box::new(extremal_function(a, p, *ca, *cb)?)),
            FunctionSpec::Plateau { radius, band, height } => {
                if !(*radius > 0.0 && *band > 0.0) {
                    return Err(Error::InvalidArgument("plateau radius and band must be positive".into()));
                }
                Ok(Box::new(Radial {
                    n,
                    profile: PlateauProfile { radius: *radius, band: *band, height: *height },
                    smoothness: Smoothness::C1,
                    label: format!("plateau(r={radius}, band={band}, h={height})"),
                }))
            }
        }
    }
}

impl CorpusEntry {
    pub fn build(&self) -> Result<Box<dyn TestFunction + Send>> {
        self.spec.build(&self.a, self.p)
    }
}

/// Placement of random bumps relative to the coordinate hyperplanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpLayout {
    /// Centers within 0.8 radii of the origin on every axis and at most 0.3
    /// on the negative side of a weighted axis, so every support meets the
    /// region and most cross the hyperplanes.
    NearOrigin,
    /// Supports inside the open region, away from every weighted hyperplane.
    OffCenter,
}

/// Item `k` of the corpus depends only on `(seed, k)`.
pub fn item_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

pub fn random_bump(a: &WeightVector, layout: BumpLayout, rng: &mut impl Rng) -> FunctionSpec {
    let n = a.dim();
    let r: f64 = rng.random_range(0.4..1.6);
    let radii: Vec<f64> = (0..n).map(|_| r * rng.random_range(0.75..1.25)).collect();
    let center = (0..n)
        .map(|i| match layout {
            BumpLayout::NearOrigin if a.is_weighted(i) => r * rng.random_range(-0.3..0.8),
            BumpLayout::NearOrigin => r * rng.random_range(-0.8..0.8),
            BumpLayout::OffCenter if a.is_weighted(i) => radii[i] + r * rng.random_range(0.1..1.5),
            BumpLayout::OffCenter => r * rng.random_range(-1.0..1.0),
        })
        .collect();
    let amplitude = rng.random_range(0.5..2.0);
    FunctionSpec::Bump { center, radii, amplitude }
}

pub fn random_bumps(a: &WeightVector, count: usize, seed: u64, layout: BumpLayout) -> Vec<FunctionSpec> {
    (0..count).map(|k| random_bump(a, layout, &mut item_rng(seed, k))).collect()
}

/// Random domain: box, shifted ball, ellipsoid sector or (in the plane)
/// perturbed star, chosen by `k mod 4`; in other dimensions the star slot
/// is another box.
pub fn random_shape(a: &WeightVector, k: usize, rng: &mut impl Rng) -> Shape {
    let n = a.dim();
    let kind = match k % 4 {
        1 => {
            let r: f64 = rng.random_range(0.2..1.5);
            let c = (0..n)
                .map(|i| if a.is_weighted(i) { r + rng.random_range(0.0..1.5) } else { rng.random_range(-1.0..1.0) })
                .collect();
            ShapeKind::ShiftedBall { r, c }
        }
        2 => ShapeKind::EllipsoidSector { axes: (0..n).map(|_| rng.random_range(0.3..2.0)).collect() },
        3 if n == 2 => {
            let mut coeffs = vec![1.0];
            for j in 1..=3 {
                coeffs.push(rng.random_range(-0.25..0.25) / j as f64);
            }
            // keep the profile well inside positivity
            while star_min(&coeffs) < 0.3 {
                coeffs.iter_mut().skip(1).for_each(|c| *c *= 0.5);
            }
            let scale = rng.random_range(0.5..2.0);
            ShapeKind::Star2d { coeffs: coeffs.iter().map(|c| c * scale).collect() }
        }
        _ => {
            let lo: Vec<f64> = (0..n)
                .map(|i| if a.is_weighted(i) { rng.random_range(0.0..1.0) } else { rng.random_range(-1.0..1.0) })
                .collect();
            let hi = lo.iter().map(|l| l + rng.random_range(0.2..2.0)).collect();
            ShapeKind::Box { lo, hi }
        }
    };
    Shape::new(kind)
}

pub fn random_shapes(a: &WeightVector, count: usize, seed: u64) -> Vec<Shape> {
    (0..count).map(|k| random_shape(a, k, &mut item_rng(seed, k))).collect()
}

pub fn build_all(specs: &[FunctionSpec], a: &WeightVector, p: f64) -> Result<Vec<Box<dyn TestFunction + Send>>> {
    specs.iter().map(|s| s.build(a, p)).collect()
}
