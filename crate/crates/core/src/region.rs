use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightVector;

/// Anything with a membership test and a bounding box; the Monte Carlo
/// backend samples these by rejection.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    fn bounding_box(&self) -> AxisBox;
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidDomain("box corners must have equal, nonzero dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidDomain(format!("degenerate box {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(n: usize) -> Self {
        Self { lo: vec![0.0; n], hi: vec![1.0; n] }
    }

    pub fn cube(center: &[f64], half: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half).collect(),
            hi: center.iter().map(|c| c + half).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|v| v * s).collect(),
            hi: self.hi.iter().map(|v| v * s).collect(),
        }
    }

    /// Intersection with the closure of ℝⁿ_*; `None` when empty.
    pub fn clip_to_region(&self, a: &WeightVector) -> Option<AxisBox> {
        let mut lo = self.lo.clone();
        for (i, l) in lo.iter_mut().enumerate() {
            if a.is_weighted(i) {
                *l = l.max(0.0);
            }
        }
        if lo.iter().zip(&self.hi).any(|(l, h)| l >= h) {
            None
        } else {
            Some(AxisBox { lo, hi: self.hi.clone() })
        }
    }

    /// Checks that the box does not extend into `x_i < 0` on weighted axes.
    pub fn check_in_region(&self, a: &WeightVector) -> Result<()> {
        for i in 0..self.dim() {
            if a.is_weighted(i) && self.lo[i] < 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "box crosses the hyperplane x_{} = 0 where A_{} = {} > 0",
                    i + 1,
                    i + 1,
                    a.exponents()[i]
                )));
            }
        }
        Ok(())
    }

    /// ∫_box x^A dx in closed form (box inside the closed region).
    pub fn weighted_measure(&self, a: &WeightVector) -> f64 {
        (0..self.dim())
            .map(|i| axis_moment(a.exponents()[i], self.lo[i], self.hi[i]))
            .product()
    }
}

/// ∫_lo^hi |x|^a dx.
pub fn axis_moment(a: f64, lo: f64, hi: f64) -> f64 {
    let prim = |x: f64| x.signum() * x.abs().powf(a + 1.0) / (a + 1.0);
    prim(hi) - prim(lo)
}

impl Region for AxisBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    fn bounding_box(&self) -> AxisBox {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_measure() {
        let a = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!((AxisBox::unit(2).weighted_measure(&a) - 0.25).abs() < 1e-15);
        let a0 = WeightVector::new(vec![0.0, 2.0]).unwrap();
        let b = AxisBox::new(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((b.weighted_measure(&a0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_crossing_weighted_axis() {
        let a = WeightVector::new(vec![1.0, 0.0]).unwrap();
        let b = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!(b.check_in_region(&a).is_err());
        let clipped = b.clip_to_region(&a).unwrap();
        assert_eq!(clipped.lo, vec![0.0, -1.0]);
        assert!(clipped.check_in_region(&a).is_ok());
    }
}
