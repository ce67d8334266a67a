//! Monte Carlo integration against `x^A` with deterministic, chunked streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::region::{AxisBox, Region};
use crate::weights::WeightVector;

const CHUNK: usize = 4096;
const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub accepted: usize,
}

/// Inverse CDF of the density ∝ x^a on [lo, hi], lo ≥ 0.
fn sample_axis(a: f64, lo: f64, hi: f64, u: f64) -> f64 {
    if a == 0.0 {
        return lo + u * (hi - lo);
    }
    let e = a + 1.0;
    let (l, h) = (lo.powf(e), hi.powf(e));
    (l + u * (h - l)).powf(1.0 / e)
}

/// Estimates `∫_{box ∩ region} f x^A dx` by sampling the box from the
/// normalized weight and rejecting points outside `region`.
///
/// Chunk `k` draws from ChaCha8 seeded with `seed` on stream `k`, so the
/// result does not depend on the execution policy.
pub fn monte_carlo_integrate<F>(
    a: &WeightVector,
    bounds: &AxisBox,
    region: Option<&dyn Region>,
    f: F,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    bounds.check_in_region(a)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let n = a.dim();
    let chunks = samples.div_ceil(CHUNK);
    let partial = exec.map_range(chunks, |k| -> Result<(f64, f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let count = CHUNK.min(samples - k * CHUNK);
        let mut x = vec![0.0; n];
        let (mut s1, mut s2, mut acc) = (0.0, 0.0, 0usize);
        for _ in 0..count {
            for i in 0..n {
                let (lo, hi) = (bounds.lo[i], bounds.hi[i]);
                let u: f64 = rng.random();
                // boxes on weighted axes lie in one closed half-line
                x[i] = if lo < 0.0 && hi <= 0.0 && a.is_weighted(i) {
                    -sample_axis(a.exponents()[i], -hi, -lo, u)
                } else {
                    sample_axis(a.exponents()[i], lo, hi, u)
                };
            }
            if region.is_none_or(|r| r.contains(&x)) {
                let v = f(&x);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { node: x.clone(), value: v });
                }
                acc += 1;
                s1 += v;
                s2 += v * v;
            }
        }
        Ok((s1, s2, acc))
    });
    let partial: Vec<(f64, f64, usize)> = partial.into_iter().collect::<Result<_>>()?;
    let accepted: usize = partial.iter().map(|p| p.2).sum();
    let rate = accepted as f64 / samples as f64;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::LowAcceptance { rate });
    }
    let s1 = pairwise_sum(&partial.iter().map(|p| p.0).collect::<Vec<_>>());
    let s2 = pairwise_sum(&partial.iter().map(|p| p.1).collect::<Vec<_>>());
    let vol = bounds.weighted_measure(a);
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok(McEstimate { value: vol * mean, std_error: vol * (var / nf).sqrt(), samples, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::ball_measure;

    struct UnitBall;
    impl Region for UnitBall {
        fn dim(&self) -> usize {
            2
        }
        fn contains(&self, x: &[f64]) -> bool {
            x.iter().map(|v| v * v).sum::<f64>() < 1.0
        }
        fn bounding_box(&self) -> AxisBox {
            AxisBox::unit(2)
        }
    }

    #[test]
    fn estimates_ball_measure() {
        let a = WeightVector::new(vec![1.0, 2.0]).unwrap();
        let est = monte_carlo_integrate(&a, &AxisBox::unit(2), Some(&UnitBall), |_| 1.0, 200_000, 7, Exec::default()).unwrap();
        let m = ball_measure(&a);
        assert!((est.value - m).abs() < 5.0 * est.std_error + 1e-12);
    }

    #[test]
    fn policies_agree_bitwise() {
        let a = WeightVector::new(vec![0.5, 0.0]).unwrap();
        let b = AxisBox::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let f = |x: &[f64]| x[0] * x[1] * x[1];
        let s = monte_carlo_integrate(&a, &b, None, f, 50_000, 3, Exec::Sequential).unwrap();
        let p = monte_carlo_integrate(&a, &b, None, f, 50_000, 3, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn low_acceptance_is_an_error() {
        struct Tiny;
        impl Region for Tiny {
            fn dim(&self) -> usize {
                2
            }
            fn contains(&self, x: &[f64]) -> bool {
                x[0] < 1e-4 && x[1] < 1e-4
            }
            fn bounding_box(&self) -> AxisBox {
                AxisBox::unit(2)
            }
        }
        let a = WeightVector::zeros(2);
        let r = monte_carlo_integrate(&a, &AxisBox::unit(2), Some(&Tiny), |_| 1.0, 10_000, 1, Exec::Sequential);
        assert!(matches!(r, Err(Error::LowAcceptance { .. })));
    }
}
