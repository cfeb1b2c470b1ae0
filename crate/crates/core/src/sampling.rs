//! Seeded sampling shared by the empirical estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Vector;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the closed ball of the given radius centered at 0.
pub fn point_in_ball(rng: &mut SampleRng, dim: usize, radius: f64) -> Vector {
    let dir = Vector::from_fn(dim, |_| rng.sample::<f64, _>(StandardNormal));
    let n = dir.norm();
    if n == 0.0 {
        return Vector::zeros(dim);
    }
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.scale(r / n)
}

pub fn uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_stay_inside_and_are_reproducible() {
        let mut a = rng(7);
        let mut b = rng(7);
        for _ in 0..200 {
            let p = point_in_ball(&mut a, 5, 2.5);
            assert!(p.norm() <= 2.5 + 1e-12);
            assert_eq!(p, point_in_ball(&mut b, 5, 2.5));
        }
    }
}
