//! Target functions.
//!
//! Inequalities involving `|r_n|_H` need a target with a known native norm,
//! so [`SynthesizedTarget`] builds `f = sum_i a_i k(., y_i)` with
//! `|f|_H^2 = a^T A_Y a`. Power laws are used for sup-norm experiments only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::geometry::CandidateSet;
use crate::kernels::KernelModel;

/// A finite kernel expansion with exactly known native norm.
#[derive(Debug, Clone)]
pub struct SynthesizedTarget {
    kernel: KernelModel,
    centers: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    norm_sq: f64,
}

impl SynthesizedTarget {
    pub fn new(kernel: &KernelModel, centers: Vec<Vec<f64>>, coeffs: Vec<f64>) -> Result<Self> {
        if centers.len() != coeffs.len() || centers.is_empty() {
            return Err(invalid("need matching, nonempty centers and coefficients"));
        }
        let mut norm_sq = 0.0;
        for (i, (yi, ai)) in centers.iter().zip(&coeffs).enumerate() {
            norm_sq += ai * ai * kernel.eval(yi, yi)?;
            for (yj, aj) in centers[..i].iter().zip(&coeffs) {
                norm_sq += 2.0 * ai * aj * kernel.eval(yi, yj)?;
            }
        }
        Ok(SynthesizedTarget {
            kernel: kernel.clone(),
            centers,
            coeffs,
            norm_sq,
        })
    }

    /// Centers uniform in `[0, 1]^dim` and coefficients uniform in `[-1, 1]`,
    /// each drawn from its own seeded stream.
    pub fn random(
        kernel: &KernelModel,
        dim: usize,
        centers_seed: u64,
        center_count: usize,
        coeff_seed: u64,
    ) -> Result<Self> {
        kernel.check_dim(dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(centers_seed);
        let centers = (0..center_count)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(coeff_seed);
        let coeffs = (0..center_count)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        Self::new(kernel, centers, coeffs)
    }

    /// `|f|_H^2`
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (y, a) in self.centers.iter().zip(&self.coeffs) {
            s += a * self.kernel.eval(x, y)?;
        }
        Ok(s)
    }

    pub fn values_on(&self, candidates: &CandidateSet) -> Result<Vec<f64>> {
        candidates.points().map(|x| self.eval(x)).collect()
    }
}

/// `x^alpha` at every candidate of a one-dimensional set in `[0, inf)`.
pub fn power_law(candidates: &CandidateSet, alpha: f64) -> Result<Vec<f64>> {
    if candidates.dim() != 1 {
        return Err(invalid("power-law targets are one-dimensional"));
    }
    if !(alpha > 0.0) {
        return Err(invalid(format!("exponent must be positive, got {alpha}")));
    }
    candidates
        .points()
        .map(|x| {
            if x[0] < 0.0 {
                Err(invalid(format!("power law needs x >= 0, got {}", x[0])))
            } else {
                Ok(x[0].powf(alpha))
            }
        })
        .collect()
}
