//! Finite candidate sets standing in for the continuous domain, and the
//! fill/separation distances measured on them.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// How a candidate set was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    UniformGrid {
        resolution: usize,
    },
    SeededRandom {
        seed: u64,
        count: usize,
    },
    SubdomainProjection {
        source_seed: Option<u64>,
        fixed_axis: usize,
        fixed_value: f64,
    },
    Explicit,
    Union(Vec<Provenance>),
}

impl Provenance {
    /// Seed of the generator the points came from, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Provenance::SeededRandom { seed, .. } => Some(*seed),
            Provenance::SubdomainProjection { source_seed, .. } => *source_seed,
            Provenance::Union(parts) => parts.iter().find_map(Provenance::seed),
            _ => None,
        }
    }
}

/// An ordered set of pairwise distinct points inside an axis-aligned box.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    coords: Vec<f64>,
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    provenance: Provenance,
    raw_count: usize,
}

#[inline]
fn key(p: &[f64]) -> Vec<u64> {
    // +0.0 folds -0.0 onto 0.0
    p.iter().map(|x| (x + 0.0).to_bits()).collect()
}

impl CandidateSet {
    fn build(
        points: impl IntoIterator<Item = Vec<f64>>,
        dim: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let mut seen = HashSet::new();
        let mut coords = Vec::new();
        let mut raw_count = 0;
        for p in points {
            raw_count += 1;
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            for (i, &x) in p.iter().enumerate() {
                if !x.is_finite() || x < lower[i] || x > upper[i] {
                    return Err(invalid(format!(
                        "point {:?} lies outside the bounding box",
                        p
                    )));
                }
            }
            if seen.insert(key(&p)) {
                coords.extend_from_slice(&p);
            }
        }
        if coords.is_empty() {
            return Err(invalid("candidate set is empty"));
        }
        Ok(CandidateSet {
            coords,
            dim,
            lower,
            upper,
            provenance,
            raw_count,
        })
    }

    /// `count` i.i.d. uniform points in `[0,1]^dim`, deterministic in `seed`.
    pub fn sample_random(seed: u64, count: usize, dim: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("count must be at least 1"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Self::build(
            pts,
            dim,
            vec![0.0; dim],
            vec![1.0; dim],
            Provenance::SeededRandom { seed, count },
        )
    }

    /// Tensor grid with `resolution` equispaced nodes per axis, endpoints included.
    pub fn uniform_grid(resolution: usize, dim: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(invalid("grid resolution must be at least 2"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let total = resolution
            .checked_pow(dim as u32)
            .ok_or_else(|| invalid("grid too large"))?;
        let step = 1.0 / (resolution - 1) as f64;
        let pts = (0..total).map(|mut idx| {
            let mut p = vec![0.0; dim];
            for c in p.iter_mut() {
                let i = idx % resolution;
                idx /= resolution;
                *c = if i == resolution - 1 {
                    1.0
                } else {
                    i as f64 * step
                };
            }
            p
        });
        Self::build(
            pts,
            dim,
            vec![0.0; dim],
            vec![1.0; dim],
            Provenance::UniformGrid { resolution },
        )
    }

    /// Explicit points, which must lie in `[0,1]^d`.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        Self::build(
            points,
            dim,
            vec![0.0; dim],
            vec![1.0; dim],
            Provenance::Explicit,
        )
    }

    /// Explicit points inside the box `[lower, upper]`.
    pub fn from_points_in_box(
        points: Vec<Vec<f64>>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let dim = lower.len();
        if upper.len() != dim || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(invalid("malformed bounding box"));
        }
        Self::build(points, dim, lower, upper, Provenance::Explicit)
    }

    /// Reads one point per row, coordinates comma separated. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            points.push(p);
        }
        Self::from_points(points)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of points supplied before duplicates were removed.
    pub fn raw_count(&self) -> usize {
        self.raw_count
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Replaces coordinate `axis` of every point by `value` and drops the
    /// duplicates this creates.
    pub fn project_to_slice(&self, axis: usize, value: f64) -> Result<Self> {
        if axis >= self.dim {
            return Err(invalid(format!(
                "axis {axis} out of range for dimension {}",
                self.dim
            )));
        }
        let pts = self.points().map(|p| {
            let mut q = p.to_vec();
            q[axis] = value;
            q
        });
        Self::build(
            pts,
            self.dim,
            self.lower.clone(),
            self.upper.clone(),
            Provenance::SubdomainProjection {
                source_seed: self.provenance.seed(),
                fixed_axis: axis,
                fixed_value: value,
            },
        )
    }

    /// Concatenation of two sets (duplicates removed, order kept: `self` first).
    pub fn union(&self, other: &CandidateSet) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let lower = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| a.min(*b))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.max(*b))
            .collect();
        let pts = self.points().chain(other.points()).map(<[f64]>::to_vec);
        Self::build(
            pts,
            self.dim,
            lower,
            upper,
            Provenance::Union(vec![self.provenance.clone(), other.provenance.clone()]),
        )
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest distance from an evaluation point to its nearest selected point.
pub fn fill_distance<P: AsRef<[f64]> + Sync>(
    selected: &[P],
    evaluation: &CandidateSet,
) -> Result<f64> {
    if selected.is_empty() {
        return Err(invalid("fill distance needs at least one selected point"));
    }
    for p in selected {
        if p.as_ref().len() != evaluation.dim() {
            return Err(Error::DimensionMismatch {
                expected: evaluation.dim(),
                got: p.as_ref().len(),
            });
        }
    }
    let h = (0..evaluation.len())
        .into_par_iter()
        .map(|i| {
            let x = evaluation.point(i);
            selected
                .iter()
                .map(|p| distance(x, p.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(h)
}

/// Half the smallest pairwise distance among the selected points.
pub fn separation_distance<P: AsRef<[f64]>>(selected: &[P]) -> Result<f64> {
    if selected.len() < 2 {
        return Err(invalid("separation distance needs at least two points"));
    }
    let dim = selected[0].as_ref().len();
    let mut q = f64::INFINITY;
    for (i, a) in selected.iter().enumerate() {
        if a.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.as_ref().len(),
            });
        }
        for b in &selected[i + 1..] {
            q = q.min(distance(a.as_ref(), b.as_ref()));
        }
    }
    Ok(0.5 * q)
}
