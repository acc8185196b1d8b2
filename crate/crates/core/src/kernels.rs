//! Kernel models.
//!
//! A [`KernelModel`] bundles a symmetric kernel `k(x, y)` with the metadata the
//! analysis layer needs (a name, real-valued parameters, smoothness class and an
//! optional fixed input dimension). Two models ship as built-ins:
//!
//! | name          | formula                          | smoothness  | dim |
//! |---------------|----------------------------------|-------------|-----|
//! | `gaussian_w2` | `exp(-4 |x - y|^2)`              | infinite    | any |
//! | `wendland_k0` | `max(1 - |x - y|, 0)`            | finite, 1.0 | 1   |
//!
//! Further kernels can be registered through [`KernelRegistry`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name of the built-in Gaussian kernel `exp(-4 |x - y|^2)`.
pub const GAUSSIAN_W2: &str = "gaussian_w2";
/// Name of the built-in Wendland kernel `max(1 - |x - y|, 0)`.
pub const WENDLAND_K0: &str = "wendland_k0";

/// Smoothness class of a translation invariant kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    /// Fourier transform decays like `(1 + |w|^2)^(-tau)`.
    Finite(f64),
    /// Fourier transform decays faster than any polynomial.
    Infinite,
}

type Evaluator = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A symmetric, strictly positive definite kernel together with its metadata.
///
/// Models are immutable and cheap to clone; evaluation is a pure function.
#[derive(Clone)]
pub struct KernelModel {
    name: String,
    params: BTreeMap<String, f64>,
    smoothness: Smoothness,
    dim: Option<usize>,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for KernelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelModel")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("smoothness", &self.smoothness)
            .field("dim", &self.dim)
            .finish()
    }
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl KernelModel {
    /// Gaussian kernel with width parameter 2, i.e. `exp(-4 |x - y|^2)`.
    pub fn gaussian_w2() -> Self {
        let mut params = BTreeMap::new();
        params.insert("width".to_string(), 2.0);
        KernelModel {
            name: GAUSSIAN_W2.to_string(),
            params,
            smoothness: Smoothness::Infinite,
            dim: None,
            eval: Arc::new(|x, y| (-4.0 * squared_distance(x, y)).exp()),
        }
    }

    /// Wendland kernel of order `k = 0` on the real line, `max(1 - |x - y|, 0)`.
    ///
    /// Only `d = 1` is supported.
    pub fn wendland_k0() -> Self {
        let mut params = BTreeMap::new();
        params.insert("k".to_string(), 0.0);
        KernelModel {
            name: WENDLAND_K0.to_string(),
            params,
            smoothness: Smoothness::Finite(1.0),
            dim: Some(1),
            eval: Arc::new(|x, y| (1.0 - (x[0] - y[0]).abs()).max(0.0)),
        }
    }

    /// Wraps a user supplied kernel function.
    ///
    /// The arguments are put into a canonical (lexicographic) order before the
    /// call, so the resulting model is exactly symmetric even if `f` is not
    /// bitwise symmetric.
    pub fn custom<F>(name: &str, smoothness: Smoothness, dim: Option<usize>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        KernelModel {
            name: name.to_string(),
            params: BTreeMap::new(),
            smoothness,
            dim,
            eval: Arc::new(move |x, y| {
                let swap = x
                    .iter()
                    .zip(y)
                    .find_map(|(a, b)| match a.total_cmp(b) {
                        std::cmp::Ordering::Equal => None,
                        o => Some(o == std::cmp::Ordering::Greater),
                    })
                    .unwrap_or(false);
                if swap {
                    f(y, x)
                } else {
                    f(x, y)
                }
            }),
        }
    }

    /// Adds a named parameter to the metadata.
    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Fixed input dimension, if the model has one.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Rejects a dimension the model cannot be evaluated in.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        match self.dim {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                expected: d,
                got: dim,
            }),
            _ => Ok(()),
        }
    }

    /// Evaluates `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        self.check_dim(x.len())?;
        Ok((self.eval)(x, y))
    }

    /// Evaluates `k(x, x)`.
    pub fn diag(&self, x: &[f64]) -> Result<f64> {
        self.eval(x, x)
    }

    /// Evaluation without dimension checks, for inner loops over validated data.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.eval)(x, y)
    }
}

/// Name-indexed collection of kernel models.
#[derive(Debug, Clone)]
pub struct KernelRegistry {
    models: BTreeMap<String, KernelModel>,
}

impl Default for KernelRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl KernelRegistry {
    pub fn empty() -> Self {
        KernelRegistry {
            models: BTreeMap::new(),
        }
    }

    /// Registry holding `gaussian_w2` and `wendland_k0`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(KernelModel::gaussian_w2());
        reg.register(KernelModel::wendland_k0());
        reg
    }

    /// Adds or replaces a model under its own name.
    pub fn register(&mut self, model: KernelModel) {
        self.models.insert(model.name.clone(), model);
    }

    pub fn get(&self, name: &str) -> Result<KernelModel> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownKernel(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }
}
