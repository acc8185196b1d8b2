//! Dense reference computations that do not share any code path with the
//! incremental Newton updates: the kernel matrix on the selected points is
//! factorized from scratch.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelModel;

/// Cholesky factorization `A_{X_n} = L L^T` plus `L^{-1} f`.
///
/// The interpolant is evaluated as `(L^{-1} k(q))^T (L^{-1} f)` rather than
/// through `alpha = A^{-1} f`, whose entries blow up for ill-conditioned
/// kernel matrices while the interpolant itself stays well behaved.
pub struct DenseInterpolant<'k> {
    kernel: &'k KernelModel,
    points: Vec<Vec<f64>>,
    chol: Option<Cholesky<f64, Dyn>>,
    weights: Option<DVector<f64>>,
}

impl<'k> DenseInterpolant<'k> {
    /// Factorizes the kernel matrix of `points`. `values`, when given, are the
    /// target values at the points and are used to solve `A alpha = f`.
    pub fn new<P: AsRef<[f64]>>(
        kernel: &'k KernelModel,
        points: &[P],
        values: Option<&[f64]>,
    ) -> Result<Self> {
        let n = points.len();
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p.as_ref().to_vec()).collect();
        if let Some(v) = values {
            if v.len() != n {
                return Err(invalid("value count differs from point count"));
            }
        }
        if n == 0 {
            return Ok(DenseInterpolant {
                kernel,
                points: pts,
                chol: None,
                weights: values.map(|_| DVector::zeros(0)),
            });
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = kernel.eval(&pts[i], &pts[j])?;
                a[(i, j)] = k;
                a[(j, i)] = k;
            }
        }
        let chol = Cholesky::new(a).ok_or(Error::Singular(n))?;
        let weights = values.map(|v| {
            let mut z = DVector::from_column_slice(v);
            chol.l_dirty().solve_lower_triangular_unchecked_mut(&mut z);
            z
        });
        Ok(DenseInterpolant {
            kernel,
            points: pts,
            chol: Some(chol),
            weights,
        })
    }

    /// `L^{-1} k(q)`
    fn whitened(&self, chol: &Cholesky<f64, Dyn>, query: &[f64]) -> Result<DVector<f64>> {
        let mut y = self.kernel_vector(query)?;
        chol.l_dirty().solve_lower_triangular_unchecked_mut(&mut y);
        Ok(y)
    }

    fn kernel_vector(&self, query: &[f64]) -> Result<DVector<f64>> {
        let mut k = DVector::zeros(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            k[i] = self.kernel.eval(query, p)?;
        }
        Ok(k)
    }

    /// `P_{X_n}(q) = sqrt(k(q,q) - k^T A^{-1} k)`, negative radicands clamped to 0.
    pub fn power(&self, query: &[f64]) -> Result<f64> {
        let kqq = self.kernel.diag(query)?;
        let Some(chol) = &self.chol else {
            return Ok(kqq.max(0.0).sqrt());
        };
        if self.points.iter().any(|p| p.as_slice() == query) {
            return Ok(0.0);
        }
        Ok((kqq - self.whitened(chol, query)?.norm_squared())
            .max(0.0)
            .sqrt())
    }

    /// Interpolant `s(q) = k(q)^T A^{-1} f`.
    pub fn value(&self, query: &[f64]) -> Result<f64> {
        let w = self
            .weights
            .as_ref()
            .ok_or_else(|| invalid("no target values were supplied"))?;
        let Some(chol) = &self.chol else {
            return Ok(0.0);
        };
        Ok(self.whitened(chol, query)?.dot(w))
    }
}

/// Power function at `query` for the point set `selected`.
pub fn power_oracle<P: AsRef<[f64]>>(
    kernel: &KernelModel,
    selected: &[P],
    query: &[f64],
) -> Result<f64> {
    DenseInterpolant::new(kernel, selected, None)?.power(query)
}

/// Kernel interpolant of `f_at_selected` evaluated at `query`.
pub fn interpolant_oracle<P: AsRef<[f64]>>(
    kernel: &KernelModel,
    selected: &[P],
    f_at_selected: &[f64],
    query: &[f64],
) -> Result<f64> {
    DenseInterpolant::new(kernel, selected, Some(f_at_selected))?.value(query)
}
