//! Ordinary least squares by Householder QR.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::t_two_sided_p;

/// Relative threshold on |R_ii| / max_j |R_jj| below which a column is treated
/// as linearly dependent on the preceding ones.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsDiagnostics {
    pub n_obs: usize,
    pub n_params: usize,
    pub dof: usize,
    pub rss: f64,
    /// Centered total sum of squares.
    pub tss: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub sigma2: f64,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Overall F against the intercept-only model; NaN with a single column.
    pub f_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub diagnostics: OlsDiagnostics,
}

/// Least-squares fit of `y` on the columns of `x`. The caller supplies the
/// intercept column when one is wanted.
pub fn ols_fit(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::Shape(format!("y has {} rows, X has {n}", y.len())));
    }
    if n <= k {
        return Err(Error::Underdetermined { rows: n, cols: k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r)?;

    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign { column: k - 1 })?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::SingularDesign { column: k - 1 })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let diagnostics = diagnostics(y, &residuals, beta.as_slice(), &xtx_inv, k);

    Ok(OlsFit {
        coefficients: beta.as_slice().to_vec(),
        residuals,
        diagnostics,
    })
}

pub(crate) fn check_rank(r: &DMatrix<f64>) -> Result<()> {
    let k = r.ncols();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularDesign { column: 0 });
    }
    for i in 0..k {
        if r[(i, i)].abs() <= RANK_TOLERANCE * scale {
            return Err(Error::SingularDesign { column: i });
        }
    }
    Ok(())
}

pub(crate) fn diagnostics(
    y: &[f64],
    residuals: &[f64],
    beta: &[f64],
    xtx_inv: &DMatrix<f64>,
    k: usize,
) -> OlsDiagnostics {
    let n = y.len();
    let dof = n - k;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = 1.0 - rss / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / dof as f64;
    let sigma2 = rss / dof as f64;
    let std_errors: Vec<f64> = (0..k).map(|i| (sigma2 * xtx_inv[(i, i)]).sqrt()).collect();
    let t_stats: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats
        .iter()
        .map(|t| t_two_sided_p(*t, dof as f64))
        .collect();
    let f_stat = if k > 1 {
        ((tss - rss) / (k - 1) as f64) / sigma2
    } else {
        f64::NAN
    };
    OlsDiagnostics {
        n_obs: n,
        n_params: k,
        dof,
        rss,
        tss,
        r_squared,
        adj_r_squared,
        sigma2,
        std_errors,
        t_stats,
        p_values,
        f_stat,
    }
}

/// Builds an `n x (1 + p)` design with a leading intercept column.
pub fn design_with_intercept(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            columns[j - 1][i]
        }
    })
}
