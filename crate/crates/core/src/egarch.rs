//! EGARCH(1,1) conditional volatility: filtering, Gaussian maximum likelihood
//! estimation and normalization of innovations.
//!
//! The log-variance recursion is
//!
//! ```text
//! ln s2[t] = kappa + gamma1 * ln s2[t-1]
//!          + eta1 * (|z[t-1]| - sqrt(2/pi)) + xi1 * z[t-1],   z = eps / s
//! ```
//!
//! `xi1 > 0` means positive shocks raise next-day volatility more than
//! negative ones (anti-leverage).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_SQRT_PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stats::sample_variance;

/// E|Z| for standard normal Z, i.e. sqrt(2/pi).
pub const ABS_NORMAL_MEAN: f64 = FRAC_2_SQRT_PI * FRAC_1_SQRT_2;

/// Lower bound on the conditional variance.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Minimum series length accepted by [`egarch_fit`].
pub const MIN_FIT_LEN: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgarchParams {
    /// Log-variance intercept.
    pub kappa: f64,
    /// Persistence of log-variance; |gamma1| < 1.
    pub gamma1: f64,
    /// Response to shock magnitude.
    pub eta1: f64,
    /// Leverage coefficient: response to the signed shock.
    pub xi1: f64,
}

impl EgarchParams {
    pub fn new(kappa: f64, gamma1: f64, eta1: f64, xi1: f64) -> Result<Self> {
        let p = Self {
            kappa,
            gamma1,
            eta1,
            xi1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.kappa, self.gamma1, self.eta1, self.xi1]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Domain(format!(
                "non-finite EGARCH parameter in {self:?}"
            )));
        }
        if self.gamma1.abs() >= 1.0 {
            return Err(Error::Domain(format!(
                "gamma1 = {} outside the stationarity region (-1, 1)",
                self.gamma1
            )));
        }
        Ok(())
    }

    /// Stationary mean of ln s2, kappa / (1 - gamma1).
    pub fn unconditional_log_variance(&self) -> f64 {
        self.kappa / (1.0 - self.gamma1)
    }

    /// One step of the log-variance recursion given the previous log-variance
    /// and standardized shock.
    #[inline]
    pub fn next_log_variance(&self, prev_log_var: f64, prev_z: f64) -> f64 {
        self.kappa
            + self.gamma1 * prev_log_var
            + self.eta1 * (prev_z.abs() - ABS_NORMAL_MEAN)
            + self.xi1 * prev_z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilityPath {
    pub sigma: Vec<f64>,
    pub loglik: f64,
}

const LOG_2PI: f64 = 1.8378770664093453;

/// Runs the recursion over `eps`, calling `sink(t, sigma_t)` at each step,
/// and returns the Gaussian log-likelihood.
#[inline]
fn run_filter<S: FnMut(usize, f64)>(
    params: &EgarchParams,
    eps: &[f64],
    sigma0_sq: f64,
    mut sink: S,
) -> Result<f64> {
    let floor = VARIANCE_FLOOR.ln();
    let mut h = sigma0_sq.max(VARIANCE_FLOOR).ln();
    // Presample innovation is zero.
    let mut z = 0.0;
    let mut loglik = 0.0;
    for (t, &e) in eps.iter().enumerate() {
        h = params.next_log_variance(h, z).max(floor);
        let sigma = (0.5 * h).exp();
        if !(h.is_finite() && sigma.is_finite()) {
            return Err(Error::NumericalOverflow { index: t });
        }
        z = e / sigma;
        loglik -= 0.5 * (LOG_2PI + h + z * z);
        sink(t, sigma);
    }
    if !loglik.is_finite() {
        return Err(Error::NumericalOverflow {
            index: eps.len().saturating_sub(1),
        });
    }
    Ok(loglik)
}

/// Conditional standard deviations and log-likelihood for given parameters.
pub fn egarch_filter(params: &EgarchParams, eps: &[f64], sigma0_sq: f64) -> Result<VolatilityPath> {
    if !(sigma0_sq > 0.0 && sigma0_sq.is_finite()) {
        return Err(Error::Domain(format!(
            "initial variance {sigma0_sq} must be positive"
        )));
    }
    params.validate()?;
    let mut sigma = vec![0.0; eps.len()];
    let loglik = run_filter(params, eps, sigma0_sq, |t, s| sigma[t] = s)?;
    Ok(VolatilityPath { sigma, loglik })
}

/// Gaussian log-likelihood only; same arithmetic as [`egarch_filter`].
pub fn log_likelihood(params: &EgarchParams, eps: &[f64], sigma0_sq: f64) -> Result<f64> {
    run_filter(params, eps, sigma0_sq, |_, _| {})
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Starting point; defaults to gamma1 = 0.9, eta1 = 0.1, xi1 = 0 and
    /// kappa matching the sample variance.
    pub start: Option<EgarchParams>,
    pub min_len: usize,
    /// Stop when a restart improves the log-likelihood by less than this.
    pub ftol: f64,
    pub max_evals: usize,
    pub max_restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            start: None,
            min_len: MIN_FIT_LEN,
            ftol: 1e-8,
            max_evals: 20_000,
            max_restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgarchFit {
    pub params: EgarchParams,
    pub path: VolatilityPath,
    pub sigma0_sq: f64,
    pub start: EgarchParams,
    pub start_loglik: f64,
    pub converged: bool,
    pub evals: usize,
}

/// Supremum of |gamma1| reachable by the optimizer.
pub const GAMMA_LIMIT: f64 = 0.9999;

fn to_internal(p: &EgarchParams) -> [f64; 4] {
    let g = (p.gamma1 / GAMMA_LIMIT).clamp(-0.999_999, 0.999_999);
    [p.kappa / (1.0 - p.gamma1), g.atanh(), p.eta1, p.xi1]
}

fn from_internal(x: &[f64]) -> EgarchParams {
    let gamma1 = GAMMA_LIMIT * x[1].tanh();
    EgarchParams {
        kappa: x[0] * (1.0 - gamma1),
        gamma1,
        eta1: x[2],
        xi1: x[3],
    }
}

pub fn default_start(eps: &[f64]) -> Result<EgarchParams> {
    let var = sample_variance(eps);
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::DegenerateSample("zero variance innovations".into()));
    }
    let gamma1 = 0.9;
    EgarchParams::new(var.ln() * (1.0 - gamma1), gamma1, 0.1, 0.0)
}

pub fn egarch_fit(eps: &[f64]) -> Result<EgarchFit> {
    egarch_fit_with(eps, &FitOptions::default())
}

/// Maximum likelihood over the stationarity region. Optimizes over
/// (kappa / (1 - gamma1), atanh(gamma1), eta1, xi1); the result is flagged
/// rather than rejected when the optimizer runs out of budget.
pub fn egarch_fit_with(eps: &[f64], opts: &FitOptions) -> Result<EgarchFit> {
    if eps.len() < opts.min_len {
        return Err(Error::InsufficientData {
            needed: opts.min_len,
            got: eps.len(),
        });
    }
    if let Some(i) = eps.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite innovation at index {i}")));
    }
    let sigma0_sq = sample_variance(eps);
    let default = default_start(eps)?;
    let start = match opts.start {
        Some(s) => {
            s.validate()?;
            s
        }
        None => default,
    };
    let start_loglik = log_likelihood(&start, eps, sigma0_sq).unwrap_or(f64::NEG_INFINITY);

    let objective = |x: &[f64]| {
        let p = from_internal(x);
        if p.gamma1.abs() >= 1.0 {
            return f64::INFINITY;
        }
        match log_likelihood(&p, eps, sigma0_sq) {
            Ok(ll) => -ll,
            Err(_) => f64::INFINITY,
        }
    };
    let mut nm = NelderMeadOptions::with_steps(vec![0.5, 0.3, 0.05, 0.05]);
    nm.ftol = opts.ftol;
    nm.max_evals = opts.max_evals;
    nm.max_restarts = opts.max_restarts;
    let min = nelder_mead(objective, &to_internal(&start), &nm);

    let mut params = from_internal(&min.x);
    let mut converged = min.converged;
    if params.validate().is_err() {
        params = start;
        converged = false;
    }
    let path = egarch_filter(&params, eps, sigma0_sq)?;
    Ok(EgarchFit {
        params,
        path,
        sigma0_sq,
        start,
        start_loglik,
        converged,
        evals: min.evals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
}

/// Elementwise eps / sigma.
pub fn normalize(eps: &[f64], vol: &VolatilityPath) -> Result<NormalizedSeries> {
    if eps.len() != vol.sigma.len() {
        return Err(Error::Shape(format!(
            "{} innovations but {} volatilities",
            eps.len(),
            vol.sigma.len()
        )));
    }
    if let Some(i) = vol.sigma.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Domain(format!(
            "non-positive volatility at index {i}"
        )));
    }
    Ok(NormalizedSeries {
        values: eps.iter().zip(&vol.sigma).map(|(e, s)| e / s).collect(),
    })
}
