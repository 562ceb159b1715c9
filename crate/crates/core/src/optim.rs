//! Derivative-free Nelder-Mead minimizer with restarts.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    /// Per-coordinate step used to build each (re)started simplex.
    pub initial_step: Vec<f64>,
    /// A restart that improves the objective by less than this ends the search.
    pub ftol: f64,
    /// Inner stop: spread of objective values across the simplex.
    pub simplex_ftol: f64,
    /// Inner stop: largest coordinate distance from the best vertex.
    pub simplex_xtol: f64,
    pub max_evals: usize,
    pub max_restarts: usize,
}

impl NelderMeadOptions {
    pub fn with_steps(initial_step: Vec<f64>) -> Self {
        Self {
            initial_step,
            ftol: 1e-8,
            simplex_ftol: 1e-11,
            simplex_xtol: 1e-9,
            max_evals: 20_000,
            max_restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub restarts: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0`. Non-finite objective values are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), opts.initial_step.len(), "step length mismatch");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(&best_x, &mut evals);
    let mut restarts = 0;
    let mut converged = false;

    loop {
        let budget = opts.max_evals.saturating_sub(evals);
        if budget == 0 {
            break;
        }
        let (x, fx, used, collapsed) = run_simplex(&mut eval, &best_x, best_f, opts, budget);
        evals += used;
        let improvement = best_f - fx;
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if !collapsed {
            break;
        }
        if improvement.is_finite() && improvement < opts.ftol {
            converged = best_f.is_finite();
            break;
        }
        if restarts == opts.max_restarts {
            break;
        }
        restarts += 1;
    }

    Minimum {
        x: best_x,
        fx: best_f,
        evals,
        restarts,
        converged,
    }
}

/// One simplex run; returns (best x, best f, evaluations used, collapsed).
fn run_simplex<E>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    opts: &NelderMeadOptions,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool)
where
    E: FnMut(&[f64], &mut usize) -> f64,
{
    let n = x0.len();
    let mut used = 0usize;
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step[i];
        vals.push(eval(&p, &mut used));
        pts.push(p);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let fspread = vals[worst] - vals[best];
        let xspread = pts
            .iter()
            .flat_map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (fspread.is_finite() && fspread <= opts.simplex_ftol) || xspread <= opts.simplex_xtol {
            return (pts[best].clone(), vals[best], used, true);
        }
        if used >= budget {
            return (pts[best].clone(), vals[best], used, false);
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[i]) {
                *c += v / n as f64;
            }
        }

        for j in 0..n {
            trial[j] = centroid[j] + REFLECT * (centroid[j] - pts[worst][j]);
        }
        let fr = eval(&trial, &mut used);

        if fr < vals[best] {
            for j in 0..n {
                trial2[j] = centroid[j] + EXPAND * (trial[j] - centroid[j]);
            }
            let fe = eval(&trial2, &mut used);
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }

        // Contraction, outside if the reflection beat the worst vertex.
        let outside = fr < vals[worst];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + CONTRACT * (trial[j] - centroid[j])
            } else {
                centroid[j] + CONTRACT * (pts[worst][j] - centroid[j])
            };
        }
        let fc = eval(&trial2, &mut used);
        if fc < vals[worst].min(fr) {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }

        let anchor = pts[best].clone();
        for &i in &order[1..] {
            for (p, a) in pts[i].iter_mut().zip(&anchor) {
                *p = a + SHRINK * (*p - a);
            }
            vals[i] = eval(&pts[i], &mut used);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(
            rosen,
            &[-1.2, 1.0],
            &NelderMeadOptions::with_steps(vec![0.5, 0.5]),
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 3.0).powi(4)).sum::<f64>();
        let x0 = [0.0, 1.0, -2.0, 5.0];
        let m = nelder_mead(f, &x0, &NelderMeadOptions::with_steps(vec![0.1; 4]));
        assert!(m.fx <= f(&x0));
    }

    #[test]
    fn infinite_region_is_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 0.5).powi(2) + x[1].powi(2)
            }
        };
        let m = nelder_mead(
            f,
            &[2.0, 1.0],
            &NelderMeadOptions::with_steps(vec![1.0, 1.0]),
        );
        assert!((m.x[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn budget_exhaustion_is_not_convergence() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut opts = NelderMeadOptions::with_steps(vec![0.5, 0.5]);
        opts.max_evals = 15;
        let m = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(!m.converged);
    }
}
