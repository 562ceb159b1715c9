//! Brute-force reference implementations shared by the oracle and
//! acceptance tests. Deliberately naive: explicit sums, normal equations and
//! Gauss-Jordan inversion, nothing shared with the library code paths.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// |a - b| within `tol` relative to the reference, floored at unit scale.
pub fn close(a: f64, reference: f64, tol: f64) -> bool {
    (a - reference).abs() <= tol * reference.abs().max(1.0)
}

fn avg(x: &[f64]) -> f64 {
    // Sorted summation, a different order from the library's running sum.
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v.iter().sum::<f64>() / x.len() as f64
}

pub fn brute_skewness(x: &[f64]) -> f64 {
    let m = avg(x);
    let d2: Vec<f64> = x.iter().map(|v| (v - m).powi(2)).collect();
    let d3: Vec<f64> = x.iter().map(|v| (v - m).powi(3)).collect();
    avg(&d3) / avg(&d2).powf(1.5)
}

pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (avg(x), avg(y));
    let cov: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let vx: Vec<f64> = x.iter().map(|a| (a - mx).powi(2)).collect();
    let vy: Vec<f64> = y.iter().map(|b| (b - my).powi(2)).collect();
    avg(&cov) / (avg(&vx) * avg(&vy)).sqrt()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| f64::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        assert!(piv.abs() > 1e-12, "singular design in oracle");
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub struct BruteOls {
    pub coefficients: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
}

/// OLS by the normal equations; `rows` must already contain any intercept.
pub fn brute_ols(y: &[f64], rows: &[Vec<f64>]) -> BruteOls {
    let (n, p) = (rows.len(), rows[0].len());
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| rows.iter().map(|r| r[i] * r[j]).sum())
                .collect()
        })
        .collect();
    let xty: Vec<f64> = (0..p)
        .map(|i| rows.iter().zip(y).map(|(r, v)| r[i] * v).sum())
        .collect();
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, v)| (v - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).powi(2))
        .sum();
    let my = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let s2 = rss / (n - p) as f64;
    let r2 = 1.0 - rss / tss;
    BruteOls {
        t_stats: (0..p).map(|i| beta[i] / (s2 * inv[i][i]).sqrt()).collect(),
        coefficients: beta,
        r_squared: r2,
        adj_r_squared: 1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p) as f64,
        f_stat: ((tss - rss) / (p - 1) as f64) / s2,
    }
}

/// Intercept, the slopes, then one dummy per non-base industry and time level.
pub fn full_dummy_rows(columns: &[Vec<f64>], industry: &[usize], time: &[usize]) -> Vec<Vec<f64>> {
    let gi = industry.iter().max().unwrap() + 1;
    let gt = time.iter().max().unwrap() + 1;
    (0..industry.len())
        .map(|r| {
            let mut row = vec![1.0];
            row.extend(columns.iter().map(|c| c[r]));
            row.extend((1..gi).map(|l| f64::from(industry[r] == l)));
            row.extend((1..gt).map(|l| f64::from(time[r] == l)));
            row
        })
        .collect()
}

pub struct SyntheticPanel {
    pub y: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
    pub industry: Vec<usize>,
    pub time: Vec<usize>,
}

/// Random panel with industry and window effects and mixed regressor types
/// (continuous and binary), every cell of the grid visited.
pub fn synthetic_panel(seed: u64, n: usize, industries: usize, windows: usize) -> SyntheticPanel {
    let mut r = rng(seed);
    let industry: Vec<usize> = (0..n).map(|i| i % industries).collect();
    let time: Vec<usize> = (0..n).map(|i| (i / industries) % windows).collect();
    let ind_fx: Vec<f64> = (0..industries).map(|_| r.random_range(-1.0..1.0)).collect();
    let time_fx: Vec<f64> = (0..windows).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut columns = vec![Vec::with_capacity(n); 5];
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let x = [
            r.random_range(0.0..0.1),
            r.random_range(-0.05..0.05),
            r.random_range(0.01..0.04),
            f64::from(r.random_bool(0.5)),
            f64::from(r.random_bool(0.3)),
        ];
        let e: f64 = r.random_range(-0.5..0.5);
        y.push(
            ind_fx[industry[i]] + time_fx[time[i]] + 2.0 * x[0] - 1.0 * x[1]
                + 5.0 * x[2]
                + 0.1 * x[3]
                - 0.2 * x[4]
                + e,
        );
        for (c, v) in columns.iter_mut().zip(x) {
            c.push(v);
        }
    }
    SyntheticPanel {
        y,
        columns,
        industry,
        time,
    }
}
