//! Independent oracles for integration tests. These recompute expected
//! values from first principles (grid quadrature, exhaustive enumeration,
//! least squares) without touching the library's own closed forms.
#![allow(dead_code)] // each test binary uses its own subset

/// Posterior mean and variance by Simpson quadrature over the unnormalized
/// density `exp(−(θ−μ₀)²/(2v₀) − Σ(xᵢ−θ)²/(2σ²))`, written independently of
/// the library.
pub fn quadrature_posterior_moments(
    prior_mean: f64,
    prior_var: f64,
    sigma2: f64,
    data: &[f64],
) -> (f64, f64) {
    // Generous window: prior and data locations padded by wide deviations.
    let mut lo = prior_mean;
    let mut hi = prior_mean;
    for &x in data {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let pad = 12.0 * prior_var.max(sigma2).sqrt().max(1.0);
    lo -= pad;
    hi += pad;

    let n_grid = 40_001usize; // odd, for Simpson weights
    let h = (hi - lo) / (n_grid - 1) as f64;
    let log_density = |theta: f64| -> f64 {
        let mut g = -(theta - prior_mean) * (theta - prior_mean) / (2.0 * prior_var);
        for &x in data {
            g -= (x - theta) * (x - theta) / (2.0 * sigma2);
        }
        g
    };
    // Stabilize by the max of the log-density over the grid.
    let mut max_g = f64::NEG_INFINITY;
    for i in 0..n_grid {
        max_g = max_g.max(log_density(lo + i as f64 * h));
    }
    let mut z = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 0..n_grid {
        let theta = lo + i as f64 * h;
        let w = if i == 0 || i == n_grid - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let d = w * (log_density(theta) - max_g).exp();
        z += d;
        m1 += d * theta;
        m2 += d * theta * theta;
    }
    let mean = m1 / z;
    let var = m2 / z - mean * mean;
    (mean, var)
}

/// Normalized posterior density on a grid, for pointwise comparisons.
pub fn quadrature_posterior_density(
    prior_mean: f64,
    prior_var: f64,
    sigma2: f64,
    data: &[f64],
    grid: &[f64],
) -> Vec<f64> {
    let log_density = |theta: f64| -> f64 {
        let mut g = -(theta - prior_mean) * (theta - prior_mean) / (2.0 * prior_var);
        for &x in data {
            g -= (x - theta) * (x - theta) / (2.0 * sigma2);
        }
        g
    };
    // Trapezoid normalizer over a wide uniform grid.
    let mut lo = prior_mean;
    let mut hi = prior_mean;
    for &x in data {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let pad = 12.0 * prior_var.max(sigma2).sqrt().max(1.0);
    lo -= pad;
    hi += pad;
    let n_grid = 200_001usize;
    let h = (hi - lo) / (n_grid - 1) as f64;
    let mut max_g = f64::NEG_INFINITY;
    for i in 0..n_grid {
        max_g = max_g.max(log_density(lo + i as f64 * h));
    }
    let mut z = 0.0;
    for i in 0..n_grid {
        let w = if i == 0 || i == n_grid - 1 { 0.5 } else { 1.0 };
        z += w * (log_density(lo + i as f64 * h) - max_g).exp();
    }
    z *= h;
    grid.iter()
        .map(|&theta| (log_density(theta) - max_g).exp() / z)
        .collect()
}

/// All size-`k` subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Roughly log-spaced integer checkpoints in `[lo, hi]`, deduplicated.
pub fn log_checkpoints(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..count {
        let f = i as f64 / (count - 1) as f64;
        let v = ((lo as f64).ln() + f * ((hi as f64).ln() - (lo as f64).ln())).exp();
        let v = v.round() as usize;
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}
