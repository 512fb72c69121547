//! Tail estimate of `liminf y_n` for a probe.
//!
//! The raw tail minimum of an `O(t_n)` approach stays about `t_N` away from
//! the limit, which at `N = 128` is far larger than any useful tolerance, and
//! from below it sits under the limit. The tail is therefore fit by a
//! low-degree polynomial in `t_n = |p_n - anchor|` and, when the fit is essentially exact,
//! its value at `t = 0` is the estimate. The last half of the tail is tried
//! too, so a seam crossed early in the tail does not spoil the fit. The
//! acceptance bound does not depend on the check tolerance, so verdicts are
//! monotone in it.

const MIN_WINDOW: usize = 16;

/// Accepted fit residual, relative to `1 + max |y|`.
const FIT_TOL: f64 = 1e-6;

/// Quadratic first, then cubic for tails with visible curvature such as `1/x`.
const MAX_DEGREE: usize = 3;

/// Least-squares polynomial of degree `deg` in `s = t / max t`, fitted in a
/// variable centred on the window; returns `(value at s = 0, max residual)`.
fn poly_fit(ts: &[f64], ys: &[f64], deg: usize) -> Option<(f64, f64)> {
    let tmax = ts.iter().cloned().fold(0.0, f64::max);
    let tmin = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(tmax > tmin && tmin >= 0.0) || ts.len() <= deg + 1 {
        return None;
    }
    let (mid, half) = ((tmax + tmin) / 2.0, (tmax - tmin) / 2.0);
    let n = deg + 1;
    let basis = |t: f64| -> Vec<f64> {
        let u = (t - mid) / half;
        (0..n).scan(1.0, |p, _| { let v = *p; *p *= u; Some(v) }).collect()
    };
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for (&t, &y) in ts.iter().zip(ys) {
        let b = basis(t);
        for r in 0..n {
            for c in 0..n {
                m[r][c] += b[r] * b[c];
            }
            m[r][n] += b[r] * y;
        }
    }
    // Gauss-Jordan with partial pivoting on the normal equations.
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let k = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= k * m[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..n).map(|i| m[i][n] / m[i][i]).collect();
    let eval = |t: f64| basis(t).iter().zip(&coef).map(|(b, c)| b * c).sum::<f64>();
    let resid = ts.iter().zip(ys).fold(0.0f64, |r, (&t, &y)| r.max((eval(t) - y).abs()));
    let c0 = eval(0.0);
    if c0.is_finite() && resid.is_finite() {
        Some((c0, resid))
    } else {
        None
    }
}

/// Estimate of `liminf y_n` from the tail terms, ordered by increasing `n`:
/// the extrapolation of the longest well-fitting window, else the raw minimum.
pub fn liminf_estimate(ts: &[f64], ys: &[f64]) -> f64 {
    let raw = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if ys.iter().any(|y| !y.is_finite()) {
        return raw;
    }
    let bound = FIT_TOL * (1.0 + ys.iter().fold(0.0f64, |m, y| m.max(y.abs())));
    let mut window = ys.len();
    while window >= MIN_WINDOW {
        let start = ys.len() - window;
        for deg in 2..=MAX_DEGREE {
            if let Some((c0, resid)) = poly_fit(&ts[start..], &ys[start..], deg) {
                if resid <= bound {
                    return c0;
                }
            }
        }
        window /= 2;
    }
    raw
}
