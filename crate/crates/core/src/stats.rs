//! Least-squares helpers shared by the dimension estimators.

use num_bigint::BigUint;

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` with fewer than
/// two distinct abscissae.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Index of the first level in the top `⌈n/2⌉` of `n` levels.
pub fn top_half_start(n: usize) -> usize {
    n - n.div_ceil(2)
}

/// Natural log of a big integer, accurate to f64 precision. `ln 0 = -∞`.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        let words = n.to_u64_digits();
        let mut x = 0.0f64;
        for &w in words.iter().rev() {
            x = x * 18446744073709551616.0 + w as f64;
        }
        return libm::log(x);
    }
    let shift = bits - 64;
    let top: BigUint = n >> shift;
    let t = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
    libm::log(t) + shift as f64 * core::f64::consts::LN_2
}
