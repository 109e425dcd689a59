use crate::error::{Error, Result};

/// Digamma function Ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!("digamma requires a finite x > 0, got {x}")));
    }
    Ok(psi(x))
}

/// Unchecked digamma for hot paths; callers guarantee `x > 0`.
///
/// Shifts the argument above 10 with Ψ(x) = Ψ(x + 1) − 1/x, then applies the
/// asymptotic expansion through the x⁻¹⁴ term.
#[inline]
pub(crate) fn psi(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.recip();
        x += 1.0;
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    shift + x.ln() - 0.5 * inv - tail
}

/// Numerically stable softmax. Rejects NaN entries.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("softmax input contains NaN".into()));
    }
    if v.iter().any(|x| x.is_infinite()) {
        return Err(Error::Domain("softmax input contains an infinite entry".into()));
    }
    let mut out = v.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

/// In-place softmax with max subtraction. Input must be finite.
pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    let inv = total.recip();
    for x in v.iter_mut() {
        *x *= inv;
    }
}

/// log Σ exp(v) computed stably.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
