//! Bessel functions of the first kind for integer order.
//!
//! The grating model only ever evaluates J_n at arguments below ~0.5, where
//! the ascending power series converges in a handful of terms. No asymptotic
//! or recurrence-based evaluation is needed.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_TERMS: u32 = 300;

/// J_n(x) via the ascending power series
/// `sum_k (-1)^k (x/2)^(n+2k) / (k! (n+k)!)`,
/// terminated when a term drops below 1e-17 relative to the running sum.
///
/// Negative orders go through the parity identity `J_{-n} = (-1)^n J_n`,
/// which therefore holds bit-exactly. Orders whose leading term underflows
/// double precision return exactly 0.
pub fn bessel_j<T: Real>(n: i32, x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bessel_j: non-finite argument {x}"
        )));
    }
    let order = n.unsigned_abs();
    let negate = n < 0 && n % 2 != 0;

    let half = x / T::from_f64_lossy(2.0);

    // Leading term (x/2)^n / n!, built up factor by factor so that
    // underflow is detected before it turns into garbage.
    let mut term = T::one();
    for k in 1..=order {
        term = term * half / T::from_u32(k).unwrap();
        if term == T::zero() {
            return Ok(T::zero());
        }
    }

    let quarter_sq = half * half;
    let mut sum = term;
    let tol = T::from_f64_lossy(1e-17);
    for k in 1..=MAX_TERMS {
        let denom = T::from_u32(k).unwrap() * T::from_u32(k + order).unwrap();
        term = -term * quarter_sq / denom;
        sum += term;
        if term.abs() <= sum.abs() * tol {
            break;
        }
    }

    Ok(if negate { -sum } else { sum })
}
