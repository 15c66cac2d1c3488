//! Elementary special functions shared by the spectral model and the closed forms.

/// Below this magnitude `sinc` and `one_minus_sinc` switch to their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Unnormalized sinc, `sin(x)/x`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `1 - sinc(x)` without cancellation for small `x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.5 {
        // x^2/3! - x^4/5! + x^6/7! - ...; ten terms reach full precision at 0.5
        let x2 = x * x;
        let mut term = x2 / 6.0;
        let mut sum = 0.0;
        let mut k = 1.0;
        for _ in 0..10 {
            sum += term;
            term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            k += 1.0;
        }
        sum
    } else {
        1.0 - x.sin() / x
    }
}

/// Triangular function: `1 - |x|` on `[-1, 1]`, zero outside.
pub fn tri(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 {
        1.0 - ax
    } else {
        0.0
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn reduce_phase(phase: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = phase.rem_euclid(tau);
    // rem_euclid can round up to exactly tau for tiny negative inputs
    if r >= tau {
        0.0
    } else {
        r
    }
}
