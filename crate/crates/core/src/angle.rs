//! Helpers for periodic coordinates.

use std::f64::consts::TAU;

/// Wraps `value` into `[0, period)`.
#[inline]
pub fn wrap(value: f64, period: f64) -> f64 {
    let r = value.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    wrap(theta, TAU)
}

/// Difference `a - b` reduced to the representative of smallest magnitude
/// modulo `period`, i.e. a value in `[-period/2, period/2]`.
#[inline]
pub fn periodic_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > 0.5 * period {
        d - period
    } else {
        d
    }
}

/// Max-norm distance between two points where component `i` is compared
/// modulo `periods[i]` when that entry is `Some`.
pub fn residual(a: &[f64], b: &[f64], periods: &[Option<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| match periods.get(i).copied().flatten() {
            Some(p) => periodic_diff(*x, *y, p).abs(),
            None => (x - y).abs(),
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_handles_negatives_and_period() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!((wrap_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(wrap(-1e-300, TAU), 0.0);
        assert_eq!(wrap(9.0, 7.0), 2.0);
    }

    #[test]
    fn periodic_diff_takes_short_way_round() {
        assert!((periodic_diff(0.1, TAU - 0.1, TAU) - 0.2).abs() < 1e-12);
        assert!((periodic_diff(TAU - 0.1, 0.1, TAU) + 0.2).abs() < 1e-12);
        let r = residual(&[1.0, 0.0], &[1.5, TAU - 1e-13], &[None, Some(TAU)]);
        assert!((r - 0.5).abs() < 1e-12);
    }
}
