//! Scalar bracketing and bisection on positive domains.
//!
//! Every quantity the engine solves for (qualities, costs, thresholds) lives
//! on `(0, inf)` and typically spans many decades, so brackets shrink
//! geometrically: the midpoint is `sqrt(lo * hi)` and convergence is measured
//! by relative width.

use crate::error::{Error, Result};
use crate::tolerances;

/// Bisect for a sign change of `f` on `[lo, hi]` with `0 < lo < hi`.
///
/// `f_lo` is the already-computed value at `lo`; `f(lo)` and `f(hi)` must
/// differ in sign. Stops when the relative bracket width drops below
/// `rel_tol` and returns the geometric midpoint of the final bracket.
pub(crate) fn bisect_geometric(
    op: &'static str,
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    rel_tol: f64,
) -> Result<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let lo_positive = f_lo > 0.0;
    let max_iter = 400;
    for _ in 0..max_iter {
        if hi - lo <= rel_tol * hi {
            return Ok((lo * hi).sqrt());
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            // Bracket exhausted at float resolution.
            return Ok(mid.clamp(lo, hi));
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.is_nan() {
            return Err(Error::solver(
                op,
                format!("objective is NaN at {mid} inside bracket [{lo}, {hi}]"),
            ));
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::solver(
        op,
        format!("bisection failed to converge on [{lo}, {hi}]"),
    ))
}

/// Grow `hi` geometrically from `start` until `f` changes sign against
/// `f_start`, returning the bracket endpoint and its value. `None` when the
/// cap is reached without a sign change.
pub(crate) fn expand_upward(
    mut f: impl FnMut(f64) -> f64,
    start: f64,
    f_start: f64,
    factor: f64,
    cap: f64,
) -> Option<(f64, f64)> {
    let start_positive = f_start > 0.0;
    let mut hi = start;
    while hi < cap {
        hi = (hi * factor).min(cap);
        let fh = f(hi);
        if fh == 0.0 || (fh > 0.0) != start_positive {
            return Some((hi, fh));
        }
        if hi >= cap {
            break;
        }
    }
    None
}

/// Shrink `lo` geometrically from `start` until `f` changes sign against
/// `f_start`. `None` when the floor is reached without a sign change.
pub(crate) fn expand_downward(
    mut f: impl FnMut(f64) -> f64,
    start: f64,
    f_start: f64,
    factor: f64,
    floor: f64,
) -> Option<(f64, f64)> {
    debug_assert!(factor > 1.0);
    let start_positive = f_start > 0.0;
    let mut lo = start;
    while lo > floor {
        lo = (lo / factor).max(floor);
        let fl = f(lo);
        if fl == 0.0 || (fl > 0.0) != start_positive {
            return Some((lo, fl));
        }
        if lo <= floor {
            break;
        }
    }
    None
}

/// Convenience: bisect `f` between bracket endpoints found by the caller,
/// at the engine-wide relative width tolerance.
pub(crate) fn bisect_default(
    op: &'static str,
    f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    f_lo: f64,
) -> Result<f64> {
    bisect_geometric(op, f, lo, hi, f_lo, tolerances::ROOT_REL_WIDTH)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_across_decades() {
        // f(x) = ln(x) - ln(7e-5), root at 7e-5.
        let f = |x: f64| x.ln() - (7e-5f64).ln();
        let root = bisect_default("test", f, 1e-12, 1e3, f(1e-12)).unwrap();
        assert!((root / 7e-5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_finds_bracket() {
        let f = |x: f64| x - 100.0;
        let (hi, fh) = expand_upward(f, 1.0, f(1.0), 2.0, 1e12).unwrap();
        assert!(fh >= 0.0 && hi >= 100.0);
        let g = |x: f64| 1e-6 - x;
        let (lo, fl) = expand_downward(g, 1.0, g(1.0), 10.0, 1e-300).unwrap();
        assert!(fl > 0.0 && lo <= 1e-6);
    }

    #[test]
    fn expansion_reports_failure_at_cap() {
        let f = |_x: f64| -1.0;
        assert!(expand_upward(f, 1.0, -1.0, 2.0, 1e12).is_none());
    }
}
