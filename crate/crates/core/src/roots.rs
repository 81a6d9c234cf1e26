//! Bracketed scalar root finding: regula falsi with the Illinois weighting,
//! falling back to bisection whenever the interpolated point fails to shrink
//! the bracket fast enough.

use crate::error::{Error, Result};

pub(crate) fn solve_bracketed<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BadBracket { lo, hi });
    }
    // side that was retained on the previous step: -1 lo, +1 hi
    let mut last_side = 0i8;
    for _ in 0..max_iter {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        if width.abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        // keep the secant point well inside the bracket
        if !(x > lo + 0.01 * width && x < hi - 0.01 * width) {
            x = mid;
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if last_side == -1 {
                fhi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            if last_side == 1 {
                flo *= 0.5;
            }
            last_side = 1;
        }
        // guarantee geometric progress
        if (hi - lo) > 0.5 * width {
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == flo.signum() {
                lo = m;
                flo = fm;
            } else {
                hi = m;
                fhi = fm;
            }
            last_side = 0;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = solve_bracketed(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = solve_bracketed(|x| x.powi(7) - 1e-3, 0.0, 5.0, 1e-14, 200).unwrap();
        assert!((r - 1e-3f64.powf(1.0 / 7.0)).abs() < 1e-13);
        let r = solve_bracketed(|x| x.cos() - x, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(matches!(
            solve_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(Error::BadBracket { .. })
        ));
    }
}
