//! Bracketed scalar root finding on top of the `roots` crate's Brent method.

use roots::{find_root_brent, Convergency, SearchError};

/// Convergence on bracket width relative to the bracket magnitude; a root
/// is only declared "found" from the residual when it is exactly zero.
struct Bracket {
    rel: f64,
    abs: f64,
    max_iter: usize,
}

impl Convergency<f64> for Bracket {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.abs + self.rel * x1.abs().max(x2.abs())
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

/// Root of `f` in `[a, b]` given a sign change, to roughly `4·eps` relative.
pub fn brent(a: f64, b: f64, mut f: impl FnMut(f64) -> f64, abs_tol: f64) -> Result<f64, SearchError> {
    let mut conv = Bracket {
        rel: 4.0 * f64::EPSILON,
        abs: abs_tol,
        max_iter: 200,
    };
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(SearchError::NoBracketing);
    }
    let x = find_root_brent(a, b, &mut f, &mut conv)?;
    Ok(x)
}

/// Expands `[a, b]` geometrically to the right until `f` changes sign.
pub fn bracket_right(a: f64, mut b: f64, f: &mut impl FnMut(f64) -> f64, max_expansions: usize) -> Option<(f64, f64)> {
    let fa = f(a);
    let mut lo = a;
    for _ in 0..max_expansions {
        let fb = f(b);
        if fa * fb <= 0.0 {
            return Some((lo, b));
        }
        lo = b;
        b = a + 2.0 * (b - a);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(1.0, 2.0, |x| x * x - 2.0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(brent(3.0, 4.0, |x| x * x - 2.0, 0.0).is_err());
    }

    #[test]
    fn expansion_finds_far_root() {
        let mut f = |x: f64| x - 100.0;
        let (lo, hi) = bracket_right(0.0, 1.0, &mut f, 20).unwrap();
        assert!(lo <= 100.0 && hi >= 100.0);
    }
}
