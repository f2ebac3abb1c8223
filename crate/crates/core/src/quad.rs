//! One-dimensional adaptive quadrature and bracketing root finding.

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// `b < a` is allowed and flips the sign.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T) -> T
where
    T: Real,
    F: Fn(T) -> T,
{
    if a == b {
        return T::zero();
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let fa = f(lo);
    let fb = f(hi);
    let m = (lo + hi) * lit(0.5);
    let fm = f(m);
    let whole = simpson(lo, hi, fa, fm, fb);
    sign * recurse(&f, lo, hi, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T
where
    T: Real,
    F: Fn(T) -> T,
{
    let m = (a + b) * lit(0.5);
    let lm = (a + m) * lit(0.5);
    let rm = (m + b) * lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<T>(15.0) * tol || (b - a) <= T::epsilon() * (a.abs() + b.abs()) {
        return left + right + delta / lit(15.0);
    }
    let half = tol * lit(0.5);
    recurse(f, a, m, fa, flm, fm, left, half, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half, depth - 1)
}

/// Integral over `[0, inf)` via the map `r = s / (1 - s)`.
pub fn half_line<T, F>(f: F, tol: T) -> T
where
    T: Real,
    F: Fn(T) -> T,
{
    let g = |s: T| {
        if s >= T::one() {
            return T::zero();
        }
        let one_minus = T::one() - s;
        let r = s / one_minus;
        let v = f(r) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    // Split so the adaptive scheme sees the decay near s = 1 separately.
    adaptive_simpson(g, T::zero(), lit(0.5), tol * lit(0.5))
        + adaptive_simpson(g, lit(0.5), T::one(), tol * lit(0.5))
}

/// Bisection for an increasing or decreasing `f` with a sign change on `[lo, hi]`.
///
/// Stops when the bracket is below `rel_tol * |mid|`.
pub fn bisect<T, F>(f: F, mut lo: T, mut hi: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(domain("bisection bracket has no sign change"));
    }
    for _ in 0..400 {
        let mid = (lo + hi) * lit(0.5);
        if (hi - lo).abs() <= rel_tol * mid.abs() {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}
