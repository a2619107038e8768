//! Bracketed scalar root finding.
//!
//! The resonance conditions have poles between roots, so unbracketed Newton
//! is unsafe; bisection narrows the bracket and a derivative-free secant
//! polish finishes to full precision.

/// Bisect `f` on a sign-changing bracket, then polish with secant steps that
/// are rejected whenever they leave the bracket.
///
/// Returns the root to absolute tolerance `tol` in x. Panics if the bracket
/// does not change sign (callers establish brackets first).
pub(crate) fn bisect_secant<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    assert!(
        fa * fb <= 0.0,
        "bisect_secant requires a sign change: f({a}) = {fa}, f({b}) = {fb}"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    // bisection until the bracket is small enough for secant to be safe
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
        if (b - a).abs() < 1e6 * tol {
            break;
        }
    }
    // secant polish inside the bracket
    let (mut x0, mut x1) = (a, b);
    let (mut f0, mut f1) = (fa, fb);
    for _ in 0..60 {
        let denom = f1 - f0;
        if denom == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if !(x2 > a && x2 < b) {
            // fall back to bisection of the maintained bracket
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            if fa * fm <= 0.0 {
                b = mid;
                fb = fm;
            } else {
                a = mid;
                fa = fm;
            }
            x0 = a;
            f0 = fa;
            x1 = b;
            f1 = fb;
            if (b - a).abs() < tol {
                break;
            }
            continue;
        }
        let f2 = f(x2);
        // keep the bracket valid
        if fa * f2 <= 0.0 {
            b = x2;
            fb = f2;
        } else {
            a = x2;
            fa = f2;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (x1 - x0).abs() < tol || f2 == 0.0 {
            break;
        }
    }
    // the bracket endpoints hold the best evaluated iterates
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

/// Expand `[seed - step, seed + step]` symmetrically until `f` changes sign,
/// giving up once the half-width exceeds `max_half_width`.
pub(crate) fn expand_bracket<F: Fn(f64) -> f64>(
    f: F,
    seed: f64,
    step: f64,
    max_half_width: f64,
) -> Option<(f64, f64)> {
    let mut h = step;
    while h <= max_half_width {
        let (a, b) = (seed - h, seed + h);
        if f(a) * f(b) <= 0.0 {
            // shrink from the far side so the bracket holds a single root
            return Some((a, b));
        }
        h += step;
    }
    None
}
