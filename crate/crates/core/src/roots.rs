//! Bracketed scalar root finding.

/// Sign change search on `[lo, hi]`: bisection until the bracket is narrower
/// than `bisect_width`, then Illinois-modified regula falsi to `tol`.
///
/// `f` returns a value whose sign is meaningful; `refine` returns a smooth
/// rescaled value used in the final phase (the rescaling may depend on the
/// current bracket). Returns `None` when `f(lo)` and `f(hi)` share a sign.
pub(crate) fn bracketed_root<F, G>(
    mut f: F,
    mut refine: G,
    lo: f64,
    hi: f64,
    bisect_width: f64,
    tol: f64,
) -> Option<f64>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64, f64, f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let neg_at_a = fa < 0.0;
    while b - a > bisect_width.max(tol) {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            return Some(c);
        }
        let fc = f(c);
        if fc == 0.0 {
            return Some(c);
        }
        if (fc < 0.0) == neg_at_a {
            a = c;
        } else {
            b = c;
        }
    }
    if b - a <= tol {
        return Some(0.5 * (a + b));
    }

    let (l0, h0) = (a, b);
    let mut fa = refine(a, l0, h0);
    let mut fb = refine(b, l0, h0);
    if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Some(0.5 * (a + b));
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = refine(c, l0, h0);
        if fc == 0.0 || !fc.is_finite() {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if b - a <= tol {
            break;
        }
        let step_small = (c - a).abs().min((b - c).abs()) <= 0.5 * tol;
        if step_small {
            return Some(c);
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_root() {
        let r = bracketed_root(f64::cos, |x, _, _| x.cos(), 1.0, 2.0, 1e-8, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn rejects_same_sign() {
        assert!(bracketed_root(|x| x * x + 1.0, |x, _, _| x * x + 1.0, -1.0, 1.0, 1e-8, 1e-12).is_none());
    }

    #[test]
    fn sign_only_function_still_bisects() {
        let r = bracketed_root(|x| (x - 0.3).signum(), |x, _, _| x - 0.3, 0.0, 1.0, 1e-8, 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-11);
    }
}
