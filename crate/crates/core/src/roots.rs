//! Scalar root finding (sign-change scan, bisection, Brent) and closed-form
//! roots of real cubics. These are the workhorses behind the steady-state
//! solver and the threshold cross-checks in the test suite.

use num_complex::Complex64;

/// Brackets `[a, b]` with `f(a) * f(b) < 0` found by scanning `panels` equal
/// subintervals of `[lo, hi]`. A node where `f` vanishes exactly is returned
/// as a degenerate bracket.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for k in 1..=panels {
        let x = lo + (hi - lo) * k as f64 / panels as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            out.push((x_prev, x_prev));
        } else if f_prev * fx < 0.0 {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        out.push((x_prev, x_prev));
    }
    out
}

/// Plain bisection on a bracketing interval; returns the midpoint once the
/// bracket is narrower than `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Option<f64> {
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Brent's method: inverse-quadratic / secant steps guarded by bisection.
/// Converges to roughly machine precision on the bracket; `xtol` is an extra
/// absolute stopping width on top of the relative floor.
pub fn brent<F: Fn(f64) -> f64>(f: F, a0: f64, b0: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a0, b0);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa * fb > 0.0 {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            // b must remain the best estimate.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant when a == c).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Some(b)
}

/// All roots of `x^3 + c2 x^2 + c1 x + c0` with real coefficients.
///
/// Uses the trigonometric form when all three roots are real and Cardano's
/// formula otherwise, so no iteration is involved.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Depress: x = t - c2/3 gives t^3 + p t + q.
    let shift = -c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let re = |t: f64| Complex64::new(t + shift, 0.0);

    if p == 0.0 && q == 0.0 {
        return [re(0.0); 3];
    }
    let disc = 0.25 * q * q + p * p * p / 27.0;
    if disc > 0.0 {
        // One real root, one complex-conjugate pair.
        let sq = disc.sqrt();
        let u = (-0.5 * q + sq).cbrt();
        let v = (-0.5 * q - sq).cbrt();
        let real = u + v;
        let im = 0.5 * 3.0_f64.sqrt() * (u - v);
        [
            re(real),
            Complex64::new(-0.5 * real + shift, im),
            Complex64::new(-0.5 * real + shift, -im),
        ]
    } else {
        // Three real roots; p < 0 is guaranteed here.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = re(m * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos());
        }
        out
    }
}
