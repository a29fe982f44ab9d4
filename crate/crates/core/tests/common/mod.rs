//! Test-only numerics kept independent of the library's own quadrature.

#![allow(dead_code)]

/// Tanh-sinh quadrature of `f` over `(a, b)`, refining the step until two
/// successive levels agree to `tol`. Endpoint singularities are fine as long as
/// `f` is never evaluated at the endpoints themselves.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let pi2 = std::f64::consts::FRAC_PI_2;
    // contribution of abscissa t (and -t), with the distance to the endpoint
    // computed directly so points near a or b keep full precision
    let term = |t: f64| -> f64 {
        let s = pi2 * t.sinh();
        let c = s.cosh();
        let w = pi2 * t.cosh() / (c * c);
        let dist = half / (s.exp() * c); // = half * (1 - tanh s)
        let (xl, xr) = (a + dist, b - dist);
        let mut v = 0.0;
        if xl > a && xl < b {
            v += f(xl);
        }
        if xr > a && xr < b {
            v += f(xr);
        }
        w * v
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = pi2 * f(mid);
    let mut t = h;
    while t <= t_max {
        sum += term(t);
        t += h;
    }
    let mut prev = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += term(t);
            t += 2.0 * h;
        }
        let cur = half * h * sum;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `int_a^inf f` through `r = a + u / (1 - u)`.
pub fn tanh_sinh_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    tanh_sinh(
        |u| {
            let om = 1.0 - u;
            f(a + u / om) / (om * om)
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Sample variance and the delta-method standard error of it.
pub fn var_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (v, ((m4 - v * v) / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
