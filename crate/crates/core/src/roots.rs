//! Bracketing root finders and golden-section minimization.

/// Number of uniform scan points used to bracket roots of smooth scalar
/// functions on a finite interval.
pub const SCAN_POINTS: usize = 2000;

/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
/// Stops when the bracket is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Boundary of a boolean predicate: `pred(a) != pred(b)` on entry; returns the
/// switching point to within `tol`.
pub fn bisect_predicate<P: Fn(f64) -> bool>(pred: P, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let pa = pred(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if pred(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Uniform grid of `n` points on `(lo, hi]` (the lower end is excluded).
pub fn open_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (hi - lo) / n as f64;
    (1..=n).map(move |i| lo + h * i as f64)
}

/// All sign changes of `f` on a uniform scan of `(lo, hi]`, each refined by
/// bisection to `tol`. Points where `f` is not finite break brackets.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x in open_grid(lo, hi, n) {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            roots.push(x);
            prev = None;
            continue;
        }
        if let Some((xp, fp)) = prev {
            if (fp < 0.0) != (fx < 0.0) {
                roots.push(bisect(&f, xp, x, tol));
            }
        }
        prev = Some((x, fx));
    }
    roots
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_all_roots_of_cubic() {
        let f = |x: f64| (x - 0.5) * (x - 1.5) * (x - 3.0);
        let r = scan_roots(f, 0.0, 5.0, SCAN_POINTS, 1e-12);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.5, 1.5, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn scan_reports_pole_brackets() {
        // A pole is a sign change too; callers that can meet one must check
        // the residual at the returned point.
        let r = scan_roots(|x| 1.0 / (x - 1.0001), 0.0, 2.0, 100, 1e-12);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0001).abs() < 1e-6);
    }

    #[test]
    fn predicate_boundary() {
        let x = bisect_predicate(|x| x > 0.3, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-11);
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) = golden_section(|x| (x - 1.25).powi(2) + 3.0, 0.0, 4.0, 1e-10);
        // a quadratic minimum is only resolvable to ~sqrt(eps) in x
        assert!((x - 1.25).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-15);
    }
}
