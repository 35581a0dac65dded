//! One-dimensional minimizers used by the fitting and projection routines.

const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Minimum {
    pub x: f64,
    pub value: f64,
    pub converged: bool,
}

/// Brent's method (golden section with parabolic steps) on `[a, b]`.
pub(crate) fn brent(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum { x, value: fx, converged: true };
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum { x, value: fx, converged: false }
}

/// Plain golden-section search on `[a, b]`.
pub(crate) fn golden_section(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut c = b - (1.0 - GOLDEN) * (b - a);
    let mut d = a + (1.0 - GOLDEN) * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (c.abs() + d.abs()).max(1e-12) {
            let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
            return Minimum { x, value, converged: true };
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (1.0 - GOLDEN) * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (1.0 - GOLDEN) * (b - a);
            fd = f(d);
        }
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    Minimum { x, value, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_parabola_vertex() {
        let m = brent(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10, 100);
        assert!(m.converged);
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn brent_handles_nonsmooth_minimum() {
        let m = brent(|x| (x - 1.2).abs(), 0.0, 3.0, 1e-10, 200);
        assert!((m.x - 1.2).abs() < 1e-8);
    }

    #[test]
    fn golden_converges_to_endpoint_when_monotone() {
        let m = golden_section(|x| x, 2.0, 5.0, 1e-9, 200);
        assert!((m.x - 2.0).abs() < 1e-7);
        let m = golden_section(|x| (x.ln() - 0.5).powi(2), 0.2, 5.0, 1e-10, 200);
        assert!((m.x - 0.5f64.exp()).abs() < 1e-6);
    }
}
