//! Bracketing root finder for scalar functions of one periodic parameter.
//!
//! The interval is sampled on a uniform grid. Sign changes between adjacent
//! samples are refined by bisection. Local minima of |f| that do not change
//! sign are probed with a golden-section search, which either uncovers a
//! hidden pair of sign changes or a touching (double) root.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootKind {
    SignChange,
    Touch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    pub kind: RootKind,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let f_hi = f(hi);
    if f(lo).abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Minimize `f` on `[lo, hi]` by golden-section search.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Find roots of a `period`-periodic function on `[start, start + period)`
/// sampled at `n` points. Touching roots are accepted when `|f| <= touch_eps`.
pub fn scan_periodic<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    period: f64,
    n: usize,
    touch_eps: f64,
) -> Vec<Root> {
    let h = period / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| start + h * i as f64).collect();
    let mut fs: Vec<f64> = xs[..n].iter().map(|&x| f(x)).collect();
    fs.push(fs[0]);
    let mut out = Vec::new();

    let push_bisect = |lo: f64, hi: f64, out: &mut Vec<Root>| {
        let x = bisect(f, lo, hi);
        out.push(Root {
            x,
            value: f(x),
            bracket: (lo, hi),
            kind: RootKind::SignChange,
        });
    };

    for i in 0..n {
        let (fa, fb) = (fs[i], fs[i + 1]);
        if fa == 0.0 {
            out.push(Root {
                x: xs[i],
                value: 0.0,
                bracket: (xs[i], xs[i]),
                kind: RootKind::SignChange,
            });
        } else if fa * fb < 0.0 {
            push_bisect(xs[i], xs[i + 1], &mut out);
        }
    }

    // Local minima of |f| without a neighbouring sign change.
    for i in 0..n {
        let prev = if i == 0 { fs[n - 1] } else { fs[i - 1] };
        let (cur, next) = (fs[i], fs[i + 1]);
        if cur == 0.0 || prev * cur <= 0.0 || cur * next <= 0.0 {
            continue;
        }
        if !(cur.abs() <= prev.abs() && cur.abs() <= next.abs()) {
            continue;
        }
        let sign = cur.signum();
        let lo = xs[i] - h;
        let hi = xs[i] + h;
        let g = |x: f64| sign * f(x);
        let (xm, gm) = golden_min(&g, lo, hi);
        if gm < 0.0 {
            push_bisect(lo, xm, &mut out);
            push_bisect(xm, hi, &mut out);
        } else if gm <= touch_eps {
            out.push(Root {
                x: xm,
                value: f(xm),
                bracket: (lo, hi),
                kind: RootKind::Touch,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn finds_simple_roots_of_sine() {
        let roots = scan_periodic(&|x: f64| (x - 0.3).sin(), 0.0, TAU, 64, 1e-14);
        let mut xs: Vec<f64> = roots.iter().map(|r| r.x).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - 0.3).abs() < 1e-14);
        assert!((xs[1] - 0.3 - PI).abs() < 1e-14);
    }

    #[test]
    fn finds_touching_root_between_samples() {
        // Double root at 1.234, never sampled exactly.
        let f = |x: f64| 1.0 - (x - 1.234).cos();
        let roots = scan_periodic(&f, 0.0, TAU, 50, 1e-14);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].kind, RootKind::Touch);
        assert!((roots[0].x - 1.234).abs() < 1e-6);
    }

    #[test]
    fn uncovers_close_pair_inside_one_cell() {
        // Two roots 0.01 apart, grid spacing ~0.1.
        let f = |x: f64| (x - 2.0).cos() - (0.005f64).cos();
        let roots = scan_periodic(&f, 0.0, TAU, 64, 1e-14);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(f(r.x).abs() < 1e-14);
        }
    }

    #[test]
    fn no_roots_for_positive_function() {
        let roots = scan_periodic(&|x: f64| 2.0 + x.sin(), 0.0, TAU, 100, 1e-14);
        assert!(roots.is_empty());
    }
}
