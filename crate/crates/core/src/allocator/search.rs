//! One-dimensional search primitives.

/// Hard cap on bisection steps.
pub const MAX_BISECTION_ITERS: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `rel_tol * max(|lo|, |hi|)` (or
/// `rel_tol` itself when the bracket straddles zero). The endpoints are
/// evaluated as well, so a minimum sitting on the boundary is returned
/// exactly.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > tol && iterations < 400 {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd {
        Minimum {
            x: c,
            value: fc,
            iterations,
        }
    } else {
        Minimum {
            x: d,
            value: fd,
            iterations,
        }
    };
    for x in [lo, hi] {
        let v = f(x);
        if v < best.value {
            best = Minimum {
                x,
                value: v,
                iterations,
            };
        }
    }
    best
}

/// Smallest `t` in `[lo, hi]` (to bisection precision) with `pred(t)` true,
/// for a predicate that is monotone false→true. Returns the upper end of the
/// final bracket, so `pred` holds at the returned point whenever it held at
/// `hi`.
pub fn bisect_threshold<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let mut iters = 0;
    while iters < MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    (hi, iters)
}
