//! Grid, golden-section and bisection primitives on `(0, inf)`.

use crate::forcelaw::EvalError;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `n` log-spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// `n` evenly spaced points from `lo` to `hi`, endpoints exact.
pub fn linear_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    v[n - 1] = hi;
    v
}

/// Golden-section search for a minimum of `f` inside `[a, b]`, stopping when
/// the interval is narrower than `rtol` relative to its midpoint.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, rtol: f64) -> Result<(f64, f64), EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..500 {
        if b - a <= rtol * 0.5 * (a + b).abs() {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Bisection on a bracket where `g(a)` and `g(b)` have opposite signs (or
/// `pred(a) != pred(b)` in [`bisect_predicate`]), to relative width `rtol`.
pub fn bisect_sign<G>(g: G, mut a: f64, mut b: f64, rtol: f64) -> Result<f64, EvalError>
where
    G: Fn(f64) -> Result<f64, EvalError>,
{
    let mut ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= rtol * m.abs() || m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locate the switch point of a boolean predicate with `pred(a) != pred(b)`.
pub fn bisect_predicate<P>(pred: P, mut a: f64, mut b: f64, rtol: f64) -> Result<f64, EvalError>
where
    P: Fn(f64) -> Result<bool, EvalError>,
{
    let pa = pred(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= rtol * m.abs() || m <= a || m >= b {
            break;
        }
        if pred(m)? == pa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
