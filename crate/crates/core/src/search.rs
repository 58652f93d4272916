//! One-dimensional maximization helpers.

use rayon::prelude::*;

/// `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// Set when a probe fell below both ends of its bracket, i.e. the
    /// function is not unimodal on the searched interval.
    pub unimodality_violated: bool,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]` until the
/// bracket is narrower than `tol`.
pub fn golden_section_max<F, E>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (lo, hi);
    let (f_a, f_b) = (f(a)?, f(b)?);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let (mut f_lo, mut f_hi) = (f_a, f_b);
    let mut violated = false;

    while b - a > tol {
        if f1 < f_lo && f1 < f_hi || f2 < f_lo && f2 < f_hi {
            violated = true;
        }
        if f1 >= f2 {
            b = x2;
            f_hi = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            f_lo = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }

    let best = [
        (a, f_lo),
        (x1, f1),
        (x2, f2),
        (b, f_hi),
        (lo, f_a),
        (hi, f_b),
    ]
    .into_iter()
    .fold((lo, f64::NEG_INFINITY), |acc, (x, v)| {
        if v > acc.1 {
            (x, v)
        } else {
            acc
        }
    });
    Ok(Maximum {
        x: best.0,
        value: best.1,
        unimodality_violated: violated,
    })
}

/// Evaluates `f` on `points` evenly spaced nodes spanning `[lo, hi]` in
/// parallel and returns the best node. Ties go to the smaller abscissa, so
/// the result does not depend on evaluation order.
pub fn grid_max<F, E>(f: F, lo: f64, hi: f64, points: usize) -> Result<Maximum, E>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Send,
{
    assert!(points >= 2, "grid needs at least two points");
    let width = hi - lo;
    let last = (points - 1) as f64;
    let values: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .map(|k| {
            let x = lo + width * (k as f64 / last);
            f(x).map(|v| (x, v))
        })
        .collect::<Result<_, E>>()?;
    let best = values
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |acc, (x, v)| {
            if v > acc.1 {
                (x, v)
            } else {
                acc
            }
        });
    Ok(Maximum {
        x: best.0,
        value: best.1,
        unimodality_violated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_section_max(
            |x| Ok::<_, Infallible>(-(x - 0.3) * (x - 0.3)),
            -1.0,
            2.0,
            1e-10,
        )
        .unwrap();
        assert!((m.x - 0.3).abs() < 1e-9);
        assert!(!m.unimodality_violated);
    }

    #[test]
    fn golden_handles_kinked_peak() {
        let m = golden_section_max(
            |x: f64| Ok::<_, Infallible>(-(x - 1.25).abs()),
            0.0,
            4.0,
            1e-10,
        )
        .unwrap();
        assert!((m.x - 1.25).abs() < 1e-9);
    }

    #[test]
    fn golden_flags_bimodal() {
        let f = |x: f64| Ok::<_, Infallible>((6.0 * x).sin().abs());
        let m = golden_section_max(f, 0.0, 3.0, 1e-8).unwrap();
        assert!(m.unimodality_violated);
    }

    #[test]
    fn grid_is_order_independent() {
        let f = |x: f64| Ok::<_, Infallible>(if x <= 0.5 { 1.0 } else { 0.0 });
        let m = grid_max(f, 0.0, 1.0, 1001).unwrap();
        assert_eq!(m.x, 0.0);
        assert_eq!(m.value, 1.0);
    }
}
