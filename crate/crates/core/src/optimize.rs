//! One-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Stops when the bracket is narrower than `tol` and returns the best
/// evaluated point. Endpoints are not evaluated; callers that expect boundary
/// minima compare against them.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
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
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden section plus both endpoints; ties go to the smaller abscissa.
pub fn minimize_on_unit(mut f: impl FnMut(f64) -> f64, tol: f64) -> (f64, f64) {
    let f0 = f(0.0);
    let f1 = f(1.0);
    let (x, fx) = golden_section(&mut f, 0.0, 1.0, tol);
    let mut best = (0.0, f0);
    if fx < best.1 {
        best = (x, fx);
    }
    if f1 < best.1 {
        best = (1.0, f1);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimum_found_by_endpoint() {
        let (x, fx) = minimize_on_unit(|x| 2.0 - x, 1e-10);
        assert_eq!(x, 1.0);
        assert_eq!(fx, 1.0);
    }

    #[test]
    fn flat_function_prefers_zero() {
        let (x, _) = minimize_on_unit(|_| 5.0, 1e-10);
        assert_eq!(x, 0.0);
    }
}
