//! Closest-point projection onto B-spline curves.

use nalgebra::Point;

use super::curve::BSplineCurve;

/// Parameter of the point on `curve` closest to `x`.
///
/// Multi-start over knot spans followed by Newton iteration on
/// `g(u) = C'(u) . (C(u) - x)`; ties between equally close spans resolve
/// to the lowest parameter. The result is clamped to the curve domain.
pub fn point_inversion<const D: usize>(curve: &BSplineCurve<D>, x: &Point<f64, D>) -> f64 {
    let (lo, hi) = curve.domain();
    let knots = curve.knots().values();
    let p = curve.degree();

    // seed each nonempty span with a few samples
    let mut best_u = lo;
    let mut best_d = (curve.eval(lo) - x).norm_squared();
    let mut seeds = vec![lo];
    for w in knots[p..knots.len() - p].windows(2) {
        if w[1] > w[0] {
            for k in 1..=4 {
                seeds.push(w[0] + (w[1] - w[0]) * k as f64 / 4.0);
            }
        }
    }
    for &seed in &seeds {
        let u = refine(curve, x, seed);
        let d = (curve.eval(u) - x).norm_squared();
        if d < best_d - 1e-15 * (1.0 + best_d) {
            best_d = d;
            best_u = u;
        }
    }
    best_u.clamp(lo, hi)
}

/// Newton refinement from a starting parameter; also used to warm-start
/// projections of ordered sample sequences.
pub(crate) fn refine<const D: usize>(
    curve: &BSplineCurve<D>,
    x: &Point<f64, D>,
    mut u: f64,
) -> f64 {
    let (lo, hi) = curve.domain();
    let scale = {
        let pts = curve.control_points();
        pts.iter()
            .map(|p| (p - pts[0]).norm())
            .fold(0.0_f64, f64::max)
            .max(1.0)
    };
    for _ in 0..30 {
        let ders = curve.derivatives(u, 2);
        let diff = ders[0] - x.coords;
        let g = ders[1].dot(&diff);
        let dg = ders[2].dot(&diff) + ders[1].norm_squared();
        if g.abs() < 1e-12 * scale * scale {
            break;
        }
        if dg.abs() < 1e-300 {
            break;
        }
        let step = g / dg;
        let next = (u - step).clamp(lo, hi);
        if (next - u).abs() < 1e-15 * (hi - lo) {
            u = next;
            break;
        }
        u = next;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::knots::KnotVector;
    use approx::assert_relative_eq;
    use nalgebra::{Point2, Point3};

    fn wavy_curve() -> BSplineCurve<3> {
        let pts: Vec<Point3<f64>> = (0..40)
            .map(|i| {
                let t = i as f64 / 39.0;
                Point3::new(t * 20.0, (t * 7.0).sin() * 3.0, (t * 5.0).cos())
            })
            .collect();
        BSplineCurve::fit_cubic(&pts, 10).unwrap()
    }

    #[test]
    fn recovers_parameter_of_on_curve_point() {
        let curve = wavy_curve();
        let x = curve.eval(0.37);
        let u = point_inversion(&curve, &x);
        assert_relative_eq!(u, 0.37, epsilon = 1e-9);
    }

    #[test]
    fn residual_orthogonality_at_interior_minimum() {
        let curve = wavy_curve();
        let x = curve.eval(0.6) + nalgebra::Vector3::new(0.0, 0.5, 0.4);
        let u = point_inversion(&curve, &x);
        let d = curve.derivatives(u, 1);
        let resid = d[1].dot(&(d[0] - x.coords)).abs();
        assert!(resid < 1e-9 * 20.0_f64.powi(2), "residual {resid}");
    }

    #[test]
    fn straight_line_foot_of_perpendicular() {
        // line from (0,0) to (10,0); chord parameterization is arc length / 10
        let pts: Vec<Point2<f64>> = (0..20).map(|i| Point2::new(i as f64 * 10.0 / 19.0, 0.0)).collect();
        let curve = BSplineCurve::fit_cubic(&pts, 5).unwrap();
        let x = Point2::new(3.0, 4.0);
        let u = point_inversion(&curve, &x);
        let foot = curve.eval(u);
        assert!((foot - Point2::new(3.0, 0.0)).norm() < 1e-8, "foot {foot:?}");
    }

    #[test]
    fn equidistant_tie_breaks_to_first_span() {
        // symmetric V shape: apex at u=0.5, x above the apex is equidistant
        // from mirrored points; dense sweep confirms the returned parameter
        // is the smallest minimizer
        let control = vec![
            Point2::new(-2.0, 2.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -1.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 2.0),
        ];
        let kv = KnotVector::clamped_uniform(3, 5);
        let curve = BSplineCurve::new(3, control, kv).unwrap();
        let x = Point2::new(0.0, 3.0);
        let u = point_inversion(&curve, &x);
        // dense sweep oracle
        let mut sweep_best = (f64::INFINITY, 0.0);
        for i in 0..=20000 {
            let s = i as f64 / 20000.0;
            let d = (curve.eval(s) - x).norm_squared();
            if d < sweep_best.0 - 1e-12 {
                sweep_best = (d, s);
            }
        }
        let du = (curve.eval(u) - x).norm_squared();
        assert!(du <= sweep_best.0 + 1e-9);
        assert!(u <= sweep_best.1 + 1e-3, "u={u} sweep={}", sweep_best.1);
    }
}
