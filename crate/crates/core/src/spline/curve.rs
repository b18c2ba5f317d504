//! B-spline curves: evaluation, derivatives and least-squares fitting.

use nalgebra::{DMatrix, Point, SVector};

use super::knots::KnotVector;
use super::SplineError;

/// Clamped B-spline curve in `D` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve<const D: usize> {
    degree: usize,
    control: Vec<Point<f64, D>>,
    knots: KnotVector,
}

pub type BSplineCurve2 = BSplineCurve<2>;
pub type BSplineCurve3 = BSplineCurve<3>;

impl<const D: usize> BSplineCurve<D> {
    pub fn new(
        degree: usize,
        control: Vec<Point<f64, D>>,
        knots: KnotVector,
    ) -> Result<Self, SplineError> {
        if control.len() < degree + 1 {
            return Err(SplineError::InsufficientPoints {
                needed: degree + 1,
                got: control.len(),
                ctrl: control.len(),
            });
        }
        if knots.degree() != degree || knots.basis_count() != control.len() {
            return Err(SplineError::InvalidKnots(format!(
                "knot vector supports {} control points at degree {}, got {} at degree {}",
                knots.basis_count(),
                knots.degree(),
                control.len(),
                degree
            )));
        }
        if control
            .iter()
            .any(|p| p.coords.iter().any(|c| !c.is_finite()))
        {
            return Err(SplineError::InvalidNet("non-finite control point".into()));
        }
        Ok(Self {
            degree,
            control,
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[Point<f64, D>] {
        &self.control
    }

    pub fn control_points_mut(&mut self) -> &mut [Point<f64, D>] {
        &mut self.control
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain()
    }

    pub fn eval(&self, u: f64) -> Point<f64, D> {
        let u = self.knots.clamp_to_domain(u);
        let span = self.knots.find_span(u);
        let funs = self.knots.basis_funs(span, u);
        let mut acc = SVector::<f64, D>::zeros();
        for (j, w) in funs.iter().enumerate() {
            acc += self.control[span - self.degree + j].coords * *w;
        }
        Point::from(acc)
    }

    /// Curve point and derivatives up to `order` (clamped to the degree).
    pub fn derivatives(&self, u: f64, order: usize) -> Vec<SVector<f64, D>> {
        let u = self.knots.clamp_to_domain(u);
        let span = self.knots.find_span(u);
        let order = order.min(self.degree);
        let ders = self.knots.basis_ders(span, u, order);
        ders.iter()
            .map(|row| {
                let mut acc = SVector::<f64, D>::zeros();
                for (j, w) in row.iter().enumerate() {
                    acc += self.control[span - self.degree + j].coords * *w;
                }
                acc
            })
            .collect()
    }

    /// First derivative.
    pub fn tangent(&self, u: f64) -> SVector<f64, D> {
        self.derivatives(u, 1)[1]
    }

    /// `n` points at uniformly spaced parameters across the domain.
    pub fn sample_uniform(&self, n: usize) -> Vec<Point<f64, D>> {
        assert!(n >= 2);
        let (lo, hi) = self.domain();
        (0..n)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect()
    }

    /// Polyline arc length over `n` uniform samples.
    pub fn arc_length(&self, n: usize) -> f64 {
        self.sample_uniform(n)
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum()
    }

    /// Least-squares cubic fit with chord-length parameterization.
    ///
    /// Endpoints are interpolated exactly; interior control points solve
    /// the normal equations over averaged knots. Consecutive duplicate
    /// input points are collapsed first.
    pub fn fit_cubic(points: &[Point<f64, D>], n_ctrl: usize) -> Result<Self, SplineError> {
        Self::fit(points, 3, n_ctrl)
    }

    /// Least-squares fit of arbitrary degree (see [`Self::fit_cubic`]).
    pub fn fit(points: &[Point<f64, D>], degree: usize, n_ctrl: usize) -> Result<Self, SplineError> {
        let pts = dedup_consecutive(points);
        let n_ctrl = n_ctrl.max(degree + 1);
        if pts.len() < n_ctrl {
            return Err(SplineError::InsufficientPoints {
                needed: n_ctrl,
                got: pts.len(),
                ctrl: n_ctrl,
            });
        }
        let params = chord_length_params(&pts).ok_or(SplineError::DegenerateChain)?;
        let knots = averaged_knots(&params, degree, n_ctrl);
        let kv = KnotVector::new(degree, knots)?;

        let n = n_ctrl - 1;
        let m = pts.len() - 1;
        let first = pts[0];
        let last = pts[m];

        // interior unknowns P_1..P_{n-1}; none for a two-control segment
        let rows = m - 1;
        let cols = n - 1;
        if cols == 0 {
            return Self::new(degree, vec![first, last], kv);
        }
        let mut nmat = DMatrix::<f64>::zeros(rows, cols);
        let mut rhs = DMatrix::<f64>::zeros(rows, D);
        for k in 1..m {
            let u = params[k];
            let span = kv.find_span(u);
            let funs = kv.basis_funs(span, u);
            let mut residual = pts[k].coords;
            for (j, w) in funs.iter().enumerate() {
                let i = span - degree + j;
                if i == 0 {
                    residual -= first.coords * *w;
                } else if i == n {
                    residual -= last.coords * *w;
                } else {
                    nmat[(k - 1, i - 1)] = *w;
                }
            }
            for d in 0..D {
                rhs[(k - 1, d)] = residual[d];
            }
        }
        let ntn = nmat.transpose() * &nmat;
        let ntr = nmat.transpose() * rhs;
        let solution = ntn
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&ntr))
            .or_else(|| ntn.lu().solve(&ntr))
            .ok_or(SplineError::DegenerateChain)?;

        let mut control = Vec::with_capacity(n_ctrl);
        control.push(first);
        for i in 0..cols {
            let mut v = SVector::<f64, D>::zeros();
            for d in 0..D {
                v[d] = solution[(i, d)];
            }
            control.push(Point::from(v));
        }
        control.push(last);
        Self::new(degree, control, kv)
    }

    /// Cubic fit whose control count grows geometrically until the residual
    /// at every sample parameter drops below `tol`.
    pub fn fit_cubic_tol(
        points: &[Point<f64, D>],
        tol: f64,
        max_ctrl: usize,
    ) -> Result<Self, SplineError> {
        let pts = dedup_consecutive(points);
        let params = chord_length_params(&pts).ok_or(SplineError::DegenerateChain)?;
        let mut n_ctrl = 4usize;
        loop {
            let n_ctrl_clamped = n_ctrl.min(max_ctrl).min(pts.len());
            let curve = Self::fit_cubic(&pts, n_ctrl_clamped)?;
            let worst = pts
                .iter()
                .zip(&params)
                .map(|(q, &u)| (curve.eval(u) - q).norm())
                .fold(0.0_f64, f64::max);
            if worst <= tol || n_ctrl_clamped >= max_ctrl.min(pts.len()) {
                return Ok(curve);
            }
            n_ctrl = (n_ctrl * 3 / 2).max(n_ctrl + 1);
        }
    }
}

/// Normalized chord-length parameters in [0, 1]; `None` when all points
/// coincide.
pub fn chord_length_params<const D: usize>(points: &[Point<f64, D>]) -> Option<Vec<f64>> {
    if points.len() < 2 {
        return None;
    }
    let mut params = Vec::with_capacity(points.len());
    params.push(0.0);
    let mut total = 0.0;
    for w in points.windows(2) {
        total += (w[1] - w[0]).norm();
        params.push(total);
    }
    if total <= f64::EPSILON {
        return None;
    }
    for p in params.iter_mut() {
        *p /= total;
    }
    *params.last_mut().unwrap() = 1.0;
    Some(params)
}

/// Knot averaging for least-squares approximation: interior knots track the
/// parameter distribution so every span contains a sample parameter.
fn averaged_knots(params: &[f64], degree: usize, n_ctrl: usize) -> Vec<f64> {
    let n = n_ctrl - 1;
    let p = degree;
    let m = params.len() - 1;
    let mut knots = vec![0.0; p + 1];
    let d = (m + 1) as f64 / (n - p + 1) as f64;
    for j in 1..=(n - p) {
        let pos = j as f64 * d;
        let i = pos.floor() as usize;
        let alpha = pos - i as f64;
        knots.push((1.0 - alpha) * params[i - 1] + alpha * params[i]);
    }
    knots.extend(std::iter::repeat(1.0).take(p + 1));
    knots
}

fn dedup_consecutive<const D: usize>(points: &[Point<f64, D>]) -> Vec<Point<f64, D>> {
    let mut out: Vec<Point<f64, D>> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().map_or(true, |q| (p - q).norm() > 0.0) {
            out.push(*p);
        }
    }
    out
}

/// A 3D centreline segment with optional per-sample radii (mm).
///
/// Radii are stored at uniformly spaced parameters across the curve domain
/// and interpolated linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCurve3 {
    pub curve: BSplineCurve3,
    pub radii: Option<Vec<f64>>,
}

impl ParamCurve3 {
    pub fn new(curve: BSplineCurve3) -> Self {
        Self { curve, radii: None }
    }

    pub fn with_radii(curve: BSplineCurve3, radii: Vec<f64>) -> Result<Self, SplineError> {
        if radii.len() < 2 || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(SplineError::InvalidNet(
                "radii must be at least two positive finite values".into(),
            ));
        }
        Ok(Self {
            curve,
            radii: Some(radii),
        })
    }

    /// Radius at a domain parameter, linearly interpolated; `None` when the
    /// curve carries no radii.
    pub fn radius_at(&self, u: f64) -> Option<f64> {
        let radii = self.radii.as_ref()?;
        let (lo, hi) = self.curve.domain();
        let t = ((u - lo) / (hi - lo)).clamp(0.0, 1.0) * (radii.len() - 1) as f64;
        let i = (t.floor() as usize).min(radii.len() - 2);
        let frac = t - i as f64;
        Some(radii[i] * (1.0 - frac) + radii[i + 1] * frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Point2, Point3};

    #[test]
    fn clamped_curve_interpolates_end_controls() {
        let control = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 2.0),
            Point2::new(3.0, -1.0),
            Point2::new(4.0, 0.5),
            Point2::new(6.0, 1.0),
        ];
        let kv = KnotVector::clamped_uniform(3, control.len());
        let curve = BSplineCurve::new(3, control.clone(), kv).unwrap();
        assert!((curve.eval(0.0) - control[0]).norm() < 1e-15);
        assert!((curve.eval(1.0) - control[4]).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_bezier_closed_form() {
        // clamped cubic with 4 controls is a Bezier curve
        let control = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 3.0),
            Point2::new(2.0, -3.0),
            Point2::new(3.0, 0.0),
        ];
        let kv = KnotVector::clamped_uniform(3, 4);
        let curve = BSplineCurve::new(3, control.clone(), kv).unwrap();
        for &u in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            let b = |i: usize| {
                let c = [1.0, 3.0, 3.0, 1.0][i];
                c * u.powi(i as i32) * (1.0 - u).powi(3 - i as i32)
            };
            let mut want = nalgebra::Vector2::zeros();
            for i in 0..4 {
                want += control[i].coords * b(i);
            }
            assert!((curve.eval(u).coords - want).norm() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let control = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 2.0, -1.0),
            Point3::new(2.5, 1.0, 0.5),
            Point3::new(4.0, -1.0, 2.0),
            Point3::new(5.0, 0.0, 1.0),
            Point3::new(6.5, 2.0, 0.0),
        ];
        let kv = KnotVector::clamped_uniform(3, control.len());
        let curve = BSplineCurve::new(3, control, kv).unwrap();
        let h = 1e-6;
        for &u in &[0.15, 0.35, 0.55, 0.85] {
            let d = curve.derivatives(u, 2);
            let fd1 = (curve.eval(u + h) - curve.eval(u - h)) / (2.0 * h);
            let fd2 = (curve.eval(u + h).coords - curve.eval(u).coords * 2.0
                + curve.eval(u - h).coords)
                / (h * h);
            assert!((d[1] - fd1).norm() < 1e-5);
            assert!((d[2] - fd2).norm() < 1e-3);
        }
    }

    #[test]
    fn fit_collinear_points_reproduces_line() {
        let points: Vec<Point2<f64>> = (0..20)
            .map(|i| Point2::new(i as f64 * 0.7, i as f64 * 1.4))
            .collect();
        let curve = BSplineCurve::fit_cubic(&points, 6).unwrap();
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let p = curve.eval(u);
            // distance from the line y = 2x
            let dist = (p.y - 2.0 * p.x).abs() / (5.0_f64).sqrt();
            assert!(dist < 1e-9, "deviation {dist} at u={u}");
        }
    }

    #[test]
    fn fit_quarter_circle_within_tolerance() {
        let points: Vec<Point2<f64>> = (0..50)
            .map(|i| {
                let t = std::f64::consts::FRAC_PI_2 * i as f64 / 49.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let curve = BSplineCurve::fit_cubic(&points, 6).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..=500 {
            let u = i as f64 / 500.0;
            let p = curve.eval(u);
            worst = worst.max((p.coords.norm() - 1.0).abs());
        }
        assert!(worst < 1e-3, "max radial deviation {worst}");
    }

    #[test]
    fn fit_interpolates_endpoints_exactly() {
        let points: Vec<Point3<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 / 29.0;
                Point3::new(t * 10.0, (t * 6.0).sin(), (t * 4.0).cos())
            })
            .collect();
        let curve = BSplineCurve::fit_cubic(&points, 8).unwrap();
        assert!((curve.eval(0.0) - points[0]).norm() < 1e-12);
        assert!((curve.eval(1.0) - points[29]).norm() < 1e-12);
    }

    #[test]
    fn fit_rejects_insufficient_points() {
        let points = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        assert!(matches!(
            BSplineCurve::fit_cubic(&points, 4),
            Err(SplineError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn fit_rejects_degenerate_chain() {
        let points = vec![Point2::new(1.0, 1.0); 10];
        assert!(matches!(
            BSplineCurve::fit_cubic(&points, 4),
            Err(SplineError::DegenerateChain)
        ));
    }

    #[test]
    fn fit_cubic_tol_tightens_until_tolerance() {
        let points: Vec<Point2<f64>> = (0..200)
            .map(|i| {
                let t = i as f64 / 199.0 * std::f64::consts::PI;
                Point2::new(t, (3.0 * t).sin())
            })
            .collect();
        let curve = BSplineCurve::fit_cubic_tol(&points, 1e-6, 128).unwrap();
        let params = chord_length_params(&points).unwrap();
        for (q, &u) in points.iter().zip(&params) {
            assert!((curve.eval(u) - q).norm() <= 1e-6);
        }
    }

    #[test]
    fn radius_interpolation_is_linear() {
        let kv = KnotVector::clamped_uniform(3, 4);
        let control = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(3.0, 0.0, 0.0),
        ];
        let curve = BSplineCurve::new(3, control, kv).unwrap();
        let pc = ParamCurve3::with_radii(curve, vec![2.0, 1.0]).unwrap();
        assert_relative_eq!(pc.radius_at(0.5).unwrap(), 1.5, epsilon = 1e-12);
        assert_relative_eq!(pc.radius_at(0.0).unwrap(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(pc.radius_at(1.0).unwrap(), 1.0, epsilon = 1e-12);
    }
}
