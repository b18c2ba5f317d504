//! Rational tensor-product surfaces and the extruded (ruled) surfaces used
//! for two-view reconstruction.

use nalgebra::{Point3, Vector3};

use super::curve::BSplineCurve3;
use super::knots::KnotVector;
use super::SplineError;

/// Tensor-product NURBS surface.
///
/// `control[i][j]` is the control point for u-index `i` and v-index `j`;
/// `weights` has the same shape and must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsSurface {
    degree_u: usize,
    degree_v: usize,
    control: Vec<Vec<Point3<f64>>>,
    weights: Vec<Vec<f64>>,
    knots_u: KnotVector,
    knots_v: KnotVector,
}

impl NurbsSurface {
    pub fn new(
        degree_u: usize,
        degree_v: usize,
        control: Vec<Vec<Point3<f64>>>,
        weights: Vec<Vec<f64>>,
        knots_u: KnotVector,
        knots_v: KnotVector,
    ) -> Result<Self, SplineError> {
        let nu = control.len();
        if nu == 0 || control.iter().any(|row| row.len() != control[0].len()) {
            return Err(SplineError::InvalidNet("ragged control net".into()));
        }
        let nv = control[0].len();
        if weights.len() != nu || weights.iter().any(|row| row.len() != nv) {
            return Err(SplineError::InvalidNet(
                "weight grid shape differs from control net".into(),
            ));
        }
        if weights
            .iter()
            .flatten()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(SplineError::InvalidNet(
                "weights must be positive and finite".into(),
            ));
        }
        if knots_u.degree() != degree_u || knots_u.basis_count() != nu {
            return Err(SplineError::InvalidKnots(format!(
                "u knots support {} rows at degree {}, net has {} rows at degree {}",
                knots_u.basis_count(),
                knots_u.degree(),
                nu,
                degree_u
            )));
        }
        if knots_v.degree() != degree_v || knots_v.basis_count() != nv {
            return Err(SplineError::InvalidKnots(format!(
                "v knots support {} columns at degree {}, net has {} columns at degree {}",
                knots_v.basis_count(),
                knots_v.degree(),
                nv,
                degree_v
            )));
        }
        Ok(Self {
            degree_u,
            degree_v,
            control,
            weights,
            knots_u,
            knots_v,
        })
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_u, self.degree_v)
    }

    pub fn control_net(&self) -> &[Vec<Point3<f64>>] {
        &self.control
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    /// Surface parameter domain `((u_min, u_max), (v_min, v_max))`.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        (self.knots_u.domain(), self.knots_v.domain())
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let ((ul, uh), (vl, vh)) = self.domain();
        u >= ul && u <= uh && v >= vl && v <= vh
    }

    /// Evaluates the rational sum
    /// `S(u,v) = Σ Σ N_i(u) N_j(v) w_ij P_ij / Σ Σ N_i(u) N_j(v) w_ij`.
    pub fn eval(&self, u: f64, v: f64) -> Result<Point3<f64>, SplineError> {
        if !self.contains(u, v) {
            return Err(SplineError::DomainViolation(u, v));
        }
        let (num, den) = self.homogeneous(u, v);
        Ok(Point3::from(num / den))
    }

    fn homogeneous(&self, u: f64, v: f64) -> (Vector3<f64>, f64) {
        let su = self.knots_u.find_span(u);
        let sv = self.knots_v.find_span(v);
        let nu = self.knots_u.basis_funs(su, u);
        let nv = self.knots_v.basis_funs(sv, v);
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        for (a, bu) in nu.iter().enumerate() {
            let i = su - self.degree_u + a;
            for (b, bv) in nv.iter().enumerate() {
                let j = sv - self.degree_v + b;
                let w = self.weights[i][j] * bu * bv;
                num += self.control[i][j].coords * w;
                den += w;
            }
        }
        (num, den)
    }

    /// Point and first partial derivatives, clamping parameters into the
    /// domain. Uses the quotient rule on the homogeneous form.
    pub fn eval_with_derivs(&self, u: f64, v: f64) -> (Point3<f64>, Vector3<f64>, Vector3<f64>) {
        let u = self.knots_u.clamp_to_domain(u);
        let v = self.knots_v.clamp_to_domain(v);
        let su = self.knots_u.find_span(u);
        let sv = self.knots_v.find_span(v);
        let du = self.knots_u.basis_ders(su, u, 1);
        let dv = self.knots_v.basis_ders(sv, v, 1);
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        let mut num_u = Vector3::zeros();
        let mut den_u = 0.0;
        let mut num_v = Vector3::zeros();
        let mut den_v = 0.0;
        for a in 0..=self.degree_u {
            let i = su - self.degree_u + a;
            for b in 0..=self.degree_v {
                let j = sv - self.degree_v + b;
                let w = self.weights[i][j];
                let p = self.control[i][j].coords;
                let f = w * du[0][a] * dv[0][b];
                let fu = w * du[1][a] * dv[0][b];
                let fv = w * du[0][a] * dv[1][b];
                num += p * f;
                den += f;
                num_u += p * fu;
                den_u += fu;
                num_v += p * fv;
                den_v += fv;
            }
        }
        let s = num / den;
        let s_u = (num_u - s * den_u) / den;
        let s_v = (num_v - s * den_v) / den;
        (Point3::from(s), s_u, s_v)
    }

    /// Axis-aligned bounds of the control net (contains the surface by the
    /// convex-hull property).
    pub fn control_bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.control.iter().flatten() {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

/// Ruled surface swept by the ray family from `source` through a curve in
/// the detector plane: `S(u, 0) = C(u)`, `S(u, 1) = source`.
///
/// The control net keeps the curve's control points as the v=0 row and
/// repeats the source along v=1; all weights are one, so the surface is
/// affine in v along each ruling.
pub fn extrude_surface(
    curve: &BSplineCurve3,
    source: Point3<f64>,
) -> Result<NurbsSurface, SplineError> {
    // reject a source on the curve plane: rulings would degenerate
    let pts = curve.control_points();
    let origin = pts[0];
    let e1 = pts
        .iter()
        .map(|p| p - origin)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let normal = pts
        .iter()
        .map(|p| e1.cross(&(p - origin)))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    if normal.norm() > 0.0 {
        let n = normal.normalize();
        let scale = e1.norm().max(1.0);
        if ((source - origin).dot(&n)).abs() < 1e-9 * scale {
            return Err(SplineError::SourceOnPlane);
        }
    }

    let control: Vec<Vec<Point3<f64>>> = pts.iter().map(|p| vec![*p, source]).collect();
    let weights = vec![vec![1.0, 1.0]; pts.len()];
    let knots_v = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0])?;
    NurbsSurface::new(
        curve.degree(),
        1,
        control,
        weights,
        curve.knots().clone(),
        knots_v,
    )
}
