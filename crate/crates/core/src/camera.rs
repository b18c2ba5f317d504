//! Cone-beam C-arm projection geometry.
//!
//! World coordinates are millimetres in an isocenter-centered patient
//! frame: +x towards the patient's left, +y superior (head), +z anterior.
//! The gantry orientation is obtained by rotating the anterior axis first
//! by the secondary angle (cranial positive, about +x) and then by the
//! primary angle (LAO positive, about +y). The X-ray source sits at
//! distance SOD behind the isocenter on that axis, the detector plane at
//! SID beyond the source, perpendicular to the axis.

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

/// Errors raised by the projection-geometry layer.
#[derive(Debug, thiserror::Error)]
pub enum CameraError {
    #[error("invalid C-arm pose: {0}")]
    InvalidPose(String),
    #[error("ray direction has near-zero length")]
    ZeroDirection,
    #[error("rays are near-parallel (cross-product norm {norm:.3e})")]
    NearParallel { norm: f64 },
    #[error("calibration parse error: {0}")]
    Calibration(String),
}

/// Acquisition geometry of one C-arm view.
///
/// Field names double as the calibration-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CArmPose {
    /// Primary gantry angle in degrees, LAO positive / RAO negative.
    pub primary_angle_deg: f64,
    /// Secondary gantry angle in degrees, cranial positive / caudal negative.
    pub secondary_angle_deg: f64,
    /// Source-to-detector distance (SID), mm.
    pub sid_mm: f64,
    /// Source-to-isocenter distance (SOD), mm.
    pub sod_mm: f64,
    /// Detector width in pixels.
    pub cols: usize,
    /// Detector height in pixels.
    pub rows: usize,
    /// Detector pixel pitch, mm/pixel.
    pub pixel_spacing_mm: f64,
    /// Principal point (column, row) in pixels.
    pub principal_point_px: [f64; 2],
}

impl CArmPose {
    /// A posteroanterior view with detector centered on the central ray.
    pub fn pa(sid_mm: f64, sod_mm: f64, cols: usize, rows: usize, pixel_spacing_mm: f64) -> Self {
        Self {
            primary_angle_deg: 0.0,
            secondary_angle_deg: 0.0,
            sid_mm,
            sod_mm,
            cols,
            rows,
            pixel_spacing_mm,
            principal_point_px: [(cols as f64 - 1.0) / 2.0, (rows as f64 - 1.0) / 2.0],
        }
    }

    /// Same geometry rotated to a different gantry angle pair.
    pub fn with_angles(mut self, primary_deg: f64, secondary_deg: f64) -> Self {
        self.primary_angle_deg = primary_deg;
        self.secondary_angle_deg = secondary_deg;
        self
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let finite = [
            self.primary_angle_deg,
            self.secondary_angle_deg,
            self.sid_mm,
            self.sod_mm,
            self.pixel_spacing_mm,
            self.principal_point_px[0],
            self.principal_point_px[1],
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(CameraError::InvalidPose("non-finite field".into()));
        }
        if !(self.sid_mm > self.sod_mm && self.sod_mm > 0.0) {
            return Err(CameraError::InvalidPose(format!(
                "need sid > sod > 0, got sid={} sod={}",
                self.sid_mm, self.sod_mm
            )));
        }
        if self.pixel_spacing_mm <= 0.0 {
            return Err(CameraError::InvalidPose(format!(
                "pixel spacing must be positive, got {}",
                self.pixel_spacing_mm
            )));
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(CameraError::InvalidPose("empty detector".into()));
        }
        let [pc, pr] = self.principal_point_px;
        if pc < 0.0 || pc > self.cols as f64 - 1.0 || pr < 0.0 || pr > self.rows as f64 - 1.0 {
            return Err(CameraError::InvalidPose(format!(
                "principal point ({pc}, {pr}) outside detector {}x{}",
                self.cols, self.rows
            )));
        }
        Ok(())
    }

    /// Parses a calibration document (TOML, keys identical to field names).
    pub fn from_toml_str(text: &str) -> Result<Self, CameraError> {
        let pose: CArmPose =
            toml::from_str(text).map_err(|e| CameraError::Calibration(e.to_string()))?;
        pose.validate()?;
        Ok(pose)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("pose serializes")
    }

    /// Geometric magnification SID/SOD at the isocenter plane.
    pub fn magnification(&self) -> f64 {
        self.sid_mm / self.sod_mm
    }

    /// Conversion factor from detector pixels to mm at the isocenter plane.
    pub fn px_to_iso_mm(&self) -> f64 {
        self.pixel_spacing_mm * self.sod_mm / self.sid_mm
    }
}

/// Half-line in world coordinates with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub direction: Vector3<f64>,
}

impl Ray {
    /// Normalizes `direction`; rejects near-zero input.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Result<Self, CameraError> {
        let norm = direction.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(CameraError::ZeroDirection);
        }
        Ok(Self {
            origin,
            direction: direction / norm,
        })
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

/// Precomputed cone-beam projection for one view.
#[derive(Debug, Clone)]
pub struct ProjectionModel {
    pose: CArmPose,
    source: Point3<f64>,
    detector_center: Point3<f64>,
    /// Unit vector from source towards detector center.
    axis: Vector3<f64>,
    /// In-plane detector axis along increasing column.
    e_col: Vector3<f64>,
    /// In-plane detector axis along increasing row.
    e_row: Vector3<f64>,
}

impl ProjectionModel {
    /// Builds the projection for a validated pose.
    pub fn new(pose: &CArmPose) -> Result<Self, CameraError> {
        pose.validate()?;
        let a = pose.primary_angle_deg.to_radians();
        let b = pose.secondary_angle_deg.to_radians();
        // secondary tilt about +x (cranial positive moves the detector
        // towards the head), then primary rotation about +y (LAO positive
        // swings the detector towards the patient's left)
        let rot = Matrix3::from(nalgebra::Rotation3::from_axis_angle(
            &Vector3::y_axis(),
            a,
        )) * Matrix3::from(nalgebra::Rotation3::from_axis_angle(
            &Vector3::x_axis(),
            -b,
        ));
        let axis = rot * Vector3::z();
        let e_col = rot * Vector3::x();
        let e_row = rot * Vector3::y();
        let source = Point3::origin() - axis * pose.sod_mm;
        let detector_center = Point3::origin() + axis * (pose.sid_mm - pose.sod_mm);
        Ok(Self {
            pose: pose.clone(),
            source,
            detector_center,
            axis,
            e_col,
            e_row,
        })
    }

    pub fn pose(&self) -> &CArmPose {
        &self.pose
    }

    pub fn source(&self) -> Point3<f64> {
        self.source
    }

    /// Unit central-ray direction, source towards detector.
    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    /// Projects a world point (mm) to detector pixel coordinates.
    ///
    /// The point must lie on the detector side of the source.
    pub fn project(&self, p: &Point3<f64>) -> Point2<f64> {
        let r = p - self.source;
        let depth = r.dot(&self.axis);
        debug_assert!(depth > 1e-9, "point at or behind the source");
        let foot = self.source + r * (self.pose.sid_mm / depth);
        let offset = foot - self.detector_center;
        let [pc, pr] = self.pose.principal_point_px;
        Point2::new(
            pc + offset.dot(&self.e_col) / self.pose.pixel_spacing_mm,
            pr + offset.dot(&self.e_row) / self.pose.pixel_spacing_mm,
        )
    }

    /// World position (mm) of a pixel on the physical detector plane.
    pub fn detector_point(&self, px: &Point2<f64>) -> Point3<f64> {
        let [pc, pr] = self.pose.principal_point_px;
        self.detector_center
            + self.e_col * ((px.x - pc) * self.pose.pixel_spacing_mm)
            + self.e_row * ((px.y - pr) * self.pose.pixel_spacing_mm)
    }

    /// Ray from the source through the given detector pixel.
    pub fn backproject_ray(&self, px: &Point2<f64>) -> Ray {
        let target = self.detector_point(px);
        Ray::new(self.source, target - self.source).expect("sid > 0 keeps direction nonzero")
    }

    /// True when the pixel lies inside the detector bounds.
    pub fn in_bounds(&self, px: &Point2<f64>) -> bool {
        px.x >= 0.0
            && px.y >= 0.0
            && px.x <= self.pose.cols as f64 - 1.0
            && px.y <= self.pose.rows as f64 - 1.0
    }
}

/// Midpoint of the shortest segment between two rays, plus its length.
///
/// For intersecting rays the gap is zero and the midpoint is the
/// intersection itself. Near-parallel rays are rejected because the
/// midpoint becomes numerically meaningless.
pub fn triangulate_midpoint(a: &Ray, b: &Ray) -> Result<(Point3<f64>, f64), CameraError> {
    let cross = a.direction.cross(&b.direction);
    let norm = cross.norm();
    if norm < 1e-10 {
        return Err(CameraError::NearParallel { norm });
    }
    let w0 = a.origin - b.origin;
    let d11 = a.direction.dot(&a.direction);
    let d12 = a.direction.dot(&b.direction);
    let d22 = b.direction.dot(&b.direction);
    let d1w = a.direction.dot(&w0);
    let d2w = b.direction.dot(&w0);
    let denom = d11 * d22 - d12 * d12;
    let s = (d12 * d2w - d22 * d1w) / denom;
    let t = (d11 * d2w - d12 * d1w) / denom;
    let pa = a.at(s);
    let pb = b.at(t);
    Ok((nalgebra::center(&pa, &pb), (pa - pb).norm()))
}

/// The reconstruction-error metric for a candidate 3D point.
///
/// Each view contributes the pixel distance between the reprojected point
/// and its observation, converted to mm at the isocenter plane
/// (pixel_spacing * SOD / SID); the maximum of the two is returned.
pub fn reconstruction_error(
    p: &Point3<f64>,
    obs_a: &Point2<f64>,
    obs_b: &Point2<f64>,
    model_a: &ProjectionModel,
    model_b: &ProjectionModel,
) -> f64 {
    let ea = (model_a.project(p) - obs_a).norm() * model_a.pose().px_to_iso_mm();
    let eb = (model_b.project(p) - obs_b).norm() * model_b.pose().px_to_iso_mm();
    ea.max(eb)
}
