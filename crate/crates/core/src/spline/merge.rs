//! Centreline post-processing: control-point reduction and C1 merging of
//! consecutive curve segments.

use nalgebra::Point3;

use super::curve::{chord_length_params, BSplineCurve3, ParamCurve3};
use super::knots::KnotVector;
use super::SplineError;

/// Refits `curve` through dense samples of itself with `n_ctrl` control
/// points, growing the control count geometrically until the maximum
/// deviation drops below `tol` (a zero tolerance means full fidelity,
/// 1e-9).
pub fn resample(curve: &ParamCurve3, n_ctrl: usize, tol: f64) -> ParamCurve3 {
    let tol = if tol > 0.0 { tol } else { 1e-9 };
    let n_samples = (curve.curve.control_points().len() * 8).clamp(128, 4096);
    let samples = curve.curve.sample_uniform(n_samples);
    let params = chord_length_params(&samples).unwrap_or_else(|| {
        (0..n_samples)
            .map(|i| i as f64 / (n_samples - 1) as f64)
            .collect()
    });

    let mut n = n_ctrl.max(4);
    let refit = loop {
        let cap = n.min(n_samples);
        let candidate = match BSplineCurve3::fit_cubic(&samples, cap) {
            Ok(c) => c,
            Err(_) => break curve.curve.clone(),
        };
        let worst = samples
            .iter()
            .zip(&params)
            .map(|(q, &u)| (candidate.eval(u) - q).norm())
            .fold(0.0_f64, f64::max);
        if worst <= tol || cap >= n_samples {
            break candidate;
        }
        n = (n * 3 / 2).max(n + 1);
    };

    // carry radii over: original radii live at uniform parameters, the new
    // curve is parameterized by chord length of the samples
    let radii = curve.radii.as_ref().map(|_| {
        let m = 64.max(n_ctrl * 4) + 1;
        (0..m)
            .map(|i| {
                let t = i as f64 / (m - 1) as f64;
                // invert chord parameterization: sample index at chord t
                let k = params.partition_point(|&p| p < t).min(n_samples - 1);
                let (t0, t1) = if k == 0 {
                    (params[0], params[0])
                } else {
                    (params[k - 1], params[k])
                };
                let (lo, hi) = curve.curve.domain();
                let frac = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                let idx = if k == 0 { 0.0 } else { (k - 1) as f64 + frac };
                let orig_u = lo + (hi - lo) * idx / (n_samples - 1) as f64;
                curve.radius_at(orig_u).expect("radii present")
            })
            .collect()
    });
    ParamCurve3 {
        curve: refit,
        radii,
    }
}

/// Merges consecutive cubic segments into one curve with a continuous
/// unit tangent at every join.
///
/// Consecutive endpoints must coincide within `join_tol` (mm). Each join
/// becomes a full-multiplicity interior knot sharing one control point,
/// and the two neighbouring control points are realigned onto the average
/// tangent direction.
pub fn merge_c1(segments: &[ParamCurve3], join_tol: f64) -> Result<ParamCurve3, SplineError> {
    assert!(!segments.is_empty(), "need at least one segment");
    if segments.len() == 1 {
        return Ok(segments[0].clone());
    }
    for seg in segments {
        if seg.curve.degree() != 3 {
            return Err(SplineError::InvalidNet(
                "merge requires cubic segments".into(),
            ));
        }
    }
    for w in segments.windows(2) {
        let end = *w[0].curve.control_points().last().unwrap();
        let start = w[1].curve.control_points()[0];
        let gap = (end - start).norm();
        if gap > join_tol {
            return Err(SplineError::JoinGapTooLarge { gap, tol: join_tol });
        }
    }

    // domain split proportional to arc length
    let lengths: Vec<f64> = segments.iter().map(|s| s.curve.arc_length(128)).collect();
    let total: f64 = lengths.iter().sum();
    let mut cuts = vec![0.0];
    let mut acc = 0.0;
    for len in &lengths {
        acc += len / total;
        cuts.push(acc);
    }
    *cuts.last_mut().unwrap() = 1.0;

    let mut control: Vec<Point3<f64>> = Vec::new();
    let mut knots: Vec<f64> = vec![0.0; 4];
    let mut join_indices: Vec<usize> = Vec::new();
    for (k, seg) in segments.iter().enumerate() {
        let pts = seg.curve.control_points();
        let (lo, hi) = seg.curve.domain();
        let (a, b) = (cuts[k], cuts[k + 1]);
        let kv = seg.curve.knots().values();
        let interior = &kv[4..kv.len() - 4];
        if k == 0 {
            control.extend_from_slice(pts);
        } else {
            // share the join control point
            let join = nalgebra::center(control.last().unwrap(), &pts[0]);
            *control.last_mut().unwrap() = join;
            join_indices.push(control.len() - 1);
            control.extend_from_slice(&pts[1..]);
            knots.extend([a, a, a]);
        }
        knots.extend(
            interior
                .iter()
                .map(|u| a + (b - a) * (u - lo) / (hi - lo)),
        );
    }
    knots.extend([1.0; 4]);

    // align unit tangents at each join by rotating the neighbour controls
    for &j in &join_indices {
        let p = control[j];
        let d_in = p - control[j - 1];
        let d_out = control[j + 1] - p;
        let (n_in, n_out) = (d_in.norm(), d_out.norm());
        if n_in < 1e-12 || n_out < 1e-12 {
            continue;
        }
        let mut t = d_in / n_in + d_out / n_out;
        if t.norm() < 1e-9 {
            t = d_in / n_in; // opposing tangents: keep the incoming direction
        }
        let t = t.normalize();
        control[j - 1] = p - t * n_in;
        control[j + 1] = p + t * n_out;
    }

    let curve = BSplineCurve3::new(3, control, KnotVector::new(3, knots)?)?;

    // stitch radii on a uniform grid over the merged domain
    let any_radii = segments.iter().all(|s| s.radii.is_some());
    let radii = any_radii.then(|| {
        let m = 32 * segments.len() + 1;
        (0..m)
            .map(|i| {
                let t = i as f64 / (m - 1) as f64;
                let k = cuts[1..].partition_point(|&c| c < t).min(segments.len() - 1);
                let local = (t - cuts[k]) / (cuts[k + 1] - cuts[k]).max(1e-300);
                let (lo, hi) = segments[k].curve.domain();
                segments[k]
                    .radius_at(lo + (hi - lo) * local.clamp(0.0, 1.0))
                    .expect("radii present")
            })
            .collect()
    });
    Ok(ParamCurve3 { curve, radii })
}
