//! Surface–surface intersection by seeded Newton refinement and
//! predictor-corrector marching.
//!
//! Both surfaces are sampled on a coarse grid; close sample pairs seed a
//! Newton solve on `F(u,v,s,t) = S1(u,v) - S2(s,t)` using the Moore-Penrose
//! pseudo-inverse of the 3x4 Jacobian. Each converged seed is marched along
//! the tangent null-space in both directions until a domain boundary or
//! loop closure, the traced polyline is densified to a sag tolerance, and a
//! cubic B-spline is fitted per branch.

use nalgebra::{Matrix3x4, Point3, Vector3, Vector4};

use super::curve::{BSplineCurve3, ParamCurve3};
use super::surface::NurbsSurface;

/// Tuning knobs for [`intersect_surfaces`].
///
/// Length-like tolerances are fractions of the scene scale (the diagonal of
/// the union of both control-net bounding boxes).
#[derive(Debug, Clone)]
pub struct IntersectParams {
    /// Seeding samples along u per surface.
    pub grid_u: usize,
    /// Seeding samples along v per surface (few needed on ruled surfaces).
    pub grid_v: usize,
    /// Newton residual target as a fraction of scene scale.
    pub residual_fraction: f64,
    /// Maximum Newton iterations per point.
    pub max_newton: usize,
    /// Initial marching step as a fraction of the u-domain.
    pub step_fraction: f64,
    /// Domain margin kept clear of degenerate surface edges (apex rows).
    pub edge_margin: f64,
    /// Densification sag threshold as a fraction of scene scale.
    pub sag_fraction: f64,
    /// Branch-curve fit tolerance as a fraction of scene scale.
    pub fit_fraction: f64,
    /// Control-point budget for fitted branch curves.
    pub max_fit_ctrl: usize,
}

impl Default for IntersectParams {
    fn default() -> Self {
        Self {
            grid_u: 64,
            grid_v: 8,
            residual_fraction: 1e-10,
            max_newton: 50,
            step_fraction: 1.0 / 128.0,
            edge_margin: 1e-3,
            sag_fraction: 1e-9,
            fit_fraction: 1e-8,
            max_fit_ctrl: 96,
        }
    }
}

/// One traced intersection branch: world points plus the `(u, v, s, t)`
/// surface parameters of every point.
#[derive(Debug, Clone)]
pub struct TracedBranch {
    pub points: Vec<Point3<f64>>,
    pub params: Vec<[f64; 4]>,
    pub closed: bool,
}

/// Result of [`intersect_surfaces`].
#[derive(Debug, Clone)]
pub struct IntersectionOutcome {
    /// Fitted branch curves, sorted by their starting parameters.
    pub curves: Vec<ParamCurve3>,
    /// Raw traces aligned with `curves`.
    pub traced: Vec<TracedBranch>,
    /// Seeds abandoned because Newton failed to converge.
    pub diverged_seeds: usize,
    /// Traces dropped for having too few points to fit.
    pub dropped_branches: usize,
}

#[derive(Clone, Copy)]
struct Box4 {
    lo: Vector4<f64>,
    hi: Vector4<f64>,
}

impl Box4 {
    fn clamp(&self, q: &mut Vector4<f64>) {
        for i in 0..4 {
            q[i] = q[i].clamp(self.lo[i], self.hi[i]);
        }
    }

    /// Largest fraction of the step that stays inside the box.
    fn max_fraction(&self, q: &Vector4<f64>, step: &Vector4<f64>) -> f64 {
        let mut lambda = 1.0_f64;
        for i in 0..4 {
            if step[i] > 0.0 {
                lambda = lambda.min((self.hi[i] - q[i]) / step[i]);
            } else if step[i] < 0.0 {
                lambda = lambda.min((self.lo[i] - q[i]) / step[i]);
            }
        }
        lambda.max(0.0)
    }

    fn on_boundary(&self, q: &Vector4<f64>, tol: f64) -> [bool; 4] {
        let mut out = [false; 4];
        for i in 0..4 {
            out[i] = q[i] <= self.lo[i] + tol || q[i] >= self.hi[i] - tol;
        }
        out
    }
}

struct Solver<'a> {
    s1: &'a NurbsSurface,
    s2: &'a NurbsSurface,
    boxx: Box4,
    eps: f64,
    max_newton: usize,
}

impl Solver<'_> {
    fn eval(&self, q: &Vector4<f64>) -> (Point3<f64>, Vector3<f64>, Matrix3x4<f64>) {
        let (p1, s1u, s1v) = self.s1.eval_with_derivs(q[0], q[1]);
        let (p2, s2s, s2t) = self.s2.eval_with_derivs(q[2], q[3]);
        let f = p1 - p2;
        let jac = Matrix3x4::from_columns(&[s1u, s1v, -s2s, -s2t]);
        (p1, f, jac)
    }

    /// Newton with a pseudo-inverse step; `frozen` coordinates stay fixed.
    fn newton(&self, start: Vector4<f64>, frozen: [bool; 4]) -> Option<Vector4<f64>> {
        let mut q = start;
        self.boxx.clamp(&mut q);
        for _ in 0..self.max_newton {
            let (_, f, mut jac) = self.eval(&q);
            if f.norm() < self.eps {
                return Some(q);
            }
            for i in 0..4 {
                if frozen[i] {
                    jac.set_column(i, &Vector3::zeros());
                }
            }
            let svd = jac.svd(true, true);
            let sv_max = svd.singular_values.max();
            if sv_max <= 0.0 {
                return None;
            }
            let step = svd.solve(&f, sv_max * 1e-13).ok()?;
            let mut next = q - step;
            for i in 0..4 {
                if frozen[i] {
                    next[i] = q[i];
                }
            }
            self.boxx.clamp(&mut next);
            let moved = (next - q).norm();
            q = next;
            if moved < 1e-12 {
                let (_, f, _) = self.eval(&q);
                return (f.norm() < self.eps).then_some(q);
            }
        }
        let (_, f, _) = self.eval(&q);
        (f.norm() < self.eps).then_some(q)
    }

    fn world(&self, q: &Vector4<f64>) -> Point3<f64> {
        self.s1.eval_with_derivs(q[0], q[1]).0
    }
}

/// Null-space direction of a 3x4 Jacobian via signed 3x3 minors.
fn null_direction(jac: &Matrix3x4<f64>) -> Vector4<f64> {
    let c: Vec<Vector3<f64>> = (0..4).map(|i| jac.column(i).into_owned()).collect();
    let det3 =
        |a: &Vector3<f64>, b: &Vector3<f64>, d: &Vector3<f64>| a.dot(&b.cross(d));
    Vector4::new(
        det3(&c[1], &c[2], &c[3]),
        -det3(&c[0], &c[2], &c[3]),
        det3(&c[0], &c[1], &c[3]),
        -det3(&c[0], &c[1], &c[2]),
    )
}

/// All intersection branches between two surfaces as fitted 3D curves.
///
/// Returns an empty curve list when the surfaces do not meet.
pub fn intersect_surfaces(
    s1: &NurbsSurface,
    s2: &NurbsSurface,
    params: &IntersectParams,
) -> IntersectionOutcome {
    let scale = scene_scale(s1, s2);
    let eps = (params.residual_fraction * scale).clamp(1e-14, 1e-6);
    let boxx = effective_box(s1, s2, params.edge_margin, scale);
    let solver = Solver {
        s1,
        s2,
        boxx,
        eps,
        max_newton: params.max_newton,
    };

    // coarse sample grids
    let grid1 = sample_grid(s1, (boxx.lo[0], boxx.hi[0]), (boxx.lo[1], boxx.hi[1]), params);
    let grid2 = sample_grid(s2, (boxx.lo[2], boxx.hi[2]), (boxx.lo[3], boxx.hi[3]), params);
    let (nu, nv) = (params.grid_u.max(2), params.grid_v.max(2));
    let capture = grid_spacing(&grid1, nu, nv).max(grid_spacing(&grid2, nu, nv));

    // candidate seeds: each sample paired with its nearest counterpart on
    // the other surface, kept when within the capture radius
    let mut seeds: Vec<(f64, Vector4<f64>)> = Vec::new();
    let mut collect = |from: &[GridSample], to: &[GridSample], swap: bool| {
        for (pa, ua, va) in from {
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for (pb, ub, vb) in to {
                let d = (pa - pb).norm();
                if d < best.0 {
                    best = (d, *ub, *vb);
                }
            }
            if best.0 < capture {
                let q = if swap {
                    Vector4::new(best.1, best.2, *ua, *va)
                } else {
                    Vector4::new(*ua, *va, best.1, best.2)
                };
                seeds.push((best.0, q));
            }
        }
    };
    collect(&grid1, &grid2, false);
    collect(&grid2, &grid1, true);
    seeds.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| {
            (0..4)
                .map(|i| a.1[i].total_cmp(&b.1[i]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut traced: Vec<TracedBranch> = Vec::new();
    let mut diverged = 0usize;
    let dedup_radius = 0.5 * capture;
    for (_, seed) in &seeds {
        let anchor = solver.world(seed);
        if near_existing(&traced, &anchor, capture) {
            continue;
        }
        let Some(q0) = solver.newton(*seed, [false; 4]) else {
            diverged += 1;
            continue;
        };
        let x0 = solver.world(&q0);
        if near_existing(&traced, &x0, dedup_radius) {
            continue;
        }
        let branch = march(&solver, q0, params);
        if !branch.params.is_empty() {
            traced.push(branch);
        }
    }

    // densify each branch to the sag tolerance, then fit
    let sag_tol = (params.sag_fraction * scale).max(1e-14);
    let fit_tol = (params.fit_fraction * scale).max(1e-13);
    let mut dropped = 0usize;
    let mut pairs: Vec<(TracedBranch, ParamCurve3)> = Vec::new();
    for mut branch in traced {
        densify(&solver, &mut branch, sag_tol);
        if branch.points.len() < 4 {
            dropped += 1;
            continue;
        }
        match BSplineCurve3::fit_cubic_tol(&branch.points, fit_tol, params.max_fit_ctrl) {
            Ok(curve) => pairs.push((branch, ParamCurve3::new(curve))),
            Err(_) => dropped += 1,
        }
    }
    pairs.sort_by(|a, b| {
        let (pa, pb) = (a.0.params[0], b.0.params[0]);
        pa.iter()
            .zip(pb.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (traced, curves) = pairs.into_iter().unzip();
    IntersectionOutcome {
        curves,
        traced,
        diverged_seeds: diverged,
        dropped_branches: dropped,
    }
}

fn near_existing(traced: &[TracedBranch], x: &Point3<f64>, radius: f64) -> bool {
    traced
        .iter()
        .flat_map(|b| b.points.iter())
        .any(|p| (p - x).norm() < radius)
}

fn scene_scale(s1: &NurbsSurface, s2: &NurbsSurface) -> f64 {
    let (lo1, hi1) = s1.control_bounds();
    let (lo2, hi2) = s2.control_bounds();
    let lo = lo1.coords.inf(&lo2.coords);
    let hi = hi1.coords.sup(&hi2.coords);
    (hi - lo).norm().max(1e-9)
}

/// Shrinks each surface's parameter box away from degenerate edges (rows or
/// columns of coincident control points, e.g. the apex of a ruled fan).
fn effective_box(s1: &NurbsSurface, s2: &NurbsSurface, margin: f64, scale: f64) -> Box4 {
    let tol = 1e-9 * scale;
    let ((u1, v1), (u2, v2)) = (shrunk_domain(s1, margin, tol), shrunk_domain(s2, margin, tol));
    Box4 {
        lo: Vector4::new(u1.0, v1.0, u2.0, v2.0),
        hi: Vector4::new(u1.1, v1.1, u2.1, v2.1),
    }
}

fn shrunk_domain(s: &NurbsSurface, margin: f64, tol: f64) -> ((f64, f64), (f64, f64)) {
    let ((ul, uh), (vl, vh)) = s.domain();
    let net = s.control_net();
    let nu = net.len();
    let nv = net[0].len();
    let col_degen = |j: usize| {
        net.iter()
            .map(|row| (row[j] - net[0][j]).norm())
            .fold(0.0_f64, f64::max)
            < tol
    };
    let row_degen = |i: usize| {
        net[i]
            .iter()
            .map(|p| (p - net[i][0]).norm())
            .fold(0.0_f64, f64::max)
            < tol
    };
    let (du, dv) = (uh - ul, vh - vl);
    let u = (
        if row_degen(0) { ul + margin * du } else { ul },
        if row_degen(nu - 1) { uh - margin * du } else { uh },
    );
    let v = (
        if col_degen(0) { vl + margin * dv } else { vl },
        if col_degen(nv - 1) { vh - margin * dv } else { vh },
    );
    (u, v)
}

type GridSample = (Point3<f64>, f64, f64);

fn sample_grid(
    s: &NurbsSurface,
    urange: (f64, f64),
    vrange: (f64, f64),
    params: &IntersectParams,
) -> Vec<GridSample> {
    let (nu, nv) = (params.grid_u.max(2), params.grid_v.max(2));
    let mut out = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = urange.0 + (urange.1 - urange.0) * i as f64 / (nu - 1) as f64;
        for j in 0..nv {
            let v = vrange.0 + (vrange.1 - vrange.0) * j as f64 / (nv - 1) as f64;
            out.push((s.eval_with_derivs(u, v).0, u, v));
        }
    }
    out
}

/// Largest gap between grid-adjacent samples; the seed capture radius.
fn grid_spacing(grid: &[GridSample], nu: usize, nv: usize) -> f64 {
    let at = |i: usize, j: usize| grid[i * nv + j].0;
    let mut worst = 0.0_f64;
    for i in 0..nu {
        for j in 0..nv {
            if i + 1 < nu {
                worst = worst.max((at(i, j) - at(i + 1, j)).norm());
            }
            if j + 1 < nv {
                worst = worst.max((at(i, j) - at(i, j + 1)).norm());
            }
        }
    }
    worst
}

fn march(solver: &Solver, q0: Vector4<f64>, params: &IntersectParams) -> TracedBranch {
    let h0 = params.step_fraction * (solver.boxx.hi[0] - solver.boxx.lo[0]);
    let (fwd, closed) = trace_direction(solver, q0, None, h0);
    if closed {
        return finish_branch(solver, fwd, true);
    }
    let first_dir = (fwd.len() >= 2).then(|| (fwd[1] - fwd[0]).normalize());
    let (bwd, _) = trace_direction(solver, q0, first_dir.map(|d| -d), h0);
    let mut points: Vec<Vector4<f64>> = bwd.into_iter().skip(1).rev().collect();
    points.extend(fwd);
    finish_branch(solver, points, false)
}

fn finish_branch(solver: &Solver, params4: Vec<Vector4<f64>>, closed: bool) -> TracedBranch {
    let points = params4.iter().map(|q| solver.world(q)).collect();
    TracedBranch {
        points,
        params: params4.iter().map(|q| [q[0], q[1], q[2], q[3]]).collect(),
        closed,
    }
}

fn trace_direction(
    solver: &Solver,
    q0: Vector4<f64>,
    dir_hint: Option<Vector4<f64>>,
    h0: f64,
) -> (Vec<Vector4<f64>>, bool) {
    let boundary_tol = 1e-12;
    let mut points = vec![q0];
    let mut q = q0;
    let x0 = solver.world(&q0);
    let mut prev_dir = dir_hint;
    let mut h = h0;
    let mut last_world_step = 0.0_f64;
    for _ in 0..100_000 {
        let (_, _, jac) = solver.eval(&q);
        let mut dir = null_direction(&jac);
        if dir.norm() < 1e-18 {
            break;
        }
        dir.normalize_mut();
        if let Some(prev) = prev_dir {
            if dir.dot(&prev) < 0.0 {
                dir = -dir;
            }
        }
        let step = dir * h;
        let lambda = solver.boxx.max_fraction(&q, &step);
        if lambda < 1e-9 {
            break; // already pressed against the boundary
        }
        let hit_boundary = lambda < 1.0;
        let predictor = q + step * lambda.min(1.0);
        let frozen = if hit_boundary {
            solver.boxx.on_boundary(&predictor, boundary_tol)
        } else {
            [false; 4]
        };
        match solver.newton(predictor, frozen) {
            Some(next) if (next - predictor).norm() <= 3.0 * h + 1e-12 => {
                let world = solver.world(&next);
                last_world_step = (world - solver.world(&q)).norm();
                points.push(next);
                prev_dir = Some(dir);
                q = next;
                if hit_boundary {
                    break;
                }
                // loop closure once the trace returns to its start
                if points.len() > 8 && (world - x0).norm() < 0.9 * last_world_step {
                    return (points, true);
                }
                h = (h * 1.5).min(h0);
            }
            _ => {
                h *= 0.5;
                if h < h0 / 1024.0 {
                    break;
                }
            }
        }
    }
    (points, false)
}

/// Recursively inserts Newton-corrected midpoints until the polyline sags
/// less than `sag_tol` from the true intersection curve.
fn densify(solver: &Solver, branch: &mut TracedBranch, sag_tol: f64) {
    let mut qs: Vec<Vector4<f64>> = branch
        .params
        .iter()
        .map(|p| Vector4::new(p[0], p[1], p[2], p[3]))
        .collect();
    let mut out: Vec<Vector4<f64>> = Vec::with_capacity(qs.len() * 2);
    if qs.is_empty() {
        return;
    }
    out.push(qs[0]);
    for i in 1..qs.len() {
        let mut stack = vec![(qs[i - 1], qs[i], 0u32)];
        let mut segment: Vec<Vector4<f64>> = Vec::new();
        while let Some((a, b, depth)) = stack.pop() {
            let mid_guess = (a + b) * 0.5;
            let split = if depth < 8 && (b - a).norm() > 1e-6 {
                match solver.newton(mid_guess, [false; 4]) {
                    Some(m) => {
                        let sag = (solver.world(&m).coords
                            - (solver.world(&a).coords + solver.world(&b).coords) * 0.5)
                            .norm();
                        (sag > sag_tol).then_some(m)
                    }
                    None => None,
                }
            } else {
                None
            };
            match split {
                Some(m) => {
                    stack.push((m, b, depth + 1));
                    stack.push((a, m, depth + 1));
                }
                None => segment.push(b),
            }
        }
        out.extend(segment);
    }
    qs = out;
    branch.points = qs.iter().map(|q| solver.world(q)).collect();
    branch.params = qs.iter().map(|q| [q[0], q[1], q[2], q[3]]).collect();
}

/// Distance from `x` to the surface by coarse grid search plus local
/// Gauss-Newton refinement; serves as an oracle independent of the tracer.
pub fn surface_distance_brute_force(
    s: &NurbsSurface,
    x: &Point3<f64>,
    grid_u: usize,
    grid_v: usize,
) -> f64 {
    let ((ul, uh), (vl, vh)) = s.domain();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..grid_u {
        let u = ul + (uh - ul) * i as f64 / (grid_u - 1) as f64;
        for j in 0..grid_v {
            let v = vl + (vh - vl) * j as f64 / (grid_v - 1) as f64;
            let d = (s.eval_with_derivs(u, v).0 - x).norm();
            if d < best.0 {
                best = (d, u, v);
            }
        }
    }
    let (mut u, mut v) = (best.1, best.2);
    for _ in 0..40 {
        let (p, su, sv) = s.eval_with_derivs(u, v);
        let r = p - x;
        let g = nalgebra::Vector2::new(su.dot(&r), sv.dot(&r));
        let h = nalgebra::Matrix2::new(
            su.dot(&su),
            su.dot(&sv),
            su.dot(&sv),
            sv.dot(&sv),
        );
        let Some(step) = h.lu().solve(&g) else { break };
        let nu = (u - step[0]).clamp(ul, uh);
        let nv = (v - step[1]).clamp(vl, vh);
        if (nu - u).abs() + (nv - v).abs() < 1e-15 {
            break;
        }
        u = nu;
        v = nv;
    }
    (s.eval_with_derivs(u, v).0 - x).norm().min(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::knots::KnotVector;
    use crate::spline::surface::extrude_surface;
    use crate::spline::BSplineCurve;
    use nalgebra::Point3;

    fn planar_patch(corners: [Point3<f64>; 4]) -> NurbsSurface {
        // bilinear patch: u blends corners[0]->corners[1], v towards [2]->[3]
        let control = vec![
            vec![corners[0], corners[2]],
            vec![corners[1], corners[3]],
        ];
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        NurbsSurface::new(
            1,
            1,
            control,
            vec![vec![1.0, 1.0]; 2],
            kv.clone(),
            kv,
        )
        .unwrap()
    }

    #[test]
    fn plane_plane_intersection_is_straight_segment() {
        // patch in z=0 spanning x,y in [-1,1]; patch in x=0 spanning y,z
        let s1 = planar_patch([
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ]);
        let s2 = planar_patch([
            Point3::new(0.0, -1.0, -1.0),
            Point3::new(0.0, 1.0, -1.0),
            Point3::new(0.0, -1.0, 1.0),
            Point3::new(0.0, 1.0, 1.0),
        ]);
        let out = intersect_surfaces(&s1, &s2, &IntersectParams::default());
        assert_eq!(out.curves.len(), 1, "one branch expected");
        let branch = &out.traced[0];
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for p in &branch.points {
            assert!(p.x.abs() < 1e-7 && p.z.abs() < 1e-7, "off-line point {p:?}");
            min_y = min_y.min(p.y);
            max_y = max_y.max(p.y);
        }
        assert!(min_y < -0.95 && max_y > 0.95, "span [{min_y}, {max_y}]");
    }

    #[test]
    fn disjoint_patches_yield_empty() {
        let s1 = planar_patch([
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ]);
        let s2 = planar_patch([
            Point3::new(-1.0, -1.0, 5.0),
            Point3::new(1.0, -1.0, 5.0),
            Point3::new(-1.0, 1.0, 5.0),
            Point3::new(1.0, 1.0, 5.0),
        ]);
        let out = intersect_surfaces(&s1, &s2, &IntersectParams::default());
        assert!(out.curves.is_empty());
    }

    /// Forward-projection oracle: a known 3D curve projected into two ruled
    /// fans must come back as their intersection.
    #[test]
    fn extruded_fans_recover_generating_curve() {
        let truth_pts: Vec<Point3<f64>> = (0..60)
            .map(|i| {
                let t = i as f64 / 59.0;
                Point3::new(
                    30.0 * (t - 0.5),
                    12.0 * (2.2 * t).sin(),
                    8.0 * (1.7 * t + 0.4).cos(),
                )
            })
            .collect();
        let truth = BSplineCurve::fit_cubic(&truth_pts, 8).unwrap();

        // two sources and detector planes roughly orthogonal
        let src_a = Point3::new(0.0, 0.0, -700.0);
        let src_b = Point3::new(-606.2, 0.0, -350.0); // 60 degrees about y
        let fan = |source: Point3<f64>, plane_z: f64| {
            // project dense samples of the truth curve onto the plane
            // z = plane_z as seen from `source` (view A geometry), fit, extrude
            let samples: Vec<Point3<f64>> = (0..400)
                .map(|i| {
                    let t = i as f64 / 399.0;
                    let p = truth.eval(t);
                    let dir = p - source;
                    let lambda = (plane_z - source.z) / dir.z;
                    source + dir * lambda
                })
                .collect();
            let curve = BSplineCurve::fit_cubic_tol(&samples, 1e-6, 80).unwrap();
            extrude_surface(&curve, source).unwrap()
        };
        // view B: rotate the world instead of the detector, then rotate back
        let rot = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Vector3::y_axis(),
            60f64.to_radians(),
        );
        let fan_b = {
            let samples: Vec<Point3<f64>> = (0..400)
                .map(|i| {
                    let t = i as f64 / 399.0;
                    let p = rot.inverse() * truth.eval(t);
                    let dir = p - Point3::new(0.0, 0.0, -700.0);
                    let lambda = (300.0 - (-700.0)) / dir.z;
                    let hit = Point3::new(0.0, 0.0, -700.0) + dir * lambda;
                    rot * hit
                })
                .collect();
            let curve = BSplineCurve::fit_cubic_tol(&samples, 1e-6, 80).unwrap();
            extrude_surface(&curve, src_b).unwrap()
        };
        let fan_a = fan(src_a, 300.0);

        let out = intersect_surfaces(&fan_a, &fan_b, &IntersectParams::default());
        assert!(!out.curves.is_empty(), "no intersection found");
        // the longest branch must lie on the generating curve
        let branch = out
            .traced
            .iter()
            .max_by(|a, b| a.points.len().cmp(&b.points.len()))
            .unwrap();
        assert!(branch.points.len() > 50);
        let eps = 1e-10 * 1500.0;
        for (p, q) in branch.points.iter().zip(branch.params.iter()) {
            // residual on the surfaces
            let p1 = fan_a.eval_with_derivs(q[0], q[1]).0;
            let p2 = fan_b.eval_with_derivs(q[2], q[3]).0;
            assert!((p1 - p2).norm() < eps.max(1e-6));
            // distance to the generating curve
            let u = crate::spline::point_inversion(&truth, p);
            assert!(
                (truth.eval(u) - p).norm() < 1e-4,
                "traced point {p:?} off the curve"
            );
        }
    }

    #[test]
    fn brute_force_distance_agrees_on_surface_points() {
        let s1 = planar_patch([
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ]);
        let p = s1.eval(0.37, 0.81).unwrap();
        assert!(surface_distance_brute_force(&s1, &p, 32, 32) < 1e-10);
        let q = Point3::new(0.2, 0.3, 0.5);
        assert!((surface_distance_brute_force(&s1, &q, 32, 32) - 0.5).abs() < 1e-9);
    }
}
