//! Clamped knot vectors and B-spline basis evaluation.

use super::SplineError;

/// Nondecreasing knot sequence in clamped form: the first and last knot
/// each repeat `degree + 1` times, and `len == control_count + degree + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if knots.len() < 2 * (degree + 1) {
            return Err(SplineError::InvalidKnots(format!(
                "need at least {} knots for degree {}, got {}",
                2 * (degree + 1),
                degree,
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(SplineError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(SplineError::InvalidKnots("knots must be nondecreasing".into()));
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if knots[..=degree].iter().any(|&k| k != first)
            || knots[knots.len() - degree - 1..].iter().any(|&k| k != last)
        {
            return Err(SplineError::InvalidKnots(
                "end knots must repeat degree + 1 times (clamped form)".into(),
            ));
        }
        if first == last {
            return Err(SplineError::InvalidKnots("empty domain".into()));
        }
        Ok(Self { degree, knots })
    }

    /// Uniform clamped knots on [0, 1] for `n_ctrl` control points.
    pub fn clamped_uniform(degree: usize, n_ctrl: usize) -> Self {
        assert!(n_ctrl > degree, "need more control points than the degree");
        let interior = n_ctrl - degree - 1;
        let mut knots = vec![0.0; degree + 1];
        for i in 1..=interior {
            knots.push(i as f64 / (interior + 1) as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self { degree, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions (equals the control-point count).
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Parameter domain `(first, last)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn clamp_to_domain(&self, u: f64) -> f64 {
        let (lo, hi) = self.domain();
        u.clamp(lo, hi)
    }

    /// Index of the knot span containing `u`: largest `i` with
    /// `knots[i] <= u < knots[i+1]`, with the final span treated as closed.
    pub fn find_span(&self, u: f64) -> usize {
        let n = self.basis_count() - 1;
        let p = self.degree;
        if u >= self.knots[n + 1] {
            return n;
        }
        if u <= self.knots[p] {
            return p;
        }
        let mut lo = p;
        let mut hi = n + 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// The `degree + 1` nonvanishing basis values `N_{span-p..=span, p}(u)`.
    pub fn basis_funs(&self, span: usize, u: f64) -> Vec<f64> {
        let p = self.degree;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        values
    }

    /// Basis values and derivatives up to order `n_ders` at `u`:
    /// `ders[k][j]` holds the k-th derivative of `N_{span-p+j, p}`.
    pub fn basis_ders(&self, span: usize, u: f64, n_ders: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let n_ders = n_ders.min(p);
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; n_ders + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0][0] = 1.0;
            for k in 1..=n_ders {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize {
                    k - 1
                } else {
                    p - r
                };
                for j in j1..=j2 {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=n_ders {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }
}

/// Single basis function `N_{i,p}(u)` by the Cox-de Boor recursion.
///
/// The final nonempty span is treated as closed so that the basis sums to
/// one over the whole closed domain.
pub fn basis(i: usize, p: usize, u: f64, knots: &KnotVector) -> Result<f64, SplineError> {
    let count = knots.values().len() - p - 1;
    if i >= count {
        return Err(SplineError::IndexOutOfRange { index: i, count });
    }
    Ok(cox_de_boor(i, p, u, knots.values(), knots.domain().1))
}

fn cox_de_boor(i: usize, p: usize, u: f64, knots: &[f64], u_max: f64) -> f64 {
    if p == 0 {
        let closes_domain = u == u_max && knots[i] < knots[i + 1] && knots[i + 1] == u_max;
        return if (knots[i] <= u && u < knots[i + 1]) || closes_domain {
            1.0
        } else {
            0.0
        };
    }
    let mut value = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        value += (u - knots[i]) / d1 * cox_de_boor(i, p - 1, u, knots, u_max);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        value += (knots[i + p + 1] - u) / d2 * cox_de_boor(i + 1, p - 1, u, knots, u_max);
    }
    value
}
