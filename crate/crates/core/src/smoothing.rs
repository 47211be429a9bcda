//! Clamped B-spline smoothing of raw planner paths.
//!
//! The raw waypoints are used directly as control points of a clamped
//! uniform B-spline (cubic when there are at least four of them), which is
//! then sampled uniformly in its parameter. Because the knot vector is
//! clamped, the sampled curve starts and ends exactly at the path endpoints.

use crate::env::{CityMap, Point3};
use crate::error::{Error, Result};

pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_SAMPLES_PER_SPAN: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct BsplineCurve {
    control_points: Vec<Point3>,
    degree: usize,
    knots: Vec<f64>,
}

impl BsplineCurve {
    /// Clamped uniform curve on `[0, 1]`.
    pub fn clamped_uniform(control_points: Vec<Point3>, degree: usize) -> Result<Self> {
        let knots = clamped_uniform_knots(control_points.len(), degree)?;
        Ok(Self {
            control_points,
            degree,
            knots,
        })
    }

    pub fn with_knots(control_points: Vec<Point3>, degree: usize, knots: Vec<f64>) -> Result<Self> {
        if control_points.len() <= degree {
            return Err(Error::invalid("need more control points than the degree"));
        }
        if knots.len() != control_points.len() + degree + 1 {
            return Err(Error::invalid("knot count must be control points + degree + 1"));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid("knots must be non-decreasing"));
        }
        Ok(Self {
            control_points,
            degree,
            knots,
        })
    }

    pub fn control_points(&self) -> &[Point3] {
        &self.control_points
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Parameter domain `[knots[p], knots[n]]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.control_points.len()])
    }

    pub fn span_count(&self) -> usize {
        self.control_points.len() - self.degree
    }

    /// Curve point at `u` (clamped into the domain).
    pub fn eval(&self, u: f64) -> Point3 {
        let (lo, hi) = self.domain();
        let u = u.clamp(lo, hi);
        let span = find_span(self.degree, u, &self.knots, self.control_points.len());
        let mut acc = Point3::ZERO;
        for i in span - self.degree..=span {
            acc = acc + self.control_points[i] * basis(i, self.degree, u, &self.knots);
        }
        acc
    }

    /// `samples` points at uniformly spaced parameters, endpoints included.
    pub fn sample(&self, samples: usize) -> Vec<Point3> {
        let (lo, hi) = self.domain();
        match samples {
            0 => Vec::new(),
            1 => vec![self.eval(lo)],
            n => (0..n)
                .map(|j| {
                    let u = if j == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * j as f64 / (n - 1) as f64
                    };
                    self.eval(u)
                })
                .collect(),
        }
    }
}

fn clamped_uniform_knots(n_ctrl: usize, degree: usize) -> Result<Vec<f64>> {
    if n_ctrl <= degree {
        return Err(Error::invalid(format!(
            "{n_ctrl} control points cannot carry a degree-{degree} curve"
        )));
    }
    let spans = n_ctrl - degree;
    let mut knots = Vec::with_capacity(n_ctrl + degree + 1);
    knots.extend(std::iter::repeat_n(0.0, degree + 1));
    knots.extend((1..spans).map(|j| j as f64 / spans as f64));
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    Ok(knots)
}

/// Index `s` with `knots[s] <= u < knots[s + 1]`; at the right end of the
/// domain the last non-empty span.
fn find_span(degree: usize, u: f64, knots: &[f64], n_ctrl: usize) -> usize {
    if u >= knots[n_ctrl] {
        let mut s = n_ctrl - 1;
        while s > degree && knots[s] == knots[s + 1] {
            s -= 1;
        }
        return s;
    }
    let mut s = degree;
    while s + 1 < n_ctrl && knots[s + 1] <= u {
        s += 1;
    }
    s
}

/// Cox-de Boor basis function `N_{i,k}(u)`. `0/0` terms are taken as 0 and
/// the right end of the knot vector belongs to the last non-empty span.
pub fn basis(i: usize, k: usize, u: f64, knots: &[f64]) -> f64 {
    if k == 0 {
        let (a, b) = (knots[i], knots[i + 1]);
        if a <= u && u < b {
            return 1.0;
        }
        let last = *knots.last().expect("empty knot vector");
        // closed right end: u == last belongs to the final non-empty span
        if u == last && a < b && b == last {
            return 1.0;
        }
        return 0.0;
    }
    let mut val = 0.0;
    let d1 = knots[i + k] - knots[i];
    if d1 > 0.0 {
        val += (u - knots[i]) / d1 * basis(i, k - 1, u, knots);
    }
    let d2 = knots[i + k + 1] - knots[i + 1];
    if d2 > 0.0 {
        val += (knots[i + k + 1] - u) / d2 * basis(i + 1, k - 1, u, knots);
    }
    val
}

/// Smooths `path` with a clamped B-spline and resamples it.
///
/// Returns the raw path unchanged if any sampled segment would collide.
pub fn smooth_path(path: &[Point3], samples_per_span: usize, map: &CityMap) -> Result<Vec<Point3>> {
    if path.len() < 2 {
        return Err(Error::invalid("smoothing needs at least two waypoints"));
    }
    if samples_per_span == 0 {
        return Err(Error::invalid("samples_per_span must be at least 1"));
    }
    let degree = DEFAULT_DEGREE.min(path.len() - 1);
    let curve = BsplineCurve::clamped_uniform(path.to_vec(), degree)?;
    let smoothed = curve.sample(samples_per_span * curve.span_count() + 1);
    if map.path_free(&smoothed) {
        Ok(smoothed)
    } else {
        Ok(path.to_vec())
    }
}
