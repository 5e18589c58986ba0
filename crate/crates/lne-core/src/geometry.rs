//! Ambient metrics and the coordinate transforms between the plane, the
//! sphere and the chart at the pole.
//!
//! Everything here is a pure function of coordinates; no state, no caching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inversion rejects inputs with |x| at or below this radius.
pub const ETA_SINGULAR: f64 = 1e-9;
/// `stereo_from_sphere` rejects points whose last coordinate is within this
/// distance of 1 (the projection center).
pub const ETA_POLE: f64 = 1e-9;
/// Unit vectors are renormalized on construction to this tolerance.
pub const UNIT_TOL: f64 = 1e-12;
/// Sphere-metric points must satisfy | |y| - 1 | below this bound.
pub const SPHERE_NORM_TOL: f64 = 1e-9;

/// A point of ℝ^q with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("point has non-finite coordinate".into()));
        }
        Ok(Point(coords))
    }

    /// Construction that panics on non-finite input; for literals in code.
    pub fn from_slice(coords: &[f64]) -> Self {
        Point::new(coords.to_vec()).expect("finite coordinates")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    /// Lexicographic comparison, total on finite coordinates.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// A direction on the unit sphere S^{q-1}; renormalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitDirection(Vec<f64>);

impl UnitDirection {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !n.is_finite() || n < UNIT_TOL {
            return Err(Error::Domain("cannot normalize a near-zero vector".into()));
        }
        Ok(UnitDirection(coords.iter().map(|c| c / n).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Unoriented angle to another direction, in [0, π].
    pub fn angle_to(&self, other: &UnitDirection) -> f64 {
        dot(&self.0, &other.0).clamp(-1.0, 1.0).acos()
    }
}

/// The three ambient metrics the analyses run under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientMetric {
    /// ℝ^q with the Euclidean distance.
    Euclidean(usize),
    /// Unit sphere S^q embedded in ℝ^{q+1}, chordal outer distance.
    Sphere(usize),
    /// ℝP² as antipodally identified unit vectors of ℝ³,
    /// d([u],[v]) = arccos(|⟨u,v⟩|).
    Projective2,
}

impl AmbientMetric {
    /// Dimension of the coordinate vectors this metric acts on.
    pub fn coord_dim(&self) -> usize {
        match self {
            AmbientMetric::Euclidean(q) => *q,
            AmbientMetric::Sphere(q) => q + 1,
            AmbientMetric::Projective2 => 3,
        }
    }
}

/// Distance between two points under the given ambient metric.
pub fn ambient_distance(m: AmbientMetric, a: &Point, b: &Point) -> Result<f64> {
    let d = m.coord_dim();
    if a.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
    }
    if b.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b.dim() });
    }
    match m {
        AmbientMetric::Euclidean(_) => Ok(dist(a.coords(), b.coords())),
        AmbientMetric::Sphere(_) => Ok(dist(a.coords(), b.coords())),
        AmbientMetric::Projective2 => {
            let na = a.norm();
            let nb = b.norm();
            if na < UNIT_TOL || nb < UNIT_TOL {
                return Err(Error::Domain("projective representative near zero".into()));
            }
            let c = (dot(a.coords(), b.coords()) / (na * nb)).abs().clamp(0.0, 1.0);
            Ok(c.acos())
        }
    }
}

/// Euclidean inversion x ↦ x/|x|², swapping the origin and infinity.
pub fn invert(x: &Point) -> Result<Point> {
    let n2 = dot(x.coords(), x.coords());
    if n2.sqrt() <= ETA_SINGULAR {
        return Err(Error::Domain(format!(
            "inversion undefined within {ETA_SINGULAR} of the origin"
        )));
    }
    Point::new(x.coords().iter().map(|c| c / n2).collect())
}

/// Inverse stereographic projection ℝ^q → S^q ⊂ ℝ^{q+1}:
/// x ↦ (2x/(1+R²), (R²−1)/(R²+1)) with R = |x|.
/// The origin goes to the south pole; the north pole is the missing point.
pub fn stereo_to_sphere(x: &Point) -> Point {
    let r2 = dot(x.coords(), x.coords());
    let denom = 1.0 + r2;
    let mut out: Vec<f64> = x.coords().iter().map(|c| 2.0 * c / denom).collect();
    out.push((r2 - 1.0) / denom);
    Point(out)
}

/// Inverse of `stereo_to_sphere`: y = (y', h) ↦ y'/(1−h).
pub fn stereo_from_sphere(y: &Point) -> Result<Point> {
    if y.dim() < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: y.dim() });
    }
    let n = y.norm();
    if (n - 1.0).abs() > SPHERE_NORM_TOL {
        return Err(Error::Domain(format!("input not on the unit sphere: |y| = {n}")));
    }
    let h = y[y.dim() - 1];
    if h >= 1.0 - ETA_POLE {
        return Err(Error::Domain("projection undefined at the north pole".into()));
    }
    Point::new(y.coords()[..y.dim() - 1].iter().map(|c| c / (1.0 - h)).collect())
}

/// North pole of S^q as a point of ℝ^{q+1}.
pub fn north_pole(q: usize) -> Point {
    let mut c = vec![0.0; q + 1];
    c[q] = 1.0;
    Point(c)
}

/// Chart of S^q near the north pole:
/// y ↦ (2y/(1+r²), (1−r²)/(1+r²)) with r = |y| ≤ 1/2.
///
/// Satisfies phi_chart(invert(x)) = stereo_to_sphere(x) away from the origin.
pub fn phi_chart(y: &Point) -> Result<Point> {
    let r2 = dot(y.coords(), y.coords());
    if r2.sqrt() > 0.5 {
        return Err(Error::Domain("chart defined only for |y| <= 1/2".into()));
    }
    let denom = 1.0 + r2;
    let mut out: Vec<f64> = y.coords().iter().map(|c| 2.0 * c / denom).collect();
    out.push((1.0 - r2) / denom);
    Ok(Point(out))
}

/// Chordal gap between points at radii `y` and `t` whose position vectors
/// subtend the unoriented angle 2θ:
/// e² = (y+t)² sin²θ + (y−t)² cos²θ.
pub fn cosine_gap(y: f64, t: f64, theta: f64) -> f64 {
    let s = theta.sin();
    let c = theta.cos();
    ((y + t) * (y + t) * s * s + (y - t) * (y - t) * c * c).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coords: &[f64]) -> Point {
        Point::from_slice(coords)
    }

    #[test]
    fn invert_fixes_unit_sphere() {
        let x = p(&[1.0, 0.0]);
        assert_eq!(invert(&x).unwrap(), x);
    }

    #[test]
    fn invert_scales_reciprocally() {
        let y = invert(&p(&[2.0, 0.0])).unwrap();
        assert_eq!(y.coords(), &[0.5, 0.0]);
    }

    #[test]
    fn invert_is_involution() {
        let x = p(&[0.3, -1.7, 2.4]);
        let back = invert(&invert(&x).unwrap()).unwrap();
        for (a, b) in back.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invert_rejects_origin() {
        assert!(matches!(invert(&p(&[0.0, 0.0])), Err(Error::Domain(_))));
        assert!(matches!(invert(&p(&[1e-10, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn stereo_origin_to_south_pole() {
        let y = stereo_to_sphere(&p(&[0.0, 0.0]));
        assert_eq!(y.coords(), &[0.0, 0.0, -1.0]);
    }

    #[test]
    fn stereo_unit_circle_to_equator() {
        let y = stereo_to_sphere(&p(&[1.0, 0.0]));
        assert!(dist(y.coords(), &[1.0, 0.0, 0.0]) < 1e-15);
    }

    #[test]
    fn stereo_three_four() {
        // R = 5: (2·3/26, 2·4/26, 24/26)
        let y = stereo_to_sphere(&p(&[3.0, 4.0]));
        let expect = [6.0 / 26.0, 8.0 / 26.0, 24.0 / 26.0];
        assert!(dist(y.coords(), &expect) < 1e-15);
        assert!((y.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stereo_inverse_basics() {
        let x = stereo_from_sphere(&p(&[0.0, 0.0, -1.0])).unwrap();
        assert_eq!(x.coords(), &[0.0, 0.0]);
        let x = stereo_from_sphere(&p(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(x.coords(), &[1.0, 0.0]);
        assert!(stereo_from_sphere(&p(&[0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn phi_chart_values() {
        let n = phi_chart(&p(&[0.0, 0.0])).unwrap();
        assert_eq!(n.coords(), &[0.0, 0.0, 1.0]);
        let y = phi_chart(&p(&[0.5, 0.0])).unwrap();
        assert!(dist(y.coords(), &[0.8, 0.0, 0.6]) < 1e-15);
        assert!(phi_chart(&p(&[0.6, 0.0])).is_err());
    }

    #[test]
    fn phi_after_inversion_matches_stereo() {
        let x = p(&[4.0, 0.0]);
        let lhs = phi_chart(&invert(&x).unwrap()).unwrap();
        let rhs = stereo_to_sphere(&x);
        assert!(dist(lhs.coords(), rhs.coords()) < 1e-12);
        assert!(dist(lhs.coords(), &[8.0 / 17.0, 0.0, 15.0 / 17.0]) < 1e-12);
    }

    #[test]
    fn ambient_distances() {
        let e = AmbientMetric::Euclidean(2);
        assert_eq!(ambient_distance(e, &p(&[0.0, 0.0]), &p(&[3.0, 4.0])).unwrap(), 5.0);

        let s = AmbientMetric::Sphere(2);
        let d = ambient_distance(s, &north_pole(2), &p(&[0.0, 0.0, -1.0])).unwrap();
        assert_eq!(d, 2.0);

        let pr = AmbientMetric::Projective2;
        let d = ambient_distance(pr, &p(&[1.0, 0.0, 0.0]), &p(&[-1.0, 0.0, 0.0])).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let e = AmbientMetric::Euclidean(2);
        assert!(matches!(
            ambient_distance(e, &p(&[0.0, 0.0, 0.0]), &p(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cosine_gap_values() {
        assert!((cosine_gap(1.0, 1.0, std::f64::consts::FRAC_PI_2) - 2.0).abs() < 1e-15);
        assert!((cosine_gap(1.0, 3.0, 0.0) - 2.0).abs() < 1e-15);
        let expect = (6.25f64 + 0.75).sqrt();
        assert!((cosine_gap(2.0, 3.0, std::f64::consts::PI / 6.0) - expect).abs() < 1e-12);
    }
}
