//! Germ sides: the one-dimensional pieces of an arc network near a point
//! or near infinity, with exact along-curve lengths for band ladders.

use crate::descriptor::{ArcDomain, EndSide, ParamArc, SetDescriptor};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad;

/// How parameters approach the locus of interest along a side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    /// t → +∞ from `from`.
    ToInfinity { from: f64 },
    /// t → `limit` (finite, possibly a pole of the expressions) from `from`.
    ToFinite { limit: f64, from: f64 },
}

/// One germ component of an arc network at a point or at infinity:
/// a single arc side along which the radius tends to ∞ (at-infinity germs)
/// or to 0 (at-point germs, radius measured from the anchor).
#[derive(Debug, Clone)]
pub struct GermSide {
    pub arc_index: usize,
    pub label: String,
    pub approach: Approach,
}

/// Points of one germ side with radius (from the anchor) inside a band,
/// together with exact cumulative arc length along the side's window.
#[derive(Debug, Clone)]
pub struct BandTrace {
    pub side_label: String,
    pub params: Vec<f64>,
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    /// Cumulative arc length along the sampled window (same indexing).
    pub cum_len: Vec<f64>,
    /// Indices whose radius lies inside the band.
    pub in_band: Vec<usize>,
    /// Maximal runs of consecutive in-band indices (strands).
    pub strands: Vec<(usize, usize)>,
}

impl BandTrace {
    pub fn in_band_count(&self) -> usize {
        self.in_band.len()
    }
}

fn radius(arc: &ParamArc, anchor: &[f64], t: f64) -> f64 {
    arc.radius_from(t, anchor).unwrap_or(f64::NAN)
}

/// Walk along the side's approach until `pred(radius)` holds `persist`
/// consecutive times; returns the parameter bracket (previous, first-hit).
fn walk_until(
    arc: &ParamArc,
    anchor: &[f64],
    approach: Approach,
    pred: impl Fn(f64) -> bool,
    persist: usize,
) -> Option<(f64, f64)> {
    let mut hits = 0usize;
    let mut first_hit: Option<(f64, f64)> = None;
    let mut prev: Option<f64> = None;
    for k in 0..1200 {
        let t = match approach {
            Approach::ToInfinity { from } => {
                let base = from.abs().max(1e-3);
                from + base * (1.06f64.powi(k) - 1.0)
            }
            Approach::ToFinite { limit, from } => limit + (from - limit) * 0.985f64.powi(k),
        };
        let r = radius(arc, anchor, t);
        if r.is_nan() {
            prev = Some(t);
            continue;
        }
        if pred(r) {
            hits += 1;
            if first_hit.is_none() {
                first_hit = Some((prev.unwrap_or(t), t));
            }
            if hits >= persist {
                return first_hit;
            }
        } else {
            hits = 0;
            first_hit = None;
        }
        prev = Some(t);
    }
    first_hit
}

fn bisect_on(
    arc: &ParamArc,
    anchor: &[f64],
    level: f64,
    t_out: f64,
    t_in: f64,
) -> f64 {
    // t_out fails `r >= level`-style predicate, t_in satisfies it; generic
    // bisection on the predicate boundary
    let pred = |t: f64| {
        let r = radius(arc, anchor, t);
        !r.is_nan() && r >= level
    };
    let p_in = pred(t_in);
    let (mut lo, mut hi) = (t_out, t_in);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if pred(mid) == p_in {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Find the germ sides of an arc network at infinity: every arc end whose
/// radius escapes past `beyond_r`.
pub fn germ_sides_at_infinity(d: &SetDescriptor, beyond_r: f64) -> Result<Vec<GermSide>> {
    let arcs = d
        .arcs()
        .ok_or_else(|| Error::Domain("germ sides need an arc network".into()))?;
    let mut out = Vec::new();
    let origin_of = |arc: &ParamArc| vec![0.0; arc.dim()];
    for (i, arc) in arcs.iter().enumerate() {
        for side in arc.unbounded_ends(beyond_r) {
            let approach = match (arc.domain, side) {
                (ArcDomain::HalfLine(a), EndSide::Upper) => {
                    // depart beyond the closest approach to the origin, past
                    // any pole-side descent of the radius
                    let from = arc
                        .t_mono
                        .unwrap_or(a)
                        .max(a)
                        .max(arc.radius_argmin(&origin_of(arc), beyond_r));
                    Approach::ToInfinity { from }
                }
                (ArcDomain::HalfLine(a), EndSide::Lower) => {
                    Approach::ToFinite { limit: a, from: a + 1.0 }
                }
                (ArcDomain::Bounded(a, b), EndSide::Lower) => {
                    let from = arc.radius_argmin(&origin_of(arc), beyond_r).clamp(a, b);
                    Approach::ToFinite { limit: a, from }
                }
                (ArcDomain::Bounded(a, b), EndSide::Upper) => {
                    let from = arc.radius_argmin(&origin_of(arc), beyond_r).clamp(a, b);
                    Approach::ToFinite { limit: b, from }
                }
            };
            out.push(GermSide {
                arc_index: i,
                label: format!("{}[{:?}]", arc.label, side),
                approach,
            });
        }
        // interior poles (inverted origin passages) contribute a side each way
        for t_p in arc.interior_poles(beyond_r) {
            let (lo, hi) = (arc.domain.lo(), arc.domain.hi());
            let below = (t_p - lo).max(1e-9);
            out.push(GermSide {
                arc_index: i,
                label: format!("{}[pole-@{t_p:.6}]", arc.label),
                approach: Approach::ToFinite { limit: t_p, from: t_p - below * 0.5 },
            });
            let above = match hi {
                Some(b) => (b - t_p).max(1e-9) * 0.5,
                None => 1.0,
            };
            out.push(GermSide {
                arc_index: i,
                label: format!("{}[pole+@{t_p:.6}]", arc.label),
                approach: Approach::ToFinite { limit: t_p, from: t_p + above },
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Domain("descriptor has no unbounded ends".into()));
    }
    Ok(out)
}

/// Find the germ sides of an arc network at a point: arc passages through
/// the anchor (split into both sides), arc endpoints at the anchor, and
/// vanishing ends accumulating at the anchor.
pub fn germ_sides_at_point(d: &SetDescriptor, x0: &Point, below_r: f64) -> Result<Vec<GermSide>> {
    let arcs = d
        .arcs()
        .ok_or_else(|| Error::Domain("germ sides need an arc network".into()))?;
    let tol = crate::descriptor::JUNCTION_TOL;
    let mut out = Vec::new();
    for (i, arc) in arcs.iter().enumerate() {
        let (lo, hi) = (arc.domain.lo(), arc.domain.hi());
        for t_star in arc.attachments(x0.coords(), tol) {
            let at_lower = (t_star - lo).abs() <= tol * (1.0 + lo.abs());
            let at_upper = hi.map(|b| (t_star - b).abs() <= tol * (1.0 + b.abs())).unwrap_or(false);
            if !at_upper {
                // side departing toward larger parameters
                let reach = hi.unwrap_or(f64::INFINITY);
                let from = if reach.is_finite() { reach } else { t_star + 1.0 };
                out.push(GermSide {
                    arc_index: i,
                    label: format!("{}[+@{t_star:.6}]", arc.label),
                    approach: if reach.is_finite() {
                        Approach::ToFinite { limit: t_star, from }
                    } else {
                        // walk outward handled by band window below
                        Approach::ToFinite { limit: t_star, from: t_star + 1.0 }
                    },
                });
            }
            if !at_lower {
                out.push(GermSide {
                    arc_index: i,
                    label: format!("{}[-@{t_star:.6}]", arc.label),
                    approach: Approach::ToFinite { limit: t_star, from: lo.max(t_star - 1.0) },
                });
            }
        }
        for side in arc.vanishing_ends(x0.coords(), below_r) {
            let approach = match (arc.domain, side) {
                (ArcDomain::HalfLine(a), EndSide::Upper) => {
                    Approach::ToInfinity { from: arc.t_mono.unwrap_or(a).max(a) }
                }
                (ArcDomain::HalfLine(a), EndSide::Lower) => {
                    Approach::ToFinite { limit: a, from: a + 1.0 }
                }
                (ArcDomain::Bounded(a, b), EndSide::Lower) => {
                    Approach::ToFinite { limit: a, from: 0.5 * (a + b) }
                }
                (ArcDomain::Bounded(a, b), EndSide::Upper) => {
                    Approach::ToFinite { limit: b, from: 0.5 * (a + b) }
                }
            };
            out.push(GermSide {
                arc_index: i,
                label: format!("{}[lim {:?}]", arc.label, side),
                approach,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Domain(format!(
            "no arc of the descriptor meets or accumulates at {:?}",
            x0.coords()
        )));
    }
    Ok(out)
}

/// Sample one germ side inside the radial band [r_lo, r_hi] measured from
/// `anchor` (the origin for at-infinity germs). `n` points are placed
/// uniformly in parameter across the window bracketing the band; points
/// outside the band are kept in the trace (they carry arc length through
/// radius dips) but excluded from `in_band`.
pub fn band_trace(
    d: &SetDescriptor,
    side: &GermSide,
    anchor: &[f64],
    r_lo: f64,
    r_hi: f64,
    n: usize,
) -> Result<Option<BandTrace>> {
    let arcs = d.arcs().ok_or_else(|| Error::Domain("band trace needs arcs".into()))?;
    let arc = &arcs[side.arc_index];
    debug_assert!(r_lo < r_hi);

    // does radius grow or shrink along the approach?
    let probe = |k: i32| -> f64 {
        match side.approach {
            Approach::ToInfinity { from } => from + from.abs().max(1e-3) * (2f64.powi(k) - 1.0),
            Approach::ToFinite { limit, from } => limit + (from - limit) * 0.5f64.powi(k),
        }
    };
    let (mut r_early, mut r_late) = (f64::NAN, f64::NAN);
    for k in 1..60 {
        let r = radius(arc, anchor, probe(k));
        if !r.is_nan() && r.is_finite() {
            if r_early.is_nan() {
                r_early = r;
            }
            r_late = r;
        }
    }
    if r_early.is_nan() {
        return Ok(None);
    }
    let growing = r_late >= r_early;
    let (near_level, far_level) = if growing { (r_lo, r_hi) } else { (r_hi, r_lo) };

    // slide the start until it sits strictly before the band along the
    // approach, so the walk cannot begin inside or beyond it
    let outside = |r: f64| if growing { r < near_level } else { r > near_level };
    let approach = {
        let mut ap = side.approach;
        for _ in 0..200 {
            let from = match ap {
                Approach::ToInfinity { from } => from,
                Approach::ToFinite { from, .. } => from,
            };
            let r = radius(arc, anchor, from);
            if r.is_nan() || outside(r) {
                break;
            }
            ap = match ap {
                Approach::ToInfinity { from } => {
                    let base = arc.domain.lo();
                    let slid = base + (from - base) * 0.5;
                    if slid <= base + 1e-300 || slid == from {
                        break;
                    }
                    Approach::ToInfinity { from: slid }
                }
                Approach::ToFinite { limit, from } => {
                    let slid = limit + (from - limit) * 2.0;
                    let legal = match arc.domain.hi() {
                        Some(b) => slid >= arc.domain.lo() && slid <= b,
                        None => slid >= arc.domain.lo(),
                    };
                    if !legal || slid == from {
                        break;
                    }
                    Approach::ToFinite { limit, from: slid }
                }
            };
        }
        ap
    };

    // window: first crossing of the near level .. first sustained pass of far
    let near = walk_until(
        arc,
        anchor,
        approach,
        |r| if growing { r >= near_level } else { r <= near_level },
        1,
    );
    let far = walk_until(
        arc,
        anchor,
        approach,
        |r| if growing { r > far_level } else { r < far_level },
        6,
    );
    let (near_prev, near_hit) = match near {
        Some(b) => b,
        None => return Ok(None),
    };
    let t_near = if growing {
        bisect_on(arc, anchor, near_level, near_prev, near_hit)
    } else {
        // crossing of r <= r_hi going down
        bisect_on(arc, anchor, near_level, near_hit, near_prev)
    };
    let t_far = match far {
        Some((prev, hit)) => {
            if growing {
                bisect_on(arc, anchor, far_level, prev, hit)
            } else {
                bisect_on(arc, anchor, far_level, hit, prev)
            }
        }
        None => {
            // the side never clears the far level (bounded arc): cap at the
            // farthest reachable parameter
            match approach {
                Approach::ToInfinity { from } => from + from.abs().max(1e-3) * 1e9,
                Approach::ToFinite { limit, .. } => limit,
            }
        }
    };
    let (t0, t1) = (t_near.min(t_far), t_near.max(t_far));
    if !(t1 > t0) {
        return Ok(None);
    }

    // clamp inside the open domain
    let (lo, hi) = (arc.domain.lo(), arc.domain.hi());
    let span = t1 - t0;
    let t0 = t0.max(lo + span * 1e-12);
    let t1 = match hi {
        Some(b) => t1.min(b - span * 1e-12),
        None => t1,
    };
    if !(t1 > t0) {
        return Ok(None);
    }

    let n = n.max(8);
    let mut params: Vec<f64> = (0..n)
        .map(|k| t0 + (t1 - t0) * (k as f64 + 0.5) / n as f64)
        .collect();
    params.dedup();
    let mut points = Vec::with_capacity(params.len());
    let mut radii = Vec::with_capacity(params.len());
    let mut keep_params = Vec::with_capacity(params.len());
    for &t in &params {
        if let Ok(p) = arc.eval(t) {
            radii.push(crate::geometry::dist(p.coords(), anchor));
            points.push(p);
            keep_params.push(t);
        }
    }
    if points.len() < 2 {
        return Ok(None);
    }
    let cum_len = quad::cumulative_lengths(arc, &keep_params, 1e-10)?;
    let in_band: Vec<usize> = (0..points.len())
        .filter(|&i| radii[i] >= r_lo && radii[i] <= r_hi)
        .collect();
    if in_band.is_empty() {
        return Ok(None);
    }
    let mut strands = Vec::new();
    let mut run_start = in_band[0];
    let mut prev = in_band[0];
    for &i in &in_band[1..] {
        if i != prev + 1 {
            strands.push((run_start, prev));
            run_start = i;
        }
        prev = i;
    }
    strands.push((run_start, prev));
    Ok(Some(BandTrace {
        side_label: side.label.clone(),
        params: keep_params,
        points,
        radii,
        cum_len,
        in_band,
        strands,
    }))
}

/// Estimated arc length of the band window at a coarse resolution, used to
/// size the full trace.
pub fn band_length_estimate(
    d: &SetDescriptor,
    side: &GermSide,
    anchor: &[f64],
    r_lo: f64,
    r_hi: f64,
) -> Result<f64> {
    let coarse = band_trace(d, side, anchor, r_lo, r_hi, 512)?;
    Ok(match coarse {
        Some(tr) => {
            let mut chord = 0.0;
            for w in tr.points.windows(2) {
                chord += crate::geometry::dist(w[0].coords(), w[1].coords());
            }
            chord
        }
        None => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::ParamArc;

    fn network(arcs: Vec<ParamArc>, junctions: Vec<Point>) -> SetDescriptor {
        SetDescriptor::arc_network(arcs, junctions).unwrap()
    }

    #[test]
    fn parabola_sides_at_infinity() {
        let d = network(
            vec![
                ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                    .unwrap(),
                ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                    .unwrap(),
            ],
            vec![Point::from_slice(&[0.0, 0.0])],
        );
        let sides = germ_sides_at_infinity(&d, 1e5).unwrap();
        assert_eq!(sides.len(), 2);
        let tr = band_trace(&d, &sides[0], &[0.0, 0.0], 100.0, 200.0, 256)
            .unwrap()
            .expect("band populated");
        assert!(tr.in_band_count() > 100);
        for &i in &tr.in_band {
            assert!(tr.radii[i] >= 100.0 && tr.radii[i] <= 200.0);
        }
        // cumulative length consistent with the parabola closed form
        let t_first = tr.params[tr.in_band[0]];
        let t_last = tr.params[*tr.in_band.last().unwrap()];
        let closed = |t: f64| (t * (1.0 + 4.0 * t * t).sqrt()) / 2.0 + (2.0 * t).asinh() / 4.0;
        let expect = closed(t_last) - closed(t_first);
        let got = tr.cum_len[*tr.in_band.last().unwrap()] - tr.cum_len[tr.in_band[0]];
        assert!((got - expect).abs() < 1e-6 * expect, "got {got}, expect {expect}");
    }

    #[test]
    fn gamma_zero_has_two_pole_sides() {
        let d = network(
            vec![ParamArc::from_exprs(
                "g0",
                &["t", "1/((1-t)*(1+t))"],
                ArcDomain::Bounded(-1.0, 1.0),
                None,
            )
            .unwrap()],
            vec![],
        );
        let sides = germ_sides_at_infinity(&d, 1e5).unwrap();
        assert_eq!(sides.len(), 2);
        for side in &sides {
            let tr = band_trace(&d, side, &[0.0, 0.0], 50.0, 100.0, 256)
                .unwrap()
                .expect("band populated");
            assert!(tr.in_band_count() > 50);
        }
    }

    #[test]
    fn cusp_sides_at_origin() {
        let d = network(
            vec![
                ParamArc::from_exprs("up", &["t", "t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
                    .unwrap(),
                ParamArc::from_exprs("dn", &["t", "-t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
                    .unwrap(),
            ],
            vec![Point::from_slice(&[0.0, 0.0])],
        );
        let sides = germ_sides_at_point(&d, &Point::from_slice(&[0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(sides.len(), 2);
        let tr = band_trace(&d, &sides[0], &[0.0, 0.0], 1e-3, 2e-3, 128)
            .unwrap()
            .expect("band populated");
        assert!(tr.in_band_count() > 30);
    }

    #[test]
    fn interior_passage_gives_two_sides() {
        // circle through the origin
        let d = network(
            vec![ParamArc::from_exprs(
                "c",
                &["1-cos(t)", "sin(t)"],
                ArcDomain::Bounded(-1.5, 1.5),
                None,
            )
            .unwrap()],
            vec![],
        );
        let sides = germ_sides_at_point(&d, &Point::from_slice(&[0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(sides.len(), 2);
    }

    #[test]
    fn vanishing_tail_side() {
        let d = network(
            vec![ParamArc::from_exprs(
                "in_spiral",
                &["exp(-t)*cos(2*pi*t)", "exp(-t)*sin(2*pi*t)"],
                ArcDomain::HalfLine(0.0),
                None,
            )
            .unwrap()],
            vec![],
        );
        let sides = germ_sides_at_point(&d, &Point::from_slice(&[0.0, 0.0]), 1e-6).unwrap();
        assert_eq!(sides.len(), 1);
        let tr = band_trace(&d, &sides[0], &[0.0, 0.0], 1e-4, 2e-4, 512)
            .unwrap()
            .expect("band populated");
        // about log(2)/1 turns of spiral in a dyadic band
        assert!(tr.in_band_count() > 100);
    }
}
