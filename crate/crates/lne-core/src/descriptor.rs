//! Finite descriptions of subsets of ℝ^q: parametrized arc networks,
//! implicit level sets in a box, and explicit point clouds.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{dist, norm, AmbientMetric, Point};

/// Junctions must lie on the closure of an incident arc within this distance.
pub const JUNCTION_TOL: f64 = 1e-8;

/// Parameter domain of an arc: a closed interval or a half line [a, ∞).
/// Endpoint values may be poles of the defining expressions; evaluation and
/// sampling stay in the interior in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcDomain {
    Bounded(f64, f64),
    HalfLine(f64),
}

impl ArcDomain {
    pub fn lo(&self) -> f64 {
        match self {
            ArcDomain::Bounded(a, _) => *a,
            ArcDomain::HalfLine(a) => *a,
        }
    }

    pub fn hi(&self) -> Option<f64> {
        match self {
            ArcDomain::Bounded(_, b) => Some(*b),
            ArcDomain::HalfLine(_) => None,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        match self {
            ArcDomain::Bounded(a, b) => t >= *a && t <= *b,
            ArcDomain::HalfLine(a) => t >= *a,
        }
    }
}

/// Which parameter end of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndSide {
    Lower,
    Upper,
}

/// A C¹ parametrized arc given by one coordinate expression per dimension.
#[derive(Debug, Clone)]
pub struct ParamArc {
    pub label: String,
    components: Vec<Expr>,
    pub domain: ArcDomain,
    /// Beyond this parameter the distance to any fixed anchor is monotone;
    /// used to bracket radius inversions on half-line arcs.
    pub t_mono: Option<f64>,
}

impl ParamArc {
    pub fn from_parts(
        label: &str,
        components: Vec<Expr>,
        domain: ArcDomain,
        t_mono: Option<f64>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("arc needs at least one coordinate".into()));
        }
        if let ArcDomain::Bounded(a, b) = domain {
            if !(a < b) {
                return Err(Error::Domain(format!("empty arc domain [{a}, {b}]")));
            }
        }
        Ok(ParamArc { label: label.to_string(), components, domain, t_mono })
    }

    pub fn from_exprs(
        label: &str,
        exprs: &[&str],
        domain: ArcDomain,
        t_mono: Option<f64>,
    ) -> Result<Self> {
        let components = exprs.iter().map(|e| Expr::parse(e)).collect::<Result<Vec<_>>>()?;
        ParamArc::from_parts(label, components, domain, t_mono)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval_vec(&self, t: f64) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(t)).collect()
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        Point::new(self.eval_vec(t)?)
    }

    /// Coordinates without finiteness checks; poles come out as ±∞/NaN.
    pub fn eval_unchecked(&self, t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_unchecked(t)).collect()
    }

    pub fn derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_with_derivative(t).map(|(_, d)| d)).collect()
    }

    /// |γ'(t)|, the quadrature integrand for arc length.
    pub fn speed(&self, t: f64) -> Result<f64> {
        Ok(norm(&self.derivative(t)?))
    }

    /// |γ(t) − anchor|, or None where the arc is not evaluable/finite.
    pub fn radius_from(&self, t: f64, anchor: &[f64]) -> Option<f64> {
        let mut acc = 0.0f64;
        for (c, a) in self.components.iter().zip(anchor.iter()) {
            let v = c.eval_unchecked(t);
            if v.is_nan() {
                return None;
            }
            if v.is_infinite() {
                return Some(f64::INFINITY);
            }
            acc += (v - a) * (v - a);
        }
        Some(acc.sqrt())
    }

    /// Deterministic parameter scan of the domain: uniform interior samples
    /// plus geometric refinement toward each endpoint (which may be a pole)
    /// and, for half lines, a geometric walk until `radius_from(anchor)`
    /// clears `r_cap` or stops growing.
    pub fn scan_params(&self, anchor: &[f64], r_cap: f64) -> Vec<f64> {
        const N_UNIFORM: usize = 2048;
        const N_GEO: usize = 52;
        let mut ts = Vec::with_capacity(N_UNIFORM + 3 * N_GEO);
        match self.domain {
            ArcDomain::Bounded(a, b) => {
                let span = b - a;
                for j in 1..=N_GEO {
                    ts.push(a + span * 0.5f64.powi(j as i32));
                    ts.push(b - span * 0.5f64.powi(j as i32));
                }
                for k in 0..=N_UNIFORM {
                    ts.push(a + span * k as f64 / N_UNIFORM as f64);
                }
            }
            ArcDomain::HalfLine(a) => {
                // find the cap: stop once the radius clears r_cap, or once it
                // has collapsed to nothing (asymptotic tails)
                let start = self.t_mono.unwrap_or(a).max(a);
                let mut step = 1.0f64.max((start - a).abs() * 0.5).max(1e-6);
                let mut t_cap = start;
                let mut vanished = 0usize;
                for _ in 0..420 {
                    let cand = t_cap + step;
                    let r = self.radius_from(cand, anchor);
                    t_cap = cand;
                    step *= 2.0;
                    if let Some(r) = r {
                        if r > r_cap {
                            break;
                        }
                        if r < 1e-16 {
                            vanished += 1;
                            if vanished >= 3 {
                                break;
                            }
                        } else {
                            vanished = 0;
                        }
                    }
                }
                let span = t_cap - a;
                for j in 1..=N_GEO {
                    ts.push(a + span * 0.5f64.powi(j as i32));
                }
                for k in 0..=N_UNIFORM {
                    ts.push(a + span * k as f64 / N_UNIFORM as f64);
                }
            }
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup();
        ts
    }

    /// Parameter intervals where |γ(t) − anchor| lies in [r_lo, r_hi],
    /// resolved by scanning and bisection to relative accuracy ~1e−12.
    pub fn radius_band_intervals(
        &self,
        anchor: &[f64],
        r_lo: f64,
        r_hi: f64,
    ) -> Vec<(f64, f64)> {
        debug_assert!(r_lo < r_hi);
        let ts = self.scan_params(anchor, r_hi * 4.0);
        #[derive(Clone, Copy, PartialEq)]
        enum Zone {
            Below,
            In,
            Above,
            Invalid,
        }
        let zone = |r: Option<f64>| match r {
            None => Zone::Invalid,
            Some(r) if r < r_lo => Zone::Below,
            Some(r) if r > r_hi => Zone::Above,
            Some(_) => Zone::In,
        };
        // bisect the boundary where `inside` flips between tl and tr
        let refine = |tl: f64, tr: f64, level: f64| -> f64 {
            let (mut lo, mut hi) = (tl, tr);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let r = self.radius_from(mid, anchor);
                let below_level = matches!(r, Some(v) if v <= level);
                // keep the bracket such that lo side matches tl's relation
                let tl_below = matches!(self.radius_from(tl, anchor), Some(v) if v <= level);
                if below_level == tl_below {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };

        let mut intervals: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<f64> = None;
        let mut prev: Option<(f64, Zone)> = None;
        for &t in &ts {
            let z = zone(self.radius_from(t, anchor));
            if let Some((pt, pz)) = prev {
                match (pz, z) {
                    (a, b) if a == b => {}
                    (Zone::In, Zone::Above) => {
                        let c = refine(pt, t, r_hi);
                        if let Some(s) = open.take() {
                            intervals.push((s, c));
                        }
                    }
                    (Zone::In, Zone::Below) => {
                        let c = refine(pt, t, r_lo);
                        if let Some(s) = open.take() {
                            intervals.push((s, c));
                        }
                    }
                    (Zone::Below, Zone::In) => open = Some(refine(pt, t, r_lo)),
                    (Zone::Above, Zone::In) => open = Some(refine(pt, t, r_hi)),
                    (Zone::Below, Zone::Above) | (Zone::Above, Zone::Below) => {
                        // crossed the whole band between scan points
                        let c1 = refine(pt, t, r_lo);
                        let c2 = refine(pt, t, r_hi);
                        intervals.push((c1.min(c2), c1.max(c2)));
                    }
                    (Zone::Invalid, Zone::In) | (Zone::In, Zone::Invalid) => {
                        // treat invalid region as outside
                        if z == Zone::In {
                            open = Some(t);
                        } else if let Some(s) = open.take() {
                            intervals.push((s, pt));
                        }
                    }
                    _ => {}
                }
            } else if z == Zone::In {
                open = Some(t);
            }
            prev = Some((t, z));
        }
        if let (Some(s), Some((pt, _))) = (open, prev) {
            intervals.push((s, pt));
        }
        intervals.retain(|(a, b)| b > a);
        intervals
    }

    /// Ends along which |γ| grows past `beyond_r`.
    pub fn unbounded_ends(&self, beyond_r: f64) -> Vec<EndSide> {
        let origin = vec![0.0; self.dim()];
        let mut out = Vec::new();
        match self.domain {
            ArcDomain::HalfLine(a) => {
                // lower end may be a pole of the expressions
                if self.end_radius_exceeds(EndSide::Lower, &origin, beyond_r) {
                    out.push(EndSide::Lower);
                }
                let start = self.t_mono.unwrap_or(a).max(a);
                let mut t = start.max(a + 1e-9);
                let mut step = 1.0f64.max(t.abs() * 0.5);
                for _ in 0..420 {
                    t += step;
                    step *= 2.0;
                    if let Some(r) = self.radius_from(t, &origin) {
                        if r > beyond_r {
                            out.push(EndSide::Upper);
                            break;
                        }
                    }
                }
            }
            ArcDomain::Bounded(..) => {
                for side in [EndSide::Lower, EndSide::Upper] {
                    if self.end_radius_exceeds(side, &origin, beyond_r) {
                        out.push(side);
                    }
                }
            }
        }
        out
    }

    /// Does |γ − anchor| exceed `bound` when approaching the given finite end?
    fn end_radius_exceeds(&self, side: EndSide, anchor: &[f64], bound: f64) -> bool {
        let (t_end, dir_span) = match (self.domain, side) {
            (ArcDomain::Bounded(a, b), EndSide::Lower) => (a, b - a),
            (ArcDomain::Bounded(a, b), EndSide::Upper) => (b, -(b - a)),
            (ArcDomain::HalfLine(a), EndSide::Lower) => (a, 1.0),
            (ArcDomain::HalfLine(_), EndSide::Upper) => return false,
        };
        for j in 4..50 {
            let t = t_end + dir_span * 0.5f64.powi(j);
            if let Some(r) = self.radius_from(t, anchor) {
                if r > bound {
                    return true;
                }
            }
        }
        false
    }

    /// Ends along which |γ − anchor| tends to 0 (accumulation at `anchor`).
    pub fn vanishing_ends(&self, anchor: &[f64], below_r: f64) -> Vec<EndSide> {
        let mut out = Vec::new();
        match self.domain {
            ArcDomain::Bounded(a, b) => {
                for (side, t_end, span) in
                    [(EndSide::Lower, a, b - a), (EndSide::Upper, b, -(b - a))]
                {
                    // skip ends that sit exactly at the anchor (junction-style)
                    if let Some(r) = self.radius_from(t_end, anchor) {
                        if r <= JUNCTION_TOL {
                            continue;
                        }
                    }
                    let mut shrinking = false;
                    for j in 8..48 {
                        let t = t_end + span * 0.5f64.powi(j);
                        if let Some(r) = self.radius_from(t, anchor) {
                            if r < below_r {
                                shrinking = true;
                                break;
                            }
                        }
                    }
                    if shrinking {
                        out.push(side);
                    }
                }
            }
            ArcDomain::HalfLine(a) => {
                let mut t = self.t_mono.unwrap_or(a).max(a) + 1.0;
                let mut step = 1.0;
                for _ in 0..200 {
                    t += step;
                    step *= 2.0;
                    if let Some(r) = self.radius_from(t, anchor) {
                        if r < below_r {
                            out.push(EndSide::Upper);
                            break;
                        }
                        if r > 1.0 / below_r.max(1e-300) {
                            break;
                        }
                    }
                }
            }
        }
        out
    }

    /// Interior parameters where |γ| blows up past `beyond_r` between finite
    /// stretches (poles of the expressions inside the domain, e.g. images of
    /// origin passages under inversion). Domain-end blowups are excluded;
    /// those are reported by `unbounded_ends`.
    pub fn interior_poles(&self, beyond_r: f64) -> Vec<f64> {
        let origin = vec![0.0; self.dim()];
        let ts = self.scan_params(&origin, beyond_r * 4.0);
        if ts.len() < 3 {
            return Vec::new();
        }
        let huge = |t: f64| match self.radius_from(t, &origin) {
            Some(r) => r > beyond_r,
            None => true,
        };
        // maximal runs of huge/invalid params with finite neighbors on both sides
        let flags: Vec<bool> = ts.iter().map(|&t| huge(t)).collect();
        let mut poles = Vec::new();
        let mut run_start: Option<usize> = None;
        for i in 0..ts.len() {
            match (flags[i], run_start) {
                (true, None) => run_start = Some(i),
                (false, Some(s)) => {
                    if s > 0 {
                        // golden-section maximum of the radius over the bracket,
                        // minimizing 1/r (0 at the pole, NaN treated as best)
                        let inv_r = |t: f64| match self.radius_from(t, &origin) {
                            Some(r) if r.is_finite() => 1.0 / r.max(1e-300),
                            _ => 0.0,
                        };
                        let (mut lo, mut hi) = (ts[s - 1], ts[i]);
                        for _ in 0..160 {
                            let m1 = lo + (hi - lo) * 0.381966;
                            let m2 = hi - (hi - lo) * 0.381966;
                            if inv_r(m1) < inv_r(m2) {
                                hi = m2;
                            } else {
                                lo = m1;
                            }
                        }
                        poles.push(0.5 * (lo + hi));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        poles
    }

    /// Parameter of the (earliest) minimum of |γ − anchor| on the scan grid,
    /// golden-refined. Germ sides at infinity depart from here: the tail
    /// beyond the closest approach is the outgoing part of the arc.
    pub fn radius_argmin(&self, anchor: &[f64], r_cap: f64) -> f64 {
        let ts = self.scan_params(anchor, r_cap);
        let r_at = |t: f64| self.radius_from(t, anchor).unwrap_or(f64::INFINITY);
        let mut best = (f64::INFINITY, ts[0]);
        for &t in &ts {
            let r = r_at(t);
            if r < best.0 {
                best = (r, t);
            }
        }
        let i = ts.iter().position(|&t| t == best.1).unwrap_or(0);
        let (lo0, hi0) = (
            if i > 0 { ts[i - 1] } else { ts[i] },
            if i + 1 < ts.len() { ts[i + 1] } else { ts[i] },
        );
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..120 {
            let m1 = lo + (hi - lo) * 0.381966;
            let m2 = hi - (hi - lo) * 0.381966;
            if r_at(m1) < r_at(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    }

    /// Parameters in the domain where the arc meets `x0` (within `tol`),
    /// found by scanning and golden-section refinement.
    pub fn attachments(&self, x0: &[f64], tol: f64) -> Vec<f64> {
        let ts = self.scan_params(x0, 16.0 * (norm(x0) + 1.0));
        let mut hits: Vec<f64> = Vec::new();
        let r_at = |t: f64| self.radius_from(t, x0).unwrap_or(f64::INFINITY);
        // endpoints first
        match self.domain {
            ArcDomain::Bounded(a, b) => {
                for t in [a, b] {
                    if r_at(t) <= tol {
                        hits.push(t);
                    }
                }
            }
            ArcDomain::HalfLine(a) => {
                if r_at(a) <= tol {
                    hits.push(a);
                }
            }
        }
        // interior local minima that are genuine transversal passages:
        // the radius must rise clear of the tolerance on both sides
        // (asymptotic tails are limits, not passages)
        for w in ts.windows(3) {
            let (r0, r1, r2) = (r_at(w[0]), r_at(w[1]), r_at(w[2]));
            if r1 <= r0 && r1 <= r2 && r1 < 1.0 {
                let (mut lo, mut hi) = (w[0], w[2]);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) * 0.381966;
                    let m2 = hi - (hi - lo) * 0.381966;
                    if r_at(m1) < r_at(m2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                    if hi - lo < 1e-14 * (1.0 + lo.abs()) {
                        break;
                    }
                }
                let t = 0.5 * (lo + hi);
                if r_at(t) <= tol {
                    let probe = (w[2] - w[0]).max(1e-6 * (1.0 + t.abs()));
                    let rises_left = !self.domain.contains(t - probe) || r_at(t - probe) > 10.0 * tol;
                    let rises_right =
                        !self.domain.contains(t + probe) || r_at(t + probe) > 10.0 * tol;
                    if rises_left && rises_right {
                        hits.push(t);
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hits.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (1.0 + b.abs()));
        hits
    }

    /// The arc with every coordinate shifted by −x0.
    pub fn translated(&self, x0: &[f64]) -> ParamArc {
        let components = self
            .components
            .iter()
            .zip(x0.iter())
            .map(|(c, off)| c.sub(&Expr::constant(*off)))
            .collect();
        ParamArc {
            label: self.label.clone(),
            components,
            domain: self.domain,
            t_mono: self.t_mono,
        }
    }

    /// The image of the arc under Euclidean inversion x ↦ x/|x|².
    pub fn inverted(&self) -> ParamArc {
        let mut n2 = Expr::constant(0.0);
        for c in &self.components {
            n2 = n2.add(&c.mul(c));
        }
        let components = self.components.iter().map(|c| c.div(&n2)).collect();
        ParamArc {
            label: format!("inv_{}", self.label),
            components,
            domain: self.domain,
            t_mono: None,
        }
    }

    /// The arc scaled by a positive factor.
    pub fn scaled(&self, factor: f64) -> ParamArc {
        let f = Expr::constant(factor);
        let components = self.components.iter().map(|c| c.mul(&f)).collect();
        ParamArc {
            label: self.label.clone(),
            components,
            domain: self.domain,
            t_mono: self.t_mono,
        }
    }
}

/// One polynomial ℝ^q → ℝ as a coefficient list: Σ coeff · Π x_i^{e_i}.
#[derive(Debug, Clone)]
pub struct Poly {
    pub terms: Vec<(f64, Vec<u32>)>,
    pub dim: usize,
}

impl Poly {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (_, exps) in &terms {
            if exps.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: exps.len() });
            }
        }
        Ok(Poly { terms, dim })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, exps)| {
                c * exps.iter().zip(x.iter()).map(|(e, v)| v.powi(*e as i32)).product::<f64>()
            })
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, exps) in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                if exps[k] == 0 {
                    continue;
                }
                let mut term = c * exps[k] as f64;
                for (i, (e, v)) in exps.iter().zip(x.iter()).enumerate() {
                    let p = if i == k { *e as i32 - 1 } else { *e as i32 };
                    term *= v.powi(p);
                }
                *gk += term;
            }
        }
        g
    }
}

/// A finitely described subset of ℝ^q.
#[derive(Debug, Clone)]
pub enum SetDescriptor {
    /// A network of parametrized arcs with declared junction points.
    ArcNetwork { arcs: Vec<ParamArc>, junctions: Vec<Point>, dim: usize },
    /// Zero set of F: ℝ^q → ℝ^m inside the box [−B, B]^q.
    Implicit { polys: Vec<Poly>, dim: usize, box_bound: f64 },
    /// An explicit finite point list.
    Cloud { points: Vec<Point>, dim: usize, metric: AmbientMetric },
}

impl SetDescriptor {
    pub fn arc_network(arcs: Vec<ParamArc>, junctions: Vec<Point>) -> Result<SetDescriptor> {
        let dim = arcs.first().map(|a| a.dim()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Domain("arc network needs at least one arc".into()));
        }
        if arcs.iter().any(|a| a.dim() != dim) {
            return Err(Error::Domain("arcs of mixed dimension".into()));
        }
        for j in &junctions {
            if j.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: j.dim() });
            }
            let incident = arcs.iter().any(|a| !a.attachments(j.coords(), JUNCTION_TOL).is_empty());
            if !incident {
                return Err(Error::Domain(format!(
                    "junction {:?} lies on no declared arc (tolerance {JUNCTION_TOL})",
                    j.coords()
                )));
            }
        }
        Ok(SetDescriptor::ArcNetwork { arcs, junctions, dim })
    }

    pub fn implicit(polys: Vec<Poly>, box_bound: f64) -> Result<SetDescriptor> {
        let dim = polys.first().map(|p| p.dim).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Domain("implicit descriptor needs a polynomial".into()));
        }
        if !(box_bound > 0.0) {
            return Err(Error::Domain("implicit box bound must be positive".into()));
        }
        if polys.iter().any(|p| p.dim != dim) {
            return Err(Error::Domain("polynomials of mixed dimension".into()));
        }
        Ok(SetDescriptor::Implicit { polys, dim, box_bound })
    }

    pub fn cloud(points: Vec<Point>, metric: AmbientMetric) -> Result<SetDescriptor> {
        let dim = metric.coord_dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::Domain("cloud points of mixed dimension".into()));
        }
        Ok(SetDescriptor::Cloud { points, dim, metric })
    }

    pub fn dim(&self) -> usize {
        match self {
            SetDescriptor::ArcNetwork { dim, .. }
            | SetDescriptor::Implicit { dim, .. }
            | SetDescriptor::Cloud { dim, .. } => *dim,
        }
    }

    pub fn metric(&self) -> AmbientMetric {
        match self {
            SetDescriptor::Cloud { metric, .. } => *metric,
            other => AmbientMetric::Euclidean(other.dim()),
        }
    }

    pub fn arcs(&self) -> Option<&[ParamArc]> {
        match self {
            SetDescriptor::ArcNetwork { arcs, .. } => Some(arcs),
            _ => None,
        }
    }

    pub fn junctions(&self) -> &[Point] {
        match self {
            SetDescriptor::ArcNetwork { junctions, .. } => junctions,
            _ => &[],
        }
    }

    /// Membership residual of a point: 0 for arcs/clouds (sampled directly),
    /// |F| scaled by the local gradient for implicit sets.
    pub fn membership_residual(&self, x: &[f64]) -> f64 {
        match self {
            SetDescriptor::Implicit { polys, .. } => polys
                .iter()
                .map(|p| {
                    let g = norm(&p.gradient(x)).max(1e-12);
                    p.eval(x).abs() / g
                })
                .fold(0.0, f64::max),
            SetDescriptor::ArcNetwork { .. } | SetDescriptor::Cloud { .. } => 0.0,
        }
    }

    /// Image under Euclidean inversion; supported for arc networks and clouds.
    pub fn inverted(&self) -> Result<SetDescriptor> {
        match self {
            SetDescriptor::ArcNetwork { arcs, junctions, dim } => {
                let inv_arcs = arcs.iter().map(|a| a.inverted()).collect();
                let inv_junctions = junctions
                    .iter()
                    .filter(|j| j.norm() > crate::geometry::ETA_SINGULAR)
                    .map(crate::geometry::invert)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetDescriptor::ArcNetwork {
                    arcs: inv_arcs,
                    junctions: inv_junctions,
                    dim: *dim,
                })
            }
            SetDescriptor::Cloud { points, dim, metric } => {
                let inv = points
                    .iter()
                    .filter(|p| p.norm() > crate::geometry::ETA_SINGULAR)
                    .map(crate::geometry::invert)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetDescriptor::Cloud { points: inv, dim: *dim, metric: *metric })
            }
            SetDescriptor::Implicit { .. } => Err(Error::Domain(
                "inversion of implicit descriptors is not supported; sample first".into(),
            )),
        }
    }

    /// The descriptor shifted by −x0 (so x0 becomes the origin).
    pub fn translated(&self, x0: &[f64]) -> Result<SetDescriptor> {
        match self {
            SetDescriptor::ArcNetwork { arcs, junctions, dim } => {
                let t_arcs = arcs.iter().map(|a| a.translated(x0)).collect();
                let t_junctions = junctions
                    .iter()
                    .map(|j| Point::new(dist_vec(j.coords(), x0)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetDescriptor::ArcNetwork { arcs: t_arcs, junctions: t_junctions, dim: *dim })
            }
            SetDescriptor::Cloud { points, dim, metric } => {
                let t_points = points
                    .iter()
                    .map(|p| Point::new(dist_vec(p.coords(), x0)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetDescriptor::Cloud { points: t_points, dim: *dim, metric: *metric })
            }
            SetDescriptor::Implicit { .. } => Err(Error::Domain(
                "translation of implicit descriptors is not supported; use an arc form".into(),
            )),
        }
    }

    /// All (arc index, end) pairs escaping past `beyond_r`.
    pub fn unbounded_ends(&self, beyond_r: f64) -> Vec<(usize, EndSide)> {
        match self {
            SetDescriptor::ArcNetwork { arcs, .. } => arcs
                .iter()
                .enumerate()
                .flat_map(|(i, a)| {
                    a.unbounded_ends(beyond_r).into_iter().map(move |s| (i, s))
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Whether the set escapes past `beyond_r` along any arc end or interior
    /// pole.
    pub fn is_unbounded(&self, beyond_r: f64) -> bool {
        if !self.unbounded_ends(beyond_r).is_empty() {
            return true;
        }
        match self {
            SetDescriptor::ArcNetwork { arcs, .. } => {
                arcs.iter().any(|a| !a.interior_poles(beyond_r).is_empty())
            }
            SetDescriptor::Cloud { points, .. } => {
                points.iter().any(|p| p.norm() > beyond_r)
            }
            SetDescriptor::Implicit { .. } => false,
        }
    }
}

fn dist_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// Convenience check used by tests: nearest distance from `x` to the points
/// of another slice of points.
pub fn min_dist_to(points: &[Point], x: &[f64]) -> f64 {
    points.iter().map(|p| dist(p.coords(), x)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola() -> SetDescriptor {
        let right = ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
            .unwrap();
        let left = ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
            .unwrap();
        SetDescriptor::arc_network(vec![right, left], vec![Point::from_slice(&[0.0, 0.0])]).unwrap()
    }

    #[test]
    fn junction_must_lie_on_an_arc() {
        let right =
            ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let bad = SetDescriptor::arc_network(vec![right], vec![Point::from_slice(&[5.0, 5.0])]);
        assert!(bad.is_err());
    }

    #[test]
    fn radius_band_on_parabola_branch() {
        let d = parabola();
        let arcs = d.arcs().unwrap();
        let iv = arcs[0].radius_band_intervals(&[0.0, 0.0], 10.0, 20.0);
        assert_eq!(iv.len(), 1);
        let (t0, t1) = iv[0];
        // |(t, t²)| = t√(1+t²)
        let r0 = t0 * (1.0 + t0 * t0).sqrt();
        let r1 = t1 * (1.0 + t1 * t1).sqrt();
        assert!((r0 - 10.0).abs() < 1e-6, "r0 = {r0}");
        assert!((r1 - 20.0).abs() < 1e-6, "r1 = {r1}");
    }

    #[test]
    fn band_intervals_on_pole_arc() {
        // graph of 1/(1−t²) on (−1, 1): radius blows up at both ends
        let arc = ParamArc::from_exprs("g0", &["t", "1/((1-t)*(1+t))"], ArcDomain::Bounded(-1.0, 1.0), None)
            .unwrap();
        let iv = arc.radius_band_intervals(&[0.0, 0.0], 50.0, 100.0);
        assert_eq!(iv.len(), 2, "two vertical strands, got {iv:?}");
    }

    #[test]
    fn unbounded_end_detection() {
        let d = parabola();
        let ends = d.unbounded_ends(1e6);
        assert_eq!(ends.len(), 2);
        let arc = ParamArc::from_exprs("g0", &["t", "1/((1-t)*(1+t))"], ArcDomain::Bounded(-1.0, 1.0), None)
            .unwrap();
        assert_eq!(arc.unbounded_ends(1e6).len(), 2);
        let seg =
            ParamArc::from_exprs("seg", &["t", "0"], ArcDomain::Bounded(0.0, 1.0), None).unwrap();
        assert!(seg.unbounded_ends(1e6).is_empty());
    }

    #[test]
    fn attachment_detection() {
        // circle through the origin, centered at (1, 0)
        let arc = ParamArc::from_exprs(
            "c",
            &["1-cos(t)", "sin(t)"],
            ArcDomain::Bounded(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
            None,
        )
        .unwrap();
        let hits = arc.attachments(&[0.0, 0.0], 1e-8);
        assert_eq!(hits.len(), 1);
        assert!(hits[0].abs() < 1e-9);
    }

    #[test]
    fn vanishing_end_detection() {
        let arc = ParamArc::from_exprs(
            "in_spiral",
            &["exp(-t)*cos(2*pi*t)", "exp(-t)*sin(2*pi*t)"],
            ArcDomain::HalfLine(0.0),
            None,
        )
        .unwrap();
        let v = arc.vanishing_ends(&[0.0, 0.0], 1e-6);
        assert_eq!(v, vec![EndSide::Upper]);
    }

    #[test]
    fn inverted_arc_is_pointwise_inversion() {
        let arc =
            ParamArc::from_exprs("a", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0)).unwrap();
        let inv = arc.inverted();
        let t = 2.0;
        let p = arc.eval_vec(t).unwrap();
        let n2 = p[0] * p[0] + p[1] * p[1];
        let q = inv.eval_vec(t).unwrap();
        assert!((q[0] - p[0] / n2).abs() < 1e-14);
        assert!((q[1] - p[1] / n2).abs() < 1e-14);
    }

    #[test]
    fn poly_eval_and_gradient() {
        // x² + y² − 1
        let p = Poly::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 2]), (-1.0, vec![0, 0])])
            .unwrap();
        assert!((p.eval(&[1.0, 0.0])).abs() < 1e-15);
        assert!((p.eval(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        let g = p.gradient(&[0.3, -0.7]);
        assert!((g[0] - 0.6).abs() < 1e-15);
        assert!((g[1] + 1.4).abs() < 1e-15);
    }
}
