//! Sampling descriptors into point sets, radial slicing, component splits
//! and asymptotic direction sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::{ArcDomain, ParamArc, SetDescriptor};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{dist, norm, sub, AmbientMetric, Point, UnitDirection};
use crate::graph;

/// Membership tolerance for sampled points, scaled by the local gradient.
pub const TOL_MEMBER: f64 = 1e-7;
/// Minimum number of extreme-band points required to estimate directions.
pub const N_MIN_TAIL: usize = 32;
/// Default angular bin width for direction clustering: 2 degrees.
pub const DELTA_BIN_DEFAULT: f64 = 2.0 * std::f64::consts::PI / 180.0;

/// Where a sampled point came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Arc { label: String, param: f64 },
    Grid { cell: Vec<i64> },
    Cloud { index: usize },
    Adjoined { label: String },
}

/// A finite point set drawn from a descriptor with per-point provenance
/// and radial tags.
#[derive(Debug, Clone)]
pub struct Sample {
    pub points: Vec<Point>,
    pub provenance: Vec<Provenance>,
    pub radial: Vec<f64>,
    pub metric: AmbientMetric,
}

impl Sample {
    pub fn from_points(points: Vec<Point>, metric: AmbientMetric) -> Sample {
        let radial = points.iter().map(|p| p.norm()).collect();
        let provenance =
            (0..points.len()).map(|i| Provenance::Cloud { index: i }).collect();
        Sample { points, provenance, radial, metric }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point, prov: Provenance) {
        self.radial.push(p.norm());
        self.points.push(p);
        self.provenance.push(prov);
    }

    fn keep_indices(&self, idx: &[usize]) -> Sample {
        Sample {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            provenance: idx.iter().map(|&i| self.provenance[i].clone()).collect(),
            radial: idx.iter().map(|&i| self.radial[i]).collect(),
            metric: self.metric,
        }
    }

    /// All points scaled by a positive factor (radial tags follow).
    pub fn scaled(&self, factor: f64) -> Sample {
        Sample {
            points: self.points.iter().map(|p| p.scaled(factor)).collect(),
            provenance: self.provenance.clone(),
            radial: self.radial.iter().map(|r| r * factor).collect(),
            metric: self.metric,
        }
    }
}

/// Split [t0, t1] at the interior extrema of |γ − anchor| so each returned
/// piece has monotone radius.
fn monotone_radius_pieces(
    arc: &ParamArc,
    anchor: &[f64],
    t0: f64,
    t1: f64,
) -> Vec<(f64, f64)> {
    const SCAN: usize = 192;
    let r_at = |t: f64| arc.radius_from(t, anchor).unwrap_or(f64::INFINITY);
    let ts: Vec<f64> =
        (0..=SCAN).map(|k| t0 + (t1 - t0) * k as f64 / SCAN as f64).collect();
    let rs: Vec<f64> = ts.iter().map(|&t| r_at(t)).collect();
    let mut cuts = vec![t0];
    for i in 1..SCAN {
        let is_min = rs[i] < rs[i - 1] && rs[i] <= rs[i + 1];
        let is_max = rs[i] > rs[i - 1] && rs[i] >= rs[i + 1];
        if is_min || is_max {
            // golden-section refinement of the extremum
            let (mut lo, mut hi) = (ts[i - 1], ts[i + 1]);
            for _ in 0..80 {
                let m1 = lo + (hi - lo) * 0.381966;
                let m2 = hi - (hi - lo) * 0.381966;
                let pick_m1 = if is_min { r_at(m1) < r_at(m2) } else { r_at(m1) > r_at(m2) };
                if pick_m1 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
    }
    cuts.push(t1);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
    cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

/// Subdivide parameter gaps whose chord length is far above the median so
/// no stretch of the curve is left unsampled.
fn equalize_chord_gaps(arc: &ParamArc, params: &mut Vec<f64>) {
    for _round in 0..4 {
        params.sort_by(|a, b| a.partial_cmp(b).unwrap());
        params.dedup();
        if params.len() < 3 {
            return;
        }
        let pts: Vec<Option<Vec<f64>>> =
            params.iter().map(|&t| arc.eval_vec(t).ok()).collect();
        let mut chords: Vec<f64> = Vec::with_capacity(params.len() - 1);
        for i in 0..params.len() - 1 {
            let c = match (&pts[i], &pts[i + 1]) {
                (Some(a), Some(b)) => crate::geometry::dist(a, b),
                _ => 0.0,
            };
            chords.push(c);
        }
        let mut sorted = chords.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = sorted[sorted.len() / 2].max(1e-300);
        let mut extra = Vec::new();
        for (i, &c) in chords.iter().enumerate() {
            if c > 2.0 * med {
                let k = ((c / med).ceil() as usize).min(24);
                for j in 1..k {
                    extra.push(params[i] + (params[i + 1] - params[i]) * j as f64 / k as f64);
                }
            }
        }
        if extra.is_empty() {
            return;
        }
        params.extend(extra);
    }
    params.sort_by(|a, b| a.partial_cmp(b).unwrap());
    params.dedup();
}

fn solve_radius_on(
    arc: &ParamArc,
    anchor: &[f64],
    target: f64,
    t_lo: f64,
    t_hi: f64,
) -> f64 {
    // bisection on r(t) − target over [t_lo, t_hi]; callers arrange a bracket
    let r = |t: f64| arc.radius_from(t, anchor).unwrap_or(f64::INFINITY);
    let increasing = r(t_hi) >= r(t_lo);
    let (mut lo, mut hi) = (t_lo, t_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = r(mid) < target;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Draw `budget` points from the descriptor with radial tags in
/// [r_min, r_max]. Unbounded descriptors get log-uniform radial placement;
/// bounded arcs are sampled uniformly in parameter. Junctions of arc
/// networks are always included. The seed controls sub-cell jitter only;
/// any seed yields a valid sample and equal seeds yield equal samples.
pub fn sample_descriptor(
    d: &SetDescriptor,
    budget: usize,
    radial_range: (f64, f64),
    seed: u64,
) -> Result<Sample> {
    let (r_min, r_max) = radial_range;
    if budget < 2 {
        return Err(Error::Domain("sampling budget must be at least 2".into()));
    }
    if !(r_min < r_max) {
        return Err(Error::Domain(format!("empty radial range [{r_min}, {r_max}]")));
    }
    let metric = d.metric();
    let mut out = Sample {
        points: Vec::with_capacity(budget),
        provenance: Vec::with_capacity(budget),
        radial: Vec::with_capacity(budget),
        metric,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match d {
        SetDescriptor::ArcNetwork { arcs, junctions, .. } => {
            let origin = vec![0.0; d.dim()];
            let per_arc = (budget / arcs.len()).max(2);
            // several radial decades need log-uniform placement even along
            // bounded arcs (at-point ladders starve otherwise)
            let wide_range = r_max / r_min > 64.0;
            for arc in arcs {
                let unbounded = wide_range
                    || !arc.unbounded_ends(r_max * 2.0).is_empty()
                    || matches!(arc.domain, ArcDomain::HalfLine(_));
                let intervals = arc.radius_band_intervals(&origin, r_min, r_max);
                if intervals.is_empty() {
                    continue;
                }
                if unbounded {
                    // log-uniform radii over radius-monotone pieces of the
                    // intervals (quantile placement needs monotonicity)
                    let mut spans: Vec<(usize, f64, f64, f64, f64)> = Vec::new(); // interval, t0,t1,ln r0,ln r1
                    let mut total_span = 0.0;
                    for (iv, &(ti0, ti1)) in intervals.iter().enumerate() {
                        for (t0, t1) in monotone_radius_pieces(arc, &origin, ti0, ti1) {
                            let r0 = arc.radius_from(t0, &origin).unwrap_or(r_min).max(1e-300);
                            let r1 = arc.radius_from(t1, &origin).unwrap_or(r_max).max(1e-300);
                            let (la, lb) = (r0.ln(), r1.ln());
                            total_span += (lb - la).abs().max(1e-12);
                            spans.push((iv, t0, t1, la, lb));
                        }
                    }
                    let mut interval_params: Vec<Vec<f64>> = vec![Vec::new(); intervals.len()];
                    for (iv, t0, t1, la, lb) in &spans {
                        let frac = (lb - la).abs().max(1e-12) / total_span;
                        let n = ((per_arc as f64 * frac).round() as usize).max(2);
                        for k in 0..n {
                            let jitter: f64 = rng.gen_range(-0.2..0.2);
                            let u = (k as f64 + 0.5 + jitter) / n as f64;
                            let lr = la + (lb - la) * u;
                            interval_params[*iv]
                                .push(solve_radius_on(arc, &origin, lr.exp(), *t0, *t1));
                        }
                    }
                    for params in interval_params.iter_mut() {
                        if params.is_empty() {
                            continue;
                        }
                        // radius quantiles starve radius-stationary stretches;
                        // subdivide chord gaps well above the median
                        equalize_chord_gaps(arc, params);
                        for &t in params.iter() {
                            if let Ok(p) = arc.eval(t) {
                                out.push(p, Provenance::Arc { label: arc.label.clone(), param: t });
                            }
                        }
                    }
                } else {
                    for &(t0, t1) in &intervals {
                        let n = per_arc.max(2);
                        for k in 0..n {
                            let jitter: f64 = rng.gen_range(-0.2..0.2);
                            let t = t0 + (t1 - t0) * ((k as f64 + 0.5 + jitter) / n as f64);
                            if let Ok(p) = arc.eval(t) {
                                out.push(p, Provenance::Arc { label: arc.label.clone(), param: t });
                            }
                        }
                    }
                }
            }
            for (ji, j) in junctions.iter().enumerate() {
                out.push(j.clone(), Provenance::Adjoined { label: format!("junction_{ji}") });
            }
        }
        SetDescriptor::Implicit { polys, dim, box_bound } => {
            sample_implicit(polys, *dim, *box_bound, budget, (r_min, r_max), &mut out)?;
        }
        SetDescriptor::Cloud { points, .. } => {
            let kept: Vec<usize> = (0..points.len())
                .filter(|&i| {
                    let r = points[i].norm();
                    r >= r_min && r <= r_max
                })
                .collect();
            let take = kept.len().min(budget.max(2));
            for k in 0..take {
                let i = kept[k * kept.len() / take.max(1)];
                out.push(points[i].clone(), Provenance::Cloud { index: i });
            }
        }
    }
    // drop exact duplicates (quantile solves can collapse at float resolution)
    let mut seen = std::collections::HashSet::new();
    let keep: Vec<usize> = (0..out.len())
        .filter(|&i| {
            let bits: Vec<u64> = out.points[i].coords().iter().map(|c| c.to_bits()).collect();
            seen.insert(bits)
        })
        .collect();
    let out = if keep.len() < out.len() { out.keep_indices(&keep) } else { out };
    if out.len() < 2 {
        return Err(Error::EmptySample(format!(
            "descriptor has no points with radius in [{r_min}, {r_max}]"
        )));
    }
    Ok(out)
}

/// Rejection sampling on a grid followed by one Newton projection step.
fn sample_implicit(
    polys: &[crate::descriptor::Poly],
    dim: usize,
    box_bound: f64,
    budget: usize,
    (r_min, r_max): (f64, f64),
    out: &mut Sample,
) -> Result<()> {
    if dim > 3 {
        return Err(Error::Domain("implicit sampling supports dimension <= 3".into()));
    }
    let coarse: usize = if dim == 2 { 512 } else { 64 };
    let sub: usize = if dim == 2 { 24 } else { 6 };
    let h = 2.0 * box_bound / coarse as f64;
    let residual = |x: &[f64]| -> f64 {
        polys.iter().map(|p| p.eval(x).abs()).fold(0.0, f64::max)
    };
    let grad_scale = |x: &[f64]| -> f64 {
        polys.iter().map(|p| norm(&p.gradient(x))).fold(0.0, f64::max).max(1e-12)
    };
    // cells whose center residual is small relative to the cell size
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let center: Vec<f64> =
            idx.iter().map(|&i| -box_bound + (i as f64 + 0.5) * h).collect();
        if residual(&center) <= grad_scale(&center) * h * (dim as f64).sqrt() {
            candidates.push(idx.iter().map(|&i| i as i64).collect());
        }
        let mut k = 0;
        loop {
            if k == dim {
                break;
            }
            idx[k] += 1;
            if idx[k] < coarse {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    let hs = h / sub as f64;
    let mut accepted: Vec<(Vec<i64>, Point)> = Vec::new();
    for cell in &candidates {
        let base: Vec<f64> =
            cell.iter().map(|&i| -box_bound + i as f64 * h).collect();
        let mut sidx = vec![0usize; dim];
        loop {
            let mut x: Vec<f64> = base
                .iter()
                .zip(sidx.iter())
                .map(|(b, &i)| b + (i as f64 + 0.5) * hs)
                .collect();
            // one Newton projection step onto the level set
            newton_step(polys, &mut x);
            let g = grad_scale(&x);
            let r = norm(&x);
            if residual(&x) <= TOL_MEMBER * g
                && x.iter().all(|c| c.abs() <= box_bound)
                && r >= r_min
                && r <= r_max
            {
                if let Ok(p) = Point::new(x) {
                    let mut key = cell.clone();
                    key.extend(sidx.iter().map(|&i| i as i64));
                    accepted.push((key, p));
                }
            }
            let mut k = 0;
            loop {
                if k == dim {
                    break;
                }
                sidx[k] += 1;
                if sidx[k] < sub {
                    break;
                }
                sidx[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
    }
    if accepted.is_empty() {
        return Err(Error::EmptySample("implicit set has no points in range".into()));
    }
    let take = accepted.len().min(budget);
    for k in 0..take {
        let i = k * accepted.len() / take;
        let (cell, p) = &accepted[i];
        out.push(p.clone(), Provenance::Grid { cell: cell.clone() });
    }
    Ok(())
}

/// Gauss-Newton least-squares step for F(x) = 0 with m ≤ dim components.
fn newton_step(polys: &[crate::descriptor::Poly], x: &mut [f64]) {
    let m = polys.len();
    if m == 1 {
        let f = polys[0].eval(x);
        let g = polys[0].gradient(x);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 > 1e-24 {
            for (xi, gi) in x.iter_mut().zip(g.iter()) {
                *xi -= f * gi / g2;
            }
        }
        return;
    }
    // x ← x − Jᵀ(JJᵀ)⁻¹ F, solving the m×m system by Gaussian elimination
    let f: Vec<f64> = polys.iter().map(|p| p.eval(x)).collect();
    let j: Vec<Vec<f64>> = polys.iter().map(|p| p.gradient(x)).collect();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| j[r].iter().zip(j[c].iter()).map(|(u, v)| u * v).sum::<f64>())
                .collect()
        })
        .collect();
    let mut b = f.clone();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() < 1e-18 {
            return;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            let fpiv = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= fpiv * a[col][c];
            }
            b[r] -= fpiv * b[col];
        }
    }
    let mut lambda = vec![0.0; m];
    for r in (0..m).rev() {
        let mut acc = b[r];
        for c in r + 1..m {
            acc -= a[r][c] * lambda[c];
        }
        lambda[r] = acc / a[r][r];
    }
    for k in 0..x.len() {
        let step: f64 = (0..m).map(|r| lambda[r] * j[r][k]).sum();
        x[k] -= step;
    }
}

/// Radial slice selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceMode {
    /// Keep |x| ≤ t.
    Le(f64),
    /// Keep | |x| − t | ≤ band.
    Eq { t: f64, band: f64 },
    /// Keep |x| ≥ t.
    Ge(f64),
}

/// Restrict a sample by radius.
pub fn slice(s: &Sample, mode: SliceMode) -> Result<Sample> {
    match mode {
        SliceMode::Le(t) | SliceMode::Ge(t) if !(t > 0.0) => {
            return Err(Error::Domain("slice radius must be positive".into()))
        }
        SliceMode::Eq { t, band } if !(t > 0.0) || !(band > 0.0) => {
            return Err(Error::Domain("slice radius and band must be positive".into()))
        }
        _ => {}
    }
    let keep: Vec<usize> = (0..s.len())
        .filter(|&i| match mode {
            SliceMode::Le(t) => s.radial[i] <= t,
            SliceMode::Ge(t) => s.radial[i] >= t,
            SliceMode::Eq { t, band } => (s.radial[i] - t).abs() <= band,
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptySample(format!("no points survive {mode:?}")));
    }
    Ok(s.keep_indices(&keep))
}

/// Connected components of the radius ≥ R part of a sample at graph scale ε.
#[derive(Debug, Clone)]
pub struct ComponentSplit {
    pub radius: f64,
    pub eps: f64,
    pub parts: Vec<Sample>,
}

/// Split the GE-R slice into ε-connectivity components, ordered by
/// (min radial tag, lexicographically smallest point).
pub fn split_components_at_radius(s: &Sample, radius: f64, eps: f64) -> Result<ComponentSplit> {
    let tail = slice(s, SliceMode::Ge(radius))?;
    let g = graph::build_graph(&tail, eps)?;
    split_from_graph(tail, radius, eps, g)
}

/// Like `split_components_at_radius` with the multiscale radial graph, for
/// slices spanning several decades where one ε cannot serve every band.
pub fn split_components_multiscale(s: &Sample, radius: f64) -> Result<ComponentSplit> {
    let tail = slice(s, SliceMode::Ge(radius))?;
    let g = graph::build_graph_multiscale(&tail)?;
    let eps = g.eps;
    split_from_graph(tail, radius, eps, g)
}

fn split_from_graph(
    tail: Sample,
    radius: f64,
    eps: f64,
    g: graph::ProximityGraph,
) -> Result<ComponentSplit> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g.n_components];
    for i in 0..tail.len() {
        groups[g.component_of(i) as usize].push(i);
    }
    let mut keyed: Vec<(f64, Point, Vec<usize>)> = groups
        .into_iter()
        .filter(|grp| !grp.is_empty())
        .map(|grp| {
            let min_r = grp.iter().map(|&i| tail.radial[i]).fold(f64::INFINITY, f64::min);
            let min_p = grp
                .iter()
                .map(|&i| tail.points[i].clone())
                .min_by(|a, b| a.lex_cmp(b))
                .unwrap();
            (min_r, min_p, grp)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.lex_cmp(&b.1))
    });
    let parts = keyed.into_iter().map(|(_, _, grp)| tail.keep_indices(&grp)).collect();
    Ok(ComponentSplit { radius, eps, parts })
}

/// Where an asymptotic set is anchored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Anchor {
    Infinity,
    At(Point),
}

/// A finite set of unit directions approximating the limit directions of a
/// sample at its anchor, with the angular resolution used to cluster them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticSet {
    pub directions: Vec<UnitDirection>,
    pub resolution: f64,
    pub anchor: Anchor,
}

/// Cluster unit directions greedily with angular tolerance `delta_bin`,
/// merging until all cluster means are pairwise at least `delta_bin` apart.
pub fn cluster_directions(dirs: &[UnitDirection], delta_bin: f64) -> Vec<UnitDirection> {
    let mut sorted: Vec<&UnitDirection> = dirs.iter().collect();
    sorted.sort_by(|a, b| {
        Point::from_slice(a.coords()).lex_cmp(&Point::from_slice(b.coords()))
    });
    // accumulate (sum vector, count) per cluster
    let mut sums: Vec<(Vec<f64>, usize)> = Vec::new();
    for d in sorted {
        let mut placed = false;
        for (sum, count) in sums.iter_mut() {
            if let Ok(mean) = UnitDirection::new(sum.clone()) {
                if mean.angle_to(d) <= delta_bin {
                    for (s, c) in sum.iter_mut().zip(d.coords()) {
                        *s += c;
                    }
                    *count += 1;
                    placed = true;
                    break;
                }
            }
        }
        if !placed {
            sums.push((d.coords().to_vec(), 1));
        }
    }
    // merge means that ended up closer than the bin width
    loop {
        let means: Vec<Option<UnitDirection>> =
            sums.iter().map(|(s, _)| UnitDirection::new(s.clone()).ok()).collect();
        let mut merge: Option<(usize, usize)> = None;
        'outer: for i in 0..sums.len() {
            for j in i + 1..sums.len() {
                if let (Some(a), Some(b)) = (&means[i], &means[j]) {
                    if a.angle_to(b) < delta_bin {
                        merge = Some((i, j));
                        break 'outer;
                    }
                }
            }
        }
        match merge {
            Some((i, j)) => {
                let (sj, cj) = sums.remove(j);
                for (s, v) in sums[i].0.iter_mut().zip(sj.iter()) {
                    *s += v;
                }
                sums[i].1 += cj;
            }
            None => break,
        }
    }
    let mut out: Vec<UnitDirection> =
        sums.into_iter().filter_map(|(s, _)| UnitDirection::new(s).ok()).collect();
    out.sort_by(|a, b| Point::from_slice(a.coords()).lex_cmp(&Point::from_slice(b.coords())));
    out
}

/// Directions of the extreme dyadic band of a sample: points with radius in
/// [R_max/2, R_max] at infinity, or [r_min, 2 r_min] from the anchor point.
pub fn asymptotic_set(s: &Sample, anchor: Anchor, delta_bin: f64) -> Result<AsymptoticSet> {
    let dirs: Vec<UnitDirection> = match &anchor {
        Anchor::Infinity => {
            let r_max = s.radial.iter().copied().fold(0.0f64, f64::max);
            if r_max <= 0.0 {
                return Err(Error::InsufficientTail("sample has no nonzero radii".into()));
            }
            let band: Vec<usize> =
                (0..s.len()).filter(|&i| s.radial[i] >= r_max / 2.0).collect();
            if band.len() < N_MIN_TAIL {
                return Err(Error::InsufficientTail(format!(
                    "only {} points in the top dyadic band (need {N_MIN_TAIL})",
                    band.len()
                )));
            }
            band.iter()
                .filter_map(|&i| UnitDirection::new(s.points[i].coords().to_vec()).ok())
                .collect()
        }
        Anchor::At(x0) => {
            let dists: Vec<f64> =
                s.points.iter().map(|p| dist(p.coords(), x0.coords())).collect();
            let d_min = dists
                .iter()
                .copied()
                .filter(|d| *d > 1e-300)
                .fold(f64::INFINITY, f64::min);
            if !d_min.is_finite() {
                return Err(Error::InsufficientTail("no points away from the anchor".into()));
            }
            let band: Vec<usize> = (0..s.len())
                .filter(|&i| dists[i] >= d_min && dists[i] <= 2.0 * d_min)
                .collect();
            if band.len() < N_MIN_TAIL {
                return Err(Error::InsufficientTail(format!(
                    "only {} points in the bottom dyadic band (need {N_MIN_TAIL})",
                    band.len()
                )));
            }
            band.iter()
                .filter_map(|&i| {
                    UnitDirection::new(sub(s.points[i].coords(), x0.coords())).ok()
                })
                .collect()
        }
    };
    let directions = cluster_directions(&dirs, delta_bin);
    Ok(AsymptoticSet { directions, resolution: delta_bin, anchor })
}

/// The nonnegative cone over an asymptotic set: one ray per direction,
/// as an arc network with the vertex as junction.
pub fn tangent_cone(a: &AsymptoticSet, vertex: &Point) -> Result<SetDescriptor> {
    if a.directions.is_empty() {
        return Err(Error::Domain("tangent cone of an empty direction set".into()));
    }
    let mut arcs = Vec::new();
    for (k, u) in a.directions.iter().enumerate() {
        let components: Vec<Expr> = vertex
            .coords()
            .iter()
            .zip(u.coords())
            .map(|(v, d)| Expr::constant(*v).add(&Expr::var().mul(&Expr::constant(*d))))
            .collect();
        arcs.push(ParamArc::from_parts(
            &format!("ray_{k}"),
            components,
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )?);
    }
    let junctions = if arcs.len() >= 2 { vec![vertex.clone()] } else { Vec::new() };
    SetDescriptor::arc_network(arcs, junctions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::Poly;

    fn parabola() -> SetDescriptor {
        let right =
            ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let left =
            ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        SetDescriptor::arc_network(vec![right, left], vec![Point::from_slice(&[0.0, 0.0])])
            .unwrap()
    }

    #[test]
    fn parabola_membership_residual() {
        let d = parabola();
        let s = sample_descriptor(&d, 1000, (0.1, 100.0), 7).unwrap();
        assert!(s.len() >= 900);
        for (p, prov) in s.points.iter().zip(&s.provenance) {
            if let Provenance::Arc { .. } = prov {
                let (x, y) = (p[0], p[1]);
                assert!((y - x * x).abs() < 1e-9, "off-set point ({x}, {y})");
            }
        }
    }

    #[test]
    fn circle_implicit_membership() {
        let poly =
            Poly::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 2]), (-1.0, vec![0, 0])]).unwrap();
        let d = SetDescriptor::implicit(vec![poly], 2.0).unwrap();
        let s = sample_descriptor(&d, 500, (0.5, 2.0), 0).unwrap();
        assert!(s.len() >= 400, "got {}", s.len());
        for p in &s.points {
            assert!((p.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn slice_behaviour() {
        let d = parabola();
        let s = sample_descriptor(&d, 500, (0.1, 100.0), 1).unwrap();
        let ge = slice(&s, SliceMode::Ge(10.0)).unwrap();
        assert!(ge.radial.iter().all(|&r| r >= 10.0));
        // idempotent
        let ge2 = slice(&ge, SliceMode::Ge(10.0)).unwrap();
        assert_eq!(ge.len(), ge2.len());
        // unit circle below 0.5 is empty
        let poly =
            Poly::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 2]), (-1.0, vec![0, 0])]).unwrap();
        let c = SetDescriptor::implicit(vec![poly], 2.0).unwrap();
        let cs = sample_descriptor(&c, 300, (0.5, 2.0), 0).unwrap();
        assert!(slice(&cs, SliceMode::Le(0.5)).is_err());
    }

    #[test]
    fn split_parabola_two_branches() {
        let d = parabola();
        let s = sample_descriptor(&d, 2000, (0.1, 100.0), 2).unwrap();
        let split = split_components_multiscale(&s, 10.0).unwrap();
        assert_eq!(split.parts.len(), 2, "expected the two branches");
        // parts partition the GE-slice
        let tail = slice(&s, SliceMode::Ge(10.0)).unwrap();
        let total: usize = split.parts.iter().map(|p| p.len()).sum();
        assert_eq!(total, tail.len());
    }

    #[test]
    fn split_spiral_single_component() {
        let arc = ParamArc::from_exprs(
            "spiral",
            &["exp(t)*cos(2*pi*t)", "exp(t)*sin(2*pi*t)"],
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )
        .unwrap();
        let d = SetDescriptor::arc_network(vec![arc], vec![]).unwrap();
        let s = sample_descriptor(&d, 4000, (1.0, 100.0), 3).unwrap();
        let split = split_components_multiscale(&s, 10.0).unwrap();
        assert_eq!(split.parts.len(), 1);
        // a fixed ε at the slice's own scale also keeps one piece when the
        // slice stays within a factor of a few
        let narrow = sample_descriptor(&d, 3000, (1.0, 30.0), 3).unwrap();
        let tail = slice(&narrow, SliceMode::Ge(10.0)).unwrap();
        let eps = graph::auto_eps(&tail.points, tail.metric);
        let split = split_components_at_radius(&narrow, 10.0, eps).unwrap();
        assert_eq!(split.parts.len(), 1);
    }

    #[test]
    fn asymptotic_directions_of_parabola() {
        let d = parabola();
        let s = sample_descriptor(&d, 3000, (0.1, 4000.0), 4).unwrap();
        let a = asymptotic_set(&s, Anchor::Infinity, DELTA_BIN_DEFAULT).unwrap();
        assert_eq!(a.directions.len(), 1, "both branches share (0,1): {:?}", a.directions);
        let up = UnitDirection::new(vec![0.0, 1.0]).unwrap();
        assert!(a.directions[0].angle_to(&up) < DELTA_BIN_DEFAULT);
    }

    #[test]
    fn asymptotic_directions_of_line() {
        let r1 = ParamArc::from_exprs("r1", &["t", "0"], ArcDomain::HalfLine(0.0), Some(0.0))
            .unwrap();
        let r2 = ParamArc::from_exprs("r2", &["-t", "0"], ArcDomain::HalfLine(0.0), Some(0.0))
            .unwrap();
        let d =
            SetDescriptor::arc_network(vec![r1, r2], vec![Point::from_slice(&[0.0, 0.0])]).unwrap();
        let s = sample_descriptor(&d, 500, (0.1, 100.0), 5).unwrap();
        let a = asymptotic_set(&s, Anchor::Infinity, DELTA_BIN_DEFAULT).unwrap();
        assert_eq!(a.directions.len(), 2);
    }

    #[test]
    fn asymptotic_directions_of_cusp_at_origin() {
        let up = ParamArc::from_exprs("up", &["t", "t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
            .unwrap();
        let dn = ParamArc::from_exprs("dn", &["t", "-t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
            .unwrap();
        let d =
            SetDescriptor::arc_network(vec![up, dn], vec![Point::from_slice(&[0.0, 0.0])]).unwrap();
        let s = sample_descriptor(&d, 4000, (1e-6, 1.0), 6).unwrap();
        let a = asymptotic_set(&s, Anchor::At(Point::from_slice(&[0.0, 0.0])), DELTA_BIN_DEFAULT)
            .unwrap();
        assert_eq!(a.directions.len(), 1, "both cusp branches tangent to +x: {:?}", a.directions);
        let ex = UnitDirection::new(vec![1.0, 0.0]).unwrap();
        assert!(a.directions[0].angle_to(&ex) < DELTA_BIN_DEFAULT);
    }

    #[test]
    fn scaling_leaves_directions_unchanged() {
        let d = parabola();
        let s = sample_descriptor(&d, 3000, (0.1, 4000.0), 4).unwrap();
        let a1 = asymptotic_set(&s, Anchor::Infinity, DELTA_BIN_DEFAULT).unwrap();
        let a2 = asymptotic_set(&s.scaled(7.5), Anchor::Infinity, DELTA_BIN_DEFAULT).unwrap();
        assert_eq!(a1.directions.len(), a2.directions.len());
        // band membership can shift by boundary rounding; clusters agree far
        // within the bin width
        for (u, v) in a1.directions.iter().zip(&a2.directions) {
            assert!(u.angle_to(v) < 1e-3);
        }
    }

    #[test]
    fn tangent_cone_rays() {
        let a = AsymptoticSet {
            directions: vec![
                UnitDirection::new(vec![0.0, 1.0]).unwrap(),
                UnitDirection::new(vec![1.0, 0.0]).unwrap(),
            ],
            resolution: DELTA_BIN_DEFAULT,
            anchor: Anchor::Infinity,
        };
        let cone = tangent_cone(&a, &Point::from_slice(&[0.0, 0.0])).unwrap();
        let arcs = cone.arcs().unwrap();
        assert_eq!(arcs.len(), 2);
        let p = arcs[0].eval(3.0).unwrap();
        assert!(p.norm() > 0.0);
    }
}
