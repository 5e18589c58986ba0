//! Equivalence harnesses: the same set certified on both sides of the
//! inversion and one-point-compactification correspondences, the link
//! criterion, projective-plane contrasts, and the frozen example corpus.

use serde_json::json;

use crate::analysis::{
    cloud_germ_report_sample, glue_certify, lne_at_infinity, lne_at_point, ratio_sup,
    AnalysisConfig, LneReport, Locus, Verdict, WitnessPair,
};
use crate::descriptor::SetDescriptor;
use crate::error::{Error, Result};
use crate::geometry::{
    ambient_distance, dist, north_pole, stereo_to_sphere, AmbientMetric, Point,
};
use crate::germ;
use crate::graph;
use crate::sample::{
    asymptotic_set, sample_descriptor, Anchor, Provenance, Sample,
};

/// Two verdicts for the same set under an equivalence transform.
/// `agree` is None when either side is inconclusive.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub left: LneReport,
    pub right: LneReport,
    pub agree: Option<bool>,
}

impl EquivalenceReport {
    fn from_sides(left: LneReport, right: LneReport) -> EquivalenceReport {
        let agree = if left.verdict.is_inconclusive() || right.verdict.is_inconclusive() {
            None
        } else {
            Some(left.verdict.class() == right.verdict.class())
        };
        EquivalenceReport { left, right, agree }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "agree": self.agree,
        })
    }
}

/// Anchors needing local ladders: declared junctions plus the accumulation
/// points of vanishing arc ends.
pub fn local_anchor_points(d: &SetDescriptor, r_floor: f64) -> Vec<Point> {
    let mut anchors: Vec<Point> = d.junctions().to_vec();
    if let Some(arcs) = d.arcs() {
        let origin = vec![0.0; d.dim()];
        for arc in arcs {
            for side in arc.vanishing_ends(&origin, r_floor) {
                let t_probe = match (arc.domain, side) {
                    (crate::descriptor::ArcDomain::HalfLine(a), _) => {
                        let mut t = arc.t_mono.unwrap_or(a).max(a) + 1.0;
                        let mut step = 1.0;
                        for _ in 0..80 {
                            if let Some(r) = arc.radius_from(t + step, &origin) {
                                if r < r_floor {
                                    break;
                                }
                            }
                            t += step;
                            step *= 2.0;
                        }
                        t + step
                    }
                    (
                        crate::descriptor::ArcDomain::Bounded(a, b),
                        crate::descriptor::EndSide::Lower,
                    ) => a + (b - a) * 1e-9,
                    (
                        crate::descriptor::ArcDomain::Bounded(a, b),
                        crate::descriptor::EndSide::Upper,
                    ) => b - (b - a) * 1e-9,
                };
                if let Ok(p) = arc.eval(t_probe) {
                    let limit: Vec<f64> = p
                        .coords()
                        .iter()
                        .map(|c| if c.abs() < r_floor { 0.0 } else { *c })
                        .collect();
                    if let Ok(pt) = Point::new(limit) {
                        anchors.push(pt);
                    }
                }
            }
        }
    }
    anchors.sort_by(|a, b| a.lex_cmp(b));
    anchors.dedup_by(|a, b| dist(a.coords(), b.coords()) < 1e-9);
    anchors
}

/// Chordal distance from the image of an affine point at radius `r` to the
/// north pole: |σ(x) − N| = 2/√(1+r²).
pub fn chordal_to_north(r: f64) -> f64 {
    2.0 / (1.0 + r * r).sqrt()
}

/// Chordal distance from the image of an affine point at radius `r` to the
/// south pole σ(0): 2r/√(1+r²).
pub fn chordal_to_south(r: f64) -> f64 {
    2.0 * r / (1.0 + r * r).sqrt()
}

fn sphere_cloud(
    d: &SetDescriptor,
    range: (f64, f64),
    budget: usize,
    seed: u64,
    adjoin_pole: bool,
) -> Result<Sample> {
    // base sample plus a log-densified resample of the top octaves, whose
    // image crowds the north pole
    let base = sample_descriptor(d, budget, range, seed)?;
    let mut all = base;
    let top = (range.1 / 64.0).max(range.0 * 2.0);
    if adjoin_pole && top < range.1 {
        if let Ok(extra) = sample_descriptor(d, budget / 2, (top, range.1), seed ^ 0x9e37_79b9) {
            for i in 0..extra.len() {
                all.push(extra.points[i].clone(), extra.provenance[i].clone());
            }
        }
    }
    let q = d.dim();
    let mut mapped = Sample {
        points: Vec::with_capacity(all.len() + 1),
        provenance: Vec::with_capacity(all.len() + 1),
        radial: Vec::with_capacity(all.len() + 1),
        metric: AmbientMetric::Sphere(q),
    };
    for i in 0..all.len() {
        mapped.push(stereo_to_sphere(&all.points[i]), all.provenance[i].clone());
    }
    if adjoin_pole {
        mapped.push(north_pole(q), Provenance::Adjoined { label: "north_pole".into() });
    }
    Ok(mapped)
}

/// Global ratio check over a compact cloud: multiscale graph keyed by the
/// distance to the nearest singular point (pole, mapped anchor), with each
/// singular point stitched to its nearest neighbors — the one-point-closure
/// passages the finite sample cannot form on its own. Returns the maximal
/// finite ratio plus the far-separated infinite witness, if any.
fn global_cloud_ratio(
    s: &Sample,
    singular: &[Point],
    cfg: &AnalysisConfig,
) -> Result<(f64, Option<WitnessPair>)> {
    let key: Vec<f64> = if singular.is_empty() {
        s.radial.clone()
    } else {
        s.points
            .iter()
            .map(|p| {
                singular
                    .iter()
                    .map(|sp| dist(p.coords(), sp.coords()))
                    .fold(f64::INFINITY, f64::min)
                    .max(1e-12)
            })
            .collect()
    };
    let mut g = graph::build_graph_multiscale_keyed(s, &key)?;
    // stitch singular points to their nearest sample neighbors
    for sp in singular {
        let own = (0..s.len()).find(|&i| dist(s.points[i].coords(), sp.coords()) < 1e-12);
        let own = match own {
            Some(v) => v,
            None => continue,
        };
        let mut near: Vec<(f64, usize)> = (0..s.len())
            .filter(|&i| i != own)
            .map(|i| (dist(s.points[i].coords(), sp.coords()), i))
            .collect();
        near.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &(w, i) in near.iter().take(8) {
            g.add_edge(own, i, w.max(1e-300));
        }
    }
    let g = g;
    let (k, w) = ratio_sup(s, &g, cfg.pair_budget);
    if w.is_infinite() && w.outer > crate::analysis::WITNESS_SEPARATION_FACTOR * g.eps {
        return Ok((k, Some(w)));
    }
    Ok((k, None))
}

/// Certify the set in the plane and its one-point compactification on the
/// sphere, and compare the verdicts.
pub fn verify_compactification(
    d: &SetDescriptor,
    split_radius: f64,
    cfg: &AnalysisConfig,
) -> Result<EquivalenceReport> {
    let left = glue_certify(d, split_radius, cfg)?;

    let range = cfg.radial_range.unwrap_or((split_radius / 256.0, split_radius * 64.0));
    let unbounded = d.is_unbounded(split_radius * 4.0);
    let mut cloud = sphere_cloud(d, range, cfg.budget, cfg.seed, unbounded)?;
    let np = north_pole(d.dim());
    // the closure includes the images of accumulation anchors; adjoin any
    // that the sample itself could not reach
    for (ai, anchor) in local_anchor_points(d, range.0).iter().enumerate() {
        let img = stereo_to_sphere(anchor);
        if !cloud.points.iter().any(|p| dist(p.coords(), img.coords()) < 1e-12) {
            cloud.push(img, Provenance::Adjoined { label: format!("anchor_{ai}") });
        }
    }

    let mut right_k = 0.0f64;
    let mut right_not: Option<(WitnessPair, Vec<(f64, f64)>, Vec<(f64, f64)>)> = None;
    let mut right_inconclusive: Option<String> = None;
    let mut right_ladder: Vec<(f64, f64)> = Vec::new();
    if unbounded {
        let rungs: Vec<f64> = (0..=cfg.ladder_doublings.max(3))
            .map(|i| chordal_to_north(range.1 / 2f64.powi(i as i32)))
            .collect();
        match cloud_germ_report_sample(&cloud, Some(&np), &rungs, cfg) {
            Ok(rep) => {
                right_k = right_k.max(rep.k_est);
                right_ladder = rep.ladder.clone();
                match rep.verdict {
                    Verdict::NotLne { witness, trend } => {
                        right_not = Some((witness, trend, rep.ladder));
                    }
                    Verdict::Inconclusive { reason } => {
                        right_inconclusive = Some(format!("pole ladder: {reason}"))
                    }
                    Verdict::Lne { .. } => {}
                }
            }
            Err(e) => right_inconclusive = Some(format!("pole ladder: {e}")),
        }
    }
    // mapped local anchors
    let anchors = local_anchor_points(d, range.0);
    if right_not.is_none() && right_inconclusive.is_none() {
        for anchor in &anchors {
            let r_anchor = anchor.norm();
            let mapped = stereo_to_sphere(&anchor);
            let rungs: Vec<f64> = if r_anchor < 1e-9 {
                (0..5)
                    .map(|i| chordal_to_south(range.0 * 16.0 / 2f64.powi(i as i32)))
                    .collect()
            } else {
                let factor = 2.0 / (1.0 + r_anchor * r_anchor);
                (0..5)
                    .map(|i| factor * range.0 * 16.0 / 2f64.powi(i as i32))
                    .collect()
            };
            match cloud_germ_report_sample(&cloud, Some(&mapped), &rungs, cfg) {
                Ok(rep) => {
                    right_k = right_k.max(rep.k_est);
                    if right_ladder.is_empty() {
                        right_ladder = rep.ladder.clone();
                    }
                    match rep.verdict {
                        Verdict::NotLne { witness, trend } => {
                            right_not = Some((witness, trend, rep.ladder));
                            break;
                        }
                        Verdict::Inconclusive { reason } => {
                            right_inconclusive =
                                Some(format!("anchor {:?}: {reason}", anchor.coords()));
                            break;
                        }
                        Verdict::Lne { .. } => {}
                    }
                }
                Err(Error::InsufficientTail(_)) => {}
                Err(e) => {
                    right_inconclusive = Some(format!("anchor {:?}: {e}", anchor.coords()));
                    break;
                }
            }
        }
    }
    // global ratio over the compactified cloud
    if right_not.is_none() && right_inconclusive.is_none() {
        let mut singular: Vec<Point> = anchors.iter().map(stereo_to_sphere).collect();
        if unbounded {
            singular.push(np.clone());
        }
        match global_cloud_ratio(&cloud, &singular, cfg) {
            Ok((k, Some(w))) => {
                right_not = Some((w, right_ladder.clone(), right_ladder.clone()));
                right_k = right_k.max(k);
            }
            Ok((k, None)) => right_k = right_k.max(k),
            Err(e) => right_inconclusive = Some(format!("global stage: {e}")),
        }
    }

    let right_verdict = if let Some((witness, trend, _)) = right_not {
        Verdict::NotLne { witness, trend }
    } else if let Some(reason) = right_inconclusive {
        Verdict::Inconclusive { reason }
    } else {
        Verdict::Lne { k_est: right_k }
    };
    let right = LneReport {
        verdict: right_verdict,
        ladder: right_ladder,
        locus: Locus::Global,
        k_est: right_k,
        config_echo: cfg.echo(),
    };
    Ok(EquivalenceReport::from_sides(left, right))
}

/// Certify the germ at the origin and the inverted germ at infinity, and
/// compare. The point ladder maps rung-for-rung onto the inverted ladder
/// through |ι(x)| = 1/|x|.
pub fn verify_inversion(
    d: &SetDescriptor,
    point_ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<EquivalenceReport> {
    let origin = Point::new(vec![0.0; d.dim()])?;
    let left = lne_at_point(d, &origin, point_ladder, cfg)?;
    let inverted = d.inverted()?;
    let mut inf_ladder: Vec<f64> = point_ladder.iter().map(|r| 1.0 / r).collect();
    inf_ladder.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let right = lne_at_infinity(&inverted, &inf_ladder, cfg)?;
    Ok(EquivalenceReport::from_sides(left, right))
}

/// One rung of the link table.
#[derive(Debug, Clone)]
pub struct LinkRow {
    pub radius: f64,
    pub pieces: usize,
    pub k_max: f64,
    /// Cross-piece pairs exist (inner distance infinite within the link band).
    pub cross_flagged: bool,
}

#[derive(Debug, Clone)]
pub struct LinkReport {
    pub rows: Vec<LinkRow>,
}

impl LinkReport {
    /// Uniform boundedness of the per-piece link constants.
    pub fn bounded(&self, slack: f64) -> bool {
        let ks: Vec<f64> = self.rows.iter().map(|r| r.k_max).collect();
        if ks.is_empty() {
            return false;
        }
        let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ks.iter().copied().fold(0.0f64, f64::max);
        hi <= lo * slack
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,pieces,k_max,cross_flagged\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.radius, r.pieces, r.k_max, r.cross_flagged));
        }
        out
    }
}

/// Per-rung constants of the link slices: the set cut by thin spherical
/// bands, each connected piece certified on its own, cross-piece pairs
/// flagged rather than folded into the constant.
pub fn verify_link_criterion(
    d: &SetDescriptor,
    ladder: &[f64],
    band_rel: f64,
    cfg: &AnalysisConfig,
) -> Result<LinkReport> {
    if !(band_rel > 0.0 && band_rel < 1.0) {
        return Err(Error::Domain("link band width must be in (0,1)".into()));
    }
    let origin = vec![0.0; d.dim()];
    let top = ladder.iter().copied().fold(0.0f64, f64::max);
    let sides = germ::germ_sides_at_infinity(d, top * 2.0)?;
    let metric = d.metric();
    let mut rows = Vec::new();
    for &radius in ladder {
        let (r_lo, r_hi) = (radius * (1.0 - band_rel / 2.0), radius * (1.0 + band_rel / 2.0));
        let mut pieces = 0usize;
        let mut k_max: f64 = 0.0;
        for side in &sides {
            let n = cfg.budget.clamp(512, cfg.max_band_points);
            if let Some(tr) = germ::band_trace(d, side, &origin, r_lo, r_hi, n)? {
                for &(a, b) in &tr.strands {
                    if b <= a {
                        continue;
                    }
                    pieces += 1;
                    // within-strand ratio via exact along-arc lengths
                    let mut best: f64 = 1.0;
                    for i in a..=b {
                        for j in (i + 1)..=b {
                            let inner = tr.cum_len[j] - tr.cum_len[i];
                            let outer = ambient_distance(metric, &tr.points[i], &tr.points[j])
                                .unwrap_or(f64::INFINITY);
                            if outer > 1e-300 {
                                best = best.max(inner / outer);
                            }
                        }
                    }
                    k_max = k_max.max(best);
                }
            }
        }
        if pieces == 0 {
            return Err(Error::EmptySample(format!("link band at radius {radius} is empty")));
        }
        rows.push(LinkRow { radius, pieces, k_max, cross_flagged: pieces > 1 });
    }
    Ok(LinkReport { rows })
}

// ---------------------------------------------------------------------------
// projective-plane pipelines
// ---------------------------------------------------------------------------

/// Unit-vector representative of the affine point (x, y) in the plane chart.
fn projective_lift(p: &Point) -> Point {
    let mut v: Vec<f64> = p.coords().to_vec();
    v.push(1.0);
    let n = crate::geometry::norm(&v);
    Point::new(v.into_iter().map(|c| c / n).collect()).expect("finite lift")
}

fn sign_canonical(v: Vec<f64>) -> Vec<f64> {
    for c in &v {
        if *c > 1e-15 {
            return v;
        }
        if *c < -1e-15 {
            return v.into_iter().map(|x| -x).collect();
        }
    }
    v
}

/// Flip representatives into the anchor's hemisphere so that directions at
/// the anchor are well defined.
fn canonicalize_about(s: &Sample, anchor: &Point) -> Sample {
    let mut out = s.clone();
    for p in out.points.iter_mut() {
        let d = crate::geometry::dot(p.coords(), anchor.coords());
        if d < 0.0 {
            *p = p.scaled(-1.0);
        }
    }
    out
}

/// The projective closure of a plane descriptor: affine representatives plus
/// boundary points adjoined at the direction clusters of the set at
/// infinity. Certifies each boundary point locally and the closure globally.
pub fn projective_closure_report(
    d: &SetDescriptor,
    range: (f64, f64),
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    let affine = sample_descriptor(d, cfg.budget, range, cfg.seed)?;
    let dirs = asymptotic_set(&affine, Anchor::Infinity, cfg.delta_bin)?;
    let mut cloud = Sample {
        points: Vec::with_capacity(affine.len() + dirs.directions.len()),
        provenance: Vec::new(),
        radial: Vec::new(),
        metric: AmbientMetric::Projective2,
    };
    for i in 0..affine.len() {
        cloud.push(projective_lift(&affine.points[i]), affine.provenance[i].clone());
    }
    let mut boundary = Vec::new();
    for (k, u) in dirs.directions.iter().enumerate() {
        let mut v = u.coords().to_vec();
        v.push(0.0);
        let b = Point::new(sign_canonical(v))?;
        cloud.push(b.clone(), Provenance::Adjoined { label: format!("boundary_{k}") });
        boundary.push(b);
    }
    let mut k_global = 0.0f64;
    let mut ladder: Vec<(f64, f64)> = Vec::new();
    // local ladders at each boundary point: projective radius ≈ 1/affine radius
    for b in &boundary {
        let canon = canonicalize_about(&cloud, b);
        let rungs: Vec<f64> = (0..5)
            .map(|i| {
                let r_aff = range.1 / 2f64.powi(i as i32);
                (1.0 / r_aff).atan().max(1e-12)
            })
            .collect();
        match cloud_germ_report_sample(&canon, Some(b), &rungs, cfg) {
            Ok(rep) => {
                k_global = k_global.max(rep.k_est);
                if ladder.is_empty() {
                    ladder = rep.ladder.clone();
                }
                match rep.verdict {
                    Verdict::NotLne { witness, trend } => {
                        return Ok(LneReport {
                            verdict: Verdict::NotLne { witness, trend },
                            ladder: rep.ladder,
                            locus: Locus::Global,
                            k_est: k_global,
                            config_echo: cfg.echo(),
                        })
                    }
                    Verdict::Inconclusive { reason } => {
                        return Ok(LneReport {
                            verdict: Verdict::Inconclusive {
                                reason: format!("boundary point: {reason}"),
                            },
                            ladder: rep.ladder,
                            locus: Locus::Global,
                            k_est: k_global,
                            config_echo: cfg.echo(),
                        })
                    }
                    Verdict::Lne { .. } => {}
                }
            }
            Err(e) => {
                return Ok(LneReport {
                    verdict: Verdict::Inconclusive { reason: format!("boundary point: {e}") },
                    ladder,
                    locus: Locus::Global,
                    k_est: k_global,
                    config_echo: cfg.echo(),
                })
            }
        }
    }
    // global: scale key = projective distance to the nearest boundary point
    let key: Vec<f64> = cloud
        .points
        .iter()
        .map(|p| {
            boundary
                .iter()
                .map(|b| {
                    ambient_distance(AmbientMetric::Projective2, p, b).unwrap_or(f64::INFINITY)
                })
                .fold(std::f64::consts::FRAC_PI_2, f64::min)
                .max(1e-9)
        })
        .collect();
    match global_cloud_ratio(&cloud, &key, cfg)? {
        (k, Some(w)) => Ok(LneReport {
            verdict: Verdict::NotLne { witness: w, trend: ladder.clone() },
            ladder,
            locus: Locus::Global,
            k_est: k_global.max(k),
            config_echo: cfg.echo(),
        }),
        (k, None) => Ok(LneReport {
            verdict: Verdict::Lne { k_est: k_global.max(k) },
            ladder,
            locus: Locus::Global,
            k_est: k_global.max(k),
            config_echo: cfg.echo(),
        }),
    }
}

/// Ratio ladder of a plane set under the projective metric as the affine
/// radius cap grows; sustained growth refutes the projective LNE property.
pub fn projective_cap_ladder(
    d: &SetDescriptor,
    caps: &[f64],
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    let r_floor = cfg.radial_range.map(|(a, _)| a).unwrap_or(1.0);
    let mut entries = Vec::new();
    let mut best_witness: Option<WitnessPair> = None;
    let mut k_max = 0.0f64;
    for &cap in caps {
        let affine = sample_descriptor(d, cfg.budget, (r_floor, cap), cfg.seed)?;
        let mut cloud = Sample {
            points: Vec::with_capacity(affine.len()),
            provenance: Vec::new(),
            radial: Vec::new(),
            metric: AmbientMetric::Projective2,
        };
        for i in 0..affine.len() {
            cloud.push(projective_lift(&affine.points[i]), affine.provenance[i].clone());
        }
        // scale key: distance to the line at infinity (z-component of the lift)
        let key: Vec<f64> = cloud.points.iter().map(|p| p[2].abs().max(1e-12)).collect();
        let g = graph::build_graph_multiscale_keyed(&cloud, &key)?;
        let (k, w) = ratio_sup(&cloud, &g, cfg.pair_budget);
        if !w.is_infinite() {
            let better = match &best_witness {
                Some(b) => w.ratio.unwrap_or(0.0) > b.ratio.unwrap_or(0.0),
                None => true,
            };
            if better {
                best_witness = Some(w);
            }
            k_max = k_max.max(k);
            entries.push((cap, k));
        }
    }
    if entries.len() < 4 {
        return Err(Error::InsufficientTail("projective cap ladder too short".into()));
    }
    let quots: Vec<f64> = entries.windows(2).map(|w| w[1].1 / w[0].1.max(1e-12)).collect();
    let sustained = quots.iter().filter(|q| **q >= crate::analysis::SUSTAINED_MIN).count()
        >= quots.len().saturating_sub(1);
    let verdict = if sustained {
        Verdict::NotLne {
            witness: best_witness.expect("witness accompanies entries"),
            trend: entries.clone(),
        }
    } else {
        Verdict::Lne { k_est: k_max }
    };
    Ok(LneReport {
        verdict,
        ladder: entries,
        locus: Locus::Global,
        k_est: k_max,
        config_echo: cfg.echo(),
    })
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

/// How a corpus case is certified.
#[derive(Debug, Clone)]
pub enum CorpusLocus {
    Global { split: f64 },
    AtPoint { x0: Point, ladder: Vec<f64> },
    AtInfinity { ladder: Vec<f64> },
    ProjectiveClosure,
    ProjectiveCap { caps: Vec<f64> },
}

/// One frozen example with its expected verdict.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub name: String,
    pub descriptor: SetDescriptor,
    pub locus: CorpusLocus,
    pub expected: String,
    pub bound: Option<f64>,
    pub note: String,
    pub budget: Option<usize>,
    pub radial_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct CorpusRow {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub k_est: f64,
    pub bound: Option<f64>,
    pub bound_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct CorpusTable {
    pub rows: Vec<CorpusRow>,
}

impl CorpusTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass && r.bound_ok)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "all_pass": self.all_pass(),
            "rows": self.rows.iter().map(|r| json!({
                "name": r.name,
                "expected": r.expected,
                "got": r.got,
                "k_est": r.k_est,
                "bound": r.bound,
                "bound_ok": r.bound_ok,
                "pass": r.pass,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>9} {:>9} {:>10} {:>6}\n",
            "case", "expected", "got", "k_est", "pass"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<28} {:>9} {:>9} {:>10.4} {:>6}\n",
                r.name,
                r.expected,
                r.got,
                r.k_est,
                if r.pass && r.bound_ok { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}

/// Run one corpus case with its overrides applied to the base config.
pub fn run_case(case: &CorpusCase, base: &AnalysisConfig) -> Result<LneReport> {
    let mut cfg = base.clone();
    if let Some(b) = case.budget {
        cfg.budget = b;
    }
    if case.radial_range.is_some() {
        cfg.radial_range = case.radial_range;
    }
    match &case.locus {
        CorpusLocus::Global { split } => glue_certify(&case.descriptor, *split, &cfg),
        CorpusLocus::AtPoint { x0, ladder } => lne_at_point(&case.descriptor, x0, ladder, &cfg),
        CorpusLocus::AtInfinity { ladder } => lne_at_infinity(&case.descriptor, ladder, &cfg),
        CorpusLocus::ProjectiveClosure => {
            let range = cfg.radial_range.unwrap_or((0.05, 4096.0));
            projective_closure_report(&case.descriptor, range, &cfg)
        }
        CorpusLocus::ProjectiveCap { caps } => projective_cap_ladder(&case.descriptor, caps, &cfg),
    }
}

/// Execute every case; mismatches are reported in the table, never thrown.
pub fn run_corpus(cases: &[CorpusCase], base: &AnalysisConfig) -> CorpusTable {
    let rows = cases
        .iter()
        .map(|case| {
            let (got, k_est) = match run_case(case, base) {
                Ok(rep) => (rep.verdict.class().to_string(), rep.k_est),
                Err(e) => (format!("ERROR: {e}"), f64::NAN),
            };
            let bound_ok = match case.bound {
                Some(b) => k_est.is_finite() && k_est >= 1.0 - 1e-6 && k_est <= b,
                None => true,
            };
            CorpusRow {
                name: case.name.clone(),
                expected: case.expected.clone(),
                got: got.clone(),
                k_est,
                bound: case.bound,
                bound_ok,
                pass: got == case.expected,
            }
        })
        .collect();
    CorpusTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{ArcDomain, ParamArc};

    fn ray() -> SetDescriptor {
        let r = ParamArc::from_exprs("ray", &["t", "0"], ArcDomain::HalfLine(0.0), Some(0.0))
            .unwrap();
        SetDescriptor::arc_network(vec![r], vec![]).unwrap()
    }

    #[test]
    fn inversion_agrees_on_ray() {
        let cfg = AnalysisConfig { budget: 1200, ..Default::default() };
        let ladder = vec![1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3];
        let rep = verify_inversion(&ray(), &ladder, &cfg).unwrap();
        assert_eq!(rep.agree, Some(true), "left {:?} right {:?}", rep.left.verdict, rep.right.verdict);
        assert!(rep.left.verdict.is_lne());
    }

    #[test]
    fn chordal_formulas() {
        // |σ(x) − N| and |σ(x) − σ(0)| against direct evaluation
        for &r in &[0.3, 1.0, 7.5, 120.0] {
            let p = Point::from_slice(&[r, 0.0]);
            let y = stereo_to_sphere(&p);
            let n = north_pole(2);
            assert!((dist(y.coords(), n.coords()) - chordal_to_north(r)).abs() < 1e-12);
            let s0 = stereo_to_sphere(&Point::from_slice(&[0.0, 0.0]));
            assert!((dist(y.coords(), s0.coords()) - chordal_to_south(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn link_rows_on_parabola() {
        let right =
            ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let left =
            ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let d = SetDescriptor::arc_network(
            vec![right, left],
            vec![Point::from_slice(&[0.0, 0.0])],
        )
        .unwrap();
        let cfg = AnalysisConfig { budget: 1200, ..Default::default() };
        let rep = verify_link_criterion(&d, &[50.0, 100.0, 200.0, 400.0], 0.02, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 4);
        for row in &rep.rows {
            assert_eq!(row.pieces, 2, "two short transversal pieces per link");
            assert!(row.cross_flagged);
            assert!(row.k_max < 1.2, "k = {}", row.k_max);
        }
        assert!(rep.bounded(1.2));
    }

    #[test]
    fn empty_corpus_table() {
        let t = run_corpus(&[], &AnalysisConfig::default());
        assert!(t.rows.is_empty());
        assert!(t.all_pass());
    }
}
