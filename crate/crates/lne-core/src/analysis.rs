//! Distortion estimation and the three-valued certification verdicts:
//! ratio suprema over pair schedules, dyadic band ladders at a point or at
//! infinity, the shared-asymptotic-direction obstruction, and the gluing
//! pipeline that combines them into a global verdict.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::descriptor::SetDescriptor;
use crate::error::{Error, Result};
use crate::geometry::{ambient_distance, dist, sub, AmbientMetric, Point, UnitDirection};
use crate::germ::{self, BandTrace, GermSide};
use crate::graph::{self, ProximityGraph};
use crate::network::{network_inner_distance, ArcPoint};
use crate::sample::{
    asymptotic_set, cluster_directions, sample_descriptor, Anchor, ComponentSplit, Provenance,
    Sample, DELTA_BIN_DEFAULT,
};

/// Divergence rule: this quotient sustained over `DIVERGENCE_RUNGS`
/// consecutive ladder gaps certifies NOT_LNE.
pub const DIVERGENCE_QUOTIENT: f64 = 1.4;
pub const DIVERGENCE_RUNGS: usize = 3;
/// Trailing-window fallback: every gap at least `SUSTAINED_MIN` and
/// geometric-mean gap at least `SUSTAINED_GEOMEAN` also certifies NOT_LNE.
pub const SUSTAINED_MIN: f64 = 1.2;
pub const SUSTAINED_GEOMEAN: f64 = 1.32;
/// Stability rule: last three rungs within this relative spread certify LNE.
pub const STABILITY_REL: f64 = 0.10;
/// An infinite-inner witness only counts when the pair's outer gap exceeds
/// this multiple of the graph scale (below that it is a sampling artifact).
pub const WITNESS_SEPARATION_FACTOR: f64 = 5.0;

/// Tuning knobs shared by the analyses. `Default` gives the documented
/// defaults; corpus cases override fields explicitly.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub budget: usize,
    pub pair_budget: usize,
    pub delta_bin: f64,
    pub seed: u64,
    /// Absolute feature resolution floor for at-infinity band sampling.
    pub h_target: f64,
    pub max_band_points: usize,
    /// Radial sampling range for global analyses; derived from the split
    /// radius when absent.
    pub radial_range: Option<(f64, f64)>,
    /// Number of dyadic doublings in derived ladders.
    pub ladder_doublings: usize,
    pub quad_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            budget: 5000,
            pair_budget: 2_000_000,
            delta_bin: DELTA_BIN_DEFAULT,
            seed: 0,
            h_target: 1.0,
            max_band_points: 60_000,
            radial_range: None,
            ladder_doublings: 5,
            quad_tol: 1e-9,
        }
    }
}

impl AnalysisConfig {
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "budget": self.budget,
            "pair_budget": self.pair_budget,
            "delta_bin_deg": self.delta_bin * 180.0 / std::f64::consts::PI,
            "seed": self.seed,
            "h_target": self.h_target,
            "max_band_points": self.max_band_points,
            "radial_range": self.radial_range.map(|(a, b)| vec![a, b]),
            "ladder_doublings": self.ladder_doublings,
            "eps_policy": "auto-multiscale",
        })
    }
}

/// A maximizing (or obstructing) pair of sample points.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessPair {
    pub a: Point,
    pub a_provenance: Provenance,
    pub b: Point,
    pub b_provenance: Provenance,
    pub outer: f64,
    /// None encodes an infinite inner distance.
    pub inner: Option<f64>,
    /// inner/outer when both finite.
    pub ratio: Option<f64>,
}

impl WitnessPair {
    fn new(
        a: Point,
        a_prov: Provenance,
        b: Point,
        b_prov: Provenance,
        outer: f64,
        inner: f64,
    ) -> WitnessPair {
        if inner.is_finite() {
            WitnessPair {
                a,
                a_provenance: a_prov,
                b,
                b_provenance: b_prov,
                outer,
                inner: Some(inner),
                ratio: Some(inner / outer),
            }
        } else {
            WitnessPair {
                a,
                a_provenance: a_prov,
                b,
                b_provenance: b_prov,
                outer,
                inner: None,
                ratio: None,
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.inner.is_none()
    }

    fn lex_key(&self) -> (Point, Point) {
        (self.a.clone(), self.b.clone())
    }
}

/// Where a report speaks about the set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Locus {
    Global,
    AtPoint(Point),
    AtInfinity,
}

/// Verdict of a certification run.
#[derive(Debug, Clone)]
pub enum Verdict {
    Lne { k_est: f64 },
    NotLne { witness: WitnessPair, trend: Vec<(f64, f64)> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn class(&self) -> &'static str {
        match self {
            Verdict::Lne { .. } => "LNE",
            Verdict::NotLne { .. } => "NOT_LNE",
            Verdict::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }

    pub fn is_lne(&self) -> bool {
        matches!(self, Verdict::Lne { .. })
    }

    pub fn is_not_lne(&self) -> bool {
        matches!(self, Verdict::NotLne { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }
}

/// Full certification report: verdict, the (scale, K) ladder behind it,
/// the locus and a configuration echo.
#[derive(Debug, Clone)]
pub struct LneReport {
    pub verdict: Verdict,
    pub ladder: Vec<(f64, f64)>,
    pub locus: Locus,
    pub k_est: f64,
    pub config_echo: serde_json::Value,
}

impl LneReport {
    pub fn to_json(&self) -> serde_json::Value {
        let (constant, witness, trend, reason) = match &self.verdict {
            Verdict::Lne { k_est } => (Some(*k_est), None, None, None),
            Verdict::NotLne { witness, trend } => {
                (None, Some(witness), Some(trend.clone()), None)
            }
            Verdict::Inconclusive { reason } => (None, None, None, Some(reason.clone())),
        };
        json!({
            "verdict": self.verdict.class(),
            "constant": constant,
            "k_est": self.k_est,
            "ladder": self.ladder.iter().map(|(s, k)| vec![*s, *k]).collect::<Vec<_>>(),
            "witness": witness.map(|w| serde_json::to_value(w).unwrap()),
            "trend": trend.map(|t| t.iter().map(|(s, k)| vec![*s, *k]).collect::<Vec<_>>()),
            "reason": reason,
            "locus": match &self.locus {
                Locus::Global => json!("global"),
                Locus::AtInfinity => json!("at-infinity"),
                Locus::AtPoint(p) => json!({"at-point": p.coords()}),
            },
            "config": self.config_echo,
        })
    }
}

// ---------------------------------------------------------------------------
// ratio_sup: supremum of inner/outer over a deterministic pair schedule
// ---------------------------------------------------------------------------

/// Deterministic farthest-point source schedule: starts at the
/// lexicographically smallest point, then repeatedly adds the point
/// farthest (ambient metric) from the chosen set.
pub fn farthest_point_sources(s: &Sample, count: usize) -> Vec<usize> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let count = count.min(n);
    let start = (0..n)
        .min_by(|&i, &j| s.points[i].lex_cmp(&s.points[j]))
        .unwrap();
    let mut chosen = vec![start];
    let mut min_dist: Vec<f64> = (0..n)
        .map(|i| ambient_distance(s.metric, &s.points[i], &s.points[start]).unwrap_or(0.0))
        .collect();
    while chosen.len() < count {
        let next = (0..n)
            .max_by(|&i, &j| {
                min_dist[i]
                    .partial_cmp(&min_dist[j])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| s.points[j].lex_cmp(&s.points[i]))
            })
            .unwrap();
        if min_dist[next] <= 0.0 {
            break;
        }
        chosen.push(next);
        for i in 0..n {
            let d = ambient_distance(s.metric, &s.points[i], &s.points[next]).unwrap_or(0.0);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
    }
    chosen
}

struct SourceScan {
    best_ratio: f64,
    best: Option<WitnessPair>,
    infinite: Option<WitnessPair>,
}

fn scan_source(s: &Sample, g: &ProximityGraph, src: usize) -> SourceScan {
    let d = graph::shortest_paths(g, src);
    let mut best_ratio = 0.0;
    let mut best: Option<(usize, f64, f64)> = None;
    let mut infinite: Option<(usize, f64)> = None;
    for j in 0..s.len() {
        if j == src {
            continue;
        }
        let outer = ambient_distance(s.metric, &s.points[src], &s.points[j])
            .unwrap_or(f64::INFINITY);
        if !(outer > 1e-300) || !outer.is_finite() {
            continue;
        }
        if d[j].is_finite() {
            let ratio = d[j] / outer;
            if ratio > best_ratio {
                best_ratio = ratio;
                best = Some((j, outer, d[j]));
            }
        } else {
            match infinite {
                Some((_, o)) if o <= outer => {}
                _ => infinite = Some((j, outer)),
            }
        }
    }
    let mk = |j: usize, outer: f64, inner: f64| {
        WitnessPair::new(
            s.points[src].clone(),
            s.provenance[src].clone(),
            s.points[j].clone(),
            s.provenance[j].clone(),
            outer,
            inner,
        )
    };
    SourceScan {
        best_ratio,
        best: best.map(|(j, o, i)| mk(j, o, i)),
        infinite: infinite.map(|(j, o)| mk(j, o, f64::INFINITY)),
    }
}

/// Maximum of inner/outer over the pair schedule: all pairs when
/// |V|² ≤ pair_budget, otherwise farthest-point-sampled sources against all
/// targets. Infinite ratios are reported through the witness flag.
///
/// Returns (K_est, maximizing witness). When an infinite-inner pair exists
/// the returned witness is that pair (flagged), K_est stays the maximal
/// finite ratio.
pub fn ratio_sup(s: &Sample, g: &ProximityGraph, pair_budget: usize) -> (f64, WitnessPair) {
    let n = s.len();
    assert!(n >= 2, "ratio_sup needs at least two points");
    let sources: Vec<usize> = if n * n <= pair_budget {
        (0..n).collect()
    } else {
        farthest_point_sources(s, (pair_budget / n).max(1))
    };
    let scans: Vec<SourceScan> =
        sources.par_iter().map(|&src| scan_source(s, g, src)).collect();
    let mut best_ratio = 0.0;
    let mut best: Option<WitnessPair> = None;
    let mut infinite: Option<WitnessPair> = None;
    for scan in scans {
        if scan.best_ratio > best_ratio
            || (scan.best_ratio == best_ratio
                && match (&scan.best, &best) {
                    (Some(a), Some(b)) => a.lex_key().0.lex_cmp(&b.lex_key().0).is_lt(),
                    (Some(_), None) => true,
                    _ => false,
                })
        {
            best_ratio = scan.best_ratio;
            best = scan.best;
        }
        if let Some(w) = scan.infinite {
            match &infinite {
                Some(cur) if cur.outer <= w.outer => {}
                _ => infinite = Some(w),
            }
        }
    }
    let witness = infinite.or(best.clone()).unwrap_or_else(|| {
        WitnessPair::new(
            s.points[0].clone(),
            s.provenance[0].clone(),
            s.points[1].clone(),
            s.provenance[1].clone(),
            ambient_distance(s.metric, &s.points[0], &s.points[1]).unwrap_or(0.0),
            0.0,
        )
    });
    (best_ratio, witness)
}

// ---------------------------------------------------------------------------
// ladder verdict rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum LadderCall {
    Diverging,
    Stable,
    Mixed(String),
}

fn ladder_call(entries: &[(f64, f64)]) -> LadderCall {
    if entries.len() < 2 {
        return LadderCall::Mixed("ladder too short".into());
    }
    let ks: Vec<f64> = entries.iter().map(|(_, k)| k.max(1e-12)).collect();
    let quotients: Vec<f64> = ks.windows(2).map(|w| w[1] / w[0]).collect();
    // spec rule: three consecutive gaps at or above the divergence quotient
    if quotients.len() >= DIVERGENCE_RUNGS {
        for w in quotients.windows(DIVERGENCE_RUNGS) {
            if w.iter().all(|q| *q >= DIVERGENCE_QUOTIENT) {
                return LadderCall::Diverging;
            }
        }
        // sustained-growth fallback over the trailing window
        let tail = &quotients[quotients.len() - DIVERGENCE_RUNGS..];
        let geomean = tail.iter().product::<f64>().powf(1.0 / tail.len() as f64);
        if tail.iter().all(|q| *q >= SUSTAINED_MIN) && geomean >= SUSTAINED_GEOMEAN {
            return LadderCall::Diverging;
        }
    }
    // stability over the last three rungs
    if ks.len() >= 3 {
        let tail = &ks[ks.len() - 3..];
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(0.0f64, f64::max);
        if hi / lo - 1.0 < STABILITY_REL {
            return LadderCall::Stable;
        }
        LadderCall::Mixed(format!(
            "last rungs vary by {:.1}% without sustained growth",
            (hi / lo - 1.0) * 100.0
        ))
    } else {
        LadderCall::Mixed("fewer than three rungs".into())
    }
}

// ---------------------------------------------------------------------------
// arc-exact band ladders
// ---------------------------------------------------------------------------

/// Max of (along-arc length)/(outer distance) over in-band pairs of a trace.
/// Exact inner distances: on a single arc side the only path is the curve.
fn trace_band_k(tr: &BandTrace, metric: AmbientMetric) -> Option<(f64, WitnessPair)> {
    let idx = &tr.in_band;
    let k = idx.len();
    if k < 2 {
        return None;
    }
    let window = 4096usize;
    let mut best = (0.0f64, 0usize, 0usize);
    let consider = |a: usize, b: usize, best: &mut (f64, usize, usize)| {
        let (ia, ib) = (idx[a], idx[b]);
        let inner = tr.cum_len[ib] - tr.cum_len[ia];
        let outer = match metric {
            AmbientMetric::Projective2 | AmbientMetric::Sphere(_) => {
                ambient_distance(metric, &tr.points[ia], &tr.points[ib]).unwrap_or(f64::INFINITY)
            }
            AmbientMetric::Euclidean(_) => dist(tr.points[ia].coords(), tr.points[ib].coords()),
        };
        if outer > 1e-300 {
            let r = inner / outer;
            if r > best.0 {
                *best = (r, ia, ib);
            }
        }
    };
    for a in 0..k {
        let hi = (a + window).min(k);
        for b in a + 1..hi {
            consider(a, b, &mut best);
        }
    }
    if k > window {
        let stride = (k / 2048).max(1);
        let dec: Vec<usize> = (0..k).step_by(stride).collect();
        for (ai, &a) in dec.iter().enumerate() {
            for &b in &dec[ai + 1..] {
                consider(a, b, &mut best);
            }
        }
    }
    let (ratio, ia, ib) = best;
    if ratio <= 0.0 {
        return None;
    }
    let w = WitnessPair::new(
        tr.points[ia].clone(),
        Provenance::Arc { label: tr.side_label.clone(), param: tr.params[ia] },
        tr.points[ib].clone(),
        Provenance::Arc { label: tr.side_label.clone(), param: tr.params[ib] },
        match metric {
            AmbientMetric::Euclidean(_) => dist(tr.points[ia].coords(), tr.points[ib].coords()),
            m => ambient_distance(m, &tr.points[ia], &tr.points[ib]).unwrap_or(f64::INFINITY),
        },
        tr.cum_len[ib] - tr.cum_len[ia],
    );
    Some((ratio, w))
}

struct SideAnalysis {
    side: GermSide,
    entries: Vec<(f64, f64)>,
    best_witness: Option<WitnessPair>,
    /// Direction clusters of the extreme band.
    extreme_dirs: Vec<UnitDirection>,
    /// Representative point (and parameter provenance) for the extreme band.
    extreme_repr: Option<(Point, Provenance)>,
    /// Per-rung representative points nearest the rung radius.
    rung_repr: Vec<Option<(Point, Provenance)>>,
}

fn band_point_count(
    d: &SetDescriptor,
    side: &GermSide,
    anchor: &[f64],
    r_lo: f64,
    r_hi: f64,
    cfg: &AnalysisConfig,
    at_point: bool,
) -> Result<usize> {
    let len = germ::band_length_estimate(d, side, anchor, r_lo, r_hi)?;
    let h = if at_point {
        (r_hi / 1000.0).max(1e-300)
    } else {
        cfg.h_target.max(r_hi / 1000.0)
    };
    Ok(((len / h).ceil() as usize).clamp(cfg.budget, cfg.max_band_points))
}

/// Analyze one germ side across the band ladder. `bands` lists
/// (rung_scale, r_lo, r_hi) triples; the extreme band is the last.
fn analyze_side(
    d: &SetDescriptor,
    side: &GermSide,
    anchor: &[f64],
    bands: &[(f64, f64, f64)],
    cfg: &AnalysisConfig,
    at_point: bool,
    metric: AmbientMetric,
) -> Result<SideAnalysis> {
    let mut entries = Vec::new();
    let mut best_witness: Option<WitnessPair> = None;
    let mut extreme_dirs = Vec::new();
    let mut extreme_repr = None;
    let mut rung_repr = Vec::new();
    for (bi, &(scale, r_lo, r_hi)) in bands.iter().enumerate() {
        let n = band_point_count(d, side, anchor, r_lo, r_hi, cfg, at_point)?;
        let tr = band_trace(d, side, anchor, r_lo, r_hi, n)?;
        let tr = match tr {
            Some(tr) if tr.in_band_count() >= 2 => tr,
            _ => {
                return Err(Error::InsufficientTail(format!(
                    "side {} has no points with radius in [{r_lo}, {r_hi}]",
                    side.label
                )))
            }
        };
        match trace_band_k(&tr, metric) {
            Some((k, w)) => {
                let better = match &best_witness {
                    Some(b) => w.ratio.unwrap_or(f64::INFINITY) > b.ratio.unwrap_or(f64::INFINITY),
                    None => true,
                };
                if better {
                    best_witness = Some(w);
                }
                entries.push((scale, k));
            }
            None => {
                return Err(Error::InsufficientTail(format!(
                    "side {} band at scale {scale} produced no valid pairs",
                    side.label
                )))
            }
        }
        // nearest-to-rung-scale representative
        let repr = tr
            .in_band
            .iter()
            .min_by(|&&i, &&j| {
                (tr.radii[i] - scale)
                    .abs()
                    .partial_cmp(&(tr.radii[j] - scale).abs())
                    .unwrap()
            })
            .map(|&i| {
                (
                    tr.points[i].clone(),
                    Provenance::Arc { label: tr.side_label.clone(), param: tr.params[i] },
                )
            });
        rung_repr.push(repr.clone());
        if bi + 1 == bands.len() {
            let dirs: Vec<UnitDirection> = tr
                .in_band
                .iter()
                .filter_map(|&i| {
                    UnitDirection::new(sub(tr.points[i].coords(), anchor)).ok()
                })
                .collect();
            if dirs.len() < crate::sample::N_MIN_TAIL {
                return Err(Error::InsufficientTail(format!(
                    "side {} extreme band has only {} directions",
                    side.label,
                    dirs.len()
                )));
            }
            extreme_dirs = cluster_directions(&dirs, cfg.delta_bin);
            extreme_repr = repr;
        }
    }
    Ok(SideAnalysis {
        side: side.clone(),
        entries,
        best_witness,
        extreme_dirs,
        extreme_repr,
        rung_repr,
    })
}

fn band_trace(
    d: &SetDescriptor,
    side: &GermSide,
    anchor: &[f64],
    r_lo: f64,
    r_hi: f64,
    n: usize,
) -> Result<Option<BandTrace>> {
    germ::band_trace(d, side, anchor, r_lo, r_hi, n)
}

/// Ladder radii → (rung_scale, band_lo, band_hi) triples.
/// Increasing ladders (at infinity) band upward; decreasing (at a point)
/// band downward toward the anchor.
fn bands_from_ladder(ladder: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    if ladder.len() < 2 {
        return Err(Error::Domain("ladder needs at least two rungs".into()));
    }
    let increasing = ladder[1] > ladder[0];
    for w in ladder.windows(2) {
        if increasing && w[1] <= w[0] || !increasing && w[1] >= w[0] {
            return Err(Error::Domain("ladder must be strictly monotone".into()));
        }
        if w[0] <= 0.0 || w[1] <= 0.0 {
            return Err(Error::Domain("ladder radii must be positive".into()));
        }
    }
    let m = ladder.len();
    let mut bands = Vec::with_capacity(m);
    for i in 0..m {
        let factor = if i + 1 < m {
            ladder[i + 1] / ladder[i]
        } else {
            ladder[m - 1] / ladder[m - 2]
        };
        let (lo, hi) = if increasing {
            (ladder[i], ladder[i] * factor)
        } else {
            (ladder[i] * factor, ladder[i])
        };
        bands.push((ladder[i], lo, hi));
    }
    Ok(bands)
}

/// Cross-side obstruction: two germ components whose extreme-band
/// directions coincide within the angular bin.
struct ObstructionHit {
    i: usize,
    j: usize,
    direction: UnitDirection,
}

fn find_obstruction(sides: &[SideAnalysis], delta_bin: f64) -> Option<ObstructionHit> {
    let mut best: Option<(f64, ObstructionHit)> = None;
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            for u in &sides[i].extreme_dirs {
                for v in &sides[j].extreme_dirs {
                    let ang = u.angle_to(v);
                    if ang <= delta_bin {
                        let mean = UnitDirection::new(
                            u.coords().iter().zip(v.coords()).map(|(a, b)| a + b).collect(),
                        )
                        .unwrap_or_else(|_| u.clone());
                        if best.as_ref().map(|(a, _)| ang < *a).unwrap_or(true) {
                            best = Some((ang, ObstructionHit { i, j, direction: mean }));
                        }
                    }
                }
            }
        }
    }
    best.map(|(_, hit)| hit)
}

/// Assemble the per-rung maxima over sides into the report ladder.
fn combined_ladder(sides: &[SideAnalysis]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for side in sides {
        for (i, &(scale, k)) in side.entries.iter().enumerate() {
            if out.len() <= i {
                out.push((scale, k));
            } else if k > out[i].1 {
                out[i].1 = k;
            }
        }
    }
    out
}

/// Certify the LNE property of the germ at infinity of an arc network along
/// a dyadic ladder: per germ-component band ladders plus the shared
/// asymptotic-direction obstruction across components.
pub fn lne_at_infinity(
    d: &SetDescriptor,
    ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    match d {
        SetDescriptor::ArcNetwork { .. } => {}
        SetDescriptor::Cloud { .. } => return cloud_germ_report(d, None, ladder, cfg),
        SetDescriptor::Implicit { .. } => {
            return Err(Error::Domain(
                "at-infinity analysis of implicit descriptors: sample to a cloud first".into(),
            ))
        }
    }
    if ladder.len() < 4 {
        return Err(Error::Domain("at-infinity ladder needs at least 4 rungs".into()));
    }
    let bands = bands_from_ladder(ladder)?;
    if bands[0].1 >= bands[bands.len() - 1].1 {
        return Err(Error::Domain("at-infinity ladder must increase".into()));
    }
    let metric = d.metric();
    let origin = vec![0.0; d.dim()];
    let top = bands.last().unwrap().2;
    let sides = germ::germ_sides_at_infinity(d, top * 2.0)?;
    let analyses: Vec<SideAnalysis> = sides
        .iter()
        .map(|s| analyze_side(d, s, &origin, &bands, cfg, false, metric))
        .collect::<Result<Vec<_>>>()?;
    finish_germ_report(d, analyses, ladder, cfg, Locus::AtInfinity)
}

/// Certify the LNE property of the germ at a point of an arc network along
/// a decreasing ladder of ball radii.
pub fn lne_at_point(
    d: &SetDescriptor,
    x0: &Point,
    ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    match d {
        SetDescriptor::ArcNetwork { .. } => {}
        SetDescriptor::Cloud { .. } => return cloud_germ_report(d, Some(x0), ladder, cfg),
        SetDescriptor::Implicit { .. } => {
            return Err(Error::Domain(
                "at-point analysis of implicit descriptors: use an arc form or a cloud".into(),
            ))
        }
    }
    if ladder.len() < 4 {
        return Err(Error::Domain("at-point ladder needs at least 4 rungs".into()));
    }
    let bands = bands_from_ladder(ladder)?;
    if !(bands[0].1 > bands[bands.len() - 1].1) {
        return Err(Error::Domain("at-point ladder must decrease".into()));
    }
    let metric = d.metric();
    let sides = germ::germ_sides_at_point(d, x0, bands.last().unwrap().1)?;
    let analyses: Vec<SideAnalysis> = sides
        .iter()
        .map(|s| analyze_side(d, s, x0.coords(), &bands, cfg, true, metric))
        .collect::<Result<Vec<_>>>()?;
    finish_germ_report(d, analyses, ladder, cfg, Locus::AtPoint(x0.clone()))
}

fn finish_germ_report(
    d: &SetDescriptor,
    analyses: Vec<SideAnalysis>,
    ladder: &[f64],
    cfg: &AnalysisConfig,
    locus: Locus,
) -> Result<LneReport> {
    let ladder_entries = combined_ladder(&analyses);
    let k_est = ladder_entries.iter().map(|(_, k)| *k).fold(0.0f64, f64::max);
    let echo = cfg.echo();

    // stage A: per-component divergence
    for side in &analyses {
        if ladder_call(&side.entries) == LadderCall::Diverging {
            let witness = side.best_witness.clone().ok_or_else(|| {
                Error::InsufficientTail(format!("no witness on side {}", side.side.label))
            })?;
            return Ok(LneReport {
                verdict: Verdict::NotLne { witness, trend: side.entries.clone() },
                ladder: ladder_entries,
                locus,
                k_est,
                config_echo: echo,
            });
        }
    }
    // stage B: shared-direction obstruction across components
    if analyses.len() >= 2 {
        if let Some(hit) = find_obstruction(&analyses, cfg.delta_bin) {
            let (wi, wj) = (&analyses[hit.i], &analyses[hit.j]);
            let witness = obstruction_witness(d, wi, wj, cfg);
            let trend = obstruction_trend(d, wi, wj, ladder, cfg);
            let _ = hit.direction;
            return Ok(LneReport {
                verdict: Verdict::NotLne { witness, trend },
                ladder: ladder_entries,
                locus,
                k_est,
                config_echo: echo,
            });
        }
    }
    // stage C: stability
    let calls: Vec<LadderCall> = analyses.iter().map(|s| ladder_call(&s.entries)).collect();
    if calls.iter().all(|c| *c == LadderCall::Stable) {
        return Ok(LneReport {
            verdict: Verdict::Lne { k_est },
            ladder: ladder_entries,
            locus,
            k_est,
            config_echo: echo,
        });
    }
    let reason = analyses
        .iter()
        .zip(&calls)
        .find_map(|(s, c)| match c {
            LadderCall::Mixed(m) => Some(format!("component {}: {m}", s.side.label)),
            _ => None,
        })
        .unwrap_or_else(|| "mixed ladder behaviour".into());
    Ok(LneReport {
        verdict: Verdict::Inconclusive { reason },
        ladder: ladder_entries,
        locus,
        k_est,
        config_echo: echo,
    })
}

/// Witness for an obstructed pair of germ components: the two extreme-band
/// representatives, with the exact through-network inner distance when the
/// network connects them (infinite otherwise).
fn obstruction_witness(
    d: &SetDescriptor,
    a: &SideAnalysis,
    b: &SideAnalysis,
    cfg: &AnalysisConfig,
) -> WitnessPair {
    let (pa, prov_a) = a.extreme_repr.clone().expect("extreme band representative");
    let (pb, prov_b) = b.extreme_repr.clone().expect("extreme band representative");
    let outer = dist(pa.coords(), pb.coords());
    let inner = cross_network_inner(d, &prov_a, &prov_b, cfg).unwrap_or(f64::INFINITY);
    WitnessPair::new(pa, prov_a, pb, prov_b, outer, inner)
}

fn cross_network_inner(
    d: &SetDescriptor,
    a: &Provenance,
    b: &Provenance,
    cfg: &AnalysisConfig,
) -> Option<f64> {
    let (la, ta) = match a {
        Provenance::Arc { label, param } => (label, *param),
        _ => return None,
    };
    let (lb, tb) = match b {
        Provenance::Arc { label, param } => (label, *param),
        _ => return None,
    };
    // side labels carry a suffix after the arc label: strip it
    let arc_a = la.split('[').next()?;
    let arc_b = lb.split('[').next()?;
    network_inner_distance(
        d,
        &ArcPoint::new(arc_a, ta),
        &ArcPoint::new(arc_b, tb),
        cfg.quad_tol.max(1e-8),
    )
    .ok()
}

/// Per-rung ratios of the obstructed pair: representatives nearest each rung
/// radius on the two sides, inner distance through the full network.
fn obstruction_trend(
    d: &SetDescriptor,
    a: &SideAnalysis,
    b: &SideAnalysis,
    ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &scale) in ladder.iter().enumerate() {
        let (ra, rb) = match (a.rung_repr.get(i), b.rung_repr.get(i)) {
            (Some(Some(ra)), Some(Some(rb))) => (ra, rb),
            _ => continue,
        };
        let outer = dist(ra.0.coords(), rb.0.coords());
        if outer <= 1e-300 {
            continue;
        }
        if let Some(inner) = cross_network_inner(d, &ra.1, &rb.1, cfg) {
            out.push((scale, inner / outer));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// cloud-mode germ ladders (samples without arc structure)
// ---------------------------------------------------------------------------

struct CloudBand {
    k: f64,
    witness: Option<WitnessPair>,
    /// (direction clusters, representative point) per component
    components: Vec<(Vec<UnitDirection>, (Point, Provenance))>,
}

fn cloud_band(
    s: &Sample,
    anchor: Option<&Point>,
    scale: f64,
    r_lo: f64,
    r_hi: f64,
    cfg: &AnalysisConfig,
) -> Result<CloudBand> {
    let anchor_dist = |p: &Point| -> f64 {
        match anchor {
            Some(x0) => ambient_distance(s.metric, p, x0).unwrap_or(f64::INFINITY),
            None => p.norm(),
        }
    };
    let idx: Vec<usize> = (0..s.len())
        .filter(|&i| {
            let r = anchor_dist(&s.points[i]);
            r >= r_lo && r <= r_hi
        })
        .collect();
    if idx.len() < 16 {
        return Err(Error::InsufficientTail(format!(
            "only {} cloud points with anchor distance in [{r_lo}, {r_hi}]",
            idx.len()
        )));
    }
    let band = Sample {
        points: idx.iter().map(|&i| s.points[i].clone()).collect(),
        provenance: idx.iter().map(|&i| s.provenance[i].clone()).collect(),
        radial: idx.iter().map(|&i| s.radial[i]).collect(),
        metric: s.metric,
    };
    let eps = graph::auto_eps(&band.points, band.metric);
    let g = graph::build_graph(&band, eps)?;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g.n_components];
    for i in 0..band.len() {
        groups[g.component_of(i) as usize].push(i);
    }
    groups.retain(|grp| grp.len() >= 8);
    if groups.is_empty() {
        return Err(Error::InsufficientTail(format!(
            "band at scale {scale} has no component with 8+ points"
        )));
    }
    groups.sort_by(|a, b| {
        band.points[a[0]].lex_cmp(&band.points[b[0]])
    });
    let mut k_best = 0.0;
    let mut witness = None;
    let mut components = Vec::new();
    for grp in &groups {
        let comp = Sample {
            points: grp.iter().map(|&i| band.points[i].clone()).collect(),
            provenance: grp.iter().map(|&i| band.provenance[i].clone()).collect(),
            radial: grp.iter().map(|&i| band.radial[i]).collect(),
            metric: band.metric,
        };
        let gg = graph::build_graph(&comp, eps)?;
        let (k, w) = ratio_sup(&comp, &gg, cfg.pair_budget);
        if k > k_best {
            k_best = k;
            witness = Some(w);
        }
        let dirs: Vec<UnitDirection> = comp
            .points
            .iter()
            .filter_map(|p| {
                let v = match anchor {
                    Some(x0) => sub(p.coords(), x0.coords()),
                    None => p.coords().to_vec(),
                };
                UnitDirection::new(v).ok()
            })
            .collect();
        let clusters = cluster_directions(&dirs, cfg.delta_bin);
        let repr = (comp.points[0].clone(), comp.provenance[0].clone());
        components.push((clusters, repr));
    }
    let _ = scale;
    Ok(CloudBand { k: k_best, witness, components })
}

fn cloud_germ_report(
    d: &SetDescriptor,
    x0: Option<&Point>,
    ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    let points = match d {
        SetDescriptor::Cloud { points, .. } => points.clone(),
        _ => unreachable!(),
    };
    let s = Sample::from_points(points, d.metric());
    cloud_germ_report_sample(&s, x0, ladder, cfg)
}

/// Band-ladder analysis of a plain sample around an anchor point (or
/// infinity): per-band component ratios plus the top-band direction
/// obstruction.
pub fn cloud_germ_report_sample(
    s: &Sample,
    x0: Option<&Point>,
    ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    if ladder.len() < 4 {
        return Err(Error::Domain("cloud germ ladder needs at least 4 rungs".into()));
    }
    let bands = bands_from_ladder(ladder)?;
    let mut entries = Vec::new();
    let mut best_witness: Option<WitnessPair> = None;
    let mut extreme: Option<CloudBand> = None;
    for &(scale, r_lo, r_hi) in &bands {
        let cb = cloud_band(s, x0, scale, r_lo, r_hi, cfg)?;
        entries.push((scale, cb.k));
        if let Some(w) = &cb.witness {
            let better = match &best_witness {
                Some(b) => w.ratio.unwrap_or(0.0) > b.ratio.unwrap_or(0.0),
                None => true,
            };
            if better {
                best_witness = Some(w.clone());
            }
        }
        extreme = Some(cb);
    }
    let locus = match x0 {
        Some(p) => Locus::AtPoint(p.clone()),
        None => Locus::AtInfinity,
    };
    let k_est = entries.iter().map(|(_, k)| *k).fold(0.0f64, f64::max);
    let echo = cfg.echo();
    // obstruction across top-band components
    if let Some(top) = &extreme {
        if top.components.len() >= 2 {
            for i in 0..top.components.len() {
                for j in i + 1..top.components.len() {
                    let (di, ri) = &top.components[i];
                    let (dj, rj) = &top.components[j];
                    let close = di
                        .iter()
                        .any(|u| dj.iter().any(|v| u.angle_to(v) <= cfg.delta_bin));
                    if close {
                        let outer = ambient_distance(s.metric, &ri.0, &rj.0)
                            .unwrap_or(f64::INFINITY);
                        let witness = WitnessPair::new(
                            ri.0.clone(),
                            ri.1.clone(),
                            rj.0.clone(),
                            rj.1.clone(),
                            outer,
                            f64::INFINITY,
                        );
                        return Ok(LneReport {
                            verdict: Verdict::NotLne { witness, trend: entries.clone() },
                            ladder: entries,
                            locus,
                            k_est,
                            config_echo: echo,
                        });
                    }
                }
            }
        }
    }
    match ladder_call(&entries) {
        LadderCall::Diverging => {
            let witness = best_witness.ok_or_else(|| {
                Error::InsufficientTail("diverging ladder without witness".into())
            })?;
            Ok(LneReport {
                verdict: Verdict::NotLne { witness, trend: entries.clone() },
                ladder: entries,
                locus,
                k_est,
                config_echo: echo,
            })
        }
        LadderCall::Stable => Ok(LneReport {
            verdict: Verdict::Lne { k_est },
            ladder: entries,
            locus,
            k_est,
            config_echo: echo,
        }),
        LadderCall::Mixed(reason) => Ok(LneReport {
            verdict: Verdict::Inconclusive { reason },
            ladder: entries,
            locus,
            k_est,
            config_echo: echo,
        }),
    }
}

// ---------------------------------------------------------------------------
// shared-direction obstruction on component splits
// ---------------------------------------------------------------------------

/// Outcome of the cross-component asymptotic-direction test.
#[derive(Debug, Clone)]
pub enum Obstruction {
    Obstructed { direction: UnitDirection, part_i: usize, part_j: usize },
    Clear,
}

/// Check whether two distinct parts of a component split share an
/// asymptotic direction within the angular bin.
pub fn shared_direction_obstruction(cs: &ComponentSplit, delta_bin: f64) -> Result<Obstruction> {
    if cs.parts.len() < 2 {
        return Err(Error::Domain("obstruction test needs at least two parts".into()));
    }
    let sets: Vec<Vec<UnitDirection>> = cs
        .parts
        .iter()
        .map(|p| asymptotic_set(p, Anchor::Infinity, delta_bin).map(|a| a.directions))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, usize, usize, UnitDirection)> = None;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for u in &sets[i] {
                for v in &sets[j] {
                    let ang = u.angle_to(v);
                    if ang <= delta_bin && best.as_ref().map(|(a, ..)| ang < *a).unwrap_or(true) {
                        let mean = UnitDirection::new(
                            u.coords().iter().zip(v.coords()).map(|(a, b)| a + b).collect(),
                        )
                        .unwrap_or_else(|_| u.clone());
                        best = Some((ang, i, j, mean));
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((_, i, j, direction)) => Obstruction::Obstructed { direction, part_i: i, part_j: j },
        None => Obstruction::Clear,
    })
}

// ---------------------------------------------------------------------------
// glue certification
// ---------------------------------------------------------------------------

fn default_point_ladder(r_lo: f64) -> Vec<f64> {
    vec![r_lo * 16.0, r_lo * 8.0, r_lo * 4.0, r_lo * 2.0, r_lo]
}

fn infinity_ladder(r0: f64, doublings: usize) -> Vec<f64> {
    (0..=doublings.max(3)).map(|i| r0 * 2f64.powi(i as i32)).collect()
}

/// Global certification pipeline: (1) ratio supremum over the compact part
/// below the split radius, with local ladders at junctions and accumulation
/// points; (2) per-component certification at infinity; (3) the shared
/// asymptotic-direction check. LNE only when every stage passes.
pub fn glue_certify(d: &SetDescriptor, split_radius: f64, cfg: &AnalysisConfig) -> Result<LneReport> {
    match d {
        SetDescriptor::ArcNetwork { .. } => glue_certify_network(d, split_radius, cfg),
        SetDescriptor::Cloud { .. } => {
            let s = match d {
                SetDescriptor::Cloud { points, .. } => {
                    Sample::from_points(points.clone(), d.metric())
                }
                _ => unreachable!(),
            };
            glue_certify_cloud(&s, split_radius, cfg)
        }
        SetDescriptor::Implicit { .. } => {
            let range = cfg.radial_range.unwrap_or((split_radius / 256.0, split_radius * 64.0));
            let s = sample_descriptor(d, cfg.budget, range, cfg.seed)?;
            glue_certify_cloud(&s, split_radius, cfg)
        }
    }
}

fn inconclusive(reason: String, ladder: Vec<(f64, f64)>, k: f64, cfg: &AnalysisConfig) -> LneReport {
    LneReport {
        verdict: Verdict::Inconclusive { reason },
        ladder,
        locus: Locus::Global,
        k_est: k,
        config_echo: cfg.echo(),
    }
}

/// Join each junction to the nearest sampled point on every incident arc
/// side, weighted by the exact along-arc length: the sampler's radial floor
/// leaves holes around junctions that the descriptor itself bridges.
fn stitch_junctions(d: &SetDescriptor, s: &Sample, g: &mut ProximityGraph) {
    let arcs = match d.arcs() {
        Some(a) => a,
        None => return,
    };
    for (ji, junction) in d.junctions().iter().enumerate() {
        // the junction's own vertex in the sample
        let jv = (0..s.len()).find(|&i| {
            matches!(&s.provenance[i], Provenance::Adjoined { label } if *label == format!("junction_{ji}"))
                || dist(s.points[i].coords(), junction.coords()) < 1e-12
        });
        let jv = match jv {
            Some(v) => v,
            None => continue,
        };
        for arc in arcs {
            for t_star in arc.attachments(junction.coords(), crate::descriptor::JUNCTION_TOL) {
                let mut below: Option<(usize, f64)> = None;
                let mut above: Option<(usize, f64)> = None;
                for i in 0..s.len() {
                    if let Provenance::Arc { label, param } = &s.provenance[i] {
                        if *label != arc.label {
                            continue;
                        }
                        if *param < t_star {
                            if below.map(|(_, t)| *param > t).unwrap_or(true) {
                                below = Some((i, *param));
                            }
                        } else if *param > t_star {
                            if above.map(|(_, t)| *param < t).unwrap_or(true) {
                                above = Some((i, *param));
                            }
                        }
                    }
                }
                for (i, t) in below.into_iter().chain(above) {
                    if let Ok(len) = crate::quad::arc_length(arc, t_star, t, 1e-9) {
                        g.add_edge(jv, i, len.abs());
                    }
                }
            }
        }
    }
}

fn glue_certify_network(
    d: &SetDescriptor,
    split_radius: f64,
    cfg: &AnalysisConfig,
) -> Result<LneReport> {
    let range = cfg.radial_range.unwrap_or((split_radius / 256.0, split_radius * 64.0));
    let r_floor = range.0;

    // stage 1: compact part below the split radius
    let compact = sample_descriptor(d, cfg.budget, (r_floor, split_radius), cfg.seed)?;
    let mut k_global = 0.0f64;
    let mut stage1_witness: Option<WitnessPair> = None;
    if compact.len() >= 2 {
        let mut g = graph::build_graph_multiscale(&compact)?;
        stitch_junctions(d, &compact, &mut g);
        let g = g;
        let (k, w) = ratio_sup(&compact, &g, cfg.pair_budget);
        k_global = k;
        if w.is_infinite() && w.outer > WITNESS_SEPARATION_FACTOR * g.eps {
            return Ok(LneReport {
                verdict: Verdict::NotLne { witness: w, trend: vec![(split_radius, k)] },
                ladder: vec![(split_radius, k)],
                locus: Locus::Global,
                k_est: k,
                config_echo: cfg.echo(),
            });
        }
        if w.is_infinite() {
            return Ok(inconclusive(
                format!(
                    "compact part disconnects at sampling scale (gap {:.3e} vs eps {:.3e})",
                    w.outer, g.eps
                ),
                vec![(split_radius, k)],
                k,
                cfg,
            ));
        }
        stage1_witness = Some(w);
    }
    let _ = stage1_witness;

    // stage 1': local ladders at junctions and at accumulation points
    let mut local_anchors: Vec<Point> = d.junctions().to_vec();
    if let Some(arcs) = d.arcs() {
        for arc in arcs {
            for side in arc.vanishing_ends(&vec![0.0; d.dim()], r_floor) {
                // limit point estimate: evaluate far along the vanishing side
                let t_probe = match (arc.domain, side) {
                    (crate::descriptor::ArcDomain::HalfLine(a), _) => {
                        let mut t = arc.t_mono.unwrap_or(a).max(a) + 1.0;
                        let mut step = 1.0;
                        for _ in 0..80 {
                            if let Some(r) = arc.radius_from(t + step, &vec![0.0; d.dim()]) {
                                if r < r_floor {
                                    break;
                                }
                            }
                            t += step;
                            step *= 2.0;
                        }
                        t + step
                    }
                    (crate::descriptor::ArcDomain::Bounded(a, b), crate::descriptor::EndSide::Lower) => {
                        a + (b - a) * 1e-9
                    }
                    (crate::descriptor::ArcDomain::Bounded(a, b), crate::descriptor::EndSide::Upper) => {
                        b - (b - a) * 1e-9
                    }
                };
                if let Ok(p) = arc.eval(t_probe) {
                    let limit: Vec<f64> =
                        p.coords().iter().map(|c| if c.abs() < r_floor { 0.0 } else { *c }).collect();
                    local_anchors.push(Point::new(limit)?);
                }
            }
        }
    }
    local_anchors.sort_by(|a, b| a.lex_cmp(b));
    local_anchors.dedup_by(|a, b| dist(a.coords(), b.coords()) < 1e-9);

    let mut local_reports = Vec::new();
    for anchor in &local_anchors {
        let ladder = default_point_ladder(r_floor.max(1e-12));
        match lne_at_point(d, anchor, &ladder, cfg) {
            Ok(rep) => local_reports.push((anchor.clone(), rep)),
            Err(Error::InsufficientTail(_)) | Err(Error::Domain(_)) => {
                // no germ mass at this anchor within range: skip
            }
            Err(e) => return Err(e),
        }
    }
    for (anchor, rep) in &local_reports {
        k_global = k_global.max(rep.k_est);
        match &rep.verdict {
            Verdict::NotLne { witness, trend } => {
                return Ok(LneReport {
                    verdict: Verdict::NotLne { witness: witness.clone(), trend: trend.clone() },
                    ladder: rep.ladder.clone(),
                    locus: Locus::Global,
                    k_est: k_global,
                    config_echo: cfg.echo(),
                })
            }
            Verdict::Inconclusive { reason } => {
                return Ok(inconclusive(
                    format!("local ladder at {:?}: {reason}", anchor.coords()),
                    rep.ladder.clone(),
                    k_global,
                    cfg,
                ))
            }
            Verdict::Lne { .. } => {}
        }
    }

    // stages 2 and 3: the germ at infinity (when the set is unbounded)
    let unbounded = !d.unbounded_ends(split_radius * 4.0).is_empty();
    if unbounded {
        let ladder = infinity_ladder(split_radius, cfg.ladder_doublings);
        let rep = lne_at_infinity(d, &ladder, cfg)?;
        k_global = k_global.max(rep.k_est);
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
                return Ok(inconclusive(
                    format!("at-infinity stage: {reason}"),
                    rep.ladder,
                    k_global,
                    cfg,
                ))
            }
            Verdict::Lne { .. } => {
                return Ok(LneReport {
                    verdict: Verdict::Lne { k_est: k_global },
                    ladder: rep.ladder,
                    locus: Locus::Global,
                    k_est: k_global,
                    config_echo: cfg.echo(),
                })
            }
        }
    }
    Ok(LneReport {
        verdict: Verdict::Lne { k_est: k_global },
        ladder: local_reports
            .first()
            .map(|(_, r)| r.ladder.clone())
            .unwrap_or_else(|| vec![(split_radius, k_global)]),
        locus: Locus::Global,
        k_est: k_global,
        config_echo: cfg.echo(),
    })
}

/// Cloud gluing: cumulative LE-slice ratio ladder with the infinite-witness
/// guard; divergence and stability rules apply to the cap ladder.
pub fn glue_certify_cloud(s: &Sample, split_radius: f64, cfg: &AnalysisConfig) -> Result<LneReport> {
    let rungs = infinity_ladder(split_radius, cfg.ladder_doublings);
    let mut entries = Vec::new();
    let mut best_witness: Option<WitnessPair> = None;
    let mut k_global = 0.0f64;
    for &cap in &rungs {
        let idx: Vec<usize> = (0..s.len()).filter(|&i| s.radial[i] <= cap).collect();
        if idx.len() < 16 {
            continue;
        }
        let sub = Sample {
            points: idx.iter().map(|&i| s.points[i].clone()).collect(),
            provenance: idx.iter().map(|&i| s.provenance[i].clone()).collect(),
            radial: idx.iter().map(|&i| s.radial[i]).collect(),
            metric: s.metric,
        };
        let g = graph::build_graph_multiscale(&sub)?;
        let (k, w) = ratio_sup(&sub, &g, cfg.pair_budget);
        if w.is_infinite() {
            if w.outer > WITNESS_SEPARATION_FACTOR * g.eps {
                return Ok(LneReport {
                    verdict: Verdict::NotLne { witness: w, trend: entries.clone() },
                    ladder: entries,
                    locus: Locus::Global,
                    k_est: k_global.max(k),
                    config_echo: cfg.echo(),
                });
            }
            return Ok(inconclusive(
                format!("slice at cap {cap} disconnects at sampling scale"),
                entries,
                k_global.max(k),
                cfg,
            ));
        }
        k_global = k_global.max(k);
        let better = match &best_witness {
            Some(b) => w.ratio.unwrap_or(0.0) > b.ratio.unwrap_or(0.0),
            None => true,
        };
        if better {
            best_witness = Some(w);
        }
        entries.push((cap, k));
    }
    if entries.len() < 3 {
        return Err(Error::InsufficientTail(
            "cloud glue ladder has fewer than three usable rungs".into(),
        ));
    }
    match ladder_call(&entries) {
        LadderCall::Diverging => {
            let witness = best_witness.expect("witness accompanies rungs");
            Ok(LneReport {
                verdict: Verdict::NotLne { witness, trend: entries.clone() },
                ladder: entries,
                locus: Locus::Global,
                k_est: k_global,
                config_echo: cfg.echo(),
            })
        }
        LadderCall::Stable => Ok(LneReport {
            verdict: Verdict::Lne { k_est: k_global },
            ladder: entries,
            locus: Locus::Global,
            k_est: k_global,
            config_echo: cfg.echo(),
        }),
        LadderCall::Mixed(reason) => Ok(inconclusive(reason, entries, k_global, cfg)),
    }
}

// ---------------------------------------------------------------------------
// cone constant and arc-pair ratios
// ---------------------------------------------------------------------------

/// Estimate the smallest C with inner distance to the origin ≤ C·|x|:
/// graph geodesic to the vertex nearest the origin plus its radial tag.
pub fn cone_constant(d: &SetDescriptor, cfg: &AnalysisConfig) -> Result<f64> {
    let range = cfg.radial_range.unwrap_or((1e-4, 1.0));
    let s = sample_descriptor(d, cfg.budget, range, cfg.seed)?;
    let mut g = graph::build_graph_multiscale(&s)?;
    stitch_junctions(d, &s, &mut g);
    let g = g;
    let v0 = (0..s.len())
        .min_by(|&i, &j| {
            s.radial[i]
                .partial_cmp(&s.radial[j])
                .unwrap()
                .then_with(|| s.points[i].lex_cmp(&s.points[j]))
        })
        .ok_or_else(|| Error::EmptySample("cone constant of an empty sample".into()))?;
    let dists = graph::shortest_paths(&g, v0);
    let mut c_est = 0.0f64;
    let mut reachable = false;
    for i in 0..s.len() {
        if i == v0 || s.radial[i] <= 0.0 {
            continue;
        }
        if dists[i].is_finite() {
            reachable = true;
            c_est = c_est.max((dists[i] + s.radial[v0]) / s.radial[i]);
        }
    }
    if !reachable {
        return Err(Error::Unreachable(
            "sample is disconnected from the origin region".into(),
        ));
    }
    Ok(c_est)
}

/// Ladder of inner/outer ratios for the pair (γ₁(s₁·t), γ₂(s₂·t)) along
/// `t_ladder`, with exact through-network inner distances.
pub fn arc_pair_ratio(
    d: &SetDescriptor,
    arc1: (&str, f64),
    arc2: (&str, f64),
    t_ladder: &[f64],
    cfg: &AnalysisConfig,
) -> Result<Vec<(f64, f64)>> {
    let arcs = d
        .arcs()
        .ok_or_else(|| Error::Domain("arc pair ratios need an arc network".into()))?;
    let find = |label: &str| -> Result<&crate::descriptor::ParamArc> {
        arcs.iter()
            .find(|a| a.label == label)
            .ok_or_else(|| Error::Domain(format!("no arc labelled `{label}`")))
    };
    let a1 = find(arc1.0)?;
    let a2 = find(arc2.0)?;
    let mut out = Vec::new();
    for &t in t_ladder {
        let (t1, t2) = (arc1.1 * t, arc2.1 * t);
        let p1 = a1.eval(t1)?;
        let p2 = a2.eval(t2)?;
        let outer = dist(p1.coords(), p2.coords());
        if outer <= 1e-300 {
            return Err(Error::Domain(format!("coincident pair at t = {t}")));
        }
        let inner = network_inner_distance(
            d,
            &ArcPoint::new(arc1.0, t1),
            &ArcPoint::new(arc2.0, t2),
            cfg.quad_tol,
        )?;
        out.push((t, inner / outer));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{ArcDomain, ParamArc};

    fn segment_sample(n: usize) -> Sample {
        let pts: Vec<Point> = (0..n)
            .map(|k| Point::from_slice(&[k as f64 / (n - 1) as f64, 0.0]))
            .collect();
        Sample::from_points(pts, AmbientMetric::Euclidean(2))
    }

    fn circle_sample(n: usize) -> Sample {
        let pts: Vec<Point> = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Point::from_slice(&[a.cos(), a.sin()])
            })
            .collect();
        Sample::from_points(pts, AmbientMetric::Euclidean(2))
    }

    #[test]
    fn segment_ratio_is_one() {
        let s = segment_sample(300);
        let g = graph::build_graph(&s, 0.02).unwrap();
        let (k, w) = ratio_sup(&s, &g, 10_000_000);
        assert!((k - 1.0).abs() < 1e-6, "k = {k}");
        assert!(!w.is_infinite());
    }

    #[test]
    fn circle_ratio_is_half_pi() {
        let s = circle_sample(1000);
        let eps = 3.0 * 2.0 * std::f64::consts::PI / 1000.0;
        let g = graph::build_graph(&s, eps).unwrap();
        let (k, _) = ratio_sup(&s, &g, 4_000_000);
        let expect = std::f64::consts::FRAC_PI_2;
        assert!((k - expect).abs() / expect < 0.02, "k = {k}");
    }

    #[test]
    fn ratio_sup_reports_infinite_witness() {
        let mut pts: Vec<Point> =
            (0..50).map(|k| Point::from_slice(&[k as f64 * 0.01, 0.0])).collect();
        pts.extend((0..50).map(|k| Point::from_slice(&[k as f64 * 0.01, 3.0])));
        let s = Sample::from_points(pts, AmbientMetric::Euclidean(2));
        let g = graph::build_graph(&s, 0.05).unwrap();
        let (_, w) = ratio_sup(&s, &g, 10_000_000);
        assert!(w.is_infinite());
        assert!((w.outer - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_rules() {
        // doubling ladder: divergence fires
        let lad: Vec<(f64, f64)> = (0..6).map(|i| (10.0 * 2f64.powi(i), 2f64.powi(i))).collect();
        assert_eq!(ladder_call(&lad), LadderCall::Diverging);
        // flat ladder: stable
        let lad: Vec<(f64, f64)> = (0..6).map(|i| (10.0 * 2f64.powi(i), 2.5)).collect();
        assert_eq!(ladder_call(&lad), LadderCall::Stable);
        // sqrt(2) growth with slight shrinkage still fires via the fallback
        let lad: Vec<(f64, f64)> =
            (0..6).map(|i| (10.0 * 2f64.powi(i), 1.39f64.powi(i))).collect();
        assert_eq!(ladder_call(&lad), LadderCall::Diverging);
        // erratic ladder: inconclusive
        let lad = vec![(10.0, 1.0), (20.0, 2.0), (40.0, 1.0), (80.0, 2.0)];
        assert!(matches!(ladder_call(&lad), LadderCall::Mixed(_)));
    }

    #[test]
    fn parabola_not_lne_at_infinity() {
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
        let cfg = AnalysisConfig { budget: 2000, ..Default::default() };
        let ladder: Vec<f64> = (0..7).map(|i| 100.0 * 2f64.powi(i)).collect();
        let rep = lne_at_infinity(&d, &ladder, &cfg).unwrap();
        assert!(rep.verdict.is_not_lne(), "verdict: {:?}", rep.verdict);
        if let Verdict::NotLne { witness, trend } = &rep.verdict {
            // obstruction witness carries the exact through-vertex distance
            assert!(witness.inner.is_some());
            assert!(trend.len() >= 3);
            let qs: Vec<f64> = trend.windows(2).map(|w| w[1].1 / w[0].1).collect();
            for q in qs {
                assert!(q > 1.2, "trend should grow, q = {q}");
            }
        }
    }

    #[test]
    fn line_is_lne_at_infinity() {
        let r1 =
            ParamArc::from_exprs("r1", &["t", "0"], ArcDomain::HalfLine(0.0), Some(0.0)).unwrap();
        let r2 =
            ParamArc::from_exprs("r2", &["-t", "0"], ArcDomain::HalfLine(0.0), Some(0.0)).unwrap();
        let d = SetDescriptor::arc_network(vec![r1, r2], vec![Point::from_slice(&[0.0, 0.0])])
            .unwrap();
        let cfg = AnalysisConfig { budget: 1500, ..Default::default() };
        let ladder: Vec<f64> = (0..5).map(|i| 10.0 * 2f64.powi(i)).collect();
        let rep = lne_at_infinity(&d, &ladder, &cfg).unwrap();
        assert!(rep.verdict.is_lne(), "verdict: {:?}", rep.verdict);
        if let Verdict::Lne { k_est } = rep.verdict {
            assert!(k_est < 1.05, "k = {k_est}");
        }
    }

    #[test]
    fn cusp_not_lne_at_origin() {
        let up = ParamArc::from_exprs("up", &["t", "t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
            .unwrap();
        let dn = ParamArc::from_exprs("dn", &["t", "-t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
            .unwrap();
        let d =
            SetDescriptor::arc_network(vec![up, dn], vec![Point::from_slice(&[0.0, 0.0])]).unwrap();
        let cfg = AnalysisConfig { budget: 1500, ..Default::default() };
        let ladder = vec![2e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4];
        let rep = lne_at_point(&d, &Point::from_slice(&[0.0, 0.0]), &ladder, &cfg).unwrap();
        assert!(rep.verdict.is_not_lne(), "verdict: {:?}", rep.verdict);
    }

    #[test]
    fn single_branch_lne_at_origin() {
        let up = ParamArc::from_exprs("up", &["t", "t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
            .unwrap();
        let d = SetDescriptor::arc_network(vec![up], vec![]).unwrap();
        let cfg = AnalysisConfig { budget: 1500, ..Default::default() };
        let ladder = vec![2e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4];
        let rep = lne_at_point(&d, &Point::from_slice(&[0.0, 0.0]), &ladder, &cfg).unwrap();
        assert!(rep.verdict.is_lne(), "verdict: {:?}", rep.verdict);
        assert!(rep.k_est < 1.1, "k = {}", rep.k_est);
    }

    #[test]
    fn arc_pair_ratio_parabola_linear() {
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
        let cfg = AnalysisConfig::default();
        let lad = arc_pair_ratio(&d, ("right", 1.0), ("left", 1.0), &[10.0, 20.0, 40.0, 80.0], &cfg)
            .unwrap();
        // closed-form check at t = 10
        let closed = |t: f64| (t * (1.0 + 4.0 * t * t).sqrt()) / 2.0 + (2.0 * t).asinh() / 4.0;
        let expect = 2.0 * closed(10.0) / 20.0;
        assert!((lad[0].1 - expect).abs() < 1e-6);
        for w in lad.windows(2) {
            let q = w[1].1 / w[0].1;
            assert!(q > 1.5 && q < 2.5, "q = {q}");
        }
    }

    #[test]
    fn cone_constant_of_rays() {
        let r1 =
            ParamArc::from_exprs("r1", &["t", "0"], ArcDomain::HalfLine(0.0), Some(0.0)).unwrap();
        let d = SetDescriptor::arc_network(vec![r1], vec![]).unwrap();
        let cfg = AnalysisConfig { budget: 800, radial_range: Some((1e-3, 1.0)), ..Default::default() };
        let c = cone_constant(&d, &cfg).unwrap();
        assert!(c >= 1.0 - 1e-9 && c < 1.05, "c = {c}");
    }
}
