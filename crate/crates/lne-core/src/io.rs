//! Structured-text input formats: descriptor files, point-cloud CSV and
//! corpus definitions.
//!
//! Descriptor files are line oriented, `key = value`, with `#` comments:
//!
//! ```text
//! kind = arc_network
//! dim = 2
//! arc right = t | t^2 ; domain = 0 .. inf ; mono_from = 1
//! junction = 0, 0
//! ```
//!
//! Implicit sets list polynomial terms as `term = <component> <coeff> <e1> ... <eq>`;
//! clouds list `point = x, y[, z]` rows.

use crate::descriptor::{ArcDomain, ParamArc, Poly, SetDescriptor};
use crate::error::{Error, Result};
use crate::geometry::{AmbientMetric, Point};
use crate::sample::Sample;
use crate::verify::{CorpusCase, CorpusLocus};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn split_kv(line: &str) -> Option<(&str, &str)> {
    line.split_once('=').map(|(k, v)| (k.trim(), v.trim()))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "pi" => Ok(std::f64::consts::PI),
        "-pi" => Ok(-std::f64::consts::PI),
        other => other
            .parse()
            .map_err(|_| parse_err(line, format!("expected a number, found `{other}`"))),
    }
}

fn parse_coords(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|c| parse_f64(c, line)).collect()
}

/// Parse a descriptor file.
pub fn parse_descriptor(text: &str) -> Result<SetDescriptor> {
    let mut kind: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut metric = None;
    let mut box_bound: Option<f64> = None;
    let mut arcs: Vec<ParamArc> = Vec::new();
    let mut junctions: Vec<Point> = Vec::new();
    let mut terms: Vec<(usize, f64, Vec<u32>)> = Vec::new();
    let mut points: Vec<Point> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match split_kv(line) {
            Some(kv) => kv,
            None => return Err(parse_err(line_no, format!("expected `key = value`, found `{line}`"))),
        };
        match key.split_whitespace().next().unwrap_or("") {
            "kind" => kind = Some(value.to_string()),
            "dim" => {
                dim = Some(
                    value
                        .parse()
                        .map_err(|_| parse_err(line_no, "dim must be a positive integer"))?,
                )
            }
            "metric" => {
                metric = Some(match value {
                    "euclidean" => None, // resolved by dim
                    "sphere" => Some("sphere"),
                    "projective" => Some("projective"),
                    other => {
                        return Err(parse_err(line_no, format!("unknown metric `{other}`")))
                    }
                })
            }
            "box" => box_bound = Some(parse_f64(value, line_no)?),
            "arc" => {
                // arc <label> = <expr> | <expr> ; domain = a .. b ; mono_from = t
                let label = key
                    .strip_prefix("arc")
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| parse_err(line_no, "arc needs a label: `arc <label> = ...`"))?;
                let mut sections = value.split(';');
                let exprs_part = sections
                    .next()
                    .ok_or_else(|| parse_err(line_no, "arc needs coordinate expressions"))?;
                let exprs: Vec<&str> = exprs_part.split('|').map(str::trim).collect();
                let mut domain: Option<ArcDomain> = None;
                let mut mono_from: Option<f64> = None;
                for sec in sections {
                    let (k, v) = split_kv(sec)
                        .ok_or_else(|| parse_err(line_no, format!("bad arc clause `{sec}`")))?;
                    match k {
                        "domain" => {
                            let (a, b) = v.split_once("..").ok_or_else(|| {
                                parse_err(line_no, "domain must be `<a> .. <b|inf>`")
                            })?;
                            let a = parse_f64(a, line_no)?;
                            let b = parse_f64(b, line_no)?;
                            domain = Some(if b.is_infinite() {
                                ArcDomain::HalfLine(a)
                            } else {
                                ArcDomain::Bounded(a, b)
                            });
                        }
                        "mono_from" => mono_from = Some(parse_f64(v, line_no)?),
                        other => {
                            return Err(parse_err(line_no, format!("unknown arc clause `{other}`")))
                        }
                    }
                }
                let domain = domain
                    .ok_or_else(|| parse_err(line_no, "arc is missing a `domain = a .. b` clause"))?;
                let arc = ParamArc::from_exprs(label, &exprs, domain, mono_from)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
                arcs.push(arc);
            }
            "junction" => {
                let coords = parse_coords(value, line_no)?;
                junctions
                    .push(Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?);
            }
            "term" => {
                let fields: Vec<&str> = value.split_whitespace().collect();
                if fields.len() < 3 {
                    return Err(parse_err(
                        line_no,
                        "term needs `<component> <coeff> <e1> ... <eq>`",
                    ));
                }
                let comp: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(line_no, "term component must be an integer"))?;
                let coeff = parse_f64(fields[1], line_no)?;
                let exps: Vec<u32> = fields[2..]
                    .iter()
                    .map(|f| {
                        f.parse()
                            .map_err(|_| parse_err(line_no, "exponents must be nonnegative integers"))
                    })
                    .collect::<Result<_>>()?;
                terms.push((comp, coeff, exps));
            }
            "point" => {
                let coords = parse_coords(value, line_no)?;
                points.push(Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?);
            }
            other => return Err(parse_err(line_no, format!("unknown key `{other}`"))),
        }
    }

    let kind = kind.ok_or_else(|| parse_err(0, "descriptor is missing `kind = ...`"))?;
    match kind.as_str() {
        "arc_network" => SetDescriptor::arc_network(arcs, junctions),
        "implicit" => {
            let dim = dim.ok_or_else(|| parse_err(0, "implicit descriptor needs `dim`"))?;
            let b = box_bound.ok_or_else(|| parse_err(0, "implicit descriptor needs `box`"))?;
            let n_comps = terms.iter().map(|(c, ..)| c + 1).max().unwrap_or(0);
            let mut polys = Vec::new();
            for c in 0..n_comps {
                let t: Vec<(f64, Vec<u32>)> = terms
                    .iter()
                    .filter(|(comp, ..)| *comp == c)
                    .map(|(_, coeff, exps)| (*coeff, exps.clone()))
                    .collect();
                polys.push(Poly::new(dim, t)?);
            }
            SetDescriptor::implicit(polys, b)
        }
        "cloud" => {
            let dim = dim.or_else(|| points.first().map(|p| p.dim())).unwrap_or(0);
            let m = match metric.flatten() {
                Some("sphere") => AmbientMetric::Sphere(dim.saturating_sub(1)),
                Some("projective") => AmbientMetric::Projective2,
                _ => AmbientMetric::Euclidean(dim),
            };
            SetDescriptor::cloud(points, m)
        }
        other => Err(parse_err(0, format!("unknown descriptor kind `{other}`"))),
    }
}

/// Point-cloud CSV: one point per row, q columns, optional header
/// `# dim=q metric=euclidean|sphere|projective`.
pub fn cloud_to_csv(s: &Sample) -> String {
    let metric = match s.metric {
        AmbientMetric::Euclidean(_) => "euclidean",
        AmbientMetric::Sphere(_) => "sphere",
        AmbientMetric::Projective2 => "projective",
    };
    let dim = s.points.first().map(|p| p.dim()).unwrap_or(0);
    let mut out = format!("# dim={dim} metric={metric}\n");
    for p in &s.points {
        let row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn cloud_from_csv(text: &str) -> Result<SetDescriptor> {
    let mut dim: Option<usize> = None;
    let mut metric_name = "euclidean".to_string();
    let mut points = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for field in header.split_whitespace() {
                if let Some((k, v)) = field.split_once('=') {
                    match k {
                        "dim" => {
                            dim = Some(v.parse().map_err(|_| {
                                parse_err(line_no, "header dim must be an integer")
                            })?)
                        }
                        "metric" => metric_name = v.to_string(),
                        _ => {}
                    }
                }
            }
            continue;
        }
        let coords = parse_coords(line, line_no)?;
        if let Some(d) = dim {
            if coords.len() != d {
                return Err(parse_err(
                    line_no,
                    format!("expected {d} columns, found {}", coords.len()),
                ));
            }
        }
        points.push(Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(parse_err(0, "cloud CSV contains no points"));
    }
    let d = dim.unwrap_or_else(|| points[0].dim());
    let metric = match metric_name.as_str() {
        "sphere" => AmbientMetric::Sphere(d.saturating_sub(1)),
        "projective" => AmbientMetric::Projective2,
        _ => AmbientMetric::Euclidean(d),
    };
    SetDescriptor::cloud(points, metric)
}

/// Parse a corpus definition. Cases are `[case]` blocks of `key = value`
/// lines; `descriptor = <name>` is resolved through the supplied lookup
/// (file loader or embedded-asset table).
pub fn parse_corpus(
    text: &str,
    resolve: &dyn Fn(&str) -> Result<String>,
) -> Result<Vec<CorpusCase>> {
    struct Block {
        start_line: usize,
        fields: Vec<(usize, String, String)>,
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[case]" {
            blocks.push(Block { start_line: line_no, fields: Vec::new() });
            continue;
        }
        let (k, v) = split_kv(line)
            .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, found `{line}`")))?;
        match blocks.last_mut() {
            Some(b) => b.fields.push((line_no, k.to_string(), v.to_string())),
            None => return Err(parse_err(line_no, "corpus entries must follow a `[case]` header")),
        }
    }
    let mut cases = Vec::new();
    for b in blocks {
        let get = |key: &str| -> Option<(usize, String)> {
            b.fields
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(ln, _, v)| (*ln, v.clone()))
        };
        let (_, name) =
            get("name").ok_or_else(|| parse_err(b.start_line, "case is missing `name`"))?;
        let (dln, dname) = get("descriptor")
            .ok_or_else(|| parse_err(b.start_line, "case is missing `descriptor`"))?;
        let dtext = resolve(&dname).map_err(|e| parse_err(dln, e.to_string()))?;
        let descriptor = parse_descriptor(&dtext)?;
        let ladder: Option<Vec<f64>> = match get("ladder") {
            Some((ln, v)) => Some(parse_ladder(&v, ln)?),
            None => None,
        };
        let (lln, locus_s) =
            get("locus").ok_or_else(|| parse_err(b.start_line, "case is missing `locus`"))?;
        let locus = match locus_s.split_whitespace().next().unwrap_or("") {
            "global" => {
                let split = locus_s
                    .split_whitespace()
                    .nth(1)
                    .ok_or_else(|| parse_err(lln, "locus global needs a split radius"))?;
                CorpusLocus::Global { split: parse_f64(split, lln)? }
            }
            "at-point" => {
                let coords: Vec<f64> = locus_s
                    .split_whitespace()
                    .skip(1)
                    .map(|c| parse_f64(c, lln))
                    .collect::<Result<_>>()?;
                CorpusLocus::AtPoint {
                    x0: Point::new(coords).map_err(|e| parse_err(lln, e.to_string()))?,
                    ladder: ladder
                        .clone()
                        .ok_or_else(|| parse_err(lln, "at-point locus needs a ladder"))?,
                }
            }
            "at-infinity" => CorpusLocus::AtInfinity {
                ladder: ladder
                    .clone()
                    .ok_or_else(|| parse_err(lln, "at-infinity locus needs a ladder"))?,
            },
            "projective-closure" => CorpusLocus::ProjectiveClosure,
            "projective-cap" => CorpusLocus::ProjectiveCap {
                caps: ladder
                    .clone()
                    .ok_or_else(|| parse_err(lln, "projective-cap locus needs a ladder"))?,
            },
            other => return Err(parse_err(lln, format!("unknown locus `{other}`"))),
        };
        let (eln, expected) =
            get("expect").ok_or_else(|| parse_err(b.start_line, "case is missing `expect`"))?;
        if expected != "LNE" && expected != "NOT_LNE" {
            return Err(parse_err(eln, "expect must be LNE or NOT_LNE"));
        }
        let bound = match get("bound") {
            Some((ln, v)) => Some(parse_f64(&v, ln)?),
            None => None,
        };
        let budget = match get("budget") {
            Some((ln, v)) => Some(
                v.parse::<usize>()
                    .map_err(|_| parse_err(ln, "budget must be a positive integer"))?,
            ),
            None => None,
        };
        let radial_range = match get("range") {
            Some((ln, v)) => {
                let fields: Vec<&str> = v.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(parse_err(ln, "range needs `<r_min> <r_max>`"));
                }
                Some((parse_f64(fields[0], ln)?, parse_f64(fields[1], ln)?))
            }
            None => None,
        };
        let note = get("note").map(|(_, v)| v).unwrap_or_default();
        cases.push(CorpusCase {
            name,
            descriptor,
            locus,
            expected,
            bound,
            note,
            budget,
            radial_range,
        });
    }
    Ok(cases)
}

fn parse_ladder(v: &str, ln: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = v.split_whitespace().collect();
    match fields.first().copied() {
        Some("geometric") => {
            if fields.len() != 4 {
                return Err(parse_err(ln, "ladder geometric needs `<r0> <factor> <count>`"));
            }
            let r0 = parse_f64(fields[1], ln)?;
            let factor = parse_f64(fields[2], ln)?;
            let count: usize = fields[3]
                .parse()
                .map_err(|_| parse_err(ln, "ladder count must be an integer"))?;
            if !(r0 > 0.0) || !(factor > 0.0) || factor == 1.0 || count < 2 {
                return Err(parse_err(ln, "ladder needs r0 > 0, factor != 1, count >= 2"));
            }
            Ok((0..count).map(|i| r0 * factor.powi(i as i32)).collect())
        }
        Some("list") => fields[1..].iter().map(|f| parse_f64(f, ln)).collect(),
        _ => Err(parse_err(ln, "ladder must start with `geometric` or `list`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARABOLA: &str = "\
kind = arc_network
dim = 2
arc right = t | t^2 ; domain = 0 .. inf ; mono_from = 1
arc left = -t | t^2 ; domain = 0 .. inf ; mono_from = 1
junction = 0, 0
";

    #[test]
    fn parse_arc_network() {
        let d = parse_descriptor(PARABOLA).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.arcs().unwrap().len(), 2);
        assert_eq!(d.junctions().len(), 1);
    }

    #[test]
    fn parse_implicit_circle() {
        let text = "\
kind = implicit
dim = 2
box = 2
term = 0 1 2 0
term = 0 1 0 2
term = 0 -1 0 0
";
        let d = parse_descriptor(text).unwrap();
        assert!(matches!(d, SetDescriptor::Implicit { .. }));
        assert!(d.membership_residual(&[1.0, 0.0]) < 1e-12);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "kind = arc_network\nbogus line without equals\n";
        match parse_descriptor(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn cloud_csv_roundtrip() {
        let text = "# dim=2 metric=euclidean\n1.0,2.0\n3.5,-0.25\n";
        let d = cloud_from_csv(text).unwrap();
        match &d {
            SetDescriptor::Cloud { points, .. } => assert_eq!(points.len(), 2),
            _ => panic!("expected cloud"),
        }
    }

    #[test]
    fn parse_corpus_block() {
        let corpus = "\
[case]
name = parabola_at_infinity
descriptor = parabola.desc
locus = at-infinity
ladder = geometric 100 2 7
expect = NOT_LNE
note = two branches share the upward direction
";
        let cases = parse_corpus(corpus, &|name| {
            if name == "parabola.desc" {
                Ok(PARABOLA.to_string())
            } else {
                Err(Error::Io(format!("unknown descriptor {name}")))
            }
        })
        .unwrap();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].expected, "NOT_LNE");
        match &cases[0].locus {
            CorpusLocus::AtInfinity { ladder } => assert_eq!(ladder.len(), 7),
            other => panic!("wrong locus {other:?}"),
        }
    }
}
