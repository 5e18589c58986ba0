//! Exact inner distances through an arc network: within-arc lengths by
//! quadrature, passages through declared junctions by shortest path on the
//! finite station graph.

use crate::descriptor::{ParamArc, SetDescriptor};
use crate::error::{Error, Result};
use crate::quad;

/// A location on an arc network: arc label plus parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPoint {
    pub label: String,
    pub param: f64,
}

impl ArcPoint {
    pub fn new(label: &str, param: f64) -> ArcPoint {
        ArcPoint { label: label.to_string(), param }
    }
}

fn find_arc<'d>(arcs: &'d [ParamArc], label: &str) -> Result<(usize, &'d ParamArc)> {
    arcs.iter()
        .enumerate()
        .find(|(_, a)| a.label == label)
        .ok_or_else(|| Error::Domain(format!("no arc labelled `{label}` in the network")))
}

/// Exact inner distance between two points of an ARC_NETWORK descriptor:
/// the shortest combination of within-arc lengths and junction passages.
pub fn network_inner_distance(
    d: &SetDescriptor,
    p: &ArcPoint,
    q: &ArcPoint,
    tol: f64,
) -> Result<f64> {
    let arcs = d
        .arcs()
        .ok_or_else(|| Error::Domain("network distance needs an arc network".into()))?;
    let junctions = d.junctions();
    let (pi, p_arc) = find_arc(arcs, &p.label)?;
    let (qi, _) = find_arc(arcs, &q.label)?;
    if !p_arc.domain.contains(p.param) {
        return Err(Error::Domain(format!("parameter {} outside arc `{}`", p.param, p.label)));
    }
    if !arcs[qi].domain.contains(q.param) {
        return Err(Error::Domain(format!("parameter {} outside arc `{}`", q.param, q.label)));
    }

    // stations: per arc, the sorted list of (param, node id)
    // node ids: 0 = p, 1 = q, 2 + j = junction j
    let mut stations: Vec<Vec<(f64, usize)>> = vec![Vec::new(); arcs.len()];
    stations[pi].push((p.param, 0));
    stations[qi].push((q.param, 1));
    for (j, junction) in junctions.iter().enumerate() {
        for (ai, arc) in arcs.iter().enumerate() {
            for t in arc.attachments(junction.coords(), crate::descriptor::JUNCTION_TOL) {
                stations[ai].push((t, 2 + j));
            }
        }
    }
    let n_nodes = 2 + junctions.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
    for (ai, st) in stations.iter_mut().enumerate() {
        st.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in st.windows(2) {
            let ((t0, n0), (t1, n1)) = (w[0], w[1]);
            if n0 == n1 && (t1 - t0).abs() < 1e-12 {
                continue;
            }
            let len = quad::arc_length(&arcs[ai], t0, t1, tol)?;
            adj[n0].push((n1, len.abs()));
            adj[n1].push((n0, len.abs()));
        }
    }

    // Dijkstra over the tiny station graph
    let mut dist = vec![f64::INFINITY; n_nodes];
    dist[0] = 0.0;
    let mut visited = vec![false; n_nodes];
    for _ in 0..n_nodes {
        let u = (0..n_nodes)
            .filter(|&v| !visited[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap());
        let u = match u {
            Some(u) => u,
            None => break,
        };
        visited[u] = true;
        for &(v, w) in &adj[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    if dist[1].is_finite() {
        Ok(dist[1])
    } else {
        Err(Error::Unreachable(format!(
            "`{}`@{} and `{}`@{} lie in different network components",
            p.label, p.param, q.label, q.param
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{ArcDomain, ParamArc, SetDescriptor};
    use crate::geometry::Point;

    #[test]
    fn same_arc_segment() {
        let seg =
            ParamArc::from_exprs("seg", &["t", "0"], ArcDomain::Bounded(0.0, 1.0), None).unwrap();
        let d = SetDescriptor::arc_network(vec![seg], vec![]).unwrap();
        let l = network_inner_distance(&d, &ArcPoint::new("seg", 0.0), &ArcPoint::new("seg", 1.0), 1e-9)
            .unwrap();
        assert!((l - 1.0).abs() < 1e-10);
    }

    #[test]
    fn through_junction() {
        // two unit-speed rays from the origin at angle 2θ: forced path length 2
        let theta: f64 = 0.5;
        let r1 = ParamArc::from_exprs(
            "r1",
            &[&format!("t*{}", theta.cos()), &format!("t*{}", theta.sin())],
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )
        .unwrap();
        let r2 = ParamArc::from_exprs(
            "r2",
            &[&format!("t*{}", theta.cos()), &format!("-t*{}", theta.sin())],
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )
        .unwrap();
        let d = SetDescriptor::arc_network(vec![r1, r2], vec![Point::from_slice(&[0.0, 0.0])])
            .unwrap();
        let l = network_inner_distance(&d, &ArcPoint::new("r1", 1.0), &ArcPoint::new("r2", 1.0), 1e-9)
            .unwrap();
        assert!((l - 2.0).abs() < 1e-9, "l = {l}");
    }

    #[test]
    fn parabola_through_vertex() {
        let right =
            ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let left =
            ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap();
        let d = SetDescriptor::arc_network(vec![right, left], vec![Point::from_slice(&[0.0, 0.0])])
            .unwrap();
        let l = network_inner_distance(
            &d,
            &ArcPoint::new("right", 10.0),
            &ArcPoint::new("left", 10.0),
            1e-10,
        )
        .unwrap();
        // 2∫₀¹⁰ √(1+4u²) du, closed form as the independent check
        let closed = |t: f64| (t * (1.0 + 4.0 * t * t).sqrt()) / 2.0 + (2.0 * t).asinh() / 4.0;
        let expect = 2.0 * closed(10.0);
        assert!((l - expect).abs() < 1e-7, "l = {l}, expect = {expect}");
    }

    #[test]
    fn unreachable_components() {
        let a =
            ParamArc::from_exprs("a", &["t", "0"], ArcDomain::Bounded(0.0, 1.0), None).unwrap();
        let b =
            ParamArc::from_exprs("b", &["t", "5"], ArcDomain::Bounded(0.0, 1.0), None).unwrap();
        let d = SetDescriptor::arc_network(vec![a, b], vec![]).unwrap();
        let r =
            network_inner_distance(&d, &ArcPoint::new("a", 0.5), &ArcPoint::new("b", 0.5), 1e-9);
        assert!(matches!(r, Err(Error::Unreachable(_))));
    }
}
