// Scratch calibration probe; removed before delivery.
use lne_core::analysis::{glue_certify, AnalysisConfig};
use lne_core::descriptor::{ArcDomain, ParamArc, SetDescriptor};

fn spiral() -> SetDescriptor {
    let arc = ParamArc::from_exprs(
        "spiral",
        &["exp(t)*cos(2*pi*t)", "exp(t)*sin(2*pi*t)"],
        ArcDomain::HalfLine(0.0),
        Some(0.0),
    )
    .unwrap();
    SetDescriptor::arc_network(vec![arc], vec![]).unwrap()
}

#[test]
#[ignore]
fn probe_spiral_glue() {
    let e10 = (10.0f64).exp();
    let cfg = AnalysisConfig {
        budget: 10_000,
        radial_range: Some((1.0, e10)),
        ladder_doublings: 5,
        ..Default::default()
    };
    let split = (5.0f64).exp();
    let t0 = std::time::Instant::now();
    match glue_certify(&spiral(), split, &cfg) {
        Ok(rep) => {
            let ks: Vec<String> =
                rep.ladder.iter().map(|(s, k)| format!("{s:.1}:{k:.4}")).collect();
            eprintln!(
                "spiral glue: verdict {} k_est {:.4} bound {:.4} ladder [{}] in {:?}",
                rep.verdict.class(),
                rep.k_est,
                1.05 * (1.0f64 + 4.0 * std::f64::consts::PI.powi(2)).sqrt(),
                ks.join(" "),
                t0.elapsed()
            );
        }
        Err(err) => eprintln!("spiral glue ERROR: {err}"),
    }
}

#[test]
#[ignore]
fn probe_parabola_glue() {
    let right =
        ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0)).unwrap();
    let left =
        ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0)).unwrap();
    let d = SetDescriptor::arc_network(
        vec![right, left],
        vec![lne_core::Point::from_slice(&[0.0, 0.0])],
    )
    .unwrap();
    let cfg = AnalysisConfig {
        budget: 4000,
        radial_range: Some((0.05, 25600.0)),
        ladder_doublings: 7,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    match glue_certify(&d, 100.0, &cfg) {
        Ok(rep) => {
            eprintln!(
                "parabola glue: verdict {} k_est {:.3} in {:?}",
                rep.verdict.class(),
                rep.k_est,
                t0.elapsed()
            );
            if let lne_core::analysis::Verdict::NotLne { witness, trend } = &rep.verdict {
                eprintln!("  witness outer {:.4} inner {:?}", witness.outer, witness.inner);
                let ts: Vec<String> =
                    trend.iter().map(|(s, k)| format!("{s:.0}:{k:.3}")).collect();
                eprintln!("  trend [{}]", ts.join(" "));
            }
        }
        Err(err) => eprintln!("parabola glue ERROR: {err}"),
    }
}

#[test]
#[ignore]
fn probe_gamma() {
    // the three branches of the nodal cubic in the affine chart
    let gp = ParamArc::from_exprs(
        "gp",
        &["t", "1/((1-t)*(1+t))"],
        ArcDomain::HalfLine(1.0),
        None,
    )
    .unwrap();
    let gm = ParamArc::from_exprs(
        "gm",
        &["-t", "1/((1-t)*(1+t))"],
        ArcDomain::HalfLine(1.0),
        None,
    )
    .unwrap();
    let g0 =
        ParamArc::from_exprs("g0", &["t", "1/((1-t)*(1+t))"], ArcDomain::Bounded(-1.0, 1.0), None)
            .unwrap();
    let cfg = AnalysisConfig { budget: 4000, ..Default::default() };
    for (name, arc, split) in [("gamma_plus", gp, 8.0), ("gamma_minus", gm, 8.0)] {
        let d = SetDescriptor::arc_network(vec![arc], vec![]).unwrap();
        let cfg2 = AnalysisConfig {
            radial_range: Some((1.0, 4096.0)),
            ladder_doublings: 6,
            ..cfg.clone()
        };
        let t0 = std::time::Instant::now();
        match glue_certify(&d, split, &cfg2) {
            Ok(rep) => eprintln!(
                "{name}: verdict {} k_est {:.3} in {:?}",
                rep.verdict.class(),
                rep.k_est,
                t0.elapsed()
            ),
            Err(err) => eprintln!("{name}: ERROR {err}"),
        }
    }
    let d = SetDescriptor::arc_network(vec![g0], vec![]).unwrap();
    let ladder: Vec<f64> = (0..6).map(|i| 50.0 * 2f64.powi(i)).collect();
    let t0 = std::time::Instant::now();
    match lne_core::analysis::lne_at_infinity(&d, &ladder, &cfg) {
        Ok(rep) => eprintln!(
            "gamma_zero at infinity: verdict {} in {:?}",
            rep.verdict.class(),
            t0.elapsed()
        ),
        Err(err) => eprintln!("gamma_zero: ERROR {err}"),
    }
}

#[test]
#[ignore]
fn probe_parabola_reason() {
    let right =
        ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0)).unwrap();
    let left =
        ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0)).unwrap();
    let d = SetDescriptor::arc_network(
        vec![right, left],
        vec![lne_core::Point::from_slice(&[0.0, 0.0])],
    )
    .unwrap();
    let cfg = AnalysisConfig {
        budget: 4000,
        radial_range: Some((0.05, 25600.0)),
        ladder_doublings: 7,
        ..Default::default()
    };
    let rep = glue_certify(&d, 100.0, &cfg).unwrap();
    eprintln!("verdict {:?}", rep.verdict);
    eprintln!("ladder {:?}", rep.ladder);
}

#[test]
#[ignore]
fn probe_gamma_reason() {
    let gp = ParamArc::from_exprs(
        "gp",
        &["t", "1/((1-t)*(1+t))"],
        ArcDomain::HalfLine(1.0),
        None,
    )
    .unwrap();
    let d = SetDescriptor::arc_network(vec![gp], vec![]).unwrap();
    let cfg = AnalysisConfig {
        budget: 4000,
        radial_range: Some((1.0, 4096.0)),
        ladder_doublings: 6,
        ..Default::default()
    };
    let rep = glue_certify(&d, 8.0, &cfg).unwrap();
    eprintln!("verdict {:?}", rep.verdict);
    eprintln!("ladder {:?}", rep.ladder);
    let ladder: Vec<f64> = (0..7).map(|i| 8.0 * 2f64.powi(i)).collect();
    let inf = lne_core::analysis::lne_at_infinity(&d, &ladder, &cfg).unwrap();
    eprintln!("at-infinity verdict {:?}", inf.verdict);
    eprintln!("at-infinity ladder {:?}", inf.ladder);
}

#[test]
#[ignore]
fn probe_gamma_compact_graph() {
    use lne_core::sample::sample_descriptor;
    let gp = ParamArc::from_exprs(
        "gp",
        &["t", "1/((1-t)*(1+t))"],
        ArcDomain::HalfLine(1.0),
        None,
    )
    .unwrap();
    let d = SetDescriptor::arc_network(vec![gp], vec![]).unwrap();
    let s = sample_descriptor(&d, 4000, (1.0, 8.0), 0).unwrap();
    eprintln!("sample size {}", s.len());
    let g = lne_core::graph::build_graph_multiscale(&s).unwrap();
    eprintln!("components {}", g.n_components);
    let mut sizes = std::collections::BTreeMap::new();
    for i in 0..s.len() {
        sizes.entry(g.component_of(i)).or_insert_with(Vec::new).push(i);
    }
    for (c, idx) in &sizes {
        let params: Vec<f64> = idx
            .iter()
            .filter_map(|&i| match &s.provenance[i] {
                lne_core::sample::Provenance::Arc { param, .. } => Some(*param),
                _ => None,
            })
            .collect();
        let (lo, hi) = params.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
            (a.min(t), b.max(t))
        });
        let radii: Vec<f64> = idx.iter().map(|&i| s.radial[i]).collect();
        let (rlo, rhi) =
            radii.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        eprintln!(
            "comp {c}: {} pts, t in [{lo:.4}, {hi:.4}], r in [{rlo:.4}, {rhi:.4}]",
            idx.len()
        );
    }
}
