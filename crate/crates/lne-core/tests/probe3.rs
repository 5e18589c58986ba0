// Scratch calibration probe; removed before delivery.
use lne_core::analysis::AnalysisConfig;
use lne_core::descriptor::{ArcDomain, ParamArc, SetDescriptor};
use lne_core::verify::{verify_compactification, verify_inversion};
use lne_core::Point;

fn net(arcs: Vec<ParamArc>, junctions: Vec<Point>) -> SetDescriptor {
    SetDescriptor::arc_network(arcs, junctions).unwrap()
}

fn cusp() -> SetDescriptor {
    net(
        vec![
            ParamArc::from_exprs("up", &["t", "t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
                .unwrap(),
            ParamArc::from_exprs("dn", &["t", "-t^1.5"], ArcDomain::Bounded(0.0, 1.0), None)
                .unwrap(),
        ],
        vec![Point::from_slice(&[0.0, 0.0])],
    )
}

fn ray() -> SetDescriptor {
    net(
        vec![ParamArc::from_exprs("ray", &["t", "0"], ArcDomain::HalfLine(0.0), Some(0.0)).unwrap()],
        vec![],
    )
}

fn half_circle() -> SetDescriptor {
    net(
        vec![ParamArc::from_exprs(
            "hc",
            &["1-cos(t)", "sin(t)"],
            ArcDomain::Bounded(-1.5707963267948966, 1.5707963267948966),
            None,
        )
        .unwrap()],
        vec![],
    )
}

fn inverted_spiral() -> SetDescriptor {
    net(
        vec![ParamArc::from_exprs(
            "inv_spiral",
            &["exp(-t)*cos(2*pi*t)", "exp(-t)*sin(2*pi*t)"],
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )
        .unwrap()],
        vec![],
    )
}

#[test]
#[ignore]
fn probe_inversion_cases() {
    let cfg = AnalysisConfig { budget: 3000, ..Default::default() };
    let ladder = vec![1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3];
    for (name, d) in [
        ("cusp", cusp()),
        ("ray", ray()),
        ("half_circle", half_circle()),
        ("inverted_spiral", inverted_spiral()),
    ] {
        let t0 = std::time::Instant::now();
        match verify_inversion(&d, &ladder, &cfg) {
            Ok(rep) => eprintln!(
                "{name}: left {} right {} agree {:?} in {:?}",
                rep.left.verdict.class(),
                rep.right.verdict.class(),
                rep.agree,
                t0.elapsed()
            ),
            Err(e) => eprintln!("{name}: ERROR {e}"),
        }
    }
}

#[test]
#[ignore]
fn probe_compactification_cases() {
    // spiral
    let spiral = net(
        vec![ParamArc::from_exprs(
            "spiral",
            &["exp(t)*cos(2*pi*t)", "exp(t)*sin(2*pi*t)"],
            ArcDomain::HalfLine(0.0),
            Some(0.0),
        )
        .unwrap()],
        vec![],
    );
    let cfg = AnalysisConfig {
        budget: 6000,
        radial_range: Some((1.0, 22026.465794806718)),
        ladder_doublings: 5,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    match verify_compactification(&spiral, (5.0f64).exp(), &cfg) {
        Ok(rep) => eprintln!(
            "spiral: left {} right {} agree {:?} in {:?}",
            rep.left.verdict.class(),
            rep.right.verdict.class(),
            rep.agree,
            t0.elapsed()
        ),
        Err(e) => eprintln!("spiral: ERROR {e}"),
    }
    // parabola
    let parabola = net(
        vec![
            ParamArc::from_exprs("right", &["t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap(),
            ParamArc::from_exprs("left", &["-t", "t^2"], ArcDomain::HalfLine(0.0), Some(1.0))
                .unwrap(),
        ],
        vec![Point::from_slice(&[0.0, 0.0])],
    );
    let cfg = AnalysisConfig {
        budget: 6000,
        radial_range: Some((0.05, 25600.0)),
        ladder_doublings: 7,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    match verify_compactification(&parabola, 100.0, &cfg) {
        Ok(rep) => eprintln!(
            "parabola: left {} right {} agree {:?} in {:?}",
            rep.left.verdict.class(),
            rep.right.verdict.class(),
            rep.agree,
            t0.elapsed()
        ),
        Err(e) => eprintln!("parabola: ERROR {e}"),
    }
    // unit circle via arcs (compact case)
    let circle = net(
        vec![ParamArc::from_exprs(
            "circle",
            &["cos(t)", "sin(t)"],
            ArcDomain::Bounded(0.0, 6.283185307179586),
            None,
        )
        .unwrap()],
        vec![],
    );
    let cfg = AnalysisConfig {
        budget: 2000,
        radial_range: Some((0.5, 2.0)),
        ladder_doublings: 4,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    match verify_compactification(&circle, 4.0, &cfg) {
        Ok(rep) => eprintln!(
            "circle: left {} right {} agree {:?} in {:?}",
            rep.left.verdict.class(),
            rep.right.verdict.class(),
            rep.agree,
            t0.elapsed()
        ),
        Err(e) => eprintln!("circle: ERROR {e}"),
    }
}
