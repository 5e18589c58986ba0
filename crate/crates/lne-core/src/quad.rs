//! Adaptive Simpson quadrature and arc length of parametrized curves.

use crate::descriptor::ParamArc;
use crate::error::{Error, Result};

/// Default absolute tolerance for arc-length integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
/// Refinement depth cap for the adaptive rule.
pub const MAX_QUAD_DEPTH: usize = 40;

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    estimate: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn adaptive<F>(f: &F, panel: Panel, tol: f64, depth: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let lm = 0.5 * (panel.a + panel.m);
    let rm = 0.5 * (panel.m + panel.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(panel.a, panel.m, panel.fa, flm, panel.fm);
    let right = simpson(panel.m, panel.b, panel.fm, frm, panel.fb);
    let refined = left + right;
    if (refined - panel.estimate).abs() <= 15.0 * tol {
        return Ok(refined + (refined - panel.estimate) / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { depth: MAX_QUAD_DEPTH });
    }
    let l = adaptive(
        f,
        Panel { a: panel.a, m: lm, b: panel.m, fa: panel.fa, fm: flm, fb: panel.fm, estimate: left },
        0.5 * tol,
        depth - 1,
    )?;
    let r = adaptive(
        f,
        Panel { a: panel.m, m: rm, b: panel.b, fa: panel.fm, fm: frm, fb: panel.fb, estimate: right },
        0.5 * tol,
        depth - 1,
    )?;
    Ok(l + r)
}

/// ∫_a^b f, adaptive Simpson with absolute tolerance `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let m = 0.5 * (lo + hi);
    let fa = f(lo)?;
    let fm = f(m)?;
    let fb = f(hi)?;
    let estimate = simpson(lo, hi, fa, fm, fb);
    let v = adaptive(&f, Panel { a: lo, m, b: hi, fa, fm, fb, estimate }, tol, MAX_QUAD_DEPTH)?;
    Ok(sign * v)
}

/// Length of `arc` over [a, b]: ∫ |γ'(t)| dt.
pub fn arc_length(arc: &ParamArc, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate(|t| arc.speed(t), a, b, tol)
}

/// Cumulative lengths along `params` (must be sorted increasing):
/// out[0] = 0, out[i] = length from params[0] to params[i].
///
/// Each gap uses one Simpson panel with a single refinement check and falls
/// back to the adaptive rule only when the two disagree, which keeps dense
/// scans cheap.
pub fn cumulative_lengths(arc: &ParamArc, params: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(params.len());
    out.push(0.0);
    let mut acc = 0.0;
    for w in params.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b < a {
            return Err(Error::Domain("cumulative_lengths needs sorted parameters".into()));
        }
        let seg = if b == a {
            0.0
        } else {
            let m = 0.5 * (a + b);
            let fa = arc.speed(a)?;
            let fm = arc.speed(m)?;
            let fb = arc.speed(b)?;
            let coarse = simpson(a, b, fa, fm, fb);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let refined =
                simpson(a, m, fa, arc.speed(lm)?, fm) + simpson(m, b, fm, arc.speed(rm)?, fb);
            if (refined - coarse).abs() <= 15.0 * tol.max(1e-12 * refined.abs()) {
                refined + (refined - coarse) / 15.0
            } else {
                arc_length(arc, a, b, tol)?
            }
        };
        acc += seg;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{ArcDomain, ParamArc};

    fn arc(x: &str, y: &str, dom: ArcDomain) -> ParamArc {
        ParamArc::from_exprs("a", &[x, y], dom, None).unwrap()
    }

    #[test]
    fn segment_length() {
        let a = arc("t", "0", ArcDomain::Bounded(0.0, 1.0));
        let l = arc_length(&a, 0.0, 1.0, 1e-9).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_circle_length() {
        let a = arc("cos(t)", "sin(t)", ArcDomain::Bounded(0.0, std::f64::consts::PI));
        let l = arc_length(&a, 0.0, std::f64::consts::PI, 1e-9).unwrap();
        assert!((l - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn spiral_length_closed_form() {
        let a = arc("exp(t)*cos(2*pi*t)", "exp(t)*sin(2*pi*t)", ArcDomain::HalfLine(0.0));
        let l = arc_length(&a, 0.0, 1.0, 1e-9).unwrap();
        let expect = (1.0 + 4.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt()
            * (std::f64::consts::E - 1.0);
        assert!((l - expect).abs() < 1e-6, "l = {l}, expect = {expect}");
    }

    #[test]
    fn monotone_in_interval_inclusion() {
        let a = arc("t", "t^2", ArcDomain::HalfLine(0.0));
        let l1 = arc_length(&a, 0.0, 2.0, 1e-9).unwrap();
        let l2 = arc_length(&a, 0.0, 3.0, 1e-9).unwrap();
        assert!(l2 > l1);
    }

    #[test]
    fn cumulative_matches_direct() {
        let a = arc("t", "t^2", ArcDomain::HalfLine(0.0));
        let params: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let cum = cumulative_lengths(&a, &params, 1e-10).unwrap();
        let direct = arc_length(&a, 0.0, 5.0, 1e-12).unwrap();
        assert!((cum.last().unwrap() - direct).abs() < 1e-7);
    }

    #[test]
    fn reversed_interval_is_negative() {
        let a = arc("t", "0", ArcDomain::Bounded(0.0, 1.0));
        let l = arc_length(&a, 1.0, 0.0, 1e-9).unwrap();
        assert!((l + 1.0).abs() < 1e-12);
    }
}
