//! Numerical checks of the two-sided estimates the reiteration proofs lean
//! on: power times slowly varying norms, Hardy inequalities, the
//! quasi-concave `L̃_1` bound and the nested norm estimate for
//! nonincreasing functions.
//!
//! Every check runs on a padded copy of the grid, so that the norms over
//! `(0,∞)` see the decay of the integrand well past the reported range.
//! Whole-line norms become one sample per corpus function with `u = 0`.

use crate::corpus::Corpus;
use crate::error::Result;
use crate::gridfn::{nested_tilde_norms, primitive, tilde_norm, Grid, GridFunction, RiSpace, Side};
use crate::kfunctional::k_peetre;
use crate::report::{EquivalenceReport, Sample};
use crate::svfunc::SvExpr;

/// The grid extended by twice its cell count on each side, and the offset
/// of the original first node.
fn padded(grid: &Grid) -> (Grid, usize) {
    let extra = 2 * grid.cells();
    (grid.extend_left(extra).extend_right(extra), extra)
}

fn power_sv(grid: &Grid, alpha: f64, b: &SvExpr) -> Result<Vec<f64>> {
    Ok(b.sample(grid)?
        .into_iter()
        .zip(grid.points())
        .map(|(v, t)| t.powf(alpha) * v)
        .collect())
}

/// `‖s^α b(s)‖_{Ẽ(0,t)} / (t^α b(t))` (`Lower`) or
/// `‖s^{-α} b(s)‖_{Ẽ(t,∞)} / (t^{-α} b(t))` (`Upper`) on the grid interior.
pub fn power_sv_report(label: &str, b: &SvExpr, alpha: f64, e: RiSpace, side: Side, grids: &[Grid]) -> Result<EquivalenceReport> {
    let a = match side {
        Side::Lower => alpha,
        Side::Upper => -alpha,
    };
    let mut rows = Vec::new();
    for grid in grids {
        let (pg, off) = padded(grid);
        let g = GridFunction::new(pg, power_sv(&pg, a, b)?)?;
        let nested = nested_tilde_norms(&g, e, side)?;
        for i in grid.interior() {
            rows.push(Sample {
                function_id: label.to_string(),
                n: grid.cells(),
                u: grid.t(i),
                lhs: nested.values[off + i],
                rhs: g.values[off + i],
            });
        }
    }
    let id = format!("power-sv:{label}:alpha={alpha}:{}:{side:?}", q_label(e));
    Ok(EquivalenceReport::build(&id, truncation(grids), vec![label.to_string()], rows, None, Vec::new()))
}

fn q_label(e: RiSpace) -> String {
    if e.is_inf() {
        "Linf".into()
    } else {
        format!("L{}", 1.0 / e.inv_q())
    }
}

fn truncation(grids: &[Grid]) -> (f64, f64) {
    grids.first().map_or((0.0, 0.0), |g| (g.t_min, g.t_max))
}

fn corpus_ids(corpus: &Corpus) -> Vec<String> {
    corpus.members.iter().map(|m| m.id.clone()).collect()
}

/// Hardy inequalities for the corpus:
/// `‖t^{-α} b(t) ∫_0^t f‖_Ẽ` against `‖t^{1-α} b f‖_Ẽ` (`Lower`), and
/// `‖t^α b(t) ∫_t^∞ f‖_Ẽ` against `‖t^{1+α} b f‖_Ẽ` (`Upper`).
/// The left side is bounded by a constant times the right side.
pub fn hardy_report(side: Side, alpha: f64, label: &str, b: &SvExpr, e: RiSpace, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    let mut rows = Vec::new();
    for grid in grids {
        let (pg, _) = padded(grid);
        let bs = b.sample(&pg)?;
        let ts = pg.points();
        for m in &corpus.members {
            let f = m.sample(&pg)?;
            let p = primitive(&f);
            let total = *p.at_edges.last().unwrap();
            let (outer, inner): (Vec<f64>, Vec<f64>) = (0..pg.n)
                .map(|i| {
                    let t = ts[i];
                    match side {
                        Side::Lower => (t.powf(-alpha) * bs[i] * p.at_nodes[i], t.powf(1.0 - alpha) * bs[i] * f.values[i]),
                        Side::Upper => (
                            t.powf(alpha) * bs[i] * (total - p.at_nodes[i]).max(0.0),
                            t.powf(1.0 + alpha) * bs[i] * f.values[i],
                        ),
                    }
                })
                .unzip();
            rows.push(Sample {
                function_id: m.id.clone(),
                n: grid.cells(),
                u: 0.0,
                lhs: whole_norm(pg, outer, e)?,
                rhs: whole_norm(pg, inner, e)?,
            });
        }
    }
    let id = format!("hardy:{side:?}:alpha={alpha}:b={label}:{}", q_label(e));
    Ok(EquivalenceReport::build(&id, truncation(grids), corpus_ids(corpus), rows, None, Vec::new()))
}

fn whole_norm(grid: Grid, values: Vec<f64>, e: RiSpace) -> Result<f64> {
    tilde_norm(&GridFunction::new(grid, values)?, e, 0.0, f64::INFINITY)
}

/// For `φ = K(·, f)` (quasi-concave) and `g = s^α b φ`:
/// `‖g‖_{Ẽ(0,t)}` against `∫_0^t g ds/s` (`Lower`), or the same over
/// `(t,∞)` (`Upper`), at the interior nodes. One-sided like the Hardy check.
pub fn quasi_concave_report(side: Side, alpha: f64, label: &str, b: &SvExpr, e: RiSpace, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    let mut rows = Vec::new();
    for grid in grids {
        let (pg, off) = padded(grid);
        let w = power_sv(&pg, alpha, b)?;
        for m in &corpus.members {
            let phi = k_peetre(&m.sample(&pg)?)?;
            let g = GridFunction::new(pg, phi.values().iter().zip(&w).map(|(k, w)| k * w).collect())?;
            let lhs = nested_tilde_norms(&g, e, side)?;
            let rhs = nested_tilde_norms(&g, RiSpace::L1, side)?;
            for i in grid.interior() {
                rows.push(Sample {
                    function_id: m.id.clone(),
                    n: grid.cells(),
                    u: grid.t(i),
                    lhs: lhs.values[off + i],
                    rhs: rhs.values[off + i],
                });
            }
        }
    }
    let id = format!("quasi-concave:{side:?}:alpha={alpha}:b={label}:{}", q_label(e));
    Ok(EquivalenceReport::build(&id, truncation(grids), corpus_ids(corpus), rows, None, Vec::new()))
}

/// Parameters of the nested norm estimate
/// `‖t^β b(t) ‖s^α a(s) f(s)‖_{F̃(t,∞)}‖_Ẽ ∼ ‖t^{α+β} a b f‖_Ẽ`, `β > 0`.
#[derive(Debug, Clone)]
pub struct NestedCase {
    pub alpha: f64,
    pub beta: f64,
    pub a: (String, SvExpr),
    pub b: (String, SvExpr),
    pub e: RiSpace,
    pub f: RiSpace,
}

/// Both sides of the nested estimate for each (nonincreasing) corpus
/// function; the window is two-sided.
pub fn nested_report(c: &NestedCase, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    let mut rows = Vec::new();
    for grid in grids {
        let (pg, _) = padded(grid);
        let ts = pg.points();
        let av = c.a.1.sample(&pg)?;
        let bv = c.b.1.sample(&pg)?;
        for m in &corpus.members {
            let f = m.sample(&pg)?;
            let g = GridFunction::new(pg, (0..pg.n).map(|i| ts[i].powf(c.alpha) * av[i] * f.values[i]).collect())?;
            let tail = nested_tilde_norms(&g, c.f, Side::Upper)?;
            let outer = (0..pg.n).map(|i| ts[i].powf(c.beta) * bv[i] * tail.values[i]).collect();
            let inner = (0..pg.n)
                .map(|i| ts[i].powf(c.alpha + c.beta) * av[i] * bv[i] * f.values[i])
                .collect();
            rows.push(Sample {
                function_id: m.id.clone(),
                n: grid.cells(),
                u: 0.0,
                lhs: whole_norm(pg, outer, c.e)?,
                rhs: whole_norm(pg, inner, c.e)?,
            });
        }
    }
    let id = format!(
        "nested:alpha={}:beta={}:a={}:b={}:E={}:F={}",
        c.alpha,
        c.beta,
        c.a.0,
        c.b.0,
        q_label(c.e),
        q_label(c.f)
    );
    Ok(EquivalenceReport::build(&id, truncation(grids), corpus_ids(corpus), rows, None, Vec::new()))
}

/// Largest `lhs/rhs` over the usable samples of each grid size, in grid order.
pub fn one_sided_constants(r: &EquivalenceReport) -> Vec<f64> {
    r.grid_sizes
        .iter()
        .map(|&n| {
            r.per_function
                .iter()
                .filter(|s| s.n == n)
                .map(|s| s.ratio_max)
                .fold(f64::NAN, f64::max)
        })
        .collect()
}

/// The slowly varying weights of the checks, by label.
pub fn weights() -> Vec<(String, SvExpr)> {
    vec![
        ("1".into(), SvExpr::one()),
        ("ell".into(), SvExpr::ell(1.0)),
        ("ell^-1".into(), SvExpr::ell(-1.0)),
    ]
}

/// The four weights of the power times slowly varying check.
pub fn power_sv_weights() -> Vec<(String, SvExpr)> {
    let mut w = weights();
    w.push(("ell^(1,-1)".into(), SvExpr::broken(1.0, -1.0)));
    w
}

/// The sweep of the nested estimate: `α ∈ {1/2, 1}`, `β ∈ {1/4, 1}`,
/// `a ∈ {1, ℓ^{-1}}`, `b ∈ {1, ℓ}`, `E, F ∈ {L_1, L_∞}`. With `α + β > 1/2`
/// both sides stay finite for the standard corpus.
pub fn nested_sweep() -> Vec<NestedCase> {
    let mut out = Vec::new();
    for alpha in [0.5, 1.0] {
        for beta in [0.25, 1.0] {
            for a in [("1".to_string(), SvExpr::one()), ("ell^-1".to_string(), SvExpr::ell(-1.0))] {
                for b in [("1".to_string(), SvExpr::one()), ("ell".to_string(), SvExpr::ell(1.0))] {
                    for e in [RiSpace::L1, RiSpace::LINF] {
                        for f in [RiSpace::L1, RiSpace::LINF] {
                            out.push(NestedCase { alpha, beta, a: a.clone(), b: b.clone(), e, f });
                        }
                    }
                }
            }
        }
    }
    out
}
