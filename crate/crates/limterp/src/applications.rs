//! Concrete rearrangement-invariant spaces on `(0,1)` and the registry of
//! identities relating them to interpolation spaces of `(L₁, L∞)`.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{invalid, unknown_id, Error, Result};
use crate::gridfn::{double_star, nested_tilde_norms, tilde_norm, Exponent, Grid, GridFunction, RiSpace, Side};
use crate::kfunctional::{guarded_nested, guarded_norm};
use crate::reiteration::compare_norms;
use crate::report::EquivalenceReport;
use crate::spaces::{Region, Setting, SpaceDescriptor};
use crate::svfunc::SvExpr;

/// A weight `t^power · sv(t)` on `(0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowSv {
    pub power: f64,
    pub sv: SvExpr,
}

impl PowSv {
    pub fn new(power: f64, sv: SvExpr) -> Self {
        Self { power, sv }
    }

    fn ln_sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        Ok(self
            .sv
            .ln_sample(grid)?
            .into_iter()
            .zip(grid.log_points())
            .map(|(l, x)| l + self.power * x)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case", deny_unknown_fields)]
pub enum AppSpace {
    /// `sup_t ℓ^{-α/p}(t) ‖f*‖_{L_p(t,1)}`, inner norm against `ds`.
    GrandLp { p: f64, alpha: f64 },
    /// `∫_0^1 ℓ^{α/p'-1}(t) ‖f*‖_{L_p(0,t)} dt/t`.
    SmallLp { p: f64, alpha: f64 },
    /// `‖t^{1/p} b(t) f*(t)‖_Ẽ`.
    Ultra {
        p: f64,
        b: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
    },
    /// `‖ℓ^β f*‖_{L̃_q(0,1)}` with `E = L_q`.
    LinfQBeta {
        #[serde(rename = "E")]
        e: RiSpace,
        beta: f64,
    },
    /// `(∫_0^1 w₁(t) (∫_0^t w₂ (f*)^p ds)^{q/p} dt)^{1/q}`.
    #[serde(rename = "ggamma")]
    GGamma { p: f64, q: f64, w1: PowSv, w2: PowSv },
    /// `‖ℓ^{α-1}(t) ∫_t^1 s^{1/p} f**(s) ds/s‖_Ẽ`.
    #[serde(rename = "a_type")]
    AType {
        p: f64,
        alpha: f64,
        #[serde(rename = "E")]
        e: RiSpace,
    },
    /// `‖sup_{s<t} s^{1/p} ℓ^{α-1}(s) f**(s)‖_Ẽ`.
    #[serde(rename = "b_type")]
    BType {
        p: f64,
        alpha: f64,
        #[serde(rename = "E")]
        e: RiSpace,
    },
}

/// A named finiteness condition: region and truncated mass.
pub type AppCondition = (String, Region, Box<dyn Fn(&Grid) -> Result<f64> + Sync>);

fn q_mass(norm: f64, e: RiSpace) -> f64 {
    match e.q {
        Exponent::Inf => norm,
        Exponent::Finite(q) => norm.powf(q),
    }
}

impl AppSpace {
    /// Parameter ranges, plus the weight conditions of the Gamma spaces.
    pub fn validate(&self) -> Result<()> {
        use AppSpace::*;
        let gt1 = |name: &str, p: f64| {
            if p > 1.0 && p.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("need 1 < {name} < inf, got {p}")))
            }
        };
        match self {
            GrandLp { p, alpha } | SmallLp { p, alpha } => {
                gt1("p", *p)?;
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(invalid("alpha", "must be positive"));
                }
            }
            Ultra { p, b, .. } => {
                if !(*p >= 1.0 && p.is_finite()) {
                    return Err(invalid("p", "need 1 <= p < inf"));
                }
                b.validate()?;
            }
            LinfQBeta { e, beta } => {
                let ok = match e.q {
                    Exponent::Inf => *beta <= 0.0,
                    Exponent::Finite(q) => beta + 1.0 / q < 0.0,
                };
                if !ok {
                    return Err(invalid("beta", "need beta + 1/q < 0 (beta <= 0 for q = inf)"));
                }
            }
            GGamma { p, q, w1, w2 } => {
                if !(*p >= 1.0 && p.is_finite()) {
                    return Err(invalid("p", "need 1 <= p < inf"));
                }
                if !(*q >= 1.0 && q.is_finite()) {
                    return Err(invalid("q", "need 1 <= q < inf"));
                }
                w1.sv.validate()?;
                w2.sv.validate()?;
                for (name, region, mass) in self.conditions()? {
                    let (ok, _) = crate::spaces::finite_by_truncation(region, mass)?;
                    if !ok {
                        return Err(Error::Hypothesis(format!("weight condition {name} fails")));
                    }
                }
            }
            AType { p, alpha, .. } | BType { p, alpha, .. } => {
                gt1("p", *p)?;
                if !(*alpha < 1.0) {
                    return Err(invalid("alpha", "need alpha < 1"));
                }
            }
        }
        Ok(())
    }

    /// Finiteness conditions attached to the space.
    pub fn conditions(&self) -> Result<Vec<AppCondition>> {
        let mut out: Vec<AppCondition> = Vec::new();
        match self.clone() {
            AppSpace::AType { alpha, e, .. } => {
                let w = SvExpr::ell(alpha - 1.0);
                out.push((
                    format!("‖ℓ^(α-1)‖_{}~(0,1)", crate::spaces::sp(e)),
                    Region::Low,
                    Box::new(move |g: &Grid| {
                        let gf = GridFunction::new(*g, w.sample(g)?)?;
                        Ok(q_mass(tilde_norm(&gf, e, 0.0, f64::INFINITY)?, e))
                    }),
                ));
            }
            AppSpace::GGamma { p, q, w1, w2 } => {
                // L^p(w₂) ↪ L¹ needs w₂^{-1/(p-1)} integrable (w₂ bounded
                // below when p = 1).
                let w2c = w2.clone();
                out.push((
                    "(c1) L^p(w2) embeds in L^1".into(),
                    Region::Low,
                    Box::new(move |g: &Grid| {
                        let lw = w2c.ln_sample(g)?;
                        if p == 1.0 {
                            let v = lw.iter().map(|l| (-l).exp()).collect();
                            return tilde_norm(&GridFunction::new(*g, v)?, RiSpace::LINF, 0.0, f64::INFINITY);
                        }
                        let v = lw
                            .iter()
                            .zip(g.log_points())
                            .map(|(l, x)| (x - l / (p - 1.0)).exp())
                            .collect();
                        tilde_norm(&GridFunction::new(*g, v)?, RiSpace::L1, 0.0, f64::INFINITY)
                    }),
                ));
                out.push((
                    "(c2) ∫_0^t w2 belongs to L^(q/p)(w1)".into(),
                    Region::Low,
                    Box::new(move |g: &Grid| {
                        let l2 = w2.ln_sample(g)?;
                        let v: Vec<f64> = l2.iter().zip(g.log_points()).map(|(l, x)| (l + x).exp()).collect();
                        let prim = nested_tilde_norms(&GridFunction::new(*g, v)?, RiSpace::L1, Side::Lower)?;
                        let l1 = w1.ln_sample(g)?;
                        let outer: Vec<f64> = l1
                            .iter()
                            .zip(g.log_points())
                            .zip(&prim.values)
                            .map(|((l, x), s)| (l + x).exp() * s.powf(q / p))
                            .collect();
                        tilde_norm(&GridFunction::new(*g, outer)?, RiSpace::L1, 0.0, f64::INFINITY)
                    }),
                ));
            }
            _ => {}
        }
        Ok(out)
    }
}

/// Norm of `f` in `s`, from its decreasing rearrangement on `(0,1)`.
pub fn norm_app(fstar: &GridFunction, s: &AppSpace) -> Result<f64> {
    s.validate()?;
    PreparedApp::new(s, &fstar.grid)?.eval(fstar)
}

#[derive(Debug, Clone)]
enum AppNode {
    /// Inner running norm of `w_in · f*` (or `w_in · f**`), outer norm of
    /// `w_out · inner`.
    Nested {
        use_fss: bool,
        w_in: Vec<f64>,
        f: RiSpace,
        side: Side,
        w_out: Vec<f64>,
        e: RiSpace,
    },
    Plain {
        w: Vec<f64>,
        e: RiSpace,
    },
}

/// An application space with its weights sampled on a grid.
#[derive(Debug, Clone)]
pub struct PreparedApp {
    grid: Grid,
    node: AppNode,
}

fn exp_all(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(f64::exp).collect()
}

impl PreparedApp {
    pub fn new(s: &AppSpace, grid: &Grid) -> Result<Self> {
        use AppSpace::*;
        let xs = grid.log_points();
        let ell = |a: f64| SvExpr::ell(a).sample(grid);
        let pw = |r: f64| -> Vec<f64> { xs.iter().map(|x| (r * x).exp()).collect() };
        let node = match s {
            GrandLp { p, alpha } => AppNode::Nested {
                use_fss: false,
                w_in: pw(1.0 / p),
                f: RiSpace::lq(*p)?,
                side: Side::Upper,
                w_out: ell(-alpha / p)?,
                e: RiSpace::LINF,
            },
            SmallLp { p, alpha } => {
                let pp = p / (p - 1.0);
                AppNode::Nested {
                    use_fss: false,
                    w_in: pw(1.0 / p),
                    f: RiSpace::lq(*p)?,
                    side: Side::Lower,
                    w_out: ell(alpha / pp - 1.0)?,
                    e: RiSpace::L1,
                }
            }
            Ultra { p, b, e } => {
                let lb = b.ln_sample(grid)?;
                AppNode::Plain {
                    w: exp_all(lb.iter().zip(&xs).map(|(l, x)| l + x / p).collect()),
                    e: *e,
                }
            }
            LinfQBeta { e, beta } => AppNode::Plain {
                w: ell(*beta)?,
                e: *e,
            },
            GGamma { p, q, w1, w2 } => {
                let l2 = w2.ln_sample(grid)?;
                let l1 = w1.ln_sample(grid)?;
                AppNode::Nested {
                    use_fss: false,
                    w_in: exp_all(l2.iter().zip(&xs).map(|(l, x)| (l + x) / p).collect()),
                    f: RiSpace::lq(*p)?,
                    side: Side::Lower,
                    w_out: exp_all(l1.iter().zip(&xs).map(|(l, x)| (l + x) / q).collect()),
                    e: RiSpace::lq(*q)?,
                }
            }
            AType { p, alpha, e } => AppNode::Nested {
                use_fss: true,
                w_in: pw(1.0 / p),
                f: RiSpace::L1,
                side: Side::Upper,
                w_out: ell(alpha - 1.0)?,
                e: *e,
            },
            BType { p, alpha, e } => {
                let l = ell(alpha - 1.0)?;
                AppNode::Nested {
                    use_fss: true,
                    w_in: pw(1.0 / p).into_iter().zip(l).map(|(a, b)| a * b).collect(),
                    f: RiSpace::LINF,
                    side: Side::Lower,
                    w_out: vec![1.0; grid.n],
                    e: *e,
                }
            }
        };
        Ok(Self { grid: *grid, node })
    }

    pub fn eval(&self, fstar: &GridFunction) -> Result<f64> {
        if fstar.grid != self.grid {
            return Err(invalid("fstar", "sampled on a different grid than the space"));
        }
        let g = &self.grid;
        let mul = |w: &[f64], v: &[f64]| -> Vec<f64> { w.iter().zip(v).map(|(a, b)| a * b).collect() };
        match &self.node {
            AppNode::Plain { w, e } => guarded_norm(g, &mul(w, &fstar.values), *e, 0.0, 1.0, true, false),
            AppNode::Nested { use_fss, w_in, f, side, w_out, e } => {
                let base = if *use_fss {
                    double_star(fstar)?.values
                } else {
                    fstar.values.clone()
                };
                let Some(inner) = guarded_nested(g, &mul(w_in, &base), *f, *side, 1.0, false)? else {
                    return Ok(f64::INFINITY);
                };
                guarded_norm(g, &mul(w_out, &inner), *e, 0.0, 1.0, true, false)
            }
        }
    }
}

// Identity registry.

/// Scenario ids in registry order.
pub const SCENARIO_IDS: [&str; 20] = [
    "ultra-as-theta",
    "grand-as-R",
    "small-as-L",
    "small-dual-limit",
    "grand-vs-ultra-interior",
    "grand-vs-ultra-theta0",
    "grand-vs-ultra-theta1",
    "small-grand-interior",
    "small-grand-theta0",
    "small-grand-theta1",
    "llogl-grand",
    "l1-grand",
    "small-ultra",
    "small-linfq",
    "small-linf",
    "ggamma-ultra",
    "a-type-ultra",
    "b-type-ultra",
    "b-as-limit-of-A",
    "ultra-between-AB",
];

/// Scenarios whose outer parameter is an interior `θ` the caller may set.
const INTERIOR: [&str; 10] = [
    "grand-vs-ultra-interior",
    "small-grand-interior",
    "llogl-grand",
    "l1-grand",
    "small-ultra",
    "small-linfq",
    "small-linf",
    "ggamma-ultra",
    "a-type-ultra",
    "b-type-ultra",
];

pub const DEFAULT_THETA: f64 = 0.5;

/// Both sides of an identity as descriptors on `(0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub theta: Option<f64>,
    pub lhs: SpaceDescriptor,
    pub rhs: SpaceDescriptor,
}

const U: Setting = Setting::Unit;

fn app(s: AppSpace) -> SpaceDescriptor {
    SpaceDescriptor::app(s)
}

fn ultra(p: f64, b: SvExpr, e: RiSpace) -> SpaceDescriptor {
    app(AppSpace::Ultra { p, b, e })
}

fn grand(p: f64, alpha: f64) -> SpaceDescriptor {
    app(AppSpace::GrandLp { p, alpha })
}

fn small(p: f64, alpha: f64) -> SpaceDescriptor {
    app(AppSpace::SmallLp { p, alpha })
}

fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `(y0, y1)_{θ,b,E}` on `(0,1)`, through the oracle K of the couple.
fn interp(y0: SpaceDescriptor, y1: SpaceDescriptor, theta: f64, b: SvExpr, e: RiSpace) -> SpaceDescriptor {
    SpaceDescriptor::over(y0, y1, SpaceDescriptor::theta(theta, b, e, U))
}

/// `1/p = (1-θ)/p₀ + θ/p₁`.
fn mix(p0: f64, p1: f64, theta: f64) -> f64 {
    1.0 / ((1.0 - theta) / p0 + theta / p1)
}

/// Builds the scenario `id`. `theta` is accepted only by the interior
/// identities and defaults to 1/2 there.
pub fn scenario(id: &str, theta: Option<f64>) -> Result<Scenario> {
    if !SCENARIO_IDS.contains(&id) {
        return Err(unknown_id(id, SCENARIO_IDS));
    }
    let th = if INTERIOR.contains(&id) {
        let th = theta.unwrap_or(DEFAULT_THETA);
        if !(th > 0.0 && th < 1.0) {
            return Err(invalid("theta", format!("{id} needs 0 < theta < 1")));
        }
        Some(th)
    } else if theta.is_some() {
        return Err(Error::Input(format!("scenario {id} has no theta parameter")));
    } else {
        None
    };
    let t = th.unwrap_or(DEFAULT_THETA);
    let (l2, l1, linf) = (RiSpace::L2, RiSpace::L1, RiSpace::LINF);
    let ell = SvExpr::ell;
    let one = SvExpr::one;
    let (lhs, rhs) = match id {
        "ultra-as-theta" => (ultra(2.0, one(), l2), SpaceDescriptor::theta(0.5, one(), l2, U)),
        "grand-as-R" => {
            let (p, a) = (2.0, 1.0);
            let rhs = SpaceDescriptor::r(1.0 - 1.0 / p, ell(-a / p), linf, one(), RiSpace::lq(p)?, U);
            (grand(p, a), rhs)
        }
        "small-as-L" => {
            let (p, a) = (2.0, 1.0);
            let rhs = SpaceDescriptor::l(1.0 - 1.0 / p, ell(a / conj(p) - 1.0), l1, one(), RiSpace::lq(p)?, U);
            (small(p, a), rhs)
        }
        "small-dual-limit" => {
            let (p0, p1, a, b) = (2.0, 4.0, 1.0, 1.0);
            let lp0 = ultra(p0, one(), RiSpace::lq(p0)?);
            (interp(lp0, grand(p1, b), 0.0, ell(a / conj(p0) - 1.0), l1), small(p0, a))
        }
        "grand-vs-ultra-interior" | "grand-vs-ultra-theta0" | "grand-vs-ultra-theta1" => {
            let (p0, p1, beta) = (2.0, 4.0, 1.0);
            let (b0, e0) = (one(), l2);
            let y0 = ultra(p0, b0.clone(), e0);
            let y1 = grand(p1, beta);
            // ρ(u) = u^{1/p₀-1/p₁} b₀(u) ℓ^{β/p₁}(u)
            let gamma = 1.0 / p0 - 1.0 / p1;
            let rho_sv = b0.clone().mul(ell(beta / p1));
            match id {
                "grand-vs-ultra-interior" => {
                    let b = one();
                    let w = SvExpr::product(vec![b0.pow(1.0 - t), ell(-beta * t / p1), b.clone().compose(gamma, rho_sv)?]);
                    (interp(y0, y1, t, b, l2), ultra(mix(p0, p1, t), w, l2))
                }
                "grand-vs-ultra-theta0" => {
                    let b = one();
                    let rhs = SpaceDescriptor::l(1.0 - 1.0 / p0, b.clone().compose(gamma, rho_sv)?, l2, b0, e0, U);
                    (interp(y0, y1, 0.0, b, l2), rhs)
                }
                _ => {
                    let b = ell(-1.0);
                    let b_rho = b.clone().compose(gamma, rho_sv)?;
                    let pq = RiSpace::lq(p1)?;
                    let rhs = SpaceDescriptor::intersection(vec![
                        SpaceDescriptor::r(1.0 - 1.0 / p1, ell(-beta / p1).mul(b_rho.clone()), l2, one(), pq, U),
                        SpaceDescriptor::rr(1.0 - 1.0 / p1, b_rho, l2, ell(-beta / p1), linf, one(), pq, U),
                    ]);
                    (interp(y0, y1, 1.0, b, l2), rhs)
                }
            }
        }
        "small-grand-interior" | "small-grand-theta0" | "small-grand-theta1" => {
            let (p0, p1, a, beta, r) = (2.0, 4.0, 1.0, 1.0, 2.0);
            let er = RiSpace::lq(r)?;
            let y0 = small(p0, a);
            let y1 = grand(p1, beta);
            match id {
                "small-grand-interior" => {
                    let big_a = a * (1.0 - t) / conj(p0) - beta * t / p1;
                    (interp(y0, y1, t, one(), er), ultra(mix(p0, p1, t), ell(big_a), er))
                }
                "small-grand-theta0" => {
                    let lp0 = ultra(p0, one(), RiSpace::lq(p0)?);
                    let rhs = SpaceDescriptor::intersection(vec![
                        SpaceDescriptor::l(1.0 - 1.0 / p0, ell(a / conj(p0)), er, one(), RiSpace::lq(p0)?, U),
                        SpaceDescriptor::over(
                            lp0,
                            grand(p1, beta),
                            SpaceDescriptor::l(0.0, one(), er, ell(a / conj(p0) - 1.0), l1, U),
                        ),
                    ]);
                    (interp(y0, y1, 0.0, one(), er), rhs)
                }
                _ => {
                    let b = ell(-1.0);
                    let b_rho = b.clone().compose(1.0 / p0 - 1.0 / p1, ell(a / conj(p0) + beta / p1))?;
                    let pq = RiSpace::lq(p1)?;
                    let rhs = SpaceDescriptor::intersection(vec![
                        SpaceDescriptor::r(1.0 - 1.0 / p1, ell(-beta / p1).mul(b_rho.clone()), l2, one(), pq, U),
                        SpaceDescriptor::rr(1.0 - 1.0 / p1, b_rho, l2, ell(-beta / p1), linf, one(), pq, U),
                    ]);
                    (interp(y0, y1, 1.0, b, l2), rhs)
                }
            }
        }
        "llogl-grand" => {
            let (p1, beta) = (2.0, 1.0);
            let llogl = SpaceDescriptor::theta(0.0, one(), l1, U);
            let w = ell(1.0 - t - beta * t / p1);
            (interp(llogl, grand(p1, beta), t, one(), l2), ultra(1.0 / (1.0 - t + t / p1), w, l2))
        }
        "l1-grand" => {
            let (p1, beta) = (2.0, 1.0);
            let w = ell(-beta * t / p1);
            (interp(ultra(1.0, one(), l1), grand(p1, beta), t, one(), l2), ultra(1.0 / (1.0 - t + t / p1), w, l2))
        }
        "small-ultra" => {
            let (p0, p1, a) = (2.0, 4.0, 1.0);
            let b1 = one();
            let w = ell(a * (1.0 - t) / conj(p0)).mul(b1.clone().pow(t));
            (interp(small(p0, a), ultra(p1, b1, l2), t, one(), l2), ultra(mix(p0, p1, t), w, l2))
        }
        "small-linfq" => {
            let (p0, a, q1, beta) = (2.0, 1.0, 2.0, -1.0);
            let y1 = app(AppSpace::LinfQBeta { e: RiSpace::lq(q1)?, beta });
            let w = ell((1.0 - t) * a / conj(p0) + t * (beta + 1.0 / q1));
            (interp(small(p0, a), y1, t, one(), l2), ultra(p0 / (1.0 - t), w, l2))
        }
        "small-linf" => {
            let (p0, a) = (2.0, 1.0);
            let y1 = app(AppSpace::LinfQBeta { e: linf, beta: 0.0 });
            let w = ell(a * (1.0 - t) / conj(p0));
            (interp(small(p0, a), y1, t, one(), l2), ultra(p0 / (1.0 - t), w, l2))
        }
        "ggamma-ultra" => {
            // w₁ = 1/t, w₂ = ℓ, so t w₁ = 1 and ‖(t w₁)^{1/q₀}‖_{L̃_{q₀}(u,1)} = (ℓ(u) - 1)^{1/q₀}.
            let (p0, q0, p1) = (2.0, 2.0, 4.0);
            let y0 = app(AppSpace::GGamma {
                p: p0,
                q: q0,
                w1: PowSv::new(-1.0, one()),
                w2: PowSv::new(0.0, ell(1.0)),
            });
            let b1 = one();
            let tail = SvExpr::norm_tail_upto(one(), RiSpace::lq(q0)?, 1.0)?;
            let w = ell(1.0 / p0).mul(tail).pow(1.0 - t).mul(b1.clone().pow(t));
            (interp(y0, ultra(p1, b1, l2), t, one(), l2), ultra(mix(p0, p1, t), w, l2))
        }
        "a-type-ultra" => {
            let (p0, p1, beta) = (2.0, 4.0, 0.0);
            let y1 = app(AppSpace::AType { p: p1, alpha: beta, e: l2 });
            let tail = SvExpr::norm_tail(ell(beta - 1.0), l2, Side::Lower)?;
            let w = tail.pow(t);
            (interp(ultra(p0, one(), l2), y1, t, one(), l2), ultra(mix(p0, p1, t), w, l2))
        }
        "b-type-ultra" => {
            // φ_{L_q}(s) = s^{1/q}.
            let (p0, a, q0, p1) = (2.0, 0.0, 2.0, 4.0);
            let y0 = app(AppSpace::BType { p: p0, alpha: a, e: RiSpace::lq(q0)? });
            let w = ell(a - 1.0 + 1.0 / q0).pow(1.0 - t);
            (interp(y0, ultra(p1, one(), l2), t, one(), l2), ultra(mix(p0, p1, t), w, l2))
        }
        "b-as-limit-of-A" => {
            let (p0, p1, a, beta) = (2.0, 4.0, 0.0, 0.0);
            let y0 = ultra(p0, ell(a - 1.0), linf);
            let y1 = app(AppSpace::AType { p: p1, alpha: beta, e: l2 });
            (interp(y0, y1, 0.0, one(), l2), app(AppSpace::BType { p: p0, alpha: a, e: l2 }))
        }
        "ultra-between-AB" => {
            let (p0, p1, a, beta, q0) = (2.0, 4.0, 0.0, 0.0, 2.0);
            let y0 = app(AppSpace::BType { p: p0, alpha: a, e: RiSpace::lq(q0)? });
            let y1 = app(AppSpace::AType { p: p1, alpha: beta, e: l2 });
            let tail = SvExpr::norm_tail(ell(beta - 1.0), l2, Side::Lower)?;
            let w = ell(a - 1.0 + 1.0 / q0).pow(1.0 - t).mul(tail.pow(t));
            (interp(y0, y1, t, one(), l2), ultra(mix(p0, p1, t), w, l2))
        }
        _ => unreachable!("id checked against the registry"),
    };
    Ok(Scenario { id: id.to_string(), theta: th, lhs, rhs })
}

/// Both sides of the identity over the corpus, on grids over `(0,1)`.
pub fn verify_identity(name: &str, theta: Option<f64>, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    let s = scenario(name, theta)?;
    if let Some(g) = grids.iter().find(|g| g.t_max > 1.0 + 1e-12) {
        return Err(invalid("grid", format!("identities live on (0,1); grid ends at {}", g.t_max)));
    }
    let id = match s.theta {
        Some(t) => format!("{name}@theta={t}"),
        None => name.to_string(),
    };
    compare_norms(&id, &s.lhs, &s.rhs, corpus, grids, Vec::new())
}

/// `‖ℓ^σ‖_{L̃_q}` on `(0,u)` (`Lower`) or `(u,1)` (`Upper`) against
/// `ℓ^{σ+1/q}(u)`, for `u` on the nodes of `grid` below 1/2. Returns the
/// smallest and largest ratio.
pub fn ell_norm_window(sigma: f64, e: RiSpace, side: Side, grid: &Grid) -> Result<(f64, f64)> {
    let tail = match side {
        Side::Lower => SvExpr::norm_tail(SvExpr::ell(sigma), e, Side::Lower)?,
        Side::Upper => SvExpr::norm_tail_upto(SvExpr::ell(sigma), e, 1.0)?,
    };
    let target = SvExpr::ell(sigma + e.inv_q());
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for u in grid.points().into_iter().filter(|&u| u < 0.5) {
        let r = tail.eval(u)? / target.eval(u)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
