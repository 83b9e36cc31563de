//! Space descriptors, their non-triviality conditions and couple reversal.
//!
//! A descriptor is a recipe for a norm computed from a K-functional profile
//! (or, for the concrete function spaces, from `f*`). Two settings exist:
//! the full line `(0,∞)` and the ordered-couple convention on `(0,1)`, where
//! every outer norm lives on `(0,1)` and the `(t,∞)` tails become `(t,1)`.

use serde::{Deserialize, Serialize};

use crate::applications::AppSpace;
use crate::error::{invalid, Error, Result};
use crate::gridfn::{nested_tilde_norms, tilde_norm, Exponent, Grid, GridFunction, RiSpace, Side};
use crate::svfunc::SvExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    #[default]
    Full,
    Unit,
}

impl Setting {
    /// Right end of the outer interval.
    pub fn hi(self) -> f64 {
        match self {
            Setting::Full => f64::INFINITY,
            Setting::Unit => 1.0,
        }
    }
}

fn is_default(s: &Setting) -> bool {
    *s == Setting::Full
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SpaceDescriptor {
    /// `X₀` of the base couple `(L₁, L∞)`, normed by `lim_{t→∞} K(t)`.
    X0 {
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// `X₁`, normed by `lim_{t→0} K(t)/t`.
    X1 {
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// `‖t^{-θ} b(t) K(t)‖_Ẽ`.
    #[serde(rename = "theta")]
    Theta {
        theta: f64,
        b: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// `‖b(t) ‖s^{-θ} a(s) K(s)‖_{F̃(0,t)}‖_Ẽ`.
    L {
        theta: f64,
        b: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
        a: SvExpr,
        #[serde(rename = "F")]
        f: RiSpace,
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// `‖b(t) ‖s^{-θ} a(s) K(s)‖_{F̃(t,∞)}‖_Ẽ`.
    R {
        theta: f64,
        b: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
        a: SvExpr,
        #[serde(rename = "F")]
        f: RiSpace,
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// `‖c(u) ‖b(t) ‖s^{-θ} a K‖_{G̃(0,t)}‖_{F̃(0,u)}‖_Ẽ`.
    LL {
        theta: f64,
        c: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
        b: SvExpr,
        #[serde(rename = "F")]
        f: RiSpace,
        a: SvExpr,
        #[serde(rename = "G")]
        g: RiSpace,
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// Mirror of `LL` with `(t,∞)` and `(u,∞)` tails.
    RR {
        theta: f64,
        c: SvExpr,
        #[serde(rename = "E")]
        e: RiSpace,
        b: SvExpr,
        #[serde(rename = "F")]
        f: RiSpace,
        a: SvExpr,
        #[serde(rename = "G")]
        g: RiSpace,
        #[serde(default, skip_serializing_if = "is_default")]
        setting: Setting,
    },
    /// A concrete r.i. space on `(0,1)`, normed through `f*`.
    #[serde(rename = "app")]
    App { space: AppSpace },
    #[serde(rename = "intersection")]
    Intersection { members: Vec<SpaceDescriptor> },
    /// `space` built over the couple `(y0, y1)` instead of the base couple:
    /// its K-profile is the oracle K-functional of `(y0, y1)`.
    #[serde(rename = "over")]
    Over {
        y0: Box<SpaceDescriptor>,
        y1: Box<SpaceDescriptor>,
        space: Box<SpaceDescriptor>,
    },
}

impl SpaceDescriptor {
    pub fn x0(setting: Setting) -> Self {
        SpaceDescriptor::X0 { setting }
    }

    pub fn x1(setting: Setting) -> Self {
        SpaceDescriptor::X1 { setting }
    }

    pub fn theta(theta: f64, b: SvExpr, e: RiSpace, setting: Setting) -> Self {
        SpaceDescriptor::Theta { theta, b, e, setting }
    }

    pub fn l(theta: f64, b: SvExpr, e: RiSpace, a: SvExpr, f: RiSpace, setting: Setting) -> Self {
        SpaceDescriptor::L { theta, b, e, a, f, setting }
    }

    pub fn r(theta: f64, b: SvExpr, e: RiSpace, a: SvExpr, f: RiSpace, setting: Setting) -> Self {
        SpaceDescriptor::R { theta, b, e, a, f, setting }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn ll(
        theta: f64,
        c: SvExpr,
        e: RiSpace,
        b: SvExpr,
        f: RiSpace,
        a: SvExpr,
        g: RiSpace,
        setting: Setting,
    ) -> Self {
        SpaceDescriptor::LL { theta, c, e, b, f, a, g, setting }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn rr(
        theta: f64,
        c: SvExpr,
        e: RiSpace,
        b: SvExpr,
        f: RiSpace,
        a: SvExpr,
        g: RiSpace,
        setting: Setting,
    ) -> Self {
        SpaceDescriptor::RR { theta, c, e, b, f, a, g, setting }
    }

    pub fn app(space: AppSpace) -> Self {
        SpaceDescriptor::App { space }
    }

    pub fn intersection(members: Vec<SpaceDescriptor>) -> Self {
        SpaceDescriptor::Intersection { members }
    }

    pub fn over(y0: SpaceDescriptor, y1: SpaceDescriptor, space: SpaceDescriptor) -> Self {
        SpaceDescriptor::Over {
            y0: Box::new(y0),
            y1: Box::new(y1),
            space: Box::new(space),
        }
    }

    /// Setting of the outermost norm. Concrete spaces live on `(0,1)`.
    pub fn setting(&self) -> Setting {
        use SpaceDescriptor::*;
        match self {
            X0 { setting }
            | X1 { setting }
            | Theta { setting, .. }
            | L { setting, .. }
            | R { setting, .. }
            | LL { setting, .. }
            | RR { setting, .. } => *setting,
            App { .. } => Setting::Unit,
            Intersection { members } => {
                if members.iter().all(|m| m.setting() == Setting::Unit) {
                    Setting::Unit
                } else {
                    Setting::Full
                }
            }
            Over { space, .. } => space.setting(),
        }
    }

    /// Whether evaluation needs `f*` rather than only a K-profile.
    pub fn needs_fstar(&self) -> bool {
        match self {
            SpaceDescriptor::App { .. } | SpaceDescriptor::Over { .. } => true,
            SpaceDescriptor::Intersection { members } => members.iter().any(|m| m.needs_fstar()),
            _ => false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: SpaceDescriptor = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    /// Parameter ranges throughout the tree.
    pub fn validate(&self) -> Result<()> {
        use SpaceDescriptor::*;
        let theta_ok = |th: f64| {
            if (0.0..=1.0).contains(&th) {
                Ok(())
            } else {
                Err(invalid("theta", format!("must lie in [0,1], got {th}")))
            }
        };
        match self {
            X0 { .. } | X1 { .. } => Ok(()),
            Theta { theta, b, .. } => {
                theta_ok(*theta)?;
                b.validate()
            }
            L { theta, b, a, .. } | R { theta, b, a, .. } => {
                theta_ok(*theta)?;
                b.validate()?;
                a.validate()
            }
            LL { theta, c, b, a, .. } | RR { theta, c, b, a, .. } => {
                theta_ok(*theta)?;
                c.validate()?;
                b.validate()?;
                a.validate()
            }
            App { space } => space.validate(),
            Intersection { members } => {
                if members.is_empty() {
                    return Err(invalid("members", "intersection needs at least one member"));
                }
                members.iter().try_for_each(|m| m.validate())
            }
            Over { y0, y1, space } => {
                y0.validate()?;
                y1.validate()?;
                if space.needs_fstar() {
                    return Err(invalid("space", "must be normed through a K-profile"));
                }
                space.validate()
            }
        }
    }
}

/// Same space over the reversed couple `(X₁, X₀)`.
pub fn couple_reverse(d: &SpaceDescriptor) -> Result<SpaceDescriptor> {
    use SpaceDescriptor::*;
    let full = |s: &Setting| {
        if *s == Setting::Full {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "couple reversal is only defined on the full line".into(),
            ))
        }
    };
    let inv = |b: &SvExpr| b.clone().inverse_arg();
    Ok(match d {
        Theta { theta, b, e, setting } => {
            full(setting)?;
            SpaceDescriptor::theta(1.0 - theta, inv(b), *e, *setting)
        }
        L { theta, b, e, a, f, setting } => {
            full(setting)?;
            SpaceDescriptor::r(1.0 - theta, inv(b), *e, inv(a), *f, *setting)
        }
        R { theta, b, e, a, f, setting } => {
            full(setting)?;
            SpaceDescriptor::l(1.0 - theta, inv(b), *e, inv(a), *f, *setting)
        }
        LL { theta, c, e, b, f, a, g, setting } => {
            full(setting)?;
            SpaceDescriptor::rr(1.0 - theta, inv(c), *e, inv(b), *f, inv(a), *g, *setting)
        }
        RR { theta, c, e, b, f, a, g, setting } => {
            full(setting)?;
            SpaceDescriptor::ll(1.0 - theta, inv(c), *e, inv(b), *f, inv(a), *g, *setting)
        }
        Intersection { members } => Intersection {
            members: members.iter().map(couple_reverse).collect::<Result<_>>()?,
        },
        other => {
            return Err(Error::Unsupported(format!(
                "couple reversal of `{}`",
                kind_name(other)
            )))
        }
    })
}

pub fn kind_name(d: &SpaceDescriptor) -> &'static str {
    use SpaceDescriptor::*;
    match d {
        X0 { .. } => "X0",
        X1 { .. } => "X1",
        Theta { .. } => "theta",
        L { .. } => "L",
        R { .. } => "R",
        LL { .. } => "LL",
        RR { .. } => "RR",
        App { .. } => "app",
        Intersection { .. } => "intersection",
        Over { .. } => "over",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub trivial: bool,
    pub failed_conditions: Vec<String>,
    /// Each condition with its truncated value (`inf` once divergence is
    /// detected).
    pub checked_values: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl Admissibility {
    fn merge(&mut self, other: Admissibility) {
        self.trivial |= other.trivial;
        self.failed_conditions.extend(other.failed_conditions);
        self.checked_values.extend(other.checked_values);
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }

    fn record(&mut self, name: String, finite: bool, value: f64) {
        self.checked_values.push((name.clone(), if finite { value } else { f64::INFINITY }));
        if !finite {
            self.trivial = true;
            self.failed_conditions.push(name);
        }
    }
}

/// Where a finiteness condition is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `(0,1)`, truncated at `t_min`.
    Low,
    /// `(1,∞)`, truncated at `t_max`.
    High,
}

/// Resolution of the auxiliary grids used for finiteness conditions.
const COND_POINTS: usize = 2049;
/// Relative change that marks a truncated integral as divergent.
const COND_TOL: f64 = 0.01;

/// Decides whether a truncated quantity stays bounded as the truncation
/// point moves out by a factor 2.
///
/// `mass` evaluates the quantity on a grid spanning the region; for `q < ∞`
/// it should return the integral itself (the `q`-th power of the norm), so
/// that slow logarithmic divergence is not damped by the root. Returns
/// `(finite, value at the default truncation)`.
pub fn finite_by_truncation(
    region: Region,
    mass: impl Fn(&Grid) -> Result<f64>,
) -> Result<(bool, f64)> {
    let (lo, hi) = match region {
        Region::Low => (crate::gridfn::FULL_LINE.0, 1.0),
        Region::High => (1.0, crate::gridfn::FULL_LINE.1),
    };
    let base = Grid::new(lo, hi, COND_POINTS)?;
    let extra = (std::f64::consts::LN_2 / base.h()).round() as usize;
    let wide = match region {
        Region::Low => base.extend_left(extra),
        Region::High => base.extend_right(extra),
    };
    let m0 = mass(&base)?;
    let m1 = mass(&wide)?;
    if !(m0.is_finite() && m1.is_finite()) {
        return Ok((false, f64::INFINITY));
    }
    if m0 == 0.0 {
        return Ok((m1 == 0.0, m0));
    }
    Ok(((m1 - m0).abs() / m0 < COND_TOL, m0))
}

/// A condition `‖w(t) · inner(t)‖_{Ẽ(region)} < ∞`, with `inner` either 1
/// or a running norm `‖a‖_{F̃(·)}` from the region's edge.
struct Cond {
    name: String,
    region: Region,
    w: SvExpr,
    e: RiSpace,
    inner: Option<(SvExpr, RiSpace, Side)>,
}

impl Cond {
    fn plain(name: String, region: Region, w: SvExpr, e: RiSpace) -> Self {
        Cond { name, region, w, e, inner: None }
    }

    fn nested(name: String, region: Region, w: SvExpr, e: RiSpace, a: SvExpr, f: RiSpace, side: Side) -> Self {
        Cond { name, region, w, e, inner: Some((a, f, side)) }
    }

    fn mass(&self, grid: &Grid) -> Result<f64> {
        let mut v = self.w.sample(grid)?;
        if let Some((a, f, side)) = &self.inner {
            let ga = GridFunction::new(*grid, a.sample(grid)?)?;
            let inner = nested_tilde_norms(&ga, *f, *side)?;
            for (x, y) in v.iter_mut().zip(&inner.values) {
                *x *= y;
            }
        }
        let g = GridFunction::new(*grid, v)?;
        let norm = tilde_norm(&g, self.e, 0.0, f64::INFINITY)?;
        Ok(match self.e.q {
            Exponent::Inf => norm,
            Exponent::Finite(q) => norm.powf(q),
        })
    }

    fn check(&self, adm: &mut Admissibility) -> Result<()> {
        let (ok, val) = finite_by_truncation(self.region, |g| self.mass(g))?;
        let val = match self.e.q {
            Exponent::Finite(q) if val.is_finite() => val.powf(1.0 / q),
            _ => val,
        };
        adm.record(self.name.clone(), ok, val);
        Ok(())
    }
}

pub(crate) fn sp(e: RiSpace) -> String {
    match e.q {
        Exponent::Inf => "L∞".to_string(),
        Exponent::Finite(q) => format!("L{q}"),
    }
}

const UNIT_NOTE: &str = "ordered-couple setting: conditions on (1,∞) are void";

/// Numerical non-triviality check against the condition tables.
pub fn check_admissible(d: &SpaceDescriptor) -> Result<Admissibility> {
    use SpaceDescriptor::*;
    let mut adm = Admissibility {
        trivial: false,
        failed_conditions: vec![],
        checked_values: vec![],
        notes: vec![],
    };
    let unit = d.setting() == Setting::Unit;
    let mut conds: Vec<Cond> = Vec::new();
    match d {
        X0 { .. } | X1 { .. } => {}
        Theta { theta, b, e, .. } => {
            if *theta == 0.0 {
                conds.push(Cond::plain(format!("‖b‖_{}~(1,∞)", sp(*e)), Region::High, b.clone(), *e));
            } else if *theta == 1.0 {
                conds.push(Cond::plain(format!("‖b‖_{}~(0,1)", sp(*e)), Region::Low, b.clone(), *e));
            }
        }
        L { theta, b, e, a, f, .. } => {
            let (es, fs) = (sp(*e), sp(*f));
            conds.push(Cond::plain(format!("‖b‖_{es}~(1,∞)"), Region::High, b.clone(), *e));
            if *theta == 0.0 {
                conds.push(Cond::nested(
                    format!("‖b(t)‖a‖_{fs}~(1,t)‖_{es}~(1,∞)"),
                    Region::High,
                    b.clone(),
                    *e,
                    a.clone(),
                    *f,
                    Side::Lower,
                ));
                conds.push(Cond::plain(
                    format!("‖ab‖_{es}~(1,∞)"),
                    Region::High,
                    a.clone().mul(b.clone()),
                    *e,
                ));
            } else if *theta == 1.0 {
                conds.push(Cond::nested(
                    format!("‖b(t)‖a‖_{fs}~(0,t)‖_{es}~(0,1)"),
                    Region::Low,
                    b.clone(),
                    *e,
                    a.clone(),
                    *f,
                    Side::Lower,
                ));
            }
        }
        R { theta, b, e, a, f, .. } => {
            let (es, fs) = (sp(*e), sp(*f));
            conds.push(Cond::plain(format!("‖b‖_{es}~(0,1)"), Region::Low, b.clone(), *e));
            if *theta == 0.0 {
                conds.push(Cond::nested(
                    format!("‖b(t)‖a‖_{fs}~(t,∞)‖_{es}~(1,∞)"),
                    Region::High,
                    b.clone(),
                    *e,
                    a.clone(),
                    *f,
                    Side::Upper,
                ));
            } else if *theta == 1.0 {
                conds.push(Cond::nested(
                    format!("‖b(t)‖a‖_{fs}~(t,1)‖_{es}~(0,1)"),
                    Region::Low,
                    b.clone(),
                    *e,
                    a.clone(),
                    *f,
                    Side::Upper,
                ));
                conds.push(Cond::plain(
                    format!("‖ab‖_{es}~(0,1)"),
                    Region::Low,
                    a.clone().mul(b.clone()),
                    *e,
                ));
                adm.notes.push(
                    "R table at θ=1 checked as printed; its closing sentence names the L space, read as R"
                        .into(),
                );
            }
        }
        LL { .. } | RR { .. } => {
            adm.notes.push("no condition table for doubly nested spaces; none checked".into());
        }
        App { space } => {
            for (name, region, mass) in space.conditions()? {
                let (ok, val) = finite_by_truncation(region, mass)?;
                adm.record(name, ok, val);
            }
        }
        Intersection { members } => {
            for m in members {
                adm.merge(check_admissible(m)?);
            }
        }
        Over { y0, y1, space } => {
            adm.merge(check_admissible(y0)?);
            adm.merge(check_admissible(y1)?);
            adm.merge(check_admissible(space)?);
        }
    }
    let before = conds.len();
    if unit {
        conds.retain(|c| c.region == Region::Low);
        if conds.len() < before {
            adm.notes.push(UNIT_NOTE.into());
        }
    }
    for c in &conds {
        c.check(&mut adm)?;
    }
    Ok(adm)
}

/// Fails with `Error::Inadmissible` when the space is trivial.
pub fn require_admissible(d: &SpaceDescriptor) -> Result<Admissibility> {
    let adm = check_admissible(d)?;
    if adm.trivial {
        return Err(Error::Inadmissible(adm.failed_conditions));
    }
    Ok(adm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one() -> SvExpr {
        SvExpr::one()
    }

    #[test]
    fn theta_table() {
        let interior = SpaceDescriptor::theta(0.5, one(), RiSpace::L2, Setting::Full);
        let a = check_admissible(&interior).unwrap();
        assert!(!a.trivial && a.checked_values.is_empty());

        let sup = SpaceDescriptor::theta(1.0, one(), RiSpace::LINF, Setting::Full);
        let a = check_admissible(&sup).unwrap();
        assert!(!a.trivial);
        assert_eq!(a.checked_values[0].1, 1.0);

        let l1 = SpaceDescriptor::theta(1.0, one(), RiSpace::L1, Setting::Full);
        let a = check_admissible(&l1).unwrap();
        assert!(a.trivial);
        assert_eq!(a.failed_conditions.len(), 1);
        assert!(a.failed_conditions[0].contains("(0,1)"));
    }

    #[test]
    fn log_weights_separate_convergent_from_divergent() {
        let conv = SpaceDescriptor::theta(0.0, SvExpr::ell(-1.0), RiSpace::L2, Setting::Full);
        assert!(!check_admissible(&conv).unwrap().trivial);
        let div = SpaceDescriptor::theta(0.0, SvExpr::ell(-0.5), RiSpace::L2, Setting::Full);
        assert!(check_admissible(&div).unwrap().trivial);
        let grow = SpaceDescriptor::theta(0.0, SvExpr::ell(0.5), RiSpace::LINF, Setting::Full);
        assert!(check_admissible(&grow).unwrap().trivial);
    }

    #[test]
    fn unit_setting_drops_upper_conditions() {
        let d = SpaceDescriptor::theta(0.0, one(), RiSpace::L1, Setting::Unit);
        let a = check_admissible(&d).unwrap();
        assert!(!a.trivial);
        assert!(a.notes.iter().any(|n| n.contains("(1,∞)")));
    }

    #[test]
    fn l_theta_zero_needs_all_three() {
        let ok = SpaceDescriptor::l(0.0, SvExpr::ell(-2.0), RiSpace::L1, one(), RiSpace::LINF, Setting::Full);
        let a = check_admissible(&ok).unwrap();
        assert_eq!(a.checked_values.len(), 3);
        assert!(!a.trivial, "{a:?}");
        // ‖b(t)‖1‖_{L1(1,t)}‖ = ∫ ℓ^{-2} log t dt/t diverges.
        let bad = SpaceDescriptor::l(0.0, SvExpr::ell(-2.0), RiSpace::L1, one(), RiSpace::L1, Setting::Full);
        let a = check_admissible(&bad).unwrap();
        assert!(a.trivial);
        assert_eq!(a.failed_conditions.len(), 1);
    }

    #[test]
    fn r_theta_one_reports_the_table_note() {
        let d = SpaceDescriptor::r(1.0, SvExpr::ell(-2.0), RiSpace::L1, one(), RiSpace::LINF, Setting::Full);
        let a = check_admissible(&d).unwrap();
        assert!(!a.trivial, "{a:?}");
        assert_eq!(a.checked_values.len(), 3);
        assert!(!a.notes.is_empty());
    }

    #[test]
    fn reverse_examples() {
        let d = SpaceDescriptor::theta(0.5, SvExpr::ell(1.0), RiSpace::L2, Setting::Full);
        let r = couple_reverse(&d).unwrap();
        assert_eq!(r, SpaceDescriptor::theta(0.5, SvExpr::ell(1.0), RiSpace::L2, Setting::Full));

        let b = SvExpr::broken(1.0, -1.0);
        let l = SpaceDescriptor::l(0.25, b.clone(), RiSpace::L2, one(), RiSpace::LINF, Setting::Full);
        match couple_reverse(&l).unwrap() {
            SpaceDescriptor::R { theta, b: rb, a, .. } => {
                assert_eq!(theta, 0.75);
                assert_eq!(rb, b.clone().inverse_arg());
                assert_eq!(a, one());
            }
            other => panic!("{other:?}"),
        }
        assert!(couple_reverse(&SpaceDescriptor::x0(Setting::Full)).is_err());
        let unit = SpaceDescriptor::theta(0.5, one(), RiSpace::L2, Setting::Unit);
        assert!(couple_reverse(&unit).is_err());
    }

    #[test]
    fn json_shape() {
        let s = r#"{"kind":"R","theta":0.75,"b":{"kind":"const","c":1.0},"E":{"q":"inf"},"a":{"kind":"ell","alpha":-0.5},"F":{"q":4},"setting":"unit"}"#;
        let d = SpaceDescriptor::from_json(s).unwrap();
        assert_eq!(d.setting(), Setting::Unit);
        let back = serde_json::to_string(&d).unwrap();
        assert_eq!(SpaceDescriptor::from_json(&back).unwrap(), d);
        assert!(SpaceDescriptor::from_json(r#"{"kind":"theta","theta":2,"b":{"kind":"const","c":1},"E":{"q":1}}"#).is_err());
        assert!(SpaceDescriptor::from_json(r#"{"kind":"intersection","members":[]}"#).is_err());
    }

    fn arb_sv() -> impl Strategy<Value = SvExpr> {
        prop_oneof![
            Just(SvExpr::one()),
            (-2.0f64..2.0).prop_map(SvExpr::ell),
            ((-2.0f64..2.0), (-2.0f64..2.0)).prop_map(|(a, b)| SvExpr::broken(a, b)),
        ]
    }

    fn arb_e() -> impl Strategy<Value = RiSpace> {
        prop_oneof![Just(RiSpace::L1), Just(RiSpace::L2), Just(RiSpace::LINF)]
    }

    proptest! {
        #[test]
        fn reverse_is_an_involution(k64 in 0u32..=64, b in arb_sv(), a in arb_sv(), c in arb_sv(),
                                    e in arb_e(), f in arb_e(), g in arb_e(), k in 0usize..5) {
            // Dyadic θ keeps 1 - (1 - θ) exact.
            let th = k64 as f64 / 64.0;
            let d = match k {
                0 => SpaceDescriptor::theta(th, b, e, Setting::Full),
                1 => SpaceDescriptor::l(th, b, e, a, f, Setting::Full),
                2 => SpaceDescriptor::r(th, b, e, a, f, Setting::Full),
                3 => SpaceDescriptor::ll(th, c, e, b, f, a, g, Setting::Full),
                _ => SpaceDescriptor::rr(th, c, e, b, f, a, g, Setting::Full),
            };
            let twice = couple_reverse(&couple_reverse(&d).unwrap()).unwrap();
            prop_assert_eq!(twice, d);
        }
    }
}
