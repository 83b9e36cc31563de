//! Slowly varying functions as a small closed expression language.
//!
//! Everything is evaluated in the log domain: `ln_eval(x)` returns
//! `ln b(e^x)`. Logarithmic leaves are then exact, and compositions such as
//! `b(t^γ c(t))` never under- or overflow for `t` in `[1e-300, 1e300]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gridfn::{Exponent, Grid, RiSpace, Side};
use crate::quad;

/// Truncation of the mapped tail integrals, in units of `|log s - log t|`.
const TAIL_FAR: f64 = 1e12;
const TAIL_NEAR: f64 = 1e6;
/// Panel width in the mapped variable `v = ln(1 + w)`.
const PANEL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SvExpr {
    /// `ℓ^α(t) = (1 + |log t|)^α`.
    Ell { alpha: f64 },
    /// `ℓ^α` on `(0,1]`, `ℓ^β` on `(1,∞)`.
    BrokenEll { alpha: f64, beta: f64 },
    /// `(ℓ∘…∘ℓ)^α` with `depth` copies of `ℓ`.
    IteratedEll { depth: u32, alpha: f64 },
    /// `exp(|log t|^α)`, `0 < α < 1`.
    ExpLogPow { alpha: f64 },
    Const { c: f64 },
    Product { args: Vec<SvExpr> },
    Power { base: Box<SvExpr>, r: f64 },
    /// `t ↦ inner(1/t)`.
    InverseArg { inner: Box<SvExpr> },
    /// `t ↦ outer(t^γ · inner(t))`.
    ComposeRho {
        outer: Box<SvExpr>,
        gamma: f64,
        inner: Box<SvExpr>,
    },
    /// `‖b‖_{Ẽ(0,t)}` (lower) or `‖b‖_{Ẽ(t,upto)}` (upper, `upto = ∞` by
    /// default).
    NormTail {
        b: Box<SvExpr>,
        #[serde(rename = "E")]
        e: RiSpace,
        side: Side,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upto: Option<f64>,
    },
}

impl SvExpr {
    pub fn one() -> Self {
        SvExpr::Const { c: 1.0 }
    }

    pub fn konst(c: f64) -> Self {
        SvExpr::Const { c }
    }

    pub fn ell(alpha: f64) -> Self {
        SvExpr::Ell { alpha }
    }

    pub fn broken(alpha: f64, beta: f64) -> Self {
        SvExpr::BrokenEll { alpha, beta }
    }

    /// Product with trivial factors dropped.
    pub fn product(args: Vec<SvExpr>) -> Self {
        let mut flat = Vec::new();
        for a in args {
            match a {
                SvExpr::Product { args } => flat.extend(args),
                SvExpr::Const { c } if c == 1.0 => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => SvExpr::one(),
            1 => flat.pop().unwrap(),
            _ => SvExpr::Product { args: flat },
        }
    }

    pub fn mul(self, other: SvExpr) -> Self {
        SvExpr::product(vec![self, other])
    }

    pub fn pow(self, r: f64) -> Self {
        match self {
            _ if r == 1.0 => self,
            _ if r == 0.0 => SvExpr::one(),
            SvExpr::Const { c } => SvExpr::Const { c: c.powf(r) },
            SvExpr::Ell { alpha } => SvExpr::Ell { alpha: alpha * r },
            other => SvExpr::Power {
                base: Box::new(other),
                r,
            },
        }
    }

    pub fn recip(self) -> Self {
        self.pow(-1.0)
    }

    pub fn inverse_arg(self) -> Self {
        match self {
            SvExpr::InverseArg { inner } => *inner,
            c @ SvExpr::Const { .. } => c,
            e @ SvExpr::Ell { .. } => e,
            other => SvExpr::InverseArg {
                inner: Box::new(other),
            },
        }
    }

    /// `self ∘ ρ` with `ρ(t) = t^γ inner(t)`.
    pub fn compose(self, gamma: f64, inner: SvExpr) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", "composition needs a positive power"));
        }
        if let SvExpr::Const { .. } = self {
            return Ok(self);
        }
        Ok(SvExpr::ComposeRho {
            outer: Box::new(self),
            gamma,
            inner: Box::new(inner),
        })
    }

    /// `‖b‖_{Ẽ(0,t)}` or `‖b‖_{Ẽ(t,∞)}`, refused when the norm diverges.
    pub fn norm_tail(b: SvExpr, e: RiSpace, side: Side) -> Result<Self> {
        let n = SvExpr::NormTail {
            b: Box::new(b),
            e,
            side,
            upto: None,
        };
        n.validate()?;
        Ok(n)
    }

    /// `‖b‖_{Ẽ(t,end)}`, the ordered-couple version of the upper tail.
    pub fn norm_tail_upto(b: SvExpr, e: RiSpace, end: f64) -> Result<Self> {
        let n = SvExpr::NormTail {
            b: Box::new(b),
            e,
            side: Side::Upper,
            upto: Some(end),
        };
        n.validate()?;
        Ok(n)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let e: SvExpr = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        e.validate()?;
        Ok(e)
    }

    /// Checks parameter ranges and tail convergence throughout the tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            SvExpr::Ell { alpha } | SvExpr::IteratedEll { alpha, .. } if !alpha.is_finite() => {
                Err(invalid("alpha", "must be finite"))
            }
            SvExpr::IteratedEll { depth: 0, .. } => Err(invalid("depth", "must be at least 1")),
            SvExpr::BrokenEll { alpha, beta } if !(alpha.is_finite() && beta.is_finite()) => {
                Err(invalid("alpha", "exponents must be finite"))
            }
            SvExpr::ExpLogPow { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                Err(invalid("alpha", "must lie strictly inside (0,1)"))
            }
            SvExpr::Const { c } if !(*c > 0.0 && c.is_finite()) => {
                Err(invalid("c", "must be positive and finite"))
            }
            SvExpr::Product { args } => args.iter().try_for_each(|a| a.validate()),
            SvExpr::Power { base, r } => {
                if !r.is_finite() {
                    return Err(invalid("r", "must be finite"));
                }
                base.validate()
            }
            SvExpr::InverseArg { inner } => inner.validate(),
            SvExpr::ComposeRho {
                outer,
                gamma,
                inner,
            } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(invalid("gamma", "must be strictly positive"));
                }
                outer.validate()?;
                inner.validate()
            }
            SvExpr::NormTail { b, side, upto, .. } => {
                b.validate()?;
                if let Some(u) = upto {
                    if *side != Side::Upper || !(*u > 0.0) {
                        return Err(invalid("upto", "only a positive end for the upper side"));
                    }
                }
                // Convergence at one point implies it everywhere.
                let x0 = match upto {
                    Some(u) => u.ln() - 1.0,
                    None => 0.0,
                };
                self.ln_eval(x0).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// `b(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("need 0 < t < inf, got {t}")));
        }
        Ok(self.ln_eval(t.ln())?.exp())
    }

    /// `ln b(e^x)`.
    pub fn ln_eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("NaN argument".into()));
        }
        let ell = |x: f64| (1.0 + x.abs()).ln();
        Ok(match self {
            SvExpr::Ell { alpha } => alpha * ell(x),
            SvExpr::BrokenEll { alpha, beta } => {
                if x <= 0.0 {
                    alpha * ell(x)
                } else {
                    beta * ell(x)
                }
            }
            SvExpr::IteratedEll { depth, alpha } => {
                let mut y = 1.0 + x.abs();
                for _ in 1..*depth {
                    y = 1.0 + y.ln();
                }
                alpha * y.ln()
            }
            SvExpr::ExpLogPow { alpha } => x.abs().powf(*alpha),
            SvExpr::Const { c } => c.ln(),
            SvExpr::Product { args } => {
                let mut s = 0.0;
                for a in args {
                    s += a.ln_eval(x)?;
                }
                s
            }
            SvExpr::Power { base, r } => r * base.ln_eval(x)?,
            SvExpr::InverseArg { inner } => inner.ln_eval(-x)?,
            SvExpr::ComposeRho {
                outer,
                gamma,
                inner,
            } => {
                let y = gamma * x + inner.ln_eval(x)?;
                if !y.is_finite() {
                    return Err(Error::Domain(format!(
                        "composition argument leaves (0,inf) at log t = {x}"
                    )));
                }
                outer.ln_eval(y)?
            }
            SvExpr::NormTail { b, e, side, upto } => {
                let end = upto.map(f64::ln);
                ln_tail(b, *e, *side, x, end)?
            }
        })
    }

    /// Samples at every grid point.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.log_points()
            .into_iter()
            .map(|x| self.ln_eval(x).map(f64::exp))
            .collect()
    }

    /// `ln b` at every grid point.
    pub fn ln_sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.log_points()
            .into_iter()
            .map(|x| self.ln_eval(x))
            .collect()
    }
}

/// `ln ‖b‖_{Ẽ(...)}` for the tail starting at `log t = x`.
///
/// In `w = |log s - log t|` the integrand decays only logarithmically, so the
/// half line is mapped by `w = e^v - 1` and integrated with Gauss–Legendre
/// panels. Agreement between truncation at `1e6` and `1e12` is the
/// convergence test.
fn ln_tail(b: &SvExpr, e: RiSpace, side: Side, x: f64, end: Option<f64>) -> Result<f64> {
    let dir = match side {
        Side::Lower => -1.0,
        Side::Upper => 1.0,
    };
    let mut wcap = TAIL_FAR;
    if let Some(xe) = end {
        wcap = wcap.min(xe - x);
        if wcap <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
    }
    // Segments in w, each graded towards one of its ends: towards the start
    // and towards the kink of |log s| at s = 1.
    let mut segs: Vec<(f64, f64, bool)> = Vec::new();
    let wk = x.abs();
    if dir * x < 0.0 && wk <= wcap {
        segs.push((0.0, 0.5 * wk, true));
        segs.push((0.5 * wk, wk, false));
        segs.push((wk, wcap, true));
    } else {
        segs.push((0.0, wcap, true));
    }
    // (value log, weight log, inside the 1e6 truncation)
    let mut pts: Vec<(f64, f64, bool)> = Vec::new();
    for (a, bnd, left) in segs {
        if bnd <= a {
            continue;
        }
        let vmax = (bnd - a).ln_1p();
        let mut breaks = Vec::new();
        if left && a < TAIL_NEAR && bnd > TAIL_NEAR {
            breaks.push((TAIL_NEAR - a).ln_1p());
        }
        let edges = quad::panels(0.0, vmax, &breaks, PANEL);
        let w_of = |v: f64| if left { a + v.exp_m1() } else { bnd - v.exp_m1() };
        for pw in edges.windows(2) {
            for v in [pw[0], pw[1]] {
                let w = w_of(v);
                pts.push((b.ln_eval(x + dir * w)?, f64::NEG_INFINITY, w <= TAIL_NEAR));
            }
            for (v, wt) in quad::gl8(pw[0], pw[1]) {
                let w = w_of(v);
                pts.push((b.ln_eval(x + dir * w)?, v + wt.ln(), w <= TAIL_NEAR));
            }
        }
    }
    let truncated = end.is_none() || wcap > TAIL_NEAR;
    match e.q {
        Exponent::Inf => {
            let far = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let near = pts
                .iter()
                .filter(|p| p.2)
                .map(|p| p.0)
                .fold(f64::NEG_INFINITY, f64::max);
            if truncated && (far - near) > 0.01f64.ln_1p() {
                return Err(Error::Divergent(format!(
                    "supremum of the weight over the {side:?} tail is unbounded"
                )));
            }
            Ok(far)
        }
        Exponent::Finite(q) => {
            let terms: Vec<(f64, bool)> = pts
                .iter()
                .filter(|p| p.1.is_finite())
                .map(|p| (q * p.0 + p.1, p.2))
                .collect();
            let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
            if !m.is_finite() {
                return Ok(f64::NEG_INFINITY);
            }
            let (mut near, mut far) = (0.0, 0.0);
            for (lt, is_near) in &terms {
                let v = (lt - m).exp();
                far += v;
                if *is_near {
                    near += v;
                }
            }
            if truncated && (far / near - 1.0) > 0.01 {
                return Err(Error::Divergent(format!(
                    "weight is not in the {side:?} tail space (q = {q})"
                )));
            }
            Ok((m + far.ln()) / q)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvCheckReport {
    pub epsilon: f64,
    pub grid: Grid,
    /// Smallest `C` with `s^ε b(s) <= C t^ε b(t)` for sampled `s <= t`.
    pub increasing_constant: f64,
    /// Smallest `C` with `s^{-ε} b(s) <= C t^{-ε} b(t)` for sampled `s >= t`.
    pub decreasing_constant: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Quasi-monotonicity constants of `t^{±ε} b(t)` on a grid.
pub fn sv_verify(expr: &SvExpr, eps: f64, grid: &Grid, threshold: f64) -> Result<SvCheckReport> {
    if !(eps > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    if grid.n < 16 {
        return Err(invalid("n", "sv_verify needs at least 16 points"));
    }
    let lnb = expr.ln_sample(grid)?;
    let xs = grid.log_points();
    // Work in logs: ln(t^ε b) is exact even where b under/overflows.
    let up: Vec<f64> = xs.iter().zip(&lnb).map(|(x, l)| eps * x + l).collect();
    let down: Vec<f64> = xs.iter().zip(&lnb).map(|(x, l)| -eps * x + l).collect();
    let mut inc: f64 = 0.0;
    let mut run = f64::NEG_INFINITY;
    for v in &up {
        run = run.max(*v);
        inc = inc.max(run - v);
    }
    let mut dec: f64 = 0.0;
    let mut run = f64::NEG_INFINITY;
    for v in down.iter().rev() {
        run = run.max(*v);
        dec = dec.max(run - v);
    }
    let (inc, dec) = (inc.exp(), dec.exp());
    Ok(SvCheckReport {
        epsilon: eps,
        grid: *grid,
        increasing_constant: inc,
        decreasing_constant: dec,
        threshold,
        pass: inc <= threshold && dec <= threshold,
    })
}

/// Bracket `(c_ε min{s^{-ε},s^ε} b(t), C_ε max{s^ε,s^{-ε}} b(t))` for `b(st)`.
///
/// `c_ε`, `C_ε` are the extreme ratios over a log-spaced sweep of `(s, t)` in
/// `[1e-6, 1e6]²` that also contains the query point.
pub fn sv_local_scale_bound(expr: &SvExpr, eps: f64, s: f64, t: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain("s and t must be positive".into()));
    }
    if !(eps > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let sweep = Grid::new(1e-6, 1e6, 49)?.log_points();
    let mut xs_s = sweep.clone();
    let mut xs_t = sweep;
    xs_s.push(s.ln());
    xs_t.push(t.ln());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &xt in &xs_t {
        let bt = expr.ln_eval(xt)?;
        for &xs in &xs_s {
            let r = expr.ln_eval(xs + xt)? - bt;
            hi = hi.max(r - eps * xs.abs());
            lo = lo.min(r + eps * xs.abs());
        }
    }
    let bt = expr.eval(t)?;
    let k = eps * s.ln().abs();
    Ok((lo.exp() * (-k).exp() * bt, hi.exp() * k.exp() * bt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn e() -> f64 {
        std::f64::consts::E
    }

    #[test]
    fn closed_form_leaves() {
        assert_relative_eq!(SvExpr::ell(1.0).eval(1.0).unwrap(), 1.0);
        assert_relative_eq!(SvExpr::ell(2.0).eval(1.0 / e()).unwrap(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(SvExpr::broken(1.0, 2.0).eval(e()).unwrap(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(SvExpr::broken(1.0, 2.0).eval(1.0 / e()).unwrap(), 2.0, max_relative = 1e-14);
        let it = SvExpr::IteratedEll { depth: 2, alpha: 1.0 };
        assert_relative_eq!(it.eval(e().powf(e() - 1.0)).unwrap(), 2.0, max_relative = 1e-14);
        let elp = SvExpr::ExpLogPow { alpha: 0.5 };
        assert_relative_eq!(elp.eval(e().powi(4)).unwrap(), e().powi(2), max_relative = 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(SvExpr::ell(1.0).eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(SvExpr::ell(1.0).eval(-2.0), Err(Error::Domain(_))));
        assert!(SvExpr::ExpLogPow { alpha: 1.0 }.validate().is_err());
        assert!(SvExpr::one().compose(0.0, SvExpr::one()).is_err());
    }

    #[test]
    fn lower_tail_of_ell_minus_two() {
        let b = SvExpr::norm_tail(SvExpr::ell(-2.0), RiSpace::L1, Side::Lower).unwrap();
        for u in [1e-6, 1e-3, 0.1, 0.5, 0.9] {
            let want = 1.0 / (1.0 + (1.0 / u as f64).ln());
            assert_relative_eq!(b.eval(u).unwrap(), want, max_relative = 1e-6);
        }
    }

    #[test]
    fn upper_tail_to_one() {
        // ‖ℓ^{-1}‖_{L̃₂(u,1)}² = 1 - 1/ℓ(u).
        let b = SvExpr::norm_tail_upto(SvExpr::ell(-1.0), RiSpace::L2, 1.0).unwrap();
        for u in [1e-6, 1e-2, 0.3] {
            let l = 1.0 + (1.0 / u as f64).ln();
            assert_relative_eq!(b.eval(u).unwrap(), (1.0 - 1.0 / l).sqrt(), max_relative = 1e-6);
        }
    }

    #[test]
    fn sup_tails() {
        let b = SvExpr::norm_tail(SvExpr::ell(-0.5), RiSpace::LINF, Side::Lower).unwrap();
        assert_relative_eq!(b.eval(0.01).unwrap(), SvExpr::ell(-0.5).eval(0.01).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(b.eval(100.0).unwrap(), 1.0, max_relative = 1e-12);
        assert!(SvExpr::norm_tail(SvExpr::ell(0.5), RiSpace::LINF, Side::Lower).is_err());
    }

    #[test]
    fn divergent_tails_are_refused() {
        assert!(matches!(
            SvExpr::norm_tail(SvExpr::ell(-1.0), RiSpace::L1, Side::Lower),
            Err(Error::Divergent(_))
        ));
        assert!(SvExpr::norm_tail(SvExpr::one(), RiSpace::L2, Side::Upper).is_err());
        assert!(SvExpr::norm_tail(SvExpr::ell(-2.0), RiSpace::L1, Side::Upper).is_ok());
    }

    #[test]
    fn json_shapes() {
        let j = r#"{"kind":"product","args":[{"kind":"ell","alpha":-0.5},
            {"kind":"compose_rho","outer":{"kind":"ell","alpha":1},"gamma":0.25,"inner":{"kind":"const","c":2}}]}"#;
        let e = SvExpr::from_json(j).unwrap();
        let back = SvExpr::from_json(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(e, back);
        let nt = r#"{"kind":"norm_tail","b":{"kind":"ell","alpha":-2},"E":{"q":1},"side":"lower"}"#;
        assert!(SvExpr::from_json(nt).is_ok());
        let bad = r#"{"kind":"norm_tail","b":{"kind":"ell","alpha":-1},"E":{"q":1},"side":"lower"}"#;
        assert!(SvExpr::from_json(bad).is_err());
        let g = r#"{"kind":"compose_rho","outer":{"kind":"ell","alpha":1},"gamma":-1,"inner":{"kind":"const","c":1}}"#;
        assert!(SvExpr::from_json(g).is_err());
    }

    #[test]
    fn verify_constant() {
        let r = sv_verify(&SvExpr::one(), 0.3, &Grid::full_line(64), 1.0).unwrap();
        assert_eq!(r.increasing_constant, 1.0);
        assert_eq!(r.decreasing_constant, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn verify_ell_minus_three() {
        // t^{0.1}ℓ^{-3} peaks at t = 1 and drops by e^{1.38}/14.8^3 at 1e6.
        let g = Grid::new(1e-6, 1e6, 257).unwrap();
        let r = sv_verify(&SvExpr::ell(-3.0), 0.1, &g, 10.0).unwrap();
        let x = 1e6f64.ln();
        let want = (1.0 + x).powi(3) / (0.1 * x).exp();
        assert_relative_eq!(r.increasing_constant, want, max_relative = 1e-9);
        assert_relative_eq!(r.decreasing_constant, want, max_relative = 1e-9);
        assert!(!r.pass);
        assert!(sv_verify(&SvExpr::ell(-3.0), 0.1, &g, 1000.0).unwrap().pass);
    }

    #[test]
    fn power_of_ell_matches_ell() {
        let g = Grid::full_line(128);
        let a = SvExpr::Power { base: Box::new(SvExpr::ell(1.0)), r: -1.0 };
        let r1 = sv_verify(&a, 0.2, &g, 10.0).unwrap();
        let r2 = sv_verify(&SvExpr::ell(-1.0), 0.2, &g, 10.0).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn norm_tail_is_slowly_varying() {
        let b = SvExpr::norm_tail(SvExpr::ell(-2.0), RiSpace::L1, Side::Lower).unwrap();
        let r = sv_verify(&b, 0.25, &Grid::new(1e-8, 1e8, 64).unwrap(), 10.0).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn local_scale_bounds() {
        let (lo, hi) = sv_local_scale_bound(&SvExpr::one(), 0.3, 5.0, 2.0).unwrap();
        let k = 0.3 * 5f64.ln();
        assert_relative_eq!(lo, (-k).exp(), max_relative = 1e-12);
        assert_relative_eq!(hi, k.exp(), max_relative = 1e-12);
        let b = SvExpr::ell(1.0);
        let (lo, hi) = sv_local_scale_bound(&b, 0.5, 2.0, 1.0).unwrap();
        let v = 1.0 + 2f64.ln();
        assert!(lo <= v && v <= hi);
        let b = SvExpr::ell(-1.0);
        let (lo, hi) = sv_local_scale_bound(&b, 0.5, 1.0, 3.0).unwrap();
        let v = b.eval(3.0).unwrap();
        assert!(lo <= v * (1.0 + 1e-12) && v <= hi * (1.0 + 1e-12));
    }

    fn arb_leaf() -> impl Strategy<Value = SvExpr> {
        prop_oneof![
            (-3.0f64..3.0).prop_map(SvExpr::ell),
            ((-2.0f64..2.0), (-2.0f64..2.0)).prop_map(|(a, b)| SvExpr::broken(a, b)),
            (1u32..4, -2.0f64..2.0).prop_map(|(d, a)| SvExpr::IteratedEll { depth: d, alpha: a }),
            (0.05f64..0.95).prop_map(|a| SvExpr::ExpLogPow { alpha: a }),
            (0.1f64..10.0).prop_map(SvExpr::konst),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = SvExpr> {
        arb_leaf().prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 1..3).prop_map(|args| SvExpr::Product { args }),
                (inner.clone(), -2.0f64..2.0).prop_map(|(b, r)| SvExpr::Power { base: Box::new(b), r }),
                inner.clone().prop_map(|i| SvExpr::InverseArg { inner: Box::new(i) }),
                (inner.clone(), 0.1f64..2.0, inner).prop_map(|(o, g, i)| SvExpr::ComposeRho {
                    outer: Box::new(o),
                    gamma: g,
                    inner: Box::new(i),
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn double_inversion_is_identity(e in arb_expr(), x in -30.0f64..30.0) {
            let twice = SvExpr::InverseArg { inner: Box::new(SvExpr::InverseArg { inner: Box::new(e.clone()) }) };
            prop_assert_eq!(twice.ln_eval(x).unwrap(), e.ln_eval(x).unwrap());
        }

        #[test]
        fn values_are_positive_and_finite(e in arb_expr(), x in -40.0f64..40.0) {
            let v = e.ln_eval(x).unwrap();
            prop_assert!(v.is_finite());
        }

        #[test]
        fn scale_bracket_contains_value(e in arb_leaf(), ls in -5.0f64..5.0, lt in -5.0f64..5.0) {
            let (s, t) = (ls.exp(), lt.exp());
            let (lo, hi) = sv_local_scale_bound(&e, 0.5, s, t).unwrap();
            let v = e.eval(s * t).unwrap();
            prop_assert!(lo <= v * (1.0 + 1e-9) && v <= hi * (1.0 + 1e-9));
        }

        #[test]
        fn json_round_trip(e in arb_expr()) {
            let s = serde_json::to_string(&e).unwrap();
            let back: SvExpr = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
