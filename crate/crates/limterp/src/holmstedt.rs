//! Holmstedt-type formulas for couples with an interpolation space and an
//! ℛ- or ℒ-space as members, and the harness checking them against the
//! truncation oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{invalid, unknown_id, Error, Result};
use crate::gridfn::{Grid, GridFunction, RiSpace, Side};
use crate::kfunctional::{guarded_nested, guarded_norm, k_peetre, KProfile, OracleTable, PreparedSpace};
use crate::report::{EquivalenceReport, Sample};
use crate::spaces::{check_admissible, Setting, SpaceDescriptor};
use crate::svfunc::SvExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseKind {
    #[serde(rename = "R_interior")]
    RInterior,
    #[serde(rename = "R_theta0_zero")]
    RTheta0Zero,
    #[serde(rename = "R_x0")]
    RX0,
    #[serde(rename = "L_interior")]
    LInterior,
    #[serde(rename = "L_theta1_one")]
    LTheta1One,
    #[serde(rename = "L_x1")]
    LX1,
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [
        CaseKind::RInterior,
        CaseKind::RTheta0Zero,
        CaseKind::RX0,
        CaseKind::LInterior,
        CaseKind::LTheta1One,
        CaseKind::LX1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseKind::RInterior => "R_interior",
            CaseKind::RTheta0Zero => "R_theta0_zero",
            CaseKind::RX0 => "R_x0",
            CaseKind::LInterior => "L_interior",
            CaseKind::LTheta1One => "L_theta1_one",
            CaseKind::LX1 => "L_x1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| unknown_id(s, Self::ALL.iter().map(|k| k.as_str())))
    }

    pub fn is_r(self) -> bool {
        matches!(self, CaseKind::RInterior | CaseKind::RTheta0Zero | CaseKind::RX0)
    }
}

/// A couple `(Y₀, Y₁)` over `(L₁, L∞)` with one interpolation-space member
/// and one ℛ- or ℒ-space member. Parameters not used by the kind are
/// ignored: `θ₀` for `R_theta0_zero` (taken as 0), `θ₀, b₀, E₀` for `R_x0`,
/// `θ₁` for `L_theta1_one` (taken as 1), `θ₁, b₁, E₁` for `L_x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmstedtCase {
    pub kind: CaseKind,
    pub theta0: f64,
    pub theta1: f64,
    pub b0: SvExpr,
    pub b1: SvExpr,
    pub a: SvExpr,
    #[serde(rename = "E0")]
    pub e0: RiSpace,
    #[serde(rename = "E1")]
    pub e1: RiSpace,
    #[serde(rename = "F")]
    pub f: RiSpace,
}

/// `ρ(u) = u^γ · sv(u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rho {
    pub gamma: f64,
    pub sv: SvExpr,
}

impl Rho {
    pub fn eval(&self, u: f64) -> Result<f64> {
        Ok((self.gamma * u.ln() + self.sv.ln_eval(u.ln())?).exp())
    }
}

fn hyp(cond: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::Hypothesis(format!("{cond}: {e}"))
}

impl HolmstedtCase {
    /// A case with the given kind and parameters; hypotheses are checked.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: CaseKind,
        theta0: f64,
        theta1: f64,
        b0: SvExpr,
        b1: SvExpr,
        a: SvExpr,
        e0: RiSpace,
        e1: RiSpace,
        f: RiSpace,
    ) -> Result<Self> {
        let mut c = Self { kind, theta0, theta1, b0, b1, a, e0, e1, f };
        match kind {
            CaseKind::RTheta0Zero => c.theta0 = 0.0,
            CaseKind::LTheta1One => c.theta1 = 1.0,
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        use CaseKind::*;
        let open = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("need 0 < {name} < 1, got {v}")))
            }
        };
        for s in [&self.b0, &self.b1, &self.a] {
            s.validate()?;
        }
        match self.kind {
            RInterior | LInterior => {
                open("theta0", self.theta0)?;
                open("theta1", self.theta1)?;
                if !(self.theta0 < self.theta1) {
                    return Err(invalid("theta0", "need theta0 < theta1"));
                }
            }
            RTheta0Zero | RX0 => open("theta1", self.theta1)?,
            LTheta1One | LX1 => open("theta0", self.theta0)?,
        }
        if matches!(self.kind, RTheta0Zero | LInterior | LTheta1One | LX1) {
            self.b0_upper()?;
        }
        if matches!(self.kind, RInterior | RTheta0Zero | RX0 | LTheta1One) {
            self.b1_lower()?;
        }
        Ok(())
    }

    /// `‖b₁‖_{Ẽ₁(0,u)}`.
    pub fn b1_lower(&self) -> Result<SvExpr> {
        SvExpr::norm_tail(self.b1.clone(), self.e1, Side::Lower).map_err(hyp("‖b1‖_E1~(0,1) < ∞"))
    }

    /// `‖b₀‖_{Ẽ₀(u,∞)}`.
    pub fn b0_upper(&self) -> Result<SvExpr> {
        SvExpr::norm_tail(self.b0.clone(), self.e0, Side::Upper).map_err(hyp("‖b0‖_E0~(1,∞) < ∞"))
    }

    pub fn id(&self) -> &'static str {
        self.kind.as_str()
    }

    /// The couple `(Y₀, Y₁)`.
    pub fn members(&self) -> (SpaceDescriptor, SpaceDescriptor) {
        use CaseKind::*;
        let full = Setting::Full;
        let c = self;
        match c.kind {
            RInterior | RTheta0Zero | RX0 => {
                let y0 = match c.kind {
                    RX0 => SpaceDescriptor::x0(full),
                    _ => SpaceDescriptor::theta(c.theta0, c.b0.clone(), c.e0, full),
                };
                (y0, SpaceDescriptor::r(c.theta1, c.b1.clone(), c.e1, c.a.clone(), c.f, full))
            }
            LInterior | LTheta1One | LX1 => {
                let y1 = match c.kind {
                    LX1 => SpaceDescriptor::x1(full),
                    _ => SpaceDescriptor::theta(c.theta1, c.b1.clone(), c.e1, full),
                };
                (SpaceDescriptor::l(c.theta0, c.b0.clone(), c.e0, c.a.clone(), c.f, full), y1)
            }
        }
    }

    /// The same couple over the reversed base couple `(L∞, L₁)`, written as
    /// a case of the opposite side: `(Y₀, Y₁)` reversed is `(Y₁', Y₀')`.
    pub fn mirrored(&self) -> Result<Self> {
        use CaseKind::*;
        let kind = match self.kind {
            RInterior => LInterior,
            RTheta0Zero => LTheta1One,
            RX0 => LX1,
            LInterior => RInterior,
            LTheta1One => RTheta0Zero,
            LX1 => RX0,
        };
        Self::new(
            kind,
            1.0 - self.theta1,
            1.0 - self.theta0,
            self.b1.clone().inverse_arg(),
            self.b0.clone().inverse_arg(),
            self.a.clone().inverse_arg(),
            self.e1,
            self.e0,
            self.f,
        )
    }
}

/// `ρ` for the case, as a power times a slowly varying factor.
pub fn rho_of(case: &HolmstedtCase) -> Result<Rho> {
    use CaseKind::*;
    case.validate()?;
    let c = case;
    let ainv = c.a.clone().recip();
    let (gamma, sv) = match c.kind {
        RInterior => (
            c.theta1 - c.theta0,
            SvExpr::product(vec![c.b0.clone(), ainv, c.b1_lower()?.recip()]),
        ),
        RTheta0Zero => (
            c.theta1,
            SvExpr::product(vec![c.b0_upper()?, ainv, c.b1_lower()?.recip()]),
        ),
        RX0 => (c.theta1, SvExpr::product(vec![ainv, c.b1_lower()?.recip()])),
        LInterior => (
            c.theta1 - c.theta0,
            SvExpr::product(vec![c.a.clone(), c.b0_upper()?, c.b1.clone().recip()]),
        ),
        LTheta1One => (
            1.0 - c.theta0,
            SvExpr::product(vec![c.a.clone(), c.b0_upper()?, c.b1_lower()?.recip()]),
        ),
        LX1 => (1.0 - c.theta0, SvExpr::product(vec![c.a.clone(), c.b0_upper()?])),
    };
    Ok(Rho { gamma, sv })
}

/// The case's weights sampled on a grid.
#[derive(Debug, Clone)]
pub struct PreparedRhs {
    case: HolmstedtCase,
    grid: Grid,
    rho: Rho,
    /// `t^{-θ₀} b₀` (R) or `t^{-θ₁} b₁` (L): the plain interpolation term.
    w_plain: Vec<f64>,
    /// `s^{-θ} a` inside the nested norms.
    w_in: Vec<f64>,
    /// `b₁` (R) or `b₀` (L) on the inner norm.
    w_out: Vec<f64>,
    /// `‖b₁‖_{Ẽ₁(0,u)}` (R) or `‖b₀‖_{Ẽ₀(u,∞)}` (L).
    tail: SvExpr,
}

fn weight(grid: &Grid, theta: f64, b: &SvExpr) -> Result<Vec<f64>> {
    Ok(b.ln_sample(grid)?
        .into_iter()
        .zip(grid.log_points())
        .map(|(l, x)| (l - theta * x).exp())
        .collect())
}

impl PreparedRhs {
    pub fn new(case: &HolmstedtCase, grid: &Grid) -> Result<Self> {
        let rho = rho_of(case)?;
        let c = case;
        let (w_plain, w_in, w_out, tail) = if c.kind.is_r() {
            let plain = match c.kind {
                CaseKind::RX0 => vec![0.0; grid.n],
                _ => weight(grid, c.theta0, &c.b0)?,
            };
            (plain, weight(grid, c.theta1, &c.a)?, weight(grid, 0.0, &c.b1)?, c.b1_lower()?)
        } else {
            let plain = match c.kind {
                CaseKind::LX1 => vec![0.0; grid.n],
                _ => weight(grid, c.theta1, &c.b1)?,
            };
            (plain, weight(grid, c.theta0, &c.a)?, weight(grid, 0.0, &c.b0)?, c.b0_upper()?)
        };
        Ok(Self { case: case.clone(), grid: *grid, rho, w_plain, w_in, w_out, tail })
    }

    pub fn rho(&self) -> &Rho {
        &self.rho
    }

    /// The individual terms at `u`, in display order; `+∞` for a divergent
    /// term.
    pub fn terms(&self, k: &KProfile, u: f64) -> Result<Vec<f64>> {
        let g = &self.grid;
        if *k.grid() != *g {
            return Err(invalid("K", "profile and case prepared on different grids"));
        }
        let (lo, hi) = (g.cell_lo(0), g.cell_hi(g.n - 1));
        if !(u >= lo && u <= hi) {
            return Err(invalid("u", format!("{u} outside the grid span [{lo}, {hi}]")));
        }
        let kv = k.values();
        let mul = |w: &[f64], v: &[f64]| -> Vec<f64> { w.iter().zip(v).map(|(a, b)| a * b).collect() };
        let rho = self.rho.eval(u)?;
        let tail = self.tail.eval(u)?;
        let c = &self.case;
        let inf = f64::INFINITY;
        let mut out = Vec::with_capacity(3);
        if c.kind.is_r() {
            if c.kind != CaseKind::RX0 {
                out.push(guarded_norm(g, &mul(&self.w_plain, kv), c.e0, 0.0, u, true, false)?);
            }
            let inner = guarded_nested(g, &mul(&self.w_in, kv), c.f, Side::Upper, inf, true)?;
            match inner {
                None => out.extend([inf, inf]),
                Some(inner) => {
                    let at_u = guarded_norm(g, &mul(&self.w_in, kv), c.f, u, inf, false, true)?;
                    out.push(rho * tail * at_u);
                    out.push(rho * guarded_norm(g, &mul(&self.w_out, &inner), c.e1, u, inf, false, true)?);
                }
            }
        } else {
            let inner = guarded_nested(g, &mul(&self.w_in, kv), c.f, Side::Lower, inf, true)?;
            match inner {
                None => out.extend([inf, inf]),
                Some(inner) => {
                    out.push(guarded_norm(g, &mul(&self.w_out, &inner), c.e0, 0.0, u, true, false)?);
                    let at_u = guarded_norm(g, &mul(&self.w_in, kv), c.f, 0.0, u, true, false)?;
                    out.push(tail * at_u);
                }
            }
            if c.kind != CaseKind::LX1 {
                out.push(rho * guarded_norm(g, &mul(&self.w_plain, kv), c.e1, u, inf, false, true)?);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, k: &KProfile, u: f64) -> Result<f64> {
        Ok(self.terms(k, u)?.into_iter().sum())
    }
}

/// Right-hand side of the case's formula for `f` at `u`, from the Peetre K.
pub fn holmstedt_rhs(case: &HolmstedtCase, fstar: &GridFunction, u: f64) -> Result<f64> {
    let k = k_peetre(fstar)?;
    PreparedRhs::new(case, &fstar.grid)?.eval(&k, u)
}

/// Comparison points: interior nodes with index divisible by `stride`, so
/// that on nested grids the coarse points reappear on the fine grid.
pub fn u_points(grid: &Grid, stride: usize) -> Vec<f64> {
    let s = stride.max(1);
    grid.interior().filter(|i| i % s == 0).map(|i| grid.t(i)).collect()
}

pub const DEFAULT_STRIDE: usize = 8;

/// Compares the oracle `K(ρ(u), f; Y₀, Y₁)` with the right-hand side for
/// every corpus function, grid and sampled `u`.
pub fn verify_holmstedt(case: &HolmstedtCase, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    verify_holmstedt_with(case, corpus, grids, DEFAULT_STRIDE)
}

pub fn verify_holmstedt_with(
    case: &HolmstedtCase,
    corpus: &Corpus,
    grids: &[Grid],
    stride: usize,
) -> Result<EquivalenceReport> {
    case.validate()?;
    let (y0, y1) = case.members();
    let mut notes = Vec::new();
    for y in [&y0, &y1] {
        let adm = check_admissible(y)?;
        if adm.trivial {
            return Err(Error::Inadmissible(adm.failed_conditions));
        }
        notes.extend(adm.notes);
    }
    let jobs: Vec<(usize, &Grid)> = (0..corpus.members.len())
        .flat_map(|i| grids.iter().map(move |g| (i, g)))
        .collect();
    let results: Vec<Result<(Vec<Sample>, f64)>> = jobs
        .par_iter()
        .map(|&(i, grid)| -> Result<(Vec<Sample>, f64)> {
            let m = &corpus.members[i];
            let fstar = m.sample(grid)?;
            let k = k_peetre(&fstar)?;
            let rhs = PreparedRhs::new(case, grid)?;
            let p0 = PreparedSpace::new(&y0, grid)?;
            let p1 = PreparedSpace::new(&y1, grid)?;
            let table = OracleTable::build_with_k(&fstar, k.values(), &p0, &p1)?;
            let mut rows = Vec::new();
            let mut gap: f64 = 1.0;
            for u in u_points(grid, stride) {
                let t = rhs.rho().eval(u)?;
                let lhs = table.k(t);
                if lhs > 0.0 && lhs.is_finite() {
                    gap = gap.max(table.trivial_k(t) / lhs);
                }
                rows.push(Sample { function_id: m.id.clone(), n: grid.cells(), u, lhs, rhs: rhs.eval(&k, u)? });
            }
            Ok((rows, gap))
        })
        .collect();
    let mut rows = Vec::new();
    let mut gap: f64 = 1.0;
    for r in results {
        let (r, g) = r?;
        rows.extend(r);
        gap = gap.max(g);
    }
    notes.dedup();
    let trunc = grids.first().map_or((0.0, 0.0), |g| (g.cell_lo(0), g.cell_hi(g.n - 1)));
    Ok(EquivalenceReport::build(
        case.id(),
        trunc,
        corpus.members.iter().map(|m| m.id.clone()).collect(),
        rows,
        Some(gap),
        notes,
    ))
}

/// Parameter sweep over `b₀, b₁, a ∈ {1, ℓ^{±1/2}}` and `E₀, E₁, F ∈ {L₂,
/// L∞}` with `{θ₀, θ₁} = {1/4, 1/2}`, keeping the combinations whose
/// hypotheses hold and whose members are admissible.
pub fn parameter_sweep(kind: CaseKind) -> Vec<HolmstedtCase> {
    let svs = [SvExpr::one(), SvExpr::ell(0.5), SvExpr::ell(-0.5)];
    let es = [RiSpace::L2, RiSpace::LINF];
    let mut out: Vec<HolmstedtCase> = Vec::new();
    for b0 in &svs {
        for b1 in &svs {
            for a in &svs {
                for e0 in es {
                    for e1 in es {
                        for f in es {
                            let Ok(c) = HolmstedtCase::new(kind, 0.25, 0.5, b0.clone(), b1.clone(), a.clone(), e0, e1, f) else {
                                continue;
                            };
                            let (y0, y1) = c.members();
                            let ok = [y0, y1].iter().all(|y| check_admissible(y).is_ok_and(|a| !a.trivial));
                            // Parameters a kind ignores give duplicates.
                            if ok && !out.iter().any(|o| o.members() == c.members()) {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_case(kind: CaseKind, e: RiSpace) -> HolmstedtCase {
        HolmstedtCase::new(kind, 0.25, 0.5, SvExpr::one(), SvExpr::one(), SvExpr::one(), e, RiSpace::LINF, e).unwrap()
    }

    fn chi1(g: Grid) -> GridFunction {
        crate::corpus::FnSpec::Chi { a: 1.0 }.sample(&g).unwrap()
    }

    #[test]
    fn rho_examples() {
        let c = unit_case(CaseKind::RX0, RiSpace::LINF);
        let r = rho_of(&c).unwrap();
        assert_eq!(r.gamma, 0.5);
        for u in [1e-3, 0.5, 7.0] {
            assert_relative_eq!(r.eval(u).unwrap(), u.sqrt(), max_relative = 1e-10);
        }
        let c = HolmstedtCase::new(
            CaseKind::RInterior, 0.25, 0.5, SvExpr::one(), SvExpr::one(), SvExpr::one(),
            RiSpace::L2, RiSpace::L2, RiSpace::L2,
        );
        // ‖1‖_{L̃₂(0,u)} diverges.
        assert!(matches!(c, Err(Error::Hypothesis(_))));
        // ‖ℓ^{-2}‖_{L̃₁(u,∞)} = 2 - 1/ℓ(u) for u < 1.
        let c = HolmstedtCase::new(
            CaseKind::LX1, 0.5, 1.0, SvExpr::ell(-2.0), SvExpr::one(), SvExpr::one(),
            RiSpace::L1, RiSpace::LINF, RiSpace::LINF,
        )
        .unwrap();
        let r = rho_of(&c).unwrap();
        for u in [1e-4, 0.01, 0.5] {
            let l = 1.0 - f64::ln(u);
            assert_relative_eq!(r.eval(u).unwrap(), u.sqrt() * (2.0 - 1.0 / l), max_relative = 1e-6);
        }
    }

    #[test]
    fn rho_increases() {
        let g = Grid::full_line(257);
        for kind in CaseKind::ALL {
            for c in parameter_sweep(kind) {
                let r = rho_of(&c).unwrap();
                let v: Vec<f64> = g.interior().map(|i| r.eval(g.t(i)).unwrap()).collect();
                // Slowly varying factors may bend ρ locally; it stays within a
                // fixed factor of its running maximum and grows overall.
                let mut run: f64 = 0.0;
                for x in &v {
                    run = run.max(*x);
                    assert!(run / x < 10.0, "{kind:?} {c:?}");
                }
                assert!(v[v.len() - 1] > 10.0 * v[0]);
            }
        }
    }

    #[test]
    fn zero_function_gives_zero() {
        let g = Grid::full_line(257);
        let z = GridFunction::zeros(g);
        for kind in CaseKind::ALL {
            let c = &parameter_sweep(kind)[0];
            assert_eq!(holmstedt_rhs(c, &z, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn r_x0_terms_for_indicator() {
        let g = Grid::full_line(1025);
        let c = unit_case(CaseKind::RX0, RiSpace::LINF);
        let k = k_peetre(&chi1(g)).unwrap();
        let t = PreparedRhs::new(&c, &g).unwrap().terms(&k, 1.0).unwrap();
        // sup_{t>1} t^{-1/2} min(t,1) = 1 for both terms.
        assert_eq!(t.len(), 2);
        // The jump at 1 is resolved to one cell.
        assert_relative_eq!(t[0], 1.0, max_relative = 2e-2);
        assert_relative_eq!(t[1], 1.0, max_relative = 2e-2);
    }

    #[test]
    fn r_interior_closed_form() {
        // All-unit parameters with sup norms and K = min(t,1):
        // u ≥ 1: 1 + ρ(u)·u^{-1/2} + ρ(u)·u^{-1/2} with ρ(u) = u^{1/4}.
        let g = Grid::full_line(2049);
        let c = unit_case(CaseKind::RInterior, RiSpace::LINF);
        let k = k_peetre(&chi1(g)).unwrap();
        let p = PreparedRhs::new(&c, &g).unwrap();
        for u in [1.0f64, 4.0, 100.0] {
            let want = 1.0 + 2.0 * u.powf(0.25) * u.powf(-0.5);
            assert_relative_eq!(p.eval(&k, u).unwrap(), want, max_relative = 2e-2);
        }
        // u < 1: u^{3/4} + 2 u^{1/4} (the upper sups are attained at t = 1).
        for u in [1e-3f64, 0.1] {
            let want = u.powf(0.75) + 2.0 * u.powf(0.25);
            assert_relative_eq!(p.eval(&k, u).unwrap(), want, max_relative = 2e-2);
        }
    }

    #[test]
    fn mirrored_case_matches_after_reversal() {
        // K(ρ(u); Y₀, Y₁) = ρ(u)·K̄(1/ρ(u); Y₁', Y₀') and 1/ρ(u) = ρ'(1/u),
        // so the right-hand sides agree term by term.
        let g = Grid::full_line(1025);
        assert!(g.is_symmetric());
        let f = crate::corpus::FnSpec::PowLog { r: 2.0, m: 1.0 }.sample(&g).unwrap();
        let k = k_peetre(&f).unwrap();
        let kr = k.reverse().unwrap();
        for kind in [CaseKind::RInterior, CaseKind::RTheta0Zero, CaseKind::RX0] {
            for c in parameter_sweep(kind).into_iter().take(6) {
                let m = c.mirrored().unwrap();
                let p = PreparedRhs::new(&c, &g).unwrap();
                let pm = PreparedRhs::new(&m, &g).unwrap();
                for i in g.interior().step_by(64) {
                    let u = g.t(i);
                    let lhs = p.eval(&k, u).unwrap();
                    let rhs = p.rho().eval(u).unwrap() * pm.eval(&kr, g.t(g.n - 1 - i)).unwrap();
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
                    assert_relative_eq!(
                        pm.rho().eval(g.t(g.n - 1 - i)).unwrap() * p.rho().eval(u).unwrap(),
                        1.0,
                        max_relative = 1e-8
                    );
                }
            }
        }
    }

    #[test]
    fn homogeneous_rows() {
        let g = [Grid::full_line(257)];
        let c = unit_case(CaseKind::RX0, RiSpace::LINF);
        let corpus = Corpus::from_specs("s", &["chi:0.5", "2*chi:0.5"]).unwrap();
        let r = verify_holmstedt(&c, &corpus, &g).unwrap();
        let (a, b): (Vec<_>, Vec<_>) = r.rows.iter().partition(|s| s.function_id == "chi:0.5");
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.ratio(), y.ratio(), max_relative = 1e-12);
        }
    }

    #[test]
    fn indicator_window_is_finite() {
        let c = unit_case(CaseKind::RX0, RiSpace::LINF);
        let corpus = Corpus::chi();
        let grids = [Grid::full_line(257), Grid::full_line(513)];
        let r = verify_holmstedt(&c, &corpus, &grids).unwrap();
        assert!(r.window.is_finite() && r.window < 100.0, "{}", r.window);
        assert!(r.oracle_gap.unwrap() >= 1.0);
    }

    #[test]
    fn sweep_is_nonempty() {
        for kind in CaseKind::ALL {
            assert!(!parameter_sweep(kind).is_empty(), "{kind:?}");
        }
    }
}
