//! Reiteration: the space `(Y₀, Y₁)_{θ,b,E}` for the couples of
//! [`crate::holmstedt`], identified as a single space over `(L₁, L∞)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{invalid, unknown_id, Error, Result};
use crate::gridfn::{Grid, RiSpace, Side};
use crate::holmstedt::{rho_of, CaseKind, HolmstedtCase, Rho};
use crate::kfunctional::{k_peetre, NormInput, PreparedSpace};
use crate::report::{EquivalenceReport, Sample};
use crate::spaces::{check_admissible, Setting, SpaceDescriptor};
use crate::svfunc::SvExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReiterationKind {
    #[serde(rename = "ThmR_interior")]
    RInterior,
    #[serde(rename = "ThmR_theta0_zero")]
    RTheta0Zero,
    #[serde(rename = "ThmR_x0")]
    RX0,
    #[serde(rename = "ThmL_interior")]
    LInterior,
    #[serde(rename = "ThmL_theta1_one")]
    LTheta1One,
    #[serde(rename = "ThmL_x1")]
    LX1,
}

impl ReiterationKind {
    pub const ALL: [ReiterationKind; 6] = [
        ReiterationKind::RInterior,
        ReiterationKind::RTheta0Zero,
        ReiterationKind::RX0,
        ReiterationKind::LInterior,
        ReiterationKind::LTheta1One,
        ReiterationKind::LX1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReiterationKind::RInterior => "ThmR_interior",
            ReiterationKind::RTheta0Zero => "ThmR_theta0_zero",
            ReiterationKind::RX0 => "ThmR_x0",
            ReiterationKind::LInterior => "ThmL_interior",
            ReiterationKind::LTheta1One => "ThmL_theta1_one",
            ReiterationKind::LX1 => "ThmL_x1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| unknown_id(s, Self::ALL.iter().map(|k| k.as_str())))
    }

    pub fn couple_kind(self) -> CaseKind {
        match self {
            ReiterationKind::RInterior => CaseKind::RInterior,
            ReiterationKind::RTheta0Zero => CaseKind::RTheta0Zero,
            ReiterationKind::RX0 => CaseKind::RX0,
            ReiterationKind::LInterior => CaseKind::LInterior,
            ReiterationKind::LTheta1One => CaseKind::LTheta1One,
            ReiterationKind::LX1 => CaseKind::LX1,
        }
    }

    pub fn of_couple(k: CaseKind) -> Self {
        Self::ALL.into_iter().find(|r| r.couple_kind() == k).expect("one kind per couple")
    }
}

/// The couple and the outer parameters `(θ, b, E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReiterationCase {
    pub couple: HolmstedtCase,
    pub theta: f64,
    pub b: SvExpr,
    #[serde(rename = "E")]
    pub e: RiSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    pub rho: Rho,
    pub theta_tilde: f64,
    /// `B_θ`; at `θ ∈ {0, 1}` the weight `B₀` / `B₁` of the branch (the
    /// plain `b∘ρ` where the branch has no such weight).
    pub weight: SvExpr,
}

impl ReiterationCase {
    pub fn new(couple: HolmstedtCase, theta: f64, b: SvExpr, e: RiSpace) -> Result<Self> {
        let c = Self { couple, theta, b, e };
        c.validate()?;
        Ok(c)
    }

    pub fn kind(&self) -> ReiterationKind {
        ReiterationKind::of_couple(self.couple.kind)
    }

    pub fn validate(&self) -> Result<()> {
        self.couple.validate()?;
        self.b.validate()?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid("theta", "outer theta must lie in [0, 1]"));
        }
        let hyp = |cond: &'static str| move |e: Error| Error::Hypothesis(format!("{cond}: {e}"));
        if self.theta == 0.0 {
            SvExpr::norm_tail(self.b.clone(), self.e, Side::Upper).map_err(hyp("‖b‖_E~(1,∞) < ∞"))?;
        }
        if self.theta == 1.0 {
            SvExpr::norm_tail(self.b.clone(), self.e, Side::Lower).map_err(hyp("‖b‖_E~(0,1) < ∞"))?;
        }
        Ok(())
    }

    /// `(Y₀, Y₁)_{θ,b,E}` as a descriptor evaluated through the oracle.
    pub fn lhs(&self) -> SpaceDescriptor {
        let (y0, y1) = self.couple.members();
        SpaceDescriptor::over(y0, y1, SpaceDescriptor::theta(self.theta, self.b.clone(), self.e, Setting::Full))
    }

    /// The case on the reversed base couple, with `θ ↦ 1 - θ` and
    /// `b ↦ b(1/·)`.
    pub fn mirrored(&self) -> Result<Self> {
        Self::new(self.couple.mirrored()?, 1.0 - self.theta, self.b.clone().inverse_arg(), self.e)
    }
}

/// `ρ`, `θ̃` and the weight of the identified space.
pub fn derived_params(case: &ReiterationCase) -> Result<DerivedParams> {
    use ReiterationKind::*;
    case.validate()?;
    let c = &case.couple;
    let th = case.theta;
    let rho = rho_of(c)?;
    let b_rho = case.b.clone().compose(rho.gamma, rho.sv.clone())?;
    let a_b1 = || -> Result<SvExpr> { Ok(c.a.clone().mul(c.b1_lower()?)) };
    let a_b0 = || -> Result<SvExpr> { Ok(c.a.clone().mul(c.b0_upper()?)) };
    let interp = |x: SvExpr, y: SvExpr| SvExpr::product(vec![x.pow(1.0 - th), y.pow(th), b_rho.clone()]);
    let (theta_tilde, weight) = match case.kind() {
        RInterior | RTheta0Zero if th == 1.0 => (c.theta1, c.b1_lower()?.mul(b_rho.clone())),
        RX0 if th == 1.0 => (c.theta1, c.b1_lower()?.mul(b_rho.clone())),
        RInterior if th == 0.0 => (c.theta0, b_rho.clone()),
        RTheta0Zero if th == 0.0 => (0.0, c.b0_upper()?.mul(b_rho.clone())),
        RInterior => ((1.0 - th) * c.theta0 + th * c.theta1, interp(c.b0.clone(), a_b1()?)),
        RTheta0Zero => (th * c.theta1, interp(c.b0_upper()?, a_b1()?)),
        RX0 => (th * c.theta1, a_b1()?.pow(th).mul(b_rho.clone())),
        LInterior | LTheta1One | LX1 if th == 0.0 => (c.theta0, c.b0_upper()?.mul(b_rho.clone())),
        LInterior if th == 1.0 => (c.theta1, b_rho.clone()),
        LTheta1One if th == 1.0 => (1.0, c.b1_lower()?.mul(b_rho.clone())),
        LInterior => ((1.0 - th) * c.theta0 + th * c.theta1, interp(a_b0()?, c.b1.clone())),
        LTheta1One => ((1.0 - th) * c.theta0 + th, interp(a_b0()?, c.b1_lower()?)),
        LX1 => ((1.0 - th) * c.theta0 + th, a_b0()?.pow(1.0 - th).mul(b_rho.clone())),
    };
    Ok(DerivedParams { rho, theta_tilde, weight })
}

/// The space over `(L₁, L∞)` equal to `(Y₀, Y₁)_{θ,b,E}`.
pub fn reiterate(case: &ReiterationCase) -> Result<SpaceDescriptor> {
    use ReiterationKind::*;
    let p = derived_params(case)?;
    let c = &case.couple;
    let (th, e) = (case.theta, case.e);
    let full = Setting::Full;
    let b_rho = case.b.clone().compose(p.rho.gamma, p.rho.sv.clone())?;
    let theta = |t: f64, w: SvExpr| SpaceDescriptor::theta(t, w, e, full);
    let r_rr = || {
        SpaceDescriptor::intersection(vec![
            SpaceDescriptor::r(c.theta1, p.weight.clone(), e, c.a.clone(), c.f, full),
            SpaceDescriptor::rr(c.theta1, b_rho.clone(), e, c.b1.clone(), c.e1, c.a.clone(), c.f, full),
        ])
    };
    let l_ll = || {
        SpaceDescriptor::intersection(vec![
            SpaceDescriptor::l(c.theta0, p.weight.clone(), e, c.a.clone(), c.f, full),
            SpaceDescriptor::ll(c.theta0, b_rho.clone(), e, c.b0.clone(), c.e0, c.a.clone(), c.f, full),
        ])
    };
    Ok(match case.kind() {
        RInterior | RTheta0Zero | RX0 if th == 1.0 => r_rr(),
        RInterior if th == 0.0 => SpaceDescriptor::l(c.theta0, b_rho, e, c.b0.clone(), c.e0, full),
        RTheta0Zero if th == 0.0 => SpaceDescriptor::intersection(vec![
            theta(0.0, p.weight),
            SpaceDescriptor::l(0.0, b_rho, e, c.b0.clone(), c.e0, full),
        ]),
        LInterior | LTheta1One | LX1 if th == 0.0 => l_ll(),
        LInterior if th == 1.0 => SpaceDescriptor::r(c.theta1, b_rho, e, c.b1.clone(), c.e1, full),
        LTheta1One if th == 1.0 => SpaceDescriptor::intersection(vec![
            theta(1.0, p.weight),
            SpaceDescriptor::r(1.0, b_rho, e, c.b1.clone(), c.e1, full),
        ]),
        _ => theta(p.theta_tilde, p.weight),
    })
}

/// Compares `‖f‖_{(Y₀,Y₁)_{θ,b,E}}` (oracle K of the couple) with the norm in
/// the identified space (Peetre K) over the corpus and grids. Rows carry
/// `u = 0`: each function gives one whole-norm ratio per grid.
pub fn verify_reiteration(case: &ReiterationCase, corpus: &Corpus, grids: &[Grid]) -> Result<EquivalenceReport> {
    let lhs = case.lhs();
    let rhs = reiterate(case)?;
    let mut notes = Vec::new();
    for d in [&lhs, &rhs] {
        let adm = check_admissible(d)?;
        if adm.trivial {
            return Err(Error::Inadmissible(adm.failed_conditions));
        }
        notes.extend(adm.notes);
    }
    notes.dedup();
    let id = format!("{}@theta={}", case.kind().as_str(), case.theta);
    compare_norms(&id, &lhs, &rhs, corpus, grids, notes)
}

/// One whole-norm comparison per corpus function and grid.
pub(crate) fn compare_norms(
    id: &str,
    lhs: &SpaceDescriptor,
    rhs: &SpaceDescriptor,
    corpus: &Corpus,
    grids: &[Grid],
    notes: Vec<String>,
) -> Result<EquivalenceReport> {
    lhs.validate()?;
    rhs.validate()?;
    let jobs: Vec<(usize, &Grid)> = (0..corpus.members.len())
        .flat_map(|i| grids.iter().map(move |g| (i, g)))
        .collect();
    let rows: Vec<Result<Sample>> = jobs
        .par_iter()
        .map(|&(i, grid)| {
            let m = &corpus.members[i];
            let fstar = m.sample(grid)?;
            let k = k_peetre(&fstar)?;
            let input = NormInput { k: k.values(), fstar: Some(&fstar) };
            let l = PreparedSpace::new(lhs, grid)?.eval(&input)?;
            let r = PreparedSpace::new(rhs, grid)?.eval(&input)?;
            Ok(Sample { function_id: m.id.clone(), n: grid.cells(), u: 0.0, lhs: l, rhs: r })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let trunc = grids.first().map_or((0.0, 0.0), |g| (g.cell_lo(0), g.cell_hi(g.n - 1)));
    Ok(EquivalenceReport::build(
        id,
        trunc,
        corpus.members.iter().map(|m| m.id.clone()).collect(),
        rows,
        None,
        notes,
    ))
}

/// A fixed couple per kind for the harness: `θ₀ = 1/4`, `θ₁ = 1/2`,
/// `b₀ = b₁ = a = 1`, `E₀ = E₁ = F = L₂`, with the sup norm where a tail
/// condition needs it. The endpoint members `θ = 0, 1` get `b = ℓ^{-1}` in
/// `L₂` so that they differ from `X₀`, `X₁`.
pub fn standard_couple(kind: CaseKind) -> HolmstedtCase {
    let (mut b0, mut b1) = (SvExpr::one(), SvExpr::one());
    let (mut e0, mut e1) = (RiSpace::L2, RiSpace::L2);
    match kind {
        CaseKind::RInterior | CaseKind::RX0 => e1 = RiSpace::LINF,
        CaseKind::RTheta0Zero => {
            b0 = SvExpr::ell(-1.0);
            e1 = RiSpace::LINF;
        }
        CaseKind::LInterior | CaseKind::LX1 => e0 = RiSpace::LINF,
        CaseKind::LTheta1One => {
            b1 = SvExpr::ell(-1.0);
            e0 = RiSpace::LINF;
        }
    }
    HolmstedtCase::new(kind, 0.25, 0.5, b0, b1, SvExpr::one(), e0, e1, RiSpace::L2)
        .expect("standard couple satisfies the hypotheses")
}

/// Outer parameters for `θ`: `b = 1`, `E = L₂` inside, `b = ℓ^{-1}` at the
/// ends where a tail condition is needed.
pub fn standard_case(kind: ReiterationKind, theta: f64) -> Result<ReiterationCase> {
    let b = if theta == 0.0 || theta == 1.0 { SvExpr::ell(-1.0) } else { SvExpr::one() };
    ReiterationCase::new(standard_couple(kind.couple_kind()), theta, b, RiSpace::L2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::couple_reverse;
    use approx::assert_relative_eq;

    #[test]
    fn theta_tilde_examples() {
        let c = standard_case(ReiterationKind::RInterior, 0.5).unwrap();
        assert_eq!(derived_params(&c).unwrap().theta_tilde, 0.375);
        let x0 = HolmstedtCase::new(
            CaseKind::RX0, 0.0, 0.5, SvExpr::one(), SvExpr::ell(-0.5), SvExpr::ell(0.5),
            RiSpace::L2, RiSpace::LINF, RiSpace::L2,
        )
        .unwrap();
        let c = ReiterationCase::new(x0.clone(), 0.5, SvExpr::one(), RiSpace::L2).unwrap();
        let p = derived_params(&c).unwrap();
        assert_eq!(p.theta_tilde, 0.25);
        let tail = x0.b1_lower().unwrap();
        for u in [1e-3, 0.5, 20.0] {
            let want = (x0.a.eval(u).unwrap() * tail.eval(u).unwrap()).sqrt();
            assert_relative_eq!(p.weight.eval(u).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn branch_shapes() {
        let d = reiterate(&standard_case(ReiterationKind::RInterior, 0.0).unwrap()).unwrap();
        assert!(matches!(d, SpaceDescriptor::L { .. }));
        let d = reiterate(&standard_case(ReiterationKind::LTheta1One, 1.0).unwrap()).unwrap();
        let SpaceDescriptor::Intersection { members } = d else { panic!() };
        assert!(matches!(members[0], SpaceDescriptor::Theta { theta, .. } if theta == 1.0));
        assert!(matches!(members[1], SpaceDescriptor::R { theta, .. } if theta == 1.0));
        let d = reiterate(&standard_case(ReiterationKind::RX0, 1.0).unwrap()).unwrap();
        let SpaceDescriptor::Intersection { members } = d else { panic!() };
        assert!(matches!(members[0], SpaceDescriptor::R { .. }));
        assert!(matches!(members[1], SpaceDescriptor::RR { .. }));
        let d = reiterate(&standard_case(ReiterationKind::LX1, 1.0).unwrap()).unwrap();
        assert!(matches!(d, SpaceDescriptor::Theta { theta, .. } if theta == 1.0));
    }

    #[test]
    fn outer_tail_conditions() {
        let c = standard_couple(CaseKind::RInterior);
        assert!(ReiterationCase::new(c.clone(), 0.0, SvExpr::one(), RiSpace::L2).is_err());
        assert!(ReiterationCase::new(c.clone(), 1.0, SvExpr::one(), RiSpace::LINF).is_ok());
        assert!(ReiterationCase::new(c, 1.0, SvExpr::ell(0.5), RiSpace::LINF).is_err());
    }

    #[test]
    fn emitted_descriptors_are_admissible() {
        for kind in ReiterationKind::ALL {
            for th in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let d = reiterate(&standard_case(kind, th).unwrap()).unwrap();
                let adm = check_admissible(&d).unwrap();
                assert!(!adm.trivial, "{kind:?} {th} {:?}", adm.failed_conditions);
            }
        }
    }

    #[test]
    fn weight_is_log_linear_in_theta() {
        let kind = ReiterationKind::LInterior;
        let ps: Vec<DerivedParams> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&t| derived_params(&standard_case(kind, t).unwrap()).unwrap())
            .collect();
        assert_relative_eq!(ps[1].theta_tilde, 0.5 * (ps[0].theta_tilde + ps[2].theta_tilde), epsilon = 1e-15);
        // With b = 1, ln B_θ is affine in θ.
        for u in [1e-5, 0.3, 40.0] {
            let l: Vec<f64> = ps.iter().map(|p| p.weight.eval(u).unwrap().ln()).collect();
            assert_relative_eq!(l[1], 0.5 * (l[0] + l[2]), epsilon = 1e-9);
        }
    }

    #[test]
    fn l_side_is_the_mirror_of_the_r_side() {
        // Reversing the reiterated R-side space of the mirrored case gives
        // the L-side identification.
        for kind in [ReiterationKind::LInterior, ReiterationKind::LTheta1One, ReiterationKind::LX1] {
            for th in [0.25, 0.5] {
                let c = standard_case(kind, th).unwrap();
                let direct = reiterate(&c).unwrap();
                let via = couple_reverse(&reiterate(&c.mirrored().unwrap()).unwrap()).unwrap();
                let (SpaceDescriptor::Theta { theta: t1, b: b1, .. }, SpaceDescriptor::Theta { theta: t2, b: b2, .. }) =
                    (&direct, &via)
                else {
                    panic!("{direct:?} {via:?}")
                };
                assert_relative_eq!(*t1, *t2, epsilon = 1e-15);
                for u in [1e-6, 0.2, 3.0, 1e5] {
                    assert_relative_eq!(b1.eval(u).unwrap(), b2.eval(u).unwrap(), max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn homogeneous_ratios() {
        let c = standard_case(ReiterationKind::RInterior, 0.5).unwrap();
        let corpus = Corpus::from_specs("s", &["chi:0.1", "3*chi:0.1"]).unwrap();
        let r = verify_reiteration(&c, &corpus, &[Grid::with_cells(1e-8, 1e8, 256).unwrap()]).unwrap();
        assert_relative_eq!(r.rows[0].ratio(), r.rows[1].ratio(), max_relative = 1e-12);
    }
}
