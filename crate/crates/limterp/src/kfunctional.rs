//! K-functional profiles and the norm evaluator for space descriptors.
//!
//! Norms are computed on the grid of the profile. Every integral over
//! `(0,∞)` is truncated; an integrand that does not decay toward a truncated
//! end makes the norm infinite instead of silently returning the truncated
//! value.

use crate::applications::PreparedApp;
use crate::error::{invalid, Error, Result};
use crate::gridfn::{
    half_weights, nested_tilde_norms_in, primitive, tilde_norm, Exponent, Grid, GridFunction,
    Monotone, RiSpace, Side,
};
use crate::spaces::{require_admissible, Setting, SpaceDescriptor};

/// Values above this are treated as overflow of a divergent integral.
const HUGE: f64 = 1e300;
/// Share of the active nodes forming an end band in the growth test.
const BAND: f64 = 0.05;
/// Relative tolerance of the monotonicity checks on profiles.
const MONO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KProfile {
    pub base: GridFunction,
}

impl KProfile {
    /// Wraps sampled values, checking that `K` is nondecreasing and `K(t)/t`
    /// nonincreasing up to rounding.
    pub fn new(base: GridFunction) -> Result<Self> {
        let g = base.grid;
        let v = &base.values;
        for i in 1..v.len() {
            let slack = MONO_TOL * v[i].max(v[i - 1]);
            if v[i] + slack < v[i - 1] {
                return Err(invalid("K", format!("decreases at t = {}", g.t(i))));
            }
            if v[i] / g.t(i) > v[i - 1] / g.t(i - 1) * (1.0 + MONO_TOL) {
                return Err(invalid("K", format!("K(t)/t increases at t = {}", g.t(i))));
            }
        }
        Ok(Self {
            base: GridFunction {
                monotone: Monotone::Nondecreasing,
                ..base
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.base.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.base.values
    }

    /// `t ↦ t K(1/t)`, the profile for the reversed couple. The grid must be
    /// symmetric about 1.
    pub fn reverse(&self) -> Result<KProfile> {
        let g = *self.grid();
        if !g.is_symmetric() {
            return Err(invalid("grid", "reversal needs t_min * t_max = 1"));
        }
        let n = g.n;
        let vals = (0..n).map(|i| g.t(i) * self.base.values[n - 1 - i]).collect();
        Ok(KProfile {
            base: GridFunction {
                grid: g,
                values: vals,
                monotone: Monotone::Nondecreasing,
            },
        })
    }
}

/// Restores both profile invariants: running max of `K`, then running min
/// of `K(t)/t`.
pub fn repair(grid: &Grid, values: &mut [f64]) {
    for i in 1..values.len() {
        values[i] = values[i].max(values[i - 1]);
    }
    for i in 1..values.len() {
        let cap = values[i - 1] * grid.t(i) / grid.t(i - 1);
        values[i] = values[i].min(cap);
    }
}

fn check_fstar(fstar: &GridFunction) -> Result<()> {
    let v = &fstar.values;
    for i in 1..v.len() {
        if v[i] > v[i - 1] * (1.0 + MONO_TOL) {
            return Err(invalid(
                "fstar",
                format!("must be nonincreasing, rises at t = {}", fstar.grid.t(i)),
            ));
        }
    }
    Ok(())
}

/// `K(t, f; L₁, L∞) = ∫_0^t f*`.
pub fn k_peetre(fstar: &GridFunction) -> Result<KProfile> {
    check_fstar(fstar)?;
    let mut v = primitive(fstar).at_nodes;
    repair(&fstar.grid, &mut v);
    Ok(KProfile {
        base: GridFunction {
            grid: fstar.grid,
            values: v,
            monotone: Monotone::Nondecreasing,
        },
    })
}

/// Norm of the function whose K-profile is `k`. Fails for descriptors that
/// need `f*` itself.
pub fn norm_in_space(k: &KProfile, d: &SpaceDescriptor) -> Result<f64> {
    d.validate()?;
    require_admissible(d)?;
    let p = PreparedSpace::new(d, k.grid())?;
    p.eval(&NormInput {
        k: k.values(),
        fstar: None,
    })
}

/// Norm of `f` given its decreasing rearrangement.
pub fn norm_of(fstar: &GridFunction, d: &SpaceDescriptor) -> Result<f64> {
    d.validate()?;
    require_admissible(d)?;
    let k = k_peetre(fstar)?;
    let p = PreparedSpace::new(d, &fstar.grid)?;
    p.eval(&NormInput {
        k: k.values(),
        fstar: Some(fstar),
    })
}

/// K-functional of the couple `(y0, y1)` at the points of `t_grid`, by the
/// truncation oracle.
pub fn k_oracle(
    fstar: &GridFunction,
    y0: &SpaceDescriptor,
    y1: &SpaceDescriptor,
    t_grid: &Grid,
) -> Result<KProfile> {
    for y in [y0, y1] {
        y.validate()?;
        require_admissible(y)?;
    }
    let p0 = PreparedSpace::new(y0, &fstar.grid)?;
    let p1 = PreparedSpace::new(y1, &fstar.grid)?;
    OracleTable::build(fstar, &p0, &p1)?.profile(t_grid)
}

/// What a prepared space is evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct NormInput<'a> {
    /// K-profile at the grid nodes.
    pub k: &'a [f64],
    pub fstar: Option<&'a GridFunction>,
}

#[derive(Debug, Clone)]
enum Node {
    X0,
    X1,
    Theta {
        w: Vec<f64>,
        e: RiSpace,
    },
    Nested {
        side: Side,
        w_in: Vec<f64>,
        f: RiSpace,
        w_out: Vec<f64>,
        e: RiSpace,
    },
    Nested2 {
        side: Side,
        w_in: Vec<f64>,
        g: RiSpace,
        w_mid: Vec<f64>,
        f: RiSpace,
        w_out: Vec<f64>,
        e: RiSpace,
    },
    App(PreparedApp),
    Inter(Vec<PreparedSpace>),
    Over {
        y0: Box<PreparedSpace>,
        y1: Box<PreparedSpace>,
        inner: SpaceDescriptor,
    },
}

/// A descriptor with its weights sampled on a fixed grid.
#[derive(Debug, Clone)]
pub struct PreparedSpace {
    grid: Grid,
    setting: Setting,
    node: Node,
}

/// `s^{-θ} a(s)` on the grid, assembled in logs.
fn power_weight(grid: &Grid, theta: f64, a: &crate::svfunc::SvExpr) -> Result<Vec<f64>> {
    Ok(a.ln_sample(grid)?
        .into_iter()
        .zip(grid.log_points())
        .map(|(la, x)| (la - theta * x).exp())
        .collect())
}

impl PreparedSpace {
    pub fn new(d: &SpaceDescriptor, grid: &Grid) -> Result<Self> {
        use SpaceDescriptor::*;
        let setting = d.setting();
        let node = match d {
            X0 { .. } => Node::X0,
            X1 { .. } => Node::X1,
            Theta { theta, b, e, .. } => Node::Theta {
                w: power_weight(grid, *theta, b)?,
                e: *e,
            },
            L { theta, b, e, a, f, .. } | R { theta, b, e, a, f, .. } => Node::Nested {
                side: if matches!(d, L { .. }) { Side::Lower } else { Side::Upper },
                w_in: power_weight(grid, *theta, a)?,
                f: *f,
                w_out: power_weight(grid, 0.0, b)?,
                e: *e,
            },
            LL { theta, c, e, b, f, a, g, .. } | RR { theta, c, e, b, f, a, g, .. } => {
                Node::Nested2 {
                    side: if matches!(d, LL { .. }) { Side::Lower } else { Side::Upper },
                    w_in: power_weight(grid, *theta, a)?,
                    g: *g,
                    w_mid: power_weight(grid, 0.0, b)?,
                    f: *f,
                    w_out: power_weight(grid, 0.0, c)?,
                    e: *e,
                }
            }
            App { space } => Node::App(PreparedApp::new(space, grid)?),
            Intersection { members } => Node::Inter(
                members
                    .iter()
                    .map(|m| PreparedSpace::new(m, grid))
                    .collect::<Result<_>>()?,
            ),
            Over { y0, y1, space } => Node::Over {
                y0: Box::new(PreparedSpace::new(y0, grid)?),
                y1: Box::new(PreparedSpace::new(y1, grid)?),
                inner: (**space).clone(),
            },
        };
        Ok(Self {
            grid: *grid,
            setting,
            node,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn full(&self) -> bool {
        self.setting == Setting::Full
    }

    /// The norm, or `+∞` when the defining integral diverges.
    pub fn eval(&self, input: &NormInput) -> Result<f64> {
        let grid = &self.grid;
        let k = input.k;
        if k.len() != grid.n {
            return Err(invalid("K", "profile and space live on different grids"));
        }
        let hi = self.setting.hi();
        let full = self.full();
        let mul = |w: &[f64], v: &[f64]| -> Vec<f64> { w.iter().zip(v).map(|(a, b)| a * b).collect() };
        match &self.node {
            Node::X0 => Ok(endpoint_x0(grid, k, full)),
            Node::X1 => Ok(endpoint_x1(grid, k)),
            Node::Theta { w, e } => guarded_norm(grid, &mul(w, k), *e, 0.0, hi, true, full),
            Node::Nested { side, w_in, f, w_out, e } => {
                let Some(inner) = guarded_nested(grid, &mul(w_in, k), *f, *side, hi, full)? else {
                    return Ok(f64::INFINITY);
                };
                guarded_norm(grid, &mul(w_out, &inner), *e, 0.0, hi, true, full)
            }
            Node::Nested2 { side, w_in, g, w_mid, f, w_out, e } => {
                let Some(inner) = guarded_nested(grid, &mul(w_in, k), *g, *side, hi, full)? else {
                    return Ok(f64::INFINITY);
                };
                let Some(mid) = guarded_nested(grid, &mul(w_mid, &inner), *f, *side, hi, full)? else {
                    return Ok(f64::INFINITY);
                };
                guarded_norm(grid, &mul(w_out, &mid), *e, 0.0, hi, true, full)
            }
            Node::App(app) => {
                let fstar = input.fstar.ok_or_else(|| {
                    Error::Unsupported("concrete function spaces need f*, not only K".into())
                })?;
                app.eval(fstar)
            }
            Node::Inter(members) => {
                let mut m: f64 = 0.0;
                for p in members {
                    m = m.max(p.eval(input)?);
                }
                Ok(m)
            }
            Node::Over { y0, y1, inner } => {
                let fstar = input.fstar.ok_or_else(|| {
                    Error::Unsupported("a space over a derived couple needs f*".into())
                })?;
                let table = OracleTable::build_with_k(fstar, k, y0, y1)?;
                let ky = match table.profile(grid) {
                    Ok(p) => p,
                    Err(Error::Divergent(_)) => return Ok(f64::INFINITY),
                    Err(e) => return Err(e),
                };
                // The outer norm only sees the t where the truncation family
                // resolves the minimiser.
                let (lo, hi) = match inner {
                    SpaceDescriptor::X0 { .. } | SpaceDescriptor::X1 { .. } => (0, grid.n - 1),
                    _ => match table.resolved_range(grid) {
                        Some(r) => r,
                        None => return Ok(f64::INFINITY),
                    },
                };
                let sub = grid.slice(lo, hi)?;
                PreparedSpace::new(inner, &sub)?.eval(&NormInput {
                    k: &ky.values()[lo..=hi],
                    fstar: None,
                })
            }
        }
    }
}

fn endpoint_x0(grid: &Grid, k: &[f64], full: bool) -> f64 {
    if !full {
        // K is constant past 1 for functions on (0,1).
        let last = (0..grid.n).rev().find(|&i| grid.t(i) <= 1.0 + 1e-12).unwrap_or(0);
        return k[last];
    }
    let n = grid.n;
    let band = ((n as f64) * BAND).ceil() as usize;
    let last = k[n - 1];
    if last > HUGE || last > 1.01 * k[n - 1 - band.min(n - 1)] {
        return f64::INFINITY;
    }
    last
}

fn endpoint_x1(grid: &Grid, k: &[f64]) -> f64 {
    let band = ((grid.n as f64) * BAND).ceil() as usize;
    let j = band.min(grid.n - 1);
    let v0 = k[0] / grid.t(0);
    if v0 > HUGE || v0 > 1.01 * k[j] / grid.t(j) {
        return f64::INFINITY;
    }
    v0
}

/// Whether `vals` fails to decay toward one end of the part of the grid
/// with positive weight.
///
/// For `q < ∞` the mean density of `v^q` in the outermost band is compared
/// with the adjacent band; for `q = ∞` the band maximum with the maximum
/// over the rest.
fn grows(vals: &[f64], wts: &[f64], e: RiSpace, at_lo: bool) -> bool {
    let mut active: Vec<usize> = (0..vals.len()).filter(|&i| wts[i] > 0.0).collect();
    if !at_lo {
        active.reverse();
    }
    let band = ((active.len() as f64) * BAND).ceil().max(1.0) as usize;
    if active.len() < 2 * band {
        return false;
    }
    let m = active.iter().map(|&i| vals[i]).fold(0.0, f64::max);
    if m == 0.0 {
        return false;
    }
    match e.q {
        Exponent::Inf => {
            let outer = active[..band].iter().map(|&i| vals[i]).fold(0.0, f64::max);
            let rest = active[band..].iter().map(|&i| vals[i]).fold(0.0, f64::max);
            outer > 1.01 * rest
        }
        Exponent::Finite(q) => {
            let mass = |idx: &[usize]| -> (f64, f64) {
                idx.iter()
                    .fold((0.0, 0.0), |(s, w), &i| (s + (vals[i] / m).powf(q) * wts[i], w + wts[i]))
            };
            let (mo, wo) = mass(&active[..band]);
            let (ma, wa) = mass(&active[band..2 * band]);
            let (mt, _) = mass(&active);
            mo > 1e-3 * mt && mo / wo >= 0.999 * ma / wa
        }
    }
}

/// `‖v‖_{Ẽ(lo,hi)}`, or `+∞` if the integrand grows toward a truncated end
/// selected by `check_lo` / `check_hi`.
pub fn guarded_norm(
    grid: &Grid,
    vals: &[f64],
    e: RiSpace,
    lo: f64,
    hi: f64,
    check_lo: bool,
    check_hi: bool,
) -> Result<f64> {
    if vals.iter().any(|v| !v.is_finite() || *v > HUGE) {
        return Ok(f64::INFINITY);
    }
    let (wl, wr) = half_weights(grid, lo, hi);
    let wts: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| a + b).collect();
    if (check_lo && grows(vals, &wts, e, true)) || (check_hi && grows(vals, &wts, e, false)) {
        return Ok(f64::INFINITY);
    }
    let g = GridFunction {
        grid: *grid,
        values: vals.to_vec(),
        monotone: Monotone::None,
    };
    let v = tilde_norm(&g, e, lo, hi)?;
    Ok(if v > HUGE { f64::INFINITY } else { v })
}

/// Running norms from the accumulation start (`0` for Lower, `hi` for
/// Upper), or `None` when the integrand grows toward a truncated start. The
/// upper start is truncated only when `full`.
pub fn guarded_nested(
    grid: &Grid,
    vals: &[f64],
    e: RiSpace,
    side: Side,
    hi: f64,
    full: bool,
) -> Result<Option<Vec<f64>>> {
    if vals.iter().any(|v| !v.is_finite() || *v > HUGE) {
        return Ok(None);
    }
    let (wl, wr) = half_weights(grid, 0.0, hi);
    let wts: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| a + b).collect();
    let truncated = side == Side::Lower || full;
    if truncated && grows(vals, &wts, e, side == Side::Lower) {
        return Ok(None);
    }
    let g = GridFunction {
        grid: *grid,
        values: vals.to_vec(),
        monotone: Monotone::None,
    };
    let out = nested_tilde_norms_in(&g, e, side, 0.0, hi, 0.0)?;
    if out.values.iter().any(|v| *v > HUGE) {
        return Ok(None);
    }
    Ok(Some(out.values))
}

/// Member norms of the truncation family `g = (f* - c)₊`, `h = min(f*, c)`.
#[derive(Debug, Clone)]
pub struct OracleTable {
    /// `‖g‖_{Y₀}` per decomposition.
    pub n0: Vec<f64>,
    /// `‖h‖_{Y₁}` per decomposition.
    pub n1: Vec<f64>,
    /// Indices of the decompositions `(f, 0)` and `(0, f)`.
    trivial: [usize; 2],
}

impl OracleTable {
    pub fn build(fstar: &GridFunction, y0: &PreparedSpace, y1: &PreparedSpace) -> Result<Self> {
        let k = k_peetre(fstar)?;
        Self::build_with_k(fstar, k.values(), y0, y1)
    }

    /// As [`OracleTable::build`] with the Peetre profile of `fstar` given.
    pub fn build_with_k(
        fstar: &GridFunction,
        k: &[f64],
        y0: &PreparedSpace,
        y1: &PreparedSpace,
    ) -> Result<Self> {
        check_fstar(fstar)?;
        let grid = fstar.grid;
        if y0.grid != grid || y1.grid != grid {
            return Err(invalid("grid", "members prepared on a different grid"));
        }
        let n = grid.n;
        let f = &fstar.values;
        let edges = primitive(fstar).at_edges;
        let eval = |p: &PreparedSpace, kk: &[f64], ff: &GridFunction| -> Result<f64> {
            if kk.iter().all(|v| *v == 0.0) {
                return Ok(0.0);
            }
            p.eval(&NormInput { k: kk, fstar: Some(ff) })
        };

        let mut n0 = Vec::new();
        let mut n1 = Vec::new();
        n0.push(eval(y0, k, fstar)?);
        n1.push(0.0);
        n0.push(0.0);
        n1.push(eval(y1, k, fstar)?);

        let mut levels: Vec<f64> = f.iter().copied().filter(|v| *v > 0.0).collect();
        levels.dedup();
        let mut kg = vec![0.0; n];
        let mut kh = vec![0.0; n];
        for &c in &levels {
            // Cells strictly above the cut form a prefix.
            let j = f.partition_point(|v| *v > c);
            let tail = (edges[j] - c * grid.cell_lo(j.min(n - 1))).max(0.0);
            for i in 0..n {
                let g = if i < j { k[i] - c * grid.t(i) } else { tail };
                kg[i] = g.clamp(0.0, k[i]);
                kh[i] = k[i] - kg[i];
            }
            let gs = GridFunction {
                grid,
                values: f.iter().map(|v| (v - c).max(0.0)).collect(),
                monotone: Monotone::Nonincreasing,
            };
            let hs = GridFunction {
                grid,
                values: f.iter().map(|v| v.min(c)).collect(),
                monotone: Monotone::Nonincreasing,
            };
            n0.push(eval(y0, &kg, &gs)?);
            n1.push(eval(y1, &kh, &hs)?);
        }
        Ok(Self {
            n0,
            n1,
            trivial: [0, 1],
        })
    }

    fn min_over(&self, t: f64, idx: impl Iterator<Item = usize>) -> f64 {
        idx.map(|i| {
            let v = self.n0[i] + t * self.n1[i];
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .fold(f64::INFINITY, f64::min)
    }

    /// Oracle value at `t` (`+∞` if every decomposition diverges).
    pub fn k(&self, t: f64) -> f64 {
        self.min_over(t, 0..self.n0.len())
    }

    /// Index of the decomposition attaining the oracle value at `t`.
    fn argmin(&self, t: f64) -> Option<usize> {
        let mut best = None;
        let mut bv = f64::INFINITY;
        for i in 0..self.n0.len() {
            let v = self.n0[i] + t * self.n1[i];
            if v < bv {
                bv = v;
                best = Some(i);
            }
        }
        best
    }

    /// Node range of `grid` on which the oracle is not pinned to the
    /// extreme finite cut. Past the top cut the family has no smaller `g`
    /// to offer unless `(0, f)` itself is finite; likewise past the bottom
    /// cut unless `(f, 0)` is. `None` if fewer than two nodes remain.
    pub fn resolved_range(&self, grid: &Grid) -> Option<(usize, usize)> {
        let finite: Vec<usize> = (2..self.n0.len())
            .filter(|&i| self.n0[i].is_finite() && self.n1[i].is_finite())
            .collect();
        let (top, bottom) = match (finite.first(), finite.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Some((0, grid.n - 1)),
        };
        let pts = grid.points();
        let lo = if self.n1[1].is_finite() {
            0
        } else {
            pts.iter().position(|&t| self.argmin(t).is_some_and(|i| i != top))?
        };
        let hi = if self.n0[0].is_finite() {
            grid.n - 1
        } else {
            pts.iter().rposition(|&t| self.argmin(t).is_some_and(|i| i != bottom))?
        };
        (hi > lo).then_some((lo, hi))
    }

    /// Best of the two trivial decompositions.
    pub fn trivial_k(&self, t: f64) -> f64 {
        self.min_over(t, self.trivial.into_iter())
    }

    pub fn profile(&self, grid: &Grid) -> Result<KProfile> {
        let mut v: Vec<f64> = grid.points().into_iter().map(|t| self.k(t)).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergent(
                "every decomposition has an infinite member norm".into(),
            ));
        }
        repair(grid, &mut v);
        Ok(KProfile {
            base: GridFunction {
                grid: *grid,
                values: v,
                monotone: Monotone::Nondecreasing,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Setting;
    use crate::svfunc::SvExpr;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn chi(grid: Grid, a: f64) -> GridFunction {
        let v = (0..grid.n)
            .map(|i| {
                let (lo, hi) = (grid.cell_lo(i), grid.cell_hi(i));
                ((a.min(hi) - lo).max(0.0)) / (hi - lo)
            })
            .collect();
        GridFunction::new(grid, v).unwrap()
    }

    fn min_profile(grid: Grid, a: f64) -> KProfile {
        let v = grid.points().into_iter().map(|t| t.min(a)).collect();
        KProfile::new(GridFunction::new(grid, v).unwrap()).unwrap()
    }

    #[test]
    fn peetre_of_indicator_is_min() {
        let g = Grid::full_line(1025);
        let k = k_peetre(&chi(g, 0.5)).unwrap();
        for (i, t) in g.points().into_iter().enumerate() {
            assert_relative_eq!(k.values()[i], t.min(0.5), max_relative = 2e-2);
        }
    }

    #[test]
    fn peetre_of_inverse_sqrt() {
        let g = Grid::unit(4096);
        let f = GridFunction::from_fn(g, |t| t.powf(-0.5)).unwrap();
        let k = k_peetre(&f).unwrap();
        for i in g.interior() {
            assert_relative_eq!(k.values()[i], 2.0 * g.t(i).sqrt(), max_relative = 1e-3);
        }
    }

    #[test]
    fn theta_half_l2_of_min() {
        let g = Grid::full_line(4097);
        let d = SpaceDescriptor::theta(0.5, SvExpr::one(), RiSpace::L2, Setting::Full);
        let v = norm_in_space(&min_profile(g, 1.0), &d).unwrap();
        // ∫_0^1 t dt/t + ∫_1^∞ t^{-1} dt/t = 2.
        assert_relative_eq!(v, 2f64.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn r_sup_of_min() {
        let g = Grid::full_line(1025);
        let d = SpaceDescriptor::r(0.5, SvExpr::one(), RiSpace::LINF, SvExpr::one(), RiSpace::LINF, Setting::Full);
        let v = norm_in_space(&min_profile(g, 1.0), &d).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_profile_has_zero_norm() {
        let g = Grid::full_line(257);
        let k = KProfile::new(GridFunction::zeros(g)).unwrap();
        for d in [
            SpaceDescriptor::theta(0.5, SvExpr::ell(1.0), RiSpace::L1, Setting::Full),
            SpaceDescriptor::l(0.5, SvExpr::ell(-1.0), RiSpace::L2, SvExpr::one(), RiSpace::L1, Setting::Full),
            SpaceDescriptor::rr(0.5, SvExpr::one(), RiSpace::L2, SvExpr::one(), RiSpace::L1, SvExpr::one(), RiSpace::LINF, Setting::Full),
            SpaceDescriptor::x1(Setting::Full),
        ] {
            assert_eq!(norm_in_space(&k, &d).unwrap(), 0.0);
        }
    }

    #[test]
    fn divergence_is_flagged() {
        let g = Grid::full_line(1025);
        let k = min_profile(g, 1.0);
        // θ = 1 with E = L1 is inadmissible outright.
        let d = SpaceDescriptor::theta(1.0, SvExpr::one(), RiSpace::L1, Setting::Full);
        assert!(matches!(norm_in_space(&k, &d), Err(Error::Inadmissible(_))));
        // Admissible space, function outside it: f = s^{-1/2} has no finite L∞ norm.
        let u = Grid::unit(1025);
        let f = GridFunction::from_fn(u, |t| t.powf(-0.5)).unwrap();
        assert_eq!(norm_of(&f, &SpaceDescriptor::x1(Setting::Unit)).unwrap(), f64::INFINITY);
        let d = SpaceDescriptor::theta(0.75, SvExpr::one(), RiSpace::L2, Setting::Unit);
        assert_eq!(norm_of(&f, &d).unwrap(), f64::INFINITY);
        let d = SpaceDescriptor::theta(0.25, SvExpr::one(), RiSpace::L2, Setting::Unit);
        assert!(norm_of(&f, &d).unwrap().is_finite());
    }

    #[test]
    fn oracle_matches_peetre_at_endpoints() {
        let g = Grid::full_line(513);
        let f = GridFunction::from_fn(g, |t| if t < 1.0 { t.powf(-0.5) } else { 0.0 }).unwrap();
        let kp = k_peetre(&f).unwrap();
        let ko = k_oracle(&f, &SpaceDescriptor::x0(Setting::Full), &SpaceDescriptor::x1(Setting::Full), &g);
        // s^{-1/2} is unbounded, so X1 = L∞ diverges for every cut except
        // where h is capped; the oracle must still be finite.
        let ko = ko.unwrap();
        for i in g.interior() {
            let r = ko.values()[i] / kp.values()[i];
            assert!((1.0 - 1e-9..=1.05).contains(&r), "t={} r={r}", g.t(i));
        }
    }

    #[test]
    fn resolved_range_of_endpoint_couple() {
        let g = Grid::full_line(257);
        let (x0, x1) = (SpaceDescriptor::x0(Setting::Full), SpaceDescriptor::x1(Setting::Full));
        let (p0, p1) = (PreparedSpace::new(&x0, &g).unwrap(), PreparedSpace::new(&x1, &g).unwrap());
        // Bounded and integrable: both trivial decompositions are finite.
        let t = OracleTable::build(&chi(g, 0.5), &p0, &p1).unwrap();
        assert_eq!(t.resolved_range(&g), Some((0, g.n - 1)));
        // s^{-1/2} on (0,1) is unbounded, so the small-t end is cut where the
        // oracle sits on the top truncation level.
        let f = GridFunction::from_fn(g, |t| if t < 1.0 { t.powf(-0.5) } else { 0.0 }).unwrap();
        let t = OracleTable::build(&f, &p0, &p1).unwrap();
        let (lo, hi) = t.resolved_range(&g).unwrap();
        assert_eq!(hi, g.n - 1);
        assert!(lo < hi);
        for i in lo..=hi {
            assert!(t.k(g.t(i)).is_finite());
        }
    }

    #[test]
    fn oracle_of_zero_is_zero() {
        let g = Grid::full_line(129);
        let z = GridFunction::zeros(g).with_monotone(Monotone::Nonincreasing).unwrap();
        let k = k_oracle(&z, &SpaceDescriptor::x0(Setting::Full), &SpaceDescriptor::x1(Setting::Full), &g).unwrap();
        assert!(k.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn oracle_bounded_by_single_decomposition() {
        let g = Grid::full_line(257);
        let f = chi(g, 0.3);
        let y0 = SpaceDescriptor::theta(0.25, SvExpr::one(), RiSpace::L2, Setting::Full);
        let y1 = SpaceDescriptor::x1(Setting::Full);
        let k = k_oracle(&f, &y0, &y1, &g).unwrap();
        let sup = norm_of(&f, &y1).unwrap();
        for (i, t) in g.points().into_iter().enumerate() {
            assert!(k.values()[i] <= t * sup * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reversal_swaps_norms() {
        let g = Grid::full_line(513);
        let f = chi(g, 0.05);
        let k = k_peetre(&f).unwrap();
        let kr = k.reverse().unwrap();
        let d = SpaceDescriptor::l(0.25, SvExpr::broken(1.0, -1.0), RiSpace::L2, SvExpr::ell(-0.5), RiSpace::LINF, Setting::Full);
        let a = norm_in_space(&k, &d).unwrap();
        let b = norm_in_space(&kr, &crate::spaces::couple_reverse(&d).unwrap()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn profile_checks_reject_bad_input() {
        let g = Grid::full_line(16);
        let bad = GridFunction::new(g, (0..16).map(|i| (16 - i) as f64).collect()).unwrap();
        assert!(KProfile::new(bad).is_err());
        let steep = GridFunction::new(g, g.points().into_iter().map(|t| t * t).collect()).unwrap();
        assert!(KProfile::new(steep).is_err());
    }

    fn arb_fstar(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, n).prop_map(|mut v| {
            v.sort_by(|a, b| b.total_cmp(a));
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn peetre_profile_invariants(v in arb_fstar(64)) {
            let g = Grid::new(1e-3, 1.0, 64).unwrap();
            let f = GridFunction::new(g, v).unwrap();
            let k = k_peetre(&f).unwrap();
            prop_assert!(KProfile::new(k.base.clone()).is_ok());
        }

        #[test]
        fn peetre_is_subadditive(a in arb_fstar(48), b in arb_fstar(48)) {
            let g = Grid::new(1e-3, 1.0, 48).unwrap();
            let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ka = k_peetre(&GridFunction::new(g, a).unwrap()).unwrap();
            let kb = k_peetre(&GridFunction::new(g, b).unwrap()).unwrap();
            let ks = k_peetre(&GridFunction::new(g, s).unwrap()).unwrap();
            for i in 0..48 {
                prop_assert!(ks.values()[i] <= (ka.values()[i] + kb.values()[i]) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn norms_are_homogeneous(v in arb_fstar(64), lam in 0.01f64..100.0) {
            let g = Grid::new(1e-4, 1.0, 64).unwrap();
            let f = GridFunction::new(g, v).unwrap();
            let d = SpaceDescriptor::r(0.5, SvExpr::ell(-1.0), RiSpace::LINF, SvExpr::one(), RiSpace::L2, Setting::Unit);
            let a = norm_of(&f, &d).unwrap();
            let b = norm_of(&f.scaled(lam), &d).unwrap();
            if a.is_infinite() {
                prop_assert!(b.is_infinite());
            } else {
                prop_assert!((b - lam * a).abs() <= 1e-9 * b.max(1e-300));
            }
        }
    }
}
