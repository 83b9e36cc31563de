//! Geometric grids, sampled functions and the `dt/t` norm engine.
//!
//! A grid function is read as piecewise constant on log-cells: node `t_i`
//! owns the cell `[t_i e^{-h/2}, t_i e^{h/2}]`, where `h` is the log spacing.
//! Integrals against `dt/t` are then midpoint sums with uniform weight `h`,
//! clipped to the requested interval.

use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Default truncation of `(0, ∞)`.
pub const FULL_LINE: (f64, f64) = (1e-8, 1e8);
/// Default truncation of `(0, 1)` for ordered couples.
pub const UNIT_INTERVAL: (f64, f64) = (1e-8, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(invalid("t_min", "must be positive and finite"));
        }
        if !(t_max > t_min && t_max.is_finite()) {
            return Err(invalid("t_max", "must be finite and exceed t_min"));
        }
        if n < 2 {
            return Err(invalid("n", "need at least two points"));
        }
        Ok(Self { t_min, t_max, n })
    }

    /// `cells` equal log-cells between the nodes `t_min` and `t_max`, so
    /// that doubling `cells` nests the grids.
    pub fn with_cells(t_min: f64, t_max: f64, cells: usize) -> Result<Self> {
        Self::new(t_min, t_max, cells + 1)
    }

    /// Cell count, one less than the node count.
    pub fn cells(&self) -> usize {
        self.n - 1
    }

    pub fn full_line(n: usize) -> Self {
        Self::new(FULL_LINE.0, FULL_LINE.1, n).expect("static grid")
    }

    pub fn unit(n: usize) -> Self {
        Self::new(UNIT_INTERVAL.0, UNIT_INTERVAL.1, n).expect("static grid")
    }

    /// Log spacing.
    pub fn h(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        // Interpolate from both ends so the last point is exact.
        let s = i as f64 / (self.n - 1) as f64;
        a + (b - a) * s
    }

    pub fn t(&self, i: usize) -> f64 {
        if i == 0 {
            self.t_min
        } else if i == self.n - 1 {
            self.t_max
        } else {
            self.x(i).exp()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.t(i)).collect()
    }

    pub fn log_points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Left edge of the cell owned by node `i`.
    pub fn cell_lo(&self, i: usize) -> f64 {
        (self.x(i) - 0.5 * self.h()).exp()
    }

    pub fn cell_hi(&self, i: usize) -> f64 {
        (self.x(i) + 0.5 * self.h()).exp()
    }

    /// Node indices kept after dropping 5% of the points at each end.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let drop = ((self.n as f64) * 0.05).ceil() as usize;
        drop.min(self.n / 2)..(self.n - drop).max(self.n / 2)
    }

    /// Same spacing, extended by `extra` cells on the left.
    pub fn extend_left(&self, extra: usize) -> Self {
        let t_min = (self.t_min.ln() - extra as f64 * self.h()).exp();
        Self {
            t_min,
            t_max: self.t_max,
            n: self.n + extra,
        }
    }

    pub fn extend_right(&self, extra: usize) -> Self {
        let t_max = (self.t_max.ln() + extra as f64 * self.h()).exp();
        Self {
            t_min: self.t_min,
            t_max,
            n: self.n + extra,
        }
    }

    /// Prefix of the grid ending at the last node `<= hi` (or the whole grid).
    pub fn truncate_at(&self, hi: f64) -> Self {
        if hi >= self.t_max {
            return *self;
        }
        let k = (((hi.ln() - self.t_min.ln()) / self.h()) + 1e-9).floor().max(1.0) as usize;
        let k = k.min(self.n - 1);
        Self {
            t_min: self.t_min,
            t_max: self.t(k),
            n: k + 1,
        }
    }

    /// The nodes `lo..=hi` as a grid of the same spacing.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Self> {
        if hi >= self.n || hi <= lo {
            return Err(invalid("slice", "need lo < hi < n"));
        }
        if lo == 0 && hi == self.n - 1 {
            return Ok(*self);
        }
        Self::new(self.t(lo), self.t(hi), hi - lo + 1)
    }

    /// Grid of the same size whose nodes are `1/t_i` in increasing order.
    pub fn reciprocal(&self) -> Self {
        Self {
            t_min: 1.0 / self.t_max,
            t_max: 1.0 / self.t_min,
            n: self.n,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        ((self.t_min * self.t_max).ln()).abs() < 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    #[default]
    None,
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub monotone: Monotone,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.n, values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "grid function samples must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self {
            grid,
            values,
            monotone: Monotone::None,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
            monotone: Monotone::None,
        }
    }

    /// Attach a monotonicity flag after checking it sample-wise.
    pub fn with_monotone(mut self, flag: Monotone) -> Result<Self> {
        let ok = match flag {
            Monotone::None => true,
            Monotone::Nonincreasing => self
                .values
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + f64::MIN_POSITIVE),
            Monotone::Nondecreasing => self
                .values
                .windows(2)
                .all(|w| w[0] <= w[1] * (1.0 + 1e-12) + f64::MIN_POSITIVE),
        };
        if !ok {
            return Err(Error::Domain(format!("samples are not {flag:?}")));
        }
        self.monotone = flag;
        Ok(self)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
            monotone: self.monotone,
        }
    }

    /// Pointwise product with another sampled weight.
    pub fn weighted(&self, w: &[f64]) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(w).map(|(a, b)| a * b).collect(),
            monotone: Monotone::None,
        }
    }

    pub fn restrict(&self, grid: Grid) -> Self {
        Self {
            grid,
            values: self.values[..grid.n].to_vec(),
            monotone: self.monotone,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Input(e.to_string());
        wr.write_record(["t", "value"]).map_err(io)?;
        for (t, v) in self.grid.points().iter().zip(&self.values) {
            wr.write_record([t.to_string(), v.to_string()]).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Input(e.to_string()))
    }

    /// Reads a `t,value` CSV. The `t` column must be a geometric grid.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
            let parse = |k: usize, name: &str| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Input(format!("missing column `{name}`")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("column `{name}`: {e}")))
            };
            ts.push(parse(0, "t")?);
            vs.push(parse(1, "value")?);
        }
        if ts.len() < 2 {
            return Err(Error::Input("need at least two rows".into()));
        }
        let grid = Grid::new(ts[0], ts[ts.len() - 1], ts.len())?;
        for (i, t) in ts.iter().enumerate() {
            if ((t / grid.t(i)) - 1.0).abs() > 1e-6 {
                return Err(Error::Input(format!(
                    "row {i}: t={t} is off the geometric grid"
                )));
            }
        }
        Self::new(grid, vs)
    }
}

/// Integrability exponent of an `L_q` parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

/// An `L_q` space on the half line, used with the measure `dt/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiSpace {
    pub q: Exponent,
}

impl RiSpace {
    pub const L1: RiSpace = RiSpace {
        q: Exponent::Finite(1.0),
    };
    pub const L2: RiSpace = RiSpace {
        q: Exponent::Finite(2.0),
    };
    pub const LINF: RiSpace = RiSpace { q: Exponent::Inf };

    pub fn lq(q: f64) -> Result<Self> {
        if q.is_infinite() && q > 0.0 {
            return Ok(Self::LINF);
        }
        if !(q >= 1.0) {
            return Err(invalid("q", "must lie in [1, inf]"));
        }
        Ok(Self {
            q: Exponent::Finite(q),
        })
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn inv_q(&self) -> f64 {
        match self.q {
            Exponent::Finite(q) => 1.0 / q,
            Exponent::Inf => 0.0,
        }
    }

    /// Fundamental function `t^{1/q}`.
    pub fn phi(&self, t: f64) -> f64 {
        t.powf(self.inv_q())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self.q, Exponent::Inf)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QRepr {
    Num(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct RiRepr {
    q: QRepr,
}

impl Serialize for RiSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let q = match self.q {
            Exponent::Finite(q) => QRepr::Num(q),
            Exponent::Inf => QRepr::Text("inf".into()),
        };
        RiRepr { q }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RiSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RiRepr::deserialize(d)?;
        match r.q {
            QRepr::Num(q) => RiSpace::lq(q).map_err(serde::de::Error::custom),
            QRepr::Text(s) if s == "inf" => Ok(RiSpace::LINF),
            QRepr::Text(s) => Err(serde::de::Error::custom(format!(
                "field `q`: expected a number >= 1 or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Left/right half-cell weights (log length) of each node clipped to `[lo, hi]`.
pub(crate) fn half_weights(grid: &Grid, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let h = grid.h();
    let xlo = if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
    let xhi = if hi.is_finite() { hi.ln() } else { f64::INFINITY };
    let clip = |a: f64, b: f64| (b.min(xhi) - a.max(xlo)).max(0.0);
    let mut wl = Vec::with_capacity(grid.n);
    let mut wr = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        wl.push(clip(x - 0.5 * h, x));
        wr.push(clip(x, x + 0.5 * h));
    }
    (wl, wr)
}

fn check_samples(g: &GridFunction) -> Result<()> {
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("NaN or infinite sample".into()));
    }
    Ok(())
}

/// `‖g‖_{Ẽ(a,b)}`; an empty interval has norm 0.
pub fn tilde_norm(g: &GridFunction, e: RiSpace, a: f64, b: f64) -> Result<f64> {
    check_samples(g)?;
    if !(b > a) {
        return Ok(0.0);
    }
    let (wl, wr) = half_weights(&g.grid, a, b);
    match e.q {
        Exponent::Inf => Ok(g
            .values
            .iter()
            .zip(wl.iter().zip(&wr))
            .filter(|(_, (l, r))| **l + **r > 0.0)
            .map(|(v, _)| *v)
            .fold(0.0, f64::max)),
        Exponent::Finite(q) => {
            let m = g.values.iter().cloned().fold(0.0, f64::max);
            if m == 0.0 {
                return Ok(0.0);
            }
            let mut acc = KahanSum::default();
            for (v, (l, r)) in g.values.iter().zip(wl.iter().zip(&wr)) {
                let w = l + r;
                if w > 0.0 && *v > 0.0 {
                    acc.add((v / m).powf(q) * w);
                }
            }
            Ok(m * acc.value().powf(1.0 / q))
        }
    }
}

/// Running norms `t ↦ ‖g‖_{Ẽ(0,t)}` (Lower) or `t ↦ ‖g‖_{Ẽ(t,end)}` (Upper).
pub fn nested_tilde_norms(g: &GridFunction, e: RiSpace, side: Side) -> Result<GridFunction> {
    nested_tilde_norms_in(g, e, side, 0.0, f64::INFINITY, 0.0)
}

/// As [`nested_tilde_norms`], restricted to `[lo, hi]`, with `outside` the
/// contribution from beyond the grid on the open side (the `q`-th power of
/// the missing norm, or the missing supremum when `q = ∞`).
pub fn nested_tilde_norms_in(
    g: &GridFunction,
    e: RiSpace,
    side: Side,
    lo: f64,
    hi: f64,
    outside: f64,
) -> Result<GridFunction> {
    check_samples(g)?;
    let n = g.grid.n;
    let (wl, wr) = half_weights(&g.grid, lo, hi);
    let mut out = vec![0.0; n];
    // Visit nodes in accumulation order; `near`/`far` are the half weights
    // on the accumulated and the not-yet-accumulated side of each node.
    let order: Vec<usize> = match side {
        Side::Lower => (0..n).collect(),
        Side::Upper => (0..n).rev().collect(),
    };
    let (near, far) = match side {
        Side::Lower => (&wl, &wr),
        Side::Upper => (&wr, &wl),
    };
    match e.q {
        Exponent::Inf => {
            let mut run = outside;
            for &i in &order {
                let cur = if near[i] > 0.0 { run.max(g.values[i]) } else { run };
                out[i] = cur;
                if near[i] + far[i] > 0.0 {
                    run = run.max(g.values[i]);
                }
            }
        }
        Exponent::Finite(q) => {
            let m = g
                .values
                .iter()
                .cloned()
                .fold(outside.powf(1.0 / q), f64::max);
            if m > 0.0 {
                let mut acc = KahanSum::default();
                acc.add(outside / m.powf(q));
                for &i in &order {
                    let p = (g.values[i] / m).powf(q);
                    let mut here = acc;
                    here.add(p * near[i]);
                    out[i] = m * here.value().max(0.0).powf(1.0 / q);
                    acc.add(p * (near[i] + far[i]));
                }
            }
        }
    }
    let flag = match side {
        Side::Lower => Monotone::Nondecreasing,
        Side::Upper => Monotone::Nonincreasing,
    };
    Ok(GridFunction {
        grid: g.grid,
        values: out,
        monotone: flag,
    })
}

/// Lebesgue primitive `∫_0^t f*` of a cell-constant nonincreasing function.
///
/// The mass below the first cell is extrapolated with the power law fitted
/// to the first two cells, which is exact for `s^{-p}`.
#[derive(Debug, Clone)]
pub struct Primitive {
    /// `∫_0^{t_i}` at the nodes.
    pub at_nodes: Vec<f64>,
    /// `∫_0^{e_j}` at the left cell edges `e_j`; one extra entry for the
    /// right edge of the last cell.
    pub at_edges: Vec<f64>,
}

pub fn primitive(fstar: &GridFunction) -> Primitive {
    let g = &fstar.grid;
    let h = g.h();
    let v = &fstar.values;
    let head = head_mass(v, g.cell_lo(0), h);
    let (eh, emh) = ((0.5 * h).exp(), (-0.5 * h).exp());
    let mut at_edges = Vec::with_capacity(g.n + 1);
    let mut at_nodes = Vec::with_capacity(g.n);
    let mut acc = KahanSum::default();
    acc.add(head);
    for (i, fi) in v.iter().enumerate() {
        let t = g.t(i);
        at_edges.push(acc.value());
        at_nodes.push(acc.value() + fi * t * (1.0 - emh));
        acc.add(fi * t * (eh - emh));
    }
    at_edges.push(acc.value());
    Primitive { at_nodes, at_edges }
}

fn head_mass(v: &[f64], a: f64, h: f64) -> f64 {
    if v.is_empty() || v[0] <= 0.0 {
        return 0.0;
    }
    let p = if v.len() > 1 && v[1] > 0.0 {
        ((v[0] / v[1]).ln() / h).clamp(0.0, 0.99)
    } else {
        0.0
    };
    if p < 1e-12 {
        v[0] * a
    } else {
        v[0] * a * h.exp_m1() / (h * (1.0 - p)).exp_m1()
    }
}

/// `f**(t) = t^{-1} ∫_0^t f*`.
pub fn double_star(fstar: &GridFunction) -> Result<GridFunction> {
    let p = primitive(fstar);
    let vals: Vec<f64> = p
        .at_nodes
        .iter()
        .enumerate()
        .map(|(i, k)| k / fstar.grid.t(i))
        .collect();
    let mut out = GridFunction::new(fstar.grid, vals)?;
    // Rounding can break monotonicity by an ulp; restore it.
    for i in 1..out.values.len() {
        out.values[i] = out.values[i].min(out.values[i - 1]);
    }
    out.monotone = Monotone::Nonincreasing;
    Ok(out)
}

/// Decreasing rearrangement of `(value, measure)` samples, averaged over the
/// cells of `grid`.
pub fn rearrange(samples: &[(f64, f64)], grid: &Grid) -> Result<GridFunction> {
    for (v, w) in samples {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::Domain(format!(
                "rearrangement needs |f| >= 0, got value {v}"
            )));
        }
        if !(w.is_finite() && *w > 0.0) {
            return Err(invalid("weight", format!("must be positive, got {w}")));
        }
    }
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Primitive of the step function f* at an arbitrary point.
    let mut cum = Vec::with_capacity(s.len() + 1);
    let mut mass = Vec::with_capacity(s.len() + 1);
    cum.push(0.0);
    mass.push(0.0);
    for (v, w) in &s {
        let c = cum.last().unwrap() + w;
        let m = mass.last().unwrap() + v * w;
        cum.push(c);
        mass.push(m);
    }
    let prim = |x: f64| -> f64 {
        let k = cum.partition_point(|c| *c <= x);
        if k >= cum.len() {
            return *mass.last().unwrap();
        }
        // cum[k-1] <= x < cum[k]
        mass[k - 1] + s[k - 1].0 * (x - cum[k - 1])
    };
    let mut vals = Vec::with_capacity(grid.n);
    let mut prev = f64::INFINITY;
    for i in 0..grid.n {
        let (a, b) = (grid.cell_lo(i), grid.cell_hi(i));
        let avg = ((prim(b) - prim(a)) / (b - a)).max(0.0).min(prev);
        prev = avg;
        vals.push(avg);
    }
    let mut out = GridFunction::new(*grid, vals)?;
    out.monotone = Monotone::Nonincreasing;
    Ok(out)
}
