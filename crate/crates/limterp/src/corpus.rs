//! Test functions given by their decreasing rearrangements on `(0,1)`.
//!
//! Grammar: `chi:a`, `pow:r`, `powlog:r,m`, `log:m`, `csv:PATH`, each
//! optionally prefixed by a scale factor `c*` (`0*chi:1` is the zero
//! function).

use std::fs::File;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::gridfn::{rearrange, Grid, GridFunction, Monotone};

#[derive(Debug, Clone, PartialEq)]
pub enum FnSpec {
    /// `χ_{(0,a)}`.
    Chi { a: f64 },
    /// `s^{-1/r}` on `(0,1)`.
    Pow { r: f64 },
    /// `s^{-1/r} ℓ^m(s)` on `(0,1)`.
    PowLog { r: f64, m: f64 },
    /// `ℓ^m(s)` on `(0,1)`.
    Log { m: f64 },
    /// Samples on a geometric grid, rearranged onto the target grid.
    Csv { path: String, data: GridFunction },
}

fn ell(s: f64) -> f64 {
    1.0 - s.ln()
}

impl FnSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("function spec `{s}`: expected KIND:ARGS")))?;
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Input(format!("function spec `{s}`: {e}")))
                })
                .collect()
        };
        let arity = |v: Vec<f64>, k: usize| -> Result<Vec<f64>> {
            if v.len() == k {
                Ok(v)
            } else {
                Err(Error::Input(format!("function spec `{s}`: expected {k} argument(s)")))
            }
        };
        let spec = match kind {
            "chi" => FnSpec::Chi { a: arity(nums()?, 1)?[0] },
            "pow" => FnSpec::Pow { r: arity(nums()?, 1)?[0] },
            "powlog" => {
                let v = arity(nums()?, 2)?;
                FnSpec::PowLog { r: v[0], m: v[1] }
            }
            "log" => FnSpec::Log { m: arity(nums()?, 1)?[0] },
            "csv" => {
                let f = File::open(Path::new(args))
                    .map_err(|e| Error::Input(format!("{args}: {e}")))?;
                FnSpec::Csv {
                    path: args.to_string(),
                    data: GridFunction::read_csv(f)?,
                }
            }
            other => {
                return Err(Error::Input(format!(
                    "unknown function kind `{other}` (chi, pow, powlog, log, csv)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FnSpec::Chi { a } if !(a > 0.0 && a <= 1.0) => Err(invalid("a", "need 0 < a <= 1")),
            FnSpec::Pow { r } if !(r > 1.0 && r.is_finite()) => {
                Err(invalid("r", "need 1 < r < inf for local integrability"))
            }
            FnSpec::PowLog { r, m } => {
                if !(r > 1.0 && r.is_finite()) {
                    Err(invalid("r", "need 1 < r < inf"))
                } else if m < -1.0 / r {
                    Err(invalid("m", "s^(-1/r) l^m is not decreasing for m < -1/r"))
                } else {
                    Ok(())
                }
            }
            FnSpec::Log { m } if !(m >= 0.0) => Err(invalid("m", "l^m is decreasing only for m >= 0")),
            _ => Ok(()),
        }
    }

    /// Pointwise value on `(0,1)`, `None` for sampled data.
    pub fn value(&self, s: f64) -> Option<f64> {
        if s >= 1.0 {
            return Some(0.0);
        }
        match *self {
            FnSpec::Chi { a } => Some(if s < a { 1.0 } else { 0.0 }),
            FnSpec::Pow { r } => Some(s.powf(-1.0 / r)),
            FnSpec::PowLog { r, m } => Some(s.powf(-1.0 / r) * ell(s).powf(m)),
            FnSpec::Log { m } => Some(ell(s).powf(m)),
            FnSpec::Csv { .. } => None,
        }
    }

    /// `f*` on `grid`. Cells cut by a jump get the average over the cell.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        if let FnSpec::Csv { data, .. } = self {
            let g = data.grid;
            // The first value is extended down to 0 so that masses line up
            // with the source grid.
            let samples: Vec<(f64, f64)> = std::iter::once((data.values[0].abs(), g.cell_lo(0)))
                .chain((0..g.n).map(|i| (data.values[i].abs(), g.cell_hi(i) - g.cell_lo(i))))
                .collect();
            return rearrange(&samples, grid);
        }
        let jump = match *self {
            FnSpec::Chi { a } => a,
            _ => 1.0,
        };
        let mut vals = Vec::with_capacity(grid.n);
        let mut prev = f64::INFINITY;
        for i in 0..grid.n {
            let (lo, hi) = (grid.cell_lo(i), grid.cell_hi(i));
            let t = grid.t(i);
            let inside = ((jump.min(hi) - lo) / (hi - lo)).clamp(0.0, 1.0);
            let v = match *self {
                FnSpec::Chi { .. } => inside,
                // Value just below the jump when the node lies past it.
                _ => self.value(t.min(jump * (1.0 - 1e-12))).unwrap() * inside,
            };
            let v = v.min(prev);
            prev = v;
            vals.push(v);
        }
        GridFunction::new(*grid, vals)?.with_monotone(Monotone::Nonincreasing)
    }
}

/// A named corpus member, `scale · f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFn {
    pub id: String,
    pub scale: f64,
    pub spec: FnSpec,
}

impl CorpusFn {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (scale, rest) = match s.split_once('*') {
            Some((c, rest)) => (
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("scale in `{s}`: {e}")))?,
                rest,
            ),
            None => (1.0, s),
        };
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(invalid("scale", "must be finite and nonnegative"));
        }
        Ok(Self {
            id: s.to_string(),
            scale,
            spec: FnSpec::parse(rest.trim())?,
        })
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        let f = self.spec.sample(grid)?;
        Ok(if self.scale == 1.0 { f } else { f.scaled(self.scale) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub members: Vec<CorpusFn>,
}

pub const STANDARD: [&str; 8] = [
    "chi:1",
    "chi:0.01",
    "pow:2",
    "pow:4",
    "powlog:2,1",
    "powlog:4,-0.25",
    "log:1",
    "log:2",
];

pub const CHI: [&str; 4] = ["chi:0.001", "chi:0.01", "chi:0.1", "chi:1"];

impl Corpus {
    pub fn from_specs(name: &str, specs: &[&str]) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            members: specs.iter().map(|s| CorpusFn::parse(s)).collect::<Result<_>>()?,
        })
    }

    /// The eight prototypes: indicators, powers, power-logs, logs.
    pub fn standard() -> Self {
        Self::from_specs("standard", &STANDARD).expect("built-in corpus parses")
    }

    /// Indicators `χ_{(0,a)}`, `a = 10^{-3}, …, 1`.
    pub fn chi() -> Self {
        Self::from_specs("chi", &CHI).expect("built-in corpus parses")
    }

    /// A built-in name, or a file with one function spec per line (`#`
    /// starts a comment).
    pub fn load(sel: &str) -> Result<Self> {
        match sel {
            "standard" => return Ok(Self::standard()),
            "chi" => return Ok(Self::chi()),
            _ => {}
        }
        let text = std::fs::read_to_string(sel).map_err(|e| {
            Error::Input(format!("corpus `{sel}`: not a built-in name (standard, chi) and {e}"))
        })?;
        let specs: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap().trim())
            .filter(|l| !l.is_empty())
            .collect();
        if specs.is_empty() {
            return Err(Error::Input(format!("corpus file `{sel}` is empty")));
        }
        Self::from_specs(sel, &specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_grammar() {
        assert_eq!(FnSpec::parse("chi:0.5").unwrap(), FnSpec::Chi { a: 0.5 });
        assert_eq!(FnSpec::parse("powlog:2,1").unwrap(), FnSpec::PowLog { r: 2.0, m: 1.0 });
        assert!(FnSpec::parse("pow:1").is_err());
        assert!(FnSpec::parse("log:-1").is_err());
        assert!(FnSpec::parse("powlog:2,-1").is_err());
        assert!(FnSpec::parse("sin:1").is_err());
        assert!(FnSpec::parse("chi").is_err());
        let c = CorpusFn::parse("2*chi:1").unwrap();
        assert_eq!(c.scale, 2.0);
    }

    #[test]
    fn samples_are_decreasing_and_vanish_past_one() {
        let g = Grid::full_line(512);
        for m in Corpus::standard().members {
            let f = m.sample(&g).unwrap();
            assert!(f.values.windows(2).all(|w| w[1] <= w[0]), "{}", m.id);
            for i in 0..g.n {
                if g.cell_lo(i) >= 1.0 {
                    assert_eq!(f.values[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn indicator_mass() {
        let g = Grid::unit(1024);
        let f = FnSpec::Chi { a: 0.3 }.sample(&g).unwrap();
        let m = crate::gridfn::primitive(&f).at_nodes[g.n - 1];
        assert_relative_eq!(m, 0.3, max_relative = 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::unit(256);
        let f = FnSpec::Pow { r: 3.0 }.sample(&g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        f.write_csv(File::create(&p).unwrap()).unwrap();
        let spec = FnSpec::parse(&format!("csv:{}", p.display())).unwrap();
        let back = spec.sample(&g).unwrap();
        for i in 0..g.n - 1 {
            assert_relative_eq!(back.values[i], f.values[i], max_relative = 1e-9);
        }
    }
}
