//! Two-sided ratio statistics for the verification harnesses.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// One comparison `lhs ≈ rhs` at a point `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub function_id: String,
    pub n: usize,
    pub u: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Sample {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }

    fn usable(&self) -> bool {
        self.lhs.is_finite() && self.rhs.is_finite() && !(self.lhs == 0.0 && self.rhs == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionStats {
    pub function_id: String,
    pub n: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub samples: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridWindow {
    pub n: usize,
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub case_id: String,
    pub truncation: (f64, f64),
    pub grid_sizes: Vec<usize>,
    pub function_ids: Vec<String>,
    pub per_function: Vec<FunctionStats>,
    /// `max ratio_max / min ratio_min` per grid size.
    pub windows: Vec<GridWindow>,
    /// Largest window over the grid sizes.
    pub window: f64,
    /// Largest relative change of the window between consecutive grid
    /// sizes; `None` with a single grid.
    pub stability: Option<f64>,
    /// Samples where both sides diverged.
    pub excluded: usize,
    /// Samples where exactly one side diverged. They are excluded from the
    /// window like `excluded`; a nonzero count points at a function on the
    /// edge of a space, where the divergence is too slow to resolve.
    pub one_sided: usize,
    /// Samples where both sides vanish.
    pub zero: usize,
    /// Largest ratio of the best trivial decomposition to the oracle value,
    /// when the left side came from the truncation oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Sample>,
}

impl EquivalenceReport {
    /// Sorts rows by function (corpus order), grid size and `u`, then
    /// computes the statistics.
    pub fn build(
        case_id: &str,
        truncation: (f64, f64),
        function_ids: Vec<String>,
        mut rows: Vec<Sample>,
        oracle_gap: Option<f64>,
        notes: Vec<String>,
    ) -> Self {
        let order: BTreeMap<&str, usize> = function_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let key = |s: &Sample| order.get(s.function_id.as_str()).copied().unwrap_or(usize::MAX);
        rows.sort_by(|a, b| {
            key(a)
                .cmp(&key(b))
                .then(a.n.cmp(&b.n))
                .then(a.u.total_cmp(&b.u))
        });

        let mut grid_sizes: Vec<usize> = rows.iter().map(|s| s.n).collect();
        grid_sizes.sort_unstable();
        grid_sizes.dedup();

        let mut per_function = Vec::new();
        let (mut excluded, mut zero, mut one_sided) = (0, 0, 0);
        for id in &function_ids {
            for &n in &grid_sizes {
                let mut st = FunctionStats {
                    function_id: id.clone(),
                    n,
                    ratio_min: f64::INFINITY,
                    ratio_max: 0.0,
                    samples: 0,
                    excluded: 0,
                };
                for s in rows.iter().filter(|s| &s.function_id == id && s.n == n) {
                    if s.usable() {
                        let r = s.ratio();
                        st.ratio_min = st.ratio_min.min(r);
                        st.ratio_max = st.ratio_max.max(r);
                        st.samples += 1;
                    } else if s.lhs == 0.0 && s.rhs == 0.0 {
                        zero += 1;
                    } else if s.lhs.is_finite() != s.rhs.is_finite() {
                        one_sided += 1;
                    } else {
                        st.excluded += 1;
                    }
                }
                excluded += st.excluded;
                if st.samples > 0 {
                    per_function.push(st);
                }
            }
        }

        let windows: Vec<GridWindow> = grid_sizes
            .iter()
            .map(|&n| {
                let (lo, hi) = per_function
                    .iter()
                    .filter(|s| s.n == n)
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.ratio_min), hi.max(s.ratio_max)));
                let window = if hi == 0.0 && lo.is_infinite() { f64::NAN } else { hi / lo };
                GridWindow { n, window }
            })
            .collect();
        let window = windows.iter().map(|w| w.window).fold(f64::NAN, f64::max);
        let stability = (windows.len() > 1).then(|| {
            windows
                .windows(2)
                .map(|w| ((w[1].window - w[0].window) / w[0].window).abs())
                .fold(0.0, f64::max)
        });

        Self {
            case_id: case_id.to_string(),
            truncation,
            grid_sizes,
            function_ids,
            per_function,
            windows,
            window,
            stability,
            excluded,
            one_sided,
            zero,
            oracle_gap,
            notes,
            rows,
        }
    }

    /// Whether the window and stability stay within the thresholds. A report
    /// without usable samples fails.
    pub fn within(&self, window_max: f64, stability_max: f64) -> bool {
        self.window.is_finite()
            && self.window <= window_max
            && self.stability.map_or(true, |s| s <= stability_max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Input(e.to_string());
        wr.write_record(["case", "function_id", "n", "u", "lhs", "rhs", "ratio"])
            .map_err(io)?;
        for s in &self.rows {
            wr.write_record([
                self.case_id.clone(),
                s.function_id.clone(),
                s.n.to_string(),
                s.u.to_string(),
                s.lhs.to_string(),
                s.rhs.to_string(),
                s.ratio().to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Input(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
