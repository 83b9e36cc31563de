use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use limterp::applications::{scenario, verify_identity, SCENARIO_IDS};
use limterp::corpus::{Corpus, CorpusFn};
use limterp::gridfn::{Grid, FULL_LINE, UNIT_INTERVAL};
use limterp::holmstedt::{verify_holmstedt_with, CaseKind, HolmstedtCase, DEFAULT_STRIDE};
use limterp::kfunctional::norm_of;
use limterp::reiteration::{
    derived_params, reiterate, standard_case, standard_couple, verify_reiteration, ReiterationCase,
    ReiterationKind,
};
use limterp::report::EquivalenceReport;
use limterp::spaces::{check_admissible, Admissibility, Setting, SpaceDescriptor};
use limterp::Error;

#[derive(Parser)]
#[command(name = "limterp", version, about = "Limiting real interpolation: norms and verification harnesses")]
struct Cli {
    /// Worker threads for the harnesses (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of one function in a space given as descriptor JSON.
    Norm {
        #[arg(long)]
        space: PathBuf,
        /// Function spec, e.g. `chi:0.5`, `powlog:2,1`, `csv:PATH`.
        #[arg(long = "fn")]
        func: String,
        /// log2 of the cell count.
        #[arg(long, default_value_t = 12)]
        grid: u32,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
    },
    /// Run a two-sided verification and write CSV and JSON reports.
    #[command(subcommand)]
    Verify(Verify),
    /// Print the space identified by a reiteration case as descriptor JSON.
    Reiterate {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// ReiterationCase JSON replacing the built-in parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// List case and scenario ids.
    List,
}

#[derive(Subcommand)]
enum Verify {
    /// K-functional of a derived couple against the Holmstedt formula.
    Holmstedt {
        #[arg(long)]
        case: String,
        /// HolmstedtCase JSON replacing the built-in parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Stride between sampled `u` nodes.
        #[arg(long, default_value_t = DEFAULT_STRIDE)]
        stride: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Interpolation of a derived couple against its identified space.
    Reiteration {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// ReiterationCase JSON replacing the built-in parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// A concrete space against its interpolation description.
    Identity {
        #[arg(long)]
        name: String,
        /// Outer θ for the scenarios that take one (default 1/2).
        #[arg(long)]
        theta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Grid sizes as log2 of the cell count, e.g. `9,10`.
    #[arg(long, value_delimiter = ',', conflicts_with = "n")]
    grid: Vec<u32>,
    /// Grid sizes as cell counts (powers of two), e.g. `512,1024`.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Built-in corpus name (`standard`, `chi`) or a file of function specs.
    #[arg(long, default_value = "standard")]
    corpus: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long = "window-max", default_value_t = 100.0)]
    window_max: f64,
    #[arg(long = "stability-max", default_value_t = 0.10)]
    stability_max: f64,
}

/// Failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inadmissible(_) | Error::Hypothesis(_) => 2,
            _ => 1,
        };
        Fail { code, msg: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Fail {
    Fail { code: 1, msg: msg.into() }
}

const LOG2_RANGE: std::ops::RangeInclusive<u32> = 8..=20;

fn cells_of(common: &Common, default: u32) -> Result<Vec<usize>, Fail> {
    let cells: Vec<usize> = if !common.n.is_empty() {
        common.n.clone()
    } else if !common.grid.is_empty() {
        common.grid.iter().map(|&k| 1usize << k.min(63)).collect()
    } else {
        vec![1 << default, 1 << (default + 1)]
    };
    for &c in &cells {
        if !c.is_power_of_two() || !LOG2_RANGE.contains(&c.trailing_zeros()) {
            return Err(input(format!("grid size {c} is not a power of two between 2^8 and 2^20")));
        }
    }
    Ok(cells)
}

fn grids(cells: &[usize], tmin: Option<f64>, tmax: Option<f64>, default: (f64, f64)) -> Result<Vec<Grid>, Fail> {
    let (lo, hi) = (tmin.unwrap_or(default.0), tmax.unwrap_or(default.1));
    cells
        .iter()
        .map(|&c| Grid::with_cells(lo, hi, c).map_err(Fail::from))
        .collect()
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    serde_json::from_str(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn print_checklist(adm: &Admissibility) {
    if adm.checked_values.is_empty() {
        println!("admissibility: no conditions apply");
    } else {
        println!("admissibility:");
        for (name, v) in &adm.checked_values {
            let mark = if v.is_finite() { "ok  " } else { "FAIL" };
            println!("  [{mark}] {name} = {v}");
        }
    }
    for n in &adm.notes {
        println!("  note: {n}");
    }
}

fn cmd_norm(space: &Path, func: &str, log2: u32, tmin: Option<f64>, tmax: Option<f64>) -> Result<(), Fail> {
    if !LOG2_RANGE.contains(&log2) {
        return Err(input(format!("--grid {log2} outside 8..=20")));
    }
    let d = SpaceDescriptor::from_json(&read(space)?)?;
    let f = CorpusFn::parse(func)?;
    let default = if d.setting() == Setting::Unit { UNIT_INTERVAL } else { FULL_LINE };
    let grid = grids(&[1 << log2], tmin, tmax, default)?.remove(0);
    let adm = check_admissible(&d)?;
    if adm.trivial {
        print_checklist(&adm);
        return Err(Fail {
            code: 2,
            msg: format!("space is trivial: {}", adm.failed_conditions.join("; ")),
        });
    }
    let value = norm_of(&f.sample(&grid)?, &d)?;
    println!("norm = {value}");
    print_checklist(&adm);
    Ok(())
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

/// Writes the report, prints a summary and applies the thresholds.
fn finish(kind: &str, r: &EquivalenceReport, common: &Common) -> Result<(), Fail> {
    fs::create_dir_all(&common.out).map_err(|e| input(format!("{}: {e}", common.out.display())))?;
    let stem = format!("{kind}-{}", file_stem(&r.case_id));
    let csv_path = common.out.join(format!("{stem}.csv"));
    let json_path = common.out.join(format!("{stem}.json"));
    let file = fs::File::create(&csv_path).map_err(|e| input(format!("{}: {e}", csv_path.display())))?;
    r.write_csv(file)?;
    fs::write(&json_path, r.to_json() + "\n").map_err(|e| input(format!("{}: {e}", json_path.display())))?;
    let stab = r.stability.map_or("n/a".to_string(), |s| format!("{s:.4}"));
    println!(
        "{}: window {:.4}, stability {stab}, excluded {}, one-sided {}, zero {}",
        r.case_id, r.window, r.excluded, r.one_sided, r.zero
    );
    for w in &r.windows {
        println!("  n={}: window {:.4}", w.n, w.window);
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    if r.within(common.window_max, common.stability_max) {
        Ok(())
    } else {
        Err(Fail {
            code: 3,
            msg: format!(
                "window {} or stability {stab} exceeds the thresholds ({}, {})",
                r.window, common.window_max, common.stability_max
            ),
        })
    }
}

fn reiteration_case(case: &str, theta: f64, params: Option<&Path>) -> Result<ReiterationCase, Fail> {
    let kind = ReiterationKind::parse(case)?;
    match params {
        Some(p) => {
            let c: ReiterationCase = parse_json(p)?;
            c.validate()?;
            if c.kind() != kind {
                return Err(input(format!("--params describes {}, not {case}", c.kind().as_str())));
            }
            Ok(c)
        }
        None => Ok(standard_case(kind, theta)?),
    }
}

fn cmd_verify(v: &Verify) -> Result<(), Fail> {
    match v {
        Verify::Holmstedt { case, params, stride, common } => {
            let kind = CaseKind::parse(case)?;
            let c = match params {
                Some(p) => {
                    let c: HolmstedtCase = parse_json(p)?;
                    if c.kind != kind {
                        return Err(input(format!("--params describes {}, not {case}", c.kind.as_str())));
                    }
                    HolmstedtCase::new(kind, c.theta0, c.theta1, c.b0, c.b1, c.a, c.e0, c.e1, c.f)?
                }
                None => standard_couple(kind),
            };
            if *stride == 0 {
                return Err(input("--stride must be positive"));
            }
            let corpus = Corpus::load(&common.corpus)?;
            let g = grids(&cells_of(common, 9)?, common.tmin, common.tmax, FULL_LINE)?;
            let r = verify_holmstedt_with(&c, &corpus, &g, *stride)?;
            finish("holmstedt", &r, common)
        }
        Verify::Reiteration { case, theta, params, common } => {
            let c = reiteration_case(case, *theta, params.as_deref())?;
            let corpus = Corpus::load(&common.corpus)?;
            let g = grids(&cells_of(common, 9)?, common.tmin, common.tmax, FULL_LINE)?;
            let r = verify_reiteration(&c, &corpus, &g)?;
            finish("reiteration", &r, common)
        }
        Verify::Identity { name, theta, common } => {
            scenario(name, *theta)?;
            let corpus = Corpus::load(&common.corpus)?;
            let g = grids(&cells_of(common, 9)?, common.tmin, common.tmax, UNIT_INTERVAL)?;
            let r = verify_identity(name, *theta, &corpus, &g)?;
            finish("identity", &r, common)
        }
    }
}

fn cmd_reiterate(case: &str, theta: f64, params: Option<&Path>) -> Result<(), Fail> {
    let c = reiteration_case(case, theta, params)?;
    let p = derived_params(&c)?;
    let out = serde_json::json!({
        "case": c,
        "theta_tilde": p.theta_tilde,
        "rho": p.rho,
        "weight": p.weight,
        "space": reiterate(&c)?,
    });
    // A closed pipe (`| head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

fn cmd_list() {
    println!("holmstedt cases: {}", CaseKind::ALL.map(|k| k.as_str()).join(", "));
    println!("reiteration cases: {}", ReiterationKind::ALL.map(|k| k.as_str()).join(", "));
    println!("identity scenarios: {}", SCENARIO_IDS.join(", "));
}

fn run(cli: Cli) -> Result<(), Fail> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(input("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input(e.to_string()))?;
    }
    match &cli.command {
        Command::Norm { space, func, grid, tmin, tmax } => cmd_norm(space, func, *grid, *tmin, *tmax),
        Command::Verify(v) => cmd_verify(v),
        Command::Reiterate { case, theta, params } => cmd_reiterate(case, *theta, params.as_deref()),
        Command::List => {
            cmd_list();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
