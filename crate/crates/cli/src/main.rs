//! `localgauss`: command-line front end.
//!
//! Exit status is 0 on success, 1 for unreadable or malformed input and 2
//! when the input parses but the requested operation is not defined on it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use localgauss::building::{self, LatticeClass};
use localgauss::field::{format_vector, FieldConfig};
use localgauss::io;
use localgauss::matroid;
use localgauss::tropical::{self, TropPoly};
use localgauss::{Error, Execution, GaussianDist, Lattice};

#[derive(Parser, Debug)]
#[command(
    name = "localgauss",
    version,
    about = "Gaussian measures over p-adic fields"
)]
struct Cli {
    /// Prime p of the field Q_p; required unless the input file records it.
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// p-adic digits drawn per coordinate when sampling.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    precision: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; 1 runs sequentially. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Half-width of the box [-r, r]^d checked by `trop`.
    #[arg(long, global = true, default_value_t = 6)]
    box_radius: i64,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hermite normal form of the lattice spanned by the matrix columns.
    Hnf { file: PathBuf },
    /// Maximum-likelihood lattice of a dataset (one vector per row).
    Mle { file: PathBuf },
    /// Conditional-independence matroid given a set of coordinates.
    Ci {
        file: PathBuf,
        /// Conditioning coordinates, 1-based, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        given: Vec<usize>,
        /// Also test whether these coordinates are mutually independent.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<usize>>,
    },
    /// Draw samples from the Gaussian on a lattice.
    Sample {
        file: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1)]
        count: usize,
    },
    /// Tropical tail polynomial and a check of it on a box.
    Trop { file: PathBuf },
    /// Neighborhood of the lattice class in the Bruhat-Tits building.
    Building {
        file: PathBuf,
        #[command(subcommand)]
        action: BuildingAction,
    },
}

#[derive(Subcommand, Debug)]
enum BuildingAction {
    /// All adjacent classes.
    Neighbors,
    /// Whether the class of a second lattice is adjacent.
    Adjacent { other: PathBuf },
    /// Ball of the given radius as a graph.
    Ball { radius: usize },
}

/// A failed run: exit status and message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    /// Domain errors echo the offending input.
    fn domain(err: Error, input: &str) -> Self {
        if err.is_parse() {
            return Failure::input(err.to_string());
        }
        Failure {
            code: 2,
            message: format!("{err}\ninput: {input}"),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse_err(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::Parse { .. } => Failure::input(format!("{}: {e}", path.display())),
        other => Failure::domain(other, &path.display().to_string()),
    }
}

fn load_lattice(path: &Path, prime: Option<u64>) -> Result<Lattice, Failure> {
    io::parse_lattice(&read(path)?, prime).map_err(parse_err(path))
}

fn field(prime: Option<u64>) -> Result<FieldConfig, Failure> {
    let p = prime.ok_or_else(|| Failure::input("--prime is required for this input"))?;
    FieldConfig::new(p).map_err(|e| Failure::domain(e, &p.to_string()))
}

/// 1-based user indices to 0-based.
fn zero_based(indices: &[usize], d: usize) -> Result<Vec<usize>, String> {
    indices
        .iter()
        .map(|&i| {
            if i == 0 || i > d {
                Err(format!("index {i} out of range 1..={d}"))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn lattice_json(l: &Lattice) -> Value {
    let mut v = io::lattice_to_json(l);
    v["diag_exponents"] = json!(l.diag_exponents());
    v["rank"] = json!(l.rank());
    v["measure_log"] = json!(l.measure_log().ok());
    v
}

fn lattice_text(l: &Lattice) -> String {
    let mut s = format!("# p = {}\n", l.field().p());
    s.push_str(&io::matrix_to_text(l.matrix()));
    match l.measure_log() {
        Ok(m) => {
            let _ = writeln!(s, "# measure_log = {m}");
        }
        Err(_) => {
            let _ = writeln!(
                s,
                "# rank = {}, span measure_log = {}",
                l.rank(),
                l.span_measure_log()
            );
        }
    }
    s
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn emit_lattice(l: &Lattice, format: Format) -> String {
    match format {
        Format::Json => pretty(&lattice_json(l)),
        _ => lattice_text(l),
    }
}

fn cmd_hnf(cli: &Cli, file: &Path) -> Result<String, Failure> {
    let l = load_lattice(file, cli.prime)?;
    Ok(emit_lattice(&l, cli.format))
}

fn cmd_mle(cli: &Cli, file: &Path) -> Result<String, Failure> {
    let data = io::parse_dataset(&read(file)?).map_err(parse_err(file))?;
    let f = field(cli.prime)?;
    let echo: Vec<String> = data.iter().map(|x| format_vector(x)).collect();
    let l = localgauss::mle(&f, &data).map_err(|e| Failure::domain(e, &echo.join(" ")))?;
    let ll = GaussianDist::new(l.clone())
        .log_likelihood(&data)
        .map_err(|e| Failure::domain(e, &l.matrix().to_compact_string()))?;
    Ok(match cli.format {
        Format::Json => {
            let mut v = lattice_json(&l);
            v["samples"] = json!(data.len());
            v["log_likelihood"] = json!(ll);
            pretty(&v)
        }
        _ => {
            let mut s = lattice_text(&l);
            let _ = writeln!(s, "# log_likelihood = {ll}");
            s
        }
    })
}

fn statement(basis: &[usize], given: &[usize]) -> String {
    let vars: Vec<String> = basis.iter().map(|i| format!("X{}", i + 1)).collect();
    let mut s = vars.join(" ⊥ ");
    if !given.is_empty() {
        let cond: Vec<String> = given.iter().map(|i| format!("X{}", i + 1)).collect();
        let _ = write!(s, " | {}", cond.join(", "));
    }
    s
}

fn cmd_ci(
    cli: &Cli,
    file: &Path,
    given: &[usize],
    targets: Option<&[usize]>,
) -> Result<String, Failure> {
    let l = load_lattice(file, cli.prime)?;
    let echo = l.matrix().to_compact_string();
    let d = l.dim();
    let bad_index = |m: String| Failure::domain(Error::BadSubset(m), &echo);
    let cond = zero_based(given, d).map_err(bad_index)?;
    let dist = GaussianDist::new(l.clone());
    let m = matroid::ci_matroid(&dist, &cond).map_err(|e| Failure::domain(e, &echo))?;
    let bases = m.bases().map_err(|e| Failure::domain(e, &echo))?;
    let statements: Vec<String> = bases
        .iter()
        .filter(|b| b.len() >= 2)
        .map(|b| statement(b, &m.conditioning))
        .collect();
    let test = match targets {
        Some(t) => {
            let t = zero_based(t, d).map_err(bad_index)?;
            let ok = matroid::is_ci(&dist, &cond, &t).map_err(|e| Failure::domain(e, &echo))?;
            Some((t, ok))
        }
        None => None,
    };
    Ok(match cli.format {
        Format::Json => {
            let mut v = json!({
                "p": m.p,
                "conditioning": one_based(&m.conditioning),
                "ground": one_based(&m.ground),
                "C": m.matrix,
                "rank": m.rank(),
                "bases": bases.iter().map(|b| one_based(b)).collect::<Vec<_>>(),
                "statements": statements,
            });
            if let Some((t, ok)) = &test {
                v["targets"] = json!(one_based(t));
                v["independent"] = json!(ok);
            }
            pretty(&v)
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "conditioning: {:?}", one_based(&m.conditioning));
            let _ = writeln!(s, "ground: {:?}", one_based(&m.ground));
            let _ = writeln!(s, "C (mod {}):", m.p);
            for row in &m.matrix {
                let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                let _ = writeln!(s, "  {}", cells.join(" "));
            }
            let _ = writeln!(s, "rank: {}", m.rank());
            for b in &bases {
                let _ = writeln!(s, "basis: {:?}", one_based(b));
            }
            for st in &statements {
                let _ = writeln!(s, "{st}");
            }
            if let Some((t, ok)) = &test {
                let _ = writeln!(s, "{}: {ok}", statement(t, &m.conditioning));
            }
            s
        }
    })
}

fn cmd_sample(cli: &Cli, file: &Path, count: usize, exec: Execution) -> Result<String, Failure> {
    let l = load_lattice(file, cli.prime)?;
    let echo = l.matrix().to_compact_string();
    let dist = GaussianDist::new(l);
    let draws = dist
        .sample_many(count, cli.precision, cli.seed, exec)
        .map_err(|e| Failure::domain(e, &echo))?;
    Ok(match cli.format {
        Format::Json => pretty(&json!({
            "p": dist.field().p(),
            "precision": cli.precision,
            "seed": cli.seed,
            "censoring_bound": dist.censoring_bound(cli.precision),
            "samples": draws.iter().map(|s| json!({
                "point": s.point,
                "valuations": s.valuations,
                "censored": s.censored,
            })).collect::<Vec<_>>(),
        })),
        _ => {
            let mut s = String::new();
            for d in &draws {
                let vals: Vec<String> = d
                    .valuations
                    .iter()
                    .zip(&d.censored)
                    .map(|(v, &c)| if c { format!(">={v}") } else { v.to_string() })
                    .collect();
                let _ = writeln!(
                    s,
                    "{}\tval = ({})",
                    format_vector(&d.point),
                    vals.join(", ")
                );
            }
            s
        }
    })
}

fn cmd_trop(cli: &Cli, file: &Path, exec: Execution) -> Result<String, Failure> {
    let l = load_lattice(file, cli.prime)?;
    let echo = l.matrix().to_compact_string();
    let report = tropical::verify_conjecture_with(&l, cli.box_radius, exec)
        .map_err(|e| Failure::domain(e, &echo))?;
    let closed: Option<TropPoly> = (l.dim() == 2)
        .then(|| tropical::trop2d(&l))
        .transpose()
        .map_err(|e| Failure::domain(e, &echo))?;
    let fitted = &report.fitted;
    Ok(match cli.format {
        Format::Json => {
            let mut v = json!({
                "polynomial": fitted,
                "supermodular": report.supermodular,
                "subdivision": fitted.subdivision_data().iter().map(|(vertex, h)| json!({
                    "vertex": vertex,
                    "height": h,
                })).collect::<Vec<_>>(),
                "report": report,
            });
            if let Some(c) = &closed {
                v["closed_form_agrees"] = json!(c == fitted);
            }
            pretty(&v)
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "P_L = {fitted}");
            let coeffs: Vec<String> = fitted
                .graded_coefficients()
                .iter()
                .map(|(_, c)| c.to_string())
                .collect();
            let _ = writeln!(s, "coefficients: ({})", coeffs.join(", "));
            let _ = writeln!(s, "supermodular: {}", report.supermodular);
            let _ = writeln!(
                s,
                "checked {} points in [-{r}, {r}]^{} ({}): {} mismatches",
                report.points_checked,
                l.dim(),
                if report.exhaustive {
                    "exhaustive"
                } else {
                    "subsampled"
                },
                report.mismatches.len(),
                r = cli.box_radius,
            );
            for m in &report.mismatches {
                let _ = writeln!(s, "  v = {:?}: phi = {}, P_L = {}", m.v, m.phi, m.poly);
            }
            if let Some(c) = &closed {
                let _ = writeln!(s, "closed form agrees: {}", c == fitted);
            }
            s
        }
    })
}

fn class_text(c: &LatticeClass) -> String {
    c.key()
}

fn cmd_building(
    cli: &Cli,
    file: &Path,
    action: &BuildingAction,
    exec: Execution,
) -> Result<String, Failure> {
    let l = load_lattice(file, cli.prime)?;
    let echo = l.matrix().to_compact_string();
    let dom = |e| Failure::domain(e, &echo);
    let class = building::canonicalize(&l).map_err(dom)?;
    match action {
        BuildingAction::Neighbors => {
            let n = building::neighbors(&class).map_err(dom)?;
            Ok(match cli.format {
                Format::Json => pretty(&json!({
                    "center": class,
                    "degree": building::degree(class.dim(), l.field().p()).to_string(),
                    "neighbors": n,
                })),
                _ => n.iter().map(|c| class_text(c) + "\n").collect(),
            })
        }
        BuildingAction::Adjacent { other } => {
            let m = load_lattice(other, Some(l.field().p()))?;
            let other_class = building::canonicalize(&m)
                .map_err(|e| Failure::domain(e, &m.matrix().to_compact_string()))?;
            let adjacent = building::is_adjacent(&class, &other_class).map_err(dom)?;
            let equivalent = class == other_class;
            Ok(match cli.format {
                Format::Json => pretty(&json!({
                    "first": class,
                    "second": other_class,
                    "equivalent": equivalent,
                    "adjacent": adjacent,
                })),
                _ => format!("adjacent: {adjacent}\nequivalent: {equivalent}\n"),
            })
        }
        BuildingAction::Ball { radius } => {
            let g = building::ball_with(&class, *radius, exec).map_err(dom)?;
            Ok(match cli.format {
                Format::Dot => g.to_dot(),
                Format::Json => pretty(&g.to_json()),
                Format::Text => {
                    let mut s = format!(
                        "{} vertices, {} edges, tree: {}\n",
                        g.vertices.len(),
                        g.edges.len(),
                        g.is_tree()
                    );
                    for (v, dist) in g.vertices.iter().zip(&g.distances) {
                        let _ = writeln!(s, "{dist} {}", class_text(v));
                    }
                    for (a, b) in &g.edges {
                        let _ = writeln!(s, "{a} -- {b}");
                    }
                    s
                }
            })
        }
    }
}

fn execution(threads: Option<usize>) -> Result<Execution, Failure> {
    match threads {
        Some(0) => Err(Failure::input("--threads must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(_n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(_n)
                .build_global()
                .map_err(|e| Failure::input(e.to_string()))?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let exec = execution(cli.threads)?;
    if cli.format == Format::Dot
        && !matches!(
            cli.command,
            Command::Building {
                action: BuildingAction::Ball { .. },
                ..
            }
        )
    {
        return Err(Failure::input(
            "--format dot is only available for `building ... ball`",
        ));
    }
    match &cli.command {
        Command::Hnf { file } => cmd_hnf(cli, file),
        Command::Mle { file } => cmd_mle(cli, file),
        Command::Ci {
            file,
            given,
            targets,
        } => cmd_ci(cli, file, given, targets.as_deref()),
        Command::Sample { file, count } => cmd_sample(cli, file, *count, exec),
        Command::Trop { file } => cmd_trop(cli, file, exec),
        Command::Building { file, action } => cmd_building(cli, file, action, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, out) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
