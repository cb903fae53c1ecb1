//! Command-line driver: solve spectra, verify counting inequalities, and
//! reproduce the case studies.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver non-convergence,
//! 4 a counting inequality failed, 5 a reproduction row mismatched.

mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use equispec::mesh::{build_builtin, builtin_registry, BoundaryTag, Coefficient, Params};
use equispec::montielros::{montiel_ros_check, Partition};
use equispec::problem::{load_problem, parse_group_spec, LoadedProblem, TwistSpec};
use equispec::report::{
    eigenfunction_csv, spectrum_csv, spectrum_report, to_json_pretty,
};
use equispec::spectral::{
    solve_equivariant, solve_problem, EquivariantStrategy,
};
use equispec::{Error, ProblemSpec};

#[derive(Parser)]
#[command(
    name = "equispec",
    about = "Spectra, Morse index and nullity of Schrödinger forms on triangulated surfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve an eigenproblem, optionally in an equivariant subspace
    Spectrum(SpectrumArgs),
    /// Verify the two-sided counting inequalities for a domain partition
    MontielRos(MontielRosArgs),
    /// Re-run a named case study and compare against its reference values
    Reproduce(ReproduceArgs),
    /// Build a builtin domain and write it in the mesh file format
    Mesh(MeshArgs),
    /// List the registered builtin domains and reproduction suites
    List,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file (TOML); exclusive with --builtin
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Builtin domain id, e.g. sphere_octant or lune_cut(0.3)
    #[arg(long)]
    builtin: Option<String>,
    /// Refinement level
    #[arg(long, default_value_t = 3)]
    level: u32,
    /// Builder parameter, repeatable: --param a=2.3328
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Potential q as a number or expression in x, y, z, r, theta
    #[arg(long)]
    q: Option<String>,
    /// Robin coefficient r (consulted on Robin-tagged edges)
    #[arg(long)]
    r: Option<String>,
    /// Use the surface's stability potential (|A|^2) and the unit Robin
    /// coefficient on the circles meeting the sphere
    #[arg(long)]
    jacobi: bool,
    /// Tag the top circles (|z| maximal) Robin
    #[arg(long)]
    robin_top: bool,
    /// Tag boundary edges lying on a coordinate plane Dirichlet: x, y or z
    #[arg(long, value_name = "AXIS")]
    dirichlet_plane: Option<char>,
    /// Symmetry group, e.g. pyramidal:5, prismatic:3, reflection_plane
    #[arg(long)]
    group: Option<String>,
    /// Twist: trivial, determinant, normal, or +1,-1,... per element
    #[arg(long)]
    twist: Option<String>,
}

impl ProblemArgs {
    fn canonical(&self) -> String {
        format!(
            "problem={:?} builtin={:?} level={} params={:?} q={:?} r={:?} jacobi={} robin_top={} dirichlet_plane={:?} group={:?} twist={:?}",
            self.problem, self.builtin, self.level, self.params, self.q, self.r, self.jacobi,
            self.robin_top, self.dirichlet_plane, self.group, self.twist
        )
    }

    fn load(&self) -> equispec::Result<LoadedProblem> {
        match (&self.problem, &self.builtin) {
            (Some(path), None) => load_problem(path),
            (None, Some(id)) => self.build_from_flags(id),
            _ => Err(Error::InvalidInput(
                "give exactly one of --problem and --builtin".into(),
            )),
        }
    }

    fn build_from_flags(&self, id: &str) -> equispec::Result<LoadedProblem> {
        let mut params = Params::default();
        for kv in &self.params {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("--param takes KEY=VALUE, got `{}`", kv))
            })?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad value in `{}`", kv)))?;
            params = params.set(k, v);
        }
        let mesh = build_builtin(id, self.level, &params)?;
        let potential = match (&self.q, self.jacobi) {
            (Some(_), true) => {
                return Err(Error::InvalidInput(
                    "give either --q or --jacobi, not both".into(),
                ))
            }
            (Some(q), false) => parse_coefficient(q)?,
            (None, true) => match mesh.chart {
                Some(equispec::mesh::Chart::Catenoid { a, s, .. }) => {
                    Coefficient::CatenoidJacobi { a, s }
                }
                Some(equispec::mesh::Chart::Disk) | Some(equispec::mesh::Chart::Plane) => {
                    Coefficient::Constant(0.0)
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "--jacobi needs a catenoid, disk or plane chart".into(),
                    ))
                }
            },
            (None, false) => Coefficient::Constant(0.0),
        };
        let robin = match &self.r {
            Some(r) => parse_coefficient(r)?,
            None => Coefficient::Constant(if self.jacobi { 1.0 } else { 0.0 }),
        };
        let mut problem = ProblemSpec::new(mesh, potential, robin);
        if self.robin_top || self.jacobi {
            let top = problem
                .mesh
                .vertices
                .iter()
                .map(|p| p.z.abs())
                .fold(0.0f64, f64::max);
            if top > 1e-12 {
                problem.retag_where(
                    |a, b| a.z.abs() > top - 1e-9 && b.z.abs() > top - 1e-9,
                    BoundaryTag::Robin,
                );
            } else if self.robin_top {
                return Err(Error::InvalidInput(
                    "--robin-top matched no boundary edges".into(),
                ));
            }
        }
        if let Some(axis) = self.dirichlet_plane {
            let coord = match axis {
                'x' => 0,
                'y' => 1,
                'z' => 2,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "--dirichlet-plane takes x, y or z, got `{}`",
                        other
                    )))
                }
            };
            let changed = problem.retag_where(
                |a, b| a[coord].abs() < 1e-12 && b[coord].abs() < 1e-12,
                BoundaryTag::Dirichlet,
            );
            if changed == 0 {
                return Err(Error::InvalidInput(
                    "--dirichlet-plane matched no boundary edges".into(),
                ));
            }
        }
        let group = match &self.group {
            None => None,
            Some(spec) => {
                let g = parse_group_spec(spec)?.act_on_mesh(&problem.mesh, 1e-9)?;
                let twist = match &self.twist {
                    None => TwistSpec::Trivial,
                    Some(t) if t.contains(',') || t.starts_with(['+', '-']) => {
                        let signs = t
                            .split(',')
                            .map(|s| {
                                s.trim().parse::<i8>().map_err(|_| {
                                    Error::InvalidInput(format!("bad twist entry `{}`", s))
                                })
                            })
                            .collect::<equispec::Result<Vec<i8>>>()?;
                        TwistSpec::Explicit(signs)
                    }
                    Some(t) => TwistSpec::parse_str(t)?,
                };
                Some(twist.apply(&g, &problem.mesh)?)
            }
        };
        let config_hash = equispec::util_hash(self.canonical().as_bytes());
        Ok(LoadedProblem {
            problem,
            group,
            config_hash,
        })
    }
}

fn parse_coefficient(text: &str) -> equispec::Result<Coefficient> {
    if let Ok(c) = text.trim().parse::<f64>() {
        Ok(Coefficient::Constant(c))
    } else {
        Ok(Coefficient::Expr(equispec::expr::Expr::parse(text)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of eigenpairs
    #[arg(long, default_value_t = 6)]
    count: usize,
    /// Classification tolerance for index/nullity
    #[arg(long, default_value_t = 0.05)]
    zero_tol: f64,
    /// Equivariant strategy when a group is given
    #[arg(long, default_value = "projected")]
    strategy: String,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Also write eigenfunction samples as CSV plot data
    #[arg(long)]
    eigenfunctions: Option<PathBuf>,
}

#[derive(Args)]
struct MontielRosArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Partition file: `piece <id>: <triangle indices>` lines
    #[arg(long)]
    partition: PathBuf,
    /// Counting threshold
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    #[arg(long, default_value_t = 0.05)]
    zero_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Suite name: sphere-table, k0, disk, nodal, ledger, or all
    suite: String,
    /// Directory for the per-suite JSON documents
    #[arg(long)]
    output: Option<PathBuf>,
    /// Reduced resolutions for a quick smoke run
    #[arg(long)]
    fast: bool,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long)]
    builtin: String,
    #[arg(long, default_value_t = 0)]
    level: u32,
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> equispec::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            println!("{}", content);
            Ok(())
        }
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> equispec::Result<u8> {
    let loaded = args.problem.load()?;
    let spectrum = match &loaded.group {
        None => solve_problem(&loaded.problem, args.count, args.zero_tol)?,
        Some(group) => {
            let strategy = EquivariantStrategy::parse(&args.strategy)?;
            solve_equivariant(&loaded.problem, group, args.count, strategy)?
        }
    };
    let report = spectrum_report(&spectrum, args.zero_tol, loaded.config_hash)?;
    match args.format {
        OutputFormat::Json => write_or_print(&args.output, &to_json_pretty(&report))?,
        OutputFormat::Csv => write_or_print(&args.output, &spectrum_csv(&spectrum))?,
    }
    if let Some(path) = &args.eigenfunctions {
        std::fs::write(path, eigenfunction_csv(&loaded.problem.mesh, &spectrum))?;
    }
    Ok(0)
}

fn cmd_montiel_ros(args: &MontielRosArgs) -> equispec::Result<u8> {
    let loaded = args.problem.load()?;
    let text = std::fs::read_to_string(&args.partition)?;
    let partition = Partition::parse(&text, &loaded.problem.mesh)?;
    let report = montiel_ros_check(
        &loaded.problem,
        &partition,
        args.t,
        loaded.group.as_ref(),
        args.zero_tol,
    )?;

    #[derive(serde::Serialize)]
    struct Envelope<'a> {
        config_hash: String,
        mesh_level: u32,
        pieces: usize,
        #[serde(flatten)]
        report: &'a equispec::montielros::MrCheckReport,
    }
    let envelope = Envelope {
        config_hash: format!("{:016x}", loaded.config_hash),
        mesh_level: loaded.problem.mesh.level,
        pieces: partition.pieces.len(),
        report: &report,
    };
    write_or_print(&args.output, &to_json_pretty(&envelope))?;
    if report.all_hold {
        Ok(0)
    } else {
        eprintln!("counting inequality violated; see the report");
        Ok(4)
    }
}

fn cmd_reproduce(args: &ReproduceArgs) -> equispec::Result<u8> {
    let opts = suites::SuiteOptions {
        fast: args.fast,
        output_dir: args.output.clone(),
    };
    let selected: Vec<&dyn suites::Suite> = if args.suite == "all" {
        suites::registry().to_vec()
    } else {
        let found = suites::registry()
            .iter()
            .find(|s| s.name() == args.suite)
            .copied();
        match found {
            Some(s) => vec![s],
            None => {
                return Err(Error::InvalidInput(format!(
                    "unknown suite `{}`; known: {}, all",
                    args.suite,
                    suites::registry()
                        .iter()
                        .map(|s| s.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )))
            }
        }
    };
    let mut all_pass = true;
    for suite in selected {
        let report = suite.run(&opts)?;
        println!("== suite {} ==", report.suite);
        for r in &report.rows {
            println!(
                "  [{}] {}: computed {} | reference {} | tol {}",
                if r.pass { "pass" } else { "FAIL" },
                r.label,
                r.computed,
                r.reference,
                r.tolerance
            );
        }
        println!(
            "  {}: {}\n",
            report.suite,
            if report.pass { "PASS" } else { "FAIL" }
        );
        if let Some(dir) = &args.output {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.json", report.suite));
            std::fs::write(path, to_json_pretty(&report))?;
        }
        all_pass &= report.pass;
    }
    Ok(if all_pass { 0 } else { 5 })
}

fn cmd_mesh(args: &MeshArgs) -> equispec::Result<u8> {
    let mut params = Params::default();
    for kv in &args.params {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("--param takes KEY=VALUE, got `{}`", kv))
        })?;
        params = params.set(
            k,
            v.parse()
                .map_err(|_| Error::InvalidInput(format!("bad value in `{}`", kv)))?,
        );
    }
    let mesh = build_builtin(&args.builtin, args.level, &params)?;
    write_or_print(&args.output, &equispec::mesh::io::write_mesh_string(&mesh))?;
    Ok(0)
}

fn cmd_list() -> equispec::Result<u8> {
    println!("builtin domains:");
    for b in builtin_registry() {
        println!("  {:<18} {}", b.id(), b.describe());
    }
    println!("\nreproduction suites:");
    for s in suites::registry() {
        println!("  {:<18} {}", s.name(), s.describe());
    }
    Ok(0)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SolverNonConvergence { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("EQUISPEC_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::MontielRos(args) => cmd_montiel_ros(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Mesh(args) => cmd_mesh(args),
        Command::List => cmd_list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
