//! Command line front end: validate complexes, build their region dual
//! graphs, solve flux/mmf networks, run the exact verification suite, and
//! benchmark the dual-graph construction.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver failure,
//! 3 I/O or parse error.

use clap::{Parser, Subcommand, ValueEnum};
use s2net_core::dual_network::{self, DualNetworkError};
use s2net_core::network::{
    solve_coboundary_based, solve_cycle_based, tellegen_check, NetworkError, DEFAULT_SOLVE_TOL,
};
use s2net_core::oracle::{self, CheckMode};
use s2net_core::tag::{region_graph, ExternalFusion, RegionPipeline};
use s2net_core::{fixtures, io as core_io, Complex64, Device64, Solution64};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "s2net",
    version,
    about = "Flux/mmf networks on triangulated surfaces"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural and geometric validity of a complex file.
    Validate {
        file: PathBuf,
        /// Coincidence tolerance for geometric checks (default: scaled to
        /// the bounding box).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Skip the pairwise geometric intersection checks.
        #[arg(long)]
        no_geometry: bool,
    },
    /// Build the tag graph and region dual graph, report their sizes.
    Dual {
        file: PathBuf,
        /// Write the dual graph in DOT format to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also write the tag graph in DOT format to this path.
        #[arg(long)]
        tag_dot: Option<PathBuf>,
        /// Fuse unbounded-region nodes of a disconnected complex.
        #[arg(long)]
        fuse_external: bool,
    },
    /// Solve the flux/mmf network.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Cycle)]
        method: Method,
        /// Residual tolerance (relative).
        #[arg(long, default_value_t = DEFAULT_SOLVE_TOL)]
        tol: f64,
        /// Write per-triangle results as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the exact-arithmetic verification suite on a complex.
    Verify { file: PathBuf },
    /// Equivalent inverse reluctance seen by a loop source on one triangle,
    /// by direct solve, tree enumeration and matrix-tree determinants.
    DualAnalyze {
        file: PathBuf,
        /// Triangle id (file label).
        #[arg(long)]
        triangle: u64,
    },
    /// Time the dual-graph construction on generated families.
    Bench {
        #[arg(long, value_enum, default_value_t = Family::StackedCubes)]
        family: Family,
        /// Comma-separated family sizes (cube counts).
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Timed repetitions per size; the median is reported.
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Write the size-vs-time table to this path instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Method {
    Cycle,
    Coboundary,
    Both,
}

#[derive(Copy, Clone, ValueEnum)]
enum Family {
    StackedCubes,
}

enum CliError {
    Io(String),
    Parse(String),
    Validation(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) | CliError::Parse(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m)
            | CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Solver(m) => m,
        }
    }
}

impl From<core_io::IoError> for CliError {
    fn from(e: core_io::IoError) -> Self {
        match e {
            core_io::IoError::Parse { .. } => CliError::Parse(e.to_string()),
            core_io::IoError::Complex(_) | core_io::IoError::Fixture(_) => {
                CliError::Validation(e.to_string())
            }
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<DualNetworkError> for CliError {
    fn from(e: DualNetworkError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<s2net_core::tag::TagError> for CliError {
    fn from(e: s2net_core::tag::TagError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_complex(path: &Path) -> Result<(Complex64, Device64), CliError> {
    Ok(core_io::parse_complex(&read_file(path)?)?)
}

fn pipeline(complex: &Complex64, fusion: ExternalFusion) -> Result<RegionPipeline, CliError> {
    Ok(region_graph(complex, fusion)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate {
            file,
            tolerance,
            no_geometry,
        } => {
            let (complex, _) = load_complex(&file)?;
            let tol = tolerance.unwrap_or_else(|| {
                let d = complex.bounding_diagonal();
                if d > 0.0 {
                    d * 1e-9
                } else {
                    1e-9
                }
            });
            let report = complex.validate(tol, !no_geometry);
            if cli.json {
                let violations: Vec<String> =
                    report.violations.iter().map(|v| v.to_string()).collect();
                println!(
                    "{}",
                    json!({
                        "valid": report.is_valid(),
                        "triangles": complex.triangle_count(),
                        "edges": complex.edge_count(),
                        "vertices": complex.vertex_count(),
                        "violations": violations,
                    })
                );
            } else {
                for v in &report.violations {
                    println!("violation: {v}");
                }
                println!(
                    "{}: {} vertices, {} edges, {} triangles: {}",
                    file.display(),
                    complex.vertex_count(),
                    complex.edge_count(),
                    complex.triangle_count(),
                    if report.is_valid() {
                        "valid"
                    } else {
                        "INVALID"
                    }
                );
            }
            if report.is_valid() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "{} violation(s)",
                    report.violations.len()
                )))
            }
        }

        Command::Dual {
            file,
            dot,
            tag_dot,
            fuse_external,
        } => {
            let (complex, _) = load_complex(&file)?;
            let fusion = if fuse_external {
                ExternalFusion::On
            } else {
                ExternalFusion::Off
            };
            let p = pipeline(&complex, fusion)?;
            if let Some(path) = dot {
                write_file(&path, &core_io::dual_to_dot(&complex, &p.dual))?;
            }
            if let Some(path) = tag_dot {
                write_file(&path, &core_io::tag_to_dot(&p.tag))?;
            }
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "tag_vertices": p.tag.side_count(),
                        "tag_edges": p.tag.edges().len(),
                        "components": p.components.len(),
                        "nodes": p.dual.node_count(),
                        "edges": p.dual.edge_count(),
                        "self_loops": p.dual.self_loop_count(),
                    })
                );
            } else {
                println!(
                    "{} nodes, {} edges",
                    p.dual.node_count(),
                    p.dual.edge_count()
                );
            }
            Ok(())
        }

        Command::Solve {
            file,
            method,
            tol,
            csv,
        } => {
            let (complex, device) = load_complex(&file)?;
            let p = pipeline(&complex, ExternalFusion::On)?;
            let a2 = complex.coboundary_matrix(2);
            let incidence = p.dual.incidence_matrix();

            let (solution, method_name) = match method {
                Method::Cycle => (solve_cycle_based(&p.dual, &device, tol)?, "cycle"),
                Method::Coboundary => (
                    solve_coboundary_based(&complex, &device, tol)?,
                    "coboundary",
                ),
                Method::Both => {
                    let cyc = solve_cycle_based(&p.dual, &device, tol)?;
                    let cob = solve_coboundary_based(&complex, &device, tol)?;
                    let scale = cyc
                        .flux
                        .iter()
                        .chain(&cyc.adjusted_mmf)
                        .fold(1.0f64, |a, x| a.max(x.abs()));
                    let worst = cyc
                        .flux
                        .iter()
                        .zip(&cob.flux)
                        .chain(cyc.adjusted_mmf.iter().zip(&cob.adjusted_mmf))
                        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                    if worst > tol * scale {
                        return Err(CliError::Solver(format!(
                            "cross-check failed: methods disagree by {worst} (tolerance {})",
                            tol * scale
                        )));
                    }
                    (cyc, "both")
                }
            };
            let diag = tellegen_check(&solution, &a2, &incidence);
            if let Some(path) = &csv {
                write_file(
                    path,
                    &core_io::solution_to_csv(&complex, &solution, &diag, method_name),
                )?;
            }
            if cli.json {
                println!("{}", solution_json(&complex, &solution, &diag, method_name));
            } else {
                println!("method: {method_name}");
                println!("triangle_id flux mmf_adjusted mmf_raw");
                for (t, tri) in complex.triangles().iter().enumerate() {
                    println!(
                        "{} {} {} {}",
                        tri.label, solution.flux[t], solution.adjusted_mmf[t], solution.raw_mmf[t]
                    );
                }
                println!("tellegen inner product: {}", diag.inner_product);
                println!("node flux residual:     {}", diag.node_flux_residual);
                println!("cycle residual:         {}", diag.cycle_residual);
                println!(
                    "diagnostics: {}",
                    if diag.pass(tol) { "pass" } else { "FAIL" }
                );
            }
            if diag.pass(tol) {
                Ok(())
            } else {
                Err(CliError::Solver(
                    "solution diagnostics exceed tolerance".into(),
                ))
            }
        }

        Command::Verify { file } => {
            let (complex, _) = load_complex(&file)?;
            let p = pipeline(&complex, ExternalFusion::On)?;
            let a2 = complex.coboundary_matrix(2);
            let a1 = complex.coboundary_matrix(1);
            let incidence = p.dual.incidence_matrix();
            let n = complex.triangle_count();

            let mut checks: Vec<(String, bool, String)> = Vec::new();

            let comp_zero = a1.product_is_zero(&a2);
            checks.push((
                "coboundary composition zero".into(),
                comp_zero,
                String::new(),
            ));

            let rows_are_cycles = incidence
                .to_i64_rows()
                .iter()
                .all(|row| a2.int_mat_vec(row).iter().all(|&x| x == 0));
            checks.push((
                "incidence rows are cycles".into(),
                rows_are_cycles,
                String::new(),
            ));

            let rank_a2 = oracle::rank(&a2);
            let rank_inc = oracle::rank(&incidence);
            checks.push((
                "rank sum".into(),
                rank_a2 + rank_inc == n,
                format!("{rank_a2} + {rank_inc} vs {n}"),
            ));

            let cycles = oracle::cycle_space_basis(&a2);
            match oracle::minimal_support_vectors(&cycles, 4096) {
                Ok(vecs) => {
                    let regular = vecs.iter().all(|v| oracle::is_sign_vector(v));
                    checks.push((
                        "regularity of minimal supports".into(),
                        regular,
                        format!("{} vectors", vecs.len()),
                    ));
                }
                Err(oracle::OracleError::LimitExceeded { .. }) => {
                    checks.push((
                        "regularity of minimal supports".into(),
                        true,
                        "skipped (too large)".into(),
                    ));
                }
                Err(e) => return Err(CliError::Validation(e.to_string())),
            }

            if cycles.nrows() > 0 {
                let base: Vec<usize> = {
                    // Greedy first independent column set.
                    let mut base = Vec::new();
                    for col in 0..n {
                        let mut trial = base.clone();
                        trial.push(col);
                        let sub = cycles.column_subset(&trial);
                        if sub.rank() == trial.len() {
                            base = trial;
                        }
                        if base.len() == cycles.nrows() {
                            break;
                        }
                    }
                    base
                };
                if let Some(q) = oracle::standard_representative(&cycles, &base) {
                    let mode = if n <= 12 {
                        CheckMode::Exhaustive
                    } else {
                        CheckMode::Sampled {
                            samples: 512,
                            seed: 0x7e57,
                        }
                    };
                    let report = oracle::total_unimodularity_check(&q, mode)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    checks.push((
                        "total unimodularity of a standard representative".into(),
                        report.totally_unimodular,
                        format!(
                            "{} determinants, {}",
                            report.determinants_checked,
                            if report.exhaustive {
                                "exhaustive"
                            } else {
                                "sampled"
                            }
                        ),
                    ));
                }
            }

            let all_ok = checks.iter().all(|(_, ok, _)| *ok);
            if cli.json {
                let items: Vec<serde_json::Value> = checks
                    .iter()
                    .map(|(name, ok, detail)| json!({ "check": name, "ok": ok, "detail": detail }))
                    .collect();
                println!("{}", json!({ "ok": all_ok, "checks": items }));
            } else {
                for (name, ok, detail) in &checks {
                    println!(
                        "{}: {}{}",
                        name,
                        if *ok { "ok" } else { "FAIL" },
                        if detail.is_empty() {
                            String::new()
                        } else {
                            format!(" ({detail})")
                        }
                    );
                }
            }
            if all_ok {
                Ok(())
            } else {
                Err(CliError::Validation("verification checks failed".into()))
            }
        }

        Command::DualAnalyze { file, triangle } => {
            let (complex, device) = load_complex(&file)?;
            let t = complex
                .triangle_by_label(triangle)
                .ok_or_else(|| CliError::Validation(format!("no triangle with id {triangle}")))?;
            let p = pipeline(&complex, ExternalFusion::On)?;
            let report = dual_network::equivalent_inverse_reluctance(&p.dual, &device, t)?;
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "triangle": triangle,
                        "self_loop": report.self_loop,
                        "direct": report.direct,
                        "enumeration": report.enumeration,
                        "matrix_tree": report.matrix_tree,
                        "spread": report.spread(),
                    })
                );
            } else {
                println!(
                    "triangle {triangle} ({})",
                    if report.self_loop {
                        "self loop"
                    } else {
                        "loop source"
                    }
                );
                println!("direct solve:  {}", report.direct);
                match report.enumeration {
                    Some(g) => println!("tree ratio:    {g}"),
                    None => println!("tree ratio:    skipped (graph too large; matrix-tree used)"),
                }
                println!("matrix-tree:   {}", report.matrix_tree);
                println!("spread:        {}", report.spread());
            }
            Ok(())
        }

        Command::Bench {
            family: Family::StackedCubes,
            sizes,
            runs,
            csv,
        } => {
            if sizes.is_empty() || runs == 0 {
                return Err(CliError::Validation(
                    "need at least one size and one run".into(),
                ));
            }
            let mut rows = Vec::new();
            for &n in &sizes {
                if n == 0 {
                    return Err(CliError::Validation("sizes must be positive".into()));
                }
                let complex = fixtures::stacked_cubes(n);
                let mut times: Vec<f64> = (0..runs)
                    .map(|_| -> Result<f64, CliError> {
                        let t0 = Instant::now();
                        let p = pipeline(&complex, ExternalFusion::On)?;
                        let dt = t0.elapsed().as_secs_f64();
                        if p.dual.node_count() != n + 1 || p.dual.edge_count() != 10 * n + 2 {
                            return Err(CliError::Solver(format!(
                                "unexpected dual graph for {n} cubes: {} nodes, {} edges",
                                p.dual.node_count(),
                                p.dual.edge_count()
                            )));
                        }
                        Ok(dt)
                    })
                    .collect::<Result<_, _>>()?;
                times.sort_by(|a, b| a.partial_cmp(b).unwrap());
                rows.push((n, complex.triangle_count(), times[times.len() / 2]));
            }
            let mut table = String::from("cubes,triangles,seconds_median\n");
            for &(n, tris, secs) in &rows {
                table.push_str(&format!("{n},{tris},{secs}\n"));
            }
            if let Some(path) = &csv {
                write_file(path, &table)?;
            }
            if cli.json {
                let items: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|&(n, tris, secs)| {
                        json!({ "cubes": n, "triangles": tris, "seconds_median": secs })
                    })
                    .collect();
                println!(
                    "{}",
                    json!({ "family": "stacked-cubes", "runs": runs, "rows": items })
                );
            } else {
                print!("{table}");
            }
            Ok(())
        }
    }
}

fn solution_json(
    complex: &Complex64,
    solution: &Solution64,
    diag: &s2net_core::network::TellegenDiagnostics<f64>,
    method: &str,
) -> String {
    let rows: Vec<serde_json::Value> = complex
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            json!({
                "triangle_id": tri.label,
                "flux_weber": solution.flux[t],
                "mmf_adjusted": solution.adjusted_mmf[t],
                "mmf_raw": solution.raw_mmf[t],
            })
        })
        .collect();
    json!({
        "method": method,
        "results": rows,
        "diagnostics": {
            "solve_residual": solution.residual,
            "tellegen_inner_product": diag.inner_product,
            "node_flux_residual": diag.node_flux_residual,
            "cycle_residual": diag.cycle_residual,
        }
    })
    .to_string()
}
