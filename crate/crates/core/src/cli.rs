//! The `dsl2` command line. Every subcommand writes a JSON report (and data
//! files where it produces data) under `--out`; a short summary goes to
//! standard output.
//!
//! Exit codes: 0 success, 1 a verification failed (reports are still
//! written), 2 bad usage or unreadable input.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::complex::{build_surface, Complex2D, SurfaceSpec};
use crate::connection::{
    build_from_edge_weights, face_balance_cycle_residual, framed_generator_values, is_sl2, reconstruct_edge_weights,
    sl_n_face_balance, Connection, SimplexConnection, Sl2Verdict,
};
use crate::electric::{
    black_factorization, dirichlet_solve, laplace_image, star_triangle_network, total_current, ElectricNetwork,
    NetworkJson,
};
use crate::hyperbolic::HyperbolicOperator;
use crate::io::{read_json, to_json_string, write_text, ComplexJson, ConnectionJson, EdgeWeightsJson, OperatorJson};
use crate::lattice::{stack_from_csv, stack_to_csv, Boundary};
use crate::random;
use crate::schrodinger::{combined_connection, factorize_bw, SelfAdjointOperator};
use crate::toda::{cyclic2_from_boundary, cyclic2_residual, evolve_chain, toda_residual, toda_to_hirota_form, TodaStack};
use crate::trivalent::{
    trivalent_factorize, trivalent_laplace, FirstOrder, Tree, TreeFactorization, TrivalentJson, TrivalentOperator,
};
use crate::verify::verify_all;

#[derive(Debug, Parser)]
#[command(name = "dsl2", version, about = "Discrete SL2 connections, Laplace chains and star-triangle networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Tolerance for pass/fail decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for random instances (ChaCha8).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Lattice window, `MxN`.
    #[arg(long, global = true, value_parser = parse_size)]
    pub size: Option<(usize, usize)>,
    /// Number of steps (Laplace steps, tree depth).
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "dsl2-out")]
    pub out: PathBuf,
    /// Format of lattice data files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected MxN, got '{s}'"))?;
    let m = m.parse().map_err(|_| format!("expected MxN, got '{s}'"))?;
    let n = n.parse().map_err(|_| format!("expected MxN, got '{s}'"))?;
    Ok((m, n))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Surface generators.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Connections on surfaces.
    #[command(subcommand)]
    Conn(ConnCmd),
    /// Self-adjoint operators on black-white surfaces.
    #[command(subcommand)]
    Op(OpCmd),
    /// Laplace chains and the discrete Toda lattice.
    #[command(subcommand)]
    Toda(TodaCmd),
    /// Fourth order operators on trivalent trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Electric networks.
    #[command(subcommand)]
    Net(NetCmd),
    /// The full property suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
pub enum MeshCmd {
    /// Writes `complex.json` for `octahedron`, `icosahedron`, `double-torus`,
    /// `torus[:MxN]` or `disk[:MxN]` (`--size` supplies a missing `MxN`).
    Gen { surface: String },
}

#[derive(Debug, Args)]
pub struct SurfaceArg {
    /// Surface spec or a complex JSON file.
    pub surface: String,
}

#[derive(Debug, Args)]
pub struct ConnArg {
    /// Connection JSON file.
    pub connection: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ConnCmd {
    /// Random connection from edge weights (or a generic one with `--gl2`).
    Build {
        #[command(flatten)]
        surface: SurfaceArg,
        /// Draw independent coefficients instead of edge weights.
        #[arg(long)]
        gl2: bool,
        /// Edge weights JSON file instead of random weights.
        #[arg(long, conflicts_with = "gl2")]
        weights: Option<PathBuf>,
    },
    /// SL2 test with per-vertex and per-loop entries.
    Check(ConnArg),
    /// Holonomy of the homology generator loops.
    Holonomy(ConnArg),
    /// Star holonomy at every interior vertex.
    Curvature(ConnArg),
    /// Edge weights of an SL2 connection.
    Reconstruct(ConnArg),
    /// Face balance as a connection on a 2-complex.
    Slnbalance(ConnArg),
}

#[derive(Debug, Args)]
pub struct OperatorArg {
    /// Operator JSON file; without it a random operator on a `--size` torus.
    pub operator: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OpCmd {
    /// Black and white triangle factorizations.
    Factorize(OperatorArg),
    /// The connection joining the black and white factors.
    Combine(OperatorArg),
}

#[derive(Debug, Subcommand)]
pub enum TodaCmd {
    /// Laplace chain from a random near-constant operator.
    Evolve {
        /// Half-width of the perturbation around 1.
        #[arg(long, default_value_t = 0.01)]
        spread: f64,
    },
    /// Toda residual of a `k,m,n,value` stack.
    Residual { stack: PathBuf },
    /// Residual in the variables `v = kappa (w + 1)`.
    Hirota {
        stack: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Period-two chain from random boundary data.
    Cyclic2 {
        /// The constant `a b`.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

#[derive(Debug, Args)]
pub struct TreeArg {
    /// Tree operator JSON; without it a random one of depth `--steps`.
    pub tree: Option<PathBuf>,
    /// Value of `v` at vertex 0.
    #[arg(long, default_value_t = 1.0)]
    pub v0: f64,
}

#[derive(Debug, Subcommand)]
pub enum TreeCmd {
    /// Factorization `L = Q^+ Q + u` from the value of `v` at vertex 0.
    Factorize(TreeArg),
    /// The transformed operator `Q Q^+ + u` and its intertwining residual.
    Laplace(TreeArg),
}

#[derive(Debug, Args)]
pub struct NetArg {
    /// Network JSON; without it a random octahedron network.
    pub network: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum NetCmd {
    /// Star-triangle transformation with a random voltage.
    Stardelta(NetArg),
    /// Black-triangle factorization of the Laplacian.
    Factorize(NetArg),
    /// Kernel transport to the black triangles.
    Laplace {
        #[command(flatten)]
        net: NetArg,
        /// Vertices held fixed in the Dirichlet problem.
        #[arg(long, value_delimiter = ',', default_value = "0,2")]
        fixed: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Every property check; writes `verify_report.json`.
    All,
}

/// `Ok(false)` is a failed verification; `Err` is bad input.
type Outcome = anyhow::Result<bool>;

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid usage"));
            return 2;
        }
    };
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(anyhow!("--tol must be a positive number"));
    }
    match &cli.command {
        Command::Mesh(MeshCmd::Gen { surface }) => mesh_gen(cli, surface),
        Command::Conn(cmd) => conn(cli, cmd),
        Command::Op(cmd) => op(cli, cmd),
        Command::Toda(cmd) => toda(cli, cmd),
        Command::Tree(cmd) => tree(cli, cmd),
        Command::Net(cmd) => net(cli, cmd),
        Command::Verify(VerifyCmd::All) => {
            let report = verify_all(cli.seed);
            for c in &report.checks {
                println!("[{}] {:>2} {} (worst {:.3e}, tol {:.0e})", if c.passed { "pass" } else { "FAIL" }, c.id, c.name, c.worst, c.tol);
            }
            write_report(cli, "verify_report.json", &report)?;
            Ok(report.passed)
        }
    }
}

fn out_path(cli: &Cli, name: &str) -> PathBuf {
    cli.out.join(name)
}

fn write_report<T: Serialize>(cli: &Cli, name: &str, value: &T) -> anyhow::Result<()> {
    let path = out_path(cli, name);
    write_text(&path, &to_json_string(value)).with_context(|| format!("--out: cannot write {}", path.display()))?;
    Ok(())
}

fn input_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    read_json(path).with_context(|| format!("<{what}>"))
}

fn surface_spec(cli: &Cli, s: &str) -> anyhow::Result<SurfaceSpec> {
    let s = match (s, cli.size) {
        ("torus" | "disk", Some((m, n))) => format!("{s}:{m}x{n}"),
        ("torus" | "disk", None) => return Err(anyhow!("<surface>: '{s}' needs dimensions (torus:MxN or --size)")),
        _ => s.to_string(),
    };
    s.parse().map_err(|e| anyhow!("<surface>: {e}"))
}

fn load_complex(cli: &Cli, arg: &str) -> anyhow::Result<Complex2D> {
    if arg.ends_with(".json") {
        let j: ComplexJson = input_json(Path::new(arg), "surface")?;
        Ok(Complex2D::try_from(j).map_err(|e| anyhow!("<surface>: {e}"))?)
    } else {
        Ok(build_surface(&surface_spec(cli, arg)?).map_err(|e| anyhow!("<surface>: {e}"))?)
    }
}

fn load_connection(path: &Path) -> anyhow::Result<Connection> {
    let j: ConnectionJson = input_json(path, "connection")?;
    j.into_connection().context("<connection>")
}

fn mesh_gen(cli: &Cli, surface: &str) -> Outcome {
    let c = build_surface(&surface_spec(cli, surface)?).map_err(|e| anyhow!("<surface>: {e}"))?;
    let colorable = c.coloring().is_some() || c.bipartite_coloring().is_some();
    println!(
        "{surface}: {} vertices, {} edges, {} triangles, Euler characteristic {}, black-white colorable: {colorable}",
        c.n_vertices(),
        c.n_edges(),
        c.n_triangles(),
        c.euler_characteristic()
    );
    write_report(cli, "complex.json", &ComplexJson::from(&c))?;
    Ok(true)
}

fn conn(cli: &Cli, cmd: &ConnCmd) -> Outcome {
    match cmd {
        ConnCmd::Build { surface, gl2, weights } => {
            let c = Arc::new(load_complex(cli, &surface.surface)?);
            let mut rng = random::rng(cli.seed);
            let conn = if *gl2 {
                random::connection(&mut rng, c.clone())
            } else {
                let w = match weights {
                    Some(p) => {
                        let j: EdgeWeightsJson = input_json(p, "weights")?;
                        j.resolve(&c).context("--weights")?
                    }
                    None => random::edge_weights(&mut rng, &c),
                };
                write_report(cli, "weights.json", &EdgeWeightsJson::new(&c, &w))?;
                build_from_edge_weights(c.clone(), &w).context("--weights")?
            };
            write_report(cli, "connection.json", &ConnectionJson::from(&conn))?;
            println!("connection on {} triangles written", c.n_triangles());
            Ok(true)
        }
        ConnCmd::Check(a) => {
            let conn = load_connection(&a.connection)?;
            let report = is_sl2(&conn, cli.tol).context("<connection>")?;
            println!(
                "verdict: {} (locally {}, globally {}, bipartite {})",
                report.verdict,
                report.locally_sl2,
                report.globally_sl2,
                report.bipartite
            );
            for v in report.failing_vertices() {
                println!("  vertex {}: mu = {:.6e}", v.vertex, v.mu);
            }
            write_report(cli, "sl2_report.json", &report)?;
            Ok(report.verdict != Sl2Verdict::NotSl2)
        }
        ConnCmd::Holonomy(a) => {
            let conn = load_connection(&a.connection)?;
            let basis = conn.complex().homology_basis().context("<connection>")?;
            let framed = framed_generator_values(&conn).context("<connection>")?;
            let mut loops = Vec::new();
            for ((g, path), f) in basis.generator_edges.iter().zip(&basis.thick_loops).zip(&framed) {
                let k = conn.thick_holonomy(path).context("<connection>")?;
                loops.push(json!({
                    "generator_edge": g,
                    "length": path.len(),
                    "matrix": k.to_matrix(),
                    "log_scale": k.log_scale(),
                    "det": k.det(),
                    "framed": f,
                }));
            }
            println!("{} generator loops", loops.len());
            write_report(cli, "holonomy.json", &json!({ "loops": loops }))?;
            Ok(true)
        }
        ConnCmd::Curvature(a) => {
            let conn = load_connection(&a.connection)?;
            let c = conn.complex();
            let mut vertices = Vec::new();
            let mut worst = 0.0f64;
            for v in (0..c.n_vertices()).filter(|&v| c.is_interior_vertex(v)) {
                let k = conn.vertex_curvature(v).context("<connection>")?;
                let gap = (k.mu_from_matrix / k.mu_from_rho - 1.0).abs();
                worst = worst.max(gap);
                vertices.push(json!({
                    "vertex": v,
                    "normalized": k.normalized,
                    "alpha": k.alpha(),
                    "mu_from_matrix": k.mu_from_matrix,
                    "mu_from_rho": k.mu_from_rho,
                }));
            }
            println!("{} interior vertices; largest gap between the two mu values {worst:.3e}", vertices.len());
            write_report(cli, "curvature.json", &json!({ "max_gap": worst, "tol": cli.tol, "vertices": vertices }))?;
            Ok(worst < cli.tol)
        }
        ConnCmd::Reconstruct(a) => {
            let conn = load_connection(&a.connection)?;
            match reconstruct_edge_weights(&conn, 0, 1.0, cli.tol) {
                Ok(w) => {
                    let rebuilt = build_from_edge_weights(conn.complex_arc().clone(), &w).context("<connection>")?;
                    let gap = conn.max_mu_gap(&rebuilt);
                    println!("edge weights recovered; mu ratios reproduced to {gap:.3e}");
                    write_report(cli, "weights.json", &EdgeWeightsJson::new(conn.complex(), &w))?;
                    write_report(cli, "reconstruct_report.json", &json!({ "ok": gap < cli.tol, "mu_gap": gap }))?;
                    Ok(gap < cli.tol)
                }
                Err(e) => {
                    println!("no edge weights: {e}");
                    write_report(cli, "reconstruct_report.json", &json!({ "ok": false, "error": e.to_string() }))?;
                    Ok(false)
                }
            }
        }
        ConnCmd::Slnbalance(a) => {
            let conn = load_connection(&a.connection)?;
            let s = SimplexConnection::from_connection(&conn);
            let balance = sl_n_face_balance(&s, cli.tol);
            let residual = face_balance_cycle_residual(&s);
            println!("balanced: {} (cycle residual {residual:.3e})", balance.is_some());
            write_report(cli, "slnbalance.json", &json!({ "balanced": balance.is_some(), "cycle_residual": residual, "f": balance }))?;
            Ok(balance.is_some())
        }
    }
}

fn load_operator(cli: &Cli, arg: &OperatorArg) -> anyhow::Result<SelfAdjointOperator> {
    match &arg.operator {
        Some(p) => {
            let j: OperatorJson = input_json(p, "operator")?;
            Ok(j.into_operator().context("<operator>")?)
        }
        None => {
            let (m, n) = cli.size.unwrap_or((6, 6));
            let c = Arc::new(crate::complex::lattice_torus(m, n).map_err(|e| anyhow!("--size: {e}"))?);
            let mut rng = random::rng(cli.seed);
            let offdiag = random::positive_vec(&mut rng, c.n_edges(), 1.0);
            let potential = (0..c.n_vertices()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            Ok(SelfAdjointOperator::new(c, offdiag, potential).context("random operator")?)
        }
    }
}

fn op(cli: &Cli, cmd: &OpCmd) -> Outcome {
    use crate::complex::Color;
    match cmd {
        OpCmd::Factorize(a) => {
            let op = load_operator(cli, a)?;
            let f = factorize_bw(&op).context("<operator>")?;
            let (rb, rw) = (f.residual(&op, Color::Black), f.residual(&op, Color::White));
            println!("black residual {rb:.3e}, white residual {rw:.3e}");
            let side = |q: &crate::schrodinger::TriangleOperator, w: &[f64], r: f64| {
                json!({ "triangles": q.triangles, "coeffs": q.coeffs, "potential": w, "residual": r })
            };
            write_report(
                cli,
                "factorization.json",
                &json!({
                    "black": side(&f.black, &f.black_potential, rb),
                    "white": side(&f.white, &f.white_potential, rw),
                }),
            )?;
            if a.operator.is_none() {
                write_report(cli, "operator.json", &OperatorJson::from(&op))?;
            }
            Ok(rb.max(rw) < cli.tol)
        }
        OpCmd::Combine(a) => {
            let op = load_operator(cli, a)?;
            let f = factorize_bw(&op).context("<operator>")?;
            let conn = combined_connection(op.complex_arc().clone(), &f.black, &f.white).context("<operator>")?;
            let report = is_sl2(&conn, cli.tol).context("<operator>")?;
            println!("combined connection: {}", report.verdict);
            write_report(cli, "connection.json", &ConnectionJson::from(&conn))?;
            write_report(cli, "sl2_report.json", &report)?;
            Ok(report.verdict == Sl2Verdict::Sl2)
        }
    }
}

fn write_stack(cli: &Cli, name: &str, stack: &TodaStack) -> anyhow::Result<()> {
    match cli.format {
        Format::Csv => {
            let path = out_path(cli, &format!("{name}.csv"));
            write_text(&path, &stack_to_csv(stack.k0, &stack.layers)).context("--out")?;
        }
        Format::Json => {
            let layers: Vec<&[f64]> = stack.layers.iter().map(|l| l.values()).collect();
            let (rows, cols) = stack.layers[0].shape();
            write_report(cli, &format!("{name}.json"), &json!({ "k0": stack.k0, "rows": rows, "cols": cols, "layers": layers }))?;
        }
    }
    Ok(())
}

fn read_stack(path: &Path) -> anyhow::Result<TodaStack> {
    let file = File::open(path).with_context(|| format!("<stack>: {}", path.display()))?;
    let (k0, layers) = stack_from_csv(file, Boundary::Periodic).context("<stack>")?;
    TodaStack::new(k0, layers).context("<stack>")
}

fn layer_report(stack: &TodaStack, f: impl Fn(i64) -> anyhow::Result<f64>) -> anyhow::Result<(Vec<serde_json::Value>, f64)> {
    let mut layers = Vec::new();
    let mut worst = 0.0f64;
    for k in stack.interior() {
        let r = f(k)?;
        worst = worst.max(r);
        layers.push(json!({ "k": k, "max_residual": r }));
    }
    Ok((layers, worst))
}

fn toda(cli: &Cli, cmd: &TodaCmd) -> Outcome {
    match cmd {
        TodaCmd::Evolve { spread } => {
            let (m, n) = cli.size.unwrap_or((8, 8));
            let steps = cli.steps.unwrap_or(4);
            let mut rng = random::rng(cli.seed);
            let mut near = || random::field(&mut rng, m, n, 1.0 - spread, 1.0 + spread);
            let h = HyperbolicOperator::new(near(), near(), near()).map_err(|e| anyhow!("--size: {e}"))?;
            let ev = evolve_chain(&h, steps).context("evolution")?;
            let (layers, worst) =
                layer_report(&ev.stack, |k| Ok(toda_residual(&ev.stack, k).context("stack")?.max_abs()))?;
            println!("{} layers on {m}x{n}; max Toda residual {worst:.3e}", ev.stack.layers.len());
            write_stack(cli, "stack", &ev.stack)?;
            write_report(cli, "toda_report.json", &json!({ "max_residual": worst, "tol": cli.tol, "layers": layers }))?;
            Ok(worst < cli.tol)
        }
        TodaCmd::Residual { stack } => {
            let s = read_stack(stack)?;
            let (layers, worst) = layer_report(&s, |k| Ok(toda_residual(&s, k).context("<stack>")?.max_abs()))?;
            println!("max Toda residual {worst:.3e}");
            write_report(cli, "toda_report.json", &json!({ "max_residual": worst, "tol": cli.tol, "layers": layers }))?;
            Ok(worst < cli.tol)
        }
        TodaCmd::Hirota { stack, kappa } => {
            if *kappa == 0.0 {
                return Err(anyhow!("--kappa must be nonzero"));
            }
            let s = read_stack(stack)?;
            let (layers, worst) = layer_report(&s, |k| {
                let plain = toda_residual(&s, k).context("<stack>")?.map(|x| x * kappa.powi(4));
                let scaled = toda_to_hirota_form(&s, k, *kappa).context("<stack>")?;
                Ok(plain.max_abs_diff(&scaled))
            })?;
            println!("kappa form differs from kappa^4 times the Toda residual by {worst:.3e}");
            write_report(cli, "hirota_report.json", &json!({ "kappa": kappa, "max_difference": worst, "layers": layers }))?;
            Ok(worst < cli.tol)
        }
        TodaCmd::Cyclic2 { c } => {
            let (m, n) = cli.size.unwrap_or((8, 8));
            let mut rng = random::rng(cli.seed);
            let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
            let col: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
            let (a, b) = cyclic2_from_boundary(*c, &row, &col).context("--c")?;
            let r = cyclic2_residual(&a, &b).context("cyclic")?;
            let (g, sys) = (r.g.max_abs(), r.system.max_abs());
            let stack = TodaStack::new(0, vec![a.clone(), b.clone(), a, b]).context("cyclic")?;
            let toda = stack.max_residual().context("cyclic")?;
            println!("G residual {g:.3e}, system residual {sys:.3e}, Toda residual {toda:.3e}");
            write_stack(cli, "cyclic2", &TodaStack { k0: 0, layers: stack.layers[..2].to_vec() })?;
            write_report(cli, "cyclic2_report.json", &json!({ "c": c, "g_residual": g, "system_residual": sys, "toda_residual": toda }))?;
            Ok(g.max(sys).max(toda) < cli.tol)
        }
    }
}

fn load_tree(cli: &Cli, arg: &TreeArg) -> anyhow::Result<TrivalentOperator> {
    match &arg.tree {
        Some(p) => {
            let j: TrivalentJson = input_json(p, "tree")?;
            Ok(TrivalentOperator::try_from(j).context("<tree>")?)
        }
        None => {
            let depth = cli.steps.unwrap_or(3);
            if depth == 0 {
                return Err(anyhow!("--steps: tree depth must be at least 1"));
            }
            let tree = Tree::complete(depth);
            let mut rng = random::rng(cli.seed);
            let mut d: Vec<[f64; 2]> =
                tree.edges().iter().map(|_| [random::positive(&mut rng, 0.7), random::positive(&mut rng, 0.7)]).collect();
            for (e, &[p, q]) in tree.edges().iter().enumerate() {
                if tree.is_leaf(p) {
                    d[e][0] = d[e][1];
                }
                if tree.is_leaf(q) {
                    d[e][1] = d[e][0];
                }
            }
            let v = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..1.5)).collect();
            let u = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..2.0)).collect();
            Ok(TrivalentOperator::from_factorization(&tree, &TreeFactorization { q: FirstOrder { d, v }, u }))
        }
    }
}

fn tree(cli: &Cli, cmd: &TreeCmd) -> Outcome {
    let (TreeCmd::Factorize(arg) | TreeCmd::Laplace(arg)) = cmd;
    let op = load_tree(cli, arg)?;
    let f = trivalent_factorize(&op, 0, arg.v0).context("<tree>")?;
    let again = TrivalentOperator::from_factorization(&op.tree, &f);
    let residual = (again.to_dense() - op.to_dense()).abs().max();
    if arg.tree.is_none() {
        write_report(cli, "tree.json", &TrivalentJson::from(&op))?;
    }
    match cmd {
        TreeCmd::Factorize(_) => {
            println!("factorized with v0 = {}; residual {residual:.3e}", arg.v0);
            write_report(
                cli,
                "tree_factorization.json",
                &json!({ "v0": arg.v0, "d": f.q.d, "v": f.q.v, "u": f.u, "residual": residual }),
            )?;
            Ok(residual < cli.tol)
        }
        TreeCmd::Laplace(_) => {
            let image = trivalent_laplace(&op.tree, &f).context("<tree>")?;
            // L~ Q = Q u^-1 L, checked on a random vector
            let mut rng = random::rng(cli.seed ^ 0x5eed);
            let psi: Vec<f64> = (0..op.tree.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = image.apply(&f.q.apply(&op.tree, &psi));
            let lpsi: Vec<f64> = op.apply(&psi).iter().zip(&f.u).map(|(x, u)| x / u).collect();
            let rhs = f.q.apply(&op.tree, &lpsi);
            let intertwining = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("Laplace image written; intertwining residual {intertwining:.3e}");
            write_report(cli, "tree_laplace.json", &TrivalentJson::from(&image))?;
            write_report(cli, "tree_laplace_report.json", &json!({ "factorization_residual": residual, "intertwining_residual": intertwining }))?;
            Ok(residual.max(intertwining) < cli.tol)
        }
    }
}

fn load_network(cli: &Cli, arg: &NetArg) -> anyhow::Result<ElectricNetwork> {
    match &arg.network {
        Some(p) => {
            let j: NetworkJson = input_json(p, "network")?;
            Ok(ElectricNetwork::try_from(j).context("<network>")?)
        }
        None => {
            let c = crate::complex::octahedron().context("octahedron")?;
            let mut rng = random::rng(cli.seed);
            let cond = random::positive_vec(&mut rng, c.n_edges(), 1.0);
            Ok(ElectricNetwork::from_black_triangles(&c, cond).context("octahedron")?)
        }
    }
}

fn net(cli: &Cli, cmd: &NetCmd) -> Outcome {
    let arg = match cmd {
        NetCmd::Stardelta(a) | NetCmd::Factorize(a) => a,
        NetCmd::Laplace { net, .. } => net,
    };
    let network = load_network(cli, arg)?;
    if arg.network.is_none() {
        write_report(cli, "network.json", &NetworkJson::from(&network))?;
    }
    match cmd {
        NetCmd::Stardelta(_) => {
            let mut rng = random::rng(cli.seed ^ 0x5eed);
            let u: Vec<f64> = (0..network.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (star, u_star) = star_triangle_network(&network, &u).context("<network>")?;
            let before = total_current(&network, &u).context("<network>")?;
            let after = total_current(&star, &u_star).context("<network>")?;
            let gap = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("{} centers added; boundary currents preserved to {gap:.3e}", star.n_vertices() - network.n_vertices());
            write_report(cli, "network_star.json", &NetworkJson::from(&star))?;
            write_report(cli, "stardelta_report.json", &json!({ "u": u, "u_star": u_star, "current_gap": gap }))?;
            Ok(gap < cli.tol)
        }
        NetCmd::Factorize(_) => {
            let f = black_factorization(&network).context("<network>")?;
            println!("factorization residual {:.3e}", f.residual);
            write_report(
                cli,
                "network_factorization.json",
                &json!({
                    "triangles": f.triangles,
                    "star": f.star,
                    "sigma": f.sigma,
                    "w": f.w,
                    "residual": f.residual,
                    "every_vertex_in_three_triangles": network.every_vertex_in_three_triangles(),
                }),
            )?;
            Ok(f.residual < cli.tol)
        }
        NetCmd::Laplace { fixed, .. } => {
            if let Some(&p) = fixed.iter().find(|&&p| p >= network.n_vertices()) {
                return Err(anyhow!("--fixed: vertex {p} does not exist"));
            }
            let mut rng = random::rng(cli.seed ^ 0x5eed);
            let values: Vec<(usize, f64)> = fixed.iter().map(|&p| (p, rng.gen_range(-1.0..1.0))).collect();
            let u = dirichlet_solve(&network, &values).context("<network>")?;
            let free: Vec<usize> = (0..network.n_vertices()).filter(|p| !fixed.contains(p)).collect();
            match laplace_image(&network, &u, &free, cli.tol) {
                Ok(img) => {
                    println!(
                        "verified normalization {}: kernel residual {:.3e} (other {:.3e})",
                        img.verified, img.kernel_residual, img.rejected_residual
                    );
                    write_report(
                        cli,
                        "network_laplace.json",
                        &json!({
                            "verified_normalization": img.verified,
                            "kernel_residual": img.kernel_residual,
                            "rejected_residual": img.rejected_residual,
                            "window": img.window,
                            "u": u,
                            "u_prime": img.u_prime,
                        }),
                    )?;
                    Ok(true)
                }
                Err(e @ crate::electric::NetworkError::NoKernelVector { .. }) => {
                    println!("{e}");
                    write_report(cli, "network_laplace.json", &json!({ "error": e.to_string() }))?;
                    Ok(false)
                }
                Err(e) => Err(anyhow!("<network>: {e}")),
            }
        }
    }
}
