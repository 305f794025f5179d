use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracdecomp::{
    bounds_report, decompose, generate_divisible, lp_feasible_with, parse_weighting, verify, write_weighting, AnchorMode,
    Backend, CliqueId, CliqueIndex, CliqueWeighting, DecomposeOptions, Decomposition, Error, PartiteGraph, Rational,
    Scalar, TransportOptions,
};

const EXIT_CODES: &str = "\
Exit status:
  0  success; the verdict is positive (decompose: all edge sums 1, verify: decomposition, oracle: feasible)
  1  negative verdict (edge sums off, negative weights, or LP infeasible)
  2  usage error
  3  parse error in a graph or weighting file
  4  I/O error
  5  instance exceeds the oracle size limits (use --force)
  6  graph is not K_r-divisible
  7  graph has edges but no transversal cliques
  8  a transport precondition failed (empty helper family, no partner vertex, intermediate set too small, set not neighbour-rich)
  9  any other error";

#[derive(Parser)]
#[command(name = "fracdecomp", version, about = "Fractional K_r-decompositions of balanced r-partite graphs", after_help = EXIT_CODES)]
struct Cli {
    /// Worker thread cap (0 = one per core).
    #[arg(long, global = true, env = "FRACDECOMP_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a divisible instance: complete r-partite minus k perfect matchings per class pair.
    Gen {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        matchings: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the graph summary, partial clique counts and the clique-count bounds.
    Check { graph: PathBuf },
    /// Run the pipeline and write the weighting and certificate.
    Decompose {
        graph: PathBuf,
        #[command(flatten)]
        anchors: AnchorArgs,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        /// Write the weighting here.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Write the certificate here (it is always printed to stdout).
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Print the per-stage log to stderr.
        #[arg(long)]
        trace: bool,
        /// Evaluate the magnitude ceilings and print them to stderr.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Check a weighting file against the edge constraints.
    Verify {
        graph: PathBuf,
        weights: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
    },
    /// Decide LP feasibility exactly.
    Oracle {
        graph: PathBuf,
        /// Lift the instance size limits.
        #[arg(long)]
        force: bool,
        /// Write the feasible witness here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Tabulate LP feasibility of generated instances against hat_delta/n.
    Probe {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 5)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        force: bool,
    },
    /// Time enumeration and the pipeline over a size grid; CSV on stdout.
    Bench {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [12usize, 24, 48])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        matchings: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Largest n run with the exact backend.
        #[arg(long, default_value_t = 24)]
        exact_max: usize,
    },
}

#[derive(Args)]
struct AnchorArgs {
    /// Anchor selection: `single:<id>`, `sample:<count>:<seed>` or `all`.
    #[arg(long, default_value = "single:0", value_parser = parse_anchor)]
    anchors: AnchorMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

fn parse_anchor(text: &str) -> Result<AnchorMode, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number `{s}` in `{text}`"));
    match parts.as_slice() {
        ["all"] => Ok(AnchorMode::All),
        ["single", id] => Ok(AnchorMode::Single(CliqueId(num(id)? as usize))),
        ["sample", count, seed] => Ok(AnchorMode::Sample { count: num(count)? as usize, seed: num(seed)? }),
        _ => Err(format!("unknown anchor mode `{text}`")),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Parse { .. } => 3,
        Error::Io(_) => 4,
        Error::SizeLimit(_) => 5,
        Error::Divisibility(_) => 6,
        Error::NoCliques => 7,
        Error::GadgetInfeasible(_)
        | Error::EmptyIntersection(_)
        | Error::IntermediateSetTooSmall { .. }
        | Error::NotNeighbourRich(_) => 8,
        _ => 9,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(Error::Io)
}

fn load_graph(path: &Path) -> Result<PartiteGraph, Error> {
    PartiteGraph::parse(&read(path)?)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn cmd_check(path: &Path) -> Result<u8, Error> {
    let g = load_graph(path)?;
    let s = g.summarize();
    let idx = CliqueIndex::enumerate(&g);
    println!("r {}", s.r);
    println!("n {}", s.n);
    println!("edges {}", s.edge_count);
    println!("hat-delta {}", s.hat_delta);
    println!("delta {}", s.delta.to_text());
    println!("divisible {}", s.divisible);
    println!("cliques {}", idx.k_total());
    let report = bounds_report(&g, &idx);
    for row in &report.k_table {
        let classes: Vec<String> = row.classes.iter().map(usize::to_string).collect();
        println!("k [{}] {}", classes.join(","), row.count);
    }
    println!("{}", report.total_bound);
    println!("{}", report.edge_bound);
    Ok(0)
}

fn run_decompose<S: Scalar>(
    g: &PartiteGraph,
    idx: &CliqueIndex,
    opts: &DecomposeOptions,
    weights: Option<&Path>,
    certificate: Option<&Path>,
) -> Result<u8, Error> {
    let out: Decomposition<S> = decompose(g, idx, opts)?;
    for line in &out.trace {
        eprintln!("{line}");
    }
    for check in &out.diagnostics {
        eprintln!("{check}");
    }
    for (stage, t) in &out.timings {
        eprintln!("time {stage} {:.3}s", t.as_secs_f64());
    }
    if let Some(p) = weights {
        fs::write(p, write_weighting(idx, &out.weighting))?;
    }
    let text = out.certificate.to_text();
    print!("{text}");
    if let Some(p) = certificate {
        fs::write(p, &text)?;
    }
    Ok(verdict(out.certificate.edge_sums_exact()))
}

fn cmd_verify(graph: &Path, weights: &Path, backend: Backend) -> Result<u8, Error> {
    let g = load_graph(graph)?;
    let idx = CliqueIndex::enumerate(&g);
    let w = parse_weighting(&idx, &read(weights)?)?;
    let ok = match backend {
        Backend::Exact => {
            let record = verify(&g, &idx, &w)?;
            print!("{}", record.to_text());
            record.verdict
        }
        Backend::Float => {
            let values = w.values().iter().map(f64::from_rational).collect();
            let w = CliqueWeighting::<f64>::from_values(&idx, values)?;
            let record = verify(&g, &idx, &w)?;
            print!("{}", record.to_text());
            record.verdict
        }
    };
    Ok(verdict(ok))
}

fn cmd_oracle(graph: &Path, force: bool, witness: Option<&Path>) -> Result<u8, Error> {
    let g = load_graph(graph)?;
    let idx = CliqueIndex::enumerate(&g);
    let out = lp_feasible_with(&g, &idx, force)?;
    print!("{}", out.to_text());
    if let (Some(p), Some(w)) = (witness, &out.witness) {
        fs::write(p, write_weighting(&idx, w))?;
    }
    Ok(verdict(out.feasible()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_probe(r: usize, n: usize, k_min: usize, k_max: usize, trials: u64, seed: u64, force: bool) -> Result<u8, Error> {
    if k_min > k_max || k_max > n {
        return Err(Error::domain(format!("need k_min <= k_max <= n, got {k_min}..{k_max} with n={n}")));
    }
    let threshold = 1.0 - 1.0 / (r as f64 + 1.0);
    println!("r,n,k,hat_delta_over_n,trials,feasible,rate,conjectured_threshold,note");
    for k in k_min..=k_max {
        let (mut feasible, mut vacuous) = (0, 0);
        for t in 0..trials {
            let g = generate_divisible(r, n, k, seed.wrapping_add(t))?;
            if g.edge_count() == 0 {
                vacuous += 1;
                feasible += 1;
                continue;
            }
            let idx = CliqueIndex::enumerate(&g);
            if lp_feasible_with(&g, &idx, force)?.feasible() {
                feasible += 1;
            }
        }
        let note = if vacuous == trials {
            "no-edges"
        } else if vacuous > 0 {
            "some-without-edges"
        } else {
            ""
        };
        println!(
            "{r},{n},{k},{:.4},{trials},{feasible},{:.3},{threshold:.4},{note}",
            (n - k) as f64 / n as f64,
            feasible as f64 / trials.max(1) as f64
        );
    }
    Ok(0)
}

fn bench_rows<S: Scalar>(r: usize, n: usize, g: &PartiteGraph, idx: &CliqueIndex) -> Result<f64, Error> {
    let clock = Instant::now();
    let out: Decomposition<S> = decompose(g, idx, &DecomposeOptions::default())?;
    let total = clock.elapsed().as_secs_f64();
    let backend = S::BACKEND.name();
    for (stage, t) in &out.timings {
        println!("{r},{n},{backend},{stage},{:.6}", t.as_secs_f64());
    }
    println!("{r},{n},{backend},decompose,{total:.6}");
    Ok(total)
}

fn cmd_bench(r: usize, sizes: &[usize], matchings: usize, seed: u64, exact_max: usize) -> Result<u8, Error> {
    println!("r,n,backend,stage,seconds");
    for &n in sizes {
        let g = generate_divisible(r, n, matchings, seed)?;
        let clock = Instant::now();
        let idx = CliqueIndex::enumerate(&g);
        println!("{r},{n},-,enumerate,{:.6}", clock.elapsed().as_secs_f64());
        let float = bench_rows::<f64>(r, n, &g, &idx)?;
        if n <= exact_max {
            let exact = bench_rows::<Rational>(r, n, &g, &idx)?;
            println!("{r},{n},float/exact,ratio,{:.6}", float / exact);
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Gen { r, n, matchings, seed, output } => {
            let g = generate_divisible(r, n, matchings, seed)?;
            write_or_print(output.as_deref(), &g.to_text())?;
            Ok(0)
        }
        Command::Check { graph } => cmd_check(&graph),
        Command::Decompose { graph, anchors, backend, weights, certificate, trace, diagnostics } => {
            let g = load_graph(&graph)?;
            let idx = CliqueIndex::enumerate(&g);
            let opts = DecomposeOptions { anchors: anchors.anchors, transport: TransportOptions { trace, diagnostics } };
            match Backend::from(backend) {
                Backend::Exact => run_decompose::<Rational>(&g, &idx, &opts, weights.as_deref(), certificate.as_deref()),
                Backend::Float => run_decompose::<f64>(&g, &idx, &opts, weights.as_deref(), certificate.as_deref()),
            }
        }
        Command::Verify { graph, weights, backend } => cmd_verify(&graph, &weights, backend.into()),
        Command::Oracle { graph, force, witness } => cmd_oracle(&graph, force, witness.as_deref()),
        Command::Probe { r, n, k_min, k_max, trials, seed, force } => cmd_probe(r, n, k_min, k_max, trials, seed, force),
        Command::Bench { r, sizes, matchings, seed, exact_max } => cmd_bench(r, &sizes, matchings, seed, exact_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(9);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
