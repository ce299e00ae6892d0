//! `lgc` subcommands.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lgc::graph::{build_graph, parse_edge_list};
use lgc::{diffusion, ncp, sweep, Algorithm, DiffusionParams, Execution, Graph};

use crate::api::ClusterRequest;
use crate::handlers;

const MAGIC: &[u8; 4] = b"LGC1";

#[derive(Debug, Parser)]
#[command(name = "lgc", version, about = "Parallel local graph clustering")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a whitespace-separated edge list to the binary format.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run one diffusion and print the result as JSON.
    Cluster(ClusterArgs),
    /// Compute a network community profile and print it as CSV.
    Ncp(NcpArgs),
    /// Time sequential and parallel variants of every kernel.
    Bench(BenchArgs),
    /// Serve the JSON API over HTTP.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Debug, Args)]
pub struct DiffusionArgs {
    #[arg(long, default_value = "pr-nibble-opt")]
    pub algo: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "eps")]
    pub epsilon: Option<f64>,
    /// Nibble iteration count.
    #[arg(long = "T")]
    pub max_iters: Option<u32>,
    /// Heat kernel temperature.
    #[arg(long = "t")]
    pub t: Option<f64>,
    /// Taylor degree for HK-PR.
    #[arg(long = "N")]
    pub taylor_degree: Option<u32>,
    #[arg(long = "walks")]
    pub num_walks: Option<u64>,
    /// Maximum random walk length.
    #[arg(long = "K")]
    pub max_walk_len: Option<u32>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// HK-PR threshold scale e^t instead of e^-t.
    #[arg(long)]
    pub exp_t_threshold: bool,
}

impl DiffusionArgs {
    fn request(&self, seed: u64) -> ClusterRequest {
        ClusterRequest {
            algorithm: self.algo.clone(),
            seed,
            alpha: self.alpha,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            t: self.t,
            taylor_degree: self.taylor_degree,
            num_walks: self.num_walks,
            max_walk_len: self.max_walk_len,
            rng_seed: self.rng_seed,
            hkpr_threshold_uses_exp_t: self.exp_t_threshold.then_some(true),
            run_sweep: false,
            sequential: false,
            sweep_each_iteration: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    /// Round the result with a sweep cut.
    #[arg(long)]
    pub sweep: bool,
    /// Sweep after every round as well (reported in `iteration_sweeps`).
    #[arg(long)]
    pub sweep_each_iteration: bool,
    /// Use the single-threaded reference kernels.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct NcpArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of random seed vertices.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Runs per variant; the minimum time is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    /// Bench only this algorithm instead of all of them.
    #[arg(long)]
    pub only: Option<String>,
}

/// Reads either format: binary files start with the magic, anything else is
/// parsed as an edge list and symmetrized.
pub fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .with_context(|| format!("reading {}", path.display()))?;
    let g = if bytes.starts_with(MAGIC) {
        Graph::read_binary(bytes.as_slice())?
    } else {
        let pairs = parse_edge_list(BufReader::new(bytes.as_slice()))?;
        build_graph(&pairs, true, None)?
    };
    log::info!("loaded {}: n={} m={}", path.display(), g.n(), g.m());
    Ok(g)
}

fn pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Convert { input, output } => convert(&input, &output),
        Command::Cluster(args) => {
            // Rendered inside the pool, written outside it: `out` need not be Send.
            let buf = pool(threads)?.install(|| -> anyhow::Result<Vec<u8>> {
                let mut buf = Vec::new();
                cluster(&args, &mut buf)?;
                Ok(buf)
            })?;
            Ok(out.write_all(&buf)?)
        }
        Command::Ncp(args) => {
            let buf = pool(threads)?.install(|| -> anyhow::Result<Vec<u8>> {
                let mut buf = Vec::new();
                run_ncp(&args, &mut buf)?;
                Ok(buf)
            })?;
            Ok(out.write_all(&buf)?)
        }
        Command::Bench(args) => bench(&args, threads, out),
        Command::Serve { graph, addr } => {
            let g = Arc::new(load_graph(&graph)?);
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?;
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
            }
            rt.block_on(crate::server::serve(g, addr))?;
            Ok(())
        }
    }
}

fn convert(input: &Path, output: &Path) -> anyhow::Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let pairs = parse_edge_list(BufReader::new(file))?;
    let g = build_graph(&pairs, true, None)?;
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let mut w = BufWriter::new(file);
    g.write_binary(&mut w)?;
    w.flush()?;
    log::info!("wrote {}: n={} m={}", output.display(), g.n(), g.m());
    Ok(())
}

fn cluster(args: &ClusterArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let g = load_graph(&args.graph)?;
    let req = ClusterRequest {
        run_sweep: args.sweep,
        sequential: args.sequential,
        sweep_each_iteration: args.sweep_each_iteration,
        ..args.diffusion.request(args.seed)
    };
    let resp = handlers::handle_cluster(&g, &req)?;
    if args.pretty {
        serde_json::to_writer_pretty(&mut *out, &resp)?;
    } else {
        serde_json::to_writer(&mut *out, &resp)?;
    }
    writeln!(out)?;
    Ok(())
}

fn run_ncp(args: &NcpArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let g = load_graph(&args.graph)?;
    let seeds = ncp::random_seeds(&g, args.seeds, args.rng_seed);
    let grid = ncp::default_grid(&DiffusionParams::default());
    let exec = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let profile = ncp::run_ncp(&g, &seeds, &grid, exec)?;
    for (seed, reason) in &profile.failures {
        log::warn!("seed {seed}: {reason}");
    }
    match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            profile.write_csv(BufWriter::new(file))?;
        }
        None => profile.write_csv(&mut *out)?,
    }
    Ok(())
}

struct Timing {
    seconds: f64,
    pushes: u64,
    volume: u64,
}

fn time_best(repeat: usize, mut f: impl FnMut() -> anyhow::Result<(u64, u64)>) -> anyhow::Result<Timing> {
    let mut best = f64::INFINITY;
    let mut counters = (0, 0);
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        counters = f()?;
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(Timing {
        seconds: best,
        pushes: counters.0,
        volume: counters.1,
    })
}

fn bench(args: &BenchArgs, threads: Option<usize>, out: &mut dyn Write) -> anyhow::Result<()> {
    let g = load_graph(&args.graph)?;
    let one = pool(Some(1))?;
    let full = pool(threads)?;
    let algorithms: Vec<Algorithm> = match &args.only {
        Some(name) => vec![name.parse()?],
        None => Algorithm::ALL.to_vec(),
    };
    writeln!(
        out,
        "{:<14} {:>10} {:>10} {:>10} {:>8} {:>12} {:>12} {:>8}",
        "kernel", "seq_s", "par1_s", "parP_s", "speedup", "pushes", "volume", "threads"
    )?;
    let row = |out: &mut dyn Write, name: &str, seq: &Timing, p1: &Timing, pp: &Timing| -> io::Result<()> {
        writeln!(
            out,
            "{:<14} {:>10.4} {:>10.4} {:>10.4} {:>7.2}x {:>12} {:>12} {:>8}",
            name,
            seq.seconds,
            p1.seconds,
            pp.seconds,
            p1.seconds / pp.seconds,
            pp.pushes,
            pp.volume,
            full.current_num_threads()
        )
    };

    let mut last_p = None;
    for alg in algorithms {
        let params = DiffusionParams {
            algorithm: alg,
            ..args.diffusion.request(args.seed).to_params()?
        };
        params.validate(&g)?;
        let diffuse = |exec| {
            let r = diffusion::run(&g, &params, exec)?;
            Ok((r.push_count, r.pushed_volume))
        };
        let seq = time_best(args.repeat, || diffuse(Execution::Sequential))?;
        let p1 = one.install(|| time_best(args.repeat, || diffuse(Execution::Parallel)))?;
        let pp = full.install(|| time_best(args.repeat, || diffuse(Execution::Parallel)))?;
        row(out, alg.name(), &seq, &p1, &pp)?;
        last_p = Some(full.install(|| diffusion::run(&g, &params, Execution::Parallel))?.p);
    }

    if let Some(p) = last_p.filter(|p| !p.is_empty()) {
        let sweeper = |exec| {
            let prof = sweep::sweep(&g, &p, exec)?;
            Ok((prof.len() as u64, prof.touched_elements))
        };
        let seq = time_best(args.repeat, || sweeper(Execution::Sequential))?;
        let p1 = one.install(|| time_best(args.repeat, || sweeper(Execution::Parallel)))?;
        let pp = full.install(|| time_best(args.repeat, || sweeper(Execution::Parallel)))?;
        row(out, "sweep", &seq, &p1, &pp)?;
    }
    Ok(())
}
