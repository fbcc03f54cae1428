use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use diskpath::contraction::{check_contraction, diagnostic_rows, flower_ply};
use diskpath::geom::{ObjectKind, DEFAULT_ALPHA};
use diskpath::instance::{emit_results, generate, read_instance, write_instance, Instance, Profile};
use diskpath::oracle::{build_explicit, DEFAULT_CAP};
use diskpath::sssp::{check_locality, check_neighbor_distance, check_tree, Algo, ShortestPathTree, Solver, SsspStats};

#[derive(Parser)]
#[command(name = "diskpath", version, about = "Shortest-path trees in disk and fat-triangle intersection graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Disks,
    Triangles,
}

impl From<Kind> for ObjectKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Disks => ObjectKind::Disks,
            Kind::Triangles => ObjectKind::Triangles,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Uniform,
    Cluster,
    Path,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Uniform => Profile::Uniform,
            ProfileArg::Cluster => Profile::Cluster,
            ProfileArg::Path => Profile::Path,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Fast,
    Brute,
}

#[derive(clap::Args)]
struct SourceArgs {
    /// Single source id.
    #[arg(long, conflicts_with = "sources")]
    source: Option<u32>,
    /// Comma-separated source ids.
    #[arg(long, value_delimiter = ',')]
    sources: Vec<u32>,
}

impl SourceArgs {
    fn ids(&self) -> Result<Vec<u32>> {
        match (self.source, self.sources.is_empty()) {
            (Some(s), _) => Ok(vec![s]),
            (None, false) => Ok(self.sources.clone()),
            (None, true) => bail!("one of --source or --sources is required"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        profile: ProfileArg,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a shortest-path tree and write one `id dist parent` line per object.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, value_enum, default_value = "fast")]
        algo: AlgoArg,
        #[arg(long)]
        out: PathBuf,
        /// Per-grid contraction diagnostics as CSV.
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    /// Run the fast solver and the explicit-graph oracle and compare.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        src: SourceArgs,
    },
    /// Time generated instances and write one CSV row per (n, seed).
    Bench {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        profile: ProfileArg,
        #[arg(long)]
        csv: PathBuf,
    },
}

fn assert_mode() -> bool {
    std::env::var("DISKPATH_ASSERT").is_ok_and(|v| v == "1")
}

fn solver(inst: &Instance, algo: Algo) -> Result<Solver> {
    let mut s = Solver::new(&inst.objects, inst.alpha, algo)?;
    s.record_touched = assert_mode();
    Ok(s)
}

/// Expensive invariant checks enabled by `DISKPATH_ASSERT=1`.
fn run_checks(s: &Solver, t: &ShortestPathTree, stats: &SsspStats) -> Result<()> {
    check_tree(&s.objs, t)?;
    check_locality(s.backend.as_ref(), &t.dist, stats)?;
    check_neighbor_distance(s.backend.as_ref(), &t.dist)?;
    if let Some(h) = s.backend.contraction() {
        let g = if s.objs.len() <= DEFAULT_CAP { Some(build_explicit(&s.objs)?) } else { None };
        check_contraction(&s.objs, h, g.as_ref())?;
    }
    Ok(())
}

fn solve(input: &Path, sources: &[u32], algo: AlgoArg, out: &Path, diag: Option<&Path>) -> Result<()> {
    let inst = read_instance(input).with_context(|| format!("reading {}", input.display()))?;
    let algo = match algo {
        AlgoArg::Fast => Algo::Fast,
        AlgoArg::Brute => Algo::Brute,
    };
    let s = solver(&inst, algo)?;
    let (t, stats) = s.sssp_multi(sources)?;
    if assert_mode() {
        run_checks(&s, &t, &stats)?;
    }
    std::fs::write(out, emit_results(&t.dist, &t.parent)).with_context(|| format!("writing {}", out.display()))?;
    if let Some(path) = diag {
        let Some(h) = s.backend.contraction() else { bail!("--diag needs --algo fast") };
        let mut csv = String::from("n,grid_id,nodes,cliques,max_ply,k\n");
        for (n, g, nodes, cl, ply, k) in diagnostic_rows(&s.objs, h) {
            writeln!(csv, "{n},{g},{nodes},{cl},{ply},{k}")?;
        }
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn verify(input: &Path, sources: &[u32]) -> Result<bool> {
    let inst = read_instance(input).with_context(|| format!("reading {}", input.display()))?;
    let fast = solver(&inst, Algo::Fast)?;
    let (t, stats) = fast.sssp_multi(sources)?;
    if assert_mode() {
        run_checks(&fast, &t, &stats)?;
    }
    let brute = Solver::new(&inst.objects, inst.alpha, Algo::Brute)?;
    let (o, _) = brute.sssp_multi(sources)?;
    let dist_bad = (0..t.dist.len()).filter(|&v| t.dist[v] != o.dist[v]).count();
    let tree_ok = check_tree(&fast.objs, &t);
    let parent_diff = (0..t.dist.len()).filter(|&v| t.parent[v] != o.parent[v]).count();
    println!(
        "n={} dist_mismatches={} tree={} parent_differences={} candidate_sum={}",
        t.dist.len(),
        dist_bad,
        if tree_ok.is_ok() { "ok" } else { "invalid" },
        parent_diff,
        stats.candidate_sum
    );
    if let Err(e) = &tree_ok {
        eprintln!("{e}");
    }
    Ok(dist_bad == 0 && tree_ok.is_ok())
}

fn bench(kind: Kind, sizes: &[usize], seeds: u64, profile: ProfileArg, csv: &Path) -> Result<()> {
    let mut out = String::from("kind,n,seed,build_ms,sssp_ms,edges_H,cliques,max_ply,crossings_k,candidate_sum\n");
    let name = match kind {
        Kind::Disks => "disks",
        Kind::Triangles => "triangles",
    };
    for &n in sizes {
        for seed in 0..seeds {
            let inst = generate(kind.into(), n, seed, profile.into(), DEFAULT_ALPHA);
            let t0 = Instant::now();
            let s = Solver::new(&inst.objects, inst.alpha, Algo::Fast)?;
            let build_ms = t0.elapsed().as_secs_f64() * 1e3;
            let (t, stats) = s.sssp(0)?;
            let sssp_ms = stats.elapsed.as_secs_f64() * 1e3;
            if assert_mode() {
                run_checks(&s, &t, &stats)?;
            }
            let h = s.backend.contraction().expect("fast backend");
            let ply = flower_ply(&s.objs, h).max_ply;
            writeln!(
                out,
                "{name},{n},{seed},{build_ms:.3},{sssp_ms:.3},{},{},{ply},{},{}",
                h.num_edges(),
                h.cliques.len(),
                h.stats.crossings_k,
                stats.candidate_sum
            )?;
            eprintln!("{name} n={n} seed={seed} build={build_ms:.1}ms sssp={sssp_ms:.1}ms");
        }
    }
    std::fs::write(csv, out).with_context(|| format!("writing {}", csv.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { kind, n, seed, profile, alpha, out } => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            write_instance(&out, &generate(kind.into(), n, seed, profile.into(), alpha))?;
        }
        Cmd::Solve { input, src, algo, out, diag } => solve(&input, &src.ids()?, algo, &out, diag.as_deref())?,
        Cmd::Verify { input, src } => return verify(&input, &src.ids()?),
        Cmd::Bench { kind, sizes, seeds, profile, csv } => bench(kind, &sizes, seeds, profile, &csv)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
