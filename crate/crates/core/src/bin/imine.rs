use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use interface_miner::diff::Pruning;
use interface_miner::evaluator::{evaluate, gen_olap_log, EvalConfig, SchemaMap, Split};
use interface_miner::grammar::GrammarAnnotations;
use interface_miner::graph::BuildOptions;
use interface_miner::log::{by_client, parse_entries, read_log};
use interface_miner::mapper::MapOptions;
use interface_miner::pipeline::Miner;
use interface_miner::serve::{start, ServeOptions};
use interface_miner::spec_io::{export_json, load};
use interface_miner::widget::WidgetLibrary;

#[derive(Parser)]
#[command(name = "imine", version, about = "Mine SQL query logs into interactive interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mine an interface document from a query log.
    Mine(MineArgs),
    /// Score recall and expressiveness on train/hold-out chunks.
    Eval(EvalArgs),
    /// Write a synthetic OLAP exploration log.
    GenOlap(GenArgs),
    /// Serve an interface document over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct MiningOpts {
    /// Pair each query with the next N-1 queries.
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Keep every distinct ancestor difference instead of only LCAs.
    #[arg(long)]
    no_lca_prune: bool,
    /// Required share of logged queries the interface must express.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    widget_config: Option<PathBuf>,
    #[arg(long)]
    grammar: Option<PathBuf>,
}

impl MiningOpts {
    fn miner(&self) -> Result<Miner> {
        MapOptions { gamma: self.gamma }.validate().map_err(anyhow::Error::msg)?;
        let library = match &self.widget_config {
            Some(p) => WidgetLibrary::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => WidgetLibrary::default(),
        };
        let grammar = match &self.grammar {
            Some(p) => GrammarAnnotations::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => GrammarAnnotations::default(),
        };
        let pruning = if self.no_lca_prune { Pruning::None } else { Pruning::Lca };
        Ok(Miner { build: BuildOptions { window: self.window, pruning }, library, grammar })
    }
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Mine one interface over all clients of a tab-separated log.
    #[arg(long)]
    merge_clients: bool,
    #[command(flatten)]
    opts: MiningOpts,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    log: PathBuf,
    /// TRAIN:HOLDOUT queries per chunk.
    #[arg(long, default_value = "100:100")]
    split: Split,
    #[arg(long)]
    report: PathBuf,
    /// Also write the recall curve as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Column-to-table JSON map; derived from the log if omitted.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[command(flatten)]
    opts: MiningOpts,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Shell command that receives SQL on stdin and prints rows.
    #[arg(long)]
    exec_adapter: Option<String>,
    /// Serve files from this directory instead of the built-in page.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    #[arg(long)]
    widget_config: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `out.json` + client `c1` → `out-c1.json`.
fn client_path(out: &Path, client: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("spec");
    let safe: String = client.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{safe}.{ext}"),
        None => format!("{stem}-{safe}"),
    };
    out.with_file_name(name)
}

fn mine(args: MineArgs) -> Result<()> {
    let miner = args.opts.miner()?;
    let entries = read_log(&read(&args.log)?);
    let groups = by_client(&entries);
    if args.merge_clients || groups.len() <= 1 {
        let queries = parse_entries(&entries, &miner.grammar);
        let model = miner.mine(&queries)?;
        info!("{} queries, {} widgets", queries.len(), model.widgets.len());
        return write(&args.out, &export_json(&model));
    }
    for (client, entries) in groups {
        let queries = parse_entries(&entries, &miner.grammar);
        if queries.is_empty() {
            log::warn!("client {client}: no parseable queries");
            continue;
        }
        let model = miner.mine(&queries)?;
        let path = client_path(&args.out, &client);
        info!("client {client}: {} queries, {} widgets -> {}", queries.len(), model.widgets.len(), path.display());
        write(&path, &export_json(&model))?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let miner = args.opts.miner()?;
    let queries = parse_entries(&read_log(&read(&args.log)?), &miner.grammar);
    let schema = match &args.schema {
        Some(p) => Some(SchemaMap::load(p).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let cfg = EvalConfig { miner, schema, ..EvalConfig::default() };
    let report = evaluate(&queries, args.split, &cfg)?;
    write(&args.report, &report.to_text())?;
    if let Some(p) = &args.curve {
        write(p, &report.curve_csv())?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn gen_olap(args: GenArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let mut text = gen_olap_log(args.n, args.seed).join(";\n");
    text.push_str(";\n");
    write(&args.out, &text)
}

fn serve(args: ServeArgs) -> Result<()> {
    let lib = match &args.widget_config {
        Some(p) => WidgetLibrary::load(p)?,
        None => WidgetLibrary::default(),
    };
    let ann = GrammarAnnotations::default();
    let model = load(&args.spec, &lib, &ann)?;
    let handle = start(&args.addr, model, ann, ServeOptions { exec_adapter: args.exec_adapter, static_dir: args.static_dir })?;
    eprintln!("serving {} on {}", args.spec.display(), handle.url());
    handle.join();
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Cmd::Mine(a) => mine(a),
        Cmd::Eval(a) => eval(a),
        Cmd::GenOlap(a) => gen_olap(a),
        Cmd::Serve(a) => serve(a),
    }
}
