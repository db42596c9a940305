use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use clap::{Parser, Subcommand};
use sketchchain_cli::commands::{self, BuildOverrides};
use sketchchain_cli::config::{active_params, open_retriever, CONFIG_ENV};
use sketchchain_cli::server;

#[derive(Parser)]
#[command(name = "sketchchain", version, about = "Sketch-based shape retrieval over contour chains")]
#[command(after_help = format!("Set {CONFIG_ENV} to a TOML parameter file to override the defaults."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract chains from contour records (JSONL) into a chain corpus (JSONL).
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Index operations.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Run one sketch request file against an index and print the JSON response.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// JSON file in the `/query` request format.
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        candidates: Option<usize>,
    },
    /// Precision at several ranks for a labeled query set.
    Eval {
        #[arg(long)]
        index: PathBuf,
        /// JSONL of `{query, category, strokes, frame}`.
        #[arg(long)]
        queries: PathBuf,
        /// JSON object mapping image id to category.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "5,10,25,50")]
        at: Vec<usize>,
        /// Write the full report as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the active parameters as a TOML ledger.
    Params,
    /// Serve the HTTP query API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Subcommand)]
enum IndexAction {
    /// Build an index file from a chain corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        branching: Option<usize>,
        #[arg(long)]
        max_leaf: Option<usize>,
        #[arg(long)]
        th_ms: Option<f64>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Extract { input, out } => {
            let s = commands::extract(&input, &out, &active_params()?)?;
            log::info!("{} images, {} chains, {} lines skipped", s.images, s.chains, s.skipped.len());
        }
        Command::Index {
            action: IndexAction::Build {
                corpus,
                out,
                seed,
                branching,
                max_leaf,
                th_ms,
            },
        } => {
            let o = BuildOverrides {
                branching,
                max_leaf,
                th_ms,
            };
            let stats = commands::build_index(&corpus, &out, seed, active_params()?, o)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
        }
        Command::Query {
            index,
            sketch,
            k,
            candidates,
        } => {
            let retriever = open_retriever(&index)?;
            let mut req = commands::read_request(&sketch)?;
            if let Some(k) = k {
                req.k = k;
            }
            if candidates.is_some() {
                req.candidates = candidates;
            }
            let resp = commands::answer(&retriever, &req)?;
            println!("{}", serde_json::to_string_pretty(&resp)?);
        }
        Command::Eval {
            index,
            queries,
            labels,
            at,
            json,
        } => {
            let retriever = open_retriever(&index)?;
            let queries = commands::read_eval_queries(&queries)?;
            let labels = commands::read_labels(&labels)?;
            let report = commands::evaluate(&retriever, &queries, &labels, &at)?;
            print!("{}", report.to_table());
            if let Some(path) = json {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::Params => print!("{}", active_params()?.to_toml_string()),
        Command::Serve { index, port, host } => {
            let retriever = Arc::new(open_retriever(&index)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(retriever, SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}
