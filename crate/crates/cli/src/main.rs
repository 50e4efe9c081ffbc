use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use owse_cli::{cmd_crawl, cmd_index, cmd_query, cmd_stats, CliError, CrawlArgs, FixtureServer, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "owse", version, about = "Discover, index and search OWL ontologies on the web")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataDirArg {
    /// Directory holding the URL journal, ontology repository and index.
    #[arg(long, env = "OWSE_DATA_DIR")]
    data_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Crawl from seed pages and record ontology URLs.
    Crawl {
        #[command(flatten)]
        data: DataDirArg,
        #[arg(long = "seed", required = true)]
        seeds: Vec<String>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        max_pages: u32,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        max_ontologies: u32,
        #[arg(long, default_value_t = 3)]
        max_depth: u32,
        #[arg(long, default_value_t = 1000)]
        politeness_ms: u64,
        /// Also follow owl:imports and rdfs:seeAlso links found in ontologies.
        #[arg(long)]
        follow_ontology_links: bool,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=64))]
        workers: u64,
    },
    /// Build the index from the URL journal.
    Index {
        #[command(flatten)]
        data: DataDirArg,
    },
    /// Rank indexed ontologies against keywords.
    Query {
        #[command(flatten)]
        data: DataDirArg,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top_k: u64,
        keywords: String,
    },
    /// Print counts for the journal, repository and index.
    Stats {
        #[command(flatten)]
        data: DataDirArg,
    },
    /// Serve a directory over HTTP for offline crawling.
    Fixture {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        root: PathBuf,
    },
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Crawl {
            data,
            seeds,
            max_pages,
            max_ontologies,
            max_depth,
            politeness_ms,
            follow_ontology_links,
            workers,
        } => {
            let args = CrawlArgs {
                seeds,
                max_pages,
                max_ontologies,
                max_depth,
                politeness_ms,
                follow_ontology_links,
                workers: workers as usize,
            };
            cmd_crawl(&data.data_dir, &args, out)
        }
        Command::Index { data } => cmd_index(&data.data_dir, out),
        Command::Query { data, top_k, keywords } => cmd_query(&data.data_dir, &keywords, top_k as usize, out),
        Command::Stats { data } => cmd_stats(&data.data_dir, out).map(|_| ()),
        Command::Fixture { port, root } => serve_fixture(&root, port, out),
    }
}

fn serve_fixture(root: &Path, port: u16, out: &mut dyn Write) -> Result<(), CliError> {
    let sink = Arc::new(|line: &owse_cli::RequestLine| {
        let mut stdout = io::stdout().lock();
        let _ = writeln!(stdout, "{line}");
        let _ = stdout.flush();
    });
    let server = FixtureServer::start_with_sink(root, port, sink).map_err(|e| {
        CliError::Storage(owse_core::storage::StorageError::Io {
            path: root.to_path_buf(),
            source: e,
        })
    })?;
    writeln!(out, "serving {} at {}", root.display(), server.base_url())?;
    out.flush()?;
    server.wait();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut out = io::stdout();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Empty) => ExitCode::from(CliError::Empty.exit_code() as u8),
        Err(e) => {
            let code = e.exit_code();
            eprintln!("owse: {e}");
            ExitCode::from(if code == 0 { EXIT_FAILURE as u8 } else { code as u8 })
        }
    }
}
