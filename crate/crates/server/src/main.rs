use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use seqcompare_core::dataset::Manifest;
use seqcompare_server::session::Catalog;
use seqcompare_server::{router, AppState};

#[derive(Debug, Parser)]
#[command(name = "seqcompare", version, about = "Compare groups of event sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the JSON API over the datasets in a manifest directory.
    Serve {
        #[arg(long, env = "SEQCOMPARE_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, env = "SEQCOMPARE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "SEQCOMPARE_SNAPSHOT_DIR")]
        snapshot_dir: Option<PathBuf>,
    },
    /// Print sequence count and average length for one manifest.
    Stats {
        manifest: PathBuf,
        /// Directory that relative CSV paths resolve against; defaults to
        /// the manifest's own directory.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

async fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Serve {
            data_dir,
            port,
            snapshot_dir,
        } => {
            let mut state = AppState::new(Catalog::from_dir(&data_dir)?);
            if let Some(dir) = snapshot_dir {
                state = state.with_snapshots(&dir)?;
            }
            let addr = SocketAddr::from(([0, 0, 0, 0], port));
            let listener = tokio::net::TcpListener::bind(addr).await?;
            tracing::info!(%addr, datasets = state.catalog().names().count(), "listening");
            axum::serve(listener, router(Arc::new(state)))
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
        }
        Command::Stats { manifest, base } => {
            let m = Manifest::from_file(&manifest)?;
            let base = base.unwrap_or_else(|| manifest.parent().map(PathBuf::from).unwrap_or_default());
            let stats = m.load(&base)?.stats();
            println!("{}", serde_json::to_string(&stats)?);
        }
    }
    Ok(())
}
