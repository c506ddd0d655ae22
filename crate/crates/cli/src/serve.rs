use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use slabroker_service::{api, Broker, BrokerConfig, DATA_DIR_ENV};

#[derive(clap::Args)]
pub struct ServeArgs {
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Data directory; falls back to $SLABROKER_DATA_DIR, then ./slabroker-data.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Broker defaults as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let data_dir = args
        .data_dir
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("slabroker-data"));
    let config = match &args.config {
        Some(path) => BrokerConfig::load(path)?,
        None => BrokerConfig::default(),
    };
    let broker = Broker::open(&data_dir, config).with_context(|| format!("opening data directory {}", data_dir.display()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.addr).await.with_context(|| format!("binding {}", args.addr))?;
        eprintln!("listening on {} (data in {})", listener.local_addr()?, data_dir.display());
        api::serve(Arc::new(broker), listener).await?;
        Ok(())
    })
}
