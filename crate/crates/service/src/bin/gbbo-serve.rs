use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::Parser;
use gbbo_service::{Service, ServiceConfig, SystemClock};

/// Runs the master and suggestion servers behind the REST API.
#[derive(Parser, Debug)]
#[command(name = "gbbo-serve", version)]
struct Args {
    /// Task database directory.
    #[arg(long, env = "GBBO_DB_DIR", default_value = "gbbo-db")]
    db: std::path::PathBuf,
    /// Listen address.
    #[arg(long, env = "GBBO_MASTER_ADDR", default_value = "127.0.0.1:8080")]
    addr: String,
    /// Number of in-process suggestion servers.
    #[arg(long, default_value_t = 1)]
    servers: usize,
    /// Seconds between heartbeats.
    #[arg(long, env = "GBBO_HEARTBEAT_S", default_value_t = 2.0)]
    heartbeat: f64,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let args = Args::parse();
    anyhow::ensure!(args.servers > 0, "--servers must be at least 1");
    anyhow::ensure!(args.heartbeat > 0.0, "heartbeat interval must be positive");
    let svc = Arc::new(
        Service::open(&args.db, args.servers, Arc::new(SystemClock), ServiceConfig::default())
            .with_context(|| format!("opening task database {}", args.db.display()))?,
    );

    let ticker = svc.clone();
    let interval = Duration::from_secs_f64(args.heartbeat);
    std::thread::spawn(move || loop {
        std::thread::sleep(interval);
        if let Err(e) = ticker.tick() {
            tracing::error!(error = %e, "heartbeat round failed");
        }
    });

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .with_context(|| format!("binding {}", args.addr))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        gbbo_service::http::serve(svc, listener, shutdown).await?;
        anyhow::Ok(())
    })
}
