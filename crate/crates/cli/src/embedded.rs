//! A game service started inside the CLI process when no `--server` is given.

use anyhow::{Context, Result};
use maps_server::ServerConfig;

/// Starts the service on a loopback ephemeral port in a background thread and
/// returns its base URL. It lives until the process exits.
pub fn start(config: ServerConfig) -> Result<String> {
    let rt = tokio::runtime::Runtime::new().context("starting the embedded service runtime")?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).context("binding the embedded service")?;
    let addr = listener.local_addr()?;
    let router = maps_server::app(config).context("opening the embedded service store")?;
    std::thread::spawn(move || {
        if let Err(e) = rt.block_on(maps_server::serve(listener, router)) {
            eprintln!("embedded service stopped: {e}");
        }
    });
    Ok(format!("http://{addr}"))
}
