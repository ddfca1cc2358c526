//! Serves the fixture corpus over HTTP.
//!
//! cargo run --example serve [port]
//! curl localhost:8080/bouts

use std::net::SocketAddr;
use std::path::Path;

use fencingvis::abstraction::AbstractionConfig;
use fencingvis::service::{serve, Service};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt::init();
    let port: u16 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8080);
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let service = Service::from_dir(&data, &AbstractionConfig::default())?;
    serve(SocketAddr::from(([127, 0, 0, 1], port)), service).await?;
    Ok(())
}
