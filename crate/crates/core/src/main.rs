use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use gpdlab::io::{cli::Cli, run};

fn threads() -> Result<()> {
    let Ok(v) = std::env::var("GPDLAB_THREADS") else { return Ok(()) };
    let n: usize = v.parse().with_context(|| format!("GPDLAB_THREADS={v:?} is not a thread count"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main_inner() -> Result<i32> {
    let cli = Cli::parse();
    threads()?;
    let config = cli.into_config().map_err(anyhow::Error::msg)?;
    let outcome = run(&config)?;
    match &config.output {
        Some(path) => std::fs::write(path, &outcome.rendered).with_context(|| format!("writing {path}"))?,
        None => print!("{}", outcome.rendered),
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
