use std::path::PathBuf;
use std::process::ExitCode;

use anharmonic_cli::{load, run, CliError};
use clap::Parser;

/// Spectra, projection norms, pseudospectra and pseudomodes of
/// non-self-adjoint anharmonic oscillators.
#[derive(Debug, Parser)]
#[command(name = "anharmonic", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; `ANHARMONIC_THREADS` applies only when this is absent.
    #[arg(long)]
    threads: Option<usize>,
    /// Also render SVG plots.
    #[arg(long)]
    svg: bool,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ANHARMONIC_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Config(format!("ANHARMONIC_THREADS={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = (|| {
        if let Some(n) = threads(args.threads)? {
            if n == 0 {
                return Err(CliError::Config("thread count must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
        }
        let mut cfg = load(&args.config)?;
        cfg.output.svg |= args.svg;
        run(&cfg, args.out.as_deref())
    })();
    match result {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
