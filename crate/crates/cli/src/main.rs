use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qgeo_cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qgeo: cannot set up {n} threads: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let (bytes, code) = match run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("qgeo: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("qgeo: cannot write report: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    ExitCode::from(code as u8)
}
