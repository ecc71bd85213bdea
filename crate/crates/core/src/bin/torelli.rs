use std::process::ExitCode;

use clap::Parser;
use torelli::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let json = outcome.report.to_json();
    println!("{json}");
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    let mut code = outcome.report.exit_code;
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            code = code.max(2);
        }
    }
    ExitCode::from(code as u8)
}
