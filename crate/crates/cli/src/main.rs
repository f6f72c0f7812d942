use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use grazing_cli::{emit, execute, Cli, CliError, EXIT_ERROR, EXIT_GATE, EXIT_PASS, EXIT_USAGE};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    println!("status=error kind={}", e.kind());
    let code = if matches!(e, CliError::Usage(_)) {
        EXIT_USAGE
    } else {
        EXIT_ERROR
    };
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            println!("status=error kind=usage");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let report = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let files = match emit(&cfg, &report) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    match report.first_failure() {
        None => {
            println!(
                "status=pass experiment={} csv={} summary={}",
                report.experiment,
                files.csv.display(),
                files.summary.display()
            );
            ExitCode::from(EXIT_PASS as u8)
        }
        Some(g) => {
            for g in report.gates.iter().filter(|g| !g.passed) {
                eprintln!(
                    "gate failed: {} = {:e}, required {}",
                    g.metric, g.value, g.bound
                );
            }
            println!(
                "status=fail experiment={} metric={} value={:e} summary={}",
                report.experiment,
                g.metric,
                g.value,
                files.summary.display()
            );
            ExitCode::from(EXIT_GATE as u8)
        }
    }
}
