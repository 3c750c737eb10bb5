//! Runs the full acceptance suite and prints one pass/fail line per criterion.
//! Built without the libtest harness so the table is never captured.

use std::process::ExitCode;

use cod_cli::verify::{format_table, run_all, Level};

fn main() -> ExitCode {
    let results = run_all(Level::Full);
    print!("{}", format_table(&results));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
