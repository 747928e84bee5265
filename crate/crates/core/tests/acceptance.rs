//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::process::ExitCode;

use qnmres::acceptance::{bundled_snapshot, run_all};

fn main() -> ExitCode {
    let snapshot = match bundled_snapshot() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot load spectrum snapshot: {e}");
            return ExitCode::FAILURE;
        }
    };
    let reports = run_all(Some(&snapshot));
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
