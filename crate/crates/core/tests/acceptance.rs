use std::process::ExitCode;

use convexity_atlas::acceptance::{run_suite, Options};

fn main() -> ExitCode {
    let results = run_suite(&[], &Options::default()).expect("suite runs");
    for r in &results {
        println!("{}", r.line());
        if !r.passed() {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
