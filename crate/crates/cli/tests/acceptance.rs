//! Desk-profile acceptance run. One line per criterion; nonzero exit if any fail.
//! Both passes share a fresh cache directory, so the second pass loads what the
//! first one stored.

use std::process::ExitCode;

use newform_core::cache::Cache;
use newform_core::report::Profile;
use newform_core::selftest::{run_twice, CriterionResult};

fn line(r: &CriterionResult) {
    println!("criterion {:>2} {:<36} {}", r.id, r.name, if r.passed { "PASS" } else { "FAIL" });
    if !r.passed {
        for d in r.details.iter().filter(|d| !d.starts_with("ok")) {
            println!("    {d}");
        }
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let cache = Cache::new(dir.path()).expect("cache dir");
    let payload = match run_twice(Profile::Desk, 0, Some(&cache), &[1, 2, 3, 4, 5, 6, 7, 8, 9], line) {
        Ok(p) => p,
        Err(e) => {
            println!("acceptance run aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(r) = payload.criteria.last() {
        line(r);
    }
    let failed = payload.criteria.iter().filter(|c| !c.passed).count();
    println!("acceptance: {} passed, {failed} failed", payload.criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
