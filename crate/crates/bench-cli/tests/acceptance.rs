//! Acceptance suite: one `criterion N: PASS|FAIL` line per criterion.
//!
//! Quick profile by default; `DCOLOR_ACCEPTANCE=full` runs the full seed counts.

use std::process::ExitCode;
use std::time::Instant;

use dcolor_bench::acceptance::{Acceptance, Profile, PROFILE_ENV};
use dcolor_bench::thresholds::{default_path, ThresholdsFile};

fn main() -> ExitCode {
    let thresholds = match ThresholdsFile::load_calibrated(&default_path()) {
        Ok(t) => t,
        Err(e) => {
            println!("acceptance: cannot load thresholds: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let profile = Profile::from_env();
    println!("acceptance profile: {profile} (set {PROFILE_ENV}=full for the full seed counts)");
    let acc = Acceptance::new(profile, thresholds);
    let mut all = true;
    for c in 1..=7 {
        let t = Instant::now();
        match acc.run(c) {
            Ok(r) => {
                println!("{r} ({:.1}s)", t.elapsed().as_secs_f64());
                if !r.passed {
                    for d in &r.details {
                        println!("    {d}");
                    }
                }
                all &= r.passed;
            }
            Err(e) => {
                println!("criterion {c}: FAIL [error] {e:#}");
                all = false;
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
