//! Runs the battery twice through the binary with the same seed and worker
//! count, prints one line per criterion and fails if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use serde_json::Value;

const SEED: &str = "20251016";
const WORKERS: &str = "1";

fn suite(out: &Path) -> (Option<i32>, f64) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_fraclab"))
        .args(["suite", "--seed", SEED, "--workers", WORKERS, "--out"])
        .arg(out)
        .status()
        .expect("suite binary runs");
    (status.code(), start.elapsed().as_secs_f64())
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fraclab-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn main() -> ExitCode {
    let (a, b) = (scratch("a"), scratch("b"));
    let (code_a, secs_a) = suite(&a);
    let (code_b, secs_b) = suite(&b);
    let bytes_a = std::fs::read(a.join("report.json")).unwrap_or_default();
    let bytes_b = std::fs::read(b.join("report.json")).unwrap_or_default();

    let mut failures = 0;
    let report: Value = serde_json::from_slice(&bytes_a).unwrap_or(Value::Null);
    let criteria = report["result"]["criteria"].as_array().cloned().unwrap_or_default();
    if criteria.len() != 11 {
        println!("acceptance: expected 11 in-run criteria, found {}", criteria.len());
        failures += 1;
    }
    for c in &criteria {
        let pass = c["pass"].as_bool().unwrap_or(false);
        failures += usize::from(!pass);
        let mut line = format!("criterion {:>2} {:<24} {}", c["id"].as_u64().unwrap_or(0), c["name"].as_str().unwrap_or("?"), if pass { "PASS" } else { "FAIL" });
        if let Some(e) = c["error"].as_str() {
            line.push_str(&format!("  error: {e}"));
        }
        for k in c["checks"].as_array().into_iter().flatten().filter(|k| k["pass"] == false) {
            line.push_str(&format!("  [{} = {} vs {}]", k["name"], k["value"], k["target"]));
        }
        for r in c["reports"].as_array().into_iter().flatten().filter(|r| r["pass"] == false) {
            line.push_str(&format!("  [ledger {} stable={}]", r["inequality_id"], r["stable"]));
        }
        println!("{line}");
    }
    let identical = !bytes_a.is_empty() && bytes_a == bytes_b;
    failures += usize::from(!identical);
    println!("criterion 12 {:<24} {}", "deterministic_report", if identical { "PASS" } else { "FAIL" });
    println!("suite runs: {secs_a:.1}s and {secs_b:.1}s, exit codes {code_a:?} and {code_b:?}");

    let exit_ok = code_a == Some(0) && code_b == Some(0);
    if failures == 0 && exit_ok {
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed; outputs kept in {} and {}", a.display(), b.display());
        ExitCode::FAILURE
    }
}
