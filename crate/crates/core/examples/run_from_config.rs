//! Driving a run from config text and reading back its CSV, as the command
//! line tool does.
//!
//! Run with `cargo run --release --example run_from_config`.

use slate_ope::report::{parse_config_str, run, MANIFEST_FILE, RESULTS_FILE};

fn main() -> slate_ope::Result<()> {
    let out = std::env::temp_dir().join("slate-ope-example");
    let text = format!(
        "# Small prior grid\nexperiment = prior-grid\nseed = 42\nd = 2-10\nn = 2e3\nt = 5\ns = 50\n\
         p_bar_grid = 0.25\np_prime_grid = 0.1,0.25,0.5,0.7\nout_dir = {}\n",
        out.display()
    );
    let cfg = parse_config_str(&text)?;
    let outcome = run(&cfg, &mut |line| eprintln!("{line}"))?;
    for line in outcome.report_lines() {
        println!("{line}");
    }
    let csv = std::fs::read_to_string(out.join(RESULTS_FILE)).map_err(|e| slate_ope::Error::Io {
        path: out.join(RESULTS_FILE),
        source: e,
    })?;
    println!(
        "{} data rows; first: {}",
        csv.lines().count() - 1,
        csv.lines().nth(1).unwrap_or("")
    );
    println!("replay with: slate-ope --config {}", out.join(MANIFEST_FILE).display());
    Ok(())
}
