use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use slate_ope::report::{parse_config, run};

/// Off-policy evaluation experiments for slate policies.
///
/// Settings come from `--config` (flat `key = value` lines) and are
/// overridden by flags. Results go to `--out-dir`.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// prior-grid, cardinality-grid, slot-sweep, regression or oracle-check
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Samples per dataset (accepts 1e5).
    #[arg(long)]
    n: Option<String>,
    /// Reward models per cell.
    #[arg(long)]
    t: Option<String>,
    /// Datasets per reward model.
    #[arg(long)]
    s: Option<String>,
    /// Slot count; alone, selects evenly divided cardinalities.
    #[arg(long)]
    k: Option<String>,
    /// Dash-joined cardinalities, e.g. 3-50-800.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p_bar: Option<String>,
    #[arg(long)]
    p_prime: Option<String>,
    /// elementwise or pairwise
    #[arg(long)]
    reward_kind: Option<String>,
    #[arg(long)]
    relative_sd: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Reduce in index order (always the case; accepted for reproducible scripts).
    #[arg(long)]
    deterministic_reduce: bool,
    /// Comma-separated P̄ values for prior-grid.
    #[arg(long)]
    p_bar_grid: Option<String>,
    /// Comma-separated P' values for prior-grid.
    #[arg(long)]
    p_prime_grid: Option<String>,
    /// Comma-separated cardinalities for cardinality-grid.
    #[arg(long)]
    cardinality_choices: Option<String>,
    /// Comma-separated slot counts for slot-sweep and regression.
    #[arg(long)]
    k_values: Option<String>,
    /// even or random
    #[arg(long)]
    cardinality_rule: Option<String>,
    /// Reward models averaged by oracle-check.
    #[arg(long)]
    oracle_models: Option<String>,
}

impl Cli {
    fn overrides(self) -> Vec<(String, String)> {
        let flags = [
            ("experiment", self.experiment),
            ("out_dir", self.out_dir),
            ("seed", self.seed),
            ("n", self.n),
            ("t", self.t),
            ("s", self.s),
            ("k", self.k),
            ("d", self.d),
            ("p_bar", self.p_bar),
            ("p_prime", self.p_prime),
            ("reward_kind", self.reward_kind),
            ("relative_sd", self.relative_sd),
            ("threads", self.threads),
            (
                "deterministic_reduce",
                self.deterministic_reduce.then(|| "true".to_string()),
            ),
            ("p_bar_grid", self.p_bar_grid),
            ("p_prime_grid", self.p_prime_grid),
            ("cardinality_choices", self.cardinality_choices),
            ("k_values", self.k_values),
            ("cardinality_rule", self.cardinality_rule),
            ("oracle_models", self.oracle_models),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| Some((k.to_string(), v?)))
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = cli.config.clone();
    let cfg = match parse_config(path.as_deref(), &cli.overrides()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cfg, &mut |line| eprintln!("{line}")) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for line in outcome.report_lines() {
                println!("{line}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: oracle checks failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
