use std::io::Write;

use robust_psd::mc::{
    run_bias_experiment_with_progress, run_variance_experiment_with_progress, ExperimentConfig, ExperimentMethod,
    ExperimentRow, Progress,
};
use robust_psd::theory::BiasMethod;
use serde_json::json;

use crate::args::{SimArgs, SimulateCommand};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Preamble, TableWriter};

const COLUMNS: [&str; 9] = [
    "k",
    "edof_half",
    "q",
    "method",
    "bias_db",
    "var_sim",
    "var_theory",
    "var_limit",
    "trials",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Experiment {
    Bias,
    Variance,
}

fn resolve(args: &SimArgs, experiment: Experiment) -> CliResult<ExperimentConfig> {
    let k_list = match &args.k_list {
        Some(list) => list.clone(),
        None => {
            if args.k_max < args.k_min {
                return Err(CliError::flag(
                    "--k-max",
                    format!("{} is below --k-min {}", args.k_max, args.k_min),
                ));
            }
            (args.k_min..=args.k_max).collect()
        }
    };
    let bias_methods = match (experiment, &args.bias_methods) {
        (Experiment::Bias, Some(m)) if m.is_empty() => {
            return Err(CliError::flag("--bias-methods", "needs at least one method"))
        }
        (Experiment::Bias, Some(m)) => m.clone(),
        (Experiment::Bias, None) => vec![ExperimentMethod::Wp(BiasMethod::Harmonic)],
        (Experiment::Variance, None) => vec![ExperimentMethod::Wp(BiasMethod::Digamma)],
        (Experiment::Variance, Some(_)) => {
            return Err(CliError::flag(
                "--bias-methods",
                "applies to `simulate bias` only; the variance experiment uses the digamma correction",
            ))
        }
    };
    if bias_methods.contains(&ExperimentMethod::Wp(BiasMethod::Allen)) && args.q_list.iter().any(|&q| q != 0.5) {
        return Err(CliError::Domain(
            "--bias-methods: allen is median-only and needs --q-list 0.5".into(),
        ));
    }
    let n_overlap = (args.overlap * args.nseg as f64).round() as usize;
    if n_overlap >= args.nseg {
        return Err(CliError::flag(
            "--overlap",
            format!("leaves no hop for {}-sample segments", args.nseg),
        ));
    }
    let cfg = ExperimentConfig {
        n_seg: args.nseg,
        overlap_fraction: args.overlap,
        taper_kind: args.window,
        k_list,
        q_list: args.q_list.clone(),
        trials: args.trials,
        seed: args.seed,
        bias_methods,
        noise_sigma: args.sigma,
        fs: args.fs,
        edof_mode: args.edof_mode,
        rule: args.quantile_rule,
    };
    cfg.validate().map_err(|e| match e {
        robust_psd::Error::InvalidInput(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    Ok(cfg)
}

fn row_cells(r: &ExperimentRow) -> Vec<Cell> {
    vec![
        r.k.into(),
        r.edof_half.into(),
        r.q.into(),
        r.method.as_str().into(),
        r.bias_db.into(),
        r.var_sim.into(),
        r.var_theory.into(),
        r.var_limit.into(),
        r.trials.into(),
    ]
}

/// Runs one K at a time so CSV rows stream out as cells finish. Trial
/// seeds depend only on (seed, K, q index, trial), so the split does not
/// change any value.
pub fn run(cmd: &SimulateCommand, out: impl Write) -> CliResult<()> {
    let (args, experiment, name) = match cmd {
        SimulateCommand::Bias(a) => (a, Experiment::Bias, "simulate bias"),
        SimulateCommand::Variance(a) => (a, Experiment::Variance, "simulate variance"),
    };
    let cfg = resolve(args, experiment)?;

    let mut config = serde_json::to_value(&cfg).expect("configuration serializes");
    config["experiment"] = json!(if experiment == Experiment::Bias {
        "bias"
    } else {
        "variance"
    });
    config["bins"] = json!("interior (DC and Nyquist excluded), averaged");
    config["k_eff"] = json!("edof/2");
    let mut table = TableWriter::start(out, args.out_format, Preamble::new(name, config), &COLUMNS)?;

    let total = cfg.k_list.len() * cfg.q_list.len();
    let mut done = 0;
    for &k in &cfg.k_list {
        let one = ExperimentConfig {
            k_list: vec![k],
            ..cfg.clone()
        };
        let report = |p: Progress| {
            if !args.quiet {
                eprintln!("[{}/{}] K={} q={}", done + p.done, total, p.k, p.q);
            }
        };
        let rows = match experiment {
            Experiment::Bias => run_bias_experiment_with_progress(&one, report)?,
            Experiment::Variance => run_variance_experiment_with_progress(&one, report)?,
        };
        done += cfg.q_list.len();
        for r in &rows {
            table.row(row_cells(r))?;
        }
    }
    table.finish()
}
