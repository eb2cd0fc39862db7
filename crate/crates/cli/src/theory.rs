use std::io::Write;

use robust_psd::taper::{edof, normalized_taper};
use robust_psd::theory::{
    bias_allen, bias_digamma, bias_harmonic, bias_limit, optimal_quantile, resolve_case, variance_limit,
    variance_theory, variance_trigamma, QuantileCase, QuantileSpec,
};
use serde_json::json;

use crate::args::{EdofArgs, GridArgs, OptimumArgs, TheoryCommand, VarianceArgs};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Preamble, TableWriter};

pub fn run(cmd: &TheoryCommand, out: impl Write) -> CliResult<()> {
    match cmd {
        TheoryCommand::Bias(a) => bias(a, out),
        TheoryCommand::Variance(a) => variance(a, out),
        TheoryCommand::Edof(a) => edof_table(a, out),
        TheoryCommand::Optimum(a) => optimum(a, out),
    }
}

fn case_name(spec: &QuantileSpec) -> &'static str {
    match spec.case {
        QuantileCase::ExactMatch => "exact_match",
        QuantileCase::Between => "between",
    }
}

fn grid_config(g: &GridArgs) -> serde_json::Value {
    json!({ "k_list": g.k_list, "q_list": g.q_list })
}

/// Cells where a method does not apply are left empty.
fn bias(g: &GridArgs, out: impl Write) -> CliResult<()> {
    let columns = [
        "k", "q", "case", "alpha", "beta", "allen", "harmonic", "digamma", "limit",
    ];
    let mut pre = Preamble::new("theory bias", grid_config(g));
    pre.note("allen", "median only, odd rounded K");
    let mut table = TableWriter::start(out, g.out_format, pre, &columns)?;
    for &k in &g.k_list {
        for &q in &g.q_list {
            let spec = resolve_case(k, q)?;
            let kr = spec.k_rounded();
            let allen = (q == 0.5 && kr % 2 == 1).then(|| bias_allen(kr).ok()).flatten();
            table.row(vec![
                k.into(),
                q.into(),
                case_name(&spec).into(),
                spec.alpha.into(),
                spec.beta.into(),
                allen.into(),
                bias_harmonic(&spec).ok().filter(|b| *b > 0.0).into(),
                bias_digamma(k, q).ok().into(),
                bias_limit(q).ok().into(),
            ])?;
        }
    }
    table.finish()
}

fn variance(a: &VarianceArgs, out: impl Write) -> CliResult<()> {
    let g = &a.grid;
    let columns = [
        "k",
        "q",
        "case",
        "alpha",
        "beta",
        "var_resolved",
        "var_trigamma",
        "var_limit",
    ];
    let mut config = grid_config(g);
    config["psd"] = json!(a.psd);
    let mut table = TableWriter::start(out, g.out_format, Preamble::new("theory variance", config), &columns)?;
    for &k in &g.k_list {
        for &q in &g.q_list {
            let spec = resolve_case(k, q)?;
            table.row(vec![
                k.into(),
                q.into(),
                case_name(&spec).into(),
                spec.alpha.into(),
                spec.beta.into(),
                variance_theory(&spec, a.psd).ok().into(),
                variance_trigamma(k, q, a.psd).ok().into(),
                variance_limit(k, q, a.psd).ok().into(),
            ])?;
        }
    }
    table.finish()
}

fn edof_table(a: &EdofArgs, out: impl Write) -> CliResult<()> {
    let n_overlap = (a.overlap * a.nseg as f64).round() as usize;
    if n_overlap >= a.nseg {
        return Err(CliError::flag(
            "--overlap",
            format!("leaves no hop for {}-sample segments", a.nseg),
        ));
    }
    let taper = normalized_taper(a.window, a.nseg)?;
    let config = json!({
        "window": a.window,
        "nseg": a.nseg,
        "overlap": a.overlap,
        "n_overlap": n_overlap,
        "k_list": a.k_list,
        "mode": a.mode,
    });
    let columns = ["k", "edof", "edof_half", "edof_ratio"];
    let mut table = TableWriter::start(out, a.out_format, Preamble::new("theory edof", config), &columns)?;
    for &k in &a.k_list {
        let nu = edof(&taper, k, n_overlap, a.mode)?;
        table.row(vec![
            k.into(),
            nu.into(),
            (nu / 2.0).into(),
            (nu / (2.0 * k as f64)).into(),
        ])?;
    }
    table.finish()
}

/// Grid i/n for i = 1..n−1 with n = round(1/step).
fn quantile_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (1..n).map(|i| i as f64 / n as f64).collect()
}

fn optimum(a: &OptimumArgs, out: impl Write) -> CliResult<()> {
    let grid = quantile_grid(a.q_step);
    if grid.is_empty() {
        return Err(CliError::flag("--q-step", "leaves no quantile inside (0, 1)"));
    }
    let config = json!({ "k_list": a.k_list, "q_step": a.q_step, "q_count": grid.len(), "q_min": grid[0], "q_max": grid[grid.len() - 1] });
    let columns = ["k", "q_opt", "var_opt", "var_median", "median_over_opt_db"];
    let mut table = TableWriter::start(out, a.out_format, Preamble::new("theory optimum", config), &columns)?;
    for &k in &a.k_list {
        let q_opt = optimal_quantile(k, &grid)?;
        let v_opt = variance_limit(k, q_opt, 1.0)?;
        let v_med = variance_limit(k, 0.5, 1.0)?;
        table.row(vec![
            k.into(),
            q_opt.into(),
            v_opt.into(),
            v_med.into(),
            Cell::Real(10.0 * (v_med / v_opt).log10()),
        ])?;
    }
    table.finish()
}
