use std::io::Write;

use robust_psd::spectrum::{
    modified_periodograms_with, wosa_mean, wp_estimate_with, EstimateMethod, PeriodogramOptions, Signal, WpConfig,
};
use robust_psd::taper::{normalized_taper, plan_segments};
use serde_json::json;

use crate::args::{EstimateArgs, Sided};
use crate::error::CliResult;
use crate::input::read_samples;
use crate::output::{Preamble, TableWriter};

pub fn run(args: &EstimateArgs, out: impl Write) -> CliResult<()> {
    let samples = read_samples(&args.input, args.format)?;
    let n_samples = samples.len();
    let signal = Signal::new(samples, args.fs)?;
    let plan = plan_segments(signal.len(), args.nseg, args.overlap)?;
    let taper = normalized_taper(args.window, args.nseg)?;
    let opts = PeriodogramOptions {
        edof_mode: args.edof_mode,
        detrend: args.detrend,
    };
    let ps = modified_periodograms_with(&signal, &plan, &taper, opts)?;
    let est = if args.mean {
        wosa_mean(&ps)
    } else {
        wp_estimate_with(
            &ps,
            &WpConfig {
                q: args.quantile,
                bias_method: args.bias_method,
                use_edof: !args.no_edof,
                rule: args.quantile_rule,
            },
        )?
    };
    let est = match args.sided {
        Sided::One => est.to_one_sided(),
        Sided::Two => est,
    };

    let config = json!({
        "input": args.input.display().to_string(),
        "format": args.format,
        "fs": args.fs,
        "nseg": args.nseg,
        "overlap": args.overlap,
        "n_overlap": plan.n_overlap,
        "window": args.window,
        "method": if args.mean { "wosa_mean" } else { "wp" },
        "quantile": if args.mean { None } else { Some(args.quantile) },
        "bias_method": if args.mean { None } else { Some(args.bias_method) },
        "quantile_rule": args.quantile_rule,
        "use_edof": !args.no_edof,
        "edof_mode": args.edof_mode,
        "detrend": args.detrend,
        "sided": args.sided,
    });
    let mut pre = Preamble::new("estimate", config);
    pre.note("n_samples", n_samples);
    pre.note("k", plan.k);
    pre.note("edof", ps.edof());
    pre.note("effective_k", est.effective_k);
    pre.note("bias_factor", est.bias_factor);
    pre.note(
        "method",
        match est.method {
            EstimateMethod::WosaMean => "wosa_mean",
            EstimateMethod::Wp => "wp",
        },
    );

    let mut table = TableWriter::start(out, args.out_format, pre, &["frequency", "psd"])?;
    for (f, p) in est.freqs.iter().zip(&est.psd) {
        table.row(vec![(*f).into(), (*p).into()])?;
    }
    table.finish()
}
