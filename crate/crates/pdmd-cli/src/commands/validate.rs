use std::io::Write;

use pdmd::parametric::read_model;
use pdmd::regression::RegressorSpec;
use pdmd::store::{read_archive, ParametricSnapshotSet, SnapshotMatrix};
use pdmd::C64;

use super::Context;
use crate::args::ValidateArgs;
use crate::output::float;
use crate::{compute, usage, CliError};

pub fn run(args: ValidateArgs, ctx: &Context) -> Result<(), CliError> {
    let model = read_model(&args.model).map_err(usage)?;
    let mut truth = read_archive(&args.truth).map_err(usage)?;
    let labels = args.labels.labels();
    // label coverage is a validation problem, reported before any fitting
    for &label in &labels {
        if truth.time_axis().column_of(label).is_none() {
            return Err(usage(anyhow::anyhow!(
                "label {label} outside the truth window {}..={}",
                truth.time_axis().label_origin(),
                truth.time_axis().last_label()
            )));
        }
    }
    if args.forecast_scale != 1.0 {
        // diagnostics hook: scaling the forecasts by f is equivalent to
        // scaling the truth by 1/f
        let inv = C64::new(1.0 / args.forecast_scale, 0.0);
        let members = truth
            .members()
            .iter()
            .map(|m| SnapshotMatrix::new(m.parameter().clone(), m.values().mapv(|v| v * inv)))
            .collect();
        truth = ParametricSnapshotSet::new(*truth.time_axis(), truth.field_name(), members)
            .map_err(compute)?;
    }

    let regressor = regressor_override(&args, ctx);
    let report = model.compute_error_report(&truth, &labels, regressor).map_err(compute)?;

    let mut csv = Vec::new();
    writeln!(csv, "label,time,e_I,n_excluded_zero_norm").expect("in-memory write");
    for (i, &label) in report.labels().iter().enumerate() {
        writeln!(
            csv,
            "{label},{},{},{}",
            float(report.times()[i]),
            float(report.e_i()[i]),
            report.excluded()[i]
        )
        .expect("in-memory write");
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| compute(anyhow::anyhow!("cannot write {:?}: {e}", args.out)))?;

    // per-parameter breakdown next to the main table
    let breakdown_path = {
        let mut name = args
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "errors".into());
        name.push_str(".by-parameter.csv");
        args.out.with_file_name(name)
    };
    let mut csv = Vec::new();
    for (i, member) in truth.members().iter().enumerate() {
        writeln!(csv, "# parameter {i} = {}", member.parameter()).expect("in-memory write");
    }
    writeln!(csv, "label,time,parameter_index,rel_error").expect("in-memory write");
    for (col, &label) in report.labels().iter().enumerate() {
        for row in 0..report.parameter_count() {
            let value = report.per_parameter()[[row, col]];
            let formatted = if value.is_nan() { "excluded".to_string() } else { float(value) };
            writeln!(csv, "{label},{},{row},{formatted}", float(report.times()[col]))
                .expect("in-memory write");
        }
    }
    std::fs::write(&breakdown_path, csv)
        .map_err(|e| compute(anyhow::anyhow!("cannot write {breakdown_path:?}: {e}")))?;

    let worst = report.e_i().iter().cloned().fold(0.0, f64::max);
    ctx.say(format!(
        "validated {} labels against {} parameters: max e_I = {}, tables in {:?}",
        labels.len(),
        report.parameter_count(),
        float(worst),
        args.out
    ));
    Ok(())
}

fn regressor_override(args: &ValidateArgs, ctx: &Context) -> Option<RegressorSpec> {
    let kind = args.regressor.or_else(|| ctx.lookup("regressor"));
    let gpr_lengthscale = args.gpr_lengthscale.or_else(|| ctx.lookup("gpr_lengthscale"));
    let gpr_noise = args.gpr_noise.or_else(|| ctx.lookup("gpr_noise"));
    kind.map(|kind| RegressorSpec { kind, gpr_lengthscale, gpr_noise })
}
