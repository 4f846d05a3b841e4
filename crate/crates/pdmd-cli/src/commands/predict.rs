use std::io::Write;

use pdmd::parametric::{read_model, ForecastRequest};
use pdmd::regression::RegressorSpec;
use pdmd::store::{
    write_archive, ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, TimeAxis,
};

use super::Context;
use crate::args::PredictArgs;
use crate::output::float;
use crate::{compute, usage, CliError};

pub fn run(args: PredictArgs, ctx: &Context) -> Result<(), CliError> {
    let model = read_model(&args.model).map_err(usage)?;
    let parameter = ParameterPoint::new(args.mu.clone()).map_err(usage)?;
    if parameter.dim() != model.parameter_dim() {
        return Err(usage(anyhow::anyhow!(
            "--mu has {} coordinates, the model was trained on {}-dimensional parameters",
            parameter.dim(),
            model.parameter_dim()
        )));
    }
    let regressor = regressor_override(&args, ctx);
    let labels = args.labels.labels();
    let request =
        ForecastRequest { parameter: parameter.clone(), labels: labels.clone(), regressor };
    let snapshots = model.forecast_full(&request).map_err(compute)?;

    // assemble the forecasts as a single-member archive on a shifted axis
    let axis = TimeAxis::new(
        model.time_axis().time_of(args.labels.from),
        model.time_axis().dt(),
        args.labels.len(),
        args.labels.from,
    )
    .map_err(usage)?;
    let mut values = ndarray::Array2::zeros((model.pod().space_dim(), labels.len()));
    for (k, snapshot) in snapshots.iter().enumerate() {
        values.column_mut(k).assign(snapshot);
    }
    let set = ParametricSnapshotSet::new(
        axis,
        model.field_name(),
        vec![SnapshotMatrix::new(parameter.clone(), values)],
    )
    .map_err(compute)?;
    write_archive(&set, &args.out).map_err(compute)?;

    // reduced coefficients per label, for plotting
    let csv_path = args.out.join("reduced_coefficients.csv");
    let mut csv = Vec::new();
    writeln!(csv, "label,time,coeff_index,re,im").expect("in-memory write");
    for &label in &labels {
        let reduced = model.forecast_reduced(&parameter, label, regressor).map_err(compute)?;
        for (j, v) in reduced.iter().enumerate() {
            writeln!(
                csv,
                "{label},{},{j},{},{}",
                float(model.time_axis().time_of(label)),
                float(v.re),
                float(v.im)
            )
            .expect("in-memory write");
        }
    }
    std::fs::write(&csv_path, csv)
        .map_err(|e| compute(anyhow::anyhow!("cannot write {csv_path:?}: {e}")))?;
    ctx.say(format!(
        "forecast {} labels at mu = {} into {:?}",
        labels.len(),
        parameter,
        args.out
    ));
    Ok(())
}

fn regressor_override(args: &PredictArgs, ctx: &Context) -> Option<RegressorSpec> {
    let kind = args.regressor.or_else(|| ctx.lookup("regressor"));
    let gpr_lengthscale = args.gpr_lengthscale.or_else(|| ctx.lookup("gpr_lengthscale"));
    let gpr_noise = args.gpr_noise.or_else(|| ctx.lookup("gpr_noise"));
    kind.map(|kind| RegressorSpec { kind, gpr_lengthscale, gpr_noise })
}
