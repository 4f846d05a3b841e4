use std::io::Write;

use pdmd::dmd::DmdConfig;
use pdmd::parametric::{
    hull_anchor_indices, run_parameter_sensitivity, run_time_sensitivity, ParameterSchedule,
    SensitivityConfig, SensitivityTable, TimeSchedule, Variant,
};
use pdmd::regression::{RegressorKind, RegressorSpec};
use pdmd::store::read_archive;

use super::Context;
use crate::args::{LabelRange, SensitivityArgs, SensitivityModeArg};
use crate::output::float;
use crate::{compute, usage, CliError};

pub fn run(args: SensitivityArgs, ctx: &Context) -> Result<(), CliError> {
    let pool = read_archive(&args.archive).map_err(usage)?;
    let truth = read_archive(&args.truth).map_err(usage)?;

    let train_window: Option<LabelRange> = args
        .train_labels
        .or_else(|| ctx.lookup::<String>("train_labels").and_then(|s| s.parse().ok()));
    let train_window = match train_window {
        Some(range) => (range.from, range.to),
        None => (pool.time_axis().label_origin(), pool.time_axis().last_label()),
    };
    let probe_label = args
        .probe_label
        .or_else(|| ctx.lookup("probe_label"))
        .unwrap_or_else(|| truth.time_axis().last_label());
    let kinds: Vec<RegressorKind> = args
        .regressors
        .or_else(|| ctx.lookup("regressors"))
        .unwrap_or_else(|| vec![RegressorKind::Linear]);
    if kinds.is_empty() {
        return Err(usage(anyhow::anyhow!("--regressors must name at least one kind")));
    }
    let hodmd_depth = args.hodmd_depth.or_else(|| ctx.lookup("hodmd_depth")).unwrap_or(1);
    if hodmd_depth == 0 {
        return Err(usage(anyhow::anyhow!("--hodmd-depth must be at least 1")));
    }
    let config = SensitivityConfig {
        variant: args.variant.or_else(|| ctx.lookup("variant")).unwrap_or(Variant::Partitioned),
        pod_rank: args
            .pod_rank
            .or_else(|| ctx.lookup("pod_rank"))
            .ok_or_else(|| usage(anyhow::anyhow!("--pod-rank is required")))?,
        dmd_config: DmdConfig {
            svd_rank: args.svd_rank.or_else(|| ctx.lookup("svd_rank")).unwrap_or(0),
            hodmd_depth,
            stabilization: args.stabilize.or_else(|| ctx.lookup("stabilize")),
            ..Default::default()
        },
        regressors: kinds.iter().map(|&kind| RegressorSpec::new(kind)).collect(),
        probe_label,
        train_window,
    };

    let table = match args.mode {
        SensitivityModeArg::Parameter => {
            let pool_size = pool.member_count();
            let anchors = if args.anchor_hull.or_else(|| ctx.lookup("anchor_hull")).unwrap_or(true)
            {
                hull_anchor_indices(&pool.parameters())
            } else {
                Vec::new()
            };
            let initial = args
                .initial_size
                .or_else(|| ctx.lookup("initial_size"))
                .unwrap_or_else(|| anchors.len().max(pool_size / 2).max(1));
            let steps = args
                .steps
                .or_else(|| ctx.lookup("steps"))
                .unwrap_or(pool_size.saturating_sub(initial));
            let schedule =
                ParameterSchedule::grow_random(pool_size, initial, steps, ctx.seed, &anchors)
                    .map_err(usage)?;
            run_parameter_sensitivity(&pool, &truth, &schedule, &config).map_err(compute)?
        }
        SensitivityModeArg::Time => {
            let window_len = (train_window.1 - train_window.0 + 1) as usize;
            let initial_window = args
                .initial_window
                .or_else(|| ctx.lookup("initial_window"))
                .unwrap_or_else(|| window_len / 2);
            let steps = args
                .steps
                .or_else(|| ctx.lookup("steps"))
                .unwrap_or(window_len.saturating_sub(initial_window));
            let schedule = TimeSchedule { initial_len: initial_window, steps };
            run_time_sensitivity(&pool, &truth, &schedule, &config).map_err(compute)?
        }
    };

    write_table(&table, ctx.seed, &args.out)?;
    ctx.say(format!(
        "{} sensitivity: {} rows at probe label {} into {:?}",
        table.mode,
        table.rows.len(),
        table.probe_label,
        args.out
    ));
    Ok(())
}

fn write_table(
    table: &SensitivityTable,
    seed: u64,
    out: &std::path::Path,
) -> Result<(), CliError> {
    let mut csv = Vec::new();
    writeln!(csv, "# seed={seed}").expect("in-memory write");
    writeln!(csv, "# mode={} probe_label={}", table.mode, table.probe_label)
        .expect("in-memory write");
    writeln!(csv, "k,set_size,regressor,e_I").expect("in-memory write");
    for row in &table.rows {
        writeln!(csv, "{},{},{},{}", row.step, row.size, row.regressor, float(row.e_i))
            .expect("in-memory write");
    }
    std::fs::write(out, csv).map_err(|e| compute(anyhow::anyhow!("cannot write {out:?}: {e}")))
}
