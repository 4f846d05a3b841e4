use pdmd::dmd::{AmplitudeStrategy, DmdConfig};
use pdmd::parametric::{write_model, ParametricDmdModel, Variant};
use pdmd::regression::{RegressorKind, RegressorSpec};
use pdmd::store::read_archive;

use super::Context;
use crate::args::{LabelRange, TrainArgs};
use crate::output::{float, spectrum_summary};
use crate::{compute, usage, CliError};

pub fn run(args: TrainArgs, ctx: &Context) -> Result<(), CliError> {
    let variant = args
        .variant
        .or_else(|| ctx.lookup("variant"))
        .ok_or_else(|| usage(anyhow::anyhow!("--variant is required (monolithic|partitioned)")))?;
    let pod_rank = args
        .pod_rank
        .or_else(|| ctx.lookup("pod_rank"))
        .ok_or_else(|| usage(anyhow::anyhow!("--pod-rank is required")))?;
    let hodmd_depth = args.hodmd_depth.or_else(|| ctx.lookup("hodmd_depth")).unwrap_or(1);
    if hodmd_depth == 0 {
        return Err(usage(anyhow::anyhow!("--hodmd-depth must be at least 1")));
    }
    let stabilize = args.stabilize.or_else(|| ctx.lookup("stabilize"));
    if let Some(eps) = stabilize {
        if !(eps >= 0.0) {
            return Err(usage(anyhow::anyhow!("--stabilize must be non-negative, got {eps}")));
        }
    }
    let config = DmdConfig {
        svd_rank: args.svd_rank.or_else(|| ctx.lookup("svd_rank")).unwrap_or(0),
        hodmd_depth,
        stabilization: stabilize,
        amplitude_strategy: if args.amplitudes_over_all {
            AmplitudeStrategy::LeastSquaresAll
        } else {
            AmplitudeStrategy::FirstSnapshot
        },
    };
    let online_defaults = RegressorSpec {
        kind: args
            .regressor
            .or_else(|| ctx.lookup("regressor"))
            .unwrap_or(RegressorKind::Linear),
        gpr_lengthscale: args.gpr_lengthscale.or_else(|| ctx.lookup("gpr_lengthscale")),
        gpr_noise: args.gpr_noise.or_else(|| ctx.lookup("gpr_noise")),
    };

    let mut set = read_archive(&args.archive).map_err(usage)?;
    let window: Option<LabelRange> = args.train_labels.or_else(|| {
        ctx.lookup::<String>("train_labels").and_then(|s| s.parse().ok())
    });
    if let Some(range) = window {
        set = set.restrict_labels(range.from, range.to).map_err(usage)?;
    }

    let model = match variant {
        Variant::Monolithic => ParametricDmdModel::fit_monolithic(&set, pod_rank, &config),
        Variant::Partitioned => ParametricDmdModel::fit_partitioned(&set, pod_rank, &config),
    }
    .map_err(compute)?
    .with_online_defaults(online_defaults);

    write_model(&model, &args.out).map_err(compute)?;

    let sv = model.pod().singular_values();
    let retained_energy: f64 = sv[..pod_rank].iter().map(|s| s * s).sum::<f64>()
        / sv.iter().map(|s| s * s).sum::<f64>().max(f64::MIN_POSITIVE);
    ctx.say(format!(
        "pod: n={} of {} singular values, sigma_1={}, retained energy {}",
        pod_rank,
        sv.len(),
        float(sv[0]),
        float(retained_energy),
    ));
    for (i, operator) in model.operators().iter().enumerate() {
        let s = spectrum_summary(operator);
        ctx.say(format!(
            "operator {i}: {} eigenvalues, {} on the unit circle at 1e-6, {} off, {} discarded by stabilization, residual {}",
            s.total,
            s.on_circle,
            s.total - s.on_circle,
            s.discarded,
            float(operator.one_step_residual_rel()),
        ));
    }
    Ok(())
}
