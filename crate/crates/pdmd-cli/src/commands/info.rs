use pdmd::parametric::read_model;
use pdmd::store::read_archive;

use super::Context;
use crate::args::InfoArgs;
use crate::output::spectrum_summary;
use crate::{usage, CliError};

pub fn run(args: InfoArgs, ctx: &Context) -> Result<(), CliError> {
    if args.path.join("manifest.json").is_file() {
        let set = read_archive(&args.path).map_err(usage)?;
        let all_real = set
            .members()
            .iter()
            .all(|m| m.values().iter().all(|v| v.im == 0.0));
        ctx.say(format!(
            "p={} m={} N={} dt={} {}",
            set.member_count(),
            set.space_dim(),
            set.time_axis().count(),
            set.time_axis().dt(),
            if all_real { "real" } else { "complex" }
        ));
        ctx.say(format!(
            "field '{}', labels {}..={}, t in [{}, {}], parameter dimension {}",
            set.field_name(),
            set.time_axis().label_origin(),
            set.time_axis().last_label(),
            set.time_axis().t0(),
            set.time_axis().time_of(set.time_axis().last_label()),
            set.parameter_dim()
        ));
        for (i, member) in set.members().iter().enumerate() {
            ctx.say(format!("  member {i}: mu = {}", member.parameter()));
        }
        return Ok(());
    }
    if args.path.join("model.json").is_file() {
        let model = read_model(&args.path).map_err(usage)?;
        ctx.say(format!(
            "{} model: {} parameters, pod rank {}, m={}, labels {}..={}",
            model.variant(),
            model.parameter_count(),
            model.pod().rank(),
            model.pod().space_dim(),
            model.time_axis().label_origin(),
            model.time_axis().last_label(),
        ));
        for (i, operator) in model.operators().iter().enumerate() {
            let s = spectrum_summary(operator);
            ctx.say(format!(
                "  operator {i}: d={}, {} eigenvalues ({} on the unit circle at 1e-6, {} discarded)",
                operator.depth(),
                s.total,
                s.on_circle,
                s.discarded
            ));
        }
        return Ok(());
    }
    Err(usage(anyhow::anyhow!(
        "{:?} is neither a snapshot archive (manifest.json) nor a model (model.json)",
        args.path
    )))
}
