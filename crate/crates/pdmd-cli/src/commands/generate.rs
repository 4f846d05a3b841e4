use pdmd::benchmarks::{heat, synthetic, toy};
use pdmd::store::{write_archive, ParametricSnapshotSet};

use super::Context;
use crate::args::{GenerateArgs, GenerateProblem, HeatArgs, SyntheticArgs, ToyArgs};
use crate::{compute, usage, CliError};

pub fn run(args: GenerateArgs, ctx: &Context) -> Result<(), CliError> {
    match args.problem {
        GenerateProblem::Toy(toy_args) => run_toy(toy_args, ctx),
        GenerateProblem::Heat(heat_args) => run_heat(heat_args, ctx),
        GenerateProblem::Synthetic(syn_args) => run_synthetic(syn_args, ctx),
    }
}

fn summarize(ctx: &Context, set: &ParametricSnapshotSet) {
    ctx.say(format!(
        "p={} m={} N={} dt={} t0={}",
        set.member_count(),
        set.space_dim(),
        set.time_axis().count(),
        set.time_axis().dt(),
        set.time_axis().t0(),
    ));
}

fn run_toy(args: ToyArgs, ctx: &Context) -> Result<(), CliError> {
    let defaults = toy::ToySpec::default();
    let spec = toy::ToySpec {
        space_samples: args
            .space_samples
            .or_else(|| ctx.lookup("space_samples"))
            .unwrap_or(defaults.space_samples),
        time_samples: args
            .time_samples
            .or_else(|| ctx.lookup("time_samples"))
            .unwrap_or(defaults.time_samples),
        parameters: args.mus.or_else(|| ctx.lookup("mus")).unwrap_or(defaults.parameters),
    };
    spec.validate().map_err(usage)?;
    let set = toy::generate(&spec).map_err(compute)?;
    write_archive(&set, &args.out).map_err(compute)?;
    summarize(ctx, &set);
    Ok(())
}

fn run_heat(args: HeatArgs, ctx: &Context) -> Result<(), CliError> {
    let defaults = heat::HeatSpec::default();
    let spec = heat::HeatSpec {
        grid: args.grid.or_else(|| ctx.lookup("grid")).unwrap_or(defaults.grid),
        substeps: args.substeps.or_else(|| ctx.lookup("substeps")).unwrap_or(defaults.substeps),
        source_amplitude: args
            .source_amplitude
            .or_else(|| ctx.lookup("source_amplitude"))
            .unwrap_or(defaults.source_amplitude),
    };
    spec.validate().map_err(usage)?;
    let train_count = args.params.or_else(|| ctx.lookup("params")).unwrap_or(20);
    let holdout_count = args.heldout.or_else(|| ctx.lookup("heldout")).unwrap_or(0);
    if train_count == 0 {
        return Err(usage(anyhow::anyhow!("--params must be at least 1")));
    }
    if holdout_count > 0 && args.heldout_out.is_none() {
        return Err(usage(anyhow::anyhow!("--heldout requires --heldout-out")));
    }

    let (train, holdout) = heat::sample_parameters(train_count, holdout_count, ctx.seed);
    ctx.say(format!(
        "solving {} training + {} held-out instances (seed {})",
        train.len(),
        holdout.len(),
        ctx.seed
    ));
    let set = heat::generate_set(&spec, &train).map_err(compute)?;
    write_archive(&set, &args.out).map_err(compute)?;
    summarize(ctx, &set);
    if let Some(heldout_out) = &args.heldout_out {
        if !holdout.is_empty() {
            let holdout_set = heat::generate_set(&spec, &holdout).map_err(compute)?;
            write_archive(&holdout_set, heldout_out).map_err(compute)?;
            summarize(ctx, &holdout_set);
        }
    }
    Ok(())
}

fn run_synthetic(args: SyntheticArgs, ctx: &Context) -> Result<(), CliError> {
    let defaults = synthetic::SyntheticUnstableSpec::default();
    let spec = synthetic::SyntheticUnstableSpec {
        state_dim: args.state_dim.or_else(|| ctx.lookup("state_dim")).unwrap_or(defaults.state_dim),
        stable_frequencies: args
            .freqs
            .or_else(|| ctx.lookup("freqs"))
            .unwrap_or(defaults.stable_frequencies),
        unstable_modulus: args.rho.or_else(|| ctx.lookup("rho")).unwrap_or(defaults.unstable_modulus),
        unstable_fraction: args
            .fraction
            .or_else(|| ctx.lookup("fraction"))
            .unwrap_or(defaults.unstable_fraction),
        unstable_frequency: args
            .unstable_freq
            .or_else(|| ctx.lookup("unstable_freq"))
            .unwrap_or(defaults.unstable_frequency),
        time_samples: args
            .time_samples
            .or_else(|| ctx.lookup("time_samples"))
            .unwrap_or(defaults.time_samples),
        seed: ctx.seed,
    };
    spec.validate().map_err(usage)?;
    let generator = synthetic::SyntheticUnstable::generate(&spec).map_err(compute)?;
    let set = generator.training_set().map_err(compute)?;
    write_archive(&set, &args.out).map_err(compute)?;
    summarize(ctx, &set);
    Ok(())
}
