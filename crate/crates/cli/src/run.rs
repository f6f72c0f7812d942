use std::path::PathBuf;

use grazing_core::evolve::{
    cancellation_experiment, coercivity_experiment, evolution_experiment, gap_sweep_experiment,
    invariants_experiment, landau_limit_experiment, moment_verification_experiment,
    EvolutionConfig, ExperimentReport, LandauLimitConfig, SweepConfig,
};
use grazing_core::kernel::KernelParams;
use grazing_core::operators::{CancellationQuadrature, OperatorKind};
use grazing_core::par;

use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

/// Runs the experiment named by `cfg.command`.
pub fn execute(cfg: &RunConfig) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    if cfg.threads > 0 && !par::set_thread_budget(cfg.threads) {
        eprintln!(
            "warning: thread budget {} not applied, running on {}",
            cfg.threads,
            par::current_threads()
        );
    }
    let eps = &cfg.epsilon;
    let mut report = match cfg.command {
        Command::Moments => moment_verification_experiment(eps)?,
        Command::Cancellation => cancellation_experiment(
            eps,
            &cfg.grid()?,
            cfg.delta,
            &CancellationQuadrature::default(),
        )?,
        Command::Invariants => invariants_experiment(
            eps,
            &cfg.grid()?,
            &cfg.quadrature,
            cfg.landau,
            cfg.null_space,
        )?,
        Command::Spectrum | Command::Coercivity => {
            let mut s = SweepConfig::new(cfg.grid()?);
            s.quadrature = cfg.quadrature;
            s.gamma = cfg.gamma;
            s.weight_l = cfg.weight_l;
            s.seed = cfg.seed;
            s.landau = cfg.landau;
            if cfg.command == Command::Spectrum {
                gap_sweep_experiment(eps, &s)?
            } else {
                coercivity_experiment(eps, &s)?
            }
        }
        Command::LandauLimit => {
            let mut l = LandauLimitConfig::new(cfg.grid()?, cfg.mode);
            l.quadrature = cfg.quadrature;
            l.time = cfg.time;
            l.amplitude = cfg.limit_amplitude;
            l.slope_range = cfg.slope_range();
            landau_limit_experiment(cfg.mode, eps, &l)?
        }
        Command::Evolve => {
            let p = KernelParams::coulomb(eps[0])?;
            let kind = if cfg.landau {
                OperatorKind::Landau(p)
            } else {
                OperatorKind::Boltzmann(p)
            };
            let mut e = EvolutionConfig::new(cfg.grid()?, kind);
            e.quadrature = cfg.quadrature;
            e.dt = cfg.dt;
            e.t_end = cfg.t_end;
            e.scheme = cfg.scheme;
            e.cadence = cfg.cadence;
            e.max_initial_norm = cfg.max_initial_norm;
            evolution_experiment(&e, cfg.evolve_amplitude)?
        }
    };
    report.record("seed", cfg.seed);
    report.record("command", cfg.command.name());
    Ok(report)
}

/// Writes the report pair and the effective configuration into `cfg.out`.
pub fn emit(cfg: &RunConfig, report: &ExperimentReport) -> Result<Emitted, CliError> {
    let io = |source: std::io::Error| CliError::Io {
        path: cfg.out.display().to_string(),
        source,
    };
    let (csv, summary) = report.emit(&cfg.out).map_err(|e| match e {
        grazing_core::error::LabError::Io(m) => io(std::io::Error::other(m)),
        other => other.into(),
    })?;
    let config = cfg.out.join(format!("{}.config", report.experiment));
    std::fs::write(&config, cfg.to_config_string()).map_err(io)?;
    Ok(Emitted {
        csv,
        summary,
        config,
    })
}
