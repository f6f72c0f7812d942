use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use grazing_core::evolve::{LimitMode, Scheme};

use crate::config::{Command, RunConfig, ENV_OUT, ENV_THREADS};
use crate::error::CliError;

/// Numerical laboratory for the grazing collision limit.
///
/// Values are layered: flags override environment variables, which
/// override the `--config` file, which overrides the built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "grazing", version)]
pub struct Cli {
    /// Config file of `key = value` lines under `[section]` headers [default: none]
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed of every randomized family [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for reports [default: results]
    #[arg(long, global = true, env = ENV_OUT, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long, global = true, env = ENV_THREADS)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Angular moments, lambda_1 and |J|_{L^1} against their closed forms
    Moments {
        /// Comma-separated epsilons [default: 1e-2,1e-4,1e-6]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
    },
    /// Both sides of the cancellation identity on Gaussian profiles
    Cancellation {
        /// Comma-separated epsilons [default: 1e-2,1e-4,1e-6,1e-8]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        /// Excised radius of the truncated kernel, in (0, 1] [default: 0.5]
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Conservation of the five invariants and the null space of L
    Invariants {
        /// Comma-separated epsilons [default: 1e-2,1e-4]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Include the Landau operator [default: true]
        #[arg(long)]
        landau: Option<bool>,
        /// Assemble L and check its null space [default: true]
        #[arg(long)]
        null_space: Option<bool>,
    },
    /// Spectral gap and coercivity over an epsilon sweep
    Spectrum {
        /// Comma-separated epsilons [default: 1e-2,1e-3,1e-4,1e-5]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Coercivity constant nu_0 over an epsilon sweep
    Coercivity {
        /// Comma-separated epsilons [default: 1e-2,1e-3,1e-4,1e-5]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Rate of the Boltzmann-to-Landau limit, operator or semigroup level
    LandauLimit {
        /// Comma-separated epsilons spanning four decades [default: 1e-2,1e-4,1e-6,1e-8]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// operator or semigroup [default: operator]
        #[arg(long)]
        mode: Option<LimitMode>,
        /// Time of the semigroup comparison [default: 1]
        #[arg(long)]
        time: Option<f64>,
        /// Scale of the test functions [default: 1]
        #[arg(long)]
        amplitude: Option<f64>,
        /// Lower end of the accepted slope [default: 0.8 operator, 0.7 semigroup]
        #[arg(long, allow_negative_numbers = true)]
        slope_min: Option<f64>,
        /// Upper end of the accepted slope [default: 1.2 operator, 1.3 semigroup]
        #[arg(long, allow_negative_numbers = true)]
        slope_max: Option<f64>,
    },
    /// Nonlinear space-homogeneous evolution from a small Hermite perturbation
    Evolve {
        /// Single epsilon of the Boltzmann operator [default: 1e-2]
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Evolve with the Landau operator instead [default: false]
        #[arg(long)]
        landau: Option<bool>,
        /// Time step [default: 0.25]
        #[arg(long)]
        dt: Option<f64>,
        /// Final time [default: 5]
        #[arg(long)]
        t_end: Option<f64>,
        /// rk4 or exponential [default: exponential]
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Steps between monitor samples [default: 1]
        #[arg(long)]
        cadence: Option<usize>,
        /// Lattice norm of the initial perturbation [default: 0.05]
        #[arg(long)]
        amplitude: Option<f64>,
        /// Small-data threshold [default: 0.5]
        #[arg(long)]
        max_initial_norm: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half-width L of the velocity box [default: 5]
    #[arg(long)]
    pub box_l: Option<f64>,
    /// Nodes per axis, even, in [8, 64] [default: 12]
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Azimuth nodes of the collision quadrature, even [default: 8]
    #[arg(long)]
    pub azimuths: Option<usize>,
    /// Gauss-Legendre nodes on the top deflection panel [default: 8]
    #[arg(long)]
    pub top_nodes: Option<usize>,
    /// Gauss-Legendre nodes per lower decade of deflection [default: 3]
    #[arg(long)]
    pub decade_nodes: Option<usize>,
    /// Deflection below which the grazing expansion is used [default: 1e-4]
    #[arg(long)]
    pub grazing_cutoff: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Kinetic exponent gamma, also the gap weight [default: -3]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Include the Landau endpoint [default: true]
    #[arg(long)]
    pub landau: Option<bool>,
    /// Weight exponent l of the coercivity norms [default: -1.5]
    #[arg(long, allow_negative_numbers = true)]
    pub weight_l: Option<f64>,
}

fn put<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) {
        put(&mut c.box_l, self.box_l);
        put(&mut c.grid_n, self.grid_n);
    }
}

impl QuadArgs {
    fn apply(&self, c: &mut RunConfig) {
        put(&mut c.quadrature.azimuths, self.azimuths);
        put(&mut c.quadrature.top_nodes, self.top_nodes);
        put(&mut c.quadrature.decade_nodes, self.decade_nodes);
        put(&mut c.quadrature.grazing_cutoff, self.grazing_cutoff);
    }
}

impl SweepArgs {
    fn apply(&self, c: &mut RunConfig) {
        put(&mut c.gamma, self.gamma);
        put(&mut c.landau, self.landau);
        put(&mut c.weight_l, self.weight_l);
    }
}

impl Sub {
    pub fn command(&self) -> Command {
        match self {
            Sub::Moments { .. } => Command::Moments,
            Sub::Cancellation { .. } => Command::Cancellation,
            Sub::Invariants { .. } => Command::Invariants,
            Sub::Spectrum { .. } => Command::Spectrum,
            Sub::Coercivity { .. } => Command::Coercivity,
            Sub::LandauLimit { .. } => Command::LandauLimit,
            Sub::Evolve { .. } => Command::Evolve,
        }
    }

    fn apply(&self, c: &mut RunConfig) {
        let eps = match self {
            Sub::Moments { epsilon }
            | Sub::Cancellation { epsilon, .. }
            | Sub::Invariants { epsilon, .. }
            | Sub::Spectrum { epsilon, .. }
            | Sub::Coercivity { epsilon, .. }
            | Sub::LandauLimit { epsilon, .. }
            | Sub::Evolve { epsilon, .. } => epsilon,
        };
        if let Some(e) = eps {
            c.epsilon = e.clone();
        }
        match self {
            Sub::Moments { .. } => {}
            Sub::Cancellation { grid, delta, .. } => {
                grid.apply(c);
                put(&mut c.delta, *delta);
            }
            Sub::Invariants {
                grid,
                quad,
                landau,
                null_space,
                ..
            } => {
                grid.apply(c);
                quad.apply(c);
                put(&mut c.landau, *landau);
                put(&mut c.null_space, *null_space);
            }
            Sub::Spectrum {
                grid, quad, sweep, ..
            }
            | Sub::Coercivity {
                grid, quad, sweep, ..
            } => {
                grid.apply(c);
                quad.apply(c);
                sweep.apply(c);
            }
            Sub::LandauLimit {
                grid,
                quad,
                mode,
                time,
                amplitude,
                slope_min,
                slope_max,
                ..
            } => {
                grid.apply(c);
                quad.apply(c);
                put(&mut c.mode, *mode);
                put(&mut c.time, *time);
                put(&mut c.limit_amplitude, *amplitude);
                if slope_min.is_some() {
                    c.slope_min = *slope_min;
                }
                if slope_max.is_some() {
                    c.slope_max = *slope_max;
                }
            }
            Sub::Evolve {
                grid,
                quad,
                landau,
                dt,
                t_end,
                scheme,
                cadence,
                amplitude,
                max_initial_norm,
                ..
            } => {
                grid.apply(c);
                quad.apply(c);
                put(&mut c.landau, *landau);
                put(&mut c.dt, *dt);
                put(&mut c.t_end, *t_end);
                put(&mut c.scheme, *scheme);
                put(&mut c.cadence, *cadence);
                put(&mut c.evolve_amplitude, *amplitude);
                put(&mut c.max_initial_norm, *max_initial_norm);
            }
        }
    }
}

impl Cli {
    /// Resolves the layers into a validated [`RunConfig`].
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::defaults(self.command.command());
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        if let Some(out) = &self.out {
            c.out = out.clone();
        }
        put(&mut c.seed, self.seed);
        put(&mut c.threads, self.threads);
        self.command.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_cli<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    cli.resolve()
}
