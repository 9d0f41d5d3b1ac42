//! `dismet`: landscape sweeps, simulated runs, decoherence heatmaps,
//! susceptibility fits, bias sweeps and SVG rendering.

mod commands;
mod config;
mod error;
mod output;
mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliResult;
use output::{emit, read_table, Format};
use render::RenderKind;

#[derive(Debug, Parser)]
#[command(name = "dismet", version, about = "Joint temperature and phase metrology toolkit")]
struct Cli {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every sampling step.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic FIM landscape over a (β, x) grid.
    Landscape(GridArgs),
    /// Circuit sampling and empirical FIM per grid cell.
    Simulate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        mu: Option<u64>,
        /// Bootstrap resamples per cell (0 disables).
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// QFIM heatmaps over loss and dephasing.
    Decohere {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long)]
        eta_min: Option<f64>,
        #[arg(long)]
        eta_max: Option<f64>,
        #[arg(long)]
        n_eta: Option<usize>,
        #[arg(long)]
        gamma_min: Option<f64>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        n_gamma: Option<usize>,
        #[arg(long)]
        at_beta: Option<f64>,
        #[arg(long)]
        at_x: Option<f64>,
    },
    /// Noise susceptibility exponents and critical photon numbers.
    Susceptibility {
        #[command(flatten)]
        probe: ProbeArgs,
        /// Comma-separated channels: `ad`, `pd`.
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<String>>,
        /// Comma-separated probe sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        crit_eps: Option<Vec<f64>>,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Visibility-shrinkage bias sweep with correction round trip.
    Bias {
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        hbar_omega0: Option<f64>,
    },
    /// SVG rendering of a landscape or decohere CSV.
    Render {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "heatmap")]
        kind: RenderKind,
        /// Column to colour by.
        #[arg(long)]
        field: Option<String>,
        /// Probe to draw from a multi-probe heatmap table.
        #[arg(long)]
        probe: Option<String>,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    hbar_omega0: Option<f64>,
    #[arg(long)]
    photons: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    beta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta_max: Option<f64>,
    #[arg(long)]
    n_beta: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    plateau_delta: Option<f64>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    /// Comma-separated probe kinds: `noon`, `cat`, `squeezed`.
    #[arg(long, value_delimiter = ',')]
    probes: Option<Vec<String>>,
    #[arg(long)]
    noon_n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha_im: Option<f64>,
    #[arg(long)]
    squeeze_r: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    eigen_floor: Option<f64>,
    #[arg(long)]
    hbar_omega0: Option<f64>,
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.hbar_omega0 = self.hbar_omega0;
        c.photons = self.photons;
        c.beta_min = self.beta_min;
        c.beta_max = self.beta_max;
        c.n_beta = self.n_beta;
        c.x_min = self.x_min;
        c.x_max = self.x_max;
        c.n_x = self.n_x;
        c.plateau_delta = self.plateau_delta;
    }
}

impl ProbeArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.probes = self.probes.clone();
        c.noon_n = self.noon_n;
        c.alpha_re = self.alpha_re;
        c.alpha_im = self.alpha_im;
        c.squeeze_r = self.squeeze_r;
        c.cutoff = self.cutoff;
        c.eigen_floor = self.eigen_floor;
        c.hbar_omega0 = self.hbar_omega0;
    }
}

fn flags(cli: &Cli) -> RunConfig {
    let mut c = RunConfig {
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format.clone(),
        ..RunConfig::default()
    };
    match &cli.command {
        Command::Landscape(g) => g.apply(&mut c),
        Command::Simulate { grid, mu, bootstrap } => {
            grid.apply(&mut c);
            c.mu = *mu;
            c.bootstrap = *bootstrap;
        }
        Command::Decohere {
            probe,
            eta_min,
            eta_max,
            n_eta,
            gamma_min,
            gamma_max,
            n_gamma,
            at_beta,
            at_x,
        } => {
            probe.apply(&mut c);
            c.eta_min = *eta_min;
            c.eta_max = *eta_max;
            c.n_eta = *n_eta;
            c.gamma_min = *gamma_min;
            c.gamma_max = *gamma_max;
            c.n_gamma = *n_gamma;
            c.at_beta = *at_beta;
            c.at_x = *at_x;
        }
        Command::Susceptibility {
            probe,
            channels,
            sizes,
            crit_eps,
            n_max,
        } => {
            probe.apply(&mut c);
            c.channels = channels.clone();
            c.sizes = sizes.clone();
            c.crit_eps = crit_eps.clone();
            c.n_max = *n_max;
        }
        Command::Bias {
            kappa,
            betas,
            hbar_omega0,
        } => {
            c.kappa = *kappa;
            c.betas = betas.clone();
            c.hbar_omega0 = *hbar_omega0;
        }
        Command::Render { .. } => {}
    }
    c
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.merge(&flags(cli));
    let default_format = match cli.command {
        Command::Susceptibility { .. } => Format::Json,
        _ => Format::Csv,
    };
    let format = cfg.format.as_deref().map(Format::parse).transpose()?.unwrap_or(default_format);
    let text = match &cli.command {
        Command::Landscape(_) => commands::landscape_table(&cfg)?.render(format),
        Command::Simulate { .. } => commands::simulate_table(&cfg)?.render(format),
        Command::Decohere { .. } => commands::decohere_table(&cfg)?.render(format),
        Command::Susceptibility { .. } => commands::susceptibility_output(&cfg, format)?,
        Command::Bias { .. } => commands::bias_table(&cfg)?.render(format),
        Command::Render {
            input,
            kind,
            field,
            probe,
        } => {
            let table = read_table(input)?;
            render::render(&table, *kind, field.as_deref(), probe.as_deref())?
        }
    };
    emit(&text, cfg.out.as_deref())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("dismet: {e}");
        std::process::exit(e.exit_code());
    }
}
