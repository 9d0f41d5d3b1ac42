//! Subcommands that compute tables. Each validates its whole configuration
//! before any numerics run.

use rayon::prelude::*;
use serde_json::{json, Value};

use dismet::analysis::{
    decoherence_heatmap, heatmap_cell, noon_critical_photon_number, susceptibility_adaptive, fit_scaling_exponent,
    Channel, ProbeKind, CURVATURE_LIMIT,
};
use dismet::analytic::{landscape, plateau_mask};
use dismet::circuit::sample_grid;
use dismet::estimate::{bootstrap_fim, bias_sweep, correct_shrinkage, empirical_fim, empirical_probability, ShrinkageModel};
use dismet::fock::{ChannelSettings, Encoding, NoiseParams, ProbeFamily};
use dismet::Error;

use crate::config::RunConfig;
use crate::error::{config, numerical, CliError, CliResult};
use crate::output::{json_text, Cell, Format, Table};

pub const LANDSCAPE_COLUMNS: [&str; 10] =
    ["beta", "x", "p0", "f_bb", "f_xx", "f_bx", "f_eff", "f_x_fraction", "trace", "plateau_flag"];

pub fn landscape_table(cfg: &RunConfig) -> CliResult<Table> {
    let grid = cfg.grid()?;
    let template = cfg.template()?;
    let delta = cfg.plateau_delta()?;

    let samples = landscape(&grid, &template).map_err(numerical)?;
    let mask = plateau_mask(&grid, &template, delta).map_err(numerical)?;
    let mut t = Table::new("landscape", &LANDSCAPE_COLUMNS);
    for s in samples {
        let f = s.fim;
        let g = s.figures;
        t.push(vec![
            Cell::Float(s.point.beta),
            Cell::Float(s.point.x),
            Cell::Float(s.probs.p0),
            Cell::opt(f.map(|f| f.f_bb)),
            Cell::opt(f.map(|f| f.f_xx)),
            Cell::opt(f.map(|f| f.f_bx)),
            Cell::opt(g.map(|g| g.f_eff)),
            Cell::opt(g.map(|g| g.f_x_fraction)),
            Cell::opt(g.map(|g| g.trace)),
            Cell::Flag(mask.get(s.point.beta_index, s.point.x_index)),
        ]);
    }
    Ok(t)
}

pub fn simulate_table(cfg: &RunConfig) -> CliResult<Table> {
    let grid = cfg.grid()?;
    let template = cfg.template()?;
    if template.n_photons != 1 {
        return Err(CliError::Config("the sampled circuit is the single-photon interferometer; photons must be 1".into()));
    }
    let hw = template.hbar_omega0;
    let mu = cfg.mu()?;
    let seed = cfg.seed()?;
    let n_boot = cfg.bootstrap()?;

    let records = sample_grid(&grid, hw, mu, seed).map_err(numerical)?;
    let rows = records
        .par_iter()
        .map(|rec| {
            let mut flag = String::new();
            let fim = match empirical_fim(rec, &template) {
                Ok(f) => Some(f),
                Err(Error::DegenerateCounts { .. }) => {
                    flag = "degenerate_counts".into();
                    None
                }
                Err(e) => return Err(numerical(e)),
            };
            let std = match (fim, n_boot) {
                (Some(_), n) if n > 0 => match bootstrap_fim(rec, &template, n, seed) {
                    Ok(s) => Some(s.std),
                    Err(Error::BootstrapDropped { .. }) => {
                        flag = "bootstrap_dropped".into();
                        None
                    }
                    Err(e) => return Err(numerical(e)),
                },
                _ => None,
            };
            Ok(vec![
                Cell::Int(i64::from(rec.key.beta_index)),
                Cell::Int(i64::from(rec.key.x_index)),
                Cell::Float(rec.beta),
                Cell::Float(rec.x),
                Cell::Int(rec.n0 as i64),
                Cell::Int(rec.n1 as i64),
                Cell::Int(rec.mu as i64),
                Cell::Float(empirical_probability(rec)),
                Cell::opt(fim.map(|f| f.f_bb)),
                Cell::opt(fim.map(|f| f.f_xx)),
                Cell::opt(fim.map(|f| f.f_bx)),
                Cell::opt(std.map(|f| f.f_bb)),
                Cell::opt(std.map(|f| f.f_xx)),
                Cell::opt(std.map(|f| f.f_bx)),
                Cell::Text(flag),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(
        "simulate",
        &[
            "beta_index", "x_index", "beta", "x", "n0", "n1", "mu", "p0_hat", "f_bb", "f_xx", "f_bx", "std_bb",
            "std_xx", "std_bx", "flag",
        ],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn decohere_table(cfg: &RunConfig) -> CliResult<Table> {
    let mut specs = Vec::new();
    for kind in cfg.probe_kinds()? {
        let spec = cfg.heatmap_spec(cfg.probe(kind)?)?;
        spec.probe.build(spec.cutoff).map_err(config)?;
        specs.push(spec);
    }

    let mut t = Table::new(
        "decohere",
        &["probe", "eta", "gamma", "f_bb", "f_xx", "f_bx", "f_eff", "incompatibility", "reference", "error"],
    );
    for spec in specs {
        let label = spec.probe.label();
        let mut cells = decoherence_heatmap(&spec).map_err(numerical)?;
        let has_reference = cells.iter().any(|c| c.eta == 1.0 && c.gamma == 0.0);
        if !has_reference {
            let family = ProbeFamily::from_probe(
                &spec.probe,
                spec.cutoff,
                Encoding::Thermal { hbar_omega0: spec.at.hbar_omega0 },
                ChannelSettings::identity(),
            )
            .map_err(numerical)?;
            let values = heatmap_cell(&family, &spec.at, &NoiseParams::noiseless(), spec.eigen_floor_rel)
                .map_err(|e| e.to_string());
            cells.push(dismet::analysis::HeatmapCell { eta: 1.0, gamma: 0.0, values });
        }
        for c in cells {
            let v = c.values.as_ref().ok();
            t.push(vec![
                Cell::Text(label.into()),
                Cell::Float(c.eta),
                Cell::Float(c.gamma),
                Cell::opt(v.map(|v| v.f_bb)),
                Cell::opt(v.map(|v| v.f_xx)),
                Cell::opt(v.map(|v| v.f_bx)),
                Cell::opt(v.map(|v| v.f_eff)),
                Cell::opt(v.map(|v| v.incompatibility)),
                Cell::Flag(c.eta == 1.0 && c.gamma == 0.0),
                Cell::Text(c.values.err().unwrap_or_default()),
            ]);
        }
    }
    Ok(t)
}

struct ChiPoint {
    size: f64,
    chi: f64,
    f0: f64,
    curvature: f64,
    nonlinear: bool,
}

struct Scan {
    probe: ProbeKind,
    channel: Channel,
    points: Vec<ChiPoint>,
    exponent: Option<f64>,
    r2: Option<f64>,
}

struct Crossover {
    channel: Channel,
    eps: f64,
    n_crit: Option<u32>,
}

/// Susceptibility per size with per-point nonlinearity flags, then the
/// power-law fit over the points that stayed linear.
fn susceptibility_scans(cfg: &RunConfig) -> CliResult<(Vec<Scan>, Vec<Crossover>)> {
    let kinds = cfg.probe_kinds()?;
    let channels = cfg.channels()?;
    let sizes = cfg.sizes()?;
    let crit_eps = cfg.crit_eps()?;
    let n_max = cfg.n_max()?;
    for &k in &kinds {
        for &s in &sizes {
            k.probe(s).map_err(config)?;
        }
    }

    let mut scans = Vec::new();
    for &probe in &kinds {
        for &channel in &channels {
            let points = sizes
                .par_iter()
                .map(|&size| {
                    let p = probe.probe(size).map_err(config)?;
                    match susceptibility_adaptive(&p, channel) {
                        Ok(e) => Ok(ChiPoint {
                            size,
                            chi: e.chi,
                            f0: e.f0,
                            curvature: e.curvature,
                            nonlinear: e.curvature > CURVATURE_LIMIT,
                        }),
                        Err(Error::Nonlinear { curvature, .. }) => Ok(ChiPoint {
                            size,
                            chi: f64::NAN,
                            f0: f64::NAN,
                            curvature,
                            nonlinear: true,
                        }),
                        Err(e) => Err(numerical(e)),
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            let (n, chi): (Vec<f64>, Vec<f64>) = points
                .iter()
                .filter(|p| !p.nonlinear && p.chi > 0.0)
                .map(|p| (p.size, p.chi))
                .unzip();
            let fit = fit_scaling_exponent(&n, &chi).ok();
            scans.push(Scan {
                probe,
                channel,
                points,
                exponent: fit.map(|f| f.exponent),
                r2: fit.map(|f| f.r2),
            });
        }
    }

    let mut crossovers = Vec::new();
    for &channel in &channels {
        for &eps in &crit_eps {
            let n_crit = match noon_critical_photon_number(channel, eps, n_max) {
                Ok(n) => Some(n),
                Err(Error::SearchExhausted { .. }) => None,
                Err(e) => return Err(numerical(e)),
            };
            crossovers.push(Crossover { channel, eps, n_crit });
        }
    }
    Ok((scans, crossovers))
}

pub fn susceptibility_output(cfg: &RunConfig, format: Format) -> CliResult<String> {
    let (scans, crossovers) = susceptibility_scans(cfg)?;
    match format {
        Format::Json => {
            let fits: Vec<Value> = scans
                .iter()
                .map(|s| {
                    json!({
                        "probe": s.probe.label(),
                        "channel": s.channel.label(),
                        "points": s.points.iter().map(|p| json!({
                            "size": p.size,
                            "chi": finite(p.chi),
                            "f0": finite(p.f0),
                            "curvature": finite(p.curvature),
                            "nonlinear": p.nonlinear,
                        })).collect::<Vec<_>>(),
                        "exponent": s.exponent,
                        "r2": s.r2,
                    })
                })
                .collect();
            let crit: Vec<Value> = crossovers
                .iter()
                .map(|c| json!({"probe": "noon", "channel": c.channel.label(), "eps": c.eps, "n_crit": c.n_crit}))
                .collect();
            Ok(json_text(&json!({ "fits": fits, "n_crit": crit })))
        }
        Format::Csv => {
            let mut t = Table::new(
                "susceptibility",
                &[
                    "record", "probe", "channel", "size", "eps", "value", "f0", "curvature", "nonlinear", "exponent",
                    "r2",
                ],
            );
            for s in &scans {
                for p in &s.points {
                    t.push(vec![
                        Cell::Text("chi".into()),
                        Cell::Text(s.probe.label().into()),
                        Cell::Text(s.channel.label().into()),
                        Cell::Float(p.size),
                        Cell::Missing,
                        Cell::Float(p.chi),
                        Cell::Float(p.f0),
                        Cell::Float(p.curvature),
                        Cell::Flag(p.nonlinear),
                        Cell::opt(s.exponent),
                        Cell::opt(s.r2),
                    ]);
                }
            }
            for c in &crossovers {
                t.push(vec![
                    Cell::Text("n_crit".into()),
                    Cell::Text("noon".into()),
                    Cell::Text(c.channel.label().into()),
                    Cell::Missing,
                    Cell::Float(c.eps),
                    c.n_crit.map_or(Cell::Missing, |n| Cell::Int(i64::from(n))),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                ]);
            }
            Ok(t.to_csv())
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn bias_table(cfg: &RunConfig) -> CliResult<Table> {
    let kappa = cfg.kappa()?;
    let betas = cfg.betas()?;
    let hw = cfg.hbar_omega0()?;
    let model = ShrinkageModel::new(kappa).map_err(config)?;

    let rows = bias_sweep(&betas, kappa, hw).map_err(numerical)?;
    let mut t = Table::new(
        "bias",
        &["beta_true", "v_true", "v_meas", "beta_hat", "beta_corr", "in_domain", "contracted", "roundtrip_error"],
    );
    for r in rows {
        let back = correct_shrinkage(r.v_meas, &model, hw).ok();
        t.push(vec![
            Cell::Float(r.beta_true),
            Cell::Float(r.v_true),
            Cell::Float(r.v_meas),
            Cell::Float(r.beta_hat),
            Cell::opt(r.beta_corr),
            Cell::Flag(r.in_domain),
            Cell::Flag(r.contracted),
            Cell::opt(back.map(|b| (b - r.beta_true).abs())),
        ]);
    }
    Ok(t)
}
