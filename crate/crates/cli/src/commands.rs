use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use corrspec_core::correlation::correlation_matrix;
use corrspec_core::factor_model::{
    analytic_extremes, population_spectrum, sample_params, sample_params_no_market, simulate_returns, sweep,
    trend_summary, SweepConfig,
};
use corrspec_core::ingest::{forward_fill, read_price_table, read_sector_map, slice_period};
use corrspec_core::returns::{drop_degenerate, log_returns, normalize};
use corrspec_core::spectrum::{eigendecompose, mp_bounds, shuffle_surrogate};
use corrspec_core::{NormalizedReturns, SectorMap};
use log::{info, warn};
use serde_json::{json, Value};

use crate::args::{parse_grid, parse_sizes, AnalysisArgs, Grid, InputArgs, Sizes};
use crate::bundle::{sha256_hex, Bundle};
use crate::report::{analysis_params, analyze_returns, surrogate_summary, write_mp_density};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Seed for every random draw of the run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Directory receiving the data files and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    /// Sector sizes: comma list or `KxN`.
    #[arg(long, default_value = "10x20", value_parser = parse_sizes)]
    pub sizes: Sizes,

    /// Mean sector-factor strength.
    #[arg(long, default_value_t = 0.3)]
    pub gamma: f64,

    /// Mean idiosyncratic strength (ignored with `--no-market`).
    #[arg(long, default_value_t = 0.6)]
    pub sigma: f64,

    /// Width of the uniform windows strengths are drawn from.
    #[arg(long, default_value_t = 0.05)]
    pub width: f64,

    /// Number of simulated returns per stock.
    #[arg(long, default_value_t = 2000)]
    pub t_len: usize,

    /// Switch the market factor off; sigma is then derived from gamma.
    #[arg(long)]
    pub no_market: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sector sizes: comma list or `KxN`.
    #[arg(long, default_value = "10x20", value_parser = parse_sizes)]
    pub sizes: Sizes,

    /// Sector-strength grid: `LO:HI:N` or a comma list.
    #[arg(long, default_value = "0.1:0.7:7", value_parser = parse_grid)]
    pub gamma_grid: Grid,

    /// Idiosyncratic-strength grid: `LO:HI:N` or a comma list.
    #[arg(long, default_value = "0.1:0.7:7", value_parser = parse_grid)]
    pub sigma_grid: Grid,

    #[arg(long, default_value_t = 0.05)]
    pub width: f64,

    #[arg(long, default_value_t = 2000)]
    pub t_len: usize,
}

struct Loaded {
    returns: NormalizedReturns,
    sectors: SectorMap,
    source_hash: String,
    inputs: Value,
    data: Value,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("stage: ingest: reading {}", path.display()))
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let price_bytes = read_input(&input.prices)?;
    let source_hash = sha256_hex(&price_bytes);
    let mut table = read_price_table(price_bytes.as_slice(), input.delimiter).context("stage: ingest prices")?;
    let raw_dims = (table.n_stocks(), table.n_dates());
    if let Some(p) = &input.period {
        table = slice_period(&table, &p.start, &p.end).context("stage: ingest period")?;
    }
    let filled_cells = table.unobserved_count();
    let table = forward_fill(&table).context("stage: ingest fill")?;
    let returns = log_returns(&table, input.dt).context("stage: returns")?;
    let (returns, dropped) = if input.drop_degenerate {
        drop_degenerate(&returns)
    } else {
        (returns, Vec::new())
    };
    if !dropped.is_empty() {
        warn!("dropped {} constant series: {}", dropped.len(), dropped.join(", "));
    }
    let returns = normalize(&returns).context("stage: returns")?;

    let (sectors, sector_input) = match &input.sectors {
        Some(path) => {
            let bytes = read_input(path)?;
            let map = read_sector_map(bytes.as_slice(), input.delimiter).context("stage: ingest sectors")?;
            (map, json!({"path": path.display().to_string(), "sha256": sha256_hex(&bytes)}))
        }
        None => (SectorMap::uniform(returns.tickers(), "unassigned"), Value::Null),
    };
    info!(
        "loaded {} stocks x {} dates ({} filled cells)",
        table.n_stocks(),
        table.n_dates(),
        filled_cells
    );
    Ok(Loaded {
        inputs: json!({
            "prices": {"path": input.prices.display().to_string(), "sha256": source_hash},
            "sectors": sector_input,
        }),
        data: json!({
            "raw_stocks": raw_dims.0,
            "raw_dates": raw_dims.1,
            "first_date": table.dates().first(),
            "last_date": table.dates().last(),
            "dates": table.n_dates(),
            "filled_cells": filled_cells,
            "dropped": dropped,
        }),
        returns,
        sectors,
        source_hash,
    })
}

fn input_params(input: &InputArgs) -> Value {
    json!({
        "delimiter": (input.delimiter as char).to_string(),
        "period": input.period.as_ref().map(|p| json!({"start": p.start, "end": p.end})),
        "dt": input.dt,
        "drop_degenerate": input.drop_degenerate,
    })
}

pub fn analyze(input: &InputArgs, opts: &AnalysisArgs, out: &OutputArgs) -> Result<()> {
    let loaded = load(input)?;
    let mut bundle = Bundle::create(&out.out)?;
    let analysis = analyze_returns(
        &loaded.returns,
        &loaded.sectors,
        opts,
        out.seed,
        &loaded.source_hash,
        &mut bundle,
    )?;
    let manifest = json!({
        "command": "analyze",
        "version": VERSION,
        "inputs": loaded.inputs,
        "parameters": {
            "input": input_params(input),
            "analysis": analysis_params(opts),
            "seed": out.seed,
        },
        "data": loaded.data,
        "results": analysis.summary,
        "outputs": bundle.digests(),
    });
    bundle.finish(&manifest)
}

pub fn simulate(model: &FactorArgs, opts: &AnalysisArgs, out: &OutputArgs) -> Result<()> {
    let (param_seed, return_seed, surrogate_seed) = (out.seed, out.seed.wrapping_add(1), out.seed.wrapping_add(2));
    let params = if model.no_market {
        sample_params_no_market(&model.sizes.0, model.gamma, model.width, param_seed)
    } else {
        sample_params(&model.sizes.0, model.gamma, model.sigma, model.width, param_seed)
    }
    .context("stage: model parameters")?;
    let returns = simulate_returns(&params, model.t_len, return_seed).context("stage: simulation")?;
    let returns = normalize(&returns).context("stage: returns")?;

    let model_params = json!({
        "sizes": model.sizes.0,
        "gamma": model.gamma,
        "sigma": if model.no_market { Value::Null } else { json!(model.sigma) },
        "width": model.width,
        "t_len": model.t_len,
        "no_market": model.no_market,
        "seeds": {"parameters": param_seed, "returns": return_seed, "surrogate": surrogate_seed},
    });
    let source_hash = sha256_hex(model_params.to_string().as_bytes());
    let mut bundle = Bundle::create(&out.out)?;
    let analysis = analyze_returns(
        &returns,
        &params.sector_map(),
        opts,
        surrogate_seed,
        &source_hash,
        &mut bundle,
    )?;

    let numeric = analysis.spectrum.eigenvalues();
    let population = population_spectrum(&params);
    let k_large = model.sizes.0.len().min(numeric.len());
    let rel: Vec<f64> = (0..k_large).map(|k| (numeric[k] - population[k]) / population[k]).collect();
    bundle.write("analytic_comparison.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "numeric", "population", "rel_error"])?;
        for (k, r) in rel.iter().enumerate() {
            wtr.write_record([k.to_string(), numeric[k].to_string(), population[k].to_string(), r.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    })?;

    let n = params.n_stocks() as f64;
    let beta_sq = params.beta_sq_mean();
    let gamma_mean = params.gamma().iter().sum::<f64>() / n;
    let extremes = analytic_extremes(beta_sq.sqrt(), gamma_mean, &model.sizes.0);
    let manifest = json!({
        "command": "simulate",
        "version": VERSION,
        "parameters": {
            "model": model_params,
            "analysis": analysis_params(opts),
            "seed": out.seed,
        },
        "model": {
            "beta_sq_mean": beta_sq,
            "gamma_mean": gamma_mean,
            "sigma_mean": params.sigma().iter().sum::<f64>() / n,
            "predicted": extremes,
            "measured": {"lambda0": numeric[0], "lambda1": numeric.get(1)},
            "max_abs_rel_error_large": rel.iter().fold(0.0_f64, |m, r| m.max(r.abs())),
        },
        "results": analysis.summary,
        "outputs": bundle.digests(),
    });
    bundle.finish(&manifest)
}

pub fn run_sweep(args: &SweepArgs, out: &OutputArgs) -> Result<()> {
    let cfg = SweepConfig {
        sizes: args.sizes.0.clone(),
        gamma_grid: args.gamma_grid.0.clone(),
        sigma_grid: args.sigma_grid.0.clone(),
        width: args.width,
        t_len: args.t_len,
        seed: out.seed,
    };
    let surface = sweep(&cfg).context("stage: sweep")?;
    let infeasible = surface.points.iter().filter(|p| p.result.is_none()).count();
    if infeasible > 0 {
        info!("{infeasible} infeasible grid points omitted from the surface");
    }
    let mut bundle = Bundle::create(&out.out)?;
    bundle.write("sweep_surface.csv", |w| surface.write_csv(w))?;
    bundle.write("feasibility.csv", |w| surface.write_feasibility_csv(w))?;
    let manifest = json!({
        "command": "sweep",
        "version": VERSION,
        "parameters": cfg,
        "results": {
            "grid_points": surface.points.len(),
            "infeasible_points": infeasible,
            "trends": trend_summary(&surface),
        },
        "outputs": bundle.digests(),
    });
    bundle.finish(&manifest)
}

pub fn surrogate(input: &InputArgs, out: &OutputArgs) -> Result<()> {
    let loaded = load(input)?;
    let c = correlation_matrix(&loaded.returns);
    let law = mp_bounds(c.q().expect("estimated from data")).context("stage: spectrum")?;
    let s = eigendecompose(&c).context("stage: spectrum")?;
    let sur = eigendecompose(&shuffle_surrogate(&loaded.returns, out.seed)).context("stage: surrogate")?;
    let mut bundle = Bundle::create(&out.out)?;
    bundle.write("spectrum.csv", |w| s.write_csv(w))?;
    bundle.write("surrogate_spectrum.csv", |w| sur.write_csv(w))?;
    bundle.write("mp_density.csv", |w| write_mp_density(&law, w))?;
    let manifest = json!({
        "command": "surrogate",
        "version": VERSION,
        "inputs": loaded.inputs,
        "parameters": {"input": input_params(input), "seed": out.seed},
        "data": loaded.data,
        "results": {
            "q": law.q,
            "mp_lambda_min": law.lambda_min,
            "mp_lambda_max": law.lambda_max,
            "original_largest_eigenvalue": s.eigenvalues()[0],
            "surrogate": surrogate_summary(&sur, &law, out.seed),
        },
        "outputs": bundle.digests(),
    });
    bundle.finish(&manifest)
}
