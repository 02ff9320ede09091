//! The analysis bundle shared by `analyze` and `simulate`.

use std::io::Write;

use anyhow::{Context, Result};
use corrspec_core::correlation::{correlation_matrix, element_histogram, offdiag_mean};
use corrspec_core::decompose::{auto_ng, component_histograms, decompose, write_matrix_csv};
use corrspec_core::network::{
    cluster_scan, default_thresholds, linspace, network_report, select_threshold, threshold_adjacency,
    write_cluster_report, write_edge_list,
};
use corrspec_core::spectrum::{
    bulk_indices, deviating_eigenvalues, eigendecompose, eigenvector_report, mp_bounds, mp_density_curve,
    shuffle_surrogate, MpLaw,
};
use corrspec_core::{NormalizedReturns, SectorMap, Spectrum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{AnalysisArgs, NgSpec};
use crate::bundle::Bundle;

/// Leading eigenmodes written to `eigenvectors.csv`.
const REPORTED_MODES: usize = 4;
const DEFAULT_THRESHOLD_POINTS: usize = 200;
const DENSITY_POINTS: usize = 200;
/// Relative widening of the random-matrix support in the surrogate check.
pub const SUPPORT_SLACK: f64 = 0.05;

pub struct Analysis {
    pub spectrum: Spectrum,
    pub summary: Value,
}

pub fn write_mp_density<W: Write>(law: &MpLaw, w: W) -> corrspec_core::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["lambda", "density"])?;
    for (x, p) in mp_density_curve(law, DENSITY_POINTS) {
        wtr.write_record([x.to_string(), p.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SurrogateSummary {
    pub seed: u64,
    pub largest_eigenvalue: f64,
    pub fraction_inside_support: f64,
    pub support_slack: f64,
    pub mean_bulk_ipr: f64,
    pub random_ipr_reference: f64,
}

pub fn surrogate_summary(s: &Spectrum, law: &MpLaw, seed: u64) -> SurrogateSummary {
    let n = s.n();
    let inside = s.eigenvalues().iter().filter(|&&l| law.contains(l, SUPPORT_SLACK)).count();
    let bulk = bulk_indices(s, law);
    let mean_bulk_ipr = if bulk.is_empty() {
        f64::NAN
    } else {
        bulk.iter().map(|&k| s.ipr(k)).sum::<f64>() / bulk.len() as f64
    };
    SurrogateSummary {
        seed,
        largest_eigenvalue: s.eigenvalues()[0],
        fraction_inside_support: inside as f64 / n as f64,
        support_slack: SUPPORT_SLACK,
        mean_bulk_ipr,
        random_ipr_reference: 3.0 / n as f64,
    }
}

/// Runs correlation through network stages and writes the nine data files.
pub fn analyze_returns(
    nr: &NormalizedReturns,
    sectors: &SectorMap,
    opts: &AnalysisArgs,
    surrogate_seed: u64,
    source_hash: &str,
    bundle: &mut Bundle,
) -> Result<Analysis> {
    sectors.check_covers(nr.tickers()).context("stage: sectors")?;

    let c = correlation_matrix(nr);
    let q = c.q().expect("estimated from data");
    bundle.write("element_histogram.csv", |w| {
        element_histogram(&c, opts.bins, opts.range)?.write_csv(w)
    })?;

    let s = eigendecompose(&c).context("stage: spectrum")?;
    let law = mp_bounds(q).context("stage: spectrum")?;
    bundle.write("spectrum.csv", |w| s.write_csv(w))?;
    bundle.write("mp_density.csv", |w| write_mp_density(&law, w))?;

    let sur = eigendecompose(&shuffle_surrogate(nr, surrogate_seed)).context("stage: surrogate")?;
    bundle.write("surrogate_spectrum.csv", |w| sur.write_csv(w))?;

    let modes = REPORTED_MODES.min(s.n());
    let mut reports = Vec::with_capacity(modes);
    for k in 0..modes {
        reports.push(eigenvector_report(&s, sectors, k).context("stage: eigenvectors")?);
    }
    bundle.write("eigenvectors.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["mode", "ticker", "sector", "component", "abs_component"])?;
        for (k, rows) in reports.iter().enumerate() {
            for r in rows {
                wtr.write_record([
                    k.to_string(),
                    r.ticker.clone(),
                    r.sector.clone(),
                    r.component.to_string(),
                    r.abs_component.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    })?;

    let deviating = deviating_eigenvalues(&s, &law, opts.margin).len();
    let n_g = match opts.ng {
        NgSpec::Auto => auto_ng(&s, &law, opts.margin),
        NgSpec::Fixed(k) => k,
    };
    let d = decompose(&s, n_g).context("stage: decomposition")?;
    bundle.write("component_histograms.csv", |w| {
        component_histograms(&d, opts.bins, opts.range)?.write_csv(w)
    })?;
    if opts.export_decomposition {
        bundle.write("market.csv", |w| write_matrix_csv(&d.tickers, &d.market, w))?;
        bundle.write("group.csv", |w| write_matrix_csv(&d.tickers, &d.group, w))?;
        bundle.write("random.csv", |w| write_matrix_csv(&d.tickers, &d.random, w))?;
        let manifest = d.manifest(source_hash);
        bundle.write("decomposition.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::from)?;
            w.push(b'\n');
            Ok(())
        })?;
    }

    let thresholds = match opts.thresholds {
        Some(t) => linspace(t.lo, t.hi, t.points),
        None => default_thresholds(&d.group, DEFAULT_THRESHOLD_POINTS),
    };
    let scan = cluster_scan(&d.group, &thresholds, opts.count_singletons).context("stage: network")?;
    bundle.write("cluster_scan.csv", |w| scan.write_csv(w))?;
    let c_star = select_threshold(&scan).expect("threshold grid is nonempty");
    let a = threshold_adjacency(c.tickers(), &d.group, c_star).context("stage: network")?;
    let clusters = network_report(&a, sectors).context("stage: network")?;
    bundle.write("edges.csv", |w| write_edge_list(&a, &d.group, w))?;
    bundle.write("clusters.csv", |w| write_cluster_report(&clusters, w))?;
    let network = json!({
        "c_star": c_star,
        "clusters": clusters.len(),
        "linked_nodes": a.linked_nodes(),
        "edges": a.edge_count(),
        "min_purity": clusters.iter().map(|r| r.purity).fold(1.0, f64::min),
    });

    let lambda0 = s.eigenvalues()[0];
    let summary = json!({
        "n_stocks": c.n(),
        "observations": c.observations(),
        "q": q,
        "mean_correlation": offdiag_mean(&c),
        "mp_lambda_min": law.lambda_min,
        "mp_lambda_max": law.lambda_max,
        "lambda0": lambda0,
        "lambda0_over_mp_max": lambda0 / law.lambda_max,
        "deviating_eigenvalues": deviating,
        "n_g": n_g,
        "n_g_mode": match opts.ng { NgSpec::Auto => "auto", NgSpec::Fixed(_) => "fixed" },
        "surrogate": surrogate_summary(&sur, &law, surrogate_seed),
        "network": network,
    });
    Ok(Analysis { spectrum: s, summary })
}

/// Resolved analysis flags as recorded in manifests.
pub fn analysis_params(opts: &AnalysisArgs) -> Value {
    json!({
        "ng": match opts.ng { NgSpec::Auto => json!("auto"), NgSpec::Fixed(k) => json!(k) },
        "margin": opts.margin,
        "thresholds": opts.thresholds.map(|t| json!({"lo": t.lo, "hi": t.hi, "points": t.points}))
            .unwrap_or_else(|| json!({"default_points": DEFAULT_THRESHOLD_POINTS})),
        "count_singletons": opts.count_singletons,
        "bins": opts.bins,
        "range": [opts.range.0, opts.range.1],
        "export_decomposition": opts.export_decomposition,
    })
}
