//! Splitting `C` into market, group and random parts.
//!
//! `C = λ₀u₀u₀ᵀ + Σ_{1..=n_g} λ_i u_i u_iᵀ + Σ_{n_g+1..N-1} λ_i u_i u_iᵀ`

use std::io::Write;

use log::info;
use ndarray::Array2;
use serde::Serialize;

use crate::correlation::{histogram, upper_triangle, Histogram};
use crate::error::{Error, Result};
use crate::spectrum::{deviating_eigenvalues, MpLaw, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub tickers: Vec<String>,
    pub market: Array2<f64>,
    pub group: Array2<f64>,
    pub random: Array2<f64>,
    pub n_g: usize,
    pub eigenvalues: Vec<f64>,
}

impl ModeDecomposition {
    pub fn sum(&self) -> Array2<f64> {
        &self.market + &self.group + &self.random
    }

    pub fn manifest(&self, source_hash: &str) -> DecompositionManifest {
        DecompositionManifest {
            n: self.tickers.len(),
            n_g: self.n_g,
            market_eigenvalue: self.eigenvalues[0],
            group_eigenvalues: self.eigenvalues[1..=self.n_g].to_vec(),
            random_eigenvalues: self.eigenvalues[self.n_g + 1..].to_vec(),
            source_hash: source_hash.to_string(),
        }
    }
}

/// Record written next to an exported decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionManifest {
    pub n: usize,
    pub n_g: usize,
    pub market_eigenvalue: f64,
    pub group_eigenvalues: Vec<f64>,
    pub random_eigenvalues: Vec<f64>,
    pub source_hash: String,
}

pub fn decompose(s: &Spectrum, n_g: usize) -> Result<ModeDecomposition> {
    let n = s.n();
    if n == 0 || n_g > n - 1 {
        return Err(Error::Range(format!(
            "group mode count {n_g} must be in 0..={}",
            n.saturating_sub(1)
        )));
    }
    Ok(ModeDecomposition {
        tickers: s.tickers().to_vec(),
        market: s.partial_sum(0..1),
        group: s.partial_sum(1..=n_g),
        random: s.partial_sum(n_g + 1..n),
        n_g,
        eigenvalues: s.eigenvalues().to_vec(),
    })
}

/// Number of deviating eigenvalues other than the largest.
pub fn auto_ng(s: &Spectrum, law: &MpLaw, margin: f64) -> usize {
    let n_g = deviating_eigenvalues(s, law, margin).len().saturating_sub(1);
    info!(
        "auto n_g = {n_g} (lambda_max = {:.4}, margin = {margin})",
        law.lambda_max
    );
    n_g
}

/// Element distributions of the three components on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentHistograms {
    pub market: Histogram,
    pub group: Histogram,
    pub random: Histogram,
}

impl ComponentHistograms {
    /// `component,bin_lo,bin_hi,count,density` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["component", "bin_lo", "bin_hi", "count", "density"])?;
        for (name, h) in [("market", &self.market), ("group", &self.group), ("random", &self.random)] {
            for k in 0..h.bins() {
                wtr.write_record([
                    name.to_string(),
                    h.bin_edges[k].to_string(),
                    h.bin_edges[k + 1].to_string(),
                    h.counts[k].to_string(),
                    h.density[k].to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn component_histograms(
    d: &ModeDecomposition,
    bins: usize,
    range: (f64, f64),
) -> Result<ComponentHistograms> {
    Ok(ComponentHistograms {
        market: histogram(&upper_triangle(&d.market), bins, range)?,
        group: histogram(&upper_triangle(&d.group), bins, range)?,
        random: histogram(&upper_triangle(&d.random), bins, range)?,
    })
}

/// Square matrix as delimited text with a `ticker` header row and column.
pub fn write_matrix_csv<W: Write>(tickers: &[String], m: &Array2<f64>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["ticker".to_string()];
    header.extend(tickers.iter().cloned());
    wtr.write_record(&header)?;
    for (i, row) in m.rows().into_iter().enumerate() {
        let mut rec = vec![tickers[i].clone()];
        rec.extend(row.iter().map(f64::to_string));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
