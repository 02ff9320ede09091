//! Equal-time cross-correlation matrix and element statistics.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::returns::NormalizedReturns;

/// Symmetric, unit-diagonal correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    tickers: Vec<String>,
    entries: Array2<f64>,
    observations: Option<usize>,
}

impl CorrMatrix {
    /// Wraps an externally built matrix. `observations` is the series length
    /// `T` it was estimated from, or `None` for population matrices.
    pub fn new(tickers: Vec<String>, entries: Array2<f64>, observations: Option<usize>) -> Result<Self> {
        let n = tickers.len();
        if entries.dim() != (n, n) {
            return Err(Error::Validation(format!(
                "correlation matrix is {:?}, expected {n}x{n}",
                entries.dim()
            )));
        }
        for i in 0..n {
            if (entries[[i, i]] - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!(
                    "diagonal entry {i} is {}, expected 1",
                    entries[[i, i]]
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[[i, j]], entries[[j, i]]);
                if !a.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                if a.abs() > 1.0 + 1e-9 {
                    return Err(Error::Validation(format!("entry ({i},{j}) = {a} outside [-1,1]")));
                }
            }
        }
        Ok(Self {
            tickers,
            entries,
            observations,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn observations(&self) -> Option<usize> {
        self.observations
    }

    /// `T / N` when the matrix came from data.
    pub fn q(&self) -> Option<f64> {
        self.observations.map(|t| t as f64 / self.n() as f64)
    }
}

/// `C_ij = <r_i r_j>` with the diagonal set to exactly 1.
///
/// Each entry is one ascending-`t` dot product, so the result does not
/// depend on how rows are scheduled across threads.
pub fn correlation_matrix(nr: &NormalizedReturns) -> CorrMatrix {
    let n = nr.n_stocks();
    let t = nr.len();
    let values = nr.values();
    let rows: Vec<&[f64]> = values
        .rows()
        .into_iter()
        .map(|r| r.to_slice().expect("standard layout"))
        .collect();

    let lower: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..i)
                .map(|j| {
                    let dot: f64 = rows[i].iter().zip(rows[j]).map(|(a, b)| a * b).sum();
                    dot / t as f64
                })
                .collect()
        })
        .collect();

    let mut entries = Array2::eye(n);
    for (i, row) in lower.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            entries[[i, j]] = c;
            entries[[j, i]] = c;
        }
    }
    CorrMatrix {
        tickers: nr.tickers().to_vec(),
        entries,
        observations: Some(t),
    }
}

/// Strict upper-triangle entries, row by row.
pub fn upper_triangle(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[[i, j]]);
        }
    }
    out
}

/// Mean of the `N(N-1)/2` off-diagonal entries.
pub fn offdiag_mean(c: &CorrMatrix) -> f64 {
    let upper = upper_triangle(&c.entries);
    if upper.is_empty() {
        return 0.0;
    }
    upper.iter().sum::<f64>() / upper.len() as f64
}

/// Fixed-width histogram normalised to unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    /// Samples outside `[lo, hi]`; they are still counted in the edge bins.
    pub overflow: u64,
}

impl Histogram {
    pub fn n_samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// `bin_lo,bin_hi,count,density` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bin_lo", "bin_hi", "count", "density"])?;
        for (k, (&c, &d)) in self.counts.iter().zip(&self.density).enumerate() {
            wtr.write_record([
                self.bin_edges[k].to_string(),
                self.bin_edges[k + 1].to_string(),
                c.to_string(),
                d.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Histogram of arbitrary samples on `bins` equal bins over `[lo, hi]`.
pub fn histogram(samples: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Range(format!(
            "histogram needs bins >= 1 and lo < hi, got {bins} bins on [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    for &x in samples {
        if x < lo || x > hi {
            overflow += 1;
        }
        let k = ((x - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(bins - 1) };
        counts[k] += 1;
    }
    let total = samples.len() as f64;
    let density = counts
        .iter()
        .map(|&c| if total > 0.0 { c as f64 / (total * width) } else { 0.0 })
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        density,
        overflow,
    })
}

/// Distribution of the off-diagonal upper-triangle elements of `C`.
pub fn element_histogram(c: &CorrMatrix, bins: usize, range: (f64, f64)) -> Result<Histogram> {
    histogram(&upper_triangle(&c.entries), bins, range)
}
