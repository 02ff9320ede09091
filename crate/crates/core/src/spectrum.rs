//! Eigen-analysis of correlation matrices against the random-matrix reference.
//!
//! The Marchenko–Pastur law gives the eigenvalue density of a correlation
//! matrix built from `N` mutually uncorrelated series of length `T`:
//!
//! ```text
//! P(λ) = Q / (2π) · sqrt((λ_max - λ)(λ - λ_min)) / λ,   λ_min ≤ λ ≤ λ_max
//! λ_max,min = (1 ± 1/sqrt(Q))²,                          Q = T / N ≥ 1
//! ```
//!
//! Eigenvalues above `λ_max` carry genuine co-movement; their eigenvectors are
//! characterised by the inverse participation ratio `I_k = Σ_i u_ki⁴`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::correlation::{correlation_matrix, CorrMatrix};
use crate::error::{Error, Result};
use crate::ingest::SectorMap;
use crate::returns::NormalizedReturns;
use crate::rng;

/// Eigenvalues in descending order with their orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    tickers: Vec<String>,
    eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: Array2<f64>,
    observations: Option<usize>,
}

impl Spectrum {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> ArrayView1<'_, f64> {
        self.eigenvectors.column(k)
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `(N, T)` of the generating data, `T` absent for population matrices.
    pub fn source_dims(&self) -> (usize, Option<usize>) {
        (self.n(), self.observations)
    }

    pub fn q(&self) -> Option<f64> {
        self.observations.map(|t| t as f64 / self.n() as f64)
    }

    /// IPR of eigenvector `k`.
    pub fn ipr(&self, k: usize) -> f64 {
        self.eigenvector(k).iter().map(|u| u.powi(4)).sum()
    }

    /// `Σ_k λ_k u_k u_kᵀ` over the given eigen-indices.
    pub fn partial_sum<I: IntoIterator<Item = usize>>(&self, modes: I) -> Array2<f64> {
        let n = self.n();
        let mut out = Array2::zeros((n, n));
        for k in modes {
            let u = self.eigenvector(k);
            let lambda = self.eigenvalues[k];
            for i in 0..n {
                let li = lambda * u[i];
                for j in 0..n {
                    out[[i, j]] += li * u[j];
                }
            }
        }
        out
    }

    /// `k,lambda,ipr` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "lambda", "ipr"])?;
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            wtr.write_record([k.to_string(), lambda.to_string(), self.ipr(k).to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Full eigendecomposition of a symmetric matrix, sorted descending, with
/// every eigenvector oriented so its components sum to a nonnegative value
/// (exact ties: first nonzero component positive).
pub fn symmetric_eigen(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::Validation(format!("matrix is {rows}x{cols}, not square")));
    }
    let n = rows;
    for i in 0..n {
        for j in 0..i {
            if !m[[i, j]].is_finite() || (m[[i, j]] - m[[j, i]]).abs() > 1e-9 {
                return Err(Error::Validation(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| m[[i, j]]));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let sum: f64 = col.iter().sum();
        let flip = if sum.abs() > 1e-12 {
            sum < 0.0
        } else {
            col.iter().find(|c| c.abs() > 1e-12).is_some_and(|&c| c < 0.0)
        };
        let sign = if flip { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[[i, dst]] = sign * col[i];
        }
    }
    Ok((values, vectors))
}

pub fn eigendecompose(c: &CorrMatrix) -> Result<Spectrum> {
    let (eigenvalues, eigenvectors) = symmetric_eigen(c.entries())?;
    Ok(Spectrum {
        tickers: c.tickers().to_vec(),
        eigenvalues,
        eigenvectors,
        observations: c.observations(),
    })
}

/// Support of the Marchenko–Pastur density for a given `Q = T/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpLaw {
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl MpLaw {
    /// Whether `lambda` lies in the support widened by a relative `slack`
    /// on both sides.
    pub fn contains(&self, lambda: f64, slack: f64) -> bool {
        lambda >= self.lambda_min * (1.0 - slack) && lambda <= self.lambda_max * (1.0 + slack)
    }
}

pub fn mp_bounds(q: f64) -> Result<MpLaw> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Range(format!("Q = T/N must be finite and >= 1, got {q}")));
    }
    let r = 1.0 / q.sqrt();
    Ok(MpLaw {
        q,
        lambda_min: (1.0 - r).powi(2),
        lambda_max: (1.0 + r).powi(2),
    })
}

pub fn mp_density(lambda: f64, law: &MpLaw) -> f64 {
    if lambda <= law.lambda_min || lambda >= law.lambda_max {
        return 0.0;
    }
    law.q / (2.0 * PI) * ((law.lambda_max - lambda) * (lambda - law.lambda_min)).sqrt() / lambda
}

/// `(lambda, density)` at `points` evenly spaced abscissae across the support.
pub fn mp_density_curve(law: &MpLaw, points: usize) -> Vec<(f64, f64)> {
    let span = law.lambda_max - law.lambda_min;
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|k| {
            let x = law.lambda_min + span * k as f64 / steps as f64;
            (x, mp_density(x, law))
        })
        .collect()
}

/// Permutes every stock's series independently; stock `i` uses stream `i`.
pub fn shuffle_returns(nr: &NormalizedReturns, seed: u64) -> NormalizedReturns {
    let mut values = nr.values().clone();
    values
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let mut rng = rng::stream(seed, i as u64);
            row.as_slice_mut().expect("standard layout").shuffle(&mut rng);
        });
    nr.with_values(values)
}

/// Correlation matrix of independently time-shuffled series.
pub fn shuffle_surrogate(nr: &NormalizedReturns, seed: u64) -> CorrMatrix {
    correlation_matrix(&shuffle_returns(nr, seed))
}

/// Indices `k` with `λ_k > λ_max (1 + margin)`, in ascending index order.
pub fn deviating_eigenvalues(s: &Spectrum, law: &MpLaw, margin: f64) -> Vec<usize> {
    let cut = law.lambda_max * (1.0 + margin);
    s.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cut)
        .map(|(k, _)| k)
        .collect()
}

/// Indices of eigenvalues inside `[λ_min, λ_max]`.
pub fn bulk_indices(s: &Spectrum, law: &MpLaw) -> Vec<usize> {
    s.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| law.contains(l, 0.0))
        .map(|(k, _)| k)
        .collect()
}

/// Inverse participation ratio `Σ u_i⁴` of a unit vector.
pub fn ipr(u: &[f64]) -> Result<f64> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Validation(format!("eigenvector norm {norm} is not 1")));
    }
    Ok(u.iter().map(|x| x.powi(4)).sum())
}

/// One stock's loading on an eigenmode.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRow {
    pub ticker: String,
    pub sector: String,
    pub component: f64,
    pub abs_component: f64,
}

/// Components of eigenvector `k`, sorted by sector then ticker.
pub fn eigenvector_report(s: &Spectrum, sectors: &SectorMap, k: usize) -> Result<Vec<ComponentRow>> {
    if k >= s.n() {
        return Err(Error::Range(format!("mode {k} out of range for N = {}", s.n())));
    }
    sectors.check_covers(&s.tickers)?;
    let u = s.eigenvector(k);
    let mut rows: Vec<ComponentRow> = s
        .tickers
        .iter()
        .enumerate()
        .map(|(i, t)| ComponentRow {
            ticker: t.clone(),
            sector: sectors.sector(t).unwrap_or_default().to_string(),
            component: u[i],
            abs_component: u[i].abs(),
        })
        .collect();
    rows.sort_by(|a, b| (&a.sector, &a.ticker).cmp(&(&b.sector, &b.ticker)));
    Ok(rows)
}

/// `Σ u_i²` per sector.
pub fn sector_weights(rows: &[ComponentRow]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for r in rows {
        *out.entry(r.sector.clone()).or_insert(0.0) += r.component * r.component;
    }
    out
}

/// `ticker,sector,component,abs_component` rows.
pub fn write_eigenvector_report<W: Write>(rows: &[ComponentRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["ticker", "sector", "component", "abs_component"])?;
    for r in rows {
        wtr.write_record([
            r.ticker.clone(),
            r.sector.clone(),
            r.component.to_string(),
            r.abs_component.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
