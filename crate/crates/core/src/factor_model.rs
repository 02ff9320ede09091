//! Two-factor market simulator and its spectral predictions.
//!
//! Stock `i` in sector `k` moves as
//!
//! ```text
//! r_i(t) = β_i r_m(t) + γ_i r_g^k(t) + σ_i η_i(t),    β_i² + γ_i² + σ_i² = 1
//! ```
//!
//! with independent standard Gaussian market, sector and idiosyncratic
//! streams. The unit-variance constraint makes the population correlation
//! `E[C_ij] = β_iβ_j + [same sector] γ_iγ_j` for `i != j`.

use std::io::Write;

use log::warn;
use ndarray::{Array1, Array2};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::correlation_matrix;
use crate::error::{Error, Result};
use crate::ingest::SectorMap;
use crate::returns::{normalize, ReturnMatrix};
use crate::rng;
use crate::spectrum::symmetric_eigen;

const MAX_DRAWS_PER_STOCK: usize = 1000;

/// Per-stock factor strengths and sector layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorParams {
    sizes: Vec<usize>,
    sector_of: Vec<usize>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    sigma: Vec<f64>,
}

impl FactorParams {
    pub fn new(sizes: Vec<usize>, beta: Vec<f64>, gamma: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Validation("sector sizes must be nonempty and positive".into()));
        }
        if beta.len() != n || gamma.len() != n || sigma.len() != n {
            return Err(Error::Validation(format!(
                "strength vectors must have length {n} (sizes sum)"
            )));
        }
        for i in 0..n {
            let (b, g, s) = (beta[i], gamma[i], sigma[i]);
            if [b, g, s].iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::Validation(format!("stock {i}: strengths must lie in [0, 1]")));
            }
            let total = b * b + g * g + s * s;
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "stock {i}: beta^2 + gamma^2 + sigma^2 = {total}, expected 1"
                )));
            }
        }
        let sector_of = sizes
            .iter()
            .enumerate()
            .flat_map(|(k, &m)| std::iter::repeat_n(k, m))
            .collect();
        Ok(Self {
            sizes,
            sector_of,
            beta,
            gamma,
            sigma,
        })
    }

    /// Derives `β_i = sqrt(1 - γ_i² - σ_i²)`.
    pub fn from_strengths(sizes: Vec<usize>, gamma: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let beta = gamma
            .iter()
            .zip(&sigma)
            .enumerate()
            .map(|(i, (g, s))| {
                let b2 = 1.0 - g * g - s * s;
                if b2 < -1e-12 {
                    Err(Error::Infeasible(format!(
                        "stock {i}: gamma^2 + sigma^2 = {} exceeds 1",
                        g * g + s * s
                    )))
                } else {
                    Ok(b2.max(0.0).sqrt())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes, beta, gamma, sigma)
    }

    /// Same `γ` and `σ` for every stock.
    pub fn uniform(sizes: Vec<usize>, gamma: f64, sigma: f64) -> Result<Self> {
        let n = sizes.iter().sum();
        Self::from_strengths(sizes, vec![gamma; n], vec![sigma; n])
    }

    /// No market factor: one `γ` per sector, `σ_i = sqrt(1 - γ²)`.
    pub fn no_market(sizes: Vec<usize>, sector_gammas: &[f64]) -> Result<Self> {
        if sector_gammas.len() != sizes.len() {
            return Err(Error::Validation("need one gamma per sector".into()));
        }
        let gamma: Vec<f64> = sizes
            .iter()
            .zip(sector_gammas)
            .flat_map(|(&m, &g)| std::iter::repeat_n(g, m))
            .collect();
        let sigma = gamma.iter().map(|g| (1.0 - g * g).max(0.0).sqrt()).collect();
        let n = gamma.len();
        Self::new(sizes, vec![0.0; n], gamma, sigma)
    }

    pub fn n_stocks(&self) -> usize {
        self.beta.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn sector_of(&self) -> &[usize] {
        &self.sector_of
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn beta_sq_mean(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>() / self.n_stocks() as f64
    }

    /// `S000`, `S001`, ... in stock order.
    pub fn tickers(&self) -> Vec<String> {
        (0..self.n_stocks()).map(|i| format!("S{i:03}")).collect()
    }

    pub fn sector_label(k: usize) -> String {
        format!("G{k:02}")
    }

    pub fn sector_map(&self) -> SectorMap {
        SectorMap::from_pairs(
            self.tickers()
                .into_iter()
                .zip(&self.sector_of)
                .map(|(t, &k)| (t, Self::sector_label(k))),
        )
        .expect("generated tickers are unique")
    }
}

fn draw_strength<R: Rng>(rng: &mut R, mean: f64, width: f64) -> f64 {
    if width == 0.0 {
        mean
    } else {
        rng.random_range(mean - width / 2.0..=mean + width / 2.0).clamp(0.0, 1.0)
    }
}

fn check_mean(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Range(format!("{name} mean {v} outside [0, 1]")))
    }
}

/// Draws `γ_i, σ_i` uniformly from windows of `width` around the means and
/// derives `β_i`. Pairs with `γ² + σ² > 1` are rejected and redrawn.
pub fn sample_params(
    sizes: &[usize],
    gamma_mean: f64,
    sigma_mean: f64,
    width: f64,
    seed: u64,
) -> Result<FactorParams> {
    check_mean("gamma", gamma_mean)?;
    check_mean("sigma", sigma_mean)?;
    if !(width >= 0.0) {
        return Err(Error::Range(format!("width {width} must be >= 0")));
    }
    let lowest = |m: f64| (m - width / 2.0).max(0.0);
    if lowest(gamma_mean).powi(2) + lowest(sigma_mean).powi(2) > 1.0 {
        return Err(Error::Infeasible(format!(
            "no draw around gamma = {gamma_mean}, sigma = {sigma_mean} satisfies gamma^2 + sigma^2 <= 1"
        )));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = rng::stream(seed, 0);
    let (mut gamma, mut sigma) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut attempts = 0usize;
    for i in 0..n {
        let mut accepted = false;
        for _ in 0..MAX_DRAWS_PER_STOCK {
            attempts += 1;
            let g = draw_strength(&mut rng, gamma_mean, width);
            let s = draw_strength(&mut rng, sigma_mean, width);
            if g * g + s * s <= 1.0 {
                gamma.push(g);
                sigma.push(s);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Infeasible(format!(
                "stock {i}: no feasible (gamma, sigma) in {MAX_DRAWS_PER_STOCK} draws"
            )));
        }
    }
    if n > 0 && (n as f64) < 0.01 * attempts as f64 {
        return Err(Error::Infeasible(format!(
            "rejection rate {:.3} exceeds 99% around gamma = {gamma_mean}, sigma = {sigma_mean}",
            1.0 - n as f64 / attempts as f64
        )));
    }
    FactorParams::from_strengths(sizes.to_vec(), gamma, sigma)
}

/// Market-free variant: `γ_i` drawn around `gamma_mean`, `σ_i = sqrt(1 - γ_i²)`.
pub fn sample_params_no_market(sizes: &[usize], gamma_mean: f64, width: f64, seed: u64) -> Result<FactorParams> {
    check_mean("gamma", gamma_mean)?;
    if !(width >= 0.0) {
        return Err(Error::Range(format!("width {width} must be >= 0")));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = rng::stream(seed, 0);
    let gamma: Vec<f64> = (0..n).map(|_| draw_strength(&mut rng, gamma_mean, width)).collect();
    let sigma = gamma.iter().map(|g| (1.0 - g * g).max(0.0).sqrt()).collect();
    FactorParams::new(sizes.to_vec(), vec![0.0; n], gamma, sigma)
}

fn gaussian_stream(seed: u64, id: u64, len: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, id);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Simulated unit-variance returns, one row per stock.
///
/// Stream ids: market 0, sector `k` at `1 + k`, stock `i` at `1 + K + i`.
pub fn simulate_returns(p: &FactorParams, t_len: usize, seed: u64) -> Result<ReturnMatrix> {
    if t_len < 2 {
        return Err(Error::Range(format!("series length {t_len} must be >= 2")));
    }
    let k = p.sizes.len() as u64;
    let market = gaussian_stream(seed, 0, t_len);
    let sectors: Vec<Vec<f64>> = (0..k).map(|j| gaussian_stream(seed, 1 + j, t_len)).collect();
    let rows: Vec<Vec<f64>> = (0..p.n_stocks())
        .into_par_iter()
        .map(|i| {
            let eta = gaussian_stream(seed, 1 + k + i as u64, t_len);
            let g = &sectors[p.sector_of[i]];
            (0..t_len)
                .map(|t| p.beta[i] * market[t] + p.gamma[i] * g[t] + p.sigma[i] * eta[t])
                .collect()
        })
        .collect();
    let values = Array2::from_shape_vec((p.n_stocks(), t_len), rows.concat())
        .expect("rows have equal length");
    ReturnMatrix::new(p.tickers(), values, 1)
}

/// Expected correlation matrix of the model.
pub fn population_matrix(p: &FactorParams) -> Array2<f64> {
    let n = p.n_stocks();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            1.0
        } else {
            let shared = if p.sector_of[i] == p.sector_of[j] {
                p.gamma[i] * p.gamma[j]
            } else {
                0.0
            };
            p.beta[i] * p.beta[j] + shared
        }
    })
}

/// Eigenvalues (descending) of [`population_matrix`].
pub fn population_spectrum(p: &FactorParams) -> Vec<f64> {
    symmetric_eigen(&population_matrix(p))
        .expect("population matrix is symmetric")
        .0
}

/// Closed-form spectrum given as `(eigenvalue, multiplicity)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub large: Vec<(f64, usize)>,
    pub small: Vec<(f64, usize)>,
}

impl AnalyticSpectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.large.iter().chain(&self.small).map(|&(_, m)| m).sum()
    }

    pub fn trace(&self) -> f64 {
        self.large.iter().chain(&self.small).map(|&(l, m)| l * m as f64).sum()
    }

    /// Every eigenvalue repeated by multiplicity, descending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .large
            .iter()
            .chain(&self.small)
            .flat_map(|&(l, m)| std::iter::repeat_n(l, m))
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Spectrum without a market factor and with one `γ` per sector: `K` values
/// `1 + (n_j - 1)γ_j²` and `1 - γ_j²` with multiplicity `n_j - 1` each.
pub fn analytic_spectrum_no_market(sizes: &[usize], gammas: &[f64]) -> Result<AnalyticSpectrum> {
    if sizes.len() != gammas.len() {
        return Err(Error::Validation("need one gamma per sector".into()));
    }
    let large = sizes
        .iter()
        .zip(gammas)
        .map(|(&n, &g)| (1.0 + (n as f64 - 1.0) * g * g, 1))
        .collect();
    let small = sizes
        .iter()
        .zip(gammas)
        .filter(|(&n, _)| n > 1)
        .map(|(&n, &g)| (1.0 - g * g, n - 1))
        .collect();
    Ok(AnalyticSpectrum { large, small })
}

/// Approximate extremes of the spectrum for uniform `β` and `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    /// `N β²`
    pub lambda0: f64,
    /// `n_l (1 - β²)`, `n_l` the largest sector
    pub lambda1: f64,
    /// `1 - β² - γ²`, the degenerate small eigenvalue
    pub bulk: f64,
    /// False when the market factor vanishes and the estimates do not apply.
    pub in_regime: bool,
}

pub fn analytic_extremes(beta: f64, gamma: f64, sizes: &[usize]) -> Extremes {
    let n: usize = sizes.iter().sum();
    let n_l = sizes.iter().copied().max().unwrap_or(0);
    let b2 = beta * beta;
    let in_regime = beta > 0.0;
    if !in_regime {
        warn!("beta = 0: market-mode estimates are outside their regime of validity");
    }
    Extremes {
        lambda0: n as f64 * b2,
        lambda1: n_l as f64 * (1.0 - b2),
        bulk: 1.0 - b2 - gamma * gamma,
        in_regime,
    }
}

/// Inputs to a `(γ, σ)` sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub width: f64,
    pub t_len: usize,
    pub seed: u64,
}

/// Measured spectrum extremes at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMeasurement {
    pub beta_sq_mean: f64,
    pub lambda0: f64,
    pub lambda1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub sigma: f64,
    /// `None` for infeasible grid points.
    pub result: Option<SweepMeasurement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSurface {
    /// Row-major over `gamma_grid` x `sigma_grid`.
    pub points: Vec<SweepPoint>,
}

impl SweepSurface {
    pub fn feasible(&self) -> impl Iterator<Item = (&SweepPoint, &SweepMeasurement)> {
        self.points.iter().filter_map(|p| p.result.as_ref().map(|r| (p, r)))
    }

    /// `gamma,sigma,beta_sq_mean,lambda0,lambda1` for feasible points.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["gamma", "sigma", "beta_sq_mean", "lambda0", "lambda1"])?;
        for (p, r) in self.feasible() {
            wtr.write_record([
                p.gamma.to_string(),
                p.sigma.to_string(),
                r.beta_sq_mean.to_string(),
                r.lambda0.to_string(),
                r.lambda1.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// `gamma,sigma,feasible` for every grid point.
    pub fn write_feasibility_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["gamma", "sigma", "feasible"])?;
        for p in &self.points {
            wtr.write_record([p.gamma.to_string(), p.sigma.to_string(), p.result.is_some().to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Largest two sample eigenvalues for one parameter draw.
pub fn measure_extremes(p: &FactorParams, t_len: usize, seed: u64) -> Result<SweepMeasurement> {
    let nr = normalize(&simulate_returns(p, t_len, seed)?)?;
    let c = correlation_matrix(&nr);
    let (values, _) = symmetric_eigen(c.entries())?;
    Ok(SweepMeasurement {
        beta_sq_mean: p.beta_sq_mean(),
        lambda0: values[0],
        lambda1: values.get(1).copied().unwrap_or(f64::NAN),
    })
}

/// Simulates every grid point; point `idx` draws its seeds from stream `idx`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepSurface> {
    let grid: Vec<(f64, f64)> = cfg
        .gamma_grid
        .iter()
        .flat_map(|&g| cfg.sigma_grid.iter().map(move |&s| (g, s)))
        .collect();
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &(gamma, sigma))| {
            let mut rng = rng::stream(cfg.seed, idx as u64);
            let (param_seed, sim_seed) = (rng.next_u64(), rng.next_u64());
            let result = if gamma * gamma + sigma * sigma > 1.0 {
                None
            } else {
                match sample_params(&cfg.sizes, gamma, sigma, cfg.width, param_seed) {
                    Ok(p) => Some(measure_extremes(&p, cfg.t_len, sim_seed)),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => Some(Err(e)),
                }
            };
            result.transpose().map(|result| SweepPoint { gamma, sigma, result })
        })
        .collect::<Result<_>>()?;
    if points.iter().all(|p| p.result.is_none()) {
        return Err(Error::Infeasible("no feasible (gamma, sigma) point in the grid".into()));
    }
    Ok(SweepSurface { points })
}

/// Rank correlations between measured extremes and the quantities that
/// drive them, over the feasible points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendSummary {
    pub feasible_points: usize,
    /// Spearman ρ of `λ₀` against `β̄²`.
    pub lambda0_vs_beta_sq: f64,
    /// Spearman ρ of `λ₁` against `1 - β̄²`.
    pub lambda1_vs_non_market: f64,
    /// Spearman ρ of `λ₁` against the mean sector strength.
    pub lambda1_vs_gamma: f64,
}

pub fn trend_summary(s: &SweepSurface) -> TrendSummary {
    let pts: Vec<_> = s.feasible().collect();
    let b2: Vec<f64> = pts.iter().map(|(_, m)| m.beta_sq_mean).collect();
    let l0: Vec<f64> = pts.iter().map(|(_, m)| m.lambda0).collect();
    let l1: Vec<f64> = pts.iter().map(|(_, m)| m.lambda1).collect();
    let rest: Vec<f64> = b2.iter().map(|b| 1.0 - b).collect();
    let gamma: Vec<f64> = pts.iter().map(|(p, _)| p.gamma).collect();
    TrendSummary {
        feasible_points: pts.len(),
        lambda0_vs_beta_sq: rank_correlation(&b2, &l0),
        lambda1_vs_non_market: rank_correlation(&rest, &l1),
        lambda1_vs_gamma: rank_correlation(&gamma, &l1),
    }
}

/// Mid-ranks, 1-based.
fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut pos = 0;
    for ties in order.chunk_by(|&a, &b| x[a] == x[b]) {
        let rank = pos as f64 + (ties.len() as f64 + 1.0) / 2.0;
        for &i in ties {
            ranks[i] = rank;
        }
        pos += ties.len();
    }
    ranks
}

/// Spearman rank correlation; NaN with fewer than two points or a constant input.
fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (mid_ranks(x), mid_ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Per-stock sample variances, population convention.
pub fn sample_variances(r: &ReturnMatrix) -> Array1<f64> {
    r.values().map_axis(ndarray::Axis(1), |row| {
        let m = row.mean().unwrap_or(0.0);
        row.iter().map(|x| (x - m).powi(2)).sum::<f64>() / row.len() as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fixed_width_params() {
        let p = sample_params(&[5, 5], 0.6, 0.6, 0.0, 1).unwrap();
        for &b in p.beta() {
            assert_abs_diff_eq!(b, 0.28f64.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(b, 0.5292, epsilon = 1e-4);
        }
        let noise = sample_params(&[3], 0.0, 1.0, 0.0, 1).unwrap();
        assert!(noise.beta().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn sampled_params_respect_constraint() {
        let p = sample_params(&[20; 10], 0.5, 0.6, 0.05, 9).unwrap();
        for i in 0..p.n_stocks() {
            let (b, g, s) = (p.beta()[i], p.gamma()[i], p.sigma()[i]);
            assert!((b * b + g * g + s * s - 1.0).abs() < 1e-12);
            assert!((0.475..=0.525).contains(&g) && (0.575..=0.625).contains(&s));
        }
        assert_eq!(p, sample_params(&[20; 10], 0.5, 0.6, 0.05, 9).unwrap());
        assert_ne!(p, sample_params(&[20; 10], 0.5, 0.6, 0.05, 10).unwrap());
    }

    #[test]
    fn infeasible_means() {
        assert!(matches!(sample_params(&[4], 0.9, 0.9, 0.05, 1), Err(Error::Infeasible(_))));
        // the window barely touches the feasible disc: far below 1% acceptance
        assert!(matches!(sample_params(&[50], 0.73, 0.73, 0.05, 1), Err(Error::Infeasible(_))));
        assert!(matches!(sample_params(&[4], 1.2, 0.0, 0.0, 1), Err(Error::Range(_))));
        // edge of the disc is still fine with rejection
        assert!(sample_params(&[40], 0.7, 0.7, 0.05, 1).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(FactorParams::new(vec![2], vec![0.5; 2], vec![0.5; 2], vec![0.5; 2]).is_err());
        assert!(FactorParams::new(vec![2, 0], vec![1.0; 2], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(FactorParams::uniform(vec![2], 0.9, 0.9).is_err());
        let p = FactorParams::no_market(vec![2, 3], &[0.3, 0.5]).unwrap();
        assert_eq!(p.sector_of(), [0, 0, 1, 1, 1]);
        assert_eq!(p.sector_map().sector("S004"), Some("G01"));
    }

    #[test]
    fn pure_market_is_rank_one() {
        let p = FactorParams::uniform(vec![5, 5], 0.0, 0.0).unwrap();
        let r = simulate_returns(&p, 100, 3).unwrap();
        for i in 1..10 {
            assert_eq!(r.values().row(i), r.values().row(0));
        }
        let c = correlation_matrix(&normalize(&r).unwrap());
        assert!(c.entries().iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn simulated_variance_near_one() {
        let p = sample_params(&[20; 10], 0.4, 0.5, 0.05, 2).unwrap();
        let r = simulate_returns(&p, 2000, 5).unwrap();
        assert!(sample_variances(&r).iter().all(|&v| (0.9..=1.1).contains(&v)));
        assert_eq!(r, simulate_returns(&p, 2000, 5).unwrap());
        assert!(simulate_returns(&p, 1, 5).is_err());
    }

    #[test]
    fn analytic_block_spectrum() {
        let a = analytic_spectrum_no_market(&[20], &[0.3]).unwrap();
        assert_abs_diff_eq!(a.large[0].0, 2.71, epsilon = 1e-12);
        assert_eq!(a.small, vec![(1.0 - 0.09, 19)]);
        assert_abs_diff_eq!(a.trace(), 20.0, epsilon = 1e-10);
        assert_eq!(a.total_multiplicity(), 20);

        let flat = analytic_spectrum_no_market(&[4, 6], &[0.0, 0.0]).unwrap();
        assert!(flat.expanded().iter().all(|&l| l == 1.0));
    }

    #[test]
    fn extremes_substitution() {
        let b = 0.4f64.sqrt();
        let e = analytic_extremes(b, 0.5, &[20; 10]);
        assert_abs_diff_eq!(e.lambda0, 80.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.lambda1, 12.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.bulk, 0.35, epsilon = 1e-12);
        assert!(e.in_regime);
        let z = analytic_extremes(0.0, 0.5, &[20; 10]);
        assert_eq!(z.lambda0, 0.0);
        assert!(!z.in_regime);
    }

    #[test]
    fn sweep_rank_one_corner() {
        let cfg = SweepConfig {
            sizes: vec![10, 10],
            gamma_grid: vec![0.0, 0.9],
            sigma_grid: vec![0.0, 0.9],
            width: 0.0,
            t_len: 200,
            seed: 4,
        };
        let s = sweep(&cfg).unwrap();
        assert_eq!(s.points.len(), 4);
        let corner = s.points[0].result.unwrap();
        assert_abs_diff_eq!(corner.lambda0, 20.0, epsilon = 1e-6);
        assert!(s.points[3].result.is_none());
        assert_eq!(s.feasible().count(), 3);
        assert_eq!(s, sweep(&cfg).unwrap());

        let none = SweepConfig {
            gamma_grid: vec![0.9],
            sigma_grid: vec![0.9],
            ..cfg
        };
        assert!(matches!(sweep(&none), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rank_correlation_cases() {
        assert_abs_diff_eq!(rank_correlation(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rank_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0, epsilon = 1e-15);
        // ties get mid-ranks: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3)
        assert_abs_diff_eq!(rank_correlation(&[5.0, 5.0, 9.0], &[1.0, 2.0, 3.0]), 0.75f64.sqrt(), epsilon = 1e-12);
        assert!(rank_correlation(&[1.0], &[1.0]).is_nan());
    }
}
