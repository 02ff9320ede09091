//! Log returns and per-stock standardisation.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::ingest::PriceTable;

/// Log returns over a fixed horizon, one row per stock.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    tickers: Vec<String>,
    values: Array2<f64>,
    dt: usize,
}

impl ReturnMatrix {
    pub fn new(tickers: Vec<String>, values: Array2<f64>, dt: usize) -> Result<Self> {
        if values.nrows() != tickers.len() {
            return Err(Error::Validation(format!(
                "{} tickers but {} return rows",
                tickers.len(),
                values.nrows()
            )));
        }
        if let Some(((i, t), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite return {v} for {} at column {t}",
                tickers[i]
            )));
        }
        Ok(Self { tickers, values, dt })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn dt(&self) -> usize {
        self.dt
    }

    pub fn n_stocks(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }
}

/// Returns standardised to zero mean and unit (population) variance per stock.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedReturns {
    tickers: Vec<String>,
    values: Array2<f64>,
    means: Array1<f64>,
    sigmas: Array1<f64>,
}

impl NormalizedReturns {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn means(&self) -> &Array1<f64> {
        &self.means
    }

    pub fn sigmas(&self) -> &Array1<f64> {
        &self.sigmas
    }

    pub fn n_stocks(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    /// Same series with rows replaced; used by the shuffled surrogate, which
    /// permutes within rows and so keeps every row's moments.
    pub(crate) fn with_values(&self, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), self.values.dim());
        Self {
            values,
            ..self.clone()
        }
    }
}

/// `R_i(t) = ln P_i(t + dt) - ln P_i(t)` for every stock.
pub fn log_returns(table: &PriceTable, dt: usize) -> Result<ReturnMatrix> {
    let prices = table.dense_prices()?;
    let n_dates = table.n_dates();
    if dt == 0 || dt >= n_dates {
        return Err(Error::Range(format!(
            "return horizon {dt} must be in 1..{n_dates}"
        )));
    }
    let logs = prices.mapv(f64::ln);
    let len = n_dates - dt;
    let values = Array2::from_shape_fn((table.n_stocks(), len), |(i, t)| {
        logs[[i, t + dt]] - logs[[i, t]]
    });
    ReturnMatrix::new(table.tickers().to_vec(), values, dt)
}

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Two-pass population moments; `None` when the series is constant.
fn moments(series: &[f64]) -> Option<(f64, f64)> {
    let m = mean(series);
    let var = series.iter().map(|x| (x - m).powi(2)).sum::<f64>() / series.len() as f64;
    let sigma = var.sqrt();
    let scale = series.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (sigma > 64.0 * f64::EPSILON * scale).then_some((m, sigma))
}

/// Standard deviation `sqrt(<R^2> - <R>^2)` with plain time averages (divisor `T`).
pub fn volatility(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "volatility needs at least 2 returns, got {}",
            series.len()
        )));
    }
    moments(series)
        .map(|(_, s)| s)
        .ok_or(Error::ZeroVolatility { ticker: None })
}

/// `r_i(t) = (R_i(t) - <R_i>) / sigma_i`.
pub fn normalize(returns: &ReturnMatrix) -> Result<NormalizedReturns> {
    if returns.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "normalisation needs at least 2 returns per stock, got {}",
            returns.len()
        )));
    }
    let n = returns.n_stocks();
    let mut values = returns.values.clone();
    let mut means = Array1::zeros(n);
    let mut sigmas = Array1::zeros(n);
    for (i, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
        let series = row.as_slice().expect("standard layout");
        let (m, s) = moments(series).ok_or_else(|| Error::ZeroVolatility {
            ticker: Some(returns.tickers[i].clone()),
        })?;
        row.mapv_inplace(|x| (x - m) / s);
        means[i] = m;
        sigmas[i] = s;
    }
    Ok(NormalizedReturns {
        tickers: returns.tickers.clone(),
        values,
        means,
        sigmas,
    })
}

/// Removes zero-variance stocks, returning the kept matrix and the dropped tickers.
pub fn drop_degenerate(returns: &ReturnMatrix) -> (ReturnMatrix, Vec<String>) {
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (i, row) in returns.values.axis_iter(Axis(0)).enumerate() {
        match moments(row.as_slice().expect("standard layout")) {
            Some(_) => keep.push(i),
            None => dropped.push(returns.tickers[i].clone()),
        }
    }
    let kept = ReturnMatrix {
        tickers: keep.iter().map(|&i| returns.tickers[i].clone()).collect(),
        values: returns.values.select(Axis(0), &keep),
        dt: returns.dt,
    };
    (kept, dropped)
}
