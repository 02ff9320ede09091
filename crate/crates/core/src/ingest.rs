//! Loading and cleaning daily closing prices.
//!
//! A [`PriceTable`] keeps the raw grid and an explicit observation mask side
//! by side. Cells that were never reported hold `None` until
//! [`forward_fill`] carries the previous close into them; the mask keeps
//! recording which cells were actually reported.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use ndarray::{Array2, Axis};
use rand::seq::index;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng;

/// One `(date, ticker, close)` observation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PriceRecord {
    pub date: String,
    pub ticker: String,
    pub close: f64,
}

impl PriceRecord {
    pub fn new(date: impl Into<String>, ticker: impl Into<String>, close: f64) -> Self {
        Self {
            date: date.into(),
            ticker: ticker.into(),
            close,
        }
    }
}

/// Closing prices for `N` stocks over `T_raw` trading days.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    tickers: Vec<String>,
    dates: Vec<String>,
    prices: Array2<Option<f64>>,
    observed: Array2<bool>,
}

impl PriceTable {
    /// Builds a table, checking every structural invariant.
    pub fn new(
        tickers: Vec<String>,
        dates: Vec<String>,
        prices: Array2<Option<f64>>,
        observed: Array2<bool>,
    ) -> Result<Self> {
        let shape = (tickers.len(), dates.len());
        if prices.dim() != shape || observed.dim() != shape {
            return Err(Error::Validation(format!(
                "grid shape {:?} / mask shape {:?} do not match {} tickers x {} dates",
                prices.dim(),
                observed.dim(),
                shape.0,
                shape.1
            )));
        }
        let mut seen = HashSet::with_capacity(tickers.len());
        for t in &tickers {
            if !seen.insert(t.as_str()) {
                return Err(Error::Validation(format!("duplicate ticker {t}")));
            }
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "dates not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        for ((i, j), cell) in prices.indexed_iter() {
            if observed[[i, j]] && cell.is_none() {
                return Err(Error::Validation(format!(
                    "{} on {} is marked observed but has no price",
                    tickers[i], dates[j]
                )));
            }
            if let Some(p) = *cell {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidPrice {
                        ticker: tickers[i].clone(),
                        date: dates[j].clone(),
                        value: p,
                    });
                }
            }
        }
        Ok(Self {
            tickers,
            dates,
            prices,
            observed,
        })
    }

    /// Fully observed table from a dense `N x T` grid.
    pub fn from_dense(tickers: Vec<String>, dates: Vec<String>, prices: Array2<f64>) -> Result<Self> {
        let observed = Array2::from_elem(prices.dim(), true);
        Self::new(tickers, dates, prices.mapv(Some), observed)
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn prices(&self) -> &Array2<Option<f64>> {
        &self.prices
    }

    pub fn observed(&self) -> &Array2<bool> {
        &self.observed
    }

    pub fn price(&self, stock: usize, day: usize) -> Option<f64> {
        self.prices[[stock, day]]
    }

    /// True when every cell carries a price (observed or filled).
    pub fn is_complete(&self) -> bool {
        self.prices.iter().all(Option::is_some)
    }

    pub fn is_fully_observed(&self) -> bool {
        self.observed.iter().all(|&o| o)
    }

    pub fn unobserved_count(&self) -> usize {
        self.observed.iter().filter(|&&o| !o).count()
    }

    /// Dense price grid; fails if any cell is still missing.
    pub fn dense_prices(&self) -> Result<Array2<f64>> {
        if !self.is_complete() {
            return Err(Error::MissingData);
        }
        Ok(self.prices.mapv(|p| p.unwrap_or(f64::NAN)))
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            tickers: rows.iter().map(|&i| self.tickers[i].clone()).collect(),
            dates: self.dates.clone(),
            prices: self.prices.select(Axis(0), rows),
            observed: self.observed.select(Axis(0), rows),
        }
    }

    fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            tickers: self.tickers.clone(),
            dates: cols.iter().map(|&j| self.dates[j].clone()).collect(),
            prices: self.prices.select(Axis(1), cols),
            observed: self.observed.select(Axis(1), cols),
        }
    }
}

/// Assembles the grid over the union of dates and tickers.
///
/// Tickers keep their order of first appearance; dates are sorted ascending.
pub fn parse_price_table<I>(records: I) -> Result<PriceTable>
where
    I: IntoIterator<Item = PriceRecord>,
{
    let mut tickers: Vec<String> = Vec::new();
    let mut ticker_index: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, String), f64> = HashMap::new();
    let mut date_set: HashSet<String> = HashSet::new();

    for rec in records {
        if !(rec.close.is_finite() && rec.close > 0.0) {
            return Err(Error::InvalidPrice {
                ticker: rec.ticker,
                date: rec.date,
                value: rec.close,
            });
        }
        let next = tickers.len();
        let i = *ticker_index.entry(rec.ticker.clone()).or_insert_with(|| {
            tickers.push(rec.ticker.clone());
            next
        });
        date_set.insert(rec.date.clone());
        if cells.insert((i, rec.date.clone()), rec.close).is_some() {
            return Err(Error::Duplicate {
                ticker: rec.ticker,
                date: rec.date,
            });
        }
    }

    if date_set.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 distinct dates, found {}",
            date_set.len()
        )));
    }
    let mut dates: Vec<String> = date_set.into_iter().collect();
    dates.sort();
    let date_index: HashMap<&str, usize> =
        dates.iter().enumerate().map(|(j, d)| (d.as_str(), j)).collect();

    let mut prices = Array2::from_elem((tickers.len(), dates.len()), None);
    let mut observed = Array2::from_elem((tickers.len(), dates.len()), false);
    for ((i, date), close) in cells {
        let j = date_index[date.as_str()];
        prices[[i, j]] = Some(close);
        observed[[i, j]] = true;
    }
    PriceTable::new(tickers, dates, prices, observed)
}

/// Reads `date,ticker,close` delimited text.
///
/// Row indices in parse errors are 0-based data rows (the header is not counted).
pub fn read_price_table<R: Read>(reader: R, delimiter: u8) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(rdr.headers()?, &["date", "ticker", "close"])?;
    let mut records = Vec::new();
    for (row, rec) in rdr.deserialize::<PriceRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    parse_price_table(records)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = found.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            row: 0,
            message: format!("expected header {}, found {}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Carries the last known price forward into every unobserved cell.
pub fn forward_fill(table: &PriceTable) -> Result<PriceTable> {
    let mut out = table.clone();
    for (i, mut row) in out.prices.rows_mut().into_iter().enumerate() {
        let mut last = match row[0] {
            Some(p) if table.observed[[i, 0]] => p,
            _ => return Err(Error::LeadingGap(table.tickers[i].clone())),
        };
        for (j, cell) in row.iter_mut().enumerate().skip(1) {
            if table.observed[[i, j]] {
                last = cell.expect("observed cell has a price");
            } else {
                *cell = Some(last);
            }
        }
    }
    Ok(out)
}

/// Replaces `count` randomly chosen cells with the previous day's price and
/// marks them unobserved, mimicking days without trades.
///
/// Cells are drawn uniformly without replacement from every column except the
/// first. They are rewritten left to right within each row, so a run of
/// injected cells all carry the last genuinely observed price.
pub fn inject_missing(table: &PriceTable, count: usize, seed: u64) -> Result<PriceTable> {
    if !table.is_fully_observed() {
        return Err(Error::Validation(
            "missing-data injection needs a fully observed table".into(),
        ));
    }
    let width = table.n_dates() - 1;
    let eligible = table.n_stocks() * width;
    if count > eligible {
        return Err(Error::Range(format!(
            "cannot inject {count} missing cells; only {eligible} eligible"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let mut picked: Vec<usize> = index::sample(&mut rng, eligible, count).into_vec();
    picked.sort_unstable();

    let mut out = table.clone();
    for flat in picked {
        let (i, j) = (flat / width, 1 + flat % width);
        out.prices[[i, j]] = out.prices[[i, j - 1]];
        out.observed[[i, j]] = false;
    }
    Ok(out)
}

/// Uniformly random `n`-subset of stocks, kept in their original order.
pub fn sample_universe(table: &PriceTable, n: usize, seed: u64) -> Result<PriceTable> {
    let total = table.n_stocks();
    if n > total {
        return Err(Error::Range(format!(
            "cannot sample {n} stocks from a universe of {total}"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let mut rows = index::sample(&mut rng, total, n).into_vec();
    rows.sort_unstable();
    Ok(table.select_rows(&rows))
}

/// Keeps the columns whose date label lies in `[start, end]`.
pub fn slice_period(table: &PriceTable, start: &str, end: &str) -> Result<PriceTable> {
    if start > end {
        return Err(Error::Range(format!("period start {start} is after end {end}")));
    }
    let cols: Vec<usize> = table
        .dates
        .iter()
        .enumerate()
        .filter(|(_, d)| d.as_str() >= start && d.as_str() <= end)
        .map(|(j, _)| j)
        .collect();
    if cols.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "period {start}:{end} contains {} trading day(s), need at least 2",
            cols.len()
        )));
    }
    Ok(table.select_columns(&cols))
}

/// Ticker to business-sector assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectorMap {
    assignments: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct SectorRecord {
    ticker: String,
    sector: String,
}

impl SectorMap {
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut assignments = BTreeMap::new();
        for (t, s) in pairs {
            let t = t.into();
            if assignments.insert(t.clone(), s.into()).is_some() {
                return Err(Error::Validation(format!("ticker {t} assigned twice")));
            }
        }
        Ok(Self { assignments })
    }

    /// Puts every ticker in one sector.
    pub fn uniform(tickers: &[String], label: &str) -> Self {
        Self {
            assignments: tickers.iter().map(|t| (t.clone(), label.to_string())).collect(),
        }
    }

    pub fn sector(&self, ticker: &str) -> Option<&str> {
        self.assignments.get(ticker).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments.iter().map(|(t, s)| (t.as_str(), s.as_str()))
    }

    /// Fails unless every ticker has a sector.
    pub fn check_covers(&self, tickers: &[String]) -> Result<()> {
        match tickers.iter().find(|t| !self.assignments.contains_key(*t)) {
            Some(t) => Err(Error::Validation(format!("ticker {t} has no sector"))),
            None => Ok(()),
        }
    }
}

/// Reads `ticker,sector` delimited text.
pub fn read_sector_map<R: Read>(reader: R, delimiter: u8) -> Result<SectorMap> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(rdr.headers()?, &["ticker", "sector"])?;
    let mut pairs = Vec::new();
    for (row, rec) in rdr.deserialize::<SectorRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        pairs.push((rec.ticker, rec.sector));
    }
    SectorMap::from_pairs(pairs)
}
