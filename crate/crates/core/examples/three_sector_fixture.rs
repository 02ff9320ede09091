//! Writes a small synthetic market with three planted sectors:
//! `prices.csv` (`date,ticker,close`, a few cells left out) and `sectors.csv`.
//!
//! ```text
//! cargo run -p corrspec-core --example three_sector_fixture -- fixtures/three_sector
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use corrspec_core::factor_model::{simulate_returns, FactorParams};
use corrspec_core::ingest::{inject_missing, PriceTable};
use ndarray::Array2;

const SEED: u64 = 20010101;
const DAYS: usize = 1000;
const MISSING: usize = 8;

fn trading_days(start: NaiveDate, count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d.format("%Y-%m-%d").to_string());
        }
        d = d + Days::new(1);
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/three_sector".into()));
    fs::create_dir_all(&dir)?;

    let p = FactorParams::uniform(vec![10, 10, 10], 0.6, 0.5)?;
    let r = simulate_returns(&p, DAYS, SEED)?;
    let n = p.n_stocks();
    let mut prices = Array2::zeros((n, DAYS + 1));
    for i in 0..n {
        prices[[i, 0]] = 20.0 + 5.0 * i as f64;
        for j in 1..=DAYS {
            let step = 0.0002 + 0.015 * r.values()[[i, j - 1]];
            prices[[i, j]] = ((prices[[i, j - 1]] * f64::exp(step)) * 1e4_f64).round() / 1e4;
        }
    }
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date");
    let table = PriceTable::from_dense(p.tickers(), trading_days(start, DAYS + 1), prices)?;
    let table = inject_missing(&table, MISSING, SEED)?;

    let mut w = BufWriter::new(File::create(dir.join("prices.csv"))?);
    writeln!(w, "date,ticker,close")?;
    for (j, date) in table.dates().iter().enumerate() {
        for (i, ticker) in table.tickers().iter().enumerate() {
            if table.observed()[[i, j]] {
                writeln!(w, "{date},{ticker},{}", table.price(i, j).expect("observed"))?;
            }
        }
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("sectors.csv"))?);
    writeln!(w, "ticker,sector")?;
    for (ticker, sector) in p.sector_map().iter() {
        writeln!(w, "{ticker},{sector}")?;
    }
    w.flush()?;
    Ok(())
}
