//! Flag value parsers. Each returns a plain message so clap reports it as a
//! usage error.

use std::path::PathBuf;

use clap::Args;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Period {
    pub start: String,
    pub end: String,
}

pub fn parse_period(s: &str) -> Result<Period, String> {
    let (start, end) = s.split_once(':').ok_or("expected START:END")?;
    if start.is_empty() || end.is_empty() {
        return Err("both period bounds are required".into());
    }
    Ok(Period {
        start: start.to_string(),
        end: end.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgSpec {
    Auto,
    Fixed(usize),
}

pub fn parse_ng(s: &str) -> Result<NgSpec, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(NgSpec::Auto);
    }
    s.parse().map(NgSpec::Fixed).map_err(|_| format!("expected a count or `auto`, got `{s}`"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

pub fn parse_thresholds(s: &str) -> Result<ThresholdSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err("expected LO:HI:N".into());
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    let points: usize = n.parse().map_err(|_| format!("bad point count `{n}`"))?;
    if !(lo.is_finite() && hi.is_finite()) || points == 0 || (points > 1 && !(hi > lo)) {
        return Err("need finite LO < HI and N >= 1".into());
    }
    Ok(ThresholdSpec { lo, hi, points })
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err("need finite LO < HI".into());
    }
    Ok((lo, hi))
}

/// Sector sizes given as one flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

/// Grid of strengths given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `20,20,10` or `KxN` for `K` sectors of `N` stocks.
pub fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let sizes: Vec<usize> = if let Some((k, n)) = s.split_once('x') {
        let k: usize = k.trim().parse().map_err(|_| format!("bad sector count `{k}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad sector size `{n}`"))?;
        vec![n; k]
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad sector size `{p}`")))
            .collect::<Result<_, _>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err("sector sizes must be positive".into());
    }
    Ok(Sizes(sizes))
}

/// `LO:HI:N` evenly spaced, or an explicit comma list.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    if s.contains(':') {
        let spec = parse_thresholds(s)?;
        return Ok(Grid(corrspec_core::network::linspace(spec.lo, spec.hi, spec.points)));
    }
    let values: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad grid value `{p}`")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(Grid(values))
}

pub fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character or `tab`, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Closing prices as `date,ticker,close` rows.
    #[arg(long)]
    pub prices: PathBuf,

    /// Sector labels as `ticker,sector` rows.
    #[arg(long)]
    pub sectors: Option<PathBuf>,

    /// Field delimiter of the input files (`tab` for tabs).
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,

    /// Inclusive date window `START:END`, compared as strings.
    #[arg(long, value_parser = parse_period)]
    pub period: Option<Period>,

    /// Return horizon in trading days.
    #[arg(long, default_value_t = 1)]
    pub dt: usize,

    /// Drop stocks whose returns never move instead of failing.
    #[arg(long)]
    pub drop_degenerate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Number of group modes, or `auto` to count eigenvalues above the random-matrix edge.
    #[arg(long, default_value = "auto", value_parser = parse_ng)]
    pub ng: NgSpec,

    /// Relative margin above the random-matrix edge used by `--ng auto`.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,

    /// Threshold grid `LO:HI:N`; defaults to 200 points across the group entries.
    #[arg(long, value_parser = parse_thresholds, allow_hyphen_values = true)]
    pub thresholds: Option<ThresholdSpec>,

    /// Count isolated nodes as clusters.
    #[arg(long)]
    pub count_singletons: bool,

    /// Histogram bin count.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,

    /// Histogram range `LO:HI`.
    #[arg(long, default_value = "-1:1", value_parser = parse_range, allow_hyphen_values = true)]
    pub range: (f64, f64),

    /// Also write the market, group and random matrices.
    #[arg(long)]
    pub export_decomposition: bool,
}
