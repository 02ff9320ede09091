//! Threshold networks on the group correlation matrix.
//!
//! Stocks `i` and `j` are linked when `C^group_ij > c_th`. The threshold `c*`
//! is picked where the network splits into the largest number of isolated
//! clusters.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::Array2;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::correlation::upper_triangle;
use crate::error::{Error, Result};
use crate::ingest::SectorMap;

/// Symmetric boolean adjacency with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    tickers: Vec<String>,
    edges: Array2<bool>,
}

impl AdjacencyMatrix {
    pub fn new(tickers: Vec<String>, edges: Array2<bool>) -> Result<Self> {
        let n = tickers.len();
        if edges.dim() != (n, n) {
            return Err(Error::Validation(format!("adjacency is {:?}, expected {n}x{n}", edges.dim())));
        }
        for i in 0..n {
            if edges[[i, i]] {
                return Err(Error::Validation(format!("self-loop at node {i}")));
            }
            for j in 0..i {
                if edges[[i, j]] != edges[[j, i]] {
                    return Err(Error::Validation(format!("asymmetric edge ({i},{j})")));
                }
            }
        }
        Ok(Self { tickers, edges })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn edges(&self) -> &Array2<bool> {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges[[i, j]]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.row(i).iter().filter(|&&e| e).count()
    }

    /// Nodes with at least one link.
    pub fn linked_nodes(&self) -> usize {
        (0..self.n()).filter(|&i| self.degree(i) > 0).count()
    }
}

fn check_symmetric(m: &Array2<f64>) -> Result<()> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::Validation(format!("group matrix is {r}x{c}, not square")));
    }
    for i in 0..r {
        for j in 0..i {
            if (m[[i, j]] - m[[j, i]]).abs() > 1e-9 {
                return Err(Error::Validation(format!("group matrix not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// `A_ij = (i != j) && group_ij > c_th`.
pub fn threshold_adjacency(tickers: &[String], group: &Array2<f64>, c_th: f64) -> Result<AdjacencyMatrix> {
    check_symmetric(group)?;
    if group.nrows() != tickers.len() {
        return Err(Error::Validation(format!(
            "{} tickers for a {}x{} matrix",
            tickers.len(),
            group.nrows(),
            group.ncols()
        )));
    }
    Ok(link(tickers, group, c_th))
}

fn link(tickers: &[String], group: &Array2<f64>, c_th: f64) -> AdjacencyMatrix {
    let n = tickers.len();
    let mut edges = Array2::from_elem((n, n), false);
    for i in 0..n {
        for j in i + 1..n {
            if group[[i, j]] > c_th {
                edges[[i, j]] = true;
                edges[[j, i]] = true;
            }
        }
    }
    AdjacencyMatrix {
        tickers: tickers.to_vec(),
        edges,
    }
}

/// All connected components, singletons included.
///
/// Each component is sorted ascending; components are ordered by their
/// smallest member.
pub fn connected_components(a: &AdjacencyMatrix) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if a.edges[[i, j]] {
                uf.union(i, j);
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first_of_root: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = uf.find(i);
        let key = *first_of_root[root].get_or_insert(i);
        by_root.entry(key).or_default().push(i);
    }
    by_root.into_values().collect()
}

/// Counts components, treating singletons as clusters only when asked.
pub fn count_clusters(components: &[Vec<usize>], count_singletons: bool) -> usize {
    components
        .iter()
        .filter(|c| count_singletons || c.len() >= 2)
        .count()
}

/// Network statistics across a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterScan {
    pub thresholds: Vec<f64>,
    pub cluster_counts: Vec<usize>,
    pub node_counts: Vec<usize>,
    pub edge_counts: Vec<usize>,
}

impl ClusterScan {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// `c_th,clusters,nodes,edges` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["c_th", "clusters", "nodes", "edges"])?;
        for k in 0..self.len() {
            wtr.write_record([
                self.thresholds[k].to_string(),
                self.cluster_counts[k].to_string(),
                self.node_counts[k].to_string(),
                self.edge_counts[k].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn cluster_scan(group: &Array2<f64>, thresholds: &[f64], count_singletons: bool) -> Result<ClusterScan> {
    if thresholds.is_empty() {
        return Err(Error::Range("threshold list is empty".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Range("thresholds must be strictly ascending".into()));
    }
    check_symmetric(group)?;
    let tickers: Vec<String> = (0..group.nrows()).map(|i| i.to_string()).collect();
    let rows: Vec<(usize, usize, usize)> = thresholds
        .par_iter()
        .map(|&c| {
            let a = link(&tickers, group, c);
            let comps = connected_components(&a);
            (count_clusters(&comps, count_singletons), a.linked_nodes(), a.edge_count())
        })
        .collect();
    Ok(ClusterScan {
        thresholds: thresholds.to_vec(),
        cluster_counts: rows.iter().map(|r| r.0).collect(),
        node_counts: rows.iter().map(|r| r.1).collect(),
        edge_counts: rows.iter().map(|r| r.2).collect(),
    })
}

/// `points` evenly spaced thresholds across `[min, max]` of the off-diagonal entries.
pub fn default_thresholds(group: &Array2<f64>, points: usize) -> Vec<f64> {
    let upper = upper_triangle(group);
    let lo = upper.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if upper.is_empty() {
        return vec![0.0];
    }
    linspace(lo, hi, points)
}

/// `points` evenly spaced values from `lo` to `hi` inclusive; collapses to
/// one value when the interval is empty.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || !(hi > lo) {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| if k + 1 == points { hi } else { lo + step * k as f64 }).collect()
}

/// Threshold with the most clusters; ties go to the smallest threshold.
pub fn select_threshold(scan: &ClusterScan) -> Option<f64> {
    let mut best: Option<(usize, f64)> = None;
    for (&c, &count) in scan.thresholds.iter().zip(&scan.cluster_counts) {
        if best.is_none_or(|(b, _)| count > b) {
            best = Some((count, c));
        }
    }
    best.map(|(_, c)| c)
}

/// Composition of one multi-node cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub id: usize,
    pub members: Vec<String>,
    pub edges: usize,
    pub sectors: BTreeMap<String, usize>,
    pub dominant_sector: String,
    /// Share of members belonging to the dominant sector.
    pub purity: f64,
}

impl ClusterReport {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Reports every cluster with at least two nodes.
pub fn network_report(a: &AdjacencyMatrix, sectors: &SectorMap) -> Result<Vec<ClusterReport>> {
    sectors.check_covers(&a.tickers)?;
    let comps = connected_components(a);
    let mut out = Vec::new();
    for comp in comps.into_iter().filter(|c| c.len() >= 2) {
        let mut hist: BTreeMap<String, usize> = BTreeMap::new();
        for &i in &comp {
            *hist.entry(sectors.sector(&a.tickers[i]).unwrap_or_default().to_string()).or_default() += 1;
        }
        let (dominant, top) = hist
            .iter()
            .fold(("", 0), |acc, (s, &c)| if c > acc.1 { (s.as_str(), c) } else { acc });
        let edges = comp
            .iter()
            .enumerate()
            .map(|(k, &i)| comp[k + 1..].iter().filter(|&&j| a.edges[[i, j]]).count())
            .sum();
        out.push(ClusterReport {
            id: out.len(),
            members: comp.iter().map(|&i| a.tickers[i].clone()).collect(),
            edges,
            dominant_sector: dominant.to_string(),
            purity: top as f64 / comp.len() as f64,
            sectors: hist,
        });
    }
    Ok(out)
}

/// `cluster,size,edges,dominant_sector,purity,sector_counts,members` rows;
/// the last two fields are `;`-separated lists.
pub fn write_cluster_report<W: Write>(reports: &[ClusterReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["cluster", "size", "edges", "dominant_sector", "purity", "sector_counts", "members"])?;
    for r in reports {
        let counts: Vec<String> = r.sectors.iter().map(|(s, c)| format!("{s}={c}")).collect();
        wtr.write_record([
            r.id.to_string(),
            r.size().to_string(),
            r.edges.to_string(),
            r.dominant_sector.clone(),
            r.purity.to_string(),
            counts.join(";"),
            r.members.join(";"),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `ticker_a,ticker_b,weight` for every link, weight being the group entry.
pub fn write_edge_list<W: Write>(a: &AdjacencyMatrix, group: &Array2<f64>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["ticker_a", "ticker_b", "weight"])?;
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            if a.edges[[i, j]] {
                wtr.write_record([a.tickers[i].clone(), a.tickers[j].clone(), group[[i, j]].to_string()])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}
