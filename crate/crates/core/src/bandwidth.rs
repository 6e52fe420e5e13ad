//! Repair-traffic model for self-repairing codes, with erasure-code and
//! regenerating-code baselines.
//!
//! All quantities count fragments (one fragment = `B/k`).

use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{CodeParams, CodecError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandwidthError {
    #[error("n = {0} must be odd and of the form 2^j - 1")]
    BadLength(usize),
    #[error("x = {x} exceeds n = {n}")]
    TooManyAvailable { x: usize, n: usize },
    #[error("lazy threshold must satisfy k <= x_th <= n (k = {k}, x_th = {x_th}, n = {n})")]
    BadThreshold { k: usize, x_th: usize, n: usize },
    #[error("RGC repair infeasible: d = {d_contact} live nodes contacted, at least k = {k} required")]
    RgcInfeasible { d_contact: usize, k: usize },
    #[error("t_coop must be at least 1")]
    NoNewcomers,
    #[error("k = {k} must satisfy 1 <= k < n = {n}")]
    BadK { k: usize, n: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

fn check_length(n: usize) -> Result<(), BandwidthError> {
    if n < 3 || !(n + 1).is_power_of_two() {
        return Err(BandwidthError::BadLength(n));
    }
    Ok(())
}

fn check_k(n: usize, k: usize) -> Result<(), BandwidthError> {
    if k == 0 || k >= n {
        return Err(BandwidthError::BadK { k, n });
    }
    Ok(())
}

/// Mutually exclusive repair pairs per fragment, `(n-1)/2`.
pub fn diversity(n: usize) -> Result<usize, BandwidthError> {
    check_length(n)?;
    Ok((n - 1) / 2)
}

/// Probability that at least one of the `δ` pairs for a given fragment is
/// fully available, treating each pair member as present with probability
/// `x/n` independently.
pub fn pair_probability(x: usize, n: usize) -> Result<f64, BandwidthError> {
    let delta = diversity(n)?;
    if x > n {
        return Err(BandwidthError::TooManyAvailable { x, n });
    }
    let f = x as f64 / n as f64;
    Ok(1.0 - (1.0 - f * f).powi(delta as i32))
}

/// Downloads needed to rebuild one fragment. `exact` is false when the
/// value is only the upper bound `2·p_2 + k·(1-p_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownloadEstimate {
    pub value: f64,
    pub exact: bool,
}

pub fn expected_downloads(x: usize, n: usize, k: usize) -> Result<DownloadEstimate, BandwidthError> {
    check_length(n)?;
    check_k(n, k)?;
    if x > n {
        return Err(BandwidthError::TooManyAvailable { x, n });
    }
    if 2 * x > n {
        return Ok(DownloadEstimate { value: 2.0, exact: true });
    }
    let p2 = pair_probability(x, n)?;
    Ok(DownloadEstimate { value: 2.0 * p2 + k as f64 * (1.0 - p2), exact: false })
}

/// Total downloads to replace every missing fragment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateCosts {
    /// `(n-x)·D_x`, all repairs in parallel.
    pub parallel: f64,
    /// `Σ_{i=x}^{n} D_i`, one repair after another.
    pub sequential: f64,
    /// The same sum stopped at `n-1`, which skips the no-loss state.
    pub sequential_to_n_minus_1: f64,
    /// Both `parallel` and `sequential` are exact rather than bounds.
    pub exact: bool,
}

pub fn aggregate_costs(x: usize, n: usize, k: usize) -> Result<AggregateCosts, BandwidthError> {
    let dx = expected_downloads(x, n, k)?;
    let mut seq = 0.0;
    let mut seq_exact = true;
    let mut seq_short = 0.0;
    for i in x..=n {
        let di = expected_downloads(i, n, k)?;
        seq += di.value;
        if i < n {
            seq_short += di.value;
        }
        seq_exact &= di.exact;
    }
    Ok(AggregateCosts {
        parallel: (n - x) as f64 * dx.value,
        sequential: seq,
        sequential_to_n_minus_1: seq_short,
        exact: dx.exact && seq_exact,
    })
}

/// Eager SRC repair versus lazy erasure-code repair at threshold `x_th`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyTotals {
    /// `2(n - x_th)`
    pub eager: usize,
    /// `k + n - x_th - 1`
    pub ec_lazy: usize,
    /// `n + 1 - k`: thresholds at or above this favour pair repair.
    pub critical: usize,
}

impl StrategyTotals {
    pub fn eager_wins(&self) -> bool {
        self.eager <= self.ec_lazy
    }
}

pub fn strategy_totals(n: usize, k: usize, x_th: usize) -> Result<StrategyTotals, BandwidthError> {
    if k > x_th || x_th > n {
        return Err(BandwidthError::BadThreshold { k, x_th, n });
    }
    check_k(n, k)?;
    Ok(StrategyTotals {
        eager: 2 * (n - x_th),
        ec_lazy: k + n - x_th - 1,
        critical: n + 1 - k,
    })
}

/// A minimum-storage operating point of a (collaborative) regenerating code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgcPoint {
    /// Storage per node.
    pub alpha: f64,
    /// Download per contacted live node.
    pub beta: f64,
    /// Exchange between cooperating newcomers.
    pub beta_coop: f64,
    pub d_contact: usize,
    pub t_coop: usize,
}

impl RgcPoint {
    /// Traffic from live nodes for one repair, `d·β`.
    pub fn repair_bandwidth(&self) -> f64 {
        self.d_contact as f64 * self.beta
    }
}

/// `α = B/k`, `β = β' = B/(k(d-k+t))`; `t = 1` is the classical MSR point.
pub fn rgc_baselines(b: f64, k: usize, d_contact: usize, t_coop: usize) -> Result<RgcPoint, BandwidthError> {
    if d_contact < k {
        return Err(BandwidthError::RgcInfeasible { d_contact, k });
    }
    if t_coop == 0 {
        return Err(BandwidthError::NoNewcomers);
    }
    let kf = k as f64;
    let beta = b / (kf * (d_contact - k + t_coop) as f64);
    Ok(RgcPoint { alpha: b / kf, beta, beta_coop: beta, d_contact, t_coop })
}

/// Per-lost-fragment traffic at one lazy threshold, in units of `B/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficRow {
    pub x_th: usize,
    pub egr: f64,
    pub prl: f64,
    pub seq: f64,
    pub eclazy: f64,
    pub msrgc: Vec<f64>,
    /// `prl` and `seq` are exact values rather than upper bounds.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficTable {
    pub n: usize,
    pub k: usize,
    pub d_contacts: Vec<usize>,
    pub rows: Vec<TrafficRow>,
}

impl TrafficTable {
    pub fn csv_header(&self) -> String {
        let mut h = String::from("x_th,gamma_egr,gamma_prl,gamma_seq,gamma_eclazy");
        for d in &self.d_contacts {
            write!(h, ",gamma_msrgc_d{d}").unwrap();
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{},{},{},{}", r.x_th, fmt_f(r.egr), fmt_f(r.prl), fmt_f(r.seq), fmt_f(r.eclazy)).unwrap();
            for g in &r.msrgc {
                write!(out, ",{}", fmt_f(*g)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

/// Rows for `x_th = k..n-1`; `x_th = n` has nothing to repair.
pub fn traffic_table(n: usize, k: usize, d_contacts: &[usize]) -> Result<TrafficTable, BandwidthError> {
    check_length(n)?;
    check_k(n, k)?;
    let unit = 1.0;
    let points: Vec<RgcPoint> = d_contacts
        .iter()
        .map(|&d| rgc_baselines(k as f64 * unit, k, d, 1))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for x_th in k..n {
        let missing = (n - x_th) as f64;
        let agg = aggregate_costs(x_th, n, k)?;
        let totals = strategy_totals(n, k, x_th)?;
        rows.push(TrafficRow {
            x_th,
            egr: totals.eager as f64 / missing,
            prl: agg.parallel / missing,
            seq: agg.sequential / missing,
            eclazy: totals.ec_lazy as f64 / missing,
            msrgc: points.iter().map(|p| p.repair_bandwidth() / unit).collect(),
            exact: agg.exact,
        });
    }
    Ok(TrafficTable { n, k, d_contacts: d_contacts.to_vec(), rows })
}

/// Exact fraction of availability patterns (of `x` live fragments among
/// the others) in which a given missing fragment has a live repair pair.
/// Enumerates all patterns, so it is meant for `n <= 15`-sized codes.
pub fn exact_pair_probability(code: &CodeParams, target: usize, x: usize) -> Result<f64, BandwidthError> {
    let n = code.n();
    if x > n - 1 {
        return Err(BandwidthError::TooManyAvailable { x, n: n - 1 });
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    let pairs = code.repair_pairs(target, &others)?;
    // Bit positions over `others`.
    let pos = |i: usize| if i < target { i } else { i - 1 };
    let masks: Vec<u32> = pairs.iter().map(|p| (1u32 << pos(p.beta)) | (1u32 << pos(p.gamma))).collect();
    let m = others.len() as u32;
    assert!(m < 32, "exhaustive pattern enumeration needs fewer than 32 other fragments");
    let (mut hit, mut total) = (0u64, 0u64);
    for pattern in 0u32..(1u32 << m) {
        if pattern.count_ones() as usize != x {
            continue;
        }
        total += 1;
        if masks.iter().any(|&mk| mk & !pattern == 0) {
            hit += 1;
        }
    }
    Ok(hit as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diversity_values() {
        assert_eq!(diversity(7).unwrap(), 3);
        assert_eq!(diversity(15).unwrap(), 7);
        assert_eq!(diversity(63).unwrap(), 31);
        assert_eq!(diversity(8).unwrap_err(), BandwidthError::BadLength(8));
        assert_eq!(diversity(9).unwrap_err(), BandwidthError::BadLength(9));
    }

    #[test]
    fn downloads() {
        assert_eq!(expected_downloads(15, 15, 3).unwrap(), DownloadEstimate { value: 2.0, exact: true });
        assert_eq!(expected_downloads(8, 15, 3).unwrap(), DownloadEstimate { value: 2.0, exact: true });
        let d = expected_downloads(5, 15, 3).unwrap();
        let p2 = 1.0 - (1.0 - (1.0f64 / 3.0).powi(2)).powi(7);
        assert!(!d.exact);
        assert!((d.value - (2.0 * p2 + 3.0 * (1.0 - p2))).abs() < 1e-15);
    }

    #[test]
    fn aggregates() {
        let a = aggregate_costs(15, 15, 3).unwrap();
        assert_eq!(a.parallel, 0.0);
        assert_eq!(a.sequential, 2.0);
        assert_eq!(a.sequential_to_n_minus_1, 0.0);
        let a = aggregate_costs(8, 15, 3).unwrap();
        assert_eq!(a.parallel, 14.0);
        assert!(a.exact);
        for x in 8..=15 {
            assert_eq!(aggregate_costs(x, 15, 3).unwrap().parallel, 2.0 * (15 - x) as f64);
        }
    }

    #[test]
    fn strategies() {
        let s = strategy_totals(15, 3, 8).unwrap();
        assert_eq!(s, StrategyTotals { eager: 14, ec_lazy: 9, critical: 13 });
        assert_eq!(strategy_totals(15, 3, 15).unwrap().eager, 0);
        assert!(strategy_totals(15, 3, 2).is_err());
    }

    #[test]
    fn rgc_points() {
        let p = rgc_baselines(90.0, 3, 3, 1).unwrap();
        assert_eq!(p.beta, 30.0);
        let p = rgc_baselines(90.0, 3, 5, 1).unwrap();
        assert_eq!(p.beta, 10.0);
        assert_eq!(p.alpha, 30.0);
        assert_eq!(
            rgc_baselines(90.0, 3, 2, 1).unwrap_err(),
            BandwidthError::RgcInfeasible { d_contact: 2, k: 3 }
        );
        let coop = rgc_baselines(90.0, 3, 5, 3).unwrap();
        assert_eq!(coop.beta, coop.beta_coop);
        assert_eq!(coop.beta, 90.0 / (3.0 * 5.0));
    }

    #[test]
    fn traffic_shape() {
        let t = traffic_table(15, 3, &[3, 5]).unwrap();
        assert_eq!(t.rows.first().unwrap().x_th, 3);
        assert_eq!(t.rows.last().unwrap().x_th, 14);
        for r in &t.rows {
            assert_eq!(r.egr, 2.0);
            assert_eq!(r.msrgc[0], 3.0);
            assert!((r.msrgc[1] - 5.0 / 3.0).abs() < 1e-12);
            if r.x_th >= 8 {
                assert_eq!(r.prl, 2.0);
            }
        }
        let at_critical = t.rows.iter().find(|r| r.x_th == 13).unwrap();
        assert_eq!(at_critical.eclazy, 2.0);
        let csv = t.to_csv();
        assert!(csv.starts_with("x_th,gamma_egr,gamma_prl,gamma_seq,gamma_eclazy,gamma_msrgc_d3,gamma_msrgc_d5\n"));
    }

    #[test]
    fn exact_oracle_brackets_the_approximation() {
        let code = CodeParams::new(2, 3, 12, 15).unwrap();
        for x in 8..=14 {
            assert_eq!(exact_pair_probability(&code, 0, x).unwrap(), 1.0);
        }
        assert_eq!(exact_pair_probability(&code, 0, 0).unwrap(), 0.0);
        assert_eq!(exact_pair_probability(&code, 0, 1).unwrap(), 0.0);
        let p = exact_pair_probability(&code, 0, 5).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}
