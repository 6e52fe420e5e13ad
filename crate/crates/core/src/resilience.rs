//! Static resilience: how likely an object stays decodable when nodes fail
//! independently and nothing is repaired.
//!
//! A surviving set of `x` fragments is decodable iff its evaluation points
//! have `F_q`-rank at least `k`. [`RankTable`] counts, exactly, the ordered
//! `x`-row selections of the full `(q^d - 1) × d` matrix of nonzero vectors
//! that have each rank `r`; normalizing gives the fraction `ρ(x,d,r)`.

use std::thread;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::galois::{Elem, Field, GaloisError};

/// Tables beyond this many rows are refused.
pub const MAX_TABLE_ROWS: u64 = 1 << 20;

/// Monte Carlo work is split into this many independently seeded shards,
/// whatever the thread count, so results depend only on the seed.
pub const MC_SHARDS: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResilienceError {
    #[error("q = {q} is not a power of two")]
    BadFieldSize { q: u64 },
    #[error("n = {n} is not of the form q^e - 1 for q = {q}")]
    BadLength { n: usize, q: u64 },
    #[error("q^d - 1 rows exceed the supported table size (q = {q}, d = {d})")]
    TableTooLarge { q: u64, d: usize },
    #[error("p_node = {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("k = {k} must satisfy 1 <= k <= n = {n}")]
    BadK { k: usize, n: usize },
    #[error(transparent)]
    Field(#[from] GaloisError),
}

/// Exact counts `R(x,d,r)` for one `(q, d)`.
#[derive(Debug, Clone)]
pub struct RankTable {
    q: u64,
    d: usize,
    rows: u64,
    // counts[x][r], r in 0..=d
    counts: Vec<Vec<BigUint>>,
}

impl RankTable {
    /// Fills the table bottom-up in `x`.
    pub fn new(q: u64, d: usize) -> Result<Self, ResilienceError> {
        if q < 2 || !q.is_power_of_two() {
            return Err(ResilienceError::BadFieldSize { q });
        }
        let bits = q.trailing_zeros() as u64 * d as u64;
        if d == 0 || bits > 20 || (1u64 << bits) - 1 > MAX_TABLE_ROWS {
            return Err(ResilienceError::TableTooLarge { q, d });
        }
        let rows = (1u64 << bits) - 1;
        let qd = BigUint::from(rows + 1);
        let qpow: Vec<BigUint> = (0..=d as u32).map(|i| BigUint::from(q).pow(i)).collect();
        let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(rows as usize + 1);
        let mut row0 = vec![BigUint::zero(); d + 1];
        row0[0] = BigUint::one();
        counts.push(row0);
        for x in 1..=rows as usize {
            let prev = &counts[x - 1];
            let mut cur = vec![BigUint::zero(); d + 1];
            for r in 1..=d.min(x) {
                // rows independent of a rank-(r-1) prefix: q^d - q^(r-1)
                let mut v = &prev[r - 1] * (&qd - &qpow[r - 1]);
                if r < x {
                    // rows inside the span not yet used: q^r - 1 - (x-1)
                    let span = &qpow[r];
                    let xb = BigUint::from(x);
                    if *span > xb {
                        v += &prev[r] * (span - xb);
                    }
                }
                cur[r] = v;
            }
            counts.push(cur);
        }
        Ok(RankTable { q, d, rows, counts })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of rows of the full matrix, `q^d - 1`.
    pub fn rows(&self) -> u64 {
        self.rows
    }

    /// `R(x,d,r)`; zero outside the table.
    pub fn count(&self, x: u64, r: usize) -> BigUint {
        if x > self.rows || r > self.d {
            return BigUint::zero();
        }
        self.counts[x as usize][r].clone()
    }

    /// Ordered selections of `x` distinct rows, `C(q^d-1, x)·x!`.
    pub fn selections(&self, x: u64) -> BigUint {
        falling_factorial(self.rows, x)
    }

    /// `ρ(x,d,r)`.
    pub fn rho(&self, x: u64, r: usize) -> BigRational {
        if x > self.rows {
            return BigRational::zero();
        }
        ratio(self.count(x, r), self.selections(x))
    }

    /// `ρ_x = Σ_{r=k}^{d} ρ(x,d,r)`: probability that `x` random distinct
    /// rows have rank at least `k`.
    pub fn rho_x(&self, x: u64, k: usize) -> BigRational {
        if x > self.rows {
            return BigRational::zero();
        }
        let num: BigUint = (k.max(1)..=self.d).map(|r| self.count(x, r)).sum();
        ratio(num, self.selections(x))
    }
}

/// `R(x,d,r)` for the `(q^d-1) × d` matrix of all nonzero `F_q`-vectors.
pub fn rank_count(x: u64, d: usize, r: usize, q: u64) -> Result<BigUint, ResilienceError> {
    Ok(RankTable::new(q, d)?.count(x, r))
}

pub fn rho(x: u64, d: usize, r: usize, q: u64) -> Result<BigRational, ResilienceError> {
    Ok(RankTable::new(q, d)?.rho(x, r))
}

pub fn rho_x(x: u64, d: usize, k: usize, q: u64) -> Result<BigRational, ResilienceError> {
    Ok(RankTable::new(q, d)?.rho_x(x, k))
}

fn falling_factorial(n: u64, x: u64) -> BigUint {
    if x > n {
        return BigUint::zero();
    }
    (0..x).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i))
}

pub fn binomial(n: u64, x: u64) -> BigUint {
    if x > n {
        return BigUint::zero();
    }
    let x = x.min(n - x);
    let mut acc = BigUint::one();
    for i in 0..x {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rounds an exact rational to the nearest `f64`.
pub fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().abs();
    // Scale so the integer quotient carries about 64 significant bits.
    let shift = 64i64 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << shift as usize).div_floor(&den)
    } else {
        num.div_floor(&(den << (-shift) as usize))
    };
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if neg { -v } else { v }
}

/// I.i.d. node availability for an HSRC(n,k) over `F_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvailabilityModel {
    pub p_node: f64,
    pub n: usize,
    pub k: usize,
    pub q: u64,
}

impl AvailabilityModel {
    pub fn new(n: usize, k: usize, q: u64, p_node: f64) -> Result<Self, ResilienceError> {
        let m = AvailabilityModel { p_node, n, k, q };
        m.dimension()?;
        Ok(m)
    }

    /// `d' = log_q(n+1)`: the rank of the evaluation-point matrix once the
    /// constant columns are dropped.
    pub fn dimension(&self) -> Result<usize, ResilienceError> {
        let AvailabilityModel { p_node, n, k, q } = *self;
        if q < 2 || !q.is_power_of_two() {
            return Err(ResilienceError::BadFieldSize { q });
        }
        if !(0.0..=1.0).contains(&p_node) {
            return Err(ResilienceError::BadProbability(p_node));
        }
        if k == 0 || k > n {
            return Err(ResilienceError::BadK { k, n });
        }
        let t = q.trailing_zeros();
        let n1 = n as u64 + 1;
        if !n1.is_power_of_two() || !n1.trailing_zeros().is_multiple_of(t) || n1 == 1 {
            return Err(ResilienceError::BadLength { n, q });
        }
        Ok((n1.trailing_zeros() / t) as usize)
    }

    fn table(&self) -> Result<RankTable, ResilienceError> {
        RankTable::new(self.q, self.dimension()?)
    }
}

/// Exact `p_obj` for HSRC, with `p_node` taken as the exact value of its
/// `f64`.
pub fn p_obj_hsrc_exact(model: &AvailabilityModel) -> Result<BigRational, ResilienceError> {
    let table = model.table()?;
    let p = exact_probability(model.p_node)?;
    let one_minus = BigRational::one() - &p;
    let n = model.n as u64;
    let mut total = BigRational::zero();
    for x in model.k as u64..=n {
        let rx = table.rho_x(x, model.k);
        if rx.is_zero() {
            continue;
        }
        let weight = BigRational::from_integer(BigInt::from(binomial(n, x)))
            * pow_rational(&p, x)
            * pow_rational(&one_minus, n - x);
        total += rx * weight;
    }
    Ok(total)
}

/// `p_obj` for HSRC in floating point.
pub fn p_obj_hsrc(model: &AvailabilityModel) -> Result<f64, ResilienceError> {
    let table = model.table()?;
    let n = model.n as u64;
    let mut total = 0.0;
    for x in model.k as u64..=n {
        let rx = to_f64(&table.rho_x(x, model.k));
        if rx > 0.0 {
            total += rx * binomial_pmf(n, x, model.p_node);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Binomial tail `Σ_{i=k}^{n} C(n,i) p^i (1-p)^(n-i)`, exact.
pub fn p_obj_mds_exact(n: usize, k: usize, p_node: f64) -> Result<BigRational, ResilienceError> {
    let p = exact_probability(p_node)?;
    let one_minus = BigRational::one() - &p;
    let n = n as u64;
    let mut total = BigRational::zero();
    for i in k as u64..=n {
        total += BigRational::from_integer(BigInt::from(binomial(n, i)))
            * pow_rational(&p, i)
            * pow_rational(&one_minus, n - i);
    }
    Ok(total)
}

pub fn p_obj_mds(n: usize, k: usize, p_node: f64) -> Result<f64, ResilienceError> {
    if !(0.0..=1.0).contains(&p_node) {
        return Err(ResilienceError::BadProbability(p_node));
    }
    let n = n as u64;
    let total: f64 = (k as u64..=n).map(|i| binomial_pmf(n, i, p_node)).sum();
    Ok(total.clamp(0.0, 1.0))
}

fn exact_probability(p: f64) -> Result<BigRational, ResilienceError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ResilienceError::BadProbability(p));
    }
    BigRational::from_float(p).ok_or(ResilienceError::BadProbability(p))
}

fn pow_rational(base: &BigRational, e: u64) -> BigRational {
    num_traits::pow(base.clone(), e as usize)
}

/// `C(n,x) p^x (1-p)^(n-x)` evaluated in log space.
pub fn binomial_pmf(n: u64, x: u64, p: f64) -> f64 {
    if x > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == n {
        return p.powi(n as i32);
    }
    if x == 0 {
        return (1.0 - p).powi(n as i32);
    }
    let ln_c = ln_factorial(n) - ln_factorial(x) - ln_factorial(n - x);
    (ln_c + x as f64 * p.ln() + (n - x) as f64 * (-p).ln_1p()).exp()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Monte Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub successes: u64,
    pub trials: u64,
}

/// Samples node survival and counts trials whose surviving points still
/// have `F_q`-rank `k`. Deterministic in `seed`.
pub fn simulate_p_obj(model: &AvailabilityModel, trials: u64, seed: u64) -> Result<McEstimate, ResilienceError> {
    simulate_p_obj_threaded(model, trials, seed, 1)
}

/// As [`simulate_p_obj`], spreading the fixed shards over `threads`
/// workers. The result does not depend on `threads`.
pub fn simulate_p_obj_threaded(
    model: &AvailabilityModel,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<McEstimate, ResilienceError> {
    let e = model.dimension()?;
    let field = Field::new(model.q.trailing_zeros(), e as u32)?;
    let points: Vec<Elem> = (1..=model.n as u32).map(|w| field.from_coord_word(w)).collect();
    let trials = trials.max(1);
    let shard_trials = |s: u64| trials / MC_SHARDS + u64::from(s < trials % MC_SHARDS);
    let run_shard = |s: u64| -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s);
        let mut alive = Vec::with_capacity(points.len());
        let mut ok = 0u64;
        for _ in 0..shard_trials(s) {
            alive.clear();
            for &pt in &points {
                if rng.gen::<f64>() < model.p_node {
                    alive.push(pt);
                }
            }
            if alive.len() >= model.k && field.rank_over_base(&alive) >= model.k {
                ok += 1;
            }
        }
        ok
    };
    let threads = threads.clamp(1, MC_SHARDS as usize);
    let successes: u64 = if threads == 1 {
        (0..MC_SHARDS).map(run_shard).sum()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|w| {
                    let run_shard = &run_shard;
                    scope.spawn(move || {
                        (w..MC_SHARDS).step_by(threads).map(run_shard).sum::<u64>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
        })
    };
    let estimate = successes as f64 / trials as f64;
    let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(McEstimate { estimate, stderr, successes, trials })
}

/// One row of a retrieval profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub x: u64,
    pub rho_x: BigRational,
    /// `ρ_x` for an MDS code of the same `(n,k)`: 1 for `x >= k`.
    pub mds: u8,
}

impl ProfileRow {
    pub fn rho_x_f64(&self) -> f64 {
        to_f64(&self.rho_x)
    }

    pub fn one_minus_rho_x(&self) -> f64 {
        to_f64(&(BigRational::one() - &self.rho_x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalProfile {
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub rows: Vec<ProfileRow>,
    /// `C(n,k)·ρ_k`: the number of `k`-subsets of nodes that can decode.
    pub decodable_k_subsets: BigRational,
}

/// `ρ_x` for `x = 0..=n`, alongside the MDS baseline.
pub fn retrieval_profile(n: usize, k: usize, q: u64) -> Result<RetrievalProfile, ResilienceError> {
    let model = AvailabilityModel::new(n, k, q, 1.0)?;
    let table = model.table()?;
    let rows = (0..=n as u64)
        .map(|x| ProfileRow {
            x,
            rho_x: if x < k as u64 { BigRational::zero() } else { table.rho_x(x, k) },
            mds: u8::from(x >= k as u64),
        })
        .collect();
    let decodable_k_subsets =
        BigRational::from_integer(BigInt::from(binomial(n as u64, k as u64))) * table.rho_x(k as u64, k);
    Ok(RetrievalProfile { n, k, q, rows, decodable_k_subsets })
}
