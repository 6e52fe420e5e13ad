//! HSRC(n,k) codes: construction, encoding, pair repair and decoding.
//!
//! An object of `M` symbols over `F_q` is split into `k` coefficients
//! `p_0..p_{k-1}` of `F_{q^d}` (`d = M/k`) and encoded as the values of the
//! weakly linearized polynomial `p(X) = Σ p_i X^(q^i)` at `n` evaluation
//! points. Because `p` is `F_q`-linear, `p(u·a + v·b) = u·p(a) + v·p(b)`,
//! so any fragment can be rebuilt from a suitable pair of others.
//!
//! Evaluation points are the nonzero vectors of the subspace spanned by
//! `{1, ν, ..., ν^(e-1)}` with `n = q^e - 1`. They are listed in canonical
//! order: point `i` (0-based) is the element whose packed `F_q`-coordinate
//! word equals `i + 1`.

use std::collections::HashMap;

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use thiserror::Error;

use crate::galois::{Elem, Field, GaloisError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("q = {q} is not a power of two")]
    BadFieldSize { q: u64 },
    #[error("k = {k} violates k >= 2")]
    KTooSmall { k: usize },
    #[error("k = {k} does not divide M = {m}")]
    KDoesNotDivideM { k: usize, m: usize },
    #[error("k <= M/k violated: k = {k}, M/k = {d}")]
    KExceedsFragmentLength { k: usize, d: usize },
    #[error("k < n violated: k = {k}, n = {n}")]
    NNotAboveK { k: usize, n: usize },
    #[error("n <= q^(M/k) - 1 violated: n = {n}, q = {q}, M/k = {d}")]
    NAboveMax { n: usize, q: u64, d: usize },
    #[error("n + 1 = {} is not a power of q = {q}", n + 1)]
    NNotPowerOfQMinusOne { n: usize, q: u64 },
    #[error(transparent)]
    Field(#[from] GaloisError),
    #[error("object length mismatch: expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("symbol {symbol} is not an element of F_{q}")]
    SymbolOutOfRange { symbol: u32, q: u64 },
    #[error("{0} is not an evaluation point of this code")]
    NotAnEvaluationPoint(String),
    #[error("pair-repair infeasible: no available pair regenerates point {target}")]
    PairRepairInfeasible { target: usize },
    #[error("rank deficient: {rank} found, {needed} needed")]
    RankDeficient { rank: usize, needed: usize },
    #[error("inconsistent fragments")]
    InconsistentFragments,
}

/// The numeric shape of a code, checked against every construction bound
/// without building the field. Usable for parameter sets whose field is too
/// large to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeShape {
    pub q: u64,
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

/// Derived dimensions of a valid [`CodeShape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeDims {
    /// `q = 2^t`.
    pub t: u32,
    /// Symbols per fragment, `M/k`.
    pub d: usize,
    /// `n = q^e - 1`.
    pub e: usize,
}

impl CodeShape {
    pub fn new(q: u64, k: usize, m: usize, n: usize) -> Self {
        CodeShape { q, k, m, n }
    }

    pub fn validate(&self) -> Result<ShapeDims, CodecError> {
        let CodeShape { q, k, m, n } = *self;
        if q < 2 || !q.is_power_of_two() {
            return Err(CodecError::BadFieldSize { q });
        }
        let t = q.trailing_zeros();
        if k < 2 {
            return Err(CodecError::KTooSmall { k });
        }
        if m % k != 0 {
            return Err(CodecError::KDoesNotDivideM { k, m });
        }
        let d = m / k;
        if k > d {
            return Err(CodecError::KExceedsFragmentLength { k, d });
        }
        if n <= k {
            return Err(CodecError::NNotAboveK { k, n });
        }
        // n <= q^d - 1  <=>  log2(n + 1) <= t*d
        let n1 = n as u128 + 1;
        let bits_needed = 128 - (n1 - 1).leading_zeros();
        let fits = (t as u128) * (d as u128) >= bits_needed as u128;
        if !fits {
            return Err(CodecError::NAboveMax { n, q, d });
        }
        if !n1.is_power_of_two() || !n1.trailing_zeros().is_multiple_of(t) {
            return Err(CodecError::NNotPowerOfQMinusOne { n, q });
        }
        let e = (n1.trailing_zeros() / t) as usize;
        Ok(ShapeDims { t, d, e })
    }

    /// `q^(M/k) - 1`, if it fits in 128 bits.
    pub fn n_max(&self) -> Option<u128> {
        let t = self.q.trailing_zeros() as u128;
        let d = (self.m / self.k) as u128;
        let bits = t * d;
        (bits < 128).then(|| (1u128 << bits) - 1)
    }
}

/// One encoded share: the value of `p` at evaluation point `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub index: usize,
    pub alpha: Elem,
    pub value: Elem,
}

/// Two available points with nonzero `F_q` scalars such that
/// `u·alpha[beta] + v·alpha[gamma] = alpha[target]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RepairPair {
    pub target: usize,
    pub beta: usize,
    pub u: Elem,
    pub gamma: usize,
    pub v: Elem,
}

impl RepairPair {
    pub fn sources(&self) -> [usize; 2] {
        [self.beta, self.gamma]
    }

    /// Unit scalars, i.e. a plain XOR of the two source fragments.
    pub fn is_xor(&self) -> bool {
        self.u == Elem::ONE && self.v == Elem::ONE
    }
}

/// The stored object as `k` coefficients of `F_{q^d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectData {
    pub coeffs: Vec<Elem>,
}

impl ObjectData {
    /// Groups `M` symbols (labels in `0..q`) into `k` coefficients: symbols
    /// `i*d .. i*d+d` are the `F_q` coordinates of `p_i`.
    pub fn from_symbols(code: &CodeParams, symbols: &[u32]) -> Result<Self, CodecError> {
        if symbols.len() != code.m {
            return Err(CodecError::LengthMismatch { expected: code.m, got: symbols.len() });
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as u64 >= code.q) {
            return Err(CodecError::SymbolOutOfRange { symbol: s, q: code.q });
        }
        let coeffs = symbols
            .chunks(code.d)
            .map(|chunk| code.field.from_coords(chunk))
            .collect();
        Ok(ObjectData { coeffs })
    }

    pub fn to_symbols(&self, code: &CodeParams) -> Vec<u32> {
        self.coeffs.iter().flat_map(|&c| code.field.coords(c)).collect()
    }

    pub fn zero(code: &CodeParams) -> Self {
        ObjectData { coeffs: vec![Elem::ZERO; code.k] }
    }
}

/// A constructed HSRC(n,k) instance.
#[derive(Debug, Clone)]
pub struct CodeParams {
    field: Field,
    q: u64,
    k: usize,
    m: usize,
    d: usize,
    n: usize,
    e: usize,
    alphas: Vec<Elem>,
    index: HashMap<Elem, usize>,
    // powers[i][j] = alphas[i]^(q^j)
    powers: Vec<Vec<Elem>>,
}

impl CodeParams {
    /// Builds HSRC(n,k) over `F_q` for objects of `m` symbols.
    pub fn new(q: u64, k: usize, m: usize, n: usize) -> Result<Self, CodecError> {
        let dims = CodeShape::new(q, k, m, n).validate()?;
        let field = Field::new(dims.t, dims.d as u32)?;
        let alphas: Vec<Elem> = (1..=n as u32).map(|w| field.from_coord_word(w)).collect();
        let index = alphas.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let powers = alphas
            .iter()
            .map(|&a| {
                let mut row = Vec::with_capacity(k);
                let mut p = a;
                for _ in 0..k {
                    row.push(p);
                    p = field.frobenius_q(p, 1);
                }
                row
            })
            .collect();
        Ok(CodeParams { field, q, k, m, d: dims.d, n, e: dims.e, alphas, index, powers })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Object size in `F_q` symbols.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Symbols per fragment, `M/k`.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the evaluation subspace, `log_q(n+1)`.
    pub fn e(&self) -> usize {
        self.e
    }

    pub fn shape(&self) -> CodeShape {
        CodeShape::new(self.q, self.k, self.m, self.n)
    }

    pub fn alphas(&self) -> &[Elem] {
        &self.alphas
    }

    pub fn alpha(&self, i: usize) -> Elem {
        self.alphas[i]
    }

    pub fn index_of(&self, point: Elem) -> Option<usize> {
        self.index.get(&point).copied()
    }

    /// Index of the evaluation point `w^i`, if it is one.
    pub fn index_of_power(&self, i: u64) -> Option<usize> {
        self.index_of(self.field.gen_pow(i))
    }

    /// Evaluates `p` at an arbitrary field element.
    pub fn evaluate(&self, obj: &ObjectData, x: Elem) -> Elem {
        let f = &self.field;
        let mut acc = Elem::ZERO;
        let mut xp = x;
        for &c in &obj.coeffs {
            acc = f.add(acc, f.mul(c, xp));
            xp = f.frobenius_q(xp, 1);
        }
        acc
    }

    /// Value of `p` at evaluation point `i`, using the cached powers.
    pub fn evaluate_at(&self, coeffs: &[Elem], i: usize) -> Elem {
        let f = &self.field;
        self.powers[i]
            .iter()
            .zip(coeffs)
            .fold(Elem::ZERO, |acc, (&a, &c)| f.add(acc, f.mul(a, c)))
    }

    fn check_object(&self, obj: &ObjectData) -> Result<(), CodecError> {
        if obj.coeffs.len() != self.k {
            return Err(CodecError::LengthMismatch { expected: self.k, got: obj.coeffs.len() });
        }
        Ok(())
    }

    pub fn encode(&self, obj: &ObjectData) -> Result<Vec<Fragment>, CodecError> {
        self.check_object(obj)?;
        Ok((0..self.n)
            .map(|i| Fragment { index: i, alpha: self.alphas[i], value: self.evaluate_at(&obj.coeffs, i) })
            .collect())
    }

    /// Encodes `M` raw symbols.
    pub fn encode_symbols(&self, symbols: &[u32]) -> Result<Vec<Fragment>, CodecError> {
        self.encode(&ObjectData::from_symbols(self, symbols)?)
    }

    fn check_index(&self, i: usize) -> Result<(), CodecError> {
        if i < self.n {
            Ok(())
        } else {
            Err(CodecError::NotAnEvaluationPoint(format!("index {i}")))
        }
    }

    /// Every pair of available points that regenerates `target`, one
    /// representative scalar choice per unordered pair, sorted by
    /// `(beta, gamma)` with `beta < gamma`.
    pub fn repair_pairs(&self, target: usize, available: &[usize]) -> Result<Vec<RepairPair>, CodecError> {
        self.check_index(target)?;
        let mut live = vec![false; self.n];
        for &a in available {
            self.check_index(a)?;
            if a != target {
                live[a] = true;
            }
        }
        let f = &self.field;
        let t = self.alphas[target];
        let inv_scalars: Vec<(Elem, Elem)> = f
            .nonzero_scalars()
            .map(|v| (v, f.inv(v).expect("nonzero scalar")))
            .collect();
        let mut seen: HashMap<(usize, usize), RepairPair> = HashMap::new();
        for beta in (0..self.n).filter(|&b| live[b]) {
            let b = self.alphas[beta];
            for u in f.nonzero_scalars() {
                let rest = f.add(t, f.mul(u, b));
                if rest.is_zero() {
                    continue;
                }
                for &(v, v_inv) in &inv_scalars {
                    let g = f.mul(rest, v_inv);
                    let Some(gamma) = self.index_of(g) else { continue };
                    if gamma <= beta || !live[gamma] {
                        continue;
                    }
                    seen.entry((beta, gamma))
                        .or_insert(RepairPair { target, beta, u, gamma, v });
                }
            }
        }
        let mut pairs: Vec<RepairPair> = seen.into_values().collect();
        pairs.sort_by_key(|p| (p.beta, p.gamma));
        Ok(pairs)
    }

    /// Largest number of mutually exclusive repair pairs for `target` among
    /// `available`.
    pub fn diversity_among(&self, target: usize, available: &[usize]) -> Result<usize, CodecError> {
        let pairs = self.repair_pairs(target, available)?;
        Ok(max_disjoint_pairs(self.n, &pairs))
    }

    /// Checks that a pair actually regenerates its target in the field.
    pub fn pair_is_valid(&self, pair: &RepairPair) -> bool {
        let f = &self.field;
        pair.beta < self.n
            && pair.gamma < self.n
            && pair.target < self.n
            && pair.beta != pair.gamma
            && !pair.u.is_zero()
            && !pair.v.is_zero()
            && f.is_scalar(pair.u)
            && f.is_scalar(pair.v)
            && f.add(f.mul(pair.u, self.alphas[pair.beta]), f.mul(pair.v, self.alphas[pair.gamma]))
                == self.alphas[pair.target]
    }

    /// Scalars `(u, v)` with `u·alpha[a] + v·alpha[b] = alpha[target]`, if any.
    pub fn pair_scalars(&self, target: usize, a: usize, b: usize) -> Option<(Elem, Elem)> {
        let f = &self.field;
        for u in f.nonzero_scalars() {
            for v in f.nonzero_scalars() {
                let sum = f.add(f.mul(u, self.alphas[a]), f.mul(v, self.alphas[b]));
                if sum == self.alphas[target] {
                    return Some((u, v));
                }
            }
        }
        None
    }

    /// Combines two fragment values with the pair's scalars.
    pub fn combine(&self, pair: &RepairPair, beta_value: Elem, gamma_value: Elem) -> Elem {
        let f = &self.field;
        f.add(f.mul(pair.u, beta_value), f.mul(pair.v, gamma_value))
    }

    pub fn repair_with(&self, pair: &RepairPair, beta: &Fragment, gamma: &Fragment) -> Result<Fragment, CodecError> {
        if beta.index != pair.beta || gamma.index != pair.gamma || !self.pair_is_valid(pair) {
            return Err(CodecError::PairRepairInfeasible { target: pair.target });
        }
        Ok(Fragment {
            index: pair.target,
            alpha: self.alphas[pair.target],
            value: self.combine(pair, beta.value, gamma.value),
        })
    }

    /// Regenerates `target` from the canonically first available pair.
    pub fn repair(&self, target: usize, available: &[Fragment]) -> Result<Fragment, CodecError> {
        let by_index: HashMap<usize, &Fragment> = available.iter().map(|f| (f.index, f)).collect();
        let indices: Vec<usize> = by_index.keys().copied().collect();
        let pairs = self.repair_pairs(target, &indices)?;
        let pair = pairs.first().ok_or(CodecError::PairRepairInfeasible { target })?;
        self.repair_with(pair, by_index[&pair.beta], by_index[&pair.gamma])
    }

    /// Greedy, in canonical order, choice of `k` points that are
    /// `F_q`-linearly independent.
    pub fn select_decoding_set(&self, available: &[usize]) -> Result<Vec<usize>, CodecError> {
        let mut sorted: Vec<usize> = available.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut chosen: Vec<usize> = Vec::with_capacity(self.k);
        let mut elems: Vec<Elem> = Vec::with_capacity(self.k);
        for i in sorted {
            self.check_index(i)?;
            elems.push(self.alphas[i]);
            if self.field.rank_over_base(&elems) == elems.len() {
                chosen.push(i);
                if chosen.len() == self.k {
                    return Ok(chosen);
                }
            } else {
                elems.pop();
            }
        }
        Err(CodecError::RankDeficient { rank: chosen.len(), needed: self.k })
    }

    /// Precomputes the inverse system for a fixed decoding set.
    pub fn decoder(&self, set: &[usize]) -> Result<Decoder, CodecError> {
        if set.len() != self.k {
            return Err(CodecError::RankDeficient { rank: set.len().min(self.k), needed: self.k });
        }
        let rows: Vec<Vec<Elem>> = set.iter().map(|&i| self.powers[i].clone()).collect();
        let inverse = invert(&self.field, rows).ok_or_else(|| {
            let pts: Vec<Elem> = set.iter().map(|&i| self.alphas[i]).collect();
            CodecError::RankDeficient { rank: self.field.rank_over_base(&pts), needed: self.k }
        })?;
        Ok(Decoder { field: self.field.clone(), set: set.to_vec(), inverse })
    }

    /// Recovers the object from at least `k` fragments. Extra fragments
    /// beyond the decoding set are checked against the solution.
    pub fn decode(&self, fragments: &[Fragment]) -> Result<ObjectData, CodecError> {
        let mut by_index: HashMap<usize, Elem> = HashMap::new();
        for fr in fragments {
            self.check_index(fr.index)?;
            if fr.alpha != self.alphas[fr.index] {
                return Err(CodecError::NotAnEvaluationPoint(format!("{} at index {}", fr.alpha, fr.index)));
            }
            if let Some(prev) = by_index.insert(fr.index, fr.value) {
                if prev != fr.value {
                    return Err(CodecError::InconsistentFragments);
                }
            }
        }
        let indices: Vec<usize> = by_index.keys().copied().collect();
        let set = self.select_decoding_set(&indices)?;
        let decoder = self.decoder(&set)?;
        let values: Vec<Elem> = set.iter().map(|i| by_index[i]).collect();
        let obj = ObjectData { coeffs: decoder.solve(&values) };
        for (&i, &v) in &by_index {
            if self.evaluate_at(&obj.coeffs, i) != v {
                return Err(CodecError::InconsistentFragments);
            }
        }
        Ok(obj)
    }
}

/// Inverse of the `k×k` system `(α, α^q, ..., α^(q^(k-1)))` for one
/// decoding set.
#[derive(Debug, Clone)]
pub struct Decoder {
    field: Field,
    set: Vec<usize>,
    inverse: Vec<Vec<Elem>>,
}

impl Decoder {
    pub fn set(&self) -> &[usize] {
        &self.set
    }

    /// Coefficients `p_0..p_{k-1}` from the values at the decoding set, in
    /// the set's order.
    pub fn solve(&self, values: &[Elem]) -> Vec<Elem> {
        let f = &self.field;
        self.inverse
            .iter()
            .map(|row| row.iter().zip(values).fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect()
    }
}

/// Gauss-Jordan inverse over the field; `None` if singular.
fn invert(f: &Field, mut a: Vec<Vec<Elem>>) -> Option<Vec<Vec<Elem>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Elem>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = f.inv(a[col][col]).ok()?;
        for j in 0..n {
            a[col][j] = f.mul(a[col][j], p);
            inv[col][j] = f.mul(inv[col][j], p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let c = a[r][col];
            for j in 0..n {
                let x = f.mul(c, a[col][j]);
                a[r][j] = f.add(a[r][j], x);
                let y = f.mul(c, inv[col][j]);
                inv[r][j] = f.add(inv[r][j], y);
            }
        }
    }
    Some(inv)
}

/// Maximum matching on the graph whose edges are the pairs.
pub fn max_disjoint_pairs(n: usize, pairs: &[RepairPair]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    let mut g = UnGraph::<(), ()>::with_capacity(n, pairs.len());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for p in pairs {
        g.add_edge(nodes[p.beta], nodes[p.gamma], ());
    }
    maximum_matching(&g).edges().count()
}
