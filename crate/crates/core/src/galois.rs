//! Arithmetic in binary extension fields.
//!
//! A [`Field`] is `GF(2^(t*d))`, viewed as the degree-`d` extension of the
//! subfield `F_q` with `q = 2^t`. Elements use a single flat binary-polynomial
//! representation reduced by a primitive modulus, so the polynomial variable
//! `x` is always a generator of the multiplicative group. `F_q` sits inside as
//! the set `{0} ∪ <β>` where `β = x^((2^(td)-1)/(q-1))`, and coordinates over
//! `F_q` are taken in the basis `{1, x, ..., x^(d-1)}`.
//!
//! Fields up to `2^16` elements carry log/antilog tables; larger ones fall
//! back to carry-less multiplication with modular reduction.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported total degree `t*d`.
pub const MAX_BITS: u32 = 32;

const TABLE_BITS: u32 = 16;

/// Primitive polynomials over `F_2`, indexed by degree. Bit `i` is the
/// coefficient of `x^i`. The degree-3 and degree-4 entries give `w^3 = w+1`
/// and `w^4 = w+1`.
const PRIMITIVE: [u64; 33] = [
    0,
    0,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11d,
    0x211,
    0x409,
    0x805,
    0x1053,
    0x201b,
    0x4443,
    0x8003,
    0x1100b,
    0x20009,
    0x40081,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x1000087,
    0x2000009,
    0x4000047,
    0x8000027,
    0x10000009,
    0x20000005,
    0x40800007,
    0x80000009,
    0x100400007,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error("field mismatch")]
    FieldMismatch,
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("unsupported field size 2^{bits}: total degree must be in 2..={max}", max = MAX_BITS)]
    UnsupportedSize { bits: u32 },
    #[error("base field exponent t must be at least 1 and extension degree d at least 1")]
    BadShape,
    #[error("modulus {modulus:#x} is reducible over F_2")]
    Reducible { modulus: u64 },
    #[error("x is not a generator modulo {modulus:#x}")]
    NotPrimitive { modulus: u64 },
}

/// Raw field element: the binary-polynomial coefficients packed into a word.
///
/// An `Elem` carries no reference to its field; use [`FieldElement`] when the
/// pairing has to be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

struct Tables {
    // exp has 2*(order-1) entries so log sums need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct Inner {
    t: u32,
    d: u32,
    bits: u32,
    modulus: u64,
    tables: Option<Tables>,
    // F_q elements indexed by label; label bit a is the coefficient of β^a.
    scalars: Vec<Elem>,
    // basis[j*t + a] = β^a x^j
    basis: Vec<Elem>,
    // coord_rows[i] picks out coordinate bit i by parity of (row & value).
    coord_rows: Vec<u32>,
}

/// A binary extension field `F_{q^d}` with `q = 2^t`. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.q())
            .field("d", &self.inner.d)
            .field("modulus", &format_args!("{:#x}", self.inner.modulus))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.t == other.inner.t
                && self.inner.d == other.inner.d
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for Field {}

fn poly_degree(p: u64) -> u32 {
    63 - p.leading_zeros()
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

fn clmul(a: u32, b: u32) -> u64 {
    let a = a as u64;
    let mut b = b;
    let mut r = 0u64;
    while b != 0 {
        let i = b.trailing_zeros();
        r ^= a << i;
        b &= b - 1;
    }
    r
}

/// Irreducibility by trial division against every polynomial of degree at
/// most half the modulus degree.
pub fn is_irreducible(modulus: u64) -> bool {
    let deg = poly_degree(modulus);
    if deg == 0 {
        return false;
    }
    let max_div_deg = deg / 2;
    for g in 2u64..(1u64 << (max_div_deg + 1)) {
        if poly_rem(modulus, g) == 0 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Field {
    /// Builds `F_{q^d}` with `q = 2^t` from the built-in primitive modulus of
    /// degree `t*d`, checking irreducibility and the generator property.
    pub fn new(t: u32, d: u32) -> Result<Self, GaloisError> {
        if t == 0 || d == 0 {
            return Err(GaloisError::BadShape);
        }
        let bits = t.checked_mul(d).ok_or(GaloisError::UnsupportedSize { bits: u32::MAX })?;
        if !(2..=MAX_BITS).contains(&bits) {
            return Err(GaloisError::UnsupportedSize { bits });
        }
        Self::with_modulus(t, d, PRIMITIVE[bits as usize])
    }

    /// `F_{q^d}` for `q` given as a power of two.
    pub fn for_q(q: u64, d: u32) -> Result<Self, GaloisError> {
        if q < 2 || !q.is_power_of_two() {
            return Err(GaloisError::BadShape);
        }
        Self::new(q.trailing_zeros(), d)
    }

    /// Builds the field from an explicit modulus, which must be primitive.
    pub fn with_modulus(t: u32, d: u32, modulus: u64) -> Result<Self, GaloisError> {
        if t == 0 || d == 0 {
            return Err(GaloisError::BadShape);
        }
        let bits = t * d;
        if !(2..=MAX_BITS).contains(&bits) || poly_degree(modulus) != bits {
            return Err(GaloisError::UnsupportedSize { bits });
        }
        if !is_irreducible(modulus) {
            return Err(GaloisError::Reducible { modulus });
        }
        let mut inner = Inner {
            t,
            d,
            bits,
            modulus,
            tables: None,
            scalars: Vec::new(),
            basis: Vec::new(),
            coord_rows: Vec::new(),
        };
        let group = (1u64 << bits) - 1;
        for p in prime_factors(group) {
            if pow_raw(&inner, 2, group / p) == 1 {
                return Err(GaloisError::NotPrimitive { modulus });
            }
        }
        if bits <= TABLE_BITS {
            let n = group as usize;
            let mut exp = vec![0u32; 2 * n];
            let mut log = vec![0u32; n + 1];
            let mut v = 1u32;
            for i in 0..n {
                exp[i] = v;
                exp[i + n] = v;
                log[v as usize] = i as u32;
                v = mul_raw(&inner, v, 2);
            }
            inner.tables = Some(Tables { exp, log });
        }

        let q = 1u64 << t;
        let beta = pow_raw(&inner, 2, group / (q - 1));
        let mut beta_pows = Vec::with_capacity(t as usize);
        let mut b = 1u32;
        for _ in 0..t {
            beta_pows.push(b);
            b = mul_raw(&inner, b, beta);
        }
        inner.scalars = (0..q as u32)
            .map(|label| {
                Elem(
                    (0..t)
                        .filter(|a| label >> a & 1 == 1)
                        .fold(0, |acc, a| acc ^ beta_pows[a as usize]),
                )
            })
            .collect();
        let mut basis = Vec::with_capacity(bits as usize);
        let mut xj = 1u32;
        for _ in 0..d {
            for &bp in &beta_pows {
                basis.push(Elem(mul_raw(&inner, bp, xj)));
            }
            xj = mul_raw(&inner, xj, 2);
        }
        inner.coord_rows = invert_columns(&basis, bits);
        inner.basis = basis;
        Ok(Field { inner: Arc::new(inner) })
    }

    /// Base-field exponent `t` (`q = 2^t`).
    pub fn t(&self) -> u32 {
        self.inner.t
    }

    /// Extension degree over `F_q`.
    pub fn degree(&self) -> u32 {
        self.inner.d
    }

    /// Total degree over `F_2`.
    pub fn bits(&self) -> u32 {
        self.inner.bits
    }

    pub fn q(&self) -> u64 {
        1u64 << self.inner.t
    }

    pub fn modulus(&self) -> u64 {
        self.inner.modulus
    }

    /// Number of elements, `q^d`.
    pub fn order(&self) -> u64 {
        1u64 << self.inner.bits
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// The designated generator `w` (the class of `x`).
    pub fn generator(&self) -> Elem {
        if self.inner.bits == 1 {
            Elem::ONE
        } else {
            Elem(2)
        }
    }

    /// `w^i`.
    pub fn gen_pow(&self, i: u64) -> Elem {
        self.pow(self.generator(), i)
    }

    /// Discrete log base `w`, available for table-backed fields only.
    pub fn log(&self, a: Elem) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        self.inner
            .tables
            .as_ref()
            .map(|tb| tb.log[a.0 as usize] as u64)
    }

    pub fn contains(&self, a: Elem) -> bool {
        (a.0 as u64) < self.order()
    }

    /// Wraps a raw value as a field-tagged element.
    pub fn element(&self, value: u32) -> FieldElement<'_> {
        debug_assert!(self.contains(Elem(value)));
        FieldElement { field: self, value: Elem(value) }
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        Elem(a.0 ^ b.0)
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.inner.tables {
            Some(tb) => {
                if a.0 == 0 || b.0 == 0 {
                    Elem::ZERO
                } else {
                    let i = tb.log[a.0 as usize] + tb.log[b.0 as usize];
                    Elem(tb.exp[i as usize])
                }
            }
            None => Elem(mul_raw(&self.inner, a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GaloisError> {
        if a.is_zero() {
            return Err(GaloisError::ZeroInverse);
        }
        let group = self.order() - 1;
        Ok(match &self.inner.tables {
            Some(tb) => {
                let l = tb.log[a.0 as usize] as u64;
                Elem(tb.exp[((group - l) % group) as usize])
            }
            None => self.pow(a, group - 1),
        })
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GaloisError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        if let Some(tb) = &self.inner.tables {
            let group = self.order() - 1;
            let l = tb.log[a.0 as usize] as u128 * (e as u128 % group as u128);
            return Elem(tb.exp[(l % group as u128) as usize]);
        }
        Elem(pow_raw(&self.inner, a.0, e))
    }

    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// `a^(q^i)`, by `i` successive `q`-th powerings.
    pub fn frobenius_q(&self, a: Elem, i: u64) -> Elem {
        let steps = i % self.inner.d as u64;
        let mut v = a;
        for _ in 0..steps {
            for _ in 0..self.inner.t {
                v = self.square(v);
            }
        }
        v
    }

    /// Elements of the subfield `F_q`, indexed by label. Label 0 is zero and
    /// label 1 is one.
    pub fn scalars(&self) -> &[Elem] {
        &self.inner.scalars
    }

    /// Nonzero `F_q` scalars in label order.
    pub fn nonzero_scalars(&self) -> impl Iterator<Item = Elem> + '_ {
        self.inner.scalars[1..].iter().copied()
    }

    pub fn scalar(&self, label: u32) -> Elem {
        self.inner.scalars[label as usize]
    }

    /// Whether `a` lies in the subfield `F_q`.
    pub fn is_scalar(&self, a: Elem) -> bool {
        self.frobenius_q(a, 1) == a
    }

    /// The `F_q`-basis element `ν^j` (here `ν = w`).
    pub fn basis_element(&self, j: u32) -> Elem {
        self.inner.basis[(j * self.inner.t) as usize]
    }

    /// Packed coordinate word: bits `j*t .. j*t+t` hold the label of the
    /// `j`-th `F_q` coordinate.
    pub fn coord_word(&self, a: Elem) -> u32 {
        if self.inner.t == 1 {
            return a.0;
        }
        let mut w = 0u32;
        for (i, row) in self.inner.coord_rows.iter().enumerate() {
            w |= ((row & a.0).count_ones() & 1) << i;
        }
        w
    }

    /// Inverse of [`Field::coord_word`].
    pub fn from_coord_word(&self, w: u32) -> Elem {
        if self.inner.t == 1 {
            return Elem(w);
        }
        let mut v = 0u32;
        let mut bits = w;
        while bits != 0 {
            let i = bits.trailing_zeros();
            v ^= self.inner.basis[i as usize].0;
            bits &= bits - 1;
        }
        Elem(v)
    }

    /// `F_q` coordinates (as labels) in the basis `{1, ν, ..., ν^(d-1)}`.
    pub fn coords(&self, a: Elem) -> Vec<u32> {
        let w = self.coord_word(a);
        let t = self.inner.t;
        let mask = if t == 32 { u32::MAX } else { (1u32 << t) - 1 };
        (0..self.inner.d).map(|j| (w >> (j * t)) & mask).collect()
    }

    pub fn from_coords(&self, labels: &[u32]) -> Elem {
        let t = self.inner.t;
        let w = labels
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &l)| acc | (l << (j as u32 * t)));
        self.from_coord_word(w)
    }

    /// Rank over `F_q` of a set of elements.
    pub fn rank_over_base(&self, elems: &[Elem]) -> usize {
        if self.inner.t == 1 {
            return xor_rank(elems.iter().map(|e| e.0));
        }
        // Echelon rows as F_q coordinate vectors (embedded scalars).
        let d = self.inner.d as usize;
        let mut rows: Vec<(usize, Vec<Elem>)> = Vec::new();
        for &e in elems {
            let mut v: Vec<Elem> = self.coords(e).into_iter().map(|l| self.scalar(l)).collect();
            for (pivot, row) in &rows {
                let c = v[*pivot];
                if !c.is_zero() {
                    for j in 0..d {
                        v[j] = self.add(v[j], self.mul(c, row[j]));
                    }
                }
            }
            if let Some(p) = v.iter().position(|c| !c.is_zero()) {
                let inv = self.inv(v[p]).expect("nonzero pivot");
                for c in v.iter_mut() {
                    *c = self.mul(*c, inv);
                }
                rows.push((p, v));
                if rows.len() == d {
                    break;
                }
            }
        }
        rows.len()
    }

    /// True iff no nontrivial `F_q`-combination of `elems` vanishes. Sets
    /// larger than the extension degree are never independent.
    pub fn independent_over_base(&self, elems: &[Elem]) -> bool {
        elems.len() <= self.inner.d as usize && self.rank_over_base(elems) == elems.len()
    }

    /// All elements, zero first.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order()).map(|v| Elem(v as u32))
    }
}

fn xor_rank(values: impl Iterator<Item = u32>) -> usize {
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for mut v in values {
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}

fn reduce(inner: &Inner, mut p: u64) -> u32 {
    let bits = inner.bits;
    while p >> bits != 0 {
        let top = poly_degree(p);
        p ^= inner.modulus << (top - bits);
    }
    p as u32
}

fn mul_raw(inner: &Inner, a: u32, b: u32) -> u32 {
    reduce(inner, clmul(a, b))
}

fn pow_raw(inner: &Inner, a: u32, mut e: u64) -> u32 {
    let mut base = a;
    let mut acc = 1u32;
    while e != 0 {
        if e & 1 == 1 {
            acc = mul_raw(inner, acc, base);
        }
        base = mul_raw(inner, base, base);
        e >>= 1;
    }
    acc
}

/// Given basis vectors as columns, returns the rows of the inverse matrix
/// over `F_2` as bit masks.
fn invert_columns(cols: &[Elem], bits: u32) -> Vec<u32> {
    let n = bits as usize;
    // Row i of the forward matrix A has bit j set iff bit i of cols[j] is set.
    // Augment [A | I] and reduce.
    let mut a: Vec<u32> = (0..n)
        .map(|i| {
            cols.iter()
                .enumerate()
                .fold(0u32, |acc, (j, c)| acc | (((c.0 >> i) & 1) << j))
        })
        .collect();
    let mut inv: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| a[r] >> col & 1 == 1)
            .expect("basis elements are linearly independent");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r] >> col & 1 == 1 {
                a[r] ^= a[col];
                inv[r] ^= inv[col];
            }
        }
    }
    inv
}

/// An element paired with the field it belongs to.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f Field,
    value: Elem,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl Eq for FieldElement<'_> {}

impl<'f> FieldElement<'f> {
    pub fn new(field: &'f Field, value: Elem) -> Self {
        FieldElement { field, value }
    }

    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn field(&self) -> &'f Field {
        self.field
    }

    fn check(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GaloisError::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check(other)?;
        Ok(Self::new(self.field, self.field.add(self.value, other.value)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, GaloisError> {
        self.check(other)?;
        Ok(Self::new(self.field, self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, GaloisError> {
        Ok(Self::new(self.field, self.field.inv(self.value)?))
    }

    pub fn frobenius_q(&self, i: u64) -> Self {
        Self::new(self.field, self.field.frobenius_q(self.value, i))
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::new(self.field, self.field.pow(self.value, e))
    }
}

impl std::ops::Add for FieldElement<'_> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("field mismatch")
    }
}

impl std::ops::Mul for FieldElement<'_> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("field mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(t: u32, d: u32) -> Field {
        Field::new(t, d).unwrap()
    }

    #[test]
    fn add_self_is_zero() {
        let gf = f(2, 3);
        for a in gf.elements() {
            assert_eq!(gf.add(a, a), Elem::ZERO);
        }
    }

    #[test]
    fn small_field_identities() {
        let f8 = f(1, 3);
        let w = f8.generator();
        assert_eq!(f8.add(w, Elem::ONE), f8.gen_pow(3));
        assert_eq!(f8.inv(w).unwrap(), f8.gen_pow(6));

        let f16 = f(1, 4);
        let w = f16.generator();
        assert_eq!(f16.add(w, Elem::ONE), f16.gen_pow(4));
        let w2 = f16.gen_pow(2);
        assert_eq!(f16.mul(w2, w2), f16.add(w, Elem::ONE));
        assert_eq!(f16.frobenius_q(w, 2), f16.add(w, Elem::ONE));

        let f4 = f(1, 2);
        let w = f4.generator();
        assert_eq!(f4.mul(w, w), f4.add(w, Elem::ONE));
    }

    #[test]
    fn zero_has_no_inverse() {
        let gf = f(1, 4);
        assert_eq!(gf.inv(Elem::ZERO), Err(GaloisError::ZeroInverse));
        assert_eq!(gf.inv(Elem::ONE), Ok(Elem::ONE));
    }

    #[test]
    fn inverse_matches_brute_force() {
        for (t, d) in [(1, 5), (2, 3), (3, 2), (1, 8)] {
            let gf = f(t, d);
            for a in gf.elements().skip(1) {
                let brute = gf.elements().find(|&b| gf.mul(a, b) == Elem::ONE).unwrap();
                assert_eq!(gf.inv(a).unwrap(), brute);
            }
        }
    }

    #[test]
    fn large_field_inverse_without_tables() {
        let gf = f(4, 6);
        assert!(gf.log(Elem(3)).is_none());
        for v in [1u32, 2, 3, 0xabcdef, 0xffffff, 0x800000] {
            let a = Elem(v);
            assert_eq!(gf.mul(a, gf.inv(a).unwrap()), Elem::ONE);
        }
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a_field = f(1, 4);
        let b_field = f(2, 2);
        let a = a_field.element(3);
        let b = b_field.element(3);
        assert_eq!(a.try_add(&b), Err(GaloisError::FieldMismatch));
        assert_eq!(a.try_mul(&b), Err(GaloisError::FieldMismatch));
        // Separately built copies of the same field interoperate.
        let again = f(1, 4);
        assert!(a.try_add(&again.element(5)).is_ok());
    }

    #[test]
    fn powers_enumerate_every_nonzero_element() {
        for bits in 2..=12 {
            let gf = f(1, bits);
            let mut seen = vec![false; gf.order() as usize];
            for i in 0..gf.order() - 1 {
                let v = gf.gen_pow(i).0 as usize;
                assert!(!seen[v], "repeat at degree {bits}");
                seen[v] = true;
            }
            assert!(!seen[0]);
            assert_eq!(seen.iter().filter(|s| **s).count() as u64, gf.order() - 1);
        }
    }

    #[test]
    fn builtin_table_is_primitive() {
        for bits in 2..=MAX_BITS {
            let gf = Field::new(1, bits).unwrap();
            assert_eq!(gf.bits(), bits);
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert_eq!(
            Field::with_modulus(1, 4, 0x15).unwrap_err(),
            GaloisError::Reducible { modulus: 0x15 }
        );
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5.
        assert_eq!(
            Field::with_modulus(1, 4, 0x1f).unwrap_err(),
            GaloisError::NotPrimitive { modulus: 0x1f }
        );
        assert!(Field::new(1, 33).is_err());
    }

    #[test]
    fn frobenius_edges() {
        let gf = f(2, 4);
        for a in gf.elements().take(40) {
            assert_eq!(gf.frobenius_q(a, 0), a);
        }
        for i in 0..10 {
            assert_eq!(gf.frobenius_q(Elem::ONE, i), Elem::ONE);
        }
        for &u in gf.scalars() {
            assert_eq!(gf.frobenius_q(u, 1), u);
        }
        // Exactly q elements are fixed by the q-power map.
        let fixed = gf.elements().filter(|&a| gf.frobenius_q(a, 1) == a).count();
        assert_eq!(fixed as u64, gf.q());
    }

    #[test]
    fn scalars_form_the_subfield() {
        let gf = f(3, 4);
        let s = gf.scalars();
        assert_eq!(s.len(), 8);
        assert_eq!(s[0], Elem::ZERO);
        assert_eq!(s[1], Elem::ONE);
        for &a in s {
            for &b in s {
                assert!(s.contains(&gf.mul(a, b)));
                assert!(s.contains(&gf.add(a, b)));
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        for (t, d) in [(1, 4), (2, 3), (3, 4), (4, 2)] {
            let gf = f(t, d);
            for a in gf.elements().step_by(7) {
                let c = gf.coords(a);
                assert_eq!(c.len(), d as usize);
                assert_eq!(gf.from_coords(&c), a);
                let rebuilt = c.iter().enumerate().fold(Elem::ZERO, |acc, (j, &l)| {
                    gf.add(acc, gf.mul(gf.scalar(l), gf.basis_element(j as u32)))
                });
                assert_eq!(rebuilt, a);
            }
        }
    }

    #[test]
    fn independence_examples() {
        let f16 = f(1, 4);
        let w = |i| f16.gen_pow(i);
        assert!(f16.independent_over_base(&[w(0), w(1), w(2), w(3)]));
        assert!(!f16.independent_over_base(&[w(0), w(1), w(4)]));
        assert!(f16.independent_over_base(&[]));
        assert!(!f16.independent_over_base(&[w(0), w(1), w(2), w(3), w(5)]));
    }

    #[test]
    fn independence_over_larger_base() {
        // Over F_8, {1, β} is dependent (β is a scalar) while {1, ν} is not.
        let gf = f(3, 4);
        let beta = gf.scalar(2);
        assert!(!gf.independent_over_base(&[Elem::ONE, beta]));
        assert!(gf.independent_over_base(&[Elem::ONE, gf.basis_element(1)]));
        // F_2-independent but F_8-dependent.
        let nu = gf.basis_element(1);
        assert!(!gf.independent_over_base(&[nu, gf.mul(beta, nu)]));
    }
}
