//! Whole-file pipeline: slicing, padding, fragment files, and file-level
//! encode, decode and pair repair.
//!
//! Bytes are read as a little-endian bit stream and cut into `t`-bit
//! `F_q` symbols. Each slice holds `M` symbols and is encoded on its own
//! with the same code. Fragment file `j` carries fragment `j` of every
//! slice, so a node holding it serves all slices at once.
//!
//! Fragment file layout (all integers little-endian):
//!
//! | field            | size        |
//! |------------------|-------------|
//! | magic `HSRC`     | 4           |
//! | version = 1      | 1           |
//! | t                | 1           |
//! | e                | 1           |
//! | n, k, M, index   | 4 each      |
//! | original length  | 8           |
//! | first slice      | 8           |
//! | slice count      | 8           |
//! | alpha            | 2 per coord |
//! | payload length   | 8           |
//! | payload          | rest        |
//!
//! The payload packs `M/k` symbols per slice, `t` bits each, LSB first.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::codec::{CodeParams, CodeShape, CodecError, RepairPair};
use crate::galois::Elem;

pub const MAGIC: &[u8; 4] = b"HSRC";
pub const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("not an HSRC fragment")]
    NotHsrc,
    #[error("unsupported fragment format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated fragment header")]
    TruncatedHeader,
    #[error("payload length mismatch: header says {expected} bytes, found {found}")]
    PayloadLengthMismatch { expected: u64, found: u64 },
    #[error("fragment headers disagree: {0}")]
    HeaderMismatch(String),
    #[error("alpha coordinates of fragment {index} do not match the code")]
    AlphaMismatch { index: usize },
    #[error("pair-repair infeasible; full decode required (fragment {index})")]
    NoRepairPair { index: usize },
    #[error("no fragments given")]
    NoFragments,
    #[error("object too large: {0} symbols")]
    TooLarge(u128),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// How an object is cut into equally coded slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlicePlan {
    /// Object length in bytes; decode truncates to it.
    pub original_length: u64,
    pub shape: CodeShape,
    /// Bits per symbol, `q = 2^t`.
    pub t: u32,
    /// Symbols per fragment per slice, `M/k`.
    pub d: usize,
    pub e: usize,
    pub slice_count: u64,
    /// Zero symbols appended to the last slice.
    pub padding_symbols: u64,
}

impl SlicePlan {
    /// Plans `total_symbols` symbols in slices of `M = slice_symbols`.
    pub fn for_symbols(
        total_symbols: u64,
        original_length: u64,
        q: u64,
        k: usize,
        slice_symbols: usize,
        n: usize,
    ) -> Result<Self, StoreError> {
        let shape = CodeShape::new(q, k, slice_symbols, n);
        let dims = shape.validate()?;
        let m = slice_symbols as u64;
        let slice_count = total_symbols.div_ceil(m).max(1);
        Ok(SlicePlan {
            original_length,
            shape,
            t: dims.t,
            d: dims.d,
            e: dims.e,
            slice_count,
            padding_symbols: slice_count * m - total_symbols,
        })
    }

    pub fn slice_symbols(&self) -> usize {
        self.shape.m
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn k(&self) -> usize {
        self.shape.k
    }

    /// Builds the per-slice code. Fails for fields wider than 32 bits.
    pub fn code(&self) -> Result<CodeParams, StoreError> {
        let s = self.shape;
        Ok(CodeParams::new(s.q, s.k, s.m, s.n)?)
    }

    /// Payload bytes of one fragment file covering every slice.
    pub fn payload_length(&self) -> u64 {
        (self.slice_count * self.d as u64 * self.t as u64).div_ceil(8)
    }

    fn fragment_bits(&self) -> usize {
        self.d * self.t as usize
    }

    fn from_header(h: &FragmentHeader) -> Result<Self, StoreError> {
        let q = 1u64 << h.t;
        let plan = Self::for_symbols(
            (h.original_length * 8).div_ceil(h.t as u64),
            h.original_length,
            q,
            h.k as usize,
            h.m as usize,
            h.n as usize,
        )?;
        if plan.e != h.e as usize || plan.slice_count != h.slice_count {
            return Err(StoreError::HeaderMismatch("header fields are inconsistent".into()));
        }
        Ok(plan)
    }
}

/// Plans a file of `file_length` bytes in slices of `slice_symbols`
/// `F_q` symbols.
pub fn plan_slices(file_length: u64, q: u64, k: usize, slice_symbols: usize, n: usize) -> Result<SlicePlan, StoreError> {
    if q < 2 || !q.is_power_of_two() {
        return Err(CodecError::BadFieldSize { q }.into());
    }
    let t = q.trailing_zeros() as u128;
    let bits = file_length as u128 * 8;
    let total = bits.div_ceil(t);
    let total = u64::try_from(total).map_err(|_| StoreError::TooLarge(total))?;
    SlicePlan::for_symbols(total, file_length, q, k, slice_symbols, n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentHeader {
    pub t: u8,
    pub e: u8,
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub fragment_index: u32,
    pub original_length: u64,
    pub slice_index: u64,
    pub slice_count: u64,
    /// `F_q` coordinates of the evaluation point.
    pub alpha: Vec<u16>,
    pub payload_length: u64,
}

impl FragmentHeader {
    fn same_object(&self, other: &FragmentHeader) -> bool {
        (self.t, self.e, self.n, self.k, self.m, self.original_length, self.slice_index, self.slice_count)
            == (other.t, other.e, other.n, other.k, other.m, other.original_length, other.slice_index, other.slice_count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentFile {
    pub header: FragmentHeader,
    pub payload: Vec<u8>,
}

impl FragmentFile {
    pub fn index(&self) -> usize {
        self.header.fragment_index as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(64 + 2 * h.alpha.len() + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, h.t, h.e]);
        for v in [h.n, h.k, h.m, h.fragment_index] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [h.original_length, h.slice_index, h.slice_count] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &h.alpha {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&h.payload_length.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(StoreError::NotHsrc);
        }
        let mut r = Cursor { buf: bytes, pos: 4 };
        let version = r.u8()?;
        if version != VERSION {
            return Err(StoreError::UnsupportedVersion(version));
        }
        let (t, e) = (r.u8()?, r.u8()?);
        let (n, k, m, fragment_index) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let (original_length, slice_index, slice_count) = (r.u64()?, r.u64()?, r.u64()?);
        if t == 0 || t > 16 || k == 0 || m % k != 0 {
            return Err(StoreError::NotHsrc);
        }
        let alpha = (0..m / k).map(|_| r.u16()).collect::<Result<Vec<_>, _>>()?;
        let payload_length = r.u64()?;
        let payload = bytes[r.pos..].to_vec();
        if payload.len() as u64 != payload_length {
            return Err(StoreError::PayloadLengthMismatch { expected: payload_length, found: payload.len() as u64 });
        }
        let header = FragmentHeader {
            t,
            e,
            n,
            k,
            m,
            fragment_index,
            original_length,
            slice_index,
            slice_count,
            alpha,
            payload_length,
        };
        Ok(FragmentFile { header, payload })
    }

    pub fn read(path: &Path) -> Result<Self, StoreError> {
        Self::from_bytes(&fs::read(path).map_err(io_err(path))?)
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        fs::write(path, self.to_bytes()).map_err(io_err(path))
    }

    /// Fragment value of slice `s`.
    fn value(&self, plan: &SlicePlan, code: &CodeParams, s: u64) -> Elem {
        let bits = plan.fragment_bits();
        code.field().from_coord_word(read_bits(&self.payload, s * bits as u64, bits))
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], StoreError> {
        let s = self.buf.get(self.pos..self.pos + N).ok_or(StoreError::TruncatedHeader)?;
        self.pos += N;
        Ok(s.try_into().expect("slice of length N"))
    }
    fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, StoreError> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
}

/// `len <= 32` bits starting at bit `pos`, LSB first; bits past the end
/// read as zero.
fn read_bits(buf: &[u8], pos: u64, len: usize) -> u32 {
    let first = (pos / 8) as usize;
    let shift = (pos % 8) as u32;
    let mut acc = 0u64;
    for i in 0..5 {
        if let Some(&b) = buf.get(first + i) {
            acc |= (b as u64) << (8 * i);
        }
    }
    ((acc >> shift) & ((1u64 << len) - 1)) as u32
}

/// Append-only LSB-first bit packer.
struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    fill: u32,
}

impl BitWriter {
    fn with_capacity(bytes: usize) -> Self {
        BitWriter { out: Vec::with_capacity(bytes), acc: 0, fill: 0 }
    }

    fn push(&mut self, value: u32, len: usize) {
        self.acc |= (value as u64) << self.fill;
        self.fill += len as u32;
        while self.fill >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.fill -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.fill > 0 {
            self.out.push(self.acc as u8);
        }
        self.out
    }
}

fn header_for(plan: &SlicePlan, code: &CodeParams, index: usize) -> FragmentHeader {
    FragmentHeader {
        t: plan.t as u8,
        e: plan.e as u8,
        n: plan.n() as u32,
        k: plan.k() as u32,
        m: plan.slice_symbols() as u32,
        fragment_index: index as u32,
        original_length: plan.original_length,
        slice_index: 0,
        slice_count: plan.slice_count,
        alpha: code.field().coords(code.alpha(index)).into_iter().map(|c| c as u16).collect(),
        payload_length: plan.payload_length(),
    }
}

/// Encodes `data` into `n` fragment files, fragment `j` of every slice in
/// file `j`.
pub fn encode_bytes(data: &[u8], plan: &SlicePlan) -> Result<Vec<FragmentFile>, StoreError> {
    if data.len() as u64 != plan.original_length {
        return Err(StoreError::HeaderMismatch(format!(
            "plan is for {} bytes, data has {}",
            plan.original_length,
            data.len()
        )));
    }
    let code = plan.code()?;
    let f = code.field();
    let bits = plan.fragment_bits();
    let cap = plan.payload_length() as usize;
    let mut writers: Vec<BitWriter> = (0..plan.n()).map(|_| BitWriter::with_capacity(cap)).collect();
    let mut coeffs = vec![Elem::ZERO; plan.k()];
    let mut pos = 0u64;
    for _ in 0..plan.slice_count {
        for c in coeffs.iter_mut() {
            *c = f.from_coord_word(read_bits(data, pos, bits));
            pos += bits as u64;
        }
        for (i, w) in writers.iter_mut().enumerate() {
            w.push(f.coord_word(code.evaluate_at(&coeffs, i)), bits);
        }
    }
    Ok(writers
        .into_iter()
        .enumerate()
        .map(|(i, w)| FragmentFile { header: header_for(plan, &code, i), payload: w.finish() })
        .collect())
}

/// Checks that the fragments describe one object under `plan` and carry
/// the right evaluation points.
fn check_fragments(frags: &[FragmentFile], plan: &SlicePlan, code: &CodeParams) -> Result<(), StoreError> {
    for fr in frags {
        let expect = header_for(plan, code, fr.index().min(plan.n() - 1));
        if !fr.header.same_object(&expect) {
            return Err(StoreError::HeaderMismatch(format!("fragment {} belongs to a different object", fr.index())));
        }
        if fr.index() >= plan.n() || fr.header.alpha != expect.alpha {
            return Err(StoreError::AlphaMismatch { index: fr.index() });
        }
        if fr.payload.len() as u64 != plan.payload_length() {
            return Err(StoreError::PayloadLengthMismatch {
                expected: plan.payload_length(),
                found: fr.payload.len() as u64,
            });
        }
    }
    Ok(())
}

/// The plan recorded in a fragment's header.
pub fn plan_from_fragment(fr: &FragmentFile) -> Result<SlicePlan, StoreError> {
    SlicePlan::from_header(&fr.header)
}

/// Rebuilds the original bytes from any fragments that contain a decoding
/// set. The same set serves every slice.
pub fn decode_bytes(frags: &[FragmentFile], plan: &SlicePlan) -> Result<Vec<u8>, StoreError> {
    if frags.is_empty() {
        return Err(StoreError::NoFragments);
    }
    let code = plan.code()?;
    check_fragments(frags, plan, &code)?;
    let indices: Vec<usize> = frags.iter().map(FragmentFile::index).collect();
    let set = code.select_decoding_set(&indices)?;
    let decoder = code.decoder(&set)?;
    let sources: Vec<&FragmentFile> =
        set.iter().map(|&i| frags.iter().find(|f| f.index() == i).expect("index came from frags")).collect();

    let f = code.field();
    let bits = plan.fragment_bits();
    let mut out = BitWriter::with_capacity((plan.slice_count as usize) * plan.k() * bits / 8 + 1);
    let mut values = vec![Elem::ZERO; plan.k()];
    for s in 0..plan.slice_count {
        for (v, fr) in values.iter_mut().zip(&sources) {
            *v = fr.value(plan, &code, s);
        }
        for c in decoder.solve(&values) {
            out.push(f.coord_word(c), bits);
        }
    }
    let mut bytes = out.finish();
    bytes.truncate(plan.original_length as usize);
    Ok(bytes)
}

/// A regenerated fragment and what it cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub fragment: FragmentFile,
    pub pair: RepairPair,
    /// Whole fragment files fetched, independent of the slice count.
    pub downloads: usize,
}

/// Regenerates fragment file `missing` from the first canonical repair
/// pair among `available`.
pub fn repair_bytes(missing: usize, available: &[FragmentFile], plan: &SlicePlan) -> Result<RepairOutcome, StoreError> {
    let code = plan.code()?;
    check_fragments(available, plan, &code)?;
    let indices: Vec<usize> = available.iter().map(FragmentFile::index).collect();
    let pair = *code
        .repair_pairs(missing, &indices)?
        .first()
        .ok_or(StoreError::NoRepairPair { index: missing })?;
    let get = |i: usize| available.iter().find(|f| f.index() == i).expect("index came from available");
    let (b, g) = (get(pair.beta), get(pair.gamma));

    let payload = if pair.is_xor() {
        b.payload.iter().zip(&g.payload).map(|(x, y)| x ^ y).collect()
    } else {
        let f = code.field();
        let bits = plan.fragment_bits();
        let mut w = BitWriter::with_capacity(plan.payload_length() as usize);
        for s in 0..plan.slice_count {
            let v = code.combine(&pair, b.value(plan, &code, s), g.value(plan, &code, s));
            w.push(f.coord_word(v), bits);
        }
        w.finish()
    };
    Ok(RepairOutcome {
        fragment: FragmentFile { header: header_for(plan, &code, missing), payload },
        pair,
        downloads: 2,
    })
}

/// File name of fragment `index` inside an output directory.
pub fn fragment_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("fragment_{index:05}.hsrc"))
}

/// Encodes the file at `input` into `dir`, returning the written paths.
pub fn encode_file(input: &Path, plan: &SlicePlan, dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let data = fs::read(input).map_err(io_err(input))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let frags = encode_bytes(&data, plan)?;
    frags
        .iter()
        .map(|fr| {
            let p = fragment_path(dir, fr.index());
            fr.write(&p).map(|_| p)
        })
        .collect()
}

fn read_all(paths: &[PathBuf]) -> Result<(Vec<FragmentFile>, SlicePlan), StoreError> {
    let frags = paths.iter().map(|p| FragmentFile::read(p)).collect::<Result<Vec<_>, _>>()?;
    let plan = plan_from_fragment(frags.first().ok_or(StoreError::NoFragments)?)?;
    Ok((frags, plan))
}

/// Decodes from fragment files; the plan is read from their headers.
pub fn decode_file(fragments: &[PathBuf], output: &Path) -> Result<u64, StoreError> {
    let (frags, plan) = read_all(fragments)?;
    let data = decode_bytes(&frags, &plan)?;
    fs::write(output, &data).map_err(io_err(output))?;
    Ok(data.len() as u64)
}

/// Regenerates fragment `missing` next to the given fragment files.
pub fn repair_file(missing: usize, fragments: &[PathBuf], output: &Path) -> Result<RepairOutcome, StoreError> {
    let (frags, plan) = read_all(fragments)?;
    let outcome = repair_bytes(missing, &frags, &plan)?;
    outcome.fragment.write(output)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(len: usize) -> Vec<u8> {
        (0..len).map(|i| (i * 131 + 7) as u8).collect()
    }

    #[test]
    fn plan_edges() {
        let p = plan_slices(0, 2, 3, 12, 7).unwrap();
        assert_eq!((p.slice_count, p.padding_symbols), (1, 12));
        // 3 bytes = 24 bits fill one slice of 24 symbols exactly.
        let p = plan_slices(3, 2, 3, 24, 7).unwrap();
        assert_eq!((p.slice_count, p.padding_symbols), (1, 0));
        assert!(matches!(
            plan_slices(10, 2, 5, 12, 7),
            Err(StoreError::Codec(CodecError::KDoesNotDivideM { .. }))
        ));
    }

    #[test]
    fn large_plan_needs_no_field() {
        let p = SlicePlan::for_symbols(5 << 20, 5 << 20, 8, 80, 20480, 511).unwrap();
        assert_eq!(p.slice_count, 256);
        assert_eq!(p.d, 256);
        assert_eq!(p.padding_symbols, 0);
        assert!(p.code().is_err());
    }

    #[test]
    fn roundtrip_and_repair() {
        let data = sample(1000);
        let plan = plan_slices(data.len() as u64, 2, 3, 48, 15).unwrap();
        let frags = encode_bytes(&data, &plan).unwrap();
        assert_eq!(frags.len(), 15);
        assert_eq!(decode_bytes(&frags, &plan).unwrap(), data);

        for fr in &frags {
            let bytes = fr.to_bytes();
            assert_eq!(&FragmentFile::from_bytes(&bytes).unwrap(), fr);
        }
        for missing in 0..15 {
            let others: Vec<FragmentFile> = frags.iter().filter(|f| f.index() != missing).cloned().collect();
            let out = repair_bytes(missing, &others, &plan).unwrap();
            assert_eq!(out.fragment, frags[missing]);
            assert_eq!(out.downloads, 2);
        }
    }

    #[test]
    fn non_binary_symbols() {
        let data = sample(333);
        let plan = plan_slices(data.len() as u64, 4, 2, 8, 15).unwrap();
        let frags = encode_bytes(&data, &plan).unwrap();
        assert_eq!(decode_bytes(&frags[5..8], &plan).unwrap(), data);
        let out = repair_bytes(0, &frags[1..], &plan).unwrap();
        assert_eq!(out.fragment, frags[0]);
    }

    #[test]
    fn zero_file_has_zero_payloads() {
        let data = vec![0u8; 100];
        let plan = plan_slices(100, 2, 3, 12, 7).unwrap();
        for fr in encode_bytes(&data, &plan).unwrap() {
            assert!(fr.payload.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn malformed_fragments() {
        let data = sample(50);
        let plan = plan_slices(50, 2, 3, 12, 7).unwrap();
        let fr = &encode_bytes(&data, &plan).unwrap()[0];
        let mut bytes = fr.to_bytes();
        bytes[0] = b'X';
        assert_eq!(FragmentFile::from_bytes(&bytes).unwrap_err().to_string(), "not an HSRC fragment");
        let bytes = fr.to_bytes();
        let err = FragmentFile::from_bytes(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(err.to_string().starts_with("payload length mismatch"));
    }

    #[test]
    fn seven_point_layout() {
        // Seven-point code: w^5 = w + w^2, so fragment w^5 is the XOR of those.
        let data = sample(60);
        let plan = plan_slices(60, 2, 3, 12, 7).unwrap();
        let code = plan.code().unwrap();
        let frags = encode_bytes(&data, &plan).unwrap();
        let (t, a, b) = (
            code.index_of_power(5).unwrap(),
            code.index_of_power(1).unwrap(),
            code.index_of_power(2).unwrap(),
        );
        let only: Vec<FragmentFile> = vec![frags[a].clone(), frags[b].clone()];
        let out = repair_bytes(t, &only, &plan).unwrap();
        assert_eq!(out.fragment, frags[t]);
        assert!(out.pair.is_xor());

        let err = repair_bytes(0, &[frags[1].clone(), frags[3].clone()], &plan).unwrap_err();
        assert!(err.to_string().starts_with("pair-repair infeasible; full decode required"));
    }

    #[test]
    fn rank_deficient_survivors() {
        let data = sample(30);
        let plan = plan_slices(30, 2, 3, 12, 7).unwrap();
        let frags = encode_bytes(&data, &plan).unwrap();
        // Points 1, 2 and 3 (= 1 + 2) span only two dimensions.
        let err = decode_bytes(&frags[..3], &plan).unwrap_err();
        assert_eq!(err.to_string(), "rank deficient: 2 found, 3 needed");
    }
}
