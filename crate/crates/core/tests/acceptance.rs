//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail on their exact
//! claims; the run fails if any other criterion fails, or if a known-red
//! criterion unexpectedly passes.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsrc::bandwidth::strategy_totals;
use hsrc::codec::{CodeParams, ObjectData};
use hsrc::galois::{Elem, Field};
use hsrc::resilience::{
    binomial, p_obj_hsrc, p_obj_hsrc_exact, p_obj_mds_exact, rank_count, retrieval_profile, simulate_p_obj,
    AvailabilityModel,
};
use hsrc::scheduler::{schedule_repairs, verify_schedule, RepairSchedule, Transfer};
use hsrc::store::{decode_bytes, encode_bytes, plan_slices, repair_bytes};

/// Criterion 3 asserts `ρ_x = 1` exactly for `x >= 13` and exactly 83324
/// decodable 5-subsets. Exact counting gives `ρ_x < 1` up to `x = 15` and
/// 83328 subsets, so this criterion is reported red.
const KNOWN_RED: &[u32] = &[3];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

// ---------- independent oracles ----------

/// Shift-and-add product of binary polynomials reduced by `modulus`.
fn poly_mulmod(mut a: u32, mut b: u32, modulus: u32, bits: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> bits & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

/// Rank over `F_2` of bit vectors.
fn xor_rank(vs: &[u32]) -> usize {
    let mut basis = [0u32; 32];
    let mut rank = 0;
    for &v in vs {
        let mut x = v;
        for b in (0..32).rev() {
            if x >> b & 1 == 0 {
                continue;
            }
            if basis[b] == 0 {
                basis[b] = x;
                rank += 1;
                break;
            }
            x ^= basis[b];
        }
    }
    rank
}

fn factorial(x: u64) -> BigUint {
    (1..=x).fold(BigUint::one(), |a, i| a * i)
}

// ---------- criteria ----------

/// `(bits, modulus, [(i, w^i)])`.
type FieldTable = (u32, u32, &'static [(u32, u32)]);
/// `(lost powers, target power, [(beta power, gamma power)])`.
type PairRow = (&'static [u64], u64, &'static [(u64, u64)]);

fn c1_field_tables() -> Outcome {
    let tables: [FieldTable; 3] = [
        (2, 0b111, &[(2, 0b11)]),
        (3, 0b1011, &[(3, 0b011), (4, 0b110), (5, 0b111), (6, 0b101)]),
        (
            4,
            0b10011,
            &[
                (4, 0b0011),
                (5, 0b0110),
                (6, 0b1100),
                (7, 0b1011),
                (8, 0b0101),
                (9, 0b1010),
                (10, 0b0111),
                (11, 0b1110),
                (12, 0b1111),
                (13, 0b1101),
                (14, 0b1001),
            ],
        ),
    ];
    let mut identities = 0;
    for (bits, modulus, rows) in tables {
        let f = Field::new(1, bits).unwrap();
        let size = 1u32 << bits;
        for a in 0..size {
            for b in 0..size {
                if f.mul(Elem(a), Elem(b)) != Elem(poly_mulmod(a, b, modulus, bits)) {
                    return outcome(false, format!("F_{size}: {a}*{b}"));
                }
            }
        }
        for &(i, mask) in rows {
            let mut oracle = 1;
            for _ in 0..i {
                oracle = poly_mulmod(oracle, 2, modulus, bits);
            }
            if oracle != mask || f.gen_pow(i as u64) != Elem(mask) {
                return outcome(false, format!("F_{size}: w^{i}"));
            }
            identities += 1;
        }
        if f.gen_pow((size - 1) as u64) != Elem::ONE {
            return outcome(false, format!("F_{size}: generator order"));
        }
    }
    outcome(true, format!("{identities} power identities, all products in F_4, F_8, F_16"))
}

fn brute_rank_counts_ordered(d: u32) -> Vec<Vec<BigUint>> {
    let rows: Vec<u32> = (1..1u32 << d).collect();
    let n = rows.len();
    let mut counts = vec![vec![BigUint::zero(); d as usize + 1]; n + 1];
    fn dfs(rows: &[u32], used: u32, seq: &mut Vec<u32>, counts: &mut [Vec<BigUint>]) {
        counts[seq.len()][xor_rank(seq)] += 1u32;
        for (i, &r) in rows.iter().enumerate() {
            if used >> i & 1 == 0 {
                seq.push(r);
                dfs(rows, used | 1 << i, seq, counts);
                seq.pop();
            }
        }
    }
    dfs(&rows, 0, &mut Vec::new(), &mut counts);
    counts
}

/// Ordered counts from unordered subsets: rank does not depend on order,
/// so each subset of size `x` stands for `x!` sequences.
fn brute_rank_counts_subsets(d: u32) -> Vec<Vec<BigUint>> {
    let rows: Vec<u32> = (1..1u32 << d).collect();
    let n = rows.len();
    let mut tally = vec![vec![0u64; d as usize + 1]; n + 1];
    for mask in 0u32..(1 << n) {
        let sel: Vec<u32> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| rows[i]).collect();
        tally[sel.len()][xor_rank(&sel)] += 1;
    }
    tally
        .iter()
        .enumerate()
        .map(|(x, row)| row.iter().map(|&c| BigUint::from(c) * factorial(x as u64)).collect())
        .collect()
}

fn c2_rank_recursion() -> Outcome {
    let mut cells = 0;
    for d in [2u32, 3, 4] {
        let brute = if d <= 3 { brute_rank_counts_ordered(d) } else { brute_rank_counts_subsets(d) };
        if d == 3 && brute != brute_rank_counts_subsets(3) {
            return outcome(false, "ordered and subset enumerations disagree");
        }
        for (x, row) in brute.iter().enumerate() {
            for (r, want) in row.iter().enumerate() {
                let got = rank_count(x as u64, d as usize, r, 2).unwrap();
                if &got != want {
                    return outcome(false, format!("R({x},{d},{r}) = {got}, enumeration {want}"));
                }
                cells += 1;
            }
        }
    }
    outcome(true, format!("{cells} cells equal for d = 2, 3, 4"))
}

fn c3_profile_31_5() -> Outcome {
    let prof = retrieval_profile(31, 5, 2).unwrap();
    let vectors: Vec<u32> = (1..32).collect();

    // Oracle: count independent 5- and 7-subsets of the 31 nonzero vectors.
    let mut indep = [0u64; 8];
    let mut sel = Vec::new();
    fn walk(v: &[u32], start: usize, sel: &mut Vec<u32>, indep: &mut [u64; 8]) {
        if sel.len() == 5 || sel.len() == 7 {
            if xor_rank(sel) == 5 {
                indep[sel.len()] += 1;
            }
            if sel.len() == 7 {
                return;
            }
        }
        for i in start..v.len() {
            sel.push(v[i]);
            walk(v, i + 1, sel, indep);
            sel.pop();
        }
    }
    walk(&vectors, 0, &mut sel, &mut indep);
    let rho = |x: u64| BigRational::new(BigInt::from(indep[x as usize]), BigInt::from(binomial(31, x)));
    let lib_matches = prof.rows[5].rho_x == rho(5) && prof.rows[7].rho_x == rho(7);

    let one_minus = |x: usize| prof.rows[x].one_minus_rho_x();
    let round4 = |v: f64| (v * 1e4).round() / 1e4;
    let a = (round4(one_minus(5)) - 0.5096).abs() <= 1e-4;
    let b = (round4(one_minus(7)) - 0.0757).abs() <= 1e-4;

    // Oracle for x >= 8: a rank-deficient set lies in exactly one of the
    // 31 hyperplanes, each holding 15 nonzero vectors.
    let mut not_one = vec![];
    let mut lib_tail = true;
    for x in 13..=31u64 {
        let deficient = BigUint::from(31u32) * binomial(15, x);
        let oracle = BigRational::one() - BigRational::new(deficient.clone().into(), binomial(31, x).into());
        lib_tail &= prof.rows[x as usize].rho_x == oracle;
        if !deficient.is_zero() {
            not_one.push(x);
        }
    }
    let c = (13..=31).all(|x| prof.rows[x].rho_x.is_one());

    let subsets = prof.decodable_k_subsets.to_integer();
    let d = subsets == BigInt::from(83324) && prof.decodable_k_subsets.is_integer();
    let oracle_subsets = indep[5];

    outcome(
        lib_matches && lib_tail && a && b && c && d,
        format!(
            "1-rho_5 = {:.6} [{}], 1-rho_7 = {:.6} [{}], rho_x = 1 for x >= 13 [{}: rho_x < 1 for x in {:?}, 1-rho_13 = {:.3e}], \
             C(31,5)*rho_5 = {} vs 83324 [{}] (enumeration {}), exact values match enumeration [{}]",
            one_minus(5),
            ok(a),
            one_minus(7),
            ok(b),
            ok(c),
            not_one,
            one_minus(13),
            subsets,
            ok(d),
            oracle_subsets,
            ok(lib_matches && lib_tail),
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "no"
    }
}

fn c4_monte_carlo() -> Outcome {
    let mut notes = vec![];
    let mut pass = true;
    for (i, p) in [0.4, 0.6, 0.8].into_iter().enumerate() {
        let m = AvailabilityModel::new(31, 5, 2, p).unwrap();
        let exact = p_obj_hsrc(&m).unwrap();
        let mc = simulate_p_obj(&m, 100_000, 17 + i as u64).unwrap();
        // The sample standard error vanishes when every trial succeeds, so
        // the estimator's standard error under the exact value is used.
        let se = (exact * (1.0 - exact) / mc.trials as f64).sqrt();
        let diff = (mc.estimate - exact).abs();
        pass &= diff <= 3.0 * se;
        notes.push(format!("p={p}: {:.6} vs {:.6} ({:.2} se)", mc.estimate, exact, diff / se.max(f64::MIN_POSITIVE)));
    }
    outcome(pass, notes.join(", "))
}

fn c5_mds_dominance() -> Outcome {
    let mut checked = 0;
    for (n, k) in [(31usize, 5usize), (15, 3)] {
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let h = p_obj_hsrc_exact(&AvailabilityModel::new(n, k, 2, p).unwrap()).unwrap();
            let m = p_obj_mds_exact(n, k, p).unwrap();
            if h > m {
                return outcome(false, format!("({n},{k}) p={p}: {} > {}", h.to_f64().unwrap(), m.to_f64().unwrap()));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} grid points, exact rationals"))
}

fn c6_pair_table() -> Outcome {
    let c = CodeParams::new(2, 3, 12, 7).unwrap();
    let rows: [PairRow; 8] = [
        (&[0], 0, &[(1, 4), (2, 8), (5, 10)]),
        (&[1], 1, &[(0, 4), (2, 5), (8, 10)]),
        (&[2], 2, &[(0, 8), (1, 5), (4, 10)]),
        (&[0, 1], 0, &[(2, 8), (5, 10)]),
        (&[0, 1], 1, &[(8, 10), (2, 5)]),
        (&[0, 1, 2], 0, &[(5, 10)]),
        (&[0, 1, 2], 1, &[(8, 10)]),
        (&[0, 1, 2], 2, &[(4, 10)]),
    ];
    let f = c.field();
    let log = |i: usize| f.log(c.alpha(i)).unwrap();
    for (lost, target, want) in rows {
        let lost_idx: Vec<usize> = lost.iter().map(|&p| c.index_of_power(p).unwrap()).collect();
        let live: Vec<usize> = (0..7).filter(|i| !lost_idx.contains(i)).collect();
        let got: BTreeSet<(u64, u64)> = c
            .repair_pairs(c.index_of_power(target).unwrap(), &live)
            .unwrap()
            .iter()
            .map(|p| (log(p.beta).min(log(p.gamma)), log(p.beta).max(log(p.gamma))))
            .collect();
        let want: BTreeSet<(u64, u64)> = want.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        if got != want {
            return outcome(false, format!("w^{target} with {lost:?} lost: {got:?}"));
        }
    }
    outcome(true, "8 rows for one, two and three losses")
}

fn c7_diversity() -> Outcome {
    let mut notes = vec![];
    for (q, k, m, n) in [(2u64, 3usize, 12usize, 7usize), (2, 3, 12, 15), (8, 4, 16, 63)] {
        let c = CodeParams::new(q, k, m, n).unwrap();
        let all: Vec<usize> = (0..n).collect();
        for t in 0..n {
            let div = c.diversity_among(t, &all).unwrap();
            if div != (n - 1) / 2 {
                return outcome(false, format!("n={n}, target {t}: {div}"));
            }
            if q == 2 {
                // Oracle: points are bit vectors; pairs are {a, a^t}.
                let tw = (t + 1) as u32;
                let oracle = (1..=n as u32).filter(|&a| a != tw && (a ^ tw) != 0 && a < (a ^ tw)).count();
                if c.repair_pairs(t, &all).unwrap().len() != oracle || oracle != div {
                    return outcome(false, format!("n={n}, target {t}: pair count"));
                }
            }
        }
        notes.push(format!("n={n}: {}", (n - 1) / 2));
    }
    outcome(true, notes.join(", "))
}

fn c8_half_availability() -> Outcome {
    let mut patterns = 0u64;
    for n in [7usize, 15] {
        let c = CodeParams::new(2, 3, 12, n).unwrap();
        for mask in 0u32..(1 << n) {
            let live: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if live.len() < n.div_ceil(2) {
                continue;
            }
            patterns += 1;
            for t in (0..n).filter(|&i| mask >> i & 1 == 0) {
                let found = !c.repair_pairs(t, &live).unwrap().is_empty();
                let tw = (t + 1) as u32;
                let oracle = live.iter().any(|&a| {
                    let b = ((a + 1) as u32) ^ tw;
                    b != 0 && mask >> (b - 1) & 1 == 1
                });
                if !found || !oracle {
                    return outcome(false, format!("n={n}, live {live:?}, target {t}"));
                }
            }
        }
    }
    outcome(true, format!("{patterns} availability patterns"))
}

fn c9_crossover() -> Outcome {
    let mut rows = 0;
    for (n, k) in [(15usize, 3usize), (31, 5), (511, 80)] {
        for x in k..n {
            let t = strategy_totals(n, k, x).unwrap();
            let (egr, ec) = (2 * (n - x), k + n - x - 1);
            if t.eager != egr || t.ec_lazy != ec || (t.eager <= t.ec_lazy) != (x >= n + 1 - k) {
                return outcome(false, format!("({n},{k}) x_th={x}"));
            }
            rows += 1;
        }
    }
    outcome(true, format!("{rows} thresholds"))
}

/// Capacity and pair checks written against raw coordinate words.
fn independent_schedule_check(c: &CodeParams, s: &RepairSchedule) -> bool {
    let word = |i: usize| (i + 1) as u32;
    for slot in &s.slots {
        let ups: BTreeSet<usize> = slot.iter().map(|t| t.source).collect();
        let downs: BTreeSet<usize> = slot.iter().map(|t| t.target).collect();
        if ups.len() != slot.len() || downs.len() != slot.len() {
            return false;
        }
    }
    let live: BTreeSet<usize> = s.available.iter().copied().collect();
    s.tasks.iter().all(|t| {
        let srcs: BTreeSet<usize> = t.downloads.iter().map(|&(_, s)| s).collect();
        let v: Vec<usize> = srcs.into_iter().collect();
        v.len() == 2 && v.iter().all(|s| live.contains(s)) && word(v[0]) ^ word(v[1]) == word(t.target)
    }) && c.q() == 2
}

fn c10_scheduling() -> Outcome {
    let c = CodeParams::new(2, 3, 12, 15).unwrap();
    let pw = |i: u64| c.index_of_power(i).unwrap();
    let missing: Vec<usize> = (0..7).map(pw).collect();
    let live: Vec<usize> = (7..15).map(pw).collect();
    let s = schedule_repairs(&c, &missing, &live).unwrap();
    let v = verify_schedule(&s, &c);
    let by2 = s.completed_by(2);
    let sched_ok = v.is_empty() && by2 >= 6 && s.makespan <= 3 && independent_schedule_check(&c, &s);

    let first = [7u64, 8, 9, 13, 11, 12, 10];
    let second = [9u64, 10, 11, 8, 13, 14, 7];
    let slot = |src: &[u64; 7]| (0..7).map(|i| Transfer { target: pw(i as u64), source: pw(src[i]) }).collect();
    let table = RepairSchedule::from_slots(&c, &live, vec![slot(&first), slot(&second)]);
    let tv = verify_schedule(&table, &c);
    let table_ok = tv.is_empty() && table.makespan == 2 && independent_schedule_check(&c, &table);
    outcome(
        sched_ok && table_ok,
        format!(
            "scheduler: makespan {}, {by2}/7 by slot 2, {} violations; replayed table: makespan {}, {} violations",
            s.makespan,
            v.len(),
            table.makespan,
            tv.len()
        ),
    )
}

fn c11_file_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0usize;
    for trial in 0..100 {
        let len = ((rng.gen::<f64>() * (1e6f64).ln()).exp() as usize).clamp(1, 1_000_000);
        total += len;
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let plan = plan_slices(len as u64, 2, 3, 48, 15).unwrap();
        let frags = encode_bytes(&data, &plan).unwrap();
        let lost = rng.gen_range(0..15);
        let rest: Vec<_> = frags.iter().filter(|f| f.index() != lost).cloned().collect();
        let rep = repair_bytes(lost, &rest, &plan).unwrap();
        if rep.fragment != frags[lost] || rep.downloads != 2 {
            return outcome(false, format!("file {trial}: repair of {lost}"));
        }
        let mut healed = rest;
        healed.push(rep.fragment);
        if decode_bytes(&healed, &plan).unwrap() != data {
            return outcome(false, format!("file {trial}: decode"));
        }
    }
    outcome(true, format!("100 files, {total} bytes, 2 downloads per repair"))
}

fn c12_homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checks = 0u64;
    for (k, m, n) in [(2usize, 4usize, 3usize), (3, 12, 7), (3, 12, 15)] {
        let c = CodeParams::new(2, k, m, n).unwrap();
        let f = c.field();
        let span: Vec<Elem> = std::iter::once(Elem::ZERO).chain(c.alphas().iter().copied()).collect();
        for _ in 0..100 {
            let symbols: Vec<u32> = (0..m).map(|_| rng.gen_range(0..2)).collect();
            let obj = ObjectData::from_symbols(&c, &symbols).unwrap();
            for &a in &span {
                for &b in &span {
                    let lhs = c.evaluate(&obj, f.add(a, b));
                    let rhs = f.add(c.evaluate(&obj, a), c.evaluate(&obj, b));
                    if lhs != rhs {
                        return outcome(false, format!("n={n}: p({a}+{b})"));
                    }
                    checks += 1;
                }
            }
        }
    }
    outcome(true, format!("{checks} identities over e = 2, 3, 4"))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "field arithmetic tables", Some(Duration::from_secs(1)), c1_field_tables),
        (2, "rank recursion vs enumeration", Some(Duration::from_secs(30)), c2_rank_recursion),
        (3, "retrieval profile of the (31,5) binary code", Some(Duration::from_secs(5)), c3_profile_31_5),
        (4, "Monte Carlo availability", Some(Duration::from_secs(60)), c4_monte_carlo),
        (5, "MDS dominance", None, c5_mds_dominance),
        (6, "repair-pair table of the seven-point code", None, c6_pair_table),
        (7, "diversity (n-1)/2", None, c7_diversity),
        (8, "pairs exist at half availability", Some(Duration::from_secs(60)), c8_half_availability),
        (9, "eager vs lazy crossover", None, c9_crossover),
        (10, "parallel repair scheduling", None, c10_scheduling),
        (11, "file pipeline round trip", None, c11_file_pipeline),
        (12, "homomorphism", None, c12_homomorphism),
    ];
    let mut unexpected = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if let Some(l) = limit {
            if took > l {
                o.passed = false;
                o.detail.push_str(&format!(" (took {took:.2?}, limit {l:?})"));
            }
        }
        let red = KNOWN_RED.contains(&id);
        println!(
            "{} criterion {id:>2}: {name} ({took:.2?}){}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            if red && !o.passed { " [known red]" } else { "" },
            o.detail
        );
        if o.passed == red {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria differ from the expected outcome");
        ExitCode::FAILURE
    } else {
        println!("all criteria match the expected outcome");
        ExitCode::SUCCESS
    }
}
