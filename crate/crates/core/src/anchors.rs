//! Reference values for small codes, each rechecked against this implementation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::bandwidth::{diversity, traffic_table};
use crate::codec::{CodeParams, ObjectData};
use crate::galois::{Elem, Field};
use crate::resilience::{retrieval_profile, to_f64};
use crate::scheduler::{baselines, schedule_repairs, verify_schedule, RepairSchedule, Transfer};
use crate::store::SlicePlan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Anchor {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Anchor { name, passed, detail: detail.into() }
    }

    fn from_result(name: &'static str, r: Result<(bool, String), String>) -> Self {
        match r {
            Ok((passed, detail)) => Anchor::new(name, passed, detail),
            Err(e) => Anchor::new(name, false, format!("error: {e}")),
        }
    }
}

/// `(field bits, [(i, polynomial in w as a bit mask)])` for the small
/// fields, each row meaning `w^i = Σ_j bit_j·w^j`.
pub const FIELD_TABLES: [(u32, &[(u64, u32)]); 3] = [
    (2, &[(2, 0b11)]),
    (3, &[(3, 0b011), (4, 0b110), (5, 0b111), (6, 0b101)]),
    (
        4,
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

/// Evaluation points of the `n = 7` example, as powers of `w` in `F_16`.
pub const SEVEN_POINT_POWERS: [u64; 7] = [0, 1, 2, 4, 5, 8, 10];

/// Repair-pair table of the `n = 7` example as
/// `(lost powers, target power, pairs as powers)`, for one, two and three
/// simultaneous losses.
pub type PairRow = (&'static [u64], u64, &'static [(u64, u64)]);
pub const SEVEN_POINT_PAIRS: [PairRow; 8] = [
    (&[0], 0, &[(1, 4), (2, 8), (5, 10)]),
    (&[1], 1, &[(0, 4), (2, 5), (8, 10)]),
    (&[2], 2, &[(0, 8), (1, 5), (4, 10)]),
    (&[0, 1], 0, &[(2, 8), (5, 10)]),
    (&[0, 1], 1, &[(8, 10), (2, 5)]),
    (&[0, 1, 2], 0, &[(5, 10)]),
    (&[0, 1, 2], 1, &[(8, 10)]),
    (&[0, 1, 2], 2, &[(4, 10)]),
];

/// The two-slot assignment for the seven-failure HSRC(15,3) scenario:
/// target `w^i` downloads `w^FIRST[i]`, then `w^SECOND[i]`.
pub const SCENARIO_FIRST: [u64; 7] = [7, 8, 9, 13, 11, 12, 10];
pub const SCENARIO_SECOND: [u64; 7] = [9, 10, 11, 8, 13, 14, 7];

/// Polynomial in `w` given by a bit mask, computed with field arithmetic.
pub fn poly_in_generator(f: &Field, mask: u32) -> Elem {
    let w = f.generator();
    let mut acc = Elem::ZERO;
    let mut power = Elem::ONE;
    for j in 0..32 {
        if mask >> j & 1 == 1 {
            acc = f.add(acc, power);
        }
        power = f.mul(power, w);
    }
    acc
}

fn field_tables() -> Result<(bool, String), String> {
    let mut checked = 0;
    for (bits, rows) in FIELD_TABLES {
        let f = Field::new(1, bits).map_err(|e| e.to_string())?;
        let w = f.generator();
        let mut power = Elem::ONE;
        let mut powers = vec![];
        for _ in 0..f.order() - 1 {
            powers.push(power);
            power = f.mul(power, w);
        }
        if power != Elem::ONE {
            return Ok((false, format!("w^{} != 1 in F_{}", f.order() - 1, f.order())));
        }
        for &(i, mask) in rows {
            if powers[i as usize] != poly_in_generator(&f, mask) {
                return Ok((false, format!("w^{i} mismatch in F_{}", f.order())));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} power expansions")))
}

fn seven_point() -> Result<CodeParams, String> {
    CodeParams::new(2, 3, 12, 7).map_err(|e| e.to_string())
}

fn seven_point_points() -> Result<(bool, String), String> {
    let c = seven_point()?;
    let mut logs: Vec<u64> = c.alphas().iter().filter_map(|&a| c.field().log(a)).collect();
    logs.sort_unstable();
    Ok((logs == SEVEN_POINT_POWERS, format!("points w^{logs:?}")))
}

fn seven_point_repair() -> Result<(bool, String), String> {
    let c = seven_point()?;
    let symbols: Vec<u32> = (0..12).map(|i| (i * 7 + 3) % 5 % 2).collect();
    let obj = ObjectData::from_symbols(&c, &symbols).map_err(|e| e.to_string())?;
    let f = c.field();
    let at = |i: u64| c.evaluate(&obj, f.gen_pow(i));
    Ok((at(5) == f.add(at(2), at(1)), "p(w^5) = p(w^2) + p(w)".into()))
}

fn pairs_as_powers(c: &CodeParams, target: u64, missing: &[u64]) -> Result<Vec<(u64, u64)>, String> {
    let f = c.field();
    let idx = |p: u64| c.index_of_power(p).ok_or(format!("w^{p} is not a point"));
    let lost: Vec<usize> = missing.iter().map(|&p| idx(p)).collect::<Result<_, _>>()?;
    let live: Vec<usize> = (0..c.n()).filter(|i| !lost.contains(i)).collect();
    let pairs = c.repair_pairs(idx(target)?, &live).map_err(|e| e.to_string())?;
    let log = |i: usize| f.log(c.alpha(i)).expect("table field");
    let mut out: Vec<(u64, u64)> = pairs.iter().map(|p| {
        let (a, b) = (log(p.beta), log(p.gamma));
        (a.min(b), a.max(b))
    }).collect();
    out.sort_unstable();
    Ok(out)
}

fn normalized(rows: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = rows.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_unstable();
    v
}

/// Compares every row of the repair-pair table as sets of unordered pairs.
pub fn check_seven_point_pairs(c: &CodeParams) -> Result<(bool, String), String> {
    for (missing, target, expected) in SEVEN_POINT_PAIRS {
        let got = pairs_as_powers(c, target, missing)?;
        if got != normalized(expected) {
            return Ok((false, format!("w^{target} with {missing:?} lost: got {got:?}")));
        }
    }
    Ok((true, format!("{} rows", SEVEN_POINT_PAIRS.len())))
}

fn diversity_check() -> Result<(bool, String), String> {
    let mut notes = vec![];
    let mut ok = true;
    for (q, k, m, n) in [(2u64, 3usize, 12usize, 7usize), (8, 4, 16, 63)] {
        let c = CodeParams::new(q, k, m, n).map_err(|e| e.to_string())?;
        let all: Vec<usize> = (0..n).collect();
        let found = c.diversity_among(0, &all).map_err(|e| e.to_string())?;
        let formula = diversity(n).map_err(|e| e.to_string())?;
        ok &= found == formula;
        notes.push(format!("n={n}: {found}"));
    }
    Ok((ok, notes.join(", ")))
}

fn half_live_pairs() -> Result<(bool, String), String> {
    let c = seven_point()?;
    let n = c.n();
    for mask in 0u32..(1 << n) {
        let live: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if live.len() < n.div_ceil(2) {
            continue;
        }
        for t in (0..n).filter(|&i| mask >> i & 1 == 0) {
            if c.repair_pairs(t, &live).map_err(|e| e.to_string())?.is_empty() {
                return Ok((false, format!("no pair for {t} with live {live:?}")));
            }
        }
    }
    Ok((true, "every pattern with x >= 4 of 7".into()))
}

fn profile_31_5() -> Result<Vec<Anchor>, String> {
    let p = retrieval_profile(31, 5, 2).map_err(|e| e.to_string())?;
    let om = |x: usize| p.rows[x].one_minus_rho_x();
    let rounded = |v: f64| (v * 1e4).round() / 1e4;
    let mut out = vec![
        Anchor::new("profile_31_5_one_minus_rho5", (rounded(om(5)) - 0.5096).abs() < 1e-9, format!("{:.6}", om(5))),
        Anchor::new("profile_31_5_one_minus_rho7", (rounded(om(7)) - 0.0757).abs() < 1e-9, format!("{:.6}", om(7))),
    ];
    let not_one: Vec<usize> = (13..=31).filter(|&x| !p.rows[x].rho_x.is_one()).collect();
    out.push(Anchor::new(
        "profile_31_5_rho_is_one_from_13",
        not_one.is_empty(),
        match not_one.last() {
            None => "exact".into(),
            Some(_) => format!("rho_x < 1 for x in {not_one:?}; 1 - rho_13 = {:.3e}", om(13)),
        },
    ));
    let target = BigRational::from_integer(BigInt::from(83324));
    out.push(Anchor::new(
        "profile_31_5_decodable_5_subsets",
        p.decodable_k_subsets == target,
        format!("C(31,5)·rho_5 = {} (expected 83324)", p.decodable_k_subsets),
    ));
    Ok(out)
}

fn large_object_plan() -> Result<(bool, String), String> {
    let plan = SlicePlan::for_symbols(5 << 20, 5 << 20, 8, 80, 20480, 511).map_err(|e| e.to_string())?;
    Ok((
        plan.slice_count == 256 && plan.d == 256 && plan.padding_symbols == 0,
        format!("{} slices, {}-symbol blocks", plan.slice_count, plan.d),
    ))
}

fn scenario_code() -> Result<(CodeParams, Vec<usize>, Vec<usize>), String> {
    let c = CodeParams::new(2, 3, 12, 15).map_err(|e| e.to_string())?;
    let pw = |i: u64| c.index_of_power(i).expect("full field");
    let missing = (0..7).map(pw).collect();
    let live = (7..15).map(pw).collect();
    Ok((c, missing, live))
}

/// The known two-slot assignment as a schedule.
pub fn reference_schedule(c: &CodeParams, live: &[usize]) -> RepairSchedule {
    let pw = |i: u64| c.index_of_power(i).expect("full field");
    let slot = |src: &[u64; 7]| {
        (0..7).map(|i| Transfer { target: pw(i as u64), source: pw(src[i]) }).collect()
    };
    RepairSchedule::from_slots(c, live, vec![slot(&SCENARIO_FIRST), slot(&SCENARIO_SECOND)])
}

fn scheduling() -> Result<Vec<Anchor>, String> {
    let (c, missing, live) = scenario_code()?;
    let s = schedule_repairs(&c, &missing, &live).map_err(|e| e.to_string())?;
    let v = verify_schedule(&s, &c);
    let by2 = s.completed_by(2);
    let table = reference_schedule(&c, &live);
    let tv = verify_schedule(&table, &c);
    let b = baselines(3, 7);
    Ok(vec![
        Anchor::new(
            "parallel_repair_schedule",
            v.is_empty() && by2 >= 6 && s.makespan <= 3,
            format!("makespan {}, {by2} done by slot 2, {} violations", s.makespan, v.len()),
        ),
        Anchor::new(
            "parallel_repair_table",
            tv.is_empty() && table.makespan == 2,
            format!("makespan {}, {} violations", table.makespan, tv.len()),
        ),
        Anchor::new(
            "parallel_repair_baselines",
            b.hybrid == 7 && b.erasure == 9,
            format!("hybrid {}, erasure {}", b.hybrid, b.erasure),
        ),
    ])
}

fn crossover_point() -> Result<(bool, String), String> {
    let mut ok = true;
    let mut notes = vec![];
    for (n, k) in [(15usize, 3usize), (31, 5)] {
        let t = traffic_table(n, k, &[k]).map_err(|e| e.to_string())?;
        let xc = n + 1 - k;
        let row = t.rows.iter().find(|r| r.x_th == xc).ok_or("missing row")?;
        ok &= row.eclazy == 2.0 && row.egr == 2.0;
        notes.push(format!("({n},{k}) x_c={xc}: {}", row.eclazy));
    }
    Ok((ok, notes.join(", ")))
}

/// Runs every anchor. Failures are reported, not raised.
pub fn validate_anchors() -> Vec<Anchor> {
    let mut out = vec![
        Anchor::from_result("field_tables", field_tables()),
        Anchor::from_result("seven_point_points", seven_point_points()),
        Anchor::from_result("seven_point_self_repair", seven_point_repair()),
        Anchor::from_result("seven_point_pair_table", seven_point().and_then(|c| check_seven_point_pairs(&c))),
        Anchor::from_result("diversity", diversity_check()),
        Anchor::from_result("half_live_pairs_n7", half_live_pairs()),
    ];
    match profile_31_5() {
        Ok(a) => out.extend(a),
        Err(e) => out.push(Anchor::new("profile_31_5", false, format!("error: {e}"))),
    }
    out.push(Anchor::from_result("large_object_plan", large_object_plan()));
    match scheduling() {
        Ok(a) => out.extend(a),
        Err(e) => out.push(Anchor::new("parallel_repair", false, format!("error: {e}"))),
    }
    out.push(Anchor::from_result("traffic_crossover_point", crossover_point()));
    out
}

/// Decimal rendering of an exact ratio, for reports.
pub fn ratio_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{} ({:.6})", r, to_f64(r))
    }
}
