//! Time-slotted parallel repair under unit upload and download capacity.
//!
//! Every missing fragment is rebuilt by its own new node, which downloads
//! the two sources of one repair pair, one fragment per slot. A live node
//! uploads at most one fragment per slot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use crate::codec::{CodeParams, CodecError, RepairPair};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairTask {
    pub target: usize,
    pub pair: Option<RepairPair>,
    /// `(slot, source)` with slots counted from 1.
    pub downloads: Vec<(usize, usize)>,
}

impl RepairTask {
    fn new(target: usize) -> Self {
        RepairTask { target, pair: None, downloads: Vec::new() }
    }

    fn remaining(&self) -> Vec<usize> {
        match &self.pair {
            None => Vec::new(),
            Some(p) => p
                .sources()
                .into_iter()
                .filter(|s| !self.downloads.iter().any(|&(_, d)| d == *s))
                .collect(),
        }
    }

    /// Slot of the last needed download, once both sources are in.
    pub fn completed_at(&self) -> Option<usize> {
        let p = self.pair.as_ref()?;
        p.sources()
            .iter()
            .map(|s| self.downloads.iter().filter(|&&(_, d)| d == *s).map(|&(t, _)| t).min())
            .try_fold(0, |acc, t| t.map(|t| acc.max(t)))
    }
}

/// One download: `target`'s new node fetches `source` in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transfer {
    pub target: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairSchedule {
    pub available: Vec<usize>,
    pub tasks: Vec<RepairTask>,
    /// `slots[s]` holds the transfers of slot `s + 1`.
    pub slots: Vec<Vec<Transfer>>,
    pub makespan: usize,
    /// Missing points with no repair pair among the live nodes.
    pub infeasible: Vec<usize>,
}

impl RepairSchedule {
    /// Rebuilds a schedule from explicit per-slot transfers. Each task's pair
    /// is derived from the two distinct sources it downloads.
    pub fn from_slots(code: &CodeParams, available: &[usize], slots: Vec<Vec<Transfer>>) -> Self {
        let mut tasks: BTreeMap<usize, RepairTask> = BTreeMap::new();
        for (s, slot) in slots.iter().enumerate() {
            for tr in slot {
                tasks
                    .entry(tr.target)
                    .or_insert_with(|| RepairTask::new(tr.target))
                    .downloads
                    .push((s + 1, tr.source));
            }
        }
        for task in tasks.values_mut() {
            let srcs: BTreeSet<usize> = task.downloads.iter().map(|&(_, s)| s).collect();
            if let [a, b] = srcs.into_iter().collect::<Vec<_>>()[..] {
                if a < code.n() && b < code.n() && task.target < code.n() {
                    task.pair = code
                        .pair_scalars(task.target, a, b)
                        .map(|(u, v)| RepairPair { target: task.target, beta: a, u, gamma: b, v });
                }
            }
        }
        let makespan = slots.len();
        RepairSchedule {
            available: available.to_vec(),
            tasks: tasks.into_values().collect(),
            slots,
            makespan,
            infeasible: Vec::new(),
        }
    }

    pub fn completed_by(&self, slot: usize) -> usize {
        self.tasks.iter().filter(|t| t.completed_at().is_some_and(|c| c <= slot)).count()
    }

    /// `slot,downloader_target,uploader_source`, slots from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,downloader_target,uploader_source\n");
        for (s, slot) in self.slots.iter().enumerate() {
            for tr in slot {
                writeln!(out, "{},{},{}", s + 1, tr.target, tr.source).unwrap();
            }
        }
        out
    }
}

/// `max(2, ceil(2·missing / available))`, or 0 with nothing to repair.
pub fn makespan_lower_bound(missing: usize, available: usize) -> usize {
    if missing == 0 {
        return 0;
    }
    if available == 0 {
        return usize::MAX;
    }
    2usize.max((2 * missing).div_ceil(available))
}

/// Slots needed without pair repair: one full-object copy per slot for the
/// hybrid scheme, and `k` downloads plus `missing - 1` uploads for lazy EC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Baselines {
    pub hybrid: usize,
    pub erasure: usize,
}

pub fn baselines(k: usize, missing: usize) -> Baselines {
    Baselines { hybrid: missing, erasure: if missing == 0 { 0 } else { k + missing - 1 } }
}

/// Upper bound on slots before the scheduler gives up on a stalled run.
const MAX_SLOTS: usize = 1 << 16;

pub fn schedule_repairs(
    code: &CodeParams,
    missing: &[usize],
    available: &[usize],
) -> Result<RepairSchedule, CodecError> {
    let missing: BTreeSet<usize> = missing.iter().copied().collect();
    let live: Vec<usize> = available
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|a| !missing.contains(a))
        .collect();

    let mut options: Vec<(RepairTask, Vec<RepairPair>)> = Vec::new();
    let mut infeasible = Vec::new();
    for &target in &missing {
        let pairs = code.repair_pairs(target, &live)?;
        if pairs.is_empty() {
            infeasible.push(target);
        } else {
            options.push((RepairTask::new(target), pairs));
        }
    }

    let mut slots: Vec<Vec<Transfer>> = Vec::new();
    while options.iter().any(|(t, _)| t.pair.is_none() || !t.remaining().is_empty()) {
        assert!(slots.len() < MAX_SLOTS, "scheduler made no progress");
        choose_pairs(code.n(), &mut options);
        let slot = slots.len() + 1;

        let mut load = vec![0usize; code.n()];
        for (t, _) in &options {
            for s in t.remaining() {
                load[s] += 1;
            }
        }
        // Busiest uploaders are matched first so the leftover demand stays
        // spread out; each uploader prefers tasks closest to completion.
        let pending: Vec<usize> = (0..options.len()).filter(|&i| !options[i].0.remaining().is_empty()).collect();
        let mut uploaders: Vec<usize> = (0..code.n()).filter(|&s| load[s] > 0).collect();
        uploaders.sort_by_key(|&s| (std::cmp::Reverse(load[s]), s));
        let wants: Vec<Vec<usize>> = uploaders
            .iter()
            .map(|&s| {
                let mut ts: Vec<usize> =
                    pending.iter().copied().filter(|&i| options[i].0.remaining().contains(&s)).collect();
                ts.sort_by_key(|&i| (options[i].0.remaining().len(), options[i].0.target));
                ts
            })
            .collect();
        let matched = priority_matching(&wants, options.len());

        let mut transfers = Vec::new();
        for (pos, &src) in uploaders.iter().enumerate() {
            if let Some(i) = matched[pos] {
                options[i].0.downloads.push((slot, src));
                transfers.push(Transfer { target: options[i].0.target, source: src });
            }
        }
        transfers.sort();
        slots.push(transfers);
    }

    let makespan = slots.len();
    let tasks = options.into_iter().map(|(t, _)| t).collect();
    Ok(RepairSchedule { available: live, tasks, slots, makespan, infeasible })
}

/// Pair choice for tasks that have not downloaded anything yet, keeping the
/// per-uploader demand as flat as possible. Ties go to the canonical order.
fn choose_pairs(n: usize, options: &mut [(RepairTask, Vec<RepairPair>)]) {
    let mut load = vec![0usize; n];
    for (t, _) in options.iter() {
        if !t.downloads.is_empty() {
            for s in t.remaining() {
                load[s] += 1;
            }
        }
    }
    for (task, pairs) in options.iter_mut() {
        if !task.downloads.is_empty() {
            continue;
        }
        let best = pairs
            .iter()
            .min_by_key(|p| {
                let (a, b) = (load[p.beta], load[p.gamma]);
                (a.max(b), a + b, p.beta, p.gamma)
            })
            .copied()
            .expect("feasible task has a pair");
        load[best.beta] += 1;
        load[best.gamma] += 1;
        task.pair = Some(best);
    }
    // Local search: move a task to a pair whose uploaders carry strictly less
    // demand. The sum of squared loads drops with every move, so this ends.
    loop {
        let mut moved = false;
        for (task, pairs) in options.iter_mut() {
            if !task.downloads.is_empty() {
                continue;
            }
            let cur = task.pair.expect("pair chosen above");
            load[cur.beta] -= 1;
            load[cur.gamma] -= 1;
            let cost = |p: &RepairPair| load[p.beta] + load[p.gamma];
            let best = pairs
                .iter()
                .min_by_key(|p| (cost(p), load[p.beta].max(load[p.gamma]), p.beta, p.gamma))
                .copied()
                .expect("feasible task has a pair");
            let next = if cost(&best) < cost(&cur) { best } else { cur };
            moved |= next != cur;
            load[next.beta] += 1;
            load[next.gamma] += 1;
            task.pair = Some(next);
        }
        if !moved {
            break;
        }
    }
}

/// Augmenting-path bipartite matching. Requests are inserted in order and
/// a matched request never becomes unmatched, so earlier requests win ties.
/// The result is a maximum matching.
fn priority_matching(wants: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    fn augment(
        i: usize,
        wants: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
        assigned: &mut [Option<usize>],
    ) -> bool {
        for &r in &wants[i] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].is_none_or(|j| augment(j, wants, owner, seen, assigned)) {
                owner[r] = Some(i);
                assigned[i] = Some(r);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    let mut assigned = vec![None; wants.len()];
    for i in 0..wants.len() {
        let mut seen = vec![false; n_right];
        augment(i, wants, &mut owner, &mut seen, &mut assigned);
    }
    assigned
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UplinkExceeded { slot: usize, source: usize },
    DownlinkExceeded { slot: usize, target: usize },
    SourceNotLive { target: usize, source: usize },
    InvalidPair { target: usize },
    Incomplete { target: usize },
    MakespanMismatch { reported: usize, actual: usize },
    BelowLowerBound { makespan: usize, bound: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UplinkExceeded { slot, source } => {
                write!(f, "uplink capacity exceeded: node {source} uploads twice in slot {slot}")
            }
            Violation::DownlinkExceeded { slot, target } => {
                write!(f, "downlink capacity exceeded: repair of {target} downloads twice in slot {slot}")
            }
            Violation::SourceNotLive { target, source } => {
                write!(f, "repair of {target} downloads from non-live node {source}")
            }
            Violation::InvalidPair { target } => write!(f, "repair of {target} does not use a valid repair pair"),
            Violation::Incomplete { target } => write!(f, "repair of {target} never completes"),
            Violation::MakespanMismatch { reported, actual } => {
                write!(f, "reported makespan {reported} but last repair completes in slot {actual}")
            }
            Violation::BelowLowerBound { makespan, bound } => {
                write!(f, "makespan {makespan} is below the capacity bound {bound}")
            }
        }
    }
}

/// All capacity, pair and completion violations; empty means valid.
pub fn verify_schedule(s: &RepairSchedule, code: &CodeParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let live: BTreeSet<usize> = s.available.iter().copied().collect();
    for (i, slot) in s.slots.iter().enumerate() {
        let mut up = BTreeMap::new();
        let mut down = BTreeMap::new();
        for tr in slot {
            *up.entry(tr.source).or_insert(0) += 1;
            *down.entry(tr.target).or_insert(0) += 1;
        }
        out.extend(up.into_iter().filter(|&(_, c)| c > 1).map(|(source, _)| Violation::UplinkExceeded { slot: i + 1, source }));
        out.extend(down.into_iter().filter(|&(_, c)| c > 1).map(|(target, _)| Violation::DownlinkExceeded { slot: i + 1, target }));
    }
    let mut actual = 0;
    for task in &s.tasks {
        for &(_, source) in &task.downloads {
            if !live.contains(&source) {
                out.push(Violation::SourceNotLive { target: task.target, source });
            }
        }
        match &task.pair {
            Some(p) if p.target == task.target && code.pair_is_valid(p) => match task.completed_at() {
                Some(c) => actual = actual.max(c),
                None => out.push(Violation::Incomplete { target: task.target }),
            },
            _ => out.push(Violation::InvalidPair { target: task.target }),
        }
    }
    if actual != s.makespan {
        out.push(Violation::MakespanMismatch { reported: s.makespan, actual });
    }
    let bound = makespan_lower_bound(s.tasks.len(), live.len());
    if s.makespan < bound {
        out.push(Violation::BelowLowerBound { makespan: s.makespan, bound });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hsrc15() -> CodeParams {
        CodeParams::new(2, 3, 12, 15).unwrap()
    }

    fn pw(c: &CodeParams, i: u64) -> usize {
        c.index_of_power(i).unwrap()
    }

    #[test]
    fn empty_and_single() {
        let c = hsrc15();
        let all: Vec<usize> = (0..15).collect();
        let s = schedule_repairs(&c, &[], &all).unwrap();
        assert_eq!(s.makespan, 0);
        assert!(verify_schedule(&s, &c).is_empty());

        let live: Vec<usize> = (1..15).collect();
        let s = schedule_repairs(&c, &[0], &live).unwrap();
        assert_eq!(s.makespan, 2);
        assert!(verify_schedule(&s, &c).is_empty());
    }

    #[test]
    fn seven_failures() {
        let c = hsrc15();
        let missing: Vec<usize> = (0..7).map(|i| pw(&c, i)).collect();
        let live: Vec<usize> = (7..15).map(|i| pw(&c, i)).collect();
        let s = schedule_repairs(&c, &missing, &live).unwrap();
        assert_eq!(verify_schedule(&s, &c), vec![]);
        assert!(s.completed_by(2) >= 6);
        assert!(s.makespan <= 3);
        assert_eq!(baselines(3, 7), Baselines { hybrid: 7, erasure: 9 });
    }

    #[test]
    fn no_pair_is_reported() {
        let c = hsrc15();
        let s = schedule_repairs(&c, &[0, 1], &[2]).unwrap();
        assert_eq!(s.infeasible, vec![0, 1]);
        assert_eq!(s.makespan, 0);
    }

    #[test]
    fn double_upload_is_flagged() {
        let c = hsrc15();
        let live: Vec<usize> = (7..15).map(|i| pw(&c, i)).collect();
        let (t0, t1) = (pw(&c, 0), pw(&c, 1));
        let a = pw(&c, 7);
        let slots = vec![vec![Transfer { target: t0, source: a }, Transfer { target: t1, source: a }]];
        let s = RepairSchedule::from_slots(&c, &live, slots);
        let v = verify_schedule(&s, &c);
        assert!(v.contains(&Violation::UplinkExceeded { slot: 1, source: a }));
        assert!(v.iter().any(|v| v.to_string().starts_with("uplink capacity exceeded")));
    }

    #[test]
    fn two_slot_table_replays() {
        let c = hsrc15();
        let live: Vec<usize> = (7..15).map(|i| pw(&c, i)).collect();
        let first = [7, 8, 9, 13, 11, 12, 10];
        let second = [9, 10, 11, 8, 13, 14, 7];
        let slot = |src: &[u64; 7]| {
            (0..7u64).map(|i| Transfer { target: pw(&c, i), source: pw(&c, src[i as usize]) }).collect()
        };
        let s = RepairSchedule::from_slots(&c, &live, vec![slot(&first), slot(&second)]);
        assert_eq!(verify_schedule(&s, &c), vec![]);
        assert_eq!(s.makespan, 2);
        assert_eq!(s.completed_by(2), 7);
    }

    #[test]
    fn lower_bound() {
        assert_eq!(makespan_lower_bound(0, 8), 0);
        assert_eq!(makespan_lower_bound(7, 8), 2);
        assert_eq!(makespan_lower_bound(7, 3), 5);
    }
}
