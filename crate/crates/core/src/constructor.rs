// SPDX-License-Identifier: Apache-2.0

//! Builds uniform symmetric schemes from a utilization profile.
//!
//! Stage one partitions the retained ports into masks of equal size with
//! balanced ALU occupancy. Stage two hands the masks to memory-operand slots
//! so that heavily used slots spread out and avoid busy ports.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::profile::UtilizationProfile;
use crate::scheme::{Mask, MachineConfig, SchemeMatrix, SlotKind};

const EPS: f64 = 1e-12;

fn cmp_f64(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPS {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Probability that some port of the mask is busy with an ALU read, to first
/// order: the sum of the ALU utilizations over its ports. Ports without an
/// ALU owner contribute nothing.
pub fn mask_occupancy(mask: &Mask, profile: &UtilizationProfile) -> f64 {
    mask.ports().filter_map(|p| profile.alu_util.get(p)).sum()
}

/// All partitions of `0..ports` into blocks of `size`, each block in
/// ascending order and blocks ordered by their lowest port.
pub fn enumerate_partitions(ports: usize, size: usize) -> Result<Vec<Vec<Mask>>> {
    if size == 0 || ports % size != 0 {
        return Err(Error::PopcountNotDivisor { popcount: size, ports });
    }
    fn rec(free: u64, ports: usize, size: usize, current: &mut Vec<Mask>, out: &mut Vec<Vec<Mask>>) {
        if free == 0 {
            out.push(current.clone());
            return;
        }
        let first = free.trailing_zeros() as usize;
        let rest: Vec<usize> = (first + 1..ports).filter(|&p| free >> p & 1 == 1).collect();
        let mut pick = Vec::with_capacity(size - 1);
        choose(&rest, size - 1, 0, &mut pick, &mut |chosen| {
            let bits = chosen.iter().fold(1u64 << first, |acc, &p| acc | 1 << p);
            current.push(Mask::new(bits, ports));
            rec(free & !bits, ports, size, current, out);
            current.pop();
        });
    }
    fn choose(items: &[usize], k: usize, start: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pick.len() == k {
            f(pick);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - pick.len() {
                break;
            }
            pick.push(items[i]);
            choose(items, k, i + 1, pick, f);
            pick.pop();
        }
    }
    let mut out = Vec::new();
    let full = if ports == 64 { u64::MAX } else { (1u64 << ports) - 1 };
    rec(full, ports, size, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Multi-port masks whose ALU-owned ports all come from one operation class.
fn single_class_masks(masks: &[Mask], config: &MachineConfig) -> usize {
    masks
        .iter()
        .filter(|m| m.popcount() > 1)
        .filter(|m| {
            let mut classes = m.ports().filter_map(|p| config.port_owner(p)).map(|alu| config.alu_classes[alu]);
            match classes.next() {
                Some(first) => classes.all(|c| c == first),
                None => false,
            }
        })
        .count()
}

/// Chooses the partition of the retained ports into masks of `popcount`
/// ports. Candidates are ranked by occupancy variance, then the largest
/// occupancy, then how many masks draw on a single ALU class, then
/// enumeration order. The result is sorted by port list.
pub fn select_masks(config: &MachineConfig, profile: &UtilizationProfile, popcount: usize) -> Result<Vec<Mask>> {
    profile.check(config)?;
    let partitions = enumerate_partitions(config.retained_ports(), popcount)?;
    let score = |masks: &[Mask]| {
        let occ: Vec<f64> = masks.iter().map(|m| mask_occupancy(m, profile)).collect();
        let max = occ.iter().copied().fold(0.0, f64::max);
        (variance(&occ), max, single_class_masks(masks, config))
    };
    let mut best: Option<(usize, (f64, f64, usize))> = None;
    for (i, masks) in partitions.iter().enumerate() {
        let s = score(masks);
        let better = match &best {
            None => true,
            Some((_, b)) => cmp_f64(s.0, b.0)
                .then(cmp_f64(s.1, b.1))
                .then(s.2.cmp(&b.2))
                == Ordering::Less,
        };
        if better {
            best = Some((i, s));
        }
    }
    let mut masks = partitions[best.expect("at least one partition").0].clone();
    masks.sort();
    Ok(masks)
}

/// Tie-break values of an assignment, smaller is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanObjective {
    /// Variance over masks of the summed utilization of their slots.
    pub load_variance: f64,
    /// Σ over masks of occupancy × summed slot utilization: a first-order
    /// estimate of conflicts per cycle.
    pub expected_conflicts: f64,
    /// Pairs of slots of one unit that share a mask.
    pub same_unit_pairs: usize,
}

impl PlanObjective {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_f64(self.load_variance, other.load_variance)
            .then(cmp_f64(self.expected_conflicts, other.expected_conflicts))
            .then(self.same_unit_pairs.cmp(&other.same_unit_pairs))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPlan {
    pub config: MachineConfig,
    pub masks: Vec<Mask>,
    /// `occupancy[m]` is [`mask_occupancy`] of `masks[m]`.
    pub occupancy: Vec<f64>,
    /// `assignment[s]` indexes `masks` for slot `s` in row order.
    pub assignment: Vec<usize>,
    pub objective: PlanObjective,
}

impl MaskPlan {
    pub fn mask_of(&self, slot: usize) -> Mask {
        self.masks[self.assignment[slot]]
    }

    /// Slots sharing each mask, in row order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.masks.len()];
        for (s, &m) in self.assignment.iter().enumerate() {
            groups[m].push(s);
        }
        groups
    }
}

/// Evaluates an assignment against the utilization profile.
pub fn plan_objective(
    config: &MachineConfig,
    masks: &[Mask],
    profile: &UtilizationProfile,
    assignment: &[usize],
) -> PlanObjective {
    let slots = config.slots();
    let mut load = vec![0.0; masks.len()];
    for (s, &m) in assignment.iter().enumerate() {
        load[m] += profile.mem_util[s];
    }
    let expected_conflicts = masks.iter().zip(&load).map(|(m, u)| mask_occupancy(m, profile) * u).sum();
    let mut same_unit_pairs = 0;
    for a in 0..assignment.len() {
        for b in a + 1..assignment.len() {
            if assignment[a] == assignment[b] && slots[a].unit == slots[b].unit {
                same_unit_pairs += 1;
            }
        }
    }
    PlanObjective { load_variance: variance(&load), expected_conflicts, same_unit_pairs }
}

/// Assigns one mask to every memory-operand slot.
///
/// Hard rules: every mask is used, group sizes differ by at most one, slots
/// of the same kind get different masks, and among the `K` most used slots
/// (`K` = number of masks) a busier slot never gets a busier mask. Within
/// those rules the search is exhaustive over [`PlanObjective`], with the
/// lexicographically smallest assignment winning remaining ties.
pub fn assign_masks(config: &MachineConfig, masks: &[Mask], profile: &UtilizationProfile) -> Result<MaskPlan> {
    profile.check(config)?;
    let n = config.slot_count();
    let k = masks.len();
    if k == 0 {
        return Err(Error::Infeasible("no masks to assign".into()));
    }
    if n < k {
        return Err(Error::Infeasible(format!("{n} slots cannot use all {k} masks")));
    }
    let slots = config.slots();
    let kinds = [
        SlotKind::LoadBase,
        SlotKind::LoadIndex,
        SlotKind::StaBase,
        SlotKind::StaIndex,
        SlotKind::StdData,
    ];
    for kind in kinds {
        let count = slots.iter().filter(|s| s.kind == kind).count();
        if count > k {
            return Err(Error::Infeasible(format!(
                "{count} {} slots need distinct masks but only {k} exist",
                kind.as_str()
            )));
        }
    }
    let kind_bit: Vec<u32> = slots.iter().map(|s| 1 << kinds.iter().position(|&k| k == s.kind).unwrap()).collect();
    let occupancy: Vec<f64> = masks.iter().map(|m| mask_occupancy(m, profile)).collect();
    let mut leaders: Vec<usize> = (0..n).collect();
    leaders.sort_by(|&a, &b| profile.mem_util[b].total_cmp(&profile.mem_util[a]).then(a.cmp(&b)));
    leaders.truncate(k);

    struct Search<'a> {
        n: usize,
        k: usize,
        cap: usize,
        floor: usize,
        kind_bit: &'a [u32],
        leaders: &'a [usize],
        occupancy: &'a [f64],
        util: &'a [f64],
        assignment: Vec<usize>,
        sizes: Vec<usize>,
        kinds: Vec<u32>,
        best: Option<(PlanObjective, Vec<usize>)>,
        evaluate: &'a dyn Fn(&[usize]) -> PlanObjective,
    }
    impl Search<'_> {
        fn leaders_ok(&self) -> bool {
            self.leaders.iter().all(|&x| {
                self.leaders.iter().all(|&y| {
                    !(self.util[x] > self.util[y] + EPS
                        && self.occupancy[self.assignment[x]] > self.occupancy[self.assignment[y]] + EPS)
                })
            })
        }
        fn run(&mut self, s: usize) {
            if s == self.n {
                if self.sizes.iter().any(|&z| z < self.floor) || !self.leaders_ok() {
                    return;
                }
                let obj = (self.evaluate)(&self.assignment);
                // Assignments arrive in lexicographic order, so ties keep the first.
                if self.best.as_ref().is_none_or(|(b, _)| obj.cmp(b) == Ordering::Less) {
                    self.best = Some((obj, self.assignment.clone()));
                }
                return;
            }
            for m in 0..self.k {
                if self.sizes[m] >= self.cap || self.kinds[m] & self.kind_bit[s] != 0 {
                    continue;
                }
                self.assignment.push(m);
                self.sizes[m] += 1;
                self.kinds[m] |= self.kind_bit[s];
                self.run(s + 1);
                self.assignment.pop();
                self.sizes[m] -= 1;
                self.kinds[m] &= !self.kind_bit[s];
            }
        }
    }
    let evaluate = |a: &[usize]| plan_objective(config, masks, profile, a);
    let mut search = Search {
        n,
        k,
        cap: n.div_ceil(k),
        floor: n / k,
        kind_bit: &kind_bit,
        leaders: &leaders,
        occupancy: &occupancy,
        util: &profile.mem_util,
        assignment: Vec::with_capacity(n),
        sizes: vec![0; k],
        kinds: vec![0; k],
        best: None,
        evaluate: &evaluate,
    };
    search.run(0);
    let (objective, assignment) = search
        .best
        .ok_or_else(|| Error::Infeasible("no assignment keeps groups balanced with distinct kinds per mask".into()))?;
    Ok(MaskPlan { config: config.clone(), masks: masks.to_vec(), occupancy, assignment, objective })
}

/// The scheme whose row for each slot is its assigned mask.
pub fn build_scheme(plan: &MaskPlan) -> SchemeMatrix {
    let rows = plan.assignment.iter().map(|&m| plan.masks[m].bits()).collect();
    SchemeMatrix::from_bits(plan.config.clone(), rows).expect("plan masks fit the machine")
}

/// Runs both stages for one popcount.
pub fn construct(config: &MachineConfig, profile: &UtilizationProfile, popcount: usize) -> Result<MaskPlan> {
    let masks = select_masks(config, profile, popcount)?;
    assign_masks(config, &masks, profile)
}
