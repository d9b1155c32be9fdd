// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use prf_ports::constructor::{assign_masks, build_scheme, construct, select_masks, MaskPlan};
use prf_ports::depth::scheme_critical_path;
use prf_ports::fixtures::fixture_scheme;
use prf_ports::profile::UtilizationProfile;
use prf_ports::scheme::{classify_scheme, extract_masks, MachineConfig, Mask, SchemeClass};

const ALU: [f64; 8] = [13.4, 14.8, 9.9, 11.9, 13.4, 14.8, 9.9, 11.9];
const MEM: [f64; 9] = [21.0, 8.1, 21.1, 8.1, 11.6, 5.3, 11.6, 5.3, 7.8];
const KIND: [u8; 9] = [0, 1, 0, 1, 2, 3, 2, 3, 4];
const UNIT: [u8; 9] = [4, 4, 5, 5, 6, 6, 7, 7, 8];

fn occ(ports: &[usize]) -> f64 {
    ports.iter().map(|&p| ALU[p]).sum()
}

fn pvar(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Every partition of 0..8 into blocks of `c`, from all port permutations.
fn partitions_by_permutation(c: usize) -> BTreeSet<Vec<Vec<usize>>> {
    fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut perms = Vec::new();
    permute(&mut (0..8).collect(), 0, &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let mut blocks: Vec<Vec<usize>> = p
                .chunks(c)
                .map(|b| {
                    let mut b = b.to_vec();
                    b.sort();
                    b
                })
                .collect();
            blocks.sort();
            blocks
        })
        .collect()
}

#[test]
fn selected_pairs_have_least_variance() {
    let all = partitions_by_permutation(2);
    assert_eq!(all.len(), 105);
    let best = all.iter().map(|p| pvar(&p.iter().map(|b| occ(b)).collect::<Vec<_>>())).fold(f64::INFINITY, f64::min);
    let masks = select_masks(&MachineConfig::default(), &UtilizationProfile::default(), 2).unwrap();
    let chosen: Vec<f64> = masks.iter().map(|m| occ(&m.ports().collect::<Vec<_>>())).collect();
    assert!((pvar(&chosen) - best).abs() < 1e-9);
    assert_eq!(partitions_by_permutation(4).len(), 35);
}

/// Independent feasibility test and objective for one assignment.
fn oracle_key(masks: &[Vec<usize>], asg: &[usize]) -> Option<(f64, f64, usize)> {
    let k = masks.len();
    let mut sizes = vec![0; k];
    for &m in asg {
        sizes[m] += 1;
    }
    let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
    if lo == 0 || hi - lo > 1 {
        return None;
    }
    for a in 0..9 {
        for b in a + 1..9 {
            if asg[a] == asg[b] && KIND[a] == KIND[b] {
                return None;
            }
        }
    }
    let mut lead: Vec<usize> = (0..9).collect();
    lead.sort_by(|&a, &b| MEM[b].partial_cmp(&MEM[a]).unwrap().then(a.cmp(&b)));
    lead.truncate(k);
    for &x in &lead {
        for &y in &lead {
            if MEM[x] > MEM[y] + 1e-9 && occ(&masks[asg[x]]) > occ(&masks[asg[y]]) + 1e-9 {
                return None;
            }
        }
    }
    let mut load = vec![0.0; k];
    for (s, &m) in asg.iter().enumerate() {
        load[m] += MEM[s] / 100.0;
    }
    let e: f64 = (0..k).map(|m| occ(&masks[m]) / 100.0 * load[m]).sum();
    let mut same_unit = 0;
    for a in 0..9 {
        for b in a + 1..9 {
            if asg[a] == asg[b] && UNIT[a] == UNIT[b] {
                same_unit += 1;
            }
        }
    }
    Some((pvar(&load), e, same_unit))
}

fn assert_no_better_assignment(plan: &MaskPlan) {
    let masks: Vec<Vec<usize>> = plan.masks.iter().map(|m| m.ports().collect()).collect();
    let k = masks.len();
    let ours = oracle_key(&masks, &plan.assignment).expect("plan satisfies the hard rules");
    let mut asg = vec![0usize; 9];
    let total = k.pow(9);
    for code in 0..total {
        let mut c = code;
        for a in asg.iter_mut() {
            *a = c % k;
            c /= k;
        }
        if let Some(key) = oracle_key(&masks, &asg) {
            let better = key.0 < ours.0 - 1e-12
                || ((key.0 - ours.0).abs() <= 1e-12
                    && (key.1 < ours.1 - 1e-12 || ((key.1 - ours.1).abs() <= 1e-12 && key.2 < ours.2)));
            assert!(!better, "assignment {asg:?} beats the plan: {key:?} < {ours:?}");
        }
    }
}

#[test]
fn assignment_is_optimal_for_pairs_and_quads() {
    let config = MachineConfig::default();
    let profile = UtilizationProfile::default();
    for c in [2, 4] {
        assert_no_better_assignment(&construct(&config, &profile, c).unwrap());
    }
}

#[test]
fn constructed_schemes_reach_published_depths() {
    let config = MachineConfig::default();
    let profile = UtilizationProfile::default();
    for (c, depth) in [(1, 2), (2, 5), (4, 9)] {
        let scheme = build_scheme(&construct(&config, &profile, c).unwrap());
        assert_eq!(classify_scheme(&scheme), SchemeClass::UniformSymmetric { popcount: c });
        assert_eq!(scheme_critical_path(&scheme).unwrap().scheme_depth, depth, "popcount {c}");
    }
}

#[test]
fn quads_alternate_between_two_masks() {
    let plan = construct(&MachineConfig::default(), &UtilizationProfile::default(), 4).unwrap();
    let scheme = build_scheme(&plan);
    assert_eq!(extract_masks(&scheme).len(), 2);
    // Both units of each kind land on different masks, like the published quad scheme.
    for (a, b) in [(0, 2), (1, 3), (4, 6), (5, 7)] {
        assert_ne!(plan.assignment[a], plan.assignment[b]);
    }
    assert_eq!(extract_masks(&fixture_scheme(12)).len(), 2);
}

#[test]
fn planning_is_deterministic() {
    let config = MachineConfig::default();
    let profile = UtilizationProfile::default();
    for c in [1, 2, 4] {
        assert_eq!(construct(&config, &profile, c).unwrap(), construct(&config, &profile, c).unwrap());
    }
}

#[test]
fn masks_partition_the_ports() {
    let config = MachineConfig::default();
    for c in [1, 2, 4, 8] {
        let masks = select_masks(&config, &UtilizationProfile::default(), c).unwrap();
        let union = masks.iter().fold(0u64, |acc, m| {
            assert_eq!(acc & m.bits(), 0);
            acc | m.bits()
        });
        assert_eq!(union, 0xff);
        assert!(masks.iter().all(|m| m.popcount() == c));
    }
}

#[test]
fn whole_file_mask_cannot_host_every_slot() {
    let config = MachineConfig::default();
    let masks = select_masks(&config, &UtilizationProfile::default(), 8).unwrap();
    assert_eq!(masks, vec![Mask::new(0xff, 8)]);
    assert!(assign_masks(&config, &masks, &UtilizationProfile::default()).is_err());
}
