// SPDX-License-Identifier: Apache-2.0

//! Builds uniform symmetric schemes with 1, 2 and 4 ports per mask from the
//! measured utilization profile and prints each plan.

use prf_ports::constructor::{build_scheme, construct};
use prf_ports::depth::scheme_critical_path;
use prf_ports::profile::UtilizationProfile;
use prf_ports::scheme::{serialize_scheme, MachineConfig};

fn main() -> prf_ports::Result<()> {
    let config = MachineConfig::default();
    let profile = UtilizationProfile::default();
    for popcount in [1, 2, 4] {
        let plan = construct(&config, &profile, popcount)?;
        let scheme = build_scheme(&plan);
        println!("== {popcount} port(s) per mask, depth {}", scheme_critical_path(&scheme)?.scheme_depth);
        for (m, group) in plan.groups().iter().enumerate() {
            let slots: Vec<String> = group
                .iter()
                .map(|&s| format!("{} ({:.1}%)", config.slot(s), profile.mem_util[s] * 100.0))
                .collect();
            println!("  mask {:<14} occupancy {:>5.1}%  {}", plan.masks[m].to_string(), plan.occupancy[m] * 100.0, slots.join(", "));
        }
        println!(
            "  load variance {:.3e}, expected conflicts {:.4}/cycle",
            plan.objective.load_variance, plan.objective.expected_conflicts
        );
        print!("{}", serialize_scheme(&scheme));
    }
    Ok(())
}
