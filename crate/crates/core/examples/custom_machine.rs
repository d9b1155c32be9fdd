// SPDX-License-Identifier: Apache-2.0

//! A smaller core: 3 ALUs, one load, one STA and one STD unit. Builds every
//! feasible uniform scheme, estimates its depth and simulates it.

use prf_ports::constructor::{build_scheme, construct};
use prf_ports::depth::scheme_critical_path;
use prf_ports::profile::UtilizationProfile;
use prf_ports::scheme::MachineConfig;
use prf_ports::simulator::{simulate, SimConfig};

fn main() -> prf_ports::Result<()> {
    let config = MachineConfig::new(3, 1, 1, 1);
    let profile = UtilizationProfile::new(
        vec![0.15, 0.12, 0.15, 0.12, 0.10, 0.08],
        vec![0.25, 0.08, 0.12, 0.06, 0.09],
    )?;
    println!("{} retained ports, {} memory slots", config.retained_ports(), config.slot_count());
    for popcount in 1..=config.retained_ports() {
        match construct(&config, &profile, popcount) {
            Ok(plan) => {
                let scheme = build_scheme(&plan);
                let depth = scheme_critical_path(&scheme)?.scheme_depth;
                let report = simulate(&scheme, &SimConfig::new(100_000, 1, profile.clone()))?;
                println!(
                    "popcount {popcount}: {} masks, depth {depth}, conflict rate {:.4} +/- {:.4}",
                    plan.masks.len(),
                    report.aggregate_rate(),
                    report.aggregate_half_width()
                );
            }
            Err(e) => println!("popcount {popcount}: {e}"),
        }
    }
    Ok(())
}
