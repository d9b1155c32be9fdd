// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo conflict rates per operand slot next to the first-order
//! occupancy estimate, with and without retrying canceled operands.

use prf_ports::fixtures::fixture_scheme;
use prf_ports::profile::UtilizationProfile;
use prf_ports::simulator::{analytic_conflict_bound, simulate, SimConfig};

fn main() -> prf_ports::Result<()> {
    let cycles = std::env::args().nth(1).map_or(200_000, |a| a.parse().expect("cycle count"));
    let scheme = fixture_scheme(11);
    let profile = UtilizationProfile::default();
    let bound = analytic_conflict_bound(&scheme, &profile)?;
    let plain = simulate(&scheme, &SimConfig::new(cycles, 42, profile.clone()))?;
    let retry = simulate(&scheme, &SimConfig::new(cycles, 42, profile).with_retry(true))?;

    println!("slot   occupancy   simulated    with retry");
    for s in 0..scheme.slot_count() {
        println!(
            "{:<5} {:>9.4}   {:>9.4}   {:>11.4}",
            plain.slot_labels[s],
            bound[s],
            plain.slot_rate(s),
            retry.slot_rate(s)
        );
    }
    println!();
    print!("{}", retry.to_text());
    Ok(())
}
