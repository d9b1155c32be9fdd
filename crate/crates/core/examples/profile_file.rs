// SPDX-License-Identifier: Apache-2.0

//! Reads a utilization profile in the text format (or prints the built-in
//! one when no path is given) and shows the mask occupancies it implies.

use prf_ports::constructor::{mask_occupancy, select_masks};
use prf_ports::profile::UtilizationProfile;
use prf_ports::scheme::MachineConfig;

fn main() -> prf_ports::Result<()> {
    let config = MachineConfig::default();
    let profile = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| prf_ports::Error::InvalidInput(format!("{path}: {e}")))?;
            UtilizationProfile::parse(&text, &config)?
        }
        None => {
            let p = UtilizationProfile::default();
            print!("{}", p.to_text(&config));
            p
        }
    };
    for popcount in [1, 2, 4] {
        let masks = select_masks(&config, &profile, popcount)?;
        let occ: Vec<String> = masks
            .iter()
            .map(|m| format!("{m} {:.1}%", mask_occupancy(m, &profile) * 100.0))
            .collect();
        println!("popcount {popcount}: {}", occ.join("  "));
    }
    Ok(())
}
