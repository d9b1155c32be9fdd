// SPDX-License-Identifier: Apache-2.0

//! Reference schemes for the default 17 → 8 port machine, keyed by figure
//! number. The same files live under `fixtures/` for use with the CLI.

use crate::scheme::{parse_scheme, MachineConfig, SchemeMatrix};

pub const FIGURES: [u32; 9] = [1, 2, 3, 5, 6, 7, 10, 11, 12];

pub fn fixture_text(figure: u32) -> &'static str {
    match figure {
        1 => include_str!("../fixtures/fig1.scheme"),
        2 => include_str!("../fixtures/fig2.scheme"),
        3 => include_str!("../fixtures/fig3.scheme"),
        5 => include_str!("../fixtures/fig5.scheme"),
        6 => include_str!("../fixtures/fig6.scheme"),
        7 => include_str!("../fixtures/fig7.scheme"),
        10 => include_str!("../fixtures/fig10.scheme"),
        11 => include_str!("../fixtures/fig11.scheme"),
        12 => include_str!("../fixtures/fig12.scheme"),
        _ => panic!("no fixture for figure {figure}"),
    }
}

/// Parses a fixture under the default machine configuration.
pub fn fixture_scheme(figure: u32) -> SchemeMatrix {
    parse_scheme(fixture_text(figure), &MachineConfig::default())
        .unwrap_or_else(|e| panic!("fixture fig{figure} is malformed: {e}"))
}
