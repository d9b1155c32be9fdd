// SPDX-License-Identifier: Apache-2.0

//! The boolean function behind a grant-matrix element, its minimum DNF and
//! CNF, the resulting gate depth, and its PLA export.

use prf_ports::arbitration::{grant_function, grant_pla, Operand};
use prf_ports::depth::element_depth;
use prf_ports::fixtures::fixture_scheme;
use prf_ports::logic::{minimum_cnf, minimum_dnf};

fn main() -> prf_ports::Result<()> {
    for (fig, port, slot) in [(5, 4, "8.s2"), (1, 4, "6.s2"), (3, 6, "8.s2")] {
        let scheme = fixture_scheme(fig);
        let operand = Operand::Mem(scheme.config().slot_index(slot).unwrap());
        let f = grant_function(&scheme, port, operand)?;
        let depth = element_depth(&f)?;
        println!("fig{fig} S[{port}][{slot}] over {}", f.variables().join(", "));
        println!("  MDNF: {}", minimum_dnf(&f)?);
        println!("  MCNF: {}", minimum_cnf(&f)?);
        println!("  depth {} via {} (MDNF {}, MCNF {})", depth.depth, depth.form, depth.mdnf_depth, depth.mcnf_depth);
    }

    let scheme = fixture_scheme(5);
    let std = Operand::Mem(scheme.config().slot_index("8.s2").unwrap());
    println!("\n{}", grant_pla(&scheme, 4, std)?);
    Ok(())
}
