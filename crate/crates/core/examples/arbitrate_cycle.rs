// SPDX-License-Identifier: Apache-2.0

//! One arbitration cycle on the 17 → 8 port scheme with intersecting masks:
//! a load base operand falls back from port 1 to port 4 when the ALU on
//! port 1 is busy, and loses both ports once port 4 is taken too.

use prf_ports::arbitration::{arbitrate, Operand, RequestVectors};
use prf_ports::fixtures::fixture_scheme;

fn show(label: &str, req: RequestVectors) {
    let scheme = fixture_scheme(1);
    let config = scheme.config();
    let out = arbitrate(&scheme, req);
    println!("{label}");
    for port in 0..scheme.ports() {
        let who = match out.grant.granted(port) {
            Some(op @ Operand::Alu(_)) => format!("ALU operand {}", op.label(config)),
            Some(op @ Operand::Mem(_)) => format!("memory operand {}", op.label(config)),
            None => "-".to_string(),
        };
        println!("  port {port}: {who}");
    }
    let lost: Vec<String> = out.conflicts.iter().map(|&s| config.slot(s).to_string()).collect();
    println!("  conflicts: {}", if lost.is_empty() { "none".into() } else { lost.join(", ") });
}

fn main() {
    let config = fixture_scheme(1).config().clone();
    let base = config.slot_index("4.s1").unwrap();
    let sta_index = config.slot_index("6.s2").unwrap();

    show("load base alone:", RequestVectors::default().with_mem(base));
    show("ALU busy on port 1:", RequestVectors::default().with_mem(base).with_alu(1));
    show(
        "ALU busy on ports 1 and 4, STA index also requesting:",
        RequestVectors::default().with_mem(base).with_mem(sta_index).with_alu(1).with_alu(4),
    );
}
