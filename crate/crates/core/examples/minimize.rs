// SPDX-License-Identifier: Apache-2.0

//! Exact two-level minimization with a depth-first objective, and how the
//! two merge rules score the same cover.

use prf_ports::depth::{DepthModel, MergeRule};
use prf_ports::logic::{minimum_cnf, minimum_dnf, prime_implicants, BooleanFunction};

fn main() -> prf_ports::Result<()> {
    let names = |n: usize| (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>();
    let cases: Vec<(&str, BooleanFunction)> = vec![
        ("majority", BooleanFunction::from_fn(names(3), |a| (a as u32).count_ones() >= 2)?),
        ("parity", BooleanFunction::from_fn(names(3), |a| (a as u32).count_ones() % 2 == 1)?),
        ("x0 & x1 | x2", BooleanFunction::from_fn(names(3), |a| a & 3 == 3 || a & 4 != 0)?),
        ("(x0|x1)&(x2|x3)", BooleanFunction::from_fn(names(4), |a| a & 3 != 0 && a & 12 != 0)?),
    ];
    for (name, f) in cases {
        let primes = prime_implicants(&f)?;
        let dnf = minimum_dnf(&f)?;
        let cnf = minimum_cnf(&f)?;
        let balanced = DepthModel::with_merge(MergeRule::Balanced);
        let optimal = DepthModel::with_merge(MergeRule::Optimal);
        println!("{name}: {} primes", primes.len());
        println!("  MDNF {dnf}  depth {} / {}", balanced.tree_depth(&dnf), optimal.tree_depth(&dnf));
        println!("  MCNF {cnf}  depth {} / {}", balanced.tree_depth(&cnf), optimal.tree_depth(&cnf));
    }
    println!("(depths: balanced merge / optimal merge)");
    Ok(())
}
