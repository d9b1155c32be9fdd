// SPDX-License-Identifier: Apache-2.0

//! Critical-path estimates for every reference scheme, checked against a
//! timing budget given on the command line (default 5 gate delays).

use prf_ports::depth::{scheme_critical_path, threshold_compare};
use prf_ports::fixtures::{fixture_scheme, FIGURES};
use prf_ports::scheme::{classify_scheme, extract_masks};

fn main() -> prf_ports::Result<()> {
    let budget: u32 = std::env::args().nth(1).map_or(5, |a| a.parse().expect("budget must be a number"));
    println!("{:<6} {:<32} {:>5} {:>5}  witness", "scheme", "class", "masks", "depth");
    for fig in FIGURES {
        let scheme = fixture_scheme(fig);
        let report = scheme_critical_path(&scheme)?;
        let verdict = threshold_compare(&report, budget)?;
        let w = report.witness_element().unwrap();
        println!(
            "fig{fig:<3} {:<32} {:>5} {:>5}  S[{}][{}] {} ({} by {})",
            classify_scheme(&scheme).to_string(),
            extract_masks(&scheme).len(),
            report.scheme_depth,
            w.port,
            w.label,
            w.form,
            verdict.verdict,
            verdict.margin.abs()
        );
    }
    Ok(())
}
