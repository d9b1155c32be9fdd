// SPDX-License-Identifier: Apache-2.0

//! Ranks the hand-made single-port scheme against the constructed ones on a
//! shared request stream, so differences are not drowned in sampling noise.

use prf_ports::fixtures::fixture_scheme;
use prf_ports::profile::UtilizationProfile;
use prf_ports::simulator::{compare_schemes, SimConfig};

fn main() -> prf_ports::Result<()> {
    let figs = [5, 10, 11, 12];
    let schemes: Vec<_> = figs.iter().map(|&f| fixture_scheme(f)).collect();
    let names: Vec<String> = figs.iter().map(|f| format!("fig{f}")).collect();
    let cfg = SimConfig::new(1_000_000, 7, UtilizationProfile::default());
    let cmp = compare_schemes(&schemes, &cfg)?;
    print!("{}", cmp.to_text(&names));
    for w in cmp.ranking.windows(2) {
        let d = cmp.delta(w[1], w[0]);
        println!(
            "{} vs {}: {:.1} half-widths apart",
            names[w[1]],
            names[w[0]],
            d.delta / d.half_width
        );
    }
    Ok(())
}
