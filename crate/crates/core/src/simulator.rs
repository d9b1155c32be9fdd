// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo conflict-rate estimation.
//!
//! Every cycle draws one uniform number per ALU operand and then one per
//! memory slot, in that order, whatever the scheme or pending state. Runs
//! that share a seed therefore see the same request stream, which is what
//! makes scheme comparisons low-variance.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arbitration::claim_cycle;
use crate::constructor::mask_occupancy;
use crate::error::{Error, Result};
use crate::profile::UtilizationProfile;
use crate::scheme::{classify_scheme, SchemeMatrix};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

pub const CAVEAT: &str = "metric: read-port conflict rate (conflicts / requests); this is not IPC";

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub cycles: u64,
    pub seed: u64,
    /// Conflicting slots keep requesting until granted.
    pub retry: bool,
    pub profile: UtilizationProfile,
}

impl SimConfig {
    pub fn new(cycles: u64, seed: u64, profile: UtilizationProfile) -> Self {
        SimConfig { cycles, seed, retry: false, profile }
    }

    pub fn with_retry(mut self, retry: bool) -> Self {
        self.retry = retry;
        self
    }
}

/// Raw moments of per-cycle (conflicts, requests) pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RatioMoments {
    pub n: u64,
    pub sx: u64,
    pub sy: u64,
    pub sxx: u64,
    pub sxy: u64,
    pub syy: u64,
}

impl RatioMoments {
    fn add(&mut self, x: u64, y: u64) {
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
    }

    pub fn rate(&self) -> f64 {
        if self.sy == 0 {
            0.0
        } else {
            self.sx as f64 / self.sy as f64
        }
    }

    /// Mean square of the linearized residual `x - R y`.
    fn residual_var(&self) -> f64 {
        let n = self.n as f64;
        let r = self.rate();
        ((self.sxx as f64 - 2.0 * r * self.sxy as f64 + r * r * self.syy as f64) / n).max(0.0)
    }

    /// Delta-method 95% half-width of [`rate`](Self::rate).
    pub fn half_width(&self) -> f64 {
        if self.sy == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let ybar = self.sy as f64 / n;
        Z95 * (self.residual_var() / n).sqrt() / ybar
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    pub cycles: u64,
    pub seed: u64,
    pub retry: bool,
    pub slot_labels: Vec<String>,
    pub slot_requests: Vec<u64>,
    pub slot_conflicts: Vec<u64>,
    /// Cycles in which each retained port delivered a read.
    pub port_grants: Vec<u64>,
    pub aggregate: RatioMoments,
}

impl ConflictReport {
    pub fn slot_rate(&self, slot: usize) -> f64 {
        let req = self.slot_requests[slot];
        if req == 0 {
            0.0
        } else {
            self.slot_conflicts[slot] as f64 / req as f64
        }
    }

    /// Binomial 95% half-width of a slot's conflict rate.
    pub fn slot_half_width(&self, slot: usize) -> f64 {
        let req = self.slot_requests[slot] as f64;
        if req == 0.0 {
            return 0.0;
        }
        let p = self.slot_rate(slot);
        Z95 * (p * (1.0 - p) / req).sqrt()
    }

    pub fn aggregate_rate(&self) -> f64 {
        self.aggregate.rate()
    }

    pub fn aggregate_half_width(&self) -> f64 {
        self.aggregate.half_width()
    }

    pub fn total_conflicts(&self) -> u64 {
        self.aggregate.sx
    }

    pub fn total_requests(&self) -> u64 {
        self.aggregate.sy
    }

    pub fn port_utilization(&self, port: usize) -> f64 {
        self.port_grants[port] as f64 / self.cycles as f64
    }

    pub fn port_half_width(&self, port: usize) -> f64 {
        let p = self.port_utilization(port);
        Z95 * (p * (1.0 - p) / self.cycles as f64).sqrt()
    }

    /// Line-oriented report followed by a `key=value` block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {CAVEAT}");
        let _ = writeln!(out, "# cycles {} seed {} retry {}", self.cycles, self.seed, if self.retry { "on" } else { "off" });
        for s in 0..self.slot_labels.len() {
            let _ = writeln!(
                out,
                "slot {:<5} requests {:>9} conflicts {:>9} rate {:.6} +/- {:.6}",
                self.slot_labels[s],
                self.slot_requests[s],
                self.slot_conflicts[s],
                self.slot_rate(s),
                self.slot_half_width(s)
            );
        }
        for p in 0..self.port_grants.len() {
            let _ = writeln!(
                out,
                "port {p:<2} utilization {:.6} +/- {:.6}",
                self.port_utilization(p),
                self.port_half_width(p)
            );
        }
        let _ = writeln!(
            out,
            "aggregate conflicts {} requests {} rate {:.6} +/- {:.6}",
            self.total_conflicts(),
            self.total_requests(),
            self.aggregate_rate(),
            self.aggregate_half_width()
        );
        out.push_str(&self.key_values());
        out
    }

    pub fn key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "cycles={}", self.cycles);
        let _ = writeln!(out, "retry={}", self.retry);
        let _ = writeln!(out, "conflicts={}", self.total_conflicts());
        let _ = writeln!(out, "requests={}", self.total_requests());
        let _ = writeln!(out, "conflict_rate={:.6}", self.aggregate_rate());
        let _ = writeln!(out, "half_width_95={:.6}", self.aggregate_half_width());
        out
    }
}

/// Per-cycle request thresholds and the draw order shared by all schemes.
struct RequestStream {
    rng: ChaCha8Rng,
    alu: Vec<f64>,
    mem: Vec<f64>,
}

impl RequestStream {
    fn new(cfg: &SimConfig) -> Self {
        RequestStream {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            alu: cfg.profile.alu_util.clone(),
            mem: cfg.profile.mem_util.clone(),
        }
    }

    fn next(&mut self) -> (u64, u64) {
        let mut alu = 0u64;
        for (p, &u) in self.alu.iter().enumerate() {
            if self.rng.gen::<f64>() < u {
                alu |= 1 << p;
            }
        }
        let mut mem = 0u64;
        for (s, &u) in self.mem.iter().enumerate() {
            if self.rng.gen::<f64>() < u {
                mem |= 1 << s;
            }
        }
        (alu, mem)
    }
}

/// One scheme's arbitration state across cycles.
struct Engine<'a> {
    scheme: &'a SchemeMatrix,
    retry: bool,
    pending: u64,
    requests: Vec<u64>,
    conflicts: Vec<u64>,
    port_grants: Vec<u64>,
    aggregate: RatioMoments,
}

impl<'a> Engine<'a> {
    fn new(scheme: &'a SchemeMatrix, retry: bool) -> Self {
        Engine {
            scheme,
            retry,
            pending: 0,
            requests: vec![0; scheme.slot_count()],
            conflicts: vec![0; scheme.slot_count()],
            port_grants: vec![0; scheme.ports()],
            aggregate: RatioMoments::default(),
        }
    }

    /// Returns this cycle's (conflicts, requests).
    fn step(&mut self, alu: u64, drawn: u64) -> (u64, u64) {
        let mem = drawn | self.pending;
        let port_grants = &mut self.port_grants;
        let conflict_bits = claim_cycle(self.scheme.row_bits(), &self.scheme.config().priority_order, alu, mem, |_, p| {
            port_grants[p] += 1;
        });
        let mut bits = alu;
        while bits != 0 {
            let p = bits.trailing_zeros() as usize;
            port_grants[p] += 1;
            bits &= bits - 1;
        }
        let mut bits = mem;
        while bits != 0 {
            let s = bits.trailing_zeros() as usize;
            self.requests[s] += 1;
            bits &= bits - 1;
        }
        let mut bits = conflict_bits;
        while bits != 0 {
            let s = bits.trailing_zeros() as usize;
            self.conflicts[s] += 1;
            bits &= bits - 1;
        }
        if self.retry {
            self.pending = conflict_bits;
        }
        let xy = (conflict_bits.count_ones() as u64, mem.count_ones() as u64);
        self.aggregate.add(xy.0, xy.1);
        xy
    }

    fn report(self, cfg: &SimConfig) -> ConflictReport {
        let config = self.scheme.config();
        ConflictReport {
            cycles: cfg.cycles,
            seed: cfg.seed,
            retry: cfg.retry,
            slot_labels: config.slots().iter().map(|s| s.to_string()).collect(),
            slot_requests: self.requests,
            slot_conflicts: self.conflicts,
            port_grants: self.port_grants,
            aggregate: self.aggregate,
        }
    }
}

fn check(scheme: &SchemeMatrix, cfg: &SimConfig) -> Result<()> {
    if cfg.cycles == 0 {
        return Err(Error::InvalidInput("at least one cycle must be simulated".into()));
    }
    cfg.profile.check(scheme.config())
}

pub fn simulate(scheme: &SchemeMatrix, cfg: &SimConfig) -> Result<ConflictReport> {
    check(scheme, cfg)?;
    let mut stream = RequestStream::new(cfg);
    let mut engine = Engine::new(scheme, cfg.retry);
    for _ in 0..cfg.cycles {
        let (alu, mem) = stream.next();
        engine.step(alu, mem);
    }
    Ok(engine.report(cfg))
}

/// First-order conflict probability of each slot: the occupancy of its mask,
/// ignoring contention from other memory slots. Defined only for schemes
/// whose masks are disjoint and cover every port.
pub fn analytic_conflict_bound(scheme: &SchemeMatrix, profile: &UtilizationProfile) -> Result<Vec<f64>> {
    if !classify_scheme(scheme).is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    profile.check(scheme.config())?;
    Ok((0..scheme.slot_count()).map(|s| mask_occupancy(&scheme.row(s), profile)).collect())
}

/// Aggregate-rate difference `rate(a) - rate(b)` under common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDelta {
    pub a: usize,
    pub b: usize,
    pub delta: f64,
    pub half_width: f64,
}

impl PairDelta {
    /// True when the difference is clear of zero by more than `k` half-widths.
    pub fn separated_by(&self, k: f64) -> bool {
        self.delta.abs() > k * self.half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reports: Vec<ConflictReport>,
    /// All pairs `a < b`.
    pub deltas: Vec<PairDelta>,
    /// Scheme indices from lowest to highest aggregate rate.
    pub ranking: Vec<usize>,
}

impl Comparison {
    pub fn delta(&self, a: usize, b: usize) -> PairDelta {
        if let Some(d) = self.deltas.iter().find(|d| d.a == a && d.b == b) {
            return *d;
        }
        let d = self.deltas.iter().find(|d| d.a == b && d.b == a).expect("pair of compared schemes");
        PairDelta { a, b, delta: -d.delta, half_width: d.half_width }
    }

    pub fn to_text(&self, names: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {CAVEAT}");
        if let Some(r) = self.reports.first() {
            let _ = writeln!(out, "# cycles {} seed {} retry {}", r.cycles, r.seed, if r.retry { "on" } else { "off" });
        }
        for (rank, &i) in self.ranking.iter().enumerate() {
            let r = &self.reports[i];
            let _ = writeln!(
                out,
                "rank {} {} rate {:.6} +/- {:.6}",
                rank + 1,
                names[i],
                r.aggregate_rate(),
                r.aggregate_half_width()
            );
        }
        for d in &self.deltas {
            let _ = writeln!(
                out,
                "delta {} - {} = {:+.6} +/- {:.6}",
                names[d.a], names[d.b], d.delta, d.half_width
            );
        }
        if let Some(r) = self.reports.first() {
            let _ = writeln!(out, "seed={}", r.seed);
            let _ = writeln!(out, "cycles={}", r.cycles);
        }
        for (i, r) in self.reports.iter().enumerate() {
            let _ = writeln!(out, "conflict_rate[{}]={:.6}", names[i], r.aggregate_rate());
        }
        out
    }
}

/// Runs every scheme on one shared request stream.
pub fn compare_schemes(schemes: &[SchemeMatrix], cfg: &SimConfig) -> Result<Comparison> {
    if schemes.len() < 2 {
        return Err(Error::InvalidInput("comparison needs at least two schemes".into()));
    }
    if schemes.iter().any(|s| s.config() != schemes[0].config()) {
        return Err(Error::ConfigMismatch);
    }
    for s in schemes {
        check(s, cfg)?;
    }
    let k = schemes.len();
    let mut stream = RequestStream::new(cfg);
    let mut engines: Vec<Engine> = schemes.iter().map(|s| Engine::new(s, cfg.retry)).collect();
    // Cross moments E[x_a x_b], E[x_a y_b], E[y_a x_b], E[y_a y_b] for a < b.
    let mut cross = vec![[0u64; 4]; k * k];
    let mut xy = vec![(0u64, 0u64); k];
    for _ in 0..cfg.cycles {
        let (alu, mem) = stream.next();
        for (e, slot) in engines.iter_mut().zip(xy.iter_mut()) {
            *slot = e.step(alu, mem);
        }
        for a in 0..k {
            for b in a + 1..k {
                let c = &mut cross[a * k + b];
                c[0] += xy[a].0 * xy[b].0;
                c[1] += xy[a].0 * xy[b].1;
                c[2] += xy[a].1 * xy[b].0;
                c[3] += xy[a].1 * xy[b].1;
            }
        }
    }
    let reports: Vec<ConflictReport> = engines.into_iter().map(|e| e.report(cfg)).collect();
    let n = cfg.cycles as f64;
    let mut deltas = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let (ma, mb) = (reports[a].aggregate, reports[b].aggregate);
            let (ra, rb) = (ma.rate(), mb.rate());
            let delta = ra - rb;
            let half_width = if ma.sy == 0 || mb.sy == 0 {
                ma.half_width().max(mb.half_width())
            } else {
                let (ya, yb) = (ma.sy as f64 / n, mb.sy as f64 / n);
                let c = cross[a * k + b].map(|v| v as f64 / n);
                let cov = c[0] - rb * c[1] - ra * c[2] + ra * rb * c[3];
                let var = ma.residual_var() / (ya * ya) + mb.residual_var() / (yb * yb) - 2.0 * cov / (ya * yb);
                Z95 * (var.max(0.0) / n).sqrt()
            };
            deltas.push(PairDelta { a, b, delta, half_width });
        }
    }
    let mut ranking: Vec<usize> = (0..k).collect();
    ranking.sort_by(|&a, &b| reports[a].aggregate_rate().total_cmp(&reports[b].aggregate_rate()).then(a.cmp(&b)));
    Ok(Comparison { reports, deltas, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_scheme;
    use crate::scheme::{MachineConfig, SchemeMatrix};

    fn cfg(cycles: u64) -> SimConfig {
        SimConfig::new(cycles, 7, UtilizationProfile::default())
    }

    #[test]
    fn silent_profile_is_idle() {
        let s = fixture_scheme(5);
        let c = SimConfig::new(1000, 1, UtilizationProfile::zeros(s.config()));
        let r = simulate(&s, &c).unwrap();
        assert_eq!(r.total_requests(), 0);
        assert_eq!(r.port_grants, vec![0; 8]);
        assert_eq!(r.aggregate_rate(), 0.0);
    }

    #[test]
    fn dedicated_ports_never_conflict() {
        let config = MachineConfig::default().with_memory_ports(9);
        let rows = (0..9).map(|s| 1u64 << (8 + s)).collect();
        let s = SchemeMatrix::from_bits(config.clone(), rows).unwrap();
        let c = SimConfig::new(20_000, 3, UtilizationProfile::uniform(&config, 0.9, 0.9).unwrap()).with_retry(true);
        assert_eq!(simulate(&s, &c).unwrap().total_conflicts(), 0);
    }

    #[test]
    fn reproducible() {
        let s = fixture_scheme(11);
        assert_eq!(simulate(&s, &cfg(5000)).unwrap(), simulate(&s, &cfg(5000)).unwrap());
    }

    #[test]
    fn comparison_reuses_the_single_run_stream() {
        let (a, b) = (fixture_scheme(5), fixture_scheme(10));
        let cmp = compare_schemes(&[a.clone(), b.clone()], &cfg(5000)).unwrap();
        assert_eq!(cmp.reports[0], simulate(&a, &cfg(5000)).unwrap());
        assert_eq!(cmp.reports[1], simulate(&b, &cfg(5000)).unwrap());
    }

    #[test]
    fn identical_schemes_have_zero_delta() {
        let s = fixture_scheme(6);
        let cmp = compare_schemes(&[s.clone(), s], &cfg(2000)).unwrap();
        assert_eq!(cmp.deltas[0].delta, 0.0);
        assert!(cmp.deltas[0].half_width.abs() < 1e-9);
    }

    #[test]
    fn mismatched_configs_rejected() {
        let other = fixture_scheme(5).with_config(MachineConfig::default().with_memory_ports(1)).unwrap();
        assert_eq!(compare_schemes(&[fixture_scheme(5), other], &cfg(10)), Err(Error::ConfigMismatch));
        assert!(compare_schemes(&[fixture_scheme(5)], &cfg(10)).is_err());
    }

    #[test]
    fn analytic_bound_examples() {
        let p = UtilizationProfile::default();
        let b11 = analytic_conflict_bound(&fixture_scheme(11), &p).unwrap();
        assert!((b11[0] - 0.247).abs() < 1e-9);
        let b10 = analytic_conflict_bound(&fixture_scheme(10), &p).unwrap();
        assert!((b10[8] - 0.148).abs() < 1e-9);
        let zero = analytic_conflict_bound(&fixture_scheme(10), &UtilizationProfile::zeros(&MachineConfig::default())).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert_eq!(analytic_conflict_bound(&fixture_scheme(1), &p), Err(Error::NotSymmetric));
    }

    #[test]
    fn report_text_has_caveat_and_seed() {
        let text = simulate(&fixture_scheme(5), &cfg(100)).unwrap().to_text();
        assert!(text.starts_with(&format!("# {CAVEAT}\n")));
        assert!(text.contains("seed=7\n"));
    }

    #[test]
    fn zero_cycles_rejected() {
        assert!(simulate(&fixture_scheme(5), &cfg(0)).is_err());
    }
}
