// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria for the library and the `prfports` command line.
//! Runs without the libtest harness so each criterion prints exactly one
//! PASS/FAIL line; any failure makes the process exit non-zero.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prf_ports::arbitration::{arbitrate, grant_function, support, truth_table, Operand, RequestVectors, Variable};
use prf_ports::cli;
use prf_ports::constructor::{assign_masks, build_scheme, mask_occupancy, plan_objective, select_masks};
use prf_ports::depth::scheme_critical_path;
use prf_ports::fixtures::{fixture_scheme, FIGURES};
use prf_ports::logic::{minimum_cnf, minimum_dnf, BooleanFunction};
use prf_ports::profile::UtilizationProfile;
use prf_ports::scheme::{extract_masks, MachineConfig, Mask, SchemeMatrix, SlotKind};
use prf_ports::simulator::{compare_schemes, SimConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_path(fig: u32) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("fixtures");
    p.push(format!("fig{fig}.scheme"));
    p.to_string_lossy().into_owned()
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["prfports"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, out, err)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// 1. Published depths through the `estimate` verb.
fn critical_path_calibration() -> Outcome {
    let expected = [(2, 3), (3, 4), (5, 2), (10, 2), (6, 5), (11, 5), (7, 9), (12, 9)];
    let start = Instant::now();
    let mut seen = Vec::new();
    for (fig, depth) in expected {
        let path = fixture_path(fig);
        let (code, out, err) = run_cli(&["estimate", &path]);
        ensure(code == 0, || format!("fig{fig}: exit {code}: {}", String::from_utf8_lossy(&err)))?;
        let text = String::from_utf8(out).unwrap();
        let line = text.lines().find(|l| l.starts_with("scheme_depth=")).ok_or("no scheme_depth line")?;
        let got: u32 = line["scheme_depth=".len()..].split_whitespace().next().unwrap().parse().unwrap();
        ensure(got == depth, || format!("fig{fig}: depth {got}, expected {depth}"))?;
        seen.push(format!("fig{fig}={got}"));
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{} in {:.2?}", seen.join(" "), start.elapsed()))
}

/// 2. Unique mask counts.
fn mask_counts() -> Outcome {
    let m2 = extract_masks(&fixture_scheme(2)).len();
    let m3 = extract_masks(&fixture_scheme(3)).len();
    ensure(m2 == 7 && m3 == 9, || format!("fig2 {m2}, fig3 {m3}; expected 7 and 9"))?;
    Ok("fig2=7 fig3=9".into())
}

/// 3. Mask selection and assignment for two ports per mask.
fn constructor_ground_truth() -> Outcome {
    let start = Instant::now();
    let config = MachineConfig::default();
    let profile = UtilizationProfile::default();
    let masks = select_masks(&config, &profile, 2).map_err(|e| e.to_string())?;
    let got: BTreeSet<Vec<usize>> = masks.iter().map(|m| m.ports().collect()).collect();
    let want: BTreeSet<Vec<usize>> = [vec![0, 3], vec![4, 7], vec![1, 2], vec![5, 6]].into_iter().collect();
    ensure(got == want, || format!("masks {got:?}"))?;

    let occ = |ports: &[usize]| mask_occupancy(&Mask::from_ports(8, ports), &profile) * 100.0;
    for (ports, pct) in [(&[0, 3][..], 25.3), (&[4, 7], 25.3), (&[1, 2], 24.7), (&[5, 6], 24.7)] {
        ensure((occ(ports) - pct).abs() <= 0.05, || format!("occupancy {ports:?} = {:.3}", occ(ports)))?;
    }

    let plan = assign_masks(&config, &masks, &profile).map_err(|e| e.to_string())?;
    let slots = config.slots();
    let lightest = plan.occupancy.iter().copied().fold(f64::INFINITY, f64::min);
    for (s, slot) in slots.iter().enumerate() {
        if slot.kind == SlotKind::LoadBase {
            let o = plan.occupancy[plan.assignment[s]];
            ensure((o - lightest).abs() < 1e-9, || format!("load base {slot} on occupancy {o:.3}"))?;
        }
    }
    let mut shapes: Vec<Vec<SlotKind>> = plan
        .groups()
        .iter()
        .map(|g| {
            let mut k: Vec<SlotKind> = g.iter().map(|&s| slots[s].kind).collect();
            k.sort();
            k
        })
        .collect();
    shapes.sort();
    let want_shapes = vec![
        vec![SlotKind::LoadBase, SlotKind::StaIndex],
        vec![SlotKind::LoadBase, SlotKind::StaIndex],
        vec![SlotKind::LoadIndex, SlotKind::StaBase],
        vec![SlotKind::LoadIndex, SlotKind::StaBase, SlotKind::StdData],
    ];
    ensure(shapes == want_shapes, || format!("group kinds {shapes:?}"))?;

    let built = build_scheme(&plan);
    let fig11 = fixture_scheme(11);
    ensure(extract_masks(&built) == extract_masks(&fig11), || "mask set differs from fig11".into())?;
    let partition = |s: &SchemeMatrix| -> BTreeSet<Vec<usize>> {
        extract_masks(s).iter().map(|m| (0..9).filter(|&i| s.row(i) == *m).collect()).collect()
    };
    // Units 4/5 and 6/7 have identical index/base utilizations and the two
    // 25.3% masks are interchangeable, so fig11's grouping and its image
    // under that unit swap score the same. Accept either, and prove the tie.
    let swap = [2, 3, 0, 1, 6, 7, 4, 5, 8];
    let swapped = SchemeMatrix::from_bits(config.clone(), swap.iter().map(|&t| built.row_bits()[t]).collect()).unwrap();
    let direct = partition(&built) == partition(&fig11);
    ensure(direct || partition(&swapped) == partition(&fig11), || "slot groups differ from fig11".into())?;
    let fig11_assignment: Vec<usize> =
        (0..9).map(|s| masks.iter().position(|m| *m == fig11.row(s)).unwrap()).collect();
    let theirs = plan_objective(&config, &masks, &profile, &fig11_assignment);
    ensure(theirs == plan.objective, || format!("fig11 objective {theirs:?} vs {:?}", plan.objective))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "masks (0,3)(4,7)(1,2)(5,6), fig11 groups reproduced {} in {:.2?}",
        if direct { "exactly" } else { "up to the tied 4/5, 6/7 unit swap" },
        start.elapsed()
    ))
}

fn cube_covers(value: u32, dashes: u32, m: u32) -> bool {
    (m ^ value) & !dashes & 0xF == 0
}

/// A cube is prime for `on` when it implies `on` and no single literal can
/// be dropped without covering a false row.
fn is_prime(value: u32, dashes: u32, on: u32) -> bool {
    let implies = |d: u32| (0..16).all(|m| !cube_covers(value, d, m) || on >> m & 1 == 1);
    implies(dashes) && (0..4).filter(|i| dashes >> i & 1 == 0).all(|i| !implies(dashes | 1 << i))
}

/// 4. Exhaustive minimizer check over every 4-input function.
fn minimizer_oracle() -> Outcome {
    let start = Instant::now();
    let names: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();
    for table in 0u32..1 << 16 {
        let f = BooleanFunction::from_fn(names.clone(), |a| table >> a & 1 == 1).unwrap();
        let dnf = minimum_dnf(&f).map_err(|e| e.to_string())?;
        let cnf = minimum_cnf(&f).map_err(|e| e.to_string())?;
        for a in 0..16usize {
            let want = table >> a & 1 == 1;
            ensure(dnf.eval(a) == want, || format!("MDNF of {table:#06x} wrong at {a}"))?;
            ensure(cnf.eval(a) == want, || format!("MCNF of {table:#06x} wrong at {a}"))?;
        }
        for t in &dnf.terms {
            ensure(is_prime(t.value, t.dashes, table), || format!("MDNF term of {table:#06x} not prime"))?;
        }
        for t in &cnf.terms {
            ensure(is_prime(t.value, t.dashes, !table & 0xFFFF), || format!("MCNF clause of {table:#06x} not prime"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("65536 functions in {:.2?}", start.elapsed()))
}

/// 5. Every request vector on every fixture.
fn arbitration_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for fig in FIGURES {
        let s = fixture_scheme(fig);
        let config = s.config().clone();
        let rank = config.priority_ranks();
        let (ports, slots) = (s.ports(), s.slot_count());
        let alu_ports = config.alu_ports();

        // (port, slot, function, support variables)
        let mut elements = Vec::new();
        for slot in 0..slots {
            for port in s.row(slot).ports() {
                let op = Operand::Mem(slot);
                let f = grant_function(&s, port, op).map_err(|e| e.to_string())?;
                let oracle = truth_table(&s, port, op, 20).map_err(|e| e.to_string())?;
                ensure(f == oracle, || format!("fig{fig}: S[{port}][{slot}] differs from its truth table"))?;
                elements.push((port, slot, f, support(&s, op).variables));
            }
        }

        for req in 0u64..1 << (alu_ports + slots) {
            let (alu, mem) = (req & ((1 << alu_ports) - 1), req >> alu_ports);
            let out = arbitrate(&s, RequestVectors::new(alu, mem));
            let g = &out.grant;
            let fail = |what: &str| format!("fig{fig} alu={alu:#x} mem={mem:#x}: {what}");

            let mut seen = BTreeSet::new();
            for p in 0..ports {
                if let Some(op) = g.granted(p) {
                    ensure(seen.insert(op), || fail("operand holds two ports"))?;
                }
            }
            for p in 0..alu_ports {
                ensure((g.granted(p) == Some(Operand::Alu(p))) == (alu >> p & 1 == 1), || fail("ALU port"))?;
            }
            for slot in 0..slots {
                let mask = s.row(slot);
                let held = g.port_of(Operand::Mem(slot));
                let requested = mem >> slot & 1 == 1;
                if !requested {
                    ensure(held.is_none() && !out.is_conflict(slot), || fail("idle slot granted"))?;
                    continue;
                }
                // Conflict iff every port of the mask went to some other operand.
                let saturated = mask.ports().all(|p| g.granted(p).is_some_and(|o| o != Operand::Mem(slot)));
                ensure(out.is_conflict(slot) == saturated, || fail("work conservation"))?;
                ensure(held.is_none() == saturated, || fail("grant/conflict mismatch"))?;
                if let Some(p) = held {
                    ensure(mask.contains(p), || fail("grant outside the mask"))?;
                }
                let without = arbitrate(&s, RequestVectors::new(alu, mem & !(1 << slot)));
                for t in (0..slots).filter(|&t| rank[t] < rank[slot]) {
                    ensure(
                        without.grant.port_of(Operand::Mem(t)) == g.port_of(Operand::Mem(t)),
                        || fail("lower-priority request changed a higher-priority grant"),
                    )?;
                }
            }
            for (port, slot, f, vars) in &elements {
                let idx = vars.iter().enumerate().fold(0usize, |acc, (i, v)| {
                    let bit = match *v {
                        Variable::Alu(p) => alu >> p & 1,
                        Variable::Mem(t) => mem >> t & 1,
                    };
                    acc | (bit as usize) << i
                });
                ensure(f.value(idx) == g.is_granted(*port, Operand::Mem(*slot)), || {
                    fail(&format!("grant function S[{port}][{slot}]"))
                })?;
            }
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{checked} request vectors over {} fixtures in {:.2?}", FIGURES.len(), start.elapsed()))
}

/// Uniform symmetric scheme with random masks and a random balanced
/// slot-to-mask assignment.
fn random_uniform_scheme(rng: &mut ChaCha8Rng, popcount: usize) -> SchemeMatrix {
    let config = MachineConfig::default();
    let mut ports: Vec<usize> = (0..8).collect();
    ports.shuffle(rng);
    let masks: Vec<Mask> = ports.chunks(popcount).map(|c| Mask::from_ports(8, c)).collect();
    let mut owners: Vec<usize> = (0..config.slot_count()).map(|i| i % masks.len()).collect();
    owners.shuffle(rng);
    SchemeMatrix::new(config, owners.iter().map(|&m| masks[m]).collect()).unwrap()
}

/// 6. Depth depends only on the popcount for balanced uniform schemes.
fn equal_depth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut summary = Vec::new();
    for (popcount, fig) in [(1, 10), (2, 11), (4, 12)] {
        let reference = scheme_critical_path(&fixture_scheme(fig)).map_err(|e| e.to_string())?.scheme_depth;
        for i in 0..10 {
            let s = random_uniform_scheme(&mut rng, popcount);
            let d = scheme_critical_path(&s).map_err(|e| e.to_string())?.scheme_depth;
            ensure(d == reference, || format!("popcount {popcount} sample {i}: depth {d}, fig{fig} has {reference}"))?;
        }
        summary.push(format!("c={popcount}:{reference}"));
    }
    Ok(format!("10 random schemes per popcount, {}", summary.join(" ")))
}

/// 7. Conflict-rate ordering under common random numbers.
fn conflict_ordering() -> Outcome {
    let schemes: Vec<SchemeMatrix> = [12, 11, 10, 5].iter().map(|&f| fixture_scheme(f)).collect();
    let cfg = SimConfig::new(1_000_000, 20240611, UtilizationProfile::default());
    let cmp = compare_schemes(&schemes, &cfg).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = cmp.reports.iter().map(|r| r.aggregate_rate()).collect();
    let names = ["fig12", "fig11", "fig10", "fig5"];
    let mut gaps = Vec::new();
    for i in 0..3 {
        let d = cmp.delta(i + 1, i);
        ensure(d.delta > 0.0 && d.separated_by(3.0), || {
            format!("{} - {} = {:.6} +/- {:.6}", names[i + 1], names[i], d.delta, d.half_width)
        })?;
        gaps.push(format!("{:.1}", d.delta / d.half_width));
    }
    Ok(format!(
        "rates {:.4} < {:.4} < {:.4} < {:.4}, gaps in half-widths {}",
        rates[0],
        rates[1],
        rates[2],
        rates[3],
        gaps.join("/")
    ))
}

/// 8. Every verb is byte-identical across two runs.
fn determinism() -> Outcome {
    let (f2, f5, f10, f11) = (fixture_path(2), fixture_path(5), fixture_path(10), fixture_path(11));
    let dir = std::env::temp_dir().join(format!("prfports-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let out_path = dir.join("c2.scheme").to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", &f2],
        vec!["masks", &f11],
        vec!["estimate", &f2, "--threshold", "4"],
        vec!["construct", "--popcount", "2"],
        vec!["construct", "--popcount", "1", "-o", &out_path],
        vec!["simulate", &f11, "--cycles", "50000", "--seed", "9", "--retry"],
        vec!["compare", &f5, &f10, &f11, "--cycles", "50000", "--seed", "9"],
    ];
    for args in &commands {
        let first = run_cli(args);
        let written = std::fs::read(&out_path).ok();
        let second = run_cli(args);
        ensure(first.0 == 0, || format!("{args:?} exit {}", first.0))?;
        ensure(first == second, || format!("{args:?} output differs between runs"))?;
        ensure(written == std::fs::read(&out_path).ok(), || format!("{args:?} file differs between runs"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 critical-path calibration", critical_path_calibration),
        ("2 mask counts", mask_counts),
        ("3 constructor ground truth", constructor_ground_truth),
        ("4 minimizer oracle", minimizer_oracle),
        ("5 arbitration exhaustiveness", arbitration_exhaustive),
        ("6 uniform-symmetric equal depth", equal_depth),
        ("7 conflict-rate ordering", conflict_ordering),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
