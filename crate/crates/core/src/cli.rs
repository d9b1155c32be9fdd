// SPDX-License-Identifier: Apache-2.0

//! The `prfports` command line. Each verb parses its inputs, calls one
//! library operation and formats the result.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::constructor::{assign_masks, build_scheme, mask_occupancy, select_masks};
use crate::depth::{threshold_compare, DepthModel, MergeRule};
use crate::profile::UtilizationProfile;
use crate::scheme::{classify_scheme, extract_masks, parse_scheme, serialize_scheme, validate_scheme, MachineConfig, SchemeMatrix};
use crate::simulator::{compare_schemes, simulate, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "prfports", version, about = "Analyze and build register-file read-port sharing schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scheme file and report its class and masks.
    Validate { scheme: PathBuf },
    /// List the unique masks of a scheme with their ALU occupancy.
    Masks {
        scheme: PathBuf,
        #[arg(long, default_value = "default")]
        profile: String,
    },
    /// Estimate the arbitration critical path in gate delays.
    Estimate {
        scheme: PathBuf,
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long, value_enum, default_value_t = Merge::Balanced)]
        merge: Merge,
    },
    /// Build a uniform symmetric scheme from a utilization profile.
    Construct {
        #[arg(long)]
        popcount: usize,
        #[arg(long, default_value = "default")]
        profile: String,
        /// Write the scheme here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo conflict rate of one scheme.
    Simulate {
        scheme: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Rank schemes by conflict rate on one shared request stream.
    Compare {
        #[arg(required = true, num_args = 2..)]
        schemes: Vec<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value = "default")]
    profile: String,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    cycles: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Conflicting operands keep requesting until granted.
    #[arg(long)]
    retry: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Merge {
    Balanced,
    Optimal,
}

/// Failure of a verb: message for standard error.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_scheme(path: &Path, config: &MachineConfig) -> Result<SchemeMatrix, Failure> {
    parse_scheme(&read(path)?, config).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_profile(source: &str, config: &MachineConfig) -> Result<UtilizationProfile, Failure> {
    if source == "default" {
        return Ok(UtilizationProfile::default());
    }
    let path = Path::new(source);
    UtilizationProfile::parse(&read(path)?, config).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn percent(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn execute(command: Command) -> Result<String, Failure> {
    let config = MachineConfig::default();
    let mut out = String::new();
    match command {
        Command::Validate { scheme } => {
            let s = load_scheme(&scheme, &config)?;
            validate_scheme(&s)?;
            let masks = extract_masks(&s);
            writeln!(out, "class={}", classify_scheme(&s))?;
            writeln!(out, "masks={}", masks.len())?;
            for m in masks {
                writeln!(out, "mask {m}")?;
            }
        }
        Command::Masks { scheme, profile } => {
            let s = load_scheme(&scheme, &config)?;
            let p = load_profile(&profile, &config)?;
            p.check(&config)?;
            let masks = extract_masks(&s);
            writeln!(out, "masks={}", masks.len())?;
            for m in masks {
                let users: Vec<String> =
                    (0..s.slot_count()).filter(|&i| s.row(i) == m).map(|i| config.slot(i).to_string()).collect();
                writeln!(out, "mask {m} occupancy {} slots {}", percent(mask_occupancy(&m, &p)), users.join(","))?;
            }
        }
        Command::Estimate { scheme, threshold, merge } => {
            let s = load_scheme(&scheme, &config)?;
            let merge = match merge {
                Merge::Balanced => MergeRule::Balanced,
                Merge::Optimal => MergeRule::Optimal,
            };
            let report = DepthModel::with_merge(merge).scheme_critical_path(&s)?;
            out.push_str(&report.to_text());
            if let Some(t) = threshold {
                let v = threshold_compare(&report, t)?;
                writeln!(out, "threshold={t} verdict={} margin={}", v.verdict, v.margin)?;
            }
        }
        Command::Construct { popcount, profile, output } => {
            let p = load_profile(&profile, &config)?;
            let masks = select_masks(&config, &p, popcount)?;
            let plan = assign_masks(&config, &masks, &p)?;
            let text = serialize_scheme(&build_scheme(&plan));
            let mut header = String::new();
            writeln!(header, "# constructed: popcount {popcount}, profile {profile}")?;
            for (m, group) in plan.groups().iter().enumerate() {
                let labels: Vec<String> = group.iter().map(|&s| config.slot(s).to_string()).collect();
                writeln!(
                    header,
                    "# mask {} occupancy {} slots {}",
                    plan.masks[m],
                    percent(plan.occupancy[m]),
                    labels.join(",")
                )?;
            }
            match output {
                Some(path) => {
                    std::fs::write(&path, format!("{header}{text}"))
                        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    out.push_str(&header);
                    writeln!(out, "wrote {}", path.display())?;
                }
                None => {
                    out.push_str(&header);
                    out.push_str(&text);
                }
            }
        }
        Command::Simulate { scheme, sim } => {
            let s = load_scheme(&scheme, &config)?;
            let p = load_profile(&sim.profile, &config)?;
            let cfg = SimConfig::new(sim.cycles, sim.seed, p).with_retry(sim.retry);
            out.push_str(&simulate(&s, &cfg)?.to_text());
        }
        Command::Compare { schemes, sim } => {
            let loaded = schemes.iter().map(|p| load_scheme(p, &config)).collect::<Result<Vec<_>, _>>()?;
            let p = load_profile(&sim.profile, &config)?;
            let cfg = SimConfig::new(sim.cycles, sim.seed, p).with_retry(sim.retry);
            let names: Vec<String> = schemes
                .iter()
                .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
                .collect();
            out.push_str(&compare_schemes(&loaded, &cfg)?.to_text(&names));
        }
    }
    Ok(out)
}

/// Runs one invocation; `args` includes the program name. Returns the exit
/// status: 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["prfports"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["construct"]).0, EXIT_USAGE);
        assert_eq!(call(&["simulate", "x", "--cycles", "0"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("estimate"));
    }

    #[test]
    fn missing_file_is_domain_error() {
        let (code, _, err) = call(&["validate", "/nonexistent/x.scheme"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.starts_with("error: /nonexistent/x.scheme"));
    }

    #[test]
    fn construct_to_stdout() {
        let (code, out, _) = call(&["construct", "--popcount", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("4.s1 0 1 1 0 0 0 0 0"));
        let (code, _, err) = call(&["construct", "--popcount", "3"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.contains("does not divide"));
    }
}
