// SPDX-License-Identifier: Apache-2.0

//! Per-operand read-request probabilities.
//!
//! Text form, one entry per line, values in percent:
//!
//! ```text
//! alu 0 13.4
//! mem 4.s1 21.0
//! ```
//!
//! Entries that are not listed default to zero.

use crate::error::{Error, Result};
use crate::scheme::MachineConfig;

const DEFAULT_ALU_PERCENT: [f64; 8] = [13.4, 14.8, 9.9, 11.9, 13.4, 14.8, 9.9, 11.9];
const DEFAULT_MEM_PERCENT: [f64; 9] = [21.0, 8.1, 21.1, 8.1, 11.6, 5.3, 11.6, 5.3, 7.8];

/// Probabilities in `[0, 1]`. `alu_util[p]` belongs to the ALU operand on
/// port `p`; `mem_util[s]` to memory slot `s` in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilizationProfile {
    pub alu_util: Vec<f64>,
    pub mem_util: Vec<f64>,
}

impl Default for UtilizationProfile {
    /// Measured utilizations for the default 4 ALU + 2 load + 2 STA + 1 STD
    /// machine.
    fn default() -> Self {
        UtilizationProfile {
            alu_util: DEFAULT_ALU_PERCENT.iter().map(|v| v / 100.0).collect(),
            mem_util: DEFAULT_MEM_PERCENT.iter().map(|v| v / 100.0).collect(),
        }
    }
}

impl UtilizationProfile {
    pub fn new(alu_util: Vec<f64>, mem_util: Vec<f64>) -> Result<Self> {
        let profile = UtilizationProfile { alu_util, mem_util };
        if let Some(v) = profile.alu_util.iter().chain(&profile.mem_util).find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("utilization {v} is outside [0, 1]")));
        }
        Ok(profile)
    }

    pub fn zeros(config: &MachineConfig) -> Self {
        UtilizationProfile {
            alu_util: vec![0.0; config.alu_ports()],
            mem_util: vec![0.0; config.slot_count()],
        }
    }

    pub fn uniform(config: &MachineConfig, alu: f64, mem: f64) -> Result<Self> {
        Self::new(vec![alu; config.alu_ports()], vec![mem; config.slot_count()])
    }

    /// Checks the profile has one entry per ALU port and per slot.
    pub fn check(&self, config: &MachineConfig) -> Result<()> {
        if self.alu_util.len() != config.alu_ports() || self.mem_util.len() != config.slot_count() {
            return Err(Error::WidthMismatch(format!(
                "profile has {} ALU and {} memory entries, machine has {} and {}",
                self.alu_util.len(),
                self.mem_util.len(),
                config.alu_ports(),
                config.slot_count()
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str, config: &MachineConfig) -> Result<Self> {
        let mut profile = Self::zeros(config);
        let mut seen_alu = vec![false; config.alu_ports()];
        let mut seen_mem = vec![false; config.slot_count()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let column = |k: usize| raw.find(fields[k]).map_or(1, |b| raw[..b].chars().count() + 1);
            if fields.len() != 3 {
                return Err(Error::parse(lineno, 1, "expected `alu <port> <percent>` or `mem <unit>.<slot> <percent>`"));
            }
            let percent: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(lineno, column(2), format!("`{}` is not a number", fields[2])))?;
            if !(0.0..=100.0).contains(&percent) {
                return Err(Error::parse(lineno, column(2), "percentage must lie in [0, 100]"));
            }
            let (slot, seen) = match fields[0] {
                "alu" => {
                    let p: usize = fields[1]
                        .parse()
                        .ok()
                        .filter(|&p| p < config.alu_ports())
                        .ok_or_else(|| Error::parse(lineno, column(1), format!("no ALU operand `{}`", fields[1])))?;
                    (&mut profile.alu_util[p], &mut seen_alu[p])
                }
                "mem" => {
                    let s = config
                        .slot_index(fields[1])
                        .ok_or_else(|| Error::parse(lineno, column(1), format!("no memory slot `{}`", fields[1])))?;
                    (&mut profile.mem_util[s], &mut seen_mem[s])
                }
                other => return Err(Error::parse(lineno, 1, format!("unknown entry `{other}`"))),
            };
            if *seen {
                return Err(Error::parse(lineno, column(1), format!("duplicate entry for `{}`", fields[1])));
            }
            *seen = true;
            *slot = percent / 100.0;
        }
        Ok(profile)
    }

    pub fn to_text(&self, config: &MachineConfig) -> String {
        let mut out = String::new();
        for (p, v) in self.alu_util.iter().enumerate() {
            out.push_str(&format!("alu {p} {}\n", percent(*v)));
        }
        for (s, v) in self.mem_util.iter().enumerate() {
            out.push_str(&format!("mem {} {}\n", config.slot(s), percent(*v)));
        }
        out
    }
}

/// Percent with float noise trimmed, so 0.148 prints as 14.8.
fn percent(v: f64) -> f64 {
    (v * 1e8).round() / 1e6
}
