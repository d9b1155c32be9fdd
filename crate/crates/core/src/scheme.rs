// SPDX-License-Identifier: Apache-2.0

//! Machine configuration, the scheme connection matrix and its masks.
//!
//! Index conventions:
//! - ALU `i` owns read ports `i * alu_operands_per_unit ..`; its operand `sN`
//!   always reads through its own port.
//! - Memory units are numbered from `alu_count`: load units, then
//!   store-address (STA) units, then store-data (STD) units. STD units expose
//!   only their second operand slot.
//! - A scheme row is one memory-operand slot; bit `p` of a row is set when the
//!   slot may read through retained port `p`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on ports and slots; rows are stored as `u64` bit-vectors.
pub const MAX_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitClass {
    Load,
    StoreAddress,
    StoreData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotPos {
    S1,
    S2,
}

impl SlotPos {
    fn as_str(self) -> &'static str {
        match self {
            SlotPos::S1 => "s1",
            SlotPos::S2 => "s2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    LoadBase,
    LoadIndex,
    StaBase,
    StaIndex,
    StdData,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::LoadBase => "load-base",
            SlotKind::LoadIndex => "load-index",
            SlotKind::StaBase => "sta-base",
            SlotKind::StaIndex => "sta-index",
            SlotKind::StdData => "std-data",
        }
    }
}

/// One memory-operand slot, i.e. one row of the scheme matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperandSlot {
    pub unit: usize,
    pub pos: SlotPos,
    pub kind: SlotKind,
}

impl OperandSlot {
    pub fn class(&self) -> UnitClass {
        match self.kind {
            SlotKind::LoadBase | SlotKind::LoadIndex => UnitClass::Load,
            SlotKind::StaBase | SlotKind::StaIndex => UnitClass::StoreAddress,
            SlotKind::StdData => UnitClass::StoreData,
        }
    }
}

impl fmt::Display for OperandSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.unit, self.pos.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    pub alu_count: usize,
    pub load_count: usize,
    pub sta_count: usize,
    pub std_count: usize,
    pub alu_operands_per_unit: usize,
    /// Retained read ports owned by no ALU. Zero for every reduced scheme;
    /// a non-reduced baseline keeps one per memory slot.
    pub memory_ports: usize,
    /// Operation class of each ALU. Units with equal class values execute the
    /// same class of operations and show near-identical port utilization.
    pub alu_classes: Vec<usize>,
    /// Slot row indices, highest priority first.
    pub priority_order: Vec<usize>,
}

impl Default for MachineConfig {
    /// 4 ALUs with 2 operands each, 2 load, 2 STA and 1 STD unit: 8 retained
    /// ports shared with 9 memory-operand slots.
    fn default() -> Self {
        MachineConfig::new(4, 2, 2, 1)
    }
}

impl MachineConfig {
    pub fn new(alu_count: usize, load_count: usize, sta_count: usize, std_count: usize) -> Self {
        let mut config = MachineConfig {
            alu_count,
            load_count,
            sta_count,
            std_count,
            alu_operands_per_unit: 2,
            memory_ports: 0,
            alu_classes: (0..alu_count).map(|i| i % 2).collect(),
            priority_order: Vec::new(),
        };
        config.priority_order = config.default_priority_order();
        config
    }

    pub fn with_memory_ports(mut self, memory_ports: usize) -> Self {
        self.memory_ports = memory_ports;
        self
    }

    pub fn with_priority_order(mut self, order: Vec<usize>) -> Result<Self> {
        self.priority_order = order;
        self.validate()?;
        Ok(self)
    }

    /// Load > STA > STD; inside a class the higher-numbered unit wins; inside a
    /// unit `s1` precedes `s2`.
    pub fn default_priority_order(&self) -> Vec<usize> {
        let slots = self.slots();
        let mut order: Vec<usize> = (0..slots.len()).collect();
        order.sort_by_key(|&i| {
            let s = &slots[i];
            (s.class(), std::cmp::Reverse(s.unit), s.pos)
        });
        order
    }

    pub fn alu_ports(&self) -> usize {
        self.alu_count * self.alu_operands_per_unit
    }

    pub fn retained_ports(&self) -> usize {
        self.alu_ports() + self.memory_ports
    }

    pub fn slot_count(&self) -> usize {
        2 * self.load_count + 2 * self.sta_count + self.std_count
    }

    /// Memory-operand slots in row order.
    pub fn slots(&self) -> Vec<OperandSlot> {
        let mut slots = Vec::with_capacity(self.slot_count());
        let mut unit = self.alu_count;
        for _ in 0..self.load_count {
            slots.push(OperandSlot { unit, pos: SlotPos::S1, kind: SlotKind::LoadBase });
            slots.push(OperandSlot { unit, pos: SlotPos::S2, kind: SlotKind::LoadIndex });
            unit += 1;
        }
        for _ in 0..self.sta_count {
            slots.push(OperandSlot { unit, pos: SlotPos::S1, kind: SlotKind::StaBase });
            slots.push(OperandSlot { unit, pos: SlotPos::S2, kind: SlotKind::StaIndex });
            unit += 1;
        }
        for _ in 0..self.std_count {
            slots.push(OperandSlot { unit, pos: SlotPos::S2, kind: SlotKind::StdData });
            unit += 1;
        }
        slots
    }

    pub fn slot(&self, index: usize) -> OperandSlot {
        self.slots()[index]
    }

    /// Row index of a label such as `4.s1`.
    pub fn slot_index(&self, label: &str) -> Option<usize> {
        self.slots().iter().position(|s| s.to_string() == label)
    }

    /// ALU owning `port`, if any.
    pub fn port_owner(&self, port: usize) -> Option<usize> {
        (port < self.alu_ports()).then(|| port / self.alu_operands_per_unit)
    }

    /// Label of the ALU operand reading through its dedicated `port`.
    pub fn alu_operand_label(&self, port: usize) -> String {
        let pos = if port % self.alu_operands_per_unit == 0 { "s1" } else { "s2" };
        format!("{}.{}", port / self.alu_operands_per_unit, pos)
    }

    /// Rank of each slot in the priority order (0 = highest).
    pub fn priority_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.priority_order.len()];
        for (rank, &slot) in self.priority_order.iter().enumerate() {
            ranks[slot] = rank;
        }
        ranks
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.alu_operands_per_unit) {
            return Err(Error::Config(format!(
                "alu_operands_per_unit must be 1 or 2, got {}",
                self.alu_operands_per_unit
            )));
        }
        if self.retained_ports() > MAX_WIDTH || self.slot_count() > MAX_WIDTH {
            return Err(Error::Config(format!(
                "at most {MAX_WIDTH} ports and {MAX_WIDTH} slots are supported"
            )));
        }
        if self.alu_classes.len() != self.alu_count {
            return Err(Error::Config(format!(
                "{} ALU classes given for {} ALUs",
                self.alu_classes.len(),
                self.alu_count
            )));
        }
        let m = self.slot_count();
        let distinct: BTreeSet<usize> = self.priority_order.iter().copied().collect();
        if self.priority_order.len() != m || distinct.len() != m || distinct.iter().any(|&s| s >= m) {
            return Err(Error::Config(format!(
                "priority order must be a permutation of the {m} memory-operand slots"
            )));
        }
        Ok(())
    }
}

/// A set of retained read ports; a unique nonzero row of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: u64,
    width: usize,
}

impl Mask {
    pub fn new(bits: u64, width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "mask width {width} exceeds {MAX_WIDTH}");
        Mask { bits: bits & full_mask(width), width }
    }

    pub fn from_ports(width: usize, ports: &[usize]) -> Self {
        let bits = ports.iter().fold(0u64, |acc, &p| {
            assert!(p < width, "port {p} outside width {width}");
            acc | 1 << p
        });
        Mask::new(bits, width)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn popcount(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, port: usize) -> bool {
        port < self.width && self.bits >> port & 1 == 1
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        self.bits & other.bits != 0
    }

    pub fn ports(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&p| self.bits >> p & 1 == 1)
    }

    /// Row rendering such as `01100000` (port 0 first).
    pub fn to_bit_string(&self) -> String {
        (0..self.width).map(|p| if self.contains(p) { '1' } else { '0' }).collect()
    }
}

impl Ord for Mask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ports()
            .cmp(other.ports())
            .then(self.width.cmp(&other.width))
    }
}

impl PartialOrd for Mask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ports: Vec<String> = self.ports().map(|p| p.to_string()).collect();
        write!(f, "({})", ports.join(", "))
    }
}

pub(crate) fn full_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// The 0/1 connection matrix between memory-operand slots and retained ports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeMatrix {
    config: MachineConfig,
    rows: Vec<u64>,
}

impl SchemeMatrix {
    pub fn new(config: MachineConfig, rows: Vec<Mask>) -> Result<Self> {
        let width = config.retained_ports();
        if let Some(bad) = rows.iter().find(|m| m.width() != width) {
            return Err(Error::WidthMismatch(format!(
                "mask width {} but the machine retains {} ports",
                bad.width(),
                width
            )));
        }
        SchemeMatrix::from_bits(config, rows.iter().map(Mask::bits).collect())
    }

    pub fn from_bits(config: MachineConfig, rows: Vec<u64>) -> Result<Self> {
        config.validate()?;
        if rows.len() != config.slot_count() {
            return Err(Error::WidthMismatch(format!(
                "{} rows given for {} memory-operand slots",
                rows.len(),
                config.slot_count()
            )));
        }
        let full = full_mask(config.retained_ports());
        if rows.iter().any(|r| r & !full != 0) {
            return Err(Error::WidthMismatch("row has bits beyond the retained ports".into()));
        }
        Ok(SchemeMatrix { config, rows })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn ports(&self) -> usize {
        self.config.retained_ports()
    }

    pub fn slot_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, slot: usize) -> Mask {
        Mask::new(self.rows[slot], self.ports())
    }

    pub fn row_bits(&self) -> &[u64] {
        &self.rows
    }

    pub fn is_connected(&self, slot: usize, port: usize) -> bool {
        self.rows[slot] >> port & 1 == 1
    }

    pub fn connection_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    /// Copy of the scheme with one more functional connection.
    pub fn with_connection(&self, slot: usize, port: usize) -> Self {
        assert!(port < self.ports());
        let mut next = self.clone();
        next.rows[slot] |= 1 << port;
        next
    }

    /// Same matrix under a different priority order (or other config tweak
    /// that keeps the widths).
    pub fn with_config(&self, config: MachineConfig) -> Result<Self> {
        SchemeMatrix::from_bits(config, self.rows.clone())
    }
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

fn header(line_no: usize, toks: &[(usize, &str)], key: &str) -> Result<usize> {
    match toks {
        [(_, k), (vc, v)] if *k == key => v
            .parse::<usize>()
            .map_err(|_| Error::parse(line_no, *vc, format!("expected a count after `{key}`"))),
        [(c, _), ..] => Err(Error::parse(line_no, *c, format!("expected `{key} <count>`"))),
        [] => unreachable!("blank lines are skipped"),
    }
}

/// Parses the textual scheme format against `config`.
///
/// ```text
/// ports 8
/// slots 9
/// 4.s1 0 1 0 0 1 0 0 0   # comment
/// ...
/// ```
pub fn parse_scheme(text: &str, config: &MachineConfig) -> Result<SchemeMatrix> {
    config.validate()?;
    let slots = config.slots();
    let mut ports = None;
    let mut slot_count = None;
    let mut rows = Vec::with_capacity(slots.len());
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }
        let Some(p) = ports else {
            let p = header(line_no, &toks, "ports")?;
            if p != config.retained_ports() {
                return Err(Error::parse(
                    line_no,
                    toks[1].0,
                    format!("{p} ports declared, machine retains {}", config.retained_ports()),
                ));
            }
            ports = Some(p);
            continue;
        };
        let Some(m) = slot_count else {
            let m = header(line_no, &toks, "slots")?;
            if m != slots.len() {
                return Err(Error::parse(
                    line_no,
                    toks[1].0,
                    format!("{m} slots declared, machine has {}", slots.len()),
                ));
            }
            slot_count = Some(m);
            continue;
        };
        if rows.len() == m {
            return Err(Error::parse(line_no, toks[0].0, format!("more than {m} rows")));
        }
        let expected = slots[rows.len()].to_string();
        let (label_col, label) = toks[0];
        if label != expected {
            return Err(Error::parse(
                line_no,
                label_col,
                format!("expected row label `{expected}`, found `{label}`"),
            ));
        }
        let cells = &toks[1..];
        if cells.len() != p {
            let col = cells.get(p).map_or(raw.chars().count() + 1, |c| c.0);
            return Err(Error::parse(
                line_no,
                col,
                format!("row `{label}` has {} cells, expected {p}", cells.len()),
            ));
        }
        let mut bits = 0u64;
        for (port, &(col, cell)) in cells.iter().enumerate() {
            match cell {
                "0" => {}
                "1" => bits |= 1 << port,
                other => {
                    return Err(Error::parse(
                        line_no,
                        col,
                        format!("cell `{other}` is not 0 or 1"),
                    ))
                }
            }
        }
        rows.push(bits);
    }

    let eof = last_line + 1;
    if ports.is_none() {
        return Err(Error::parse(eof, 1, "missing `ports <count>` header"));
    }
    match slot_count {
        None => Err(Error::parse(eof, 1, "missing `slots <count>` header")),
        Some(m) if rows.len() < m => Err(Error::parse(
            eof,
            1,
            format!("expected {m} rows, found {}", rows.len()),
        )),
        Some(_) => SchemeMatrix::from_bits(config.clone(), rows),
    }
}

pub fn serialize_scheme(scheme: &SchemeMatrix) -> String {
    let mut out = format!("ports {}\nslots {}\n", scheme.ports(), scheme.slot_count());
    for (slot, label) in scheme.config.slots().iter().enumerate() {
        out.push_str(&label.to_string());
        for port in 0..scheme.ports() {
            out.push(' ');
            out.push(if scheme.is_connected(slot, port) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Unique nonzero rows, in port-lexicographic order.
pub fn extract_masks(scheme: &SchemeMatrix) -> Vec<Mask> {
    let set: BTreeSet<Mask> = (0..scheme.slot_count())
        .map(|s| scheme.row(s))
        .filter(|m| !m.is_empty())
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeClass {
    General,
    /// Masks pairwise disjoint and jointly covering every retained port.
    Symmetric,
    /// Symmetric with every mask holding `popcount` ports.
    UniformSymmetric { popcount: usize },
}

impl SchemeClass {
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, SchemeClass::General)
    }
}

impl fmt::Display for SchemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeClass::General => write!(f, "general"),
            SchemeClass::Symmetric => write!(f, "symmetric"),
            SchemeClass::UniformSymmetric { popcount } => {
                write!(f, "uniform_symmetric popcount={popcount}")
            }
        }
    }
}

pub fn classify_scheme(scheme: &SchemeMatrix) -> SchemeClass {
    let masks = extract_masks(scheme);
    if masks.is_empty() {
        return SchemeClass::General;
    }
    let union = masks.iter().fold(0u64, |acc, m| acc | m.bits());
    let total: usize = masks.iter().map(Mask::popcount).sum();
    let disjoint = total == union.count_ones() as usize;
    if !disjoint || union != full_mask(scheme.ports()) {
        return SchemeClass::General;
    }
    let popcount = masks[0].popcount();
    if masks.iter().all(|m| m.popcount() == popcount) {
        assert_eq!(
            scheme.ports() % popcount,
            0,
            "uniform mask popcount must divide the retained port count"
        );
        SchemeClass::UniformSymmetric { popcount }
    } else {
        SchemeClass::Symmetric
    }
}

/// Semantic checks the parser does not make: every slot needs at least one
/// port to ever be able to read.
pub fn validate_scheme(scheme: &SchemeMatrix) -> Result<()> {
    let slots = scheme.config.slots();
    match (0..scheme.slot_count()).find(|&s| scheme.rows[s] == 0) {
        Some(s) => Err(Error::UnconnectedSlot(slots[s].to_string())),
        None => Ok(()),
    }
}
