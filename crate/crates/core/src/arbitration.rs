// SPDX-License-Identifier: Apache-2.0

//! Per-cycle read-port arbitration and the boolean functions behind each
//! grant-matrix element.
//!
//! Semantics: every ALU operand whose request bit is set takes its dedicated
//! port; memory-operand slots are then visited in priority order and each
//! requesting slot claims the lowest-numbered unclaimed port of its row. A
//! requesting slot that finds no free port is a conflict for this cycle.

use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{BooleanFunction, DEFAULT_VARIABLE_CAP};
use crate::scheme::{full_mask, MachineConfig, SchemeMatrix};

/// Request bits for one cycle: bit `p` of `alu` is the ALU operand reading
/// through port `p`; bit `s` of `mem` is memory-operand slot `s`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RequestVectors {
    pub alu: u64,
    pub mem: u64,
}

impl RequestVectors {
    pub fn new(alu: u64, mem: u64) -> Self {
        RequestVectors { alu, mem }
    }

    pub fn with_alu(mut self, port: usize) -> Self {
        self.alu |= 1 << port;
        self
    }

    pub fn with_mem(mut self, slot: usize) -> Self {
        self.mem |= 1 << slot;
        self
    }
}

/// A column of the grant matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    /// The ALU operand whose dedicated read port has this index.
    Alu(usize),
    /// A memory-operand slot (scheme row).
    Mem(usize),
}

impl Operand {
    pub fn label(&self, config: &MachineConfig) -> String {
        match *self {
            Operand::Alu(port) => config.alu_operand_label(port),
            Operand::Mem(slot) => config.slot(slot).to_string(),
        }
    }

    /// Column index: ALU operands first, then memory slots.
    pub fn column(&self, config: &MachineConfig) -> usize {
        match *self {
            Operand::Alu(port) => port,
            Operand::Mem(slot) => config.alu_ports() + slot,
        }
    }
}

/// For each retained port, the operand it serves this cycle (if any).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrantMatrix {
    ports: Vec<Option<Operand>>,
    columns: usize,
    alu_ports: usize,
}

impl GrantMatrix {
    pub fn granted(&self, port: usize) -> Option<Operand> {
        self.ports[port]
    }

    pub fn is_granted(&self, port: usize, operand: Operand) -> bool {
        self.ports.get(port).copied().flatten() == Some(operand)
    }

    pub fn port_of(&self, operand: Operand) -> Option<usize> {
        self.ports.iter().position(|g| *g == Some(operand))
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns
    }

    /// Dense 0/1 rows, one per port, over all operand columns.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.ports
            .iter()
            .map(|g| {
                let mut row = vec![0u8; self.columns];
                match *g {
                    Some(Operand::Alu(p)) => row[p] = 1,
                    Some(Operand::Mem(s)) => row[self.alu_ports + s] = 1,
                    None => {}
                }
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArbitrationOutcome {
    pub grant: GrantMatrix,
    /// Requesting slots denied every port of their row, in row order.
    pub conflicts: Vec<usize>,
}

impl ArbitrationOutcome {
    pub fn is_conflict(&self, slot: usize) -> bool {
        self.conflicts.contains(&slot)
    }
}

/// Runs one cycle on raw bit-vectors. `on_grant(slot, port)` fires for every
/// memory grant; the return value holds the conflicting slots.
#[inline]
pub(crate) fn claim_cycle(
    rows: &[u64],
    order: &[usize],
    alu_requests: u64,
    mem_requests: u64,
    mut on_grant: impl FnMut(usize, usize),
) -> u64 {
    let mut claimed = alu_requests;
    let mut conflicts = 0u64;
    for &slot in order {
        if mem_requests >> slot & 1 == 0 {
            continue;
        }
        let free = rows[slot] & !claimed;
        if free == 0 {
            conflicts |= 1 << slot;
        } else {
            let port = free.trailing_zeros() as usize;
            claimed |= 1 << port;
            on_grant(slot, port);
        }
    }
    conflicts
}

pub fn arbitrate(scheme: &SchemeMatrix, req: RequestVectors) -> ArbitrationOutcome {
    let config = scheme.config();
    let alu = req.alu & full_mask(config.alu_ports());
    let mem = req.mem & full_mask(config.slot_count());
    let mut ports = vec![None; scheme.ports()];
    for (p, g) in ports.iter_mut().enumerate().take(config.alu_ports()) {
        if alu >> p & 1 == 1 {
            *g = Some(Operand::Alu(p));
        }
    }
    let conflict_bits = claim_cycle(scheme.row_bits(), &config.priority_order, alu, mem, |s, p| {
        ports[p] = Some(Operand::Mem(s));
    });
    let conflicts = (0..config.slot_count()).filter(|&s| conflict_bits >> s & 1 == 1).collect();
    ArbitrationOutcome {
        grant: GrantMatrix {
            ports,
            columns: config.alu_ports() + config.slot_count(),
            alu_ports: config.alu_ports(),
        },
        conflicts,
    }
}

/// An input of a grant function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    /// `a[p]`: the ALU operand on port `p` requests its port.
    Alu(usize),
    /// `k[u.s]`: memory-operand slot requests a read.
    Mem(usize),
}

impl Variable {
    pub fn name(&self, config: &MachineConfig) -> String {
        match *self {
            Variable::Alu(p) => format!("a[{p}]"),
            Variable::Mem(s) => format!("k[{}]", config.slot(s)),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::Alu(p) => write!(f, "a[{p}]"),
            Variable::Mem(s) => write!(f, "k[#{s}]"),
        }
    }
}

/// Inputs that can influence whether `operand` is granted: the operand itself
/// plus every higher-priority slot linked to it through shared ports, and the
/// ALU requests of all ports those slots touch. ALU variables come first in
/// port order, then slot variables in row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub ports: u64,
    pub slots: Vec<usize>,
    pub variables: Vec<Variable>,
}

pub fn support(scheme: &SchemeMatrix, operand: Operand) -> Support {
    let config = scheme.config();
    match operand {
        Operand::Alu(p) => Support { ports: 1 << p, slots: vec![], variables: vec![Variable::Alu(p)] },
        Operand::Mem(slot) => {
            let rows = scheme.row_bits();
            let rank = config.priority_ranks();
            let mut ports = rows[slot];
            let mut member = vec![false; rows.len()];
            member[slot] = true;
            loop {
                let mut grew = false;
                for s in 0..rows.len() {
                    if !member[s] && rank[s] < rank[slot] && rows[s] & ports != 0 {
                        member[s] = true;
                        ports |= rows[s];
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            let slots: Vec<usize> = (0..rows.len()).filter(|&s| member[s]).collect();
            let mut variables: Vec<Variable> = (0..config.alu_ports())
                .filter(|&p| ports >> p & 1 == 1)
                .map(Variable::Alu)
                .collect();
            variables.extend(slots.iter().map(|&s| Variable::Mem(s)));
            Support { ports, slots, variables }
        }
    }
}

fn connected(scheme: &SchemeMatrix, port: usize, operand: Operand) -> bool {
    match operand {
        Operand::Alu(p) => p == port,
        Operand::Mem(s) => port < scheme.ports() && scheme.is_connected(s, port),
    }
}

/// The grant element `S[port][operand]` as a function of its support,
/// built by symbolic evaluation of the claim cascade.
pub fn grant_function(scheme: &SchemeMatrix, port: usize, operand: Operand) -> Result<BooleanFunction> {
    grant_function_capped(scheme, port, operand, DEFAULT_VARIABLE_CAP)
}

pub fn grant_function_capped(
    scheme: &SchemeMatrix,
    port: usize,
    operand: Operand,
    cap: usize,
) -> Result<BooleanFunction> {
    if !connected(scheme, port, operand) {
        return Ok(BooleanFunction::constant(false));
    }
    let config = scheme.config();
    let sup = support(scheme, operand);
    let n = sup.variables.len();
    if n > cap {
        return Err(Error::TooManyVariables { vars: n, cap });
    }
    let names: Vec<String> = sup.variables.iter().map(|v| v.name(config)).collect();
    let var = |v: Variable| -> Result<BooleanFunction> {
        let i = sup.variables.iter().position(|x| *x == v).expect("variable in support");
        BooleanFunction::variable(names.clone(), i)
    };
    let target = match operand {
        Operand::Alu(p) => return var(Variable::Alu(p)),
        Operand::Mem(s) => s,
    };
    let truth = BooleanFunction::from_fn(names.clone(), |_| true)?;
    let mut free: Vec<Option<BooleanFunction>> = vec![None; scheme.ports()];
    for p in (0..scheme.ports()).filter(|&p| sup.ports >> p & 1 == 1) {
        free[p] = Some(match config.port_owner(p) {
            Some(_) => var(Variable::Alu(p))?.not(),
            None => truth.clone(),
        });
    }
    for &slot in config.priority_order.iter().filter(|s| sup.slots.contains(s)) {
        let mut remaining = var(Variable::Mem(slot))?;
        for p in scheme.row(slot).ports() {
            let port_free = free[p].as_ref().expect("closure covers the row");
            let granted = remaining.and(port_free);
            if slot == target && p == port {
                return Ok(granted);
            }
            free[p] = Some(port_free.and(&granted.not()));
            remaining = remaining.and(&granted.not());
        }
    }
    unreachable!("target slot is part of its own support")
}

/// Oracle for [`grant_function`]: enumerates the support assignments and runs
/// [`arbitrate`] on each, all other request bits held at zero.
pub fn truth_table(
    scheme: &SchemeMatrix,
    port: usize,
    operand: Operand,
    cap: usize,
) -> Result<BooleanFunction> {
    if !connected(scheme, port, operand) {
        return Ok(BooleanFunction::constant(false));
    }
    let config = scheme.config();
    let sup = support(scheme, operand);
    let n = sup.variables.len();
    if n > cap {
        return Err(Error::TooManyVariables { vars: n, cap });
    }
    let names = sup.variables.iter().map(|v| v.name(config)).collect();
    BooleanFunction::from_fn(names, |assignment| {
        let mut req = RequestVectors::default();
        for (i, v) in sup.variables.iter().enumerate() {
            if assignment >> i & 1 == 1 {
                req = match *v {
                    Variable::Alu(p) => req.with_alu(p),
                    Variable::Mem(s) => req.with_mem(s),
                };
            }
        }
        arbitrate(scheme, req).grant.is_granted(port, operand)
    })
}

/// PLA text for one grant element.
pub fn grant_pla(scheme: &SchemeMatrix, port: usize, operand: Operand) -> Result<String> {
    let f = grant_function(scheme, port, operand)?;
    Ok(f.to_pla(&format!("s[{port}][{}]", operand.label(scheme.config()))))
}
