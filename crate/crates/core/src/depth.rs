// SPDX-License-Identifier: Apache-2.0

//! Critical-path estimation in time quanta.
//!
//! Two-input AND and OR gates cost one quantum each and negation is free, so
//! a product of `l` literals is a balanced tree of depth `ceil(log2 l)`. The
//! merge rule decides how the term trees are joined at the root.

use std::fmt;

use crate::arbitration::{grant_function_capped, Operand};
use crate::error::{Error, Result};
use crate::logic::{BooleanFunction, CoverForm, FormKind, Minimizer, DEFAULT_VARIABLE_CAP};
use crate::scheme::SchemeMatrix;

/// `ceil(log2 x)`, with 0 for `x <= 1`.
pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// How `m` subtrees of depths `d_1..d_m` are joined by 2-input gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MergeRule {
    /// A balanced tree over the terms: `ceil(log2 m) + max d_i`. This is the
    /// rule that reproduces the published depths of the reference schemes.
    #[default]
    Balanced,
    /// Huffman-style optimum for unequal subtrees: `ceil(log2 sum 2^d_i)`.
    Optimal,
}

impl MergeRule {
    pub fn combine(&self, depths: impl IntoIterator<Item = u32>) -> u32 {
        match self {
            MergeRule::Balanced => {
                let (mut m, mut deepest) = (0usize, 0u32);
                for d in depths {
                    m += 1;
                    deepest = deepest.max(d);
                }
                if m == 0 {
                    0
                } else {
                    ceil_log2(m) + deepest
                }
            }
            MergeRule::Optimal => {
                let total: u128 = depths.into_iter().map(|d| 1u128 << d).sum();
                if total == 0 {
                    0
                } else {
                    u128::BITS - (total - 1).leading_zeros()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthModel {
    pub merge: MergeRule,
    /// Largest support a grant element may have before estimation gives up.
    pub cap: usize,
}

impl Default for DepthModel {
    fn default() -> Self {
        DepthModel { merge: MergeRule::default(), cap: DEFAULT_VARIABLE_CAP }
    }
}

/// Depth of one evaluated element together with the form that achieved it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementDepth {
    pub depth: u32,
    pub form: FormKind,
    pub mdnf_depth: u32,
    pub mcnf_depth: u32,
}

impl DepthModel {
    pub const AND_COST: u32 = 1;
    pub const OR_COST: u32 = 1;
    pub const NOT_COST: u32 = 0;

    pub fn with_merge(merge: MergeRule) -> Self {
        DepthModel { merge, ..Self::default() }
    }

    pub fn tree_depth(&self, form: &CoverForm) -> u32 {
        let terms = form.literal_counts();
        self.merge.combine(terms.iter().map(|&l| ceil_log2(l)))
    }

    /// The cheaper of the minimum DNF and minimum CNF trees; ties go to DNF.
    pub fn element_depth(&self, f: &BooleanFunction) -> Result<ElementDepth> {
        let minimizer = Minimizer { rule: self.merge, cap: self.cap };
        let mdnf_depth = self.tree_depth(&minimizer.dnf(f)?);
        let mcnf_depth = self.tree_depth(&minimizer.cnf(f)?);
        let (depth, form) = if mcnf_depth < mdnf_depth {
            (mcnf_depth, FormKind::Mcnf)
        } else {
            (mdnf_depth, FormKind::Mdnf)
        };
        Ok(ElementDepth { depth, form, mdnf_depth, mcnf_depth })
    }

    pub fn scheme_critical_path(&self, scheme: &SchemeMatrix) -> Result<CriticalPathReport> {
        let config = scheme.config();
        let mut elements = Vec::new();
        for p in 0..config.alu_ports() {
            elements.push(ElementReport {
                port: p,
                operand: Operand::Alu(p),
                label: config.alu_operand_label(p),
                depth: 0,
                form: FormKind::Mdnf,
            });
        }
        for slot in 0..scheme.slot_count() {
            for p in scheme.row(slot).ports() {
                let operand = Operand::Mem(slot);
                let f = grant_function_capped(scheme, p, operand, self.cap)?;
                let d = self.element_depth(&f)?;
                elements.push(ElementReport {
                    port: p,
                    operand,
                    label: operand.label(config),
                    depth: d.depth,
                    form: d.form,
                });
            }
        }
        let witness = (0..elements.len())
            .max_by_key(|&i| (elements[i].depth, std::cmp::Reverse(i)))
            .unwrap_or(0);
        let scheme_depth = elements.get(witness).map_or(0, |e| e.depth);
        Ok(CriticalPathReport { elements, scheme_depth, witness })
    }
}

pub fn tree_depth(form: &CoverForm) -> u32 {
    DepthModel::default().tree_depth(form)
}

pub fn element_depth(f: &BooleanFunction) -> Result<ElementDepth> {
    DepthModel::default().element_depth(f)
}

pub fn scheme_critical_path(scheme: &SchemeMatrix) -> Result<CriticalPathReport> {
    DepthModel::default().scheme_critical_path(scheme)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementReport {
    pub port: usize,
    pub operand: Operand,
    pub label: String,
    pub depth: u32,
    pub form: FormKind,
}

impl fmt::Display for ElementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "port={} operand={} depth={} form={}", self.port, self.label, self.depth, self.form)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPathReport {
    /// One entry per connected element: ALU dedicated ports first, then
    /// memory slots in row order, ports ascending.
    pub elements: Vec<ElementReport>,
    pub scheme_depth: u32,
    /// Index into `elements` of the first element with the maximum depth.
    pub witness: usize,
}

impl CriticalPathReport {
    pub fn witness_element(&self) -> Option<&ElementReport> {
        self.elements.get(self.witness)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            out.push_str(&format!("{e}\n"));
        }
        let witness = self
            .witness_element()
            .map_or_else(|| "none".to_string(), |e| format!("port:{},operand:{}", e.port, e.label));
        out.push_str(&format!("scheme_depth={} witness={}\n", self.scheme_depth, witness));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Within,
    Exceeds,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Within => "within",
            Verdict::Exceeds => "exceeds",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdVerdict {
    pub verdict: Verdict,
    /// `threshold - scheme_depth`; negative when the scheme is too deep.
    pub margin: i64,
}

pub fn threshold_compare(report: &CriticalPathReport, threshold: u32) -> Result<ThresholdVerdict> {
    if threshold == 0 {
        return Err(Error::InvalidThreshold);
    }
    let margin = threshold as i64 - report.scheme_depth as i64;
    let verdict = if margin >= 0 { Verdict::Within } else { Verdict::Exceeds };
    Ok(ThresholdVerdict { verdict, margin })
}
