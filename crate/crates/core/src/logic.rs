// SPDX-License-Identifier: Apache-2.0

//! Tabulated boolean functions and exact two-level minimization.
//!
//! Prime implicants come from iterated pairwise merging of adjacent cubes.
//! Covers are chosen by branch and bound after essential primes are fixed;
//! the objective is the gate-tree depth of the resulting form first, then
//! term count, then literal count.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::depth::{ceil_log2, MergeRule};
use crate::error::{Error, Result};

/// Default cap on the number of variables accepted by the minimizer.
pub const DEFAULT_VARIABLE_CAP: usize = 20;

/// Hard storage limit for a tabulated function (2^26 bits = 8 MiB).
const STORAGE_LIMIT: usize = 26;

/// Truth table over named variables. Bit `i` of an assignment index is the
/// value of variable `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    variables: Vec<String>,
    on: Vec<u64>,
    dc: Vec<u64>,
}

fn words_for(n: usize) -> usize {
    ((1usize << n) + 63) / 64
}

impl BooleanFunction {
    /// The constant-false function over `variables`.
    pub fn new(variables: Vec<String>) -> Result<Self> {
        let n = variables.len();
        if n > STORAGE_LIMIT {
            return Err(Error::TooManyVariables { vars: n, cap: STORAGE_LIMIT });
        }
        let unique: HashSet<&String> = variables.iter().collect();
        if unique.len() != n {
            return Err(Error::InvalidInput("variable names must be unique".into()));
        }
        Ok(BooleanFunction { variables, on: vec![0; words_for(n)], dc: vec![0; words_for(n)] })
    }

    pub fn constant(value: bool) -> Self {
        let mut f = BooleanFunction::new(Vec::new()).expect("no variables");
        f.set(0, value);
        f
    }

    /// Projection onto variable `index`.
    pub fn variable(variables: Vec<String>, index: usize) -> Result<Self> {
        assert!(index < variables.len());
        BooleanFunction::from_fn(variables, |a| a >> index & 1 == 1)
    }

    pub fn from_fn(variables: Vec<String>, f: impl Fn(usize) -> bool) -> Result<Self> {
        let mut out = BooleanFunction::new(variables)?;
        for a in 0..out.len() {
            if f(a) {
                out.set(a, true);
            }
        }
        Ok(out)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Number of rows, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.num_vars()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, assignment: usize) -> bool {
        self.on[assignment / 64] >> (assignment % 64) & 1 == 1
    }

    pub fn is_dont_care(&self, assignment: usize) -> bool {
        self.dc[assignment / 64] >> (assignment % 64) & 1 == 1
    }

    pub fn set(&mut self, assignment: usize, value: bool) {
        let (w, b) = (assignment / 64, assignment % 64);
        self.dc[w] &= !(1 << b);
        if value {
            self.on[w] |= 1 << b;
        } else {
            self.on[w] &= !(1 << b);
        }
    }

    pub fn set_dont_care(&mut self, assignment: usize) {
        let (w, b) = (assignment / 64, assignment % 64);
        self.on[w] &= !(1 << b);
        self.dc[w] |= 1 << b;
    }

    /// Evaluates on an explicit assignment, `values[i]` for variable `i`.
    pub fn eval(&self, values: &[bool]) -> bool {
        assert_eq!(values.len(), self.num_vars());
        let idx = values.iter().enumerate().fold(0, |acc, (i, &v)| acc | (v as usize) << i);
        self.value(idx)
    }

    fn valid_mask(&self, word: usize) -> u64 {
        let len = self.len();
        let used = len.saturating_sub(word * 64).min(64);
        if used == 64 {
            u64::MAX
        } else {
            (1u64 << used) - 1
        }
    }

    /// Complement on the care set; don't-cares stay don't-cares.
    pub fn not(&self) -> Self {
        let mut out = self.clone();
        for w in 0..out.on.len() {
            out.on[w] = !self.on[w] & !self.dc[w] & self.valid_mask(w);
        }
        out
    }

    fn zip(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.variables, other.variables, "operands must share variables");
        let mut out = self.clone();
        for w in 0..out.on.len() {
            out.on[w] = op(self.on[w], other.on[w]) & self.valid_mask(w);
            out.dc[w] = 0;
        }
        out
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn on_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.value(a)).collect()
    }

    pub fn dc_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.is_dont_care(a)).collect()
    }

    /// `Some(v)` when every care row evaluates to `v`.
    pub fn constant_value(&self) -> Option<bool> {
        let mut seen = (false, false);
        for a in 0..self.len() {
            if self.is_dont_care(a) {
                continue;
            }
            if self.value(a) {
                seen.1 = true;
            } else {
                seen.0 = true;
            }
        }
        match seen {
            (true, true) => None,
            (_, true) => Some(true),
            _ => Some(false),
        }
    }

    /// PLA text with every row listed (`-` marks don't-care outputs).
    pub fn to_pla(&self, output_name: &str) -> String {
        let n = self.num_vars();
        let mut out = format!(".i {n}\n.o 1\n");
        if n > 0 {
            out.push_str(&format!(".ilb {}\n", self.variables.join(" ")));
        }
        out.push_str(&format!(".ob {output_name}\n.p {}\n", self.len()));
        for a in 0..self.len() {
            let inputs: String = (0..n).map(|i| if a >> i & 1 == 1 { '1' } else { '0' }).collect();
            let bit = if self.is_dont_care(a) {
                '-'
            } else if self.value(a) {
                '1'
            } else {
                '0'
            };
            out.push_str(&format!("{inputs} {bit}\n"));
        }
        out.push_str(".e\n");
        out
    }

    /// Reads single-output PLA text. Unlisted rows are false; a `-` in an
    /// input column expands to both values.
    pub fn from_pla(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut names: Option<Vec<String>> = None;
        let mut rows: Vec<(usize, String, char)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            match head {
                ".i" => {
                    let v = parts.next().and_then(|v| v.parse().ok());
                    n = Some(v.ok_or_else(|| Error::parse(line_no, 4, "expected input count"))?);
                }
                ".o" => {
                    if parts.next() != Some("1") {
                        return Err(Error::parse(line_no, 4, "only single-output PLA is supported"));
                    }
                }
                ".ilb" => names = Some(parts.map(str::to_string).collect()),
                ".ob" | ".p" | ".type" => {}
                ".e" | ".end" => break,
                _ if head.starts_with('.') => {
                    return Err(Error::parse(line_no, 1, format!("unknown directive `{head}`")))
                }
                _ => {
                    // With no inputs a row is just the output column.
                    let (head, out) = match parts.next() {
                        Some(out) => (head, out),
                        None if n == Some(0) => ("", head),
                        None => return Err(Error::parse(line_no, head.len() + 1, "missing output column")),
                    };
                    let bit = match out {
                        "1" | "4" => '1',
                        "0" => '0',
                        "-" | "2" | "~" => '-',
                        _ => {
                            return Err(Error::parse(
                                line_no,
                                raw.find(out).map_or(1, |c| c + 1),
                                format!("bad output `{out}`"),
                            ))
                        }
                    };
                    rows.push((line_no, head.to_string(), bit));
                }
            }
        }
        let n = n.ok_or_else(|| Error::parse(1, 1, "missing `.i` directive"))?;
        let variables = match names {
            Some(v) if v.len() == n => v,
            Some(v) => {
                return Err(Error::InvalidInput(format!("{} labels for {n} inputs", v.len())))
            }
            None => (0..n).map(|i| format!("x{i}")).collect(),
        };
        let mut f = BooleanFunction::new(variables)?;
        for (line_no, inputs, bit) in rows {
            if inputs.chars().count() != n {
                return Err(Error::parse(line_no, 1, format!("expected {n} input columns")));
            }
            let mut fixed = 0usize;
            let mut free = Vec::new();
            for (i, c) in inputs.chars().enumerate() {
                match c {
                    '1' => fixed |= 1 << i,
                    '0' => {}
                    '-' => free.push(i),
                    _ => return Err(Error::parse(line_no, i + 1, format!("bad input `{c}`"))),
                }
            }
            for combo in 0..1usize << free.len() {
                let mut a = fixed;
                for (j, &i) in free.iter().enumerate() {
                    a |= (combo >> j & 1) << i;
                }
                match bit {
                    '1' => f.set(a, true),
                    '-' => f.set_dont_care(a),
                    _ => f.set(a, false),
                }
            }
        }
        Ok(f)
    }
}

/// A cube over `n` variables: positions in `dashes` are absent, the rest
/// take their value from `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implicant {
    pub value: u32,
    pub dashes: u32,
}

impl Implicant {
    pub fn minterm(value: u32) -> Self {
        Implicant { value, dashes: 0 }
    }

    pub fn universal(n: usize) -> Self {
        Implicant { value: 0, dashes: if n == 0 { 0 } else { u32::MAX >> (32 - n) } }
    }

    /// Parses `1-0`-style text, variable 0 first.
    pub fn parse(text: &str) -> Option<Self> {
        let mut cube = Implicant { value: 0, dashes: 0 };
        for (i, c) in text.chars().enumerate() {
            match c {
                '1' => cube.value |= 1 << i,
                '0' => {}
                '-' => cube.dashes |= 1 << i,
                _ => return None,
            }
        }
        Some(cube)
    }

    pub fn literal_count(&self, n: usize) -> usize {
        n - self.dashes.count_ones() as usize
    }

    pub fn covers(&self, assignment: usize) -> bool {
        (assignment as u32 & !self.dashes) == self.value
    }

    pub fn render(&self, n: usize) -> String {
        (0..n)
            .map(|i| {
                if self.dashes >> i & 1 == 1 {
                    '-'
                } else if self.value >> i & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

/// Prime implicants of the on-set plus don't-care set, sorted.
pub fn prime_implicants(f: &BooleanFunction) -> Result<Vec<Implicant>> {
    prime_implicants_capped(f, DEFAULT_VARIABLE_CAP)
}

pub fn prime_implicants_capped(f: &BooleanFunction, cap: usize) -> Result<Vec<Implicant>> {
    let n = f.num_vars();
    if n > cap {
        return Err(Error::TooManyVariables { vars: n, cap });
    }
    let mut level: HashSet<Implicant> = (0..f.len())
        .filter(|&a| f.value(a) || f.is_dont_care(a))
        .map(|a| Implicant::minterm(a as u32))
        .collect();
    let mut primes = BTreeSet::new();
    while !level.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for cube in &level {
            for b in 0..n {
                let bit = 1u32 << b;
                if cube.dashes & bit != 0 || cube.value & bit != 0 {
                    continue;
                }
                let partner = Implicant { value: cube.value | bit, dashes: cube.dashes };
                if level.contains(&partner) {
                    next.insert(Implicant { value: cube.value, dashes: cube.dashes | bit });
                    merged.insert(*cube);
                    merged.insert(partner);
                }
            }
        }
        primes.extend(level.iter().filter(|c| !merged.contains(c)).copied());
        level = next;
    }
    Ok(primes.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormKind {
    Mdnf,
    Mcnf,
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Mdnf => "MDNF",
            FormKind::Mcnf => "MCNF",
        })
    }
}

/// A two-level form. MDNF terms are products; MCNF terms are stored as
/// implicants of the complement, each standing for the clause that negates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverForm {
    pub kind: FormKind,
    pub variables: Vec<String>,
    pub terms: Vec<Implicant>,
}

impl CoverForm {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn eval(&self, assignment: usize) -> bool {
        match self.kind {
            FormKind::Mdnf => self.terms.iter().any(|t| t.covers(assignment)),
            FormKind::Mcnf => self.terms.iter().all(|t| !t.covers(assignment)),
        }
    }

    pub fn literal_counts(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.literal_count(self.num_vars())).collect()
    }

    pub fn literal_total(&self) -> usize {
        self.literal_counts().iter().sum()
    }
}

impl fmt::Display for CoverForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num_vars();
        let literal = |t: &Implicant, i: usize, negate: bool| {
            let positive = (t.value >> i & 1 == 1) != negate;
            if positive {
                self.variables[i].clone()
            } else {
                format!("!{}", self.variables[i])
            }
        };
        let lits = |t: &Implicant, negate: bool| -> Vec<String> {
            (0..n).filter(|&i| t.dashes >> i & 1 == 0).map(|i| literal(t, i, negate)).collect()
        };
        match self.kind {
            FormKind::Mdnf => {
                if self.terms.is_empty() {
                    return f.write_str("0");
                }
                let terms: Vec<String> = self
                    .terms
                    .iter()
                    .map(|t| {
                        let l = lits(t, false);
                        if l.is_empty() { "1".to_string() } else { l.join(" & ") }
                    })
                    .collect();
                f.write_str(&terms.join(" | "))
            }
            FormKind::Mcnf => {
                if self.terms.is_empty() {
                    return f.write_str("1");
                }
                let clauses: Vec<String> = self
                    .terms
                    .iter()
                    .map(|t| {
                        let l = lits(t, true);
                        if l.is_empty() { "0".to_string() } else { format!("({})", l.join(" | ")) }
                    })
                    .collect();
                f.write_str(&clauses.join(" & "))
            }
        }
    }
}

/// Lexicographic cover cost: tree depth, then terms, then literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverCost {
    pub depth: u32,
    pub terms: usize,
    pub literals: usize,
}

/// Minimization settings: the depth merge rule used as the primary objective
/// and the variable cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Minimizer {
    pub rule: MergeRule,
    pub cap: usize,
}

impl Default for Minimizer {
    fn default() -> Self {
        Minimizer { rule: MergeRule::default(), cap: DEFAULT_VARIABLE_CAP }
    }
}

impl Minimizer {
    pub fn cover(&self, f: &BooleanFunction, primes: &[Implicant]) -> CoverForm {
        let on = f.on_set();
        CoverForm {
            kind: FormKind::Mdnf,
            variables: f.variables().to_vec(),
            terms: CoverSearch::new(f.num_vars(), &on, primes, self.rule).run(),
        }
    }

    pub fn dnf(&self, f: &BooleanFunction) -> Result<CoverForm> {
        let primes = prime_implicants_capped(f, self.cap)?;
        Ok(self.cover(f, &primes))
    }

    pub fn cnf(&self, f: &BooleanFunction) -> Result<CoverForm> {
        let mut form = self.dnf(&f.not())?;
        form.kind = FormKind::Mcnf;
        Ok(form)
    }
}

/// Minimum cover of the on-set by `primes` under the default objective.
pub fn minimum_cover(f: &BooleanFunction, primes: &[Implicant]) -> CoverForm {
    Minimizer::default().cover(f, primes)
}

pub fn minimum_dnf(f: &BooleanFunction) -> Result<CoverForm> {
    Minimizer::default().dnf(f)
}

/// Minimum CNF, obtained as the minimum cover of the complement.
pub fn minimum_cnf(f: &BooleanFunction) -> Result<CoverForm> {
    Minimizer::default().cnf(f)
}

struct CoverSearch {
    n: usize,
    rule: MergeRule,
    candidates: Vec<Implicant>,
    term_depth: Vec<u32>,
    literals: Vec<usize>,
    coverage: Vec<Vec<u64>>,
    covered_by: Vec<Vec<usize>>,
    words: usize,
    best: Option<(CoverCost, Vec<usize>)>,
}

impl CoverSearch {
    fn new(n: usize, on: &[usize], primes: &[Implicant], rule: MergeRule) -> Self {
        let words = on.len().div_ceil(64);
        let mut candidates = Vec::new();
        let mut coverage = Vec::new();
        for p in primes {
            let mut bits = vec![0u64; words];
            let mut any = false;
            for (j, &m) in on.iter().enumerate() {
                if p.covers(m) {
                    bits[j / 64] |= 1 << (j % 64);
                    any = true;
                }
            }
            if any {
                candidates.push(*p);
                coverage.push(bits);
            }
        }
        let literals: Vec<usize> = candidates.iter().map(|c| c.literal_count(n)).collect();
        let term_depth = literals.iter().map(|&l| ceil_log2(l)).collect();
        let mut covered_by = vec![Vec::new(); on.len()];
        for (i, bits) in coverage.iter().enumerate() {
            for (j, list) in covered_by.iter_mut().enumerate() {
                if bits[j / 64] >> (j % 64) & 1 == 1 {
                    list.push(i);
                }
            }
        }
        let mut search = CoverSearch {
            n,
            rule,
            candidates,
            term_depth,
            literals,
            coverage,
            covered_by,
            words,
            best: None,
        };
        for list in &mut search.covered_by {
            let (td, lits) = (&search.term_depth, &search.literals);
            list.sort_by_key(|&i| (td[i], lits[i], i));
        }
        search
    }

    fn cost(&self, chosen: &[usize]) -> CoverCost {
        CoverCost {
            depth: self.rule.combine(chosen.iter().map(|&i| self.term_depth[i])),
            terms: chosen.len(),
            literals: chosen.iter().map(|&i| self.literals[i]).sum(),
        }
    }

    fn run(mut self) -> Vec<Implicant> {
        let k = self.covered_by.len();
        if k == 0 {
            return Vec::new();
        }
        assert!(
            self.covered_by.iter().all(|c| !c.is_empty()),
            "prime implicant set does not cover the on-set"
        );
        let mut uncovered = vec![0u64; self.words];
        for j in 0..k {
            uncovered[j / 64] |= 1 << (j % 64);
        }
        let mut chosen: Vec<usize> = Vec::new();
        // Essential primes belong to every cover.
        for j in 0..k {
            if self.covered_by[j].len() == 1 {
                let p = self.covered_by[j][0];
                if !chosen.contains(&p) {
                    chosen.push(p);
                }
            }
        }
        for &p in &chosen {
            for (u, c) in uncovered.iter_mut().zip(&self.coverage[p]) {
                *u &= !c;
            }
        }
        self.branch(&mut chosen, &uncovered);
        let (_, picked) = self.best.take().expect("a cover always exists");
        let mut terms: Vec<Implicant> = picked.iter().map(|&i| self.candidates[i]).collect();
        let n = self.n;
        terms.sort_by_key(|t| (t.literal_count(n), t.dashes, t.value));
        terms
    }

    fn branch(&mut self, chosen: &mut Vec<usize>, uncovered: &[u64]) {
        let cost = self.cost(chosen);
        let Some(pivot) = self.pick_pivot(uncovered) else {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, chosen.clone()));
            }
            return;
        };
        let bound = CoverCost { depth: cost.depth, terms: cost.terms + 1, literals: cost.literals + 1 };
        if self.best.as_ref().is_some_and(|(b, _)| bound >= *b) {
            return;
        }
        let options = self.covered_by[pivot].clone();
        let mut rest = uncovered.to_vec();
        for p in options {
            for ((r, u), c) in rest.iter_mut().zip(uncovered).zip(&self.coverage[p]) {
                *r = u & !c;
            }
            chosen.push(p);
            self.branch(chosen, &rest);
            chosen.pop();
        }
    }

    /// Uncovered minterm with the fewest covering candidates.
    fn pick_pivot(&self, uncovered: &[u64]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (w, &word) in uncovered.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let j = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if best.is_none_or(|b| self.covered_by[j].len() < self.covered_by[b].len()) {
                    best = Some(j);
                }
            }
        }
        best
    }
}
