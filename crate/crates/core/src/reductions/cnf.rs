use std::fmt;

use super::ReductionError;

/// A literal over variables numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    pub fn value(&self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// A CNF formula. Clauses may have any length here; the SAT gadget checks
/// for monotone clauses of exactly three literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, ReductionError> {
        for (j, c) in clauses.iter().enumerate() {
            for l in c {
                if l.var == 0 || l.var > num_vars {
                    return Err(ReductionError::VariableOutOfRange { clause: j + 1, var: l.var });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// `Some(true)` for an all-positive clause, `Some(false)` for an
    /// all-negative one, `None` for mixed or empty clauses.
    pub fn polarity(&self, clause: usize) -> Option<bool> {
        let c = &self.clauses[clause];
        let first = c.first()?;
        c.iter().all(|l| l.negated == first.negated).then_some(!first.negated)
    }

    pub fn validate_monotone3(&self) -> Result<(), ReductionError> {
        if self.clauses.is_empty() {
            return Err(ReductionError::EmptyFormula);
        }
        for (j, c) in self.clauses.iter().enumerate() {
            if c.len() != 3 {
                return Err(ReductionError::ClauseArity { clause: j + 1, len: c.len() });
            }
            if self.polarity(j).is_none() {
                return Err(ReductionError::NotMonotone { clause: j + 1 });
            }
        }
        Ok(())
    }

    /// Index (from 0) of the first clause the assignment falsifies.
    pub fn first_unsatisfied(&self, assignment: &[bool]) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| !c.iter().any(|l| l.value(assignment)))
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars && self.first_unsatisfied(assignment).is_none()
    }

    /// Some satisfying assignment, by brute force. Only for small formulas.
    pub fn brute_force_solve(&self) -> Option<Vec<bool>> {
        assert!(self.num_vars < 24, "brute force is limited to small formulas");
        (0u32..1 << self.num_vars)
            .map(|bits| (0..self.num_vars).map(|k| bits >> k & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.first_unsatisfied(a).is_none())
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let err = |line: usize, message: String| ReductionError::Dimacs { line, message };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        if t.starts_with('%') {
            break;
        }
        if let Some(rest) = t.strip_prefix('p') {
            if header.is_some() {
                return Err(err(line, "second problem line".into()));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["cnf", n, m] => {
                    let n = n.parse().map_err(|_| err(line, format!("bad variable count {n:?}")))?;
                    let m = m.parse().map_err(|_| err(line, format!("bad clause count {m:?}")))?;
                    header = Some((n, m));
                }
                _ => return Err(err(line, "expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let (n, _) = header.ok_or_else(|| err(line, "clause before the problem line".into()))?;
        for tok in t.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| err(line, format!("bad literal {tok:?}")))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = v.unsigned_abs() as usize;
            if var > n {
                return Err(err(line, format!("variable {var} exceeds the declared {n}")));
            }
            current.push(Literal { var, negated: v < 0 });
        }
    }
    let (n, m) = header.ok_or_else(|| err(last_line, "missing problem line".into()))?;
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != m {
        return Err(err(last_line, format!("declared {m} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(n, clauses)
}

pub fn serialize_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        for l in c {
            out.push_str(&format!("{l} "));
        }
        out.push_str("0\n");
    }
    out
}
