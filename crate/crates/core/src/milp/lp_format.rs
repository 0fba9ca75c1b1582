//! CPLEX-style LP text files and the `<name> <value>` solution files used by
//! the external-solver adapter.
//!
//! The writer emits every variable in the objective (zero coefficients
//! included) so that reading a written file restores the original column
//! order. Line breaks carry no meaning to the reader.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Comparator, MilpProblem, MilpSolution, MilpStatus, VarKind};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 6;

/// A parsed LP file. `maximize` records the original sense; the problem is
/// always stored as a minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub problem: MilpProblem,
    pub maximize: bool,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || "!\"#$%&()/,;?@_`'{}|~".contains(c) => {}
        _ => return false,
    }
    if matches!(name.chars().next(), Some('e' | 'E')) && name[1..].chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    name.chars().all(|c| c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c)) && !is_keyword(name)
}

fn is_keyword(word: &str) -> bool {
    Section::parse(word).is_some()
        || matches!(
            word.to_ascii_lowercase().as_str(),
            "subject" | "such" | "free" | "inf" | "infinity" | "to" | "that"
        )
}

fn column_names(problem: &MilpProblem) -> Vec<String> {
    let mut seen = HashMap::new();
    problem
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let name = if valid_name(&v.name) && !seen.contains_key(&v.name) { v.name.clone() } else { format!("x{j}") };
            let name = if seen.contains_key(&name) { format!("x{j}_") } else { name };
            seen.insert(name.clone(), j);
            name
        })
        .collect()
}

fn push_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (k, (c, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c.is_sign_negative() { '-' } else { '+' };
        if first && sign == '+' {
            let _ = write!(out, " {} {}", c.abs(), name);
        } else {
            let _ = write!(out, " {} {} {}", sign, c.abs(), name);
        }
        first = false;
    }
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

/// Renders a problem as an LP file.
pub fn write_lp(problem: &MilpProblem) -> String {
    let names = column_names(problem);
    let mut out = String::from("\\ windcommit LP export\nMinimize\n obj:");
    push_terms(&mut out, problem.vars.iter().zip(&names).map(|(v, n)| (v.cost, n.clone())));
    out.push_str("\nSubject To\n");
    for (i, c) in problem.constraints.iter().enumerate() {
        let label = if valid_name(&c.name) { c.name.clone() } else { format!("r{i}") };
        let _ = write!(out, " {label}:");
        if c.coeffs.is_empty() {
            // keep the row; a zero term on the first column stands in for the empty sum
            if let Some(n) = names.first() {
                let _ = write!(out, " 0 {n}");
            }
        }
        push_terms(&mut out, c.coeffs.iter().map(|&(j, a)| (a, names[j].clone())));
        let _ = writeln!(out, " {} {}", c.cmp.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, n) in problem.vars.iter().zip(&names) {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " {n} = {}", fmt_num(v.lower));
        } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {n} free");
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", fmt_num(v.lower), fmt_num(v.upper));
        }
    }
    for (kind, header) in [(VarKind::Binary, "Binaries"), (VarKind::Integer, "Generals")] {
        let list: Vec<&str> = problem
            .vars
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == kind)
            .map(|(_, n)| n.as_str())
            .collect();
        if !list.is_empty() {
            let _ = writeln!(out, "{header}");
            for chunk in list.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Minimize,
    Maximize,
    SubjectTo,
    Bounds,
    Binaries,
    Generals,
    End,
}

impl Section {
    fn parse(word: &str) -> Option<Self> {
        Some(match word.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "minimum" | "min" => Section::Minimize,
            "maximize" | "maximise" | "maximum" | "max" => Section::Maximize,
            "st" | "s.t." | "subjectto" => Section::SubjectTo,
            "bounds" | "bound" => Section::Bounds,
            "binaries" | "binary" | "bin" => Section::Binaries,
            "generals" | "general" | "gen" | "integers" => Section::Generals,
            "end" => Section::End,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sign(f64),
    Colon,
    Cmp(Comparator),
    Section(Section),
    Free,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    for line in text.lines() {
        let line = line.split('\\').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '+' || c == '-' {
                toks.push(Tok::Sign(if c == '-' { -1.0 } else { 1.0 }));
                i += 1;
            } else if c == ':' {
                toks.push(Tok::Colon);
                i += 1;
            } else if c == '<' || c == '>' || c == '=' {
                let mut j = i + 1;
                while j < chars.len() && (chars[j] == '=' || chars[j] == '<' || chars[j] == '>') {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let cmp = match op.as_str() {
                    "<" | "<=" | "=<" => Comparator::Le,
                    ">" | ">=" | "=>" => Comparator::Ge,
                    "=" => Comparator::Eq,
                    _ => return Err(Error::domain(format!("unknown operator `{op}` in LP file"))),
                };
                toks.push(Tok::Cmp(cmp));
                i = j;
            } else if c.is_ascii_digit() || c == '.' {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v = s.parse::<f64>().map_err(|_| Error::domain(format!("bad number `{s}` in LP file")))?;
                toks.push(Tok::Num(v));
                i = j;
            } else {
                let mut j = i;
                while j < chars.len()
                    && !chars[j].is_whitespace()
                    && !matches!(chars[j], '+' | '-' | ':' | '<' | '>' | '=')
                {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                let lower = word.to_ascii_lowercase();
                if lower == "to" || lower == "that" {
                    if let Some(Tok::Name(prev)) = toks.last() {
                        let p = prev.to_ascii_lowercase();
                        if p == "subject" || p == "such" {
                            toks.pop();
                            toks.push(Tok::Section(Section::SubjectTo));
                            continue;
                        }
                    }
                }
                if lower == "inf" || lower == "infinity" {
                    toks.push(Tok::Num(f64::INFINITY));
                } else if lower == "free" {
                    toks.push(Tok::Free);
                } else if let Some(s) = Section::parse(&word) {
                    toks.push(Tok::Section(s));
                } else {
                    toks.push(Tok::Name(word));
                }
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    index: HashMap<String, usize>,
    problem: MilpProblem,
    explicit_upper: Vec<bool>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.problem.add_continuous(name, 0.0, f64::INFINITY, 0.0);
        self.index.insert(name.to_string(), j);
        self.explicit_upper.push(false);
        j
    }

    fn at_section(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::Section(_)))
    }

    /// Skips an optional `label:` and returns the label.
    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (self.peek(), self.peek_at(1)) {
            let n = n.clone();
            self.pos += 2;
            Some(n)
        } else {
            None
        }
    }

    /// Linear expression up to a comparator or section keyword. Returns the
    /// terms and any constant.
    fn expression(&mut self) -> Result<(Vec<(usize, f64)>, f64)> {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        loop {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(Tok::Sign(s)) = self.peek() {
                sign *= *s;
                saw_sign = true;
                self.pos += 1;
            }
            let coeff = if let Some(Tok::Num(v)) = self.peek() {
                let v = *v;
                self.pos += 1;
                Some(v)
            } else {
                None
            };
            match self.peek() {
                Some(Tok::Name(_)) if !matches!(self.peek_at(1), Some(Tok::Colon)) => {
                    let Some(Tok::Name(n)) = self.next() else { unreachable!() };
                    let j = self.var(&n);
                    terms.push((j, sign * coeff.unwrap_or(1.0)));
                }
                _ => match coeff {
                    Some(v) => constant += sign * v,
                    None if saw_sign => return Err(Error::domain("dangling sign in LP expression")),
                    None => return Ok((terms, constant)),
                },
            }
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        while let Some(Tok::Sign(s)) = self.peek() {
            sign *= *s;
            self.pos += 1;
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            other => Err(Error::domain(format!("expected a number in LP file, found {other:?}"))),
        }
    }

    fn objective(&mut self) -> Result<()> {
        self.label();
        let (terms, constant) = self.expression()?;
        if constant != 0.0 {
            return Err(Error::domain("objective constants are not supported"));
        }
        for (j, c) in terms {
            self.problem.vars[j].cost += c;
        }
        Ok(())
    }

    fn constraints(&mut self) -> Result<()> {
        while !self.at_section() {
            let label = self.label();
            let (coeffs, constant) = self.expression()?;
            let cmp = match self.next() {
                Some(Tok::Cmp(c)) => c,
                other => return Err(Error::domain(format!("expected a comparator in LP row, found {other:?}"))),
            };
            let rhs = self.signed_number()? - constant;
            let name = label.unwrap_or_else(|| format!("r{}", self.problem.constraints.len()));
            self.problem.add_constraint(name, coeffs, cmp, rhs);
        }
        Ok(())
    }

    fn set_bound(&mut self, j: usize, cmp: Comparator, value: f64, var_on_left: bool) {
        let v = &mut self.problem.vars[j];
        // normalise to "var cmp value"
        let cmp = match (cmp, var_on_left) {
            (c, true) => c,
            (Comparator::Le, false) => Comparator::Ge,
            (Comparator::Ge, false) => Comparator::Le,
            (Comparator::Eq, false) => Comparator::Eq,
        };
        match cmp {
            Comparator::Le => {
                v.upper = value;
                self.explicit_upper[j] = true;
            }
            Comparator::Ge => v.lower = value,
            Comparator::Eq => {
                v.lower = value;
                v.upper = value;
                self.explicit_upper[j] = true;
            }
        }
    }

    fn bounds(&mut self) -> Result<()> {
        while !self.at_section() {
            match self.peek() {
                Some(Tok::Name(_)) => {
                    let Some(Tok::Name(n)) = self.next() else { unreachable!() };
                    let j = self.var(&n);
                    match self.next() {
                        Some(Tok::Free) => {
                            self.problem.vars[j].lower = f64::NEG_INFINITY;
                            self.problem.vars[j].upper = f64::INFINITY;
                            self.explicit_upper[j] = true;
                        }
                        Some(Tok::Cmp(c)) => {
                            let v = self.signed_number()?;
                            self.set_bound(j, c, v, true);
                        }
                        other => return Err(Error::domain(format!("bad bound for `{n}`: {other:?}"))),
                    }
                }
                _ => {
                    let v = self.signed_number()?;
                    let Some(Tok::Cmp(c)) = self.next() else {
                        return Err(Error::domain("expected a comparator in bound"));
                    };
                    let Some(Tok::Name(n)) = self.next() else {
                        return Err(Error::domain("expected a variable name in bound"));
                    };
                    let j = self.var(&n);
                    self.set_bound(j, c, v, false);
                    if let Some(Tok::Cmp(c2)) = self.peek().cloned() {
                        self.pos += 1;
                        let v2 = self.signed_number()?;
                        self.set_bound(j, c2, v2, true);
                    }
                }
            }
        }
        Ok(())
    }

    fn kinds(&mut self, kind: VarKind) -> Result<()> {
        while let Some(Tok::Name(n)) = self.peek().cloned() {
            self.pos += 1;
            let j = self.var(&n);
            let explicit = self.explicit_upper[j];
            let v = &mut self.problem.vars[j];
            v.kind = kind;
            if kind == VarKind::Binary {
                v.lower = v.lower.max(0.0);
                v.upper = if explicit { v.upper.min(1.0) } else { 1.0 };
            }
        }
        if !self.at_section() {
            return Err(Error::domain(format!("unexpected token {:?} in integrality section", self.peek())));
        }
        Ok(())
    }
}

/// Parses an LP file.
pub fn read_lp(text: &str) -> Result<LpModel> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        index: HashMap::new(),
        problem: MilpProblem::new(),
        explicit_upper: Vec::new(),
    };
    let mut maximize = false;
    let mut seen_objective = false;
    while let Some(tok) = p.next() {
        let Tok::Section(section) = tok else {
            return Err(Error::domain(format!("expected a section keyword in LP file, found {tok:?}")));
        };
        match section {
            Section::Minimize | Section::Maximize => {
                maximize = section == Section::Maximize;
                seen_objective = true;
                p.objective()?;
            }
            Section::SubjectTo => p.constraints()?,
            Section::Bounds => p.bounds()?,
            Section::Binaries => p.kinds(VarKind::Binary)?,
            Section::Generals => p.kinds(VarKind::Integer)?,
            Section::End => break,
        }
    }
    if !seen_objective {
        return Err(Error::domain("LP file has no objective section"));
    }
    let mut problem = p.problem;
    if maximize {
        for v in &mut problem.vars {
            v.cost = -v.cost;
        }
    }
    problem.validate()?;
    Ok(LpModel { problem, maximize })
}

/// `status <Status>` followed by one `<name> <value>` line per variable.
pub fn write_solution(problem: &MilpProblem, solution: &MilpSolution) -> String {
    let names = column_names(problem);
    let mut out = format!("status {}\n", solution.status.as_str());
    if solution.values.len() == names.len() {
        for (n, v) in names.iter().zip(&solution.values) {
            let _ = writeln!(out, "{n} {v}");
        }
    }
    out
}

/// Reads a solution file written by [`write_solution`] or an external tool
/// following the same contract. The objective is recomputed from the values.
pub fn read_solution(problem: &MilpProblem, text: &str) -> Result<MilpSolution> {
    let names = column_names(problem);
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    let mut status = None;
    let mut values = vec![f64::NAN; names.len()];
    let mut seen = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::domain(format!("solution line {} is not a `<name> <value>` pair", lineno + 1)));
        };
        if key.eq_ignore_ascii_case("status") {
            status = Some(
                MilpStatus::parse(val).ok_or_else(|| Error::domain(format!("unknown solution status `{val}`")))?,
            );
            continue;
        }
        let &j = index
            .get(key)
            .ok_or_else(|| Error::domain(format!("solution names unknown variable `{key}`")))?;
        values[j] = val
            .parse()
            .map_err(|_| Error::domain(format!("bad value `{val}` for `{key}` on line {}", lineno + 1)))?;
        seen += 1;
    }
    let status = status.ok_or_else(|| Error::domain("solution file has no status line"))?;
    let has_values = seen > 0;
    if has_values && values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("solution file omits some variables"));
    }
    if !has_values {
        let mut s = MilpSolution::without_incumbent(status, f64::NAN, 0);
        if status == MilpStatus::Optimal && problem.num_vars() == 0 {
            s.objective = 0.0;
            s.bound = 0.0;
            s.gap = 0.0;
        }
        if status == MilpStatus::Unbounded {
            s.objective = f64::NEG_INFINITY;
        }
        return Ok(s);
    }
    let objective = problem.objective_value(&values);
    Ok(MilpSolution {
        status,
        values,
        objective,
        bound: objective,
        gap: 0.0,
        nodes_explored: 0,
    })
}
