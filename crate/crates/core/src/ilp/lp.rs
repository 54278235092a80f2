//! Reader and checker for the subset of the LP text format the exporter writes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpConstraint {
    pub name: String,
    pub terms: Vec<(i64, String)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpModel {
    pub minimize: bool,
    pub objective: Vec<(i64, String)>,
    pub constraints: Vec<LpConstraint>,
    pub bounds: BTreeMap<String, (Option<i64>, Option<i64>)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    General,
    Binary,
    End,
}

fn err(line: usize, message: impl Into<String>) -> LpParseError {
    LpParseError {
        line,
        message: message.into(),
    }
}

fn is_name(tok: &str) -> bool {
    let mut chars = tok.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `[+|-] [coef] name ...` into terms.
fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(i64, String)>, LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    for &tok in tokens {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ if tok.parse::<i64>().is_ok() => {
                if coef.is_some() {
                    return Err(err(line, format!("two coefficients in a row at `{tok}`")));
                }
                coef = Some(tok.parse().expect("checked"));
            }
            _ if is_name(tok) => {
                terms.push((sign * coef.unwrap_or(1), tok.to_string()));
                sign = 1;
                coef = None;
            }
            _ => return Err(err(line, format!("unexpected token `{tok}`"))),
        }
    }
    if coef.is_some() {
        return Err(err(line, "dangling coefficient"));
    }
    Ok(terms)
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

pub fn parse_lp(text: &str) -> Result<LpModel, LpParseError> {
    let mut model = LpModel::default();
    let mut section = Section::None;
    // Pending constraint spanning several lines: (start line, tokens).
    let mut pending: Option<(usize, Vec<String>)> = None;

    let finish = |model: &mut LpModel, start: usize, toks: Vec<String>| -> Result<(), LpParseError> {
        let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
        let (name, body) = match refs.first() {
            Some(first) if first.ends_with(':') => (first.trim_end_matches(':').to_string(), &refs[1..]),
            _ => (format!("c{}", model.constraints.len() + 1), &refs[..]),
        };
        let pos = body
            .iter()
            .position(|t| parse_sense(t).is_some())
            .ok_or_else(|| err(start, "constraint without a comparison"))?;
        if pos + 2 != body.len() {
            return Err(err(start, "constraint must end with `<sense> <constant>`"));
        }
        let rhs = body[pos + 1]
            .parse::<i64>()
            .map_err(|_| err(start, format!("bad right-hand side `{}`", body[pos + 1])))?;
        model.constraints.push(LpConstraint {
            name,
            terms: parse_terms(&body[..pos], start)?,
            sense: parse_sense(body[pos]).expect("checked"),
            rhs,
        });
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let next_section = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "maximize" | "maximise" | "max" => Some(Section::Objective),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "general" | "generals" | "gen" => Some(Section::General),
            "binary" | "binaries" | "bin" => Some(Section::Binary),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next_section {
            if let Some((start, toks)) = pending.take() {
                finish(&mut model, start, toks)?;
            }
            if s == Section::Objective {
                model.minimize = lower.starts_with("min");
            }
            section = s;
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => return Err(err(line_no, "content before the objective section")),
            Section::End => return Err(err(line_no, "content after End")),
            Section::Objective => {
                let body = if toks[0].ends_with(':') { &toks[1..] } else { &toks[..] };
                model.objective.extend(parse_terms(body, line_no)?);
            }
            Section::Constraints => {
                let starts_new = toks[0].ends_with(':');
                if starts_new {
                    if let Some((start, prev)) = pending.take() {
                        finish(&mut model, start, prev)?;
                    }
                    pending = Some((line_no, toks.iter().map(|t| t.to_string()).collect()));
                } else {
                    match pending.as_mut() {
                        Some((_, prev)) => prev.extend(toks.iter().map(|t| t.to_string())),
                        None => pending = Some((line_no, toks.iter().map(|t| t.to_string()).collect())),
                    }
                }
            }
            Section::Bounds => {
                let parse_i = |s: &str| s.parse::<i64>().map_err(|_| err(line_no, format!("bad bound `{s}`")));
                match toks.as_slice() {
                    [lo, "<=", name, "<=", hi] if is_name(name) => {
                        model.bounds.insert(name.to_string(), (Some(parse_i(lo)?), Some(parse_i(hi)?)));
                    }
                    [name, ">=", lo] if is_name(name) => {
                        let e = model.bounds.entry(name.to_string()).or_insert((None, None));
                        e.0 = Some(parse_i(lo)?);
                    }
                    [name, "<=", hi] if is_name(name) => {
                        let e = model.bounds.entry(name.to_string()).or_insert((None, None));
                        e.1 = Some(parse_i(hi)?);
                    }
                    [name, "free"] if is_name(name) => {
                        model.bounds.insert(name.to_string(), (None, None));
                    }
                    _ => return Err(err(line_no, "unsupported bound")),
                }
            }
            Section::General | Section::Binary => {
                for t in toks {
                    if !is_name(t) {
                        return Err(err(line_no, format!("bad variable name `{t}`")));
                    }
                    let list = if section == Section::General {
                        &mut model.generals
                    } else {
                        &mut model.binaries
                    };
                    list.push(t.to_string());
                }
            }
        }
    }
    if let Some((start, toks)) = pending.take() {
        finish(&mut model, start, toks)?;
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing End"));
    }

    let declared = model.declared();
    for c in &model.constraints {
        for (_, v) in &c.terms {
            if !declared.contains(v.as_str()) {
                return Err(err(0, format!("variable `{v}` in {} is never declared", c.name)));
            }
        }
    }
    Ok(model)
}

fn render_terms(out: &mut String, terms: &[(i64, String)]) {
    for (c, v) in terms {
        let sign = if *c < 0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {v}", c.unsigned_abs());
    }
}

impl LpModel {
    /// Names listed in the objective, bounds, general or binary sections.
    pub fn declared(&self) -> BTreeSet<&str> {
        let mut s: BTreeSet<&str> = BTreeSet::new();
        s.extend(self.objective.iter().map(|(_, v)| v.as_str()));
        s.extend(self.bounds.keys().map(String::as_str));
        s.extend(self.generals.iter().map(String::as_str));
        s.extend(self.binaries.iter().map(String::as_str));
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.minimize { "Minimize\n obj:" } else { "Maximize\n obj:" });
        render_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            render_terms(&mut out, &c.terms);
            let _ = writeln!(out, " {} {}", c.sense.as_str(), c.rhs);
        }
        out.push_str("Bounds\n");
        for (v, b) in &self.bounds {
            match *b {
                (Some(lo), Some(hi)) => {
                    let _ = writeln!(out, " {lo} <= {v} <= {hi}");
                }
                (Some(lo), None) => {
                    let _ = writeln!(out, " {v} >= {lo}");
                }
                (None, Some(hi)) => {
                    let _ = writeln!(out, " {v} <= {hi}");
                }
                (None, None) => {
                    let _ = writeln!(out, " {v} free");
                }
            }
        }
        for (title, list) in [("General", &self.generals), ("Binary", &self.binaries)] {
            let _ = writeln!(out, "{title}");
            for v in list.iter() {
                let _ = writeln!(out, " {v}");
            }
        }
        out.push_str("End\n");
        out
    }

    /// Name of the first constraint, bound or integrality condition that the
    /// point violates. Missing variables count as zero.
    pub fn violated(&self, point: &BTreeMap<String, i64>) -> Option<String> {
        let val = |v: &str| point.get(v).copied().unwrap_or(0);
        for c in &self.constraints {
            let lhs: i64 = c.terms.iter().map(|(k, v)| k * val(v)).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Ge => lhs >= c.rhs,
                Sense::Eq => lhs == c.rhs,
            };
            if !ok {
                return Some(format!("{} (lhs {lhs}, rhs {})", c.name, c.rhs));
            }
        }
        for (v, &(lo, hi)) in &self.bounds {
            let x = val(v);
            if lo.is_some_and(|l| x < l) || hi.is_some_and(|h| x > h) {
                return Some(format!("bound of {v}"));
            }
        }
        for v in &self.binaries {
            if !matches!(val(v), 0 | 1) {
                return Some(format!("binary {v}"));
            }
        }
        None
    }

    pub fn objective_value(&self, point: &BTreeMap<String, i64>) -> i64 {
        self.objective
            .iter()
            .map(|(k, v)| k * point.get(v).copied().unwrap_or(0))
            .sum()
    }
}
