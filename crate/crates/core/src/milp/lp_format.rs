//! CPLEX-style LP text: `Minimize`, `Subject To`, `Bounds`, `Binaries`, `End`.
//!
//! The writer separates every token by whitespace and prints numbers in
//! shortest round-trip form, so parsing its output reproduces the model
//! exactly. Every column is listed in `Bounds`, which both keeps unreferenced
//! columns alive and fixes column order on re-parse.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{ColumnId, LinearModel, ModelError, Sense, VarKind};

const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("maximisation models are not supported")]
    Maximize,
    #[error("section '{0}' is not supported")]
    UnsupportedSection(String),
    #[error("missing 'End'")]
    MissingEnd,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn push_terms(out: &mut String, model: &LinearModel, coeffs: &[(ColumnId, f64)]) {
    if coeffs.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, &(col, a)) in coeffs.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), model.column(col).name);
    }
}

pub fn write_lp(model: &LinearModel) -> String {
    let stats = model.stats();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} columns, {} rows",
        stats.num_vars, stats.num_rows
    );
    out.push_str("Minimize\n obj:");
    push_terms(&mut out, model, model.objective());
    out.push_str("\nSubject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.name);
        push_terms(&mut out, model, &row.coeffs);
        let _ = writeln!(out, " {} {}", row.sense, row.rhs);
    }
    out.push_str("Bounds\n");
    for col in model.columns() {
        let (lo, up, name) = (col.lower, col.upper, &col.name);
        let _ = match (lo.is_finite(), up.is_finite()) {
            _ if lo == up => writeln!(out, " {name} = {lo}"),
            (false, false) => writeln!(out, " {name} free"),
            (true, false) => writeln!(out, " {name} >= {lo}"),
            (false, true) => writeln!(out, " -inf <= {name} <= {up}"),
            (true, true) => writeln!(out, " {lo} <= {name} <= {up}"),
        };
    }
    let binaries: Vec<&str> = model
        .binary_columns()
        .map(|c| model.column(c).name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_header(line: &str) -> Option<Result<Section, LpParseError>> {
    let lower = line.to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    Some(Ok(match words.as_slice() {
        ["minimize" | "minimise" | "minimum" | "min"] => Section::Objective,
        ["maximize" | "maximise" | "maximum" | "max"] => return Some(Err(LpParseError::Maximize)),
        ["subject", "to"] | ["such", "that"] | ["st"] | ["s.t."] => Section::Constraints,
        ["bounds" | "bound"] => Section::Bounds,
        ["binaries" | "binary" | "bin"] => Section::Binaries,
        ["generals" | "general" | "gen" | "semi-continuous" | "sos"] => {
            return Some(Err(LpParseError::UnsupportedSection(words[0].to_string())))
        }
        ["end"] => Section::End,
        _ => return None,
    }))
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    let t = tok.strip_prefix('+').unwrap_or(tok);
    t.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Linear expression `[name:] term term ...` as a token stream.
#[derive(Default)]
struct Expr {
    name: Option<String>,
    terms: Vec<(String, f64)>,
    constant: f64,
    pending_sign: f64,
    pending_coef: Option<f64>,
}

impl Expr {
    fn new() -> Self {
        Self {
            pending_sign: 1.0,
            ..Default::default()
        }
    }

    fn is_empty(&self) -> bool {
        self.name.is_none() && self.terms.is_empty() && self.pending_coef.is_none()
    }

    fn push(&mut self, tok: &str, line: usize) -> Result<(), LpParseError> {
        if self.is_empty() && self.pending_sign == 1.0 && tok.len() > 1 && tok.ends_with(':') {
            self.name = Some(tok[..tok.len() - 1].to_string());
            return Ok(());
        }
        match tok {
            "+" => return Ok(()),
            "-" => {
                self.pending_sign = -self.pending_sign;
                return Ok(());
            }
            _ => {}
        }
        if let Some(v) = parse_number(tok) {
            if let Some(c) = self.pending_coef.take() {
                self.constant += c;
            }
            self.pending_coef = Some(self.pending_sign * v);
            self.pending_sign = 1.0;
            return Ok(());
        }
        if let Some(rest) = tok.strip_prefix('-').filter(|r| !r.is_empty()) {
            self.pending_sign = -self.pending_sign;
            return self.push(rest, line);
        }
        if let Some(rest) = tok.strip_prefix('+').filter(|r| !r.is_empty()) {
            return self.push(rest, line);
        }
        if tok.starts_with(|c: char| c.is_ascii_digit() || c == '.') || parse_sense(tok).is_some() {
            return Err(LpParseError::Syntax {
                line,
                message: format!("unexpected token '{tok}'"),
            });
        }
        let coef = self.pending_coef.take().unwrap_or(self.pending_sign);
        self.pending_sign = 1.0;
        self.terms.push((tok.to_string(), coef));
        Ok(())
    }

    fn finish(&mut self) {
        if let Some(c) = self.pending_coef.take() {
            self.constant += c;
        }
    }
}

struct RawRow {
    name: String,
    terms: Vec<(String, f64)>,
    sense: Sense,
    rhs: f64,
}

pub fn parse_lp(text: &str) -> Result<LinearModel, LpParseError> {
    let mut section = Section::Preamble;
    let mut order: Vec<String> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut note = |name: &str, order: &mut Vec<String>| {
        if seen.insert(name.to_string(), ()).is_none() {
            order.push(name.to_string());
        }
    };

    let mut objective = Expr::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut current = Expr::new();
    let mut awaiting_rhs: Option<Sense> = None;
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(next) = section_header(line) {
            if awaiting_rhs.is_some() || !current.is_empty() {
                return Err(LpParseError::Syntax {
                    line: line_no,
                    message: "constraint left unfinished".into(),
                });
            }
            section = next?;
            continue;
        }
        match section {
            Section::Preamble | Section::End => {
                return Err(LpParseError::Syntax {
                    line: line_no,
                    message: "content outside a section".into(),
                })
            }
            Section::Objective => {
                for tok in line.split_whitespace() {
                    objective.push(tok, line_no)?;
                }
            }
            Section::Constraints => {
                for tok in line.split_whitespace() {
                    if let Some(sense) = awaiting_rhs {
                        let rhs = parse_number(tok).ok_or_else(|| LpParseError::Syntax {
                            line: line_no,
                            message: format!("expected right-hand side, found '{tok}'"),
                        })?;
                        current.finish();
                        let done = std::mem::replace(&mut current, Expr::new());
                        let name = done.name.unwrap_or_else(|| format!("R{}", rows.len() + 1));
                        rows.push(RawRow {
                            name,
                            terms: done.terms,
                            sense,
                            rhs: rhs - done.constant,
                        });
                        awaiting_rhs = None;
                    } else if let Some(sense) = parse_sense(tok) {
                        awaiting_rhs = Some(sense);
                    } else {
                        current.push(tok, line_no)?;
                    }
                }
            }
            Section::Bounds => bounds.push(parse_bound(line, line_no)?),
            Section::Binaries => binaries.extend(line.split_whitespace().map(str::to_string)),
        }
    }
    if section != Section::End {
        return Err(LpParseError::MissingEnd);
    }
    objective.finish();

    // Bounds order first, then anything else in order of appearance.
    for (name, _, _) in &bounds {
        note(name, &mut order);
    }
    for (name, _) in &objective.terms {
        note(name, &mut order);
    }
    for row in &rows {
        for (name, _) in &row.terms {
            note(name, &mut order);
        }
    }
    for name in &binaries {
        note(name, &mut order);
    }

    let bound_of: HashMap<&str, (f64, f64)> = bounds
        .iter()
        .map(|(n, lo, up)| (n.as_str(), (*lo, *up)))
        .collect();
    let is_binary: std::collections::HashSet<&str> = binaries.iter().map(String::as_str).collect();

    let mut model = LinearModel::new();
    for name in &order {
        let binary = is_binary.contains(name.as_str());
        let default = if binary {
            (0.0, 1.0)
        } else {
            (0.0, f64::INFINITY)
        };
        let (lo, up) = bound_of.get(name.as_str()).copied().unwrap_or(default);
        let kind = if binary {
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        model.add_column(name.clone(), lo, up, kind)?;
    }
    let id = |name: &str, model: &LinearModel| model.column_id(name).expect("column registered");
    let obj: Vec<(ColumnId, f64)> = objective
        .terms
        .iter()
        .map(|(n, a)| (id(n, &model), *a))
        .collect();
    model.set_objective(obj)?;
    for row in rows {
        let coeffs: Vec<(ColumnId, f64)> =
            row.terms.iter().map(|(n, a)| (id(n, &model), *a)).collect();
        model.add_row(row.name, coeffs, row.sense, row.rhs)?;
    }
    Ok(model)
}

fn parse_bound(line: &str, line_no: usize) -> Result<(String, f64, f64), LpParseError> {
    let err = || LpParseError::Syntax {
        line: line_no,
        message: format!("bad bound '{line}'"),
    };
    let toks: Vec<&str> = line.split_whitespace().collect();
    let inf = f64::INFINITY;
    let num = |t: &str| parse_number(t).ok_or_else(err);
    Ok(match toks.as_slice() {
        [name, free] if free.eq_ignore_ascii_case("free") => (name.to_string(), -inf, inf),
        [lo, "<=", name, "<=", up] => (name.to_string(), num(lo)?, num(up)?),
        [name, op, v] if parse_number(name).is_none() => {
            let v = num(v)?;
            match parse_sense(op).ok_or_else(err)? {
                Sense::Ge => (name.to_string(), v, inf),
                Sense::Le => (name.to_string(), 0.0, v),
                Sense::Eq => (name.to_string(), v, v),
            }
        }
        [v, op, name] => {
            let v = num(v)?;
            match parse_sense(op).ok_or_else(err)? {
                Sense::Le => (name.to_string(), v, inf),
                Sense::Ge => (name.to_string(), 0.0, v),
                Sense::Eq => (name.to_string(), v, v),
            }
        }
        _ => return Err(err()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LinearModel {
        let mut m = LinearModel::new();
        let x = m
            .add_column("x", 0.0, f64::INFINITY, VarKind::Continuous)
            .unwrap();
        m.add_row("lb", [(x, 1.0)], Sense::Ge, 3.0).unwrap();
        m.set_objective([(x, 1.0)]).unwrap();
        m
    }

    #[test]
    fn single_constraint_line() {
        let text = write_lp(&tiny());
        let section: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "Subject To")
            .skip(1)
            .take_while(|l| *l != "Bounds")
            .collect();
        assert_eq!(section, vec![" lb: + 1 x >= 3"]);
        assert_eq!(parse_lp(&text).unwrap(), tiny());
    }

    #[test]
    fn free_and_negative_bounds_are_explicit() {
        let mut m = LinearModel::new();
        let a = m
            .add_column("ts_1_1", -7.5, f64::INFINITY, VarKind::Continuous)
            .unwrap();
        let b = m
            .add_column("f", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous)
            .unwrap();
        let c = m.add_column("w", 0.0, 0.0, VarKind::Binary).unwrap();
        m.add_row("r", [(a, 2.0), (b, -1.0), (c, 0.25)], Sense::Eq, -1.5)
            .unwrap();
        m.add_row("empty", [], Sense::Le, 0.0).unwrap();
        let text = write_lp(&m);
        assert!(text.contains(" ts_1_1 >= -7.5\n"));
        assert!(text.contains(" f free\n"));
        assert!(text.contains(" w = 0\n"));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_lp(&back), text);
    }

    #[test]
    fn parses_hand_written_text() {
        let text = "\\ comment\nMINIMIZE\n obj: 2 x + y\nSubject To\n c1: x + y\n   >= 1\n -x - 3 y <= 4 \\ trailing\nBounds\n x <= 5\n -inf <= y <= 2\nBinary\n z\nEnd\n";
        let m = parse_lp(text).unwrap();
        assert_eq!(m.stats().num_vars, 3);
        assert_eq!(m.rows()[1].name, "R2");
        assert_eq!(
            m.rows()[1].coeffs,
            vec![(ColumnId(0), -1.0), (ColumnId(1), -3.0)]
        );
        let y = m.column(m.column_id("y").unwrap());
        assert_eq!((y.lower, y.upper), (f64::NEG_INFINITY, 2.0));
        assert_eq!(m.column(m.column_id("z").unwrap()).kind, VarKind::Binary);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_lp("Maximize\n obj: x\nEnd\n"),
            Err(LpParseError::Maximize)
        );
        assert_eq!(
            parse_lp("Minimize\n obj: x\n"),
            Err(LpParseError::MissingEnd)
        );
        assert!(matches!(
            parse_lp("Minimize\n obj: x\nSubject To\n c: x >= y\nEnd\n"),
            Err(LpParseError::Syntax { line: 4, .. })
        ));
        assert!(matches!(
            parse_lp("Minimize\n obj: x\nSubject To\n c: x >=\nEnd\n"),
            Err(LpParseError::Syntax { .. })
        ));
    }
}
