//! DIMACS CNF reading and writing.
//!
//! Output is canonical: a `p cnf` header whose variable count is the largest
//! id used, then one clause per line in formula order, literals ascending by
//! variable, each line terminated by ` 0`. Parsing normalizes, so
//! `parse(emit(f)) == f` for any normalized `f`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{normalize, CnfError, Formula, Literal, Normalized};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: empty clause in input")]
    EmptyClause { line: usize },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

/// A parsed file plus everything worth telling the user about it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDimacs {
    pub formula: Formula,
    pub declared_variables: u64,
    pub declared_clauses: u64,
    /// Header variable count after raising it to cover every literal.
    pub variables: u64,
    pub warnings: Vec<String>,
    pub tautologies_dropped: usize,
    pub duplicate_clauses_dropped: usize,
    pub duplicate_literals_collapsed: usize,
}

impl ParsedDimacs {
    pub fn normalization_changed(&self) -> bool {
        self.tautologies_dropped + self.duplicate_clauses_dropped + self.duplicate_literals_collapsed > 0
    }
}

pub fn parse_dimacs(text: &str) -> Result<Formula, DimacsError> {
    parse_dimacs_detailed(text).map(|p| p.formula)
}

pub fn parse_dimacs_detailed(text: &str) -> Result<ParsedDimacs, DimacsError> {
    let mut header: Option<(u64, u64)> = None;
    let mut raw: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut max_var = 0u64;

    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let syntax = |column: usize, message: String| DimacsError::Syntax {
            line: line_no,
            column,
            message,
        };
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(syntax(1, "second header".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let num = |i: usize| -> Result<u64, DimacsError> {
                parts
                    .get(i)
                    .ok_or_else(|| syntax(1, "header must be `p cnf <vars> <clauses>`".into()))?
                    .parse()
                    .map_err(|_| syntax(column_of(line, parts[i]), format!("bad header number `{}`", parts[i])))
            };
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(syntax(1, "header must be `p cnf <vars> <clauses>`".into()));
            }
            header = Some((num(2)?, num(3)?));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        for token in line.split_whitespace() {
            let column = column_of(line, token);
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(column, format!("expected an integer literal, found `{token}`")))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause { line: line_no });
                }
                raw.push(std::mem::take(&mut current));
            } else {
                let lit = Literal::from_dimacs(value)
                    .map_err(|_| syntax(column, format!("literal `{token}` out of range")))?;
                max_var = max_var.max(u64::from(lit.variable().get()));
                current.push(lit);
            }
        }
    }
    let (declared_variables, declared_clauses) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }

    let mut warnings = Vec::new();
    if max_var > declared_variables {
        warnings.push(format!(
            "header declares {declared_variables} variables but literals reach {max_var}; raising the count"
        ));
    }
    if raw.len() as u64 != declared_clauses {
        warnings.push(format!(
            "header declares {declared_clauses} clauses but {} were read",
            raw.len()
        ));
    }
    let Normalized {
        formula,
        tautologies_dropped,
        duplicate_clauses_dropped,
        duplicate_literals_collapsed,
    } = normalize(raw).map_err(|e| match e {
        CnfError::EmptyClause => DimacsError::EmptyClause { line: 0 },
        other => DimacsError::Syntax {
            line: 0,
            column: 0,
            message: other.to_string(),
        },
    })?;
    Ok(ParsedDimacs {
        formula,
        declared_variables,
        declared_clauses,
        variables: declared_variables.max(max_var),
        warnings,
        tautologies_dropped,
        duplicate_clauses_dropped,
        duplicate_literals_collapsed,
    })
}

fn column_of(line: &str, token: &str) -> usize {
    token.as_ptr() as usize - line.as_ptr() as usize + 1
}

pub fn emit_dimacs(formula: &Formula) -> String {
    emit_dimacs_with_comments(formula, &[])
}

/// Like [`emit_dimacs`] with `c` comment lines ahead of the header.
pub fn emit_dimacs_with_comments(formula: &Formula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "c {line}");
        }
    }
    let vars = formula.max_variable().map_or(0, |v| v.get());
    let _ = writeln!(out, "p cnf {} {}", vars, formula.len());
    for clause in formula.clauses() {
        for l in clause.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
