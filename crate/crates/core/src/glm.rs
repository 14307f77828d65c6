//! Formula-driven generalized linear models.
//!
//! ```
//! use miniprob::glm::{parse_formula, build_model, Family, Table};
//!
//! let f = parse_formula("y ~ x1 + x2").unwrap();
//! let table = Table::new(vec![
//!     ("x1".into(), vec![0.0, 0.5, 1.0]),
//!     ("x2".into(), vec![1.0, 0.0, 2.0]),
//!     ("y".into(), vec![0.3, 1.1, 2.0]),
//! ]).unwrap();
//! let model = build_model(&f, &table, Family::Normal).unwrap();
//! assert!(model.free_var("sd_log").is_some());
//! ```

use std::collections::HashSet;
use std::fmt;

use crate::array::Array;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::graph::Expr;
use crate::model::{Model, ModelBuilder};

/// Prior sd of the intercept and every coefficient.
pub const COEF_PRIOR_SD: f64 = 100.0;
/// Prior scale of the normal family's error sd.
pub const SD_PRIOR_SD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub response: String,
    pub terms: Vec<String>,
    pub intercept: bool,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ ", self.response)?;
        if !self.intercept {
            f.write_str("0 + ")?;
        }
        f.write_str(&self.terms.join(" + "))
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            expected: expected.to_string(),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => self.pos += 1,
            _ => return Err(self.error("identifier")),
        }
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn expect(&mut self, c: u8, what: &str) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }
}

/// Parse `response ~ [0 +] term (+ term)*`.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let response = lx.ident()?;
    lx.expect(b'~', "'~'")?;
    let mut intercept = true;
    if lx.peek() == Some(b'0') {
        lx.pos += 1;
        intercept = false;
        lx.expect(b'+', "'+' after '0'")?;
    }
    let mut terms = Vec::new();
    let mut seen = HashSet::new();
    loop {
        let term = lx.ident()?;
        if term == response {
            return Err(Error::ResponseInTerms(term));
        }
        if !seen.insert(term.clone()) {
            return Err(Error::DuplicateTerm(term));
        }
        terms.push(term);
        match lx.peek() {
            None => break,
            Some(b'+') => lx.pos += 1,
            Some(_) => return Err(lx.error("'+' or end of formula")),
        }
    }
    Ok(Formula {
        response,
        terms,
        intercept,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Family {
    /// Identity link, normal errors with unknown sd.
    #[default]
    Normal,
    /// Logit link, Bernoulli response.
    Binomial,
}

/// Named numeric columns of equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if let Some((_, first)) = columns.first() {
            if let Some((name, _)) = columns.iter().find(|(_, c)| c.len() != first.len()) {
                return Err(Error::invalid(format!("column `{name}` has a different length")));
            }
        }
        Ok(Table { columns })
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }
}

/// Column names of the design matrix: `Intercept` first, then the terms.
pub fn design_columns(formula: &Formula) -> Vec<String> {
    let mut cols = Vec::with_capacity(formula.terms.len() + 1);
    if formula.intercept {
        cols.push("Intercept".to_string());
    }
    cols.extend(formula.terms.iter().cloned());
    cols
}

/// Design matrix columns in [`design_columns`] order.
pub fn design_matrix(formula: &Formula, table: &Table) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    if formula.intercept {
        out.push(vec![1.0; table.rows()]);
    }
    for t in &formula.terms {
        out.push(table.column(t)?.to_vec());
    }
    Ok(out)
}

/// Add the GLM's variables to an existing builder.
pub fn add_to_builder(
    b: &mut ModelBuilder,
    formula: &Formula,
    table: &Table,
    family: Family,
) -> Result<()> {
    let y = table.column(&formula.response)?.to_vec();
    let x = design_matrix(formula, table)?;
    if family == Family::Binomial && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::NonBinaryResponse(formula.response.clone()));
    }
    let mut eta: Option<Expr> = None;
    for (name, col) in design_columns(formula).iter().zip(x) {
        let coef = b.add_free(name, Distribution::normal(0.0, COEF_PRIOR_SD), &[], None)?;
        let term = if name == "Intercept" && formula.intercept {
            coef
        } else {
            Expr::constant(Array::vector(col)) * coef
        };
        eta = Some(match eta {
            Some(e) => e + term,
            None => term,
        });
    }
    let eta = eta.expect("a formula has at least one term");
    let n = table.rows();
    // broadcast an intercept-only predictor to the data length
    let eta = if eta.shape().is_empty() {
        eta + Expr::constant(Array::vector(vec![0.0; n]))
    } else {
        eta
    };
    match family {
        Family::Normal => {
            let sd = b.add_free("sd", Distribution::half_normal(SD_PRIOR_SD), &[], None)?;
            b.add_observed(&formula.response, Distribution::normal(eta, sd), Array::vector(y), None)?;
        }
        Family::Binomial => {
            let data = Array::vector(y).with_dtype(crate::array::Dtype::Int)?;
            b.add_observed(&formula.response, Distribution::bernoulli(eta.sigmoid()), data, None)?;
        }
    }
    Ok(())
}

/// A finalized GLM.
pub fn build_model(formula: &Formula, table: &Table, family: Family) -> Result<Model> {
    let mut b = ModelBuilder::new();
    add_to_builder(&mut b, formula, table, family)?;
    b.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let f = parse_formula("y ~ x1 + x2").unwrap();
        assert_eq!(f.response, "y");
        assert_eq!(f.terms, vec!["x1", "x2"]);
        assert!(f.intercept);
        assert!(!parse_formula("y ~ 0 + x1").unwrap().intercept);
        match parse_formula("y ~ x1 + + x2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_formulas() {
        assert!(matches!(parse_formula("y ~ x + x"), Err(Error::DuplicateTerm(_))));
        assert!(matches!(parse_formula("y ~ x + y"), Err(Error::ResponseInTerms(_))));
        assert!(matches!(parse_formula("y ~ a:b"), Err(Error::Syntax { offset: 5, .. })));
        assert!(matches!(parse_formula("y ~ a * b"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_formula("~ x"), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_formula("y ~ "), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse_formula("y ~ 0"), Err(Error::Syntax { .. })));
    }
}
