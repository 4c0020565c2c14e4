//! Line-oriented relation syntax.
//!
//! ```text
//! [group:] side ("<<" | ">>" | "<=C") side
//! side   = "1" | factor ("*" factor)*
//! factor = (NAME | "(rho_a3)" | "(R/a)") ["^" rational]
//! ```
//!
//! `#` starts a comment. Rationals are `[-]INT[/INT]`.

use num_rational::Rational64;

use super::{Factor, Monomial, Relation, RelationKind};
use crate::error::{Error, Result};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::RelationSyntax { line: self.line, column, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn at_op(&mut self) -> bool {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().take(3).collect();
        rest.starts_with("<<") || rest.starts_with(">>") || rest.starts_with("<=C")
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return None;
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn int(&mut self) -> Option<i64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    /// Exponent after a `^` found at column `caret`.
    fn rational(&mut self, caret: usize) -> Result<Rational64> {
        self.skip_ws();
        let neg = self.peek() == Some('-');
        if neg {
            self.pos += 1;
        }
        let Some(num) = self.int() else {
            return self.err(caret, "expected an exponent after '^'");
        };
        let mut den = 1;
        if self.peek() == Some('/') {
            let slash = self.col();
            self.pos += 1;
            match self.int() {
                Some(0) => return self.err(slash, "zero denominator"),
                Some(d) => den = d,
                None => return self.err(slash, "expected a denominator after '/'"),
            }
        }
        Ok(Rational64::new(if neg { -num } else { num }, den))
    }

    fn exponent(&mut self, required: bool) -> Result<Rational64> {
        self.skip_ws();
        if self.peek() == Some('^') {
            let caret = self.col();
            self.pos += 1;
            self.rational(caret)
        } else if required {
            self.err(self.col(), "expected '^'")
        } else {
            Ok(Rational64::from_integer(1))
        }
    }

    fn factor(&mut self) -> Result<(Factor, Rational64)> {
        self.skip_ws();
        let col = self.col();
        if self.eat("(rho_a3)") {
            return Ok((Factor::RhoA3, self.exponent(false)?));
        }
        if self.eat("(R/a)") {
            return Ok((Factor::ROverA, self.exponent(false)?));
        }
        match self.ident() {
            Some(name) => Ok((Factor::Quantity(name), self.exponent(false)?)),
            None => self.err(col, "expected a quantity name"),
        }
    }

    fn side(&mut self) -> Result<Monomial> {
        self.skip_ws();
        if self.peek() == Some('1') {
            self.pos += 1;
            return Ok(Monomial::one());
        }
        let mut out = vec![self.factor()?];
        while self.eat("*") {
            out.push(self.factor()?);
        }
        Ok(Monomial(out))
    }
}

/// Parse one relation per non-empty line. Unlabelled relations get the
/// group `line N`.
pub fn parse_relations(text: &str) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let mut c = Cursor { chars: line.chars().collect(), pos: 0, line: idx + 1 };
        // optional "group:" prefix
        let mut group = format!("line {}", idx + 1);
        if let Some(colon) = c.chars.iter().position(|&ch| ch == ':') {
            group = c.chars[..colon].iter().collect::<String>().trim().to_owned();
            if group.is_empty() {
                return c.err(colon + 1, "empty group label");
            }
            c.pos = colon + 1;
        }
        let lhs = c.side()?;
        if !c.at_op() {
            c.skip_ws();
            return c.err(c.col(), "expected '<<', '>>' or '<=C'");
        }
        let kind = if c.eat("<<") {
            RelationKind::MuchLess
        } else if c.eat(">>") {
            RelationKind::MuchGreater
        } else {
            c.eat("<=C");
            RelationKind::LeqWithConstant
        };
        let rhs = c.side()?;
        c.skip_ws();
        if c.peek().is_some() {
            return c.err(c.col(), "unexpected trailing input");
        }
        out.push(Relation { group, lhs, rhs, kind });
    }
    Ok(out)
}
