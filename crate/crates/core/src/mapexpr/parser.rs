//! Recursive-descent parser for the map DSL:
//!
//! ```text
//! map    := "(" expr { "," expr } ")"
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | atom { "^" integer }
//! atom   := number | "pi" | var | func "(" expr ")" | "atan2" "(" expr "," expr ")" | "(" expr ")"
//! ```

use super::ast::{Expr, Func};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        self.error_at(self.pos, message)
    }

    fn error_at<T>(&self, pos: usize, message: impl Into<String>) -> Result<T> {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.iter().filter(|&&c| c == b'\n').count() + 1;
        let column = pos - before.iter().rposition(|&c| c == b'\n').map_or(0, |p| p + 1) + 1;
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += 1;
                Ok(())
            }
            Some(found) => self.error(format!("expected '{}', found '{}'", c as char, found as char)),
            None => self.error(format!("expected '{}', found end of input", c as char)),
        }
    }

    fn map(&mut self) -> Result<Vec<Expr>> {
        self.expect(b'(')?;
        let mut coords = vec![self.expr()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    coords.push(self.expr()?);
                }
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => return self.error(format!("expected ',' or ')', found '{}'", c as char)),
                None => return self.error("unterminated coordinate list"),
            }
        }
        if let Some(c) = self.peek() {
            return self.error(format!("unexpected trailing '{}'", c as char));
        }
        Ok(coords)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let mut base = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            base = Expr::Pow(Box::new(base), self.integer()?);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let parenthesised = self.peek() == Some(b'(');
        if parenthesised {
            self.pos += 1;
        }
        let start = {
            self.skip_ws();
            self.pos
        };
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let value = match text.parse::<i32>() {
            Ok(v) => v,
            Err(_) => return self.error_at(start, "exponent must be an integer"),
        };
        if parenthesised {
            self.expect(b')')?;
        }
        Ok(value)
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return self.error_at(start, "malformed number");
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.error_at(mark, "malformed exponent");
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.error_at(start, "malformed number"),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let func = match ident {
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "x1" | "x2" | "x3" | "x4" => {
                        return Ok(Expr::Var(usize::from(ident.as_bytes()[1] - b'1')))
                    }
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    "atan2" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b',')?;
                        let b = self.expr()?;
                        self.expect(b')')?;
                        return Ok(Expr::Atan2(Box::new(a), Box::new(b)));
                    }
                    _ => return self.error_at(start, format!("unknown identifier '{ident}'")),
                };
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(a)))
            }
            Some(c) => self.error(format!("unexpected '{}'", c as char)),
        }
    }
}

/// Parses the coordinate list of a map.
pub fn parse_coordinates(source: &str) -> Result<Vec<Expr>> {
    Parser {
        src: source.as_bytes(),
        pos: 0,
    }
    .map()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence_and_unary_minus() {
        let e = parse_coordinates("(1 + 2 * x1^2, -x2^2)").unwrap();
        assert_eq!(e[0].eval(&[3.0, 0.0]), 19.0);
        assert_eq!(e[1].eval(&[0.0, 3.0]), -9.0);
        let e = parse_coordinates("(2^-1 + 8/2/2, atan2(x1, x2), pi)").unwrap();
        assert_eq!(e[0].eval(&[0.0, 0.0]), 2.5);
        assert_eq!(e[1].eval(&[1.0, 0.0]), std::f64::consts::FRAC_PI_2);
        assert_eq!(e[2].eval(&[]), std::f64::consts::PI);
    }

    #[test]
    fn reports_location() {
        match parse_coordinates("(x1,") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("{other:?}"),
        }
        match parse_coordinates("(x1,\n  foo(x2))") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_coordinates("(x5)").is_err());
        assert!(parse_coordinates("(x1) x2").is_err());
        assert!(parse_coordinates("(x1^1.5)").is_err());
    }

    #[test]
    fn scientific_numbers() {
        let e = parse_coordinates("(1.5e-3, 2E2, .25)").unwrap();
        assert_eq!(e[0], Expr::Num(1.5e-3));
        assert_eq!(e[1], Expr::Num(200.0));
        assert_eq!(e[2], Expr::Num(0.25));
    }
}
