//! Recursive-descent parser for the symbol grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' uint)*
//! atom    := number | 'z' | 'i' | level | call | '(' expr ')'
//! level   := 'N' ('^' (number | '(' signed ')'))?
//! call    := 'conj' '(' expr ')' | 'exp' '(' expr ')'
//!          | 'bump' '(' signed ',' signed (',' signed)? ')'
//!          | 'bumpd' '(' uint ',' signed ',' signed ',' signed ')'
//!          | 'profile' '(' uint ',' expr ')'
//! ```

use num_complex::Complex64;

use super::expr::SymbolExpr;
use crate::error::{Error, Result};

pub fn parse_symbol(text: &str) -> Result<SymbolExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => Err(self.error(format!(
                    "expected `{}`, found `{}`",
                    c as char, found as char
                ))),
                None => Err(self.error(format!("expected `{}`, found end of input", c as char))),
            }
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            SymbolExpr::sum(terms)
        })
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = SymbolExpr::product([acc, rhs]);
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                acc = SymbolExpr::product([acc, rhs.recip()]);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SymbolExpr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymbolExpr> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            let k = self.uint()?;
            base = base.powi(k);
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i == start || (i == start + 1 && s[start] == b'.') {
            return Err(self.error("expected a number"));
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let digits = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > digits {
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        self.pos = i;
        text.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("bad number `{text}`"),
        })
    }

    fn signed(&mut self) -> Result<f64> {
        if self.eat(b'-') {
            Ok(-self.number()?)
        } else {
            self.eat(b'+');
            self.number()
        }
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a non-negative integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<u32>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("integer `{text}` out of range"),
        })
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<SymbolExpr> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c.is_ascii_digit() || c == b'.' {
            return Ok(SymbolExpr::real(self.number()?));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if !(c.is_ascii_alphabetic() || c == b'_') {
            return Err(self.error(format!("unexpected `{}`", c as char)));
        }
        let start = self.pos;
        let name = self.ident();
        match name.as_str() {
            "z" => Ok(SymbolExpr::z()),
            "i" => Ok(SymbolExpr::i()),
            "N" => {
                if self.eat(b'^') {
                    let e = if self.eat(b'(') {
                        let v = self.signed()?;
                        self.expect(b')')?;
                        v
                    } else {
                        self.number()?
                    };
                    Ok(SymbolExpr::level(e))
                } else {
                    Ok(SymbolExpr::level(1.0))
                }
            }
            "conj" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e.conjugate())
            }
            "exp" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e.exp())
            }
            "bump" => {
                self.expect(b'(')?;
                let a = self.signed()?;
                self.expect(b',')?;
                let b = self.signed()?;
                let (center, radius) = if self.eat(b',') {
                    let r = self.signed()?;
                    (Complex64::new(a, b), r)
                } else {
                    (Complex64::new(a, 0.0), b)
                };
                self.expect(b')')?;
                self.radius_ok(radius, start)?;
                Ok(SymbolExpr::bump(center, radius))
            }
            "bumpd" => {
                self.expect(b'(')?;
                let order = self.uint()?;
                self.expect(b',')?;
                let re = self.signed()?;
                self.expect(b',')?;
                let im = self.signed()?;
                self.expect(b',')?;
                let radius = self.signed()?;
                self.expect(b')')?;
                self.radius_ok(radius, start)?;
                if order > super::profile::MAX_TABULATED_ORDER {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("profile order {order} not supported"),
                    });
                }
                Ok(SymbolExpr::bump_derivative(
                    Complex64::new(re, im),
                    radius,
                    order,
                ))
            }
            "profile" => {
                self.expect(b'(')?;
                let order = self.uint()?;
                self.expect(b',')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                if order > super::profile::MAX_TABULATED_ORDER {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("profile order {order} not supported"),
                    });
                }
                Ok(SymbolExpr::profile(arg, order))
            }
            _ => Err(Error::UnknownIdentifier {
                name,
                offset: start,
            }),
        }
    }

    fn radius_ok(&self, radius: f64, offset: usize) -> Result<()> {
        if radius > 0.0 && radius.is_finite() {
            Ok(())
        } else {
            Err(Error::Syntax {
                offset,
                message: format!("bump radius must be positive, got {radius}"),
            })
        }
    }
}
