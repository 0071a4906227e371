//! A tiny exact evaluator for rational expressions in one variable `p`.
//!
//! Grammar: integers, `p`, `+ - * / ^` and parentheses. Exponents must
//! evaluate to integers. Used for the C-matrix fixture file and for
//! tolerance flags like `1/10^12`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Var,
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Num(digits.parse().expect("ascii digits")));
            }
            'p' => {
                chars.next();
                out.push(Token::Var);
            }
            '+' | '-' | '*' | '/' | '^' => {
                chars.next();
                out.push(Token::Op(c));
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?} in {src:?}"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    var: Option<&'a Rational>,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at token {} in {:?}", self.pos, self.src))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Rational> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            if op == '+' {
                acc += rhs;
            } else {
                acc -= rhs;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Rational> {
        let mut acc = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc *= rhs;
            } else {
                if rhs.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc /= rhs;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Rational> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Rational> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            if !exp.is_integer() {
                return Err(self.err("non-integer exponent"));
            }
            let e = exp
                .to_integer()
                .to_i32()
                .ok_or_else(|| self.err("exponent out of range"))?;
            if base.is_zero() && e < 0 {
                return Err(self.err("zero to a negative power"));
            }
            let mag = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
            return Ok(if e >= 0 { mag } else { mag.recip() });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Rational> {
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Rational::from_integer(n))
            }
            Some(Token::Var) => {
                self.pos += 1;
                self.var.cloned().ok_or_else(|| self.err("variable p has no value here"))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected a number, p or '('")),
        }
    }
}

/// Evaluates `src` exactly, substituting `p` when given.
pub fn evaluate(src: &str, p: Option<&Rational>) -> Result<Rational> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut parser = Parser { tokens, pos: 0, var: p, src };
    let v = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(v)
}

/// Convenience for evaluating at an integer prime.
pub fn evaluate_at(src: &str, p: u64) -> Result<Rational> {
    let pv = Rational::from_integer(BigInt::from(p));
    evaluate(src, Some(&pv))
}
