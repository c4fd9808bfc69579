//! Integer arithmetic expressions for the calculator tool: `+`, `-`, `*`,
//! parentheses, and unary minus.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>, ExprError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(v) = d.to_digit(10) else { break };
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(v as i64))
                        .ok_or_else(|| ExprError("literal overflow".into()))?;
                    chars.next();
                }
                out.push(Tok::Num(n));
            }
            '+' => {
                chars.next();
                out.push(Tok::Plus)
            }
            '-' => {
                chars.next();
                out.push(Tok::Minus)
            }
            '*' => {
                chars.next();
                out.push(Tok::Star)
            }
            '(' => {
                chars.next();
                out.push(Tok::LParen)
            }
            ')' => {
                chars.next();
                out.push(Tok::RParen)
            }
            other => return Err(ExprError(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    operands: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<i64, ExprError> {
        let mut acc = self.term()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == Tok::Plus {
                acc.checked_add(rhs)
            } else {
                acc.checked_sub(rhs)
            }
            .ok_or_else(|| ExprError("overflow".into()))?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<i64, ExprError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc
                .checked_mul(rhs)
                .ok_or_else(|| ExprError("overflow".into()))?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<i64, ExprError> {
        match self.next() {
            Some(Tok::Num(n)) => {
                self.operands += 1;
                Ok(n)
            }
            Some(Tok::Minus) => self
                .factor()?
                .checked_neg()
                .ok_or_else(|| ExprError("overflow".into())),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(ExprError("missing `)`".into())),
                }
            }
            Some(t) => Err(ExprError(format!("unexpected token {t:?}"))),
            None => Err(ExprError("unexpected end of input".into())),
        }
    }
}

fn parse(src: &str) -> Result<(i64, usize), ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        operands: 0,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ExprError("trailing input".into()));
    }
    Ok((v, p.operands))
}

pub fn eval(src: &str) -> Result<i64, ExprError> {
    parse(src).map(|(v, _)| v)
}

/// Value and number of literal operands.
pub fn eval_counting(src: &str) -> Result<(i64, usize), ExprError> {
    parse(src)
}

/// Integer literals appearing in `src`, with unary minus folded in.
pub fn literals(src: &str) -> Result<Vec<i64>, ExprError> {
    let toks = lex(src)?;
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if let Tok::Num(n) = t {
            let negated = i > 0
                && toks[i - 1] == Tok::Minus
                && (i == 1 || matches!(toks[i - 2], Tok::LParen | Tok::Plus | Tok::Minus | Tok::Star));
            out.push(if negated { -n } else { *n });
        }
    }
    Ok(out)
}
