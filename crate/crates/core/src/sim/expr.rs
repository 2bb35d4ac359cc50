//! Arithmetic expressions over `t`, `x` and `y` used for boundary data and
//! forcing in scenario files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("{message} at position {position} in `{source_text}`")]
pub struct ExprError {
    pub position: usize,
    pub message: String,
    pub source_text: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    T,
    X,
    Y,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sin,
    Cos,
    Abs,
}

/// Parsed expression; keeps its source text for round-tripping.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr { source: format!("{v:?}"), root: Node::Num(v) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        eval(&self.root, t, x, y)
    }

    /// Whether the expression mentions `t`.
    pub fn depends_on_time(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::T => true,
                Node::Num(_) | Node::X | Node::Y => false,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Bin(_, a, b) => walk(a) || walk(b),
            }
        }
        walk(&self.root)
    }
}

fn eval(n: &Node, t: f64, x: f64, y: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::T => t,
        Node::X => x,
        Node::Y => y,
        Node::Neg(a) => -eval(a, t, x, y),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, t, x, y), eval(b, t, x, y));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                _ => a / b,
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, t, x, y);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Abs => a.abs(),
            }
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, position: usize, message: impl Into<String>) -> ExprError {
        ExprError { position, message: message.into(), source_text: self.text.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        match self.peek() {
            None => Err(self.err(self.pos, "unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err(self.pos, "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let begin = self.pos;
                while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
                    let mut k = self.pos + 1;
                    if k < self.bytes.len() && matches!(self.bytes[k], b'+' | b'-') {
                        k += 1;
                    }
                    if k < self.bytes.len() && self.bytes[k].is_ascii_digit() {
                        while k < self.bytes.len() && self.bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        self.pos = k;
                    }
                }
                let s = &self.text[begin..self.pos];
                s.parse().map(Node::Num).map_err(|_| self.err(begin, format!("invalid number `{s}`")))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let begin = self.pos;
                while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = &self.text[begin..self.pos];
                let func = match name {
                    "t" => return Ok(Node::T),
                    "x" => return Ok(Node::X),
                    "y" => return Ok(Node::Y),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "abs" => Func::Abs,
                    _ => return Err(self.err(begin, format!("unknown identifier `{name}`"))),
                };
                if self.peek() != Some(b'(') {
                    return Err(self.err(self.pos, format!("expected `(` after `{name}`")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err(self.pos, "expected `)`"));
                }
                self.pos += 1;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(c) => Err(self.err(start.max(self.pos), format!("unexpected character `{}`", c as char))),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { text, bytes: text.as_bytes(), pos: 0 };
        let root = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err(p.pos, "unexpected trailing input"));
        }
        Ok(Expr { source: text.to_string(), root })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Expr::constant(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, t: f64) -> f64 {
        s.parse::<Expr>().unwrap().eval(t, 0.3, -0.2)
    }

    #[test]
    fn pulsatile_inflow() {
        let e = "35*abs(sin(pi/0.15*t))";
        assert!((ev(e, 0.075) - 35.0).abs() < 1e-12);
        assert_eq!(ev(e, 0.0), 0.0);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("-(1 - 4) / 2", 0.0), 1.5);
        assert_eq!(ev("2*-x", 0.0), -0.6);
        assert_eq!(ev("1e-3*1.5E2", 0.0), 0.15);
        assert!((ev("x*y - cos(0)", 0.0) - (-0.06 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn errors_report_position() {
        let e = "1 + foo(t)".parse::<Expr>().unwrap_err();
        assert_eq!(e.position, 4);
        let e = "sin(t".parse::<Expr>().unwrap_err();
        assert_eq!(e.position, 5);
        assert!("2 3".parse::<Expr>().is_err());
        assert!("".parse::<Expr>().is_err());
    }
}
