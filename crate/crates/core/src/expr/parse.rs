//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" integer)?
//! base   := identifier | number | "(" expr ")" | "-" base
//! number := integer ("/" integer)?
//! ```
//!
//! `number` with a slash is read as a division of two factors, which has
//! the same value.

use std::collections::HashSet;

use num_bigint::BigInt;

use super::poly::Q;
use super::ratfun::Expr;
use super::symbol::Symbol;
use crate::error::ExprError;

/// Syntax tree produced by the parser before normalisation.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Var(Symbol),
    Num(BigInt),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
}

impl Node {
    /// Evaluates the tree into a normalised expression.
    pub fn to_expr(&self) -> Result<Expr, ExprError> {
        Ok(match self {
            Node::Var(s) => Expr::var(s.clone()),
            Node::Num(n) => Expr::rational(Q::from_integer(n.clone())),
            Node::Neg(a) => -a.to_expr()?,
            Node::Add(a, b) => a.to_expr()? + b.to_expr()?,
            Node::Sub(a, b) => a.to_expr()? - b.to_expr()?,
            Node::Mul(a, b) => a.to_expr()? * b.to_expr()?,
            Node::Div(a, b) => {
                let d = b.to_expr()?;
                a.to_expr()?.checked_div(&d).ok_or(ExprError::DivisionByZero)?
            }
            Node::Pow(a, e) => a.to_expr()?.pow(*e as i32),
        })
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    allowed: Option<&'a HashSet<&'a str>>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        // unary minus binds looser than `^`: -x^2 = -(x^2)
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let n = self.integer()?;
            let e: u32 = u32::try_from(n).map_err(|_| self.err("exponent out of range"))?;
            return Ok(Node::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digits parse"))
    }

    fn base(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Node::Num(self.integer()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
                if let Some(allowed) = self.allowed {
                    if !allowed.contains(name) {
                        return Err(ExprError::UnknownIdentifier(name.to_string()));
                    }
                }
                Ok(Node::Var(Symbol::new(name)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses `text` into a syntax tree. With `allowed = None` any identifier
/// is accepted.
pub fn parse_ast(text: &str, allowed: Option<&[Symbol]>) -> Result<Node, ExprError> {
    let set: Option<HashSet<&str>> = allowed.map(|a| a.iter().map(|s| s.as_str()).collect());
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        allowed: set.as_ref(),
    };
    let node = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(node)
}

/// Parses and normalises an expression; every identifier must be in
/// `allowed_vars`.
pub fn parse(text: &str, allowed_vars: &[Symbol]) -> Result<Expr, ExprError> {
    parse_ast(text, Some(allowed_vars))?.to_expr()
}

/// Parses without restricting identifiers.
pub fn parse_free(text: &str) -> Result<Expr, ExprError> {
    parse_ast(text, None)?.to_expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::symbols;

    fn vars() -> Vec<Symbol> {
        symbols(&["x1", "x2", "x3", "x4", "x5", "u1", "u2"])
    }

    #[test]
    fn product_tree() {
        let ast = parse_ast("x2*(u1+1)", Some(&vars())).unwrap();
        assert_eq!(
            ast,
            Node::Mul(
                Box::new(Node::Var(Symbol::new("x2"))),
                Box::new(Node::Add(
                    Box::new(Node::Var(Symbol::new("u1"))),
                    Box::new(Node::Num(1.into()))
                ))
            )
        );
    }

    #[test]
    fn running_example_fourth_component() {
        let e = parse("x5 + 1 - x1*(u1+1)/(x2+1)", &vars()).unwrap();
        let x = |n: &str| Expr::var(n);
        let expected = &(&x("x5") + &Expr::one())
            - &(&(&x("x1") * &(&x("u1") + &Expr::one())) / &(&x("x2") + &Expr::one()));
        assert_eq!(e, expected);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("x9", &symbols(&["x1"])).unwrap_err();
        assert_eq!(err, ExprError::UnknownIdentifier("x9".into()));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse("x1 + * 2", &symbols(&["x1"])) {
            Err(ExprError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x1", &symbols(&["x1"])), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x1 x1", &symbols(&["x1"])), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn rational_numbers_and_powers() {
        let e = parse("1/2*x1^3 - -x1", &symbols(&["x1"])).unwrap();
        let x = Expr::var("x1");
        assert_eq!(e, &(&Expr::frac(1, 2) * &x.pow(3)) + &x);
    }

    #[test]
    fn unary_minus_below_power() {
        let x = Expr::var(Symbol::new("x1"));
        assert_eq!(parse_free("-x1^2").unwrap(), -(&x * &x));
        assert_eq!(parse_free("(-x1)^2").unwrap(), &x * &x);
        assert_eq!(parse_free("2*-x1").unwrap(), &Expr::int(-2) * &x);
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(parse("x1/(x1-x1)", &symbols(&["x1"])), Err(ExprError::DivisionByZero));
    }
}
