//! Expression front-end: parses `p^3 + 2*x*p + y`-style text into cubic ODEs
//! and rational functions. The canonical renderers on [`crate::algebra`] and
//! [`crate::webform`] types invert this grammar exactly.
//!
//! Grammar (whitespace insignificant, implicit multiplication rejected):
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' signed-integer)?
//! atom   := rational-literal | 'x' | 'y' | 'p' | '(' expr ')' | '-' factor
//! rational-literal := integer ('/' integer)?
//! ```
//! Negative exponents are accepted only on numeric literals and on
//! parenthesized denominator-free expressions; general Laurent input is
//! rejected so rational-function construction stays unambiguous.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{Poly2, Rat, RatFn};
use crate::webform::{CubicODE, WebError};

/// Variables the grammar knows about. `p` stands for dy/dx.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WebVar {
    X,
    Y,
    P,
}

/// Parsed expression tree. `Pow` exponents are integer literals by grammar.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Number(Rat),
    Var(WebVar),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i32),
    Neg(Box<ExprAst>),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("polynomial degree in p is {found}, at most 3 is supported")]
    Degree { found: usize },
    #[error("division by an expression containing p is not supported")]
    PInDenominator,
    #[error("division by zero in the expression")]
    DivisionByZero,
    #[error("negative power of an expression with a denominator (only numeric literals and denominator-free parenthesized expressions may carry negative exponents)")]
    NonPolynomialNegativePower,
    #[error("the variable p is not allowed here")]
    UnexpectedP,
    #[error(transparent)]
    Web(#[from] WebError),
}

/// Parses an expression string into an AST.
pub fn parse_expr(text: &str) -> Result<ExprAst, ParseError> {
    let mut cur = Cursor { src: text.as_bytes(), pos: 0 };
    let e = cur.expr(0)?;
    cur.skip_ws();
    if cur.pos < cur.src.len() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an implicit ODE expression (implicitly `= 0`) into a cubic ODE.
pub fn parse_ode(text: &str) -> Result<CubicODE, ParseError> {
    ast_to_ode(&parse_expr(text)?)
}

/// Collects the AST into p-coefficients K3..K0.
pub fn ast_to_ode(ast: &ExprAst) -> Result<CubicODE, ParseError> {
    let coeffs = eval_ast(ast)?;
    if coeffs.len() > 4 {
        return Err(ParseError::Degree { found: coeffs.len() - 1 });
    }
    let mut k = vec![RatFn::zero(); 4];
    k[..coeffs.len()].clone_from_slice(&coeffs);
    let [k0, k1, k2, k3] = <[RatFn; 4]>::try_from(k).expect("length fixed above");
    Ok(CubicODE::new(k3, k2, k1, k0)?)
}

/// Parses an expression in x and y only (vector-field components, loop data).
pub fn parse_xy_expr(text: &str) -> Result<RatFn, ParseError> {
    let coeffs = eval_ast(&parse_expr(text)?)?;
    match coeffs.len() {
        0 => Ok(RatFn::zero()),
        1 => Ok(coeffs.into_iter().next().expect("length checked")),
        _ => Err(ParseError::UnexpectedP),
    }
}

// Recursion depth cap: deeply nested input must error, not blow the stack.
const MAX_DEPTH: usize = 220;

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self, depth: usize) -> Result<ExprAst, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        let mut node = self.term(depth + 1)?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    let rhs = self.term(depth + 1)?;
                    node = ExprAst::Add(Box::new(node), Box::new(rhs));
                }
                b'-' => {
                    self.pos += 1;
                    let rhs = self.term(depth + 1)?;
                    node = ExprAst::Sub(Box::new(node), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self, depth: usize) -> Result<ExprAst, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        let mut node = self.factor(depth + 1)?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    let rhs = self.factor(depth + 1)?;
                    node = ExprAst::Mul(Box::new(node), Box::new(rhs));
                }
                b'/' => {
                    self.pos += 1;
                    let rhs = self.factor(depth + 1)?;
                    node = ExprAst::Div(Box::new(node), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn factor(&mut self, depth: usize) -> Result<ExprAst, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        let (atom, may_negate) = self.atom(depth + 1)?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp_offset = {
                self.skip_ws();
                self.pos
            };
            let n = self.signed_integer()?;
            if n < 0 && !may_negate {
                return Err(ParseError::Syntax {
                    offset: exp_offset,
                    message: "negative exponent requires a numeric literal or a \
                              parenthesized denominator-free expression"
                        .to_string(),
                });
            }
            return Ok(ExprAst::Pow(Box::new(atom), n));
        }
        Ok(atom)
    }

    /// Returns the atom and whether a negative exponent may attach to it
    /// (numeric literals and parenthesized groups qualify syntactically; the
    /// denominator-free condition is checked during evaluation).
    fn atom(&mut self, depth: usize) -> Result<(ExprAst, bool), ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok((inner, true))
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.factor(depth + 1)?;
                Ok((ExprAst::Neg(Box::new(inner)), false))
            }
            Some(c) if c.is_ascii_digit() => Ok((ExprAst::Number(self.rational_literal()?), true)),
            Some(b'x') => self.var(WebVar::X),
            Some(b'y') => self.var(WebVar::Y),
            Some(b'p') => self.var(WebVar::P),
            Some(c) if c.is_ascii_alphabetic() => Err(self.err("unknown symbol (only x, y, p)")),
            _ => Err(self.err("expected a number, variable, or '('")),
        }
    }

    fn var(&mut self, v: WebVar) -> Result<(ExprAst, bool), ParseError> {
        self.pos += 1;
        if let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() {
                self.pos -= 1;
                return Err(self.err("unknown symbol (only x, y, p); implicit multiplication is a syntax error"));
            }
        }
        Ok((ExprAst::Var(v), false))
    }

    fn rational_literal(&mut self) -> Result<Rat, ParseError> {
        let numer = self.integer_digits()?;
        // A '/' directly followed by another integer literal is part of the
        // literal; otherwise it is the division operator and stays unread.
        let save = self.pos;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            if self.peek().map_or(false, |c| c.is_ascii_digit()) {
                let denom = self.integer_digits()?;
                if denom.is_zero() {
                    return Err(self.err("zero denominator in numeric literal"));
                }
                return Ok(Rat::new(numer, denom));
            }
            self.pos = save;
        }
        Ok(Rat::from_integer(numer))
    }

    fn integer_digits(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        let digits = &self.src[start..self.pos];
        Ok(BigInt::parse_bytes(digits, 10).expect("digits are ASCII decimal"))
    }

    fn signed_integer(&mut self) -> Result<i32, ParseError> {
        let offset = {
            self.skip_ws();
            self.pos
        };
        let negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        if !self.peek().map_or(false, |c| c.is_ascii_digit()) {
            return Err(ParseError::NonIntegerExponent { offset });
        }
        let digits = self.integer_digits()?;
        let mag: i32 = digits
            .try_into()
            .map_err(|_| ParseError::Syntax { offset, message: "exponent out of range".into() })?;
        // Poly2's exponent cap catches growth later; this bound just keeps
        // i32 arithmetic safe for pathological input.
        if mag > 4096 {
            return Err(ParseError::Syntax { offset, message: "exponent out of range".into() });
        }
        Ok(if negative { -mag } else { mag })
    }
}

/// Dense polynomial in p with RatFn coefficients; index = power of p.
type PCoeffs = Vec<RatFn>;

fn trim(mut v: PCoeffs) -> PCoeffs {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

// Intermediate p-degrees beyond this indicate pathological input; realistic
// cubic-web expressions never exceed single digits even before cancellation.
const MAX_P_DEGREE: usize = 64;

fn eval_ast(ast: &ExprAst) -> Result<PCoeffs, ParseError> {
    match ast {
        ExprAst::Number(r) => Ok(trim(vec![RatFn::constant(r.clone())])),
        ExprAst::Var(WebVar::X) => Ok(vec![RatFn::from(Poly2::var_x())]),
        ExprAst::Var(WebVar::Y) => Ok(vec![RatFn::from(Poly2::var_y())]),
        ExprAst::Var(WebVar::P) => Ok(vec![RatFn::zero(), RatFn::one()]),
        ExprAst::Add(a, b) => Ok(trim(zip_with(eval_ast(a)?, eval_ast(b)?, |x, y| &x + &y))),
        ExprAst::Sub(a, b) => Ok(trim(zip_with(eval_ast(a)?, eval_ast(b)?, |x, y| &x - &y))),
        ExprAst::Mul(a, b) => mul(&eval_ast(a)?, &eval_ast(b)?),
        ExprAst::Div(a, b) => {
            let num = eval_ast(a)?;
            let den = eval_ast(b)?;
            if den.len() > 1 {
                return Err(ParseError::PInDenominator);
            }
            let d = den.into_iter().next().unwrap_or_else(RatFn::zero);
            if d.is_zero() {
                return Err(ParseError::DivisionByZero);
            }
            Ok(trim(num.into_iter().map(|c| &c / &d).collect()))
        }
        ExprAst::Pow(base, n) => {
            let b = eval_ast(base)?;
            if *n >= 0 {
                let mut acc = vec![RatFn::one()];
                for _ in 0..*n {
                    acc = mul(&acc, &b)?;
                }
                Ok(acc)
            } else {
                if b.len() > 1 {
                    return Err(ParseError::PInDenominator);
                }
                let c = b.into_iter().next().unwrap_or_else(RatFn::zero);
                if c.is_zero() {
                    return Err(ParseError::DivisionByZero);
                }
                if !c.is_polynomial() && c.num().constant_value().is_none() {
                    return Err(ParseError::NonPolynomialNegativePower);
                }
                let p = c.pow(*n).map_err(|_| ParseError::DivisionByZero)?;
                Ok(vec![p])
            }
        }
        ExprAst::Neg(a) => Ok(eval_ast(a)?.into_iter().map(|c| -c).collect()),
    }
}

fn zip_with(a: PCoeffs, b: PCoeffs, f: impl Fn(RatFn, RatFn) -> RatFn) -> PCoeffs {
    let n = a.len().max(b.len());
    let pad = |mut v: PCoeffs| {
        v.resize(n, RatFn::zero());
        v
    };
    pad(a).into_iter().zip(pad(b)).map(|(x, y)| f(x, y)).collect()
}

fn mul(a: &PCoeffs, b: &PCoeffs) -> Result<PCoeffs, ParseError> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let deg = a.len() + b.len() - 2;
    if deg > MAX_P_DEGREE {
        return Err(ParseError::Degree { found: deg });
    }
    let mut out = vec![RatFn::zero(); deg + 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(ca * cb);
        }
    }
    Ok(trim(out))
}
