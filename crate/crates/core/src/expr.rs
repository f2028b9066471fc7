//! Expression layer: a small grammar for Milnor-Witt K-theory elements
//! (integer scalars, eta, eps, h, symbols [e], rank-one forms <e>, sums and
//! products), field descriptors like GF(5)(t), field elements as
//! polynomial fractions, places, and twists. Errors carry byte positions.

use crate::fields::{FieldDesc, FieldElem, Fq, Place};
use crate::kmw::{KmwElem, KmwTwisted};
use crate::vlines::{LineName, Summand, VirtualBundle};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("parse error at {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

type PResult<T> = Result<T, ParseError>;

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Eta,
    Eps,
    Hyper,
    Symbol(FExpr, usize),
    GwUnit(FExpr, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FExpr {
    Int(i64),
    Var,
    Neg(Box<FExpr>),
    Add(Box<FExpr>, Box<FExpr>),
    Sub(Box<FExpr>, Box<FExpr>),
    Mul(Box<FExpr>, Box<FExpr>),
    Div(Box<FExpr>, Box<FExpr>),
    Pow(Box<FExpr>, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TwistAtom {
    Omega,
    A1,
    Tangent,
    Normal(String),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TwistExpr {
    pub parts: Vec<(i64, TwistAtom)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedExpr {
    pub expr: Expr,
    pub field: FieldDesc,
    pub twist: TwistExpr,
}

// ---------------------------------------------------------------------------
// Lexer-free recursive descent
// ---------------------------------------------------------------------------

pub struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Parser<'a> {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
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

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        let bytes = w.as_bytes();
        if self.src[self.pos..].starts_with(bytes) {
            let after = self.pos + bytes.len();
            let boundary = self
                .src
                .get(after)
                .map(|c| !c.is_ascii_alphanumeric())
                .unwrap_or(true);
            if boundary {
                self.pos = after;
                return true;
            }
        }
        false
    }

    fn integer(&mut self) -> PResult<i64> {
        self.skip_ws();
        let start = self.pos;
        let mut neg = false;
        if self.eat(b'-') {
            neg = true;
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return self.err("expected an integer");
        }
        let s = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let v: i64 = s.parse().map_err(|_| ParseError {
            pos: start,
            msg: "integer out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    // --- field descriptors ---

    pub fn field_desc(&mut self) -> PResult<FieldDesc> {
        if !self.eat_word("GF") {
            return self.err("expected GF(...)");
        }
        self.expect(b'(')?;
        let q = self.integer()?;
        self.expect(b')')?;
        if q < 3 {
            return self.err("field order must be an odd prime power >= 3");
        }
        let (p, deg) = split_prime_power(q as u64)
            .ok_or(ParseError { pos: self.pos, msg: "not a prime power".into() })?;
        if p == 2 {
            return self.err("characteristic two is not supported");
        }
        if self.eat(b'(') {
            self.skip_ws();
            if !self.eat(b't') {
                return self.err("expected the variable t");
            }
            self.expect(b')')?;
            Ok(FieldDesc::RatFunc(Fq::new(p, deg), 't'))
        } else {
            Ok(FieldDesc::Finite(Fq::new(p, deg)))
        }
    }

    // --- field elements ---

    pub fn field_expr(&mut self) -> PResult<FExpr> {
        let mut acc = self.field_term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.field_term()?;
                acc = FExpr::Add(Box::new(acc), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.field_term()?;
                acc = FExpr::Sub(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn field_term(&mut self) -> PResult<FExpr> {
        let mut acc = self.field_pow()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.field_pow()?;
                acc = FExpr::Mul(Box::new(acc), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.field_pow()?;
                acc = FExpr::Div(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn field_pow(&mut self) -> PResult<FExpr> {
        let base = self.field_atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            Ok(FExpr::Pow(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn field_atom(&mut self) -> PResult<FExpr> {
        match self.peek() {
            Some(b'(') => {
                self.expect(b'(')?;
                let inner = self.field_expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(FExpr::Var)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.field_atom()?;
                Ok(FExpr::Neg(Box::new(inner)))
            }
            Some(c) if c.is_ascii_digit() => Ok(FExpr::Int(self.integer()?)),
            _ => self.err("expected a field element"),
        }
    }

    // --- K^MW expressions ---

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = Expr::Add(Box::new(acc), Box::new(rhs));
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                let rhs = self.term()?;
                acc = Expr::Add(Box::new(acc), Box::new(Expr::Neg(Box::new(rhs))));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = Expr::Mul(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        self.skip_ws();
        if self.eat_word("eta") {
            return self.maybe_pow(Expr::Eta);
        }
        if self.eat_word("eps") {
            return self.maybe_pow(Expr::Eps);
        }
        if self.eat_word("h") {
            return Ok(Expr::Hyper);
        }
        match self.peek() {
            Some(b'[') => {
                let pos = self.pos;
                self.expect(b'[')?;
                let inner = self.field_expr()?;
                self.expect(b']')?;
                Ok(Expr::Symbol(inner, pos))
            }
            Some(b'<') => {
                let pos = self.pos;
                self.expect(b'<')?;
                let inner = self.field_expr()?;
                self.expect(b'>')?;
                Ok(Expr::GwUnit(inner, pos))
            }
            Some(b'(') => {
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.factor()?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Int(self.integer()?)),
            _ => self.err("expected a term"),
        }
    }

    fn maybe_pow(&mut self, base: Expr) -> PResult<Expr> {
        if self.eat(b'^') {
            let e = self.integer()?;
            if e < 0 {
                return self.err("negative powers are not defined here");
            }
            let mut acc = Expr::Int(1);
            for _ in 0..e {
                acc = Expr::Mul(Box::new(acc), Box::new(base.clone()));
            }
            Ok(acc)
        } else {
            Ok(base)
        }
    }

    // --- twists ---

    pub fn twist(&mut self) -> PResult<TwistExpr> {
        self.skip_ws();
        if self.peek() == Some(b'0') {
            let save = self.pos;
            self.pos += 1;
            let boundary = match self.peek() {
                None => true,
                Some(c) => c == b')' || c == b',',
            };
            if boundary {
                return Ok(TwistExpr::default());
            }
            self.pos = save;
        }
        let mut parts = vec![];
        let mut sign = 1i64;
        loop {
            self.skip_ws();
            if self.eat(b'-') {
                sign = -sign;
            }
            let mut coeff = sign;
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                coeff = sign * self.integer()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                }
            }
            let atom = self.twist_atom()?;
            parts.push((coeff, atom));
            if self.eat(b'+') {
                sign = 1;
            } else if self.eat(b'-') {
                sign = -1;
            } else {
                return Ok(TwistExpr { parts });
            }
        }
    }

    fn twist_atom(&mut self) -> PResult<TwistAtom> {
        if self.eat_word("omega") {
            return Ok(TwistAtom::Omega);
        }
        if self.eat_word("A1") {
            return Ok(TwistAtom::A1);
        }
        if self.eat_word("T") {
            return Ok(TwistAtom::Tangent);
        }
        if self.eat_word("N") {
            self.expect(b'(')?;
            let start = self.pos;
            let mut depth = 1;
            while self.pos < self.src.len() && depth > 0 {
                match self.src[self.pos] {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    _ => {}
                }
                self.pos += 1;
            }
            if depth != 0 {
                return self.err("unbalanced N(...)");
            }
            let inner =
                std::str::from_utf8(&self.src[start..self.pos - 1]).unwrap().to_string();
            return Ok(TwistAtom::Normal(inner));
        }
        self.err("expected a twist atom (omega, A1, T, N(...))")
    }

    /// "-" or "A1" etc, optionally preceded by nothing: full typed element:
    /// `expr in KMW(field, twist)`.
    pub fn typed_expr(&mut self) -> PResult<TypedExpr> {
        let expr = self.expr()?;
        if !self.eat_word("in") {
            return self.err("expected 'in KMW(field, twist)'");
        }
        if !self.eat_word("KMW") {
            return self.err("expected KMW(...)");
        }
        self.expect(b'(')?;
        let field = self.field_desc()?;
        self.expect(b',')?;
        let twist = self.twist()?;
        self.expect(b')')?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input");
        }
        Ok(TypedExpr { expr, field, twist })
    }

    pub fn finished(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

pub fn split_prime_power(q: u64) -> Option<(u64, u32)> {
    for p in 2..=q {
        if q % p == 0 {
            // p is the smallest prime factor
            let mut deg = 0;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                deg += 1;
            }
            return if m == 1 { Some((p, deg)) } else { None };
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("semantic error at {pos}: {msg}")]
    Semantic { pos: usize, msg: String },
    #[error(transparent)]
    Kmw(#[from] crate::kmw::KmwError),
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
}

pub fn eval_field_expr(f: &FExpr, field: &FieldDesc) -> Result<FieldElem, EvalError> {
    Ok(match f {
        FExpr::Int(n) => field.from_i64(*n),
        FExpr::Var => match field {
            FieldDesc::RatFunc(..) => field.gen_t(),
            FieldDesc::Finite(_) => {
                return Err(EvalError::Semantic {
                    pos: 0,
                    msg: "the variable t needs a function field".into(),
                })
            }
        },
        FExpr::Neg(a) => eval_field_expr(a, field)?.neg(),
        FExpr::Add(a, b) => eval_field_expr(a, field)?.add(&eval_field_expr(b, field)?),
        FExpr::Sub(a, b) => eval_field_expr(a, field)?.sub(&eval_field_expr(b, field)?),
        FExpr::Mul(a, b) => eval_field_expr(a, field)?.mul(&eval_field_expr(b, field)?),
        FExpr::Div(a, b) => {
            let d = eval_field_expr(b, field)?;
            if d.is_zero() {
                return Err(EvalError::Semantic { pos: 0, msg: "division by zero".into() });
            }
            eval_field_expr(a, field)?.div(&d)
        }
        FExpr::Pow(a, e) => eval_field_expr(a, field)?.pow(*e),
    })
}

pub fn eval_expr(e: &Expr, field: &FieldDesc) -> Result<KmwElem, EvalError> {
    Ok(match e {
        Expr::Int(n) => KmwElem::from_int(*field, *n),
        Expr::Eta => KmwElem::eta(*field),
        Expr::Eps => KmwElem::eps(*field),
        Expr::Hyper => KmwElem::hyperbolic(*field),
        Expr::Symbol(f, pos) => {
            let a = eval_field_expr(f, field)?;
            if a.is_zero() {
                return Err(EvalError::Semantic {
                    pos: *pos,
                    msg: "symbol entries must be nonzero".into(),
                });
            }
            KmwElem::symbol(&a)?
        }
        Expr::GwUnit(f, pos) => {
            let a = eval_field_expr(f, field)?;
            if a.is_zero() {
                return Err(EvalError::Semantic {
                    pos: *pos,
                    msg: "form entries must be nonzero".into(),
                });
            }
            KmwElem::gw_unit(&a)?
        }
        Expr::Neg(a) => eval_expr(a, field)?.negate(),
        Expr::Add(a, b) => {
            let x = eval_expr(a, field)?;
            let y = eval_expr(b, field)?;
            if x.degree != y.degree {
                return Err(EvalError::Semantic {
                    pos: 0,
                    msg: format!(
                        "cannot add degrees {} and {}",
                        x.degree, y.degree
                    ),
                });
            }
            x.add(&y)
        }
        Expr::Mul(a, b) => eval_expr(a, field)?.mul(&eval_expr(b, field)?)?,
    })
}

pub fn eval_twist(t: &TwistExpr, field: &FieldDesc) -> Result<VirtualBundle, EvalError> {
    let mut v = VirtualBundle::zero(*field);
    for (coeff, atom) in &t.parts {
        let line = match atom {
            TwistAtom::A1 => LineName::Std,
            TwistAtom::Omega => {
                if !matches!(field, FieldDesc::RatFunc(..)) {
                    // rank zero over finite fields
                    continue;
                }
                LineName::Omega(*field)
            }
            TwistAtom::Tangent => LineName::Std,
            TwistAtom::Normal(spec) => {
                let place = parse_place(spec, field)?;
                LineName::Normal(place)
            }
        };
        // Tangent twists are dual lines
        let (dual_base, invert) = match atom {
            TwistAtom::Tangent => (true, true),
            _ => (false, false),
        };
        let _ = invert;
        let neg = *coeff < 0;
        let s = Summand { line, dual: neg ^ dual_base, neg };
        for _ in 0..coeff.unsigned_abs() {
            v.summands.push(s.clone());
        }
    }
    Ok(v)
}

pub fn parse_place(spec: &str, field: &FieldDesc) -> Result<Place, EvalError> {
    let FieldDesc::RatFunc(..) = field else {
        return Err(EvalError::Semantic { pos: 0, msg: "places need GF(q)(t)".into() });
    };
    let trimmed = spec.trim();
    if trimmed == "inf" || trimmed == "infinity" {
        return Ok(Place::infinity(*field));
    }
    let mut p = Parser::new(trimmed);
    let fe = p.field_expr()?;
    p.finished()?;
    let el = eval_field_expr(&fe, field)?;
    let r = el.as_rat();
    if !r.den.is_constant() {
        return Err(EvalError::Semantic { pos: 0, msg: "place needs a polynomial".into() });
    }
    let ctx = field.ctx();
    let (_, monic) = r.num.monic(&ctx);
    Place::finite(*field, monic).map_err(EvalError::Field)
}

pub fn eval_typed(t: &TypedExpr) -> Result<KmwTwisted, EvalError> {
    let raw = eval_expr(&t.expr, &t.field)?;
    let twist = eval_twist(&t.twist, &t.field)?;
    if raw.degree != twist.rank() {
        return Err(EvalError::Semantic {
            pos: 0,
            msg: format!(
                "element degree {} does not match twist rank {}",
                raw.degree,
                twist.rank()
            ),
        });
    }
    Ok(KmwTwisted::new(raw, twist)?)
}

// ---------------------------------------------------------------------------
// Printing (canonical form round-trips through the parser)
// ---------------------------------------------------------------------------

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Eta => "eta".into(),
        Expr::Eps => "eps".into(),
        Expr::Hyper => "h".into(),
        Expr::Symbol(f, _) => format!("[{}]", print_fexpr(f)),
        Expr::GwUnit(f, _) => format!("<{}>", print_fexpr(f)),
        Expr::Neg(a) => format!("-{}", print_atomic(a)),
        Expr::Add(a, b) => format!("{}+{}", print_expr(a), print_expr(b)),
        Expr::Mul(a, b) => format!("{}*{}", print_atomic(a), print_atomic(b)),
    }
}

fn print_atomic(e: &Expr) -> String {
    match e {
        Expr::Add(..) | Expr::Neg(..) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

pub fn print_fexpr(f: &FExpr) -> String {
    match f {
        FExpr::Int(n) => n.to_string(),
        FExpr::Var => "t".into(),
        FExpr::Neg(a) => format!("-{}", print_fatomic(a)),
        FExpr::Add(a, b) => format!("{}+{}", print_fexpr(a), print_fexpr(b)),
        FExpr::Sub(a, b) => format!("{}-{}", print_fexpr(a), print_fatomic(b)),
        FExpr::Mul(a, b) => format!("{}*{}", print_fatomic(a), print_fatomic(b)),
        FExpr::Div(a, b) => format!("{}/{}", print_fatomic(a), print_fatomic(b)),
        FExpr::Pow(a, e) => format!("{}^{}", print_fatomic(a), e),
    }
}

fn print_fatomic(f: &FExpr) -> String {
    match f {
        FExpr::Add(..) | FExpr::Sub(..) | FExpr::Neg(..) => format!("({})", print_fexpr(f)),
        _ => print_fexpr(f),
    }
}

/// Structural equality that ignores source positions.
pub fn exprs_alpha_equal(a: &Expr, b: &Expr) -> bool {
    use Expr::*;
    match (a, b) {
        (Int(x), Int(y)) => x == y,
        (Eta, Eta) | (Eps, Eps) | (Hyper, Hyper) => true,
        (Symbol(x, _), Symbol(y, _)) | (GwUnit(x, _), GwUnit(y, _)) => x == y,
        (Neg(x), Neg(y)) => exprs_alpha_equal(x, y),
        (Add(x1, x2), Add(y1, y2)) | (Mul(x1, x2), Mul(y1, y2)) => {
            exprs_alpha_equal(x1, y1) && exprs_alpha_equal(x2, y2)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_defining_relation_examples() {
        let t = Parser::new("eta*(eta*[-1]+2) in KMW(GF(5),-A1)")
            .typed_expr()
            .unwrap();
        let v = eval_typed(&t).unwrap();
        assert!(v.raw.is_zero().unwrap());

        let t = Parser::new("[2]*[1-2] in KMW(GF(7),2*A1)").typed_expr().unwrap();
        let v = eval_typed(&t).unwrap();
        assert!(v.raw.is_zero().unwrap());
    }

    #[test]
    fn parse_function_field_elements() {
        let mut p = Parser::new("(t^2+1)/(t+3)");
        let fe = p.field_expr().unwrap();
        p.finished().unwrap();
        let f = FieldDesc::rational(5, 1);
        let v = eval_field_expr(&fe, &f).unwrap();
        assert!(!v.is_zero());
    }

    #[test]
    fn zero_symbol_is_semantic_error() {
        let t = Parser::new("[0] in KMW(GF(5),A1)").typed_expr().unwrap();
        let e = eval_typed(&t);
        assert!(matches!(e, Err(EvalError::Semantic { .. })));
    }

    #[test]
    fn degree_twist_mismatch_rejected() {
        let t = Parser::new("[2] in KMW(GF(5),2*A1)").typed_expr().unwrap();
        assert!(eval_typed(&t).is_err());
    }

    #[test]
    fn position_in_errors() {
        let r = Parser::new("[2*] in KMW(GF(5),A1)").typed_expr();
        let e = r.unwrap_err();
        assert!(e.pos > 0);
    }

    #[test]
    fn print_parse_round_trip() {
        let cases = [
            "eta*[2]+3",
            "[t]*[t+1]",
            "<2>*eta",
            "h+eps",
            "-[2]",
            "2*eta*[-1]+4",
            "[(t^2+1)/(t+3)]",
        ];
        for c in cases {
            let mut p = Parser::new(c);
            let e = p.expr().unwrap();
            p.finished().unwrap();
            let printed = print_expr(&e);
            let mut p2 = Parser::new(&printed);
            let e2 = p2.expr().unwrap();
            p2.finished().unwrap();
            assert!(
                exprs_alpha_equal(&e, &e2),
                "round trip failed: {c} -> {printed}"
            );
            // canonical prints are fixed points
            assert_eq!(printed, print_expr(&e2));
        }
    }

    #[test]
    fn twist_parsing() {
        let f = FieldDesc::rational(5, 1);
        let mut p = Parser::new("omega+2*A1");
        let t = p.twist().unwrap();
        let v = eval_twist(&t, &f).unwrap();
        assert_eq!(v.rank(), 3);
        let mut p = Parser::new("-A1");
        let t = p.twist().unwrap();
        assert_eq!(eval_twist(&t, &f).unwrap().rank(), -1);
        let mut p = Parser::new("N(t)");
        let t = p.twist().unwrap();
        assert_eq!(eval_twist(&t, &f).unwrap().rank(), 1);
    }
}
