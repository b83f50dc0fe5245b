//! Rate expressions: a small arithmetic language in one free variable.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ('^' factor)?
//! atom   := number | var | func '(' expr {',' expr} ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp`, `log`, `sqrt`, `pow`, `abs`, `min`, `max` and the
//! three-argument `if(cond, then, else)`. Comparisons (`==`, `<`, `<=`, `>`,
//! `>=`) may only appear as the condition of an `if`.

use std::fmt;

use thiserror::Error;

/// Errors raised while parsing an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at column {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

/// Errors raised while evaluating an expression.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("log of nonpositive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Pow,
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Exp | Func::Log | Func::Sqrt | Func::Abs => 1,
            Func::Pow | Func::Min | Func::Max => 2,
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    If {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_raw(&self, x: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval_raw(x)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval_raw(x)?, r.eval_raw(x)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                    BinOp::Pow => checked_pow(l, r)?,
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_raw(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::LogDomain(a));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtDomain(a));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Pow => checked_pow(a, args[1].eval_raw(x)?)?,
                    Func::Min => a.min(args[1].eval_raw(x)?),
                    Func::Max => a.max(args[1].eval_raw(x)?),
                }
            }
            Expr::If {
                op,
                lhs,
                rhs,
                then,
                otherwise,
            } => {
                if compare(*op, lhs.eval_raw(x)?, rhs.eval_raw(x)?) {
                    then.eval_raw(x)?
                } else {
                    otherwise.eval_raw(x)?
                }
            }
        })
    }

    /// Natural log of the value, computed structurally where possible so that
    /// rates like `exp(n)` stay usable far beyond the `f64` range.
    pub fn ln_eval(&self, x: f64) -> Result<f64, EvalError> {
        match self.ln_structural(x) {
            Some(Ok(v)) if !v.is_nan() => Ok(v),
            _ => self.ln_direct(x),
        }
    }

    fn ln_structural(&self, x: f64) -> Option<Result<f64, EvalError>> {
        let r = match self {
            Expr::Call(Func::Exp, args) => args[0].eval(x),
            Expr::Call(Func::Sqrt, args) => args[0].ln_eval(x).map(|v| 0.5 * v),
            Expr::Call(Func::Pow, args) => pow_ln(&args[0], &args[1], x),
            Expr::Bin(BinOp::Pow, b, e) => pow_ln(b, e, x),
            Expr::Bin(BinOp::Mul, l, r) => both(l, r, x).map(|(a, b)| a + b),
            Expr::Bin(BinOp::Div, l, r) => both(l, r, x).map(|(a, b)| a - b),
            Expr::Bin(BinOp::Add, l, r) => both(l, r, x).map(|(a, b)| log_add(a, b)),
            Expr::If {
                op,
                lhs,
                rhs,
                then,
                otherwise,
            } => match (lhs.eval(x), rhs.eval(x)) {
                (Ok(l), Ok(r)) => {
                    if compare(*op, l, r) {
                        then.ln_eval(x)
                    } else {
                        otherwise.ln_eval(x)
                    }
                }
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
            _ => return None,
        };
        Some(r)
    }

    fn ln_direct(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.eval(x)?;
        if v > 0.0 {
            Ok(v.ln())
        } else {
            Err(EvalError::LogDomain(v))
        }
    }

    /// True if the expression is the literal constant zero.
    pub fn is_zero_constant(&self) -> bool {
        match self {
            Expr::Num(c) => *c == 0.0,
            Expr::Neg(e) => e.is_zero_constant(),
            _ => false,
        }
    }
}

fn both(l: &Expr, r: &Expr, x: f64) -> Result<(f64, f64), EvalError> {
    Ok((l.ln_eval(x)?, r.ln_eval(x)?))
}

fn pow_ln(base: &Expr, exp: &Expr, x: f64) -> Result<f64, EvalError> {
    Ok(exp.eval(x)? * base.ln_eval(x)?)
}

fn checked_pow(base: f64, exp: f64) -> Result<f64, EvalError> {
    let v = if exp.fract() == 0.0 && exp.abs() <= 64.0 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    };
    if v.is_nan() {
        Err(EvalError::NonFinite)
    } else {
        Ok(v)
    }
}

fn compare(op: CmpOp, l: f64, r: f64) -> bool {
    match op {
        CmpOp::Eq => l == r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
    }
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

// Printing is fully parenthesized so that `parse(print(e)) == e`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {s} {r})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::If {
                op,
                lhs,
                rhs,
                then,
                otherwise,
            } => {
                let s = match op {
                    CmpOp::Eq => "==",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                write!(f, "if({lhs} {s} {rhs}, {then}, {otherwise})")
            }
        }
    }
}

/// A parsed expression together with its source text and variable name.
#[derive(Debug, Clone, PartialEq)]
pub struct RateExpression {
    ast: Expr,
    source: String,
    var: String,
}

impl RateExpression {
    /// Parses `text` with free variable `var` (`n` for chains, `x` for diffusions).
    pub fn parse(text: &str, var: &str) -> Result<Self, ParseError> {
        let ast = parse_expr(text, var)?;
        Ok(Self {
            ast,
            source: text.to_string(),
            var: var.to_string(),
        })
    }

    pub fn constant(c: f64, var: &str) -> Self {
        Self {
            ast: Expr::Num(c),
            source: format!("{c:?}"),
            var: var.to_string(),
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.ast.eval(x)
    }

    pub fn ln_eval(&self, x: f64) -> Result<f64, EvalError> {
        self.ast.ln_eval(x)
    }

    /// Canonical, fully parenthesized rendering using this expression's variable.
    pub fn canonical(&self) -> String {
        // `Display` writes the variable as `x`; substitute at the token level.
        let printed = self.ast.to_string();
        if self.var == "x" {
            return printed;
        }
        let mut out = String::with_capacity(printed.len());
        let bytes: Vec<char> = printed.chars().collect();
        for (i, &c) in bytes.iter().enumerate() {
            let prev_ident = i > 0 && (bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == '_');
            let next_ident = bytes
                .get(i + 1)
                .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_');
            if c == 'x' && !prev_ident && !next_ident {
                out.push_str(&self.var);
            } else {
                out.push(c);
            }
        }
        out
    }
}

impl fmt::Display for RateExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parses `text` into an expression tree whose only free variable is `var`.
pub fn parse_expr(text: &str, var: &str) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    if tokens.len() == 1 {
        return Err(ParseError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        var,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("unexpected trailing input")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Cmp(CmpOp),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            // exponent part, only if followed by digits
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let s: String = chars[i..j].iter().collect();
            let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("malformed number `{s}`"),
            })?;
            out.push((Tok::Num(v), start));
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            out.push((Tok::Ident(chars[i..j].iter().collect()), start));
            i = j;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('+' | '-' | '*' | '/' | '^', _) => (Tok::Op(c), 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn col(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Cmp(_) => "comparison outside `if` condition".to_string(),
            t => format!("{t:?}"),
        };
        ParseError::Syntax {
            pos: self.col(),
            msg: format!("{msg} (found {found})"),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // Unary minus binds looser than `^`, so `-2^2` is `-(2^2)`.
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        if !matches!(self.peek(), Tok::Num(_) | Tok::LParen | Tok::Ident(_)) {
            return Err(self.error("expected a number, variable, function or `(`"));
        }
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == self.var {
                    return Ok(Expr::Var);
                }
                if name == "if" {
                    return self.if_call();
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier { name, pos: col });
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != func.arity() {
                    return Err(ParseError::Arity {
                        name,
                        expected: func.arity(),
                        got: args.len(),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            _ => unreachable!("atom called on non-atom token"),
        }
    }

    fn if_call(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(` after `if`")?;
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.error("expected comparison in `if` condition")),
        };
        self.bump();
        let rhs = self.expr()?;
        let mut branches = Vec::new();
        while *self.peek() == Tok::Comma {
            self.bump();
            branches.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if branches.len() != 2 {
            return Err(ParseError::Arity {
                name: "if".into(),
                expected: 3,
                got: branches.len() + 1,
            });
        }
        let otherwise = branches.pop().unwrap();
        let then = branches.pop().unwrap();
        Ok(Expr::If {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, n: f64) -> f64 {
        RateExpression::parse(src, "n").unwrap().eval(n).unwrap()
    }

    #[test]
    fn basic_values() {
        assert_eq!(ev("n^2", 3.0), 9.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("if(n==0, 1, n^2)", 0.0), 1.0);
        assert_eq!(ev("if(n==0, 1, n^2)", 4.0), 16.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("min(n, 3) + max(n, 3)", 5.0), 8.0);
        assert_eq!(ev("pow(2, n) * abs(-1.5e0)", 3.0), 12.0);
        assert!((ev("exp(log(n)) + sqrt(n)", 4.0) - 6.0).abs() < 1e-12);
        assert_eq!(ev("1e-3 * 1000", 0.0), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_expr("n +", "n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("y + 1", "n"),
            Err(ParseError::UnknownIdentifier { pos: 1, .. })
        ));
        assert!(matches!(
            parse_expr("pow(n)", "n"),
            Err(ParseError::Arity { expected: 2, got: 1, .. })
        ));
        assert!(matches!(
            parse_expr("if(n < 1, 2)", "n"),
            Err(ParseError::Arity { expected: 3, .. })
        ));
        assert!(matches!(
            parse_expr("n < 1", "n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(parse_expr("", "n").is_err());
        assert!(parse_expr("(n", "n").is_err());
        assert!(parse_expr("n $ 2", "n").is_err());
    }

    #[test]
    fn domain_errors() {
        let e = RateExpression::parse("log(n)", "n").unwrap();
        assert_eq!(e.eval(0.0), Err(EvalError::LogDomain(0.0)));
        let e = RateExpression::parse("1/n", "n").unwrap();
        assert_eq!(e.eval(0.0), Err(EvalError::DivisionByZero));
        let e = RateExpression::parse("exp(n)", "n").unwrap();
        assert_eq!(e.eval(1000.0), Err(EvalError::NonFinite));
        assert_eq!(e.ln_eval(1000.0), Ok(1000.0));
    }

    #[test]
    fn log_domain_matches_direct() {
        for src in ["n^2", "2*n + 1", "exp(n)/(n+1)", "sqrt(n)*3", "pow(n, 1.5)+exp(n)"] {
            let e = RateExpression::parse(src, "n").unwrap();
            for n in [1.0, 2.0, 7.0, 30.0] {
                let direct = e.eval(n).unwrap().ln();
                let ln = e.ln_eval(n).unwrap();
                assert!((direct - ln).abs() < 1e-12 * direct.abs().max(1.0), "{src} at {n}");
            }
        }
        let e = RateExpression::parse("exp(n) + 1", "n").unwrap();
        assert!((e.ln_eval(2000.0).unwrap() - 2000.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_uses_variable_name() {
        let e = RateExpression::parse("exp(n)*n", "n").unwrap();
        assert_eq!(e.canonical(), "(exp(n) * n)");
        let again = RateExpression::parse(&e.canonical(), "n").unwrap();
        assert_eq!(again.ast(), e.ast());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            Just(Expr::Var),
            (1u32..100).prop_map(|k| Expr::Num(k as f64 * 0.125)),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Bin(op, Box::new(l), Box::new(r))),
                inner.clone().prop_map(|e| Expr::Call(Func::Exp, vec![e])),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Call(Func::Max, vec![a, b])),
                (inner.clone(), inner.clone(), inner.clone(), inner)
                    .prop_map(|(l, r, t, o)| Expr::If {
                        op: CmpOp::Le,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                        then: Box::new(t),
                        otherwise: Box::new(o),
                    }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let parsed = parse_expr(&printed, "x").unwrap();
            prop_assert_eq!(&parsed, &e);
            // and once more through text
            let reparsed = parse_expr(&parsed.to_string(), "x").unwrap();
            prop_assert_eq!(reparsed, parsed);
        }

        #[test]
        fn evaluation_is_pure(e in arb_expr(), x in -10.0f64..10.0) {
            let a = e.eval(x);
            let b = e.eval(x);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                _ => prop_assert!(false),
            }
        }
    }
}
