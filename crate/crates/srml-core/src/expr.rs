//! Evaluation of rule expressions.
//!
//! An expression computes the *expected* value of a rule target. Values are
//! strings, numbers or booleans; comparisons walk a coercion ladder (numeric
//! if both sides parse as decimals, boolean if both sides are boolean-ish,
//! exact string comparison otherwise), so `"0090"` equals `"90"` but
//! `"hardcover"` only equals itself.
//!
//! `reg-eval` templates are arithmetic formulas over `#(path)` placeholders,
//! e.g. `#(../qty)*#(../price)*(1-#(../discount)/100)`; they are parsed once
//! into an AST and evaluated in `f64`.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::path::{self, NavigationError, PathExpr, PathValue};
use crate::xml::{Document, NodeId};

/// Comparison / combination operators of the rule language.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Equal,
    NotEqual,
    Less,
    LessOrEqual,
    Greater,
    GreaterOrEqual,
    And,
    Or,
}

impl BinaryOp {
    /// The element name used in rule documents.
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Equal => "equal",
            BinaryOp::NotEqual => "not-equal",
            BinaryOp::Less => "less",
            BinaryOp::LessOrEqual => "less-equal",
            BinaryOp::Greater => "greater",
            BinaryOp::GreaterOrEqual => "greater-equal",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn from_name(name: &str) -> Option<BinaryOp> {
        Some(match name {
            "equal" => BinaryOp::Equal,
            "not-equal" => BinaryOp::NotEqual,
            "less" => BinaryOp::Less,
            "less-equal" => BinaryOp::LessOrEqual,
            "greater" => BinaryOp::Greater,
            "greater-equal" => BinaryOp::GreaterOrEqual,
            "and" => BinaryOp::And,
            "or" => BinaryOp::Or,
            _ => return None,
        })
    }
}

/// Abstract syntax of a rule expression.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    /// A literal.
    Data(String),
    /// The value found at a path (first match), relative to the context node.
    ValueRef(PathExpr),
    /// The current value of the rule target.
    InstanceValue,
    /// Number of direct child elements of the context node with a name.
    CountChildren(String),
    Binary {
        op: BinaryOp,
        lhs: Box<ExprAst>,
        rhs: Box<ExprAst>,
    },
    If {
        condition: Box<ExprAst>,
        then: Box<ExprAst>,
        otherwise: Box<ExprAst>,
    },
    /// An arithmetic template; the source text is kept for printing.
    RegEval {
        template: String,
        ast: ArithExpr,
    },
}

/// Arithmetic template AST (`reg-eval`).
#[derive(Clone, Debug, PartialEq)]
pub enum ArithExpr {
    Number(f64),
    Placeholder(PathExpr),
    Neg(Box<ArithExpr>),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Sub(Box<ArithExpr>, Box<ArithExpr>),
    Mul(Box<ArithExpr>, Box<ArithExpr>),
    Div(Box<ArithExpr>, Box<ArithExpr>),
}

/// A computed value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Str(String),
    Num(f64),
    Bool(bool),
}

/// How numbers are rendered into documents and reports.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NumberStyle {
    /// Shortest round-tripping decimal form: `90`, `121.5`.
    Minimal,
    /// Integer-valued numbers keep one decimal: `1125.0`. Used for values
    /// that originate from relational columns.
    OneDecimal,
}

impl Value {
    /// The string form used for comparisons and document writes.
    pub fn render(&self, style: NumberStyle) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Bool(b) => if *b { "true" } else { "false" }.to_owned(),
            Value::Num(x) => render_number(*x, style),
        }
    }
}

pub fn render_number(x: f64, style: NumberStyle) -> String {
    match style {
        NumberStyle::Minimal => format!("{x}"),
        NumberStyle::OneDecimal => {
            if x.is_finite() && x == ((x as i64) as f64) {
                format!("{x:.1}")
            } else {
                format!("{x}")
            }
        }
    }
}

/// Everything an expression can see while it evaluates.
pub struct EvalContext<'a> {
    pub doc: &'a Document,
    /// The element the rule was applied to (paths are relative to it).
    pub node: NodeId,
    /// Current value of the rule target.
    pub instance_value: &'a str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    /// Parent navigation from the root.
    Navigation(NavigationError),
    /// A value reference or placeholder matched nothing.
    UnresolvedPath(String),
    /// A value had the wrong type for its context.
    Type(String),
    /// Division by zero or a non-finite intermediate result.
    Arithmetic(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Navigation(err) => err.fmt(f),
            EvalError::UnresolvedPath(path) => write!(f, "path '{path}' matched nothing"),
            EvalError::Type(msg) => f.write_str(msg),
            EvalError::Arithmetic(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<NavigationError> for EvalError {
    fn from(err: NavigationError) -> EvalError {
        EvalError::Navigation(err)
    }
}

/// Strict decimal syntax: optional sign, digits with an optional fraction.
/// No exponents, no infinities, no surrounding whitespace.
pub fn parse_decimal(s: &str) -> Option<f64> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let ok = match frac_part {
        Some(frac) => digits(int_part) && digits(frac) || int_part.is_empty() && digits(frac)
            || digits(int_part) && frac.is_empty(),
        None => digits(int_part),
    };
    if !ok {
        return None;
    }
    s.parse::<f64>().ok()
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

/// Numeric equality with relative tolerance `1e-9 · max(1, |a|, |b|)`.
pub fn numbers_equal(a: f64, b: f64) -> bool {
    fabs(a - b) <= 1e-9 * fmax(1.0, fmax(fabs(a), fabs(b)))
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Num(x) => Some(*x),
        Value::Str(s) => parse_decimal(s),
        Value::Bool(_) => None,
    }
}

fn as_boolish(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Str(s) => match s.as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        },
        Value::Num(_) => None,
    }
}

/// Boolean coercion for `and` / `or` / `if-expr` conditions. Numbers are a
/// type error; only `true` / `false` strings coerce.
pub fn coerce_bool(v: &Value) -> Result<bool, EvalError> {
    as_boolish(v).ok_or_else(|| {
        EvalError::Type(format!(
            "expected a boolean, got '{}'",
            v.render(NumberStyle::Minimal)
        ))
    })
}

/// The coercion ladder: numeric comparison when both sides are numeric,
/// boolean comparison when both are boolean-ish, exact strings otherwise.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    if let (Some(x), Some(y)) = (as_number(a), as_number(b)) {
        return numbers_equal(x, y);
    }
    if let (Some(x), Some(y)) = (as_boolish(a), as_boolish(b)) {
        return x == y;
    }
    a.render(NumberStyle::Minimal) == b.render(NumberStyle::Minimal)
}

fn compare_order(a: &Value, b: &Value) -> core::cmp::Ordering {
    if let (Some(x), Some(y)) = (as_number(a), as_number(b)) {
        return x.partial_cmp(&y).unwrap_or(core::cmp::Ordering::Equal);
    }
    a.render(NumberStyle::Minimal)
        .cmp(&b.render(NumberStyle::Minimal))
}

/// Evaluates an expression. Pure: neither the document nor the context is
/// modified, and equal inputs give equal results.
pub fn eval(expr: &ExprAst, ctx: &EvalContext<'_>) -> Result<Value, EvalError> {
    match expr {
        ExprAst::Data(text) => Ok(Value::Str(text.clone())),
        ExprAst::InstanceValue => Ok(Value::Str(ctx.instance_value.to_owned())),
        ExprAst::ValueRef(path) => Ok(Value::Str(resolve_first(path, ctx)?)),
        ExprAst::CountChildren(name) => {
            let count = ctx
                .doc
                .child_elements(ctx.node)
                .filter(|&c| ctx.doc.name(c) == Some(name.as_str()))
                .count();
            Ok(Value::Num(count as f64))
        }
        ExprAst::Binary { op, lhs, rhs } => eval_binary(*op, lhs, rhs, ctx),
        ExprAst::If {
            condition,
            then,
            otherwise,
        } => {
            if coerce_bool(&eval(condition, ctx)?)? {
                eval(then, ctx)
            } else {
                eval(otherwise, ctx)
            }
        }
        ExprAst::RegEval { ast, .. } => Ok(Value::Num(eval_template(ast, ctx)?)),
    }
}

fn eval_binary(
    op: BinaryOp,
    lhs: &ExprAst,
    rhs: &ExprAst,
    ctx: &EvalContext<'_>,
) -> Result<Value, EvalError> {
    use core::cmp::Ordering;
    match op {
        // `and` / `or` short-circuit: the right side is not evaluated when
        // the left side decides the result.
        BinaryOp::And => {
            if !coerce_bool(&eval(lhs, ctx)?)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(coerce_bool(&eval(rhs, ctx)?)?))
        }
        BinaryOp::Or => {
            if coerce_bool(&eval(lhs, ctx)?)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(coerce_bool(&eval(rhs, ctx)?)?))
        }
        _ => {
            let a = eval(lhs, ctx)?;
            let b = eval(rhs, ctx)?;
            let result = match op {
                BinaryOp::Equal => values_equal(&a, &b),
                BinaryOp::NotEqual => !values_equal(&a, &b),
                BinaryOp::Less => compare_order(&a, &b) == Ordering::Less,
                BinaryOp::LessOrEqual => compare_order(&a, &b) != Ordering::Greater,
                BinaryOp::Greater => compare_order(&a, &b) == Ordering::Greater,
                BinaryOp::GreaterOrEqual => compare_order(&a, &b) != Ordering::Less,
                BinaryOp::And | BinaryOp::Or => unreachable!(),
            };
            Ok(Value::Bool(result))
        }
    }
}

/// First match of a path, as a string: attribute value or `text()` result
/// directly, element results via their string value.
fn resolve_first(path: &PathExpr, ctx: &EvalContext<'_>) -> Result<String, EvalError> {
    match path::evaluate(ctx.doc, ctx.node, path)? {
        PathValue::Strings(values) => values
            .into_iter()
            .next()
            .ok_or_else(|| EvalError::UnresolvedPath(path.to_string())),
        PathValue::Nodes(nodes) => nodes
            .first()
            .map(|&n| ctx.doc.string_value(n))
            .ok_or_else(|| EvalError::UnresolvedPath(path.to_string())),
    }
}

/// Evaluates an arithmetic template AST.
pub fn eval_template(ast: &ArithExpr, ctx: &EvalContext<'_>) -> Result<f64, EvalError> {
    let finite = |x: f64| {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(EvalError::Arithmetic("arithmetic overflow".to_owned()))
        }
    };
    match ast {
        ArithExpr::Number(x) => Ok(*x),
        ArithExpr::Placeholder(path) => {
            let raw = resolve_first(path, ctx)?;
            parse_decimal(&raw).ok_or_else(|| {
                EvalError::Type(format!("value at '{path}' is not numeric: '{raw}'"))
            })
        }
        ArithExpr::Neg(inner) => finite(-eval_template(inner, ctx)?),
        ArithExpr::Add(l, r) => finite(eval_template(l, ctx)? + eval_template(r, ctx)?),
        ArithExpr::Sub(l, r) => finite(eval_template(l, ctx)? - eval_template(r, ctx)?),
        ArithExpr::Mul(l, r) => finite(eval_template(l, ctx)? * eval_template(r, ctx)?),
        ArithExpr::Div(l, r) => {
            let denom = eval_template(r, ctx)?;
            if denom == 0.0 {
                return Err(EvalError::Arithmetic("division by zero".to_owned()));
            }
            finite(eval_template(l, ctx)? / denom)
        }
    }
}

/// Template syntax error, with a byte offset into the template source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSyntaxError {
    pub message: String,
    pub offset: usize,
}

impl fmt::Display for TemplateSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "template syntax error at offset {}: {}",
            self.offset, self.message
        )
    }
}

impl core::error::Error for TemplateSyntaxError {}

/// Parses an arithmetic template: `+ - * /`, unary minus, parentheses,
/// decimal literals and `#(path)` placeholders.
pub fn parse_template(src: &str) -> Result<ArithExpr, TemplateSyntaxError> {
    let mut parser = TemplateParser { src, pos: 0 };
    parser.skip_ws();
    let ast = parser.parse_expr()?;
    parser.skip_ws();
    if parser.pos != src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(ast)
}

struct TemplateParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> TemplateParser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, message: &str) -> TemplateSyntaxError {
        TemplateSyntaxError {
            message: message.to_owned(),
            offset: self.pos,
        }
    }

    fn parse_expr(&mut self) -> Result<ArithExpr, TemplateSyntaxError> {
        let mut lhs = self.parse_term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = ArithExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some('-') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = ArithExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ArithExpr, TemplateSyntaxError> {
        let mut lhs = self.parse_factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = ArithExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some('/') => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = ArithExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<ArithExpr, TemplateSyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(ArithExpr::Neg(Box::new(self.parse_factor()?)))
            }
            Some('(') => {
                self.bump();
                let inner = self.parse_expr()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some('#') => self.parse_placeholder(),
            Some(c) if c.is_ascii_digit() || c == '.' => self.parse_number(),
            Some(c) => Err(self.error(&format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of template")),
        }
    }

    fn parse_number(&mut self) -> Result<ArithExpr, TemplateSyntaxError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        let text = &self.src[start..self.pos];
        match parse_decimal(text) {
            Some(x) => Ok(ArithExpr::Number(x)),
            None => Err(TemplateSyntaxError {
                message: format!("malformed number '{text}'"),
                offset: start,
            }),
        }
    }

    /// `#( path )` — the path may itself contain parentheses (in `text()`)
    /// and bracketed, quoted predicate values, so the scan balances parens
    /// outside quotes instead of stopping at the first `)`.
    fn parse_placeholder(&mut self) -> Result<ArithExpr, TemplateSyntaxError> {
        let hash = self.pos;
        self.bump();
        if self.bump() != Some('(') {
            return Err(self.error("expected '(' after '#'"));
        }
        let start = self.pos;
        let mut depth = 1usize;
        let mut quote: Option<char> = None;
        loop {
            let at = self.pos;
            match self.bump() {
                Some(c) => {
                    match quote {
                        Some(q) => {
                            if c == q {
                                quote = None;
                            }
                        }
                        None => match c {
                            '"' | '\'' => quote = Some(c),
                            '(' => depth += 1,
                            ')' => {
                                depth -= 1;
                                if depth == 0 {
                                    let body = &self.src[start..at];
                                    let path =
                                        path::parse_path(body).map_err(|err| TemplateSyntaxError {
                                            message: format!("bad placeholder path: {err}"),
                                            offset: start + err.offset,
                                        })?;
                                    return Ok(ArithExpr::Placeholder(path));
                                }
                            }
                            _ => {}
                        },
                    }
                }
                None => {
                    return Err(TemplateSyntaxError {
                        message: "unterminated placeholder".to_owned(),
                        offset: hash,
                    })
                }
            }
        }
    }
}
