use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::lexer::{tokenize, Tok, Token};
use super::{DslError, ParseError, SourceSpan, ValidationError};
use crate::exact::{format_ratio, ratio_to_f64};
use crate::expr::TailExpr;
use crate::index_set::{IndexSet, Parity};
use crate::lacunary::LacunarySequence;
use crate::model::{Defaults, Scenario, TailModel};

pub(crate) const FIELDS: [&str; 9] = [
    "alpha",
    "delta",
    "eps",
    "index_set",
    "limit",
    "off_tail",
    "on_tail",
    "p",
    "theta",
];
const SET_CTORS: [&str; 8] = [
    "floor_power",
    "self_power",
    "factorial_parity",
    "block_prefix",
    "ratio_blocks",
    "empty",
    "all",
    "list",
];
const THETA_CTORS: [&str; 5] = [
    "powers",
    "factorial_even",
    "factorial_odd",
    "ratio_controlled",
    "list",
];
const ATOMS: [&str; 8] = ["number", "k", "eps", "pow", "min", "max", "(", "-"];
const MONOTONE: &str = "offtail_monotone";

/// Every identifier with a fixed meaning somewhere in the grammar.
pub const KEYWORDS: &[&str] = &[
    "scenario",
    "alpha",
    "delta",
    "eps",
    "index_set",
    "limit",
    "off_tail",
    "on_tail",
    "p",
    "theta",
    "offtail_monotone",
    "floor_power",
    "self_power",
    "factorial_parity",
    "block_prefix",
    "ratio_blocks",
    "empty",
    "all",
    "list",
    "even",
    "odd",
    "powers",
    "factorial_even",
    "factorial_odd",
    "ratio_controlled",
    "k",
    "pow",
    "min",
    "max",
];

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

enum Value {
    Limit(String),
    Set(IndexSet),
    Tail(TailExpr, bool),
    Rational(BigRational),
    Theta(LacunarySequence),
}

/// Field values by name, with the span of each.
type Fields = BTreeMap<&'static str, (Value, SourceSpan)>;
struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str, expected: Vec<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::new(
            format!("expected {what}, found {}", t.tok.describe()),
            t.span,
            expected,
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            let sym = tok.symbol();
            self.error(&format!("`{sym}`"), vec![sym.into()])
        }
    }

    fn ident_in(
        &mut self,
        allowed: &[&str],
        what: &str,
    ) -> Result<(String, SourceSpan), ParseError> {
        if let Tok::Ident(name) = &self.peek().tok {
            if allowed.contains(&name.as_str()) {
                let name = name.clone();
                return Ok((name, self.bump().span));
            }
        }
        self.error(what, strings(allowed))
    }

    fn integer(&mut self) -> Result<(BigUint, SourceSpan), ParseError> {
        if let Tok::Num { int: Some(n), .. } = &self.peek().tok {
            let n = n.clone();
            return Ok((n, self.bump().span));
        }
        self.error("an integer", vec!["integer".into()])
    }

    fn small(&mut self) -> Result<u32, ParseError> {
        let (n, span) = self.integer()?;
        n.to_u32().ok_or_else(|| {
            ParseError::new(
                format!("integer {n} is too large"),
                span,
                vec!["integer".into()],
            )
        })
    }

    fn rational(&mut self) -> Result<BigRational, ParseError> {
        if let Tok::Num { value, .. } = &self.peek().tok {
            let v = value.clone();
            self.bump();
            return Ok(v);
        }
        self.error("a rational number", vec!["number".into()])
    }

    fn int_list(&mut self) -> Result<Vec<BigUint>, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut items = vec![self.integer()?.0];
        while self.peek().tok == Tok::Comma {
            self.bump();
            items.push(self.integer()?.0);
        }
        self.expect(Tok::RBracket)?;
        Ok(items)
    }

    fn scenario(&mut self) -> Result<(String, Fields, SourceSpan), ParseError> {
        let (_, head) = self.ident_in(&["scenario"], "`scenario`")?;
        let name = match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                s
            }
            _ => return self.error("a quoted scenario name", vec!["string".into()]),
        };
        self.expect(Tok::LBrace)?;
        let mut fields = BTreeMap::new();
        loop {
            if self.peek().tok == Tok::RBrace && !fields.is_empty() {
                self.bump();
                break;
            }
            let (key, key_span) = self.ident_in(&FIELDS, "a field name")?;
            let key: &'static str = FIELDS.iter().find(|f| **f == key).expect("checked");
            if fields.contains_key(key) {
                return Err(ParseError::new(
                    format!("duplicate field `{key}`"),
                    key_span,
                    vec![],
                ));
            }
            self.expect(Tok::Eq)?;
            let start = self.peek().span;
            let value = self.value(key)?;
            let end = self.toks[self.pos.saturating_sub(1)].span;
            let span = SourceSpan {
                len: end.offset + end.len - start.offset,
                ..start
            };
            fields.insert(key, (value, span));
            self.terminator(key)?;
        }
        if self.peek().tok != Tok::Eof {
            return self.error("end of input", vec!["end of input".into()]);
        }
        Ok((name, fields, head))
    }

    fn terminator(&mut self, key: &str) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Semi => {
                self.bump();
                Ok(())
            }
            Tok::RBrace => Ok(()),
            _ => {
                let mut expected = vec![";".to_string(), "}".to_string()];
                if key.ends_with("_tail") {
                    expected.extend(strings(&["+", "-", "*", "/"]));
                }
                if key == "off_tail" {
                    expected.push(MONOTONE.into());
                }
                self.error("`;` or `}`", expected)
            }
        }
    }

    fn value(&mut self, key: &str) -> Result<Value, ParseError> {
        Ok(match key {
            "limit" => match &self.peek().tok {
                Tok::Str(s) => {
                    let s = s.clone();
                    self.bump();
                    Value::Limit(s)
                }
                _ => return self.error("a quoted limit label", vec!["string".into()]),
            },
            "index_set" => Value::Set(self.set_ctor()?),
            "on_tail" => Value::Tail(self.expr()?, false),
            "off_tail" => {
                let e = self.expr()?;
                let monotone = matches!(&self.peek().tok, Tok::Ident(s) if s == MONOTONE);
                if monotone {
                    self.bump();
                }
                Value::Tail(e, monotone)
            }
            "theta" => Value::Theta(self.theta_ctor()?),
            _ => Value::Rational(self.rational()?),
        })
    }

    fn set_ctor(&mut self) -> Result<IndexSet, ParseError> {
        let (name, _) = self.ident_in(&SET_CTORS, "an index-set constructor")?;
        let set = match name.as_str() {
            "floor_power" => {
                self.expect(Tok::LParen)?;
                let s = self.small()?;
                self.expect(Tok::Comma)?;
                let r = self.small()?;
                self.expect(Tok::RParen)?;
                IndexSet::FloorPower { s, r }
            }
            "self_power" => IndexSet::SelfPower,
            "factorial_parity" => {
                self.expect(Tok::LParen)?;
                let (p, _) = self.ident_in(&["even", "odd"], "`even` or `odd`")?;
                self.expect(Tok::RParen)?;
                IndexSet::FactorialParity(if p == "even" {
                    Parity::Even
                } else {
                    Parity::Odd
                })
            }
            "block_prefix" => {
                self.expect(Tok::LParen)?;
                let theta = self.theta_ctor()?;
                self.expect(Tok::Comma)?;
                let c = self.rational()?;
                self.expect(Tok::RParen)?;
                IndexSet::BlockPrefix { theta, c }
            }
            "ratio_blocks" => {
                self.expect(Tok::LParen)?;
                let j_max = self.small()?;
                self.expect(Tok::RParen)?;
                IndexSet::RatioBlocks { j_max }
            }
            "empty" => IndexSet::Empty,
            "all" => IndexSet::All,
            _ => {
                let mut items = self.int_list()?;
                items.sort();
                items.dedup();
                IndexSet::FiniteList(items)
            }
        };
        Ok(set)
    }

    fn theta_ctor(&mut self) -> Result<LacunarySequence, ParseError> {
        let (name, _) = self.ident_in(&THETA_CTORS, "a lacunary constructor")?;
        Ok(match name.as_str() {
            "powers" => {
                self.expect(Tok::LParen)?;
                let b = self.small()?;
                self.expect(Tok::RParen)?;
                LacunarySequence::Powers(b)
            }
            "factorial_even" => LacunarySequence::FactorialEven,
            "factorial_odd" => LacunarySequence::FactorialOdd,
            "ratio_controlled" => {
                self.expect(Tok::LParen)?;
                let j = self.small()?;
                self.expect(Tok::RParen)?;
                LacunarySequence::RatioControlled(j)
            }
            _ => LacunarySequence::ExplicitList(self.int_list()?),
        })
    }

    fn expr(&mut self) -> Result<TailExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<TailExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<TailExpr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<TailExpr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(TailExpr::Lit(value.clone()))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "k" => {
                    self.bump();
                    Ok(TailExpr::K)
                }
                "eps" => {
                    self.bump();
                    Ok(TailExpr::Eps)
                }
                "pow" | "min" | "max" => {
                    let f = name.clone();
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(match f.as_str() {
                        "pow" => TailExpr::pow(a, b),
                        "min" => TailExpr::min(a, b),
                        _ => TailExpr::max(a, b),
                    })
                }
                _ => self.error("an expression", strings(&ATOMS)),
            },
            _ => self.error("an expression", strings(&ATOMS)),
        }
    }
}

/// Parses and validates one `.sumprob` scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, DslError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let (name, mut fields, head) = p.scenario()?;
    let invalid =
        |message: String, span: SourceSpan| DslError::Validation(ValidationError { message, span });

    let mut take_rational = |key: &str| match fields.remove(key) {
        Some((Value::Rational(r), span)) => Some((r, span)),
        _ => None,
    };
    let alpha = take_rational("alpha");
    let p_exp = take_rational("p");
    let eps = take_rational("eps");
    let delta = take_rational("delta");
    let unit = |r: &BigRational| r.is_positive() && *r <= BigRational::one();
    if let Some((a, span)) = &alpha {
        if !unit(a) {
            return Err(invalid(
                format!("alpha must lie in (0, 1], got {}", format_ratio(a)),
                *span,
            ));
        }
    }
    if let Some((d, span)) = &delta {
        if !unit(d) {
            return Err(invalid(
                format!("delta must lie in (0, 1], got {}", format_ratio(d)),
                *span,
            ));
        }
    }
    for (key, v) in [("p", &p_exp), ("eps", &eps)] {
        if let Some((x, span)) = v {
            if !x.is_positive() {
                return Err(invalid(
                    format!("{key} must be positive, got {}", format_ratio(x)),
                    *span,
                ));
            }
        }
    }

    let limit = match fields.remove("limit") {
        Some((Value::Limit(l), _)) => l,
        _ => return Err(invalid("missing field `limit`".into(), head)),
    };
    let (on_set, set_span) = match fields.remove("index_set") {
        Some((Value::Set(s), span)) => (s, span),
        _ => return Err(invalid("missing field `index_set`".into(), head)),
    };
    on_set
        .validate()
        .map_err(|e| invalid(e.to_string(), set_span))?;
    let (on_tail, on_span) = match fields.remove("on_tail") {
        Some((Value::Tail(e, _), span)) => (e, span),
        _ => return Err(invalid("missing field `on_tail`".into(), head)),
    };
    let (off_tail, monotone, off_span) = match fields.remove("off_tail") {
        Some((Value::Tail(e, m), span)) => (e, m, span),
        _ => return Err(invalid("missing field `off_tail`".into(), head)),
    };
    let theta = match fields.remove("theta") {
        Some((Value::Theta(t), span)) => {
            t.validate().map_err(|e| invalid(e.to_string(), span))?;
            Some(t)
        }
        _ => None,
    };
    let probe_eps = eps
        .as_ref()
        .map(|(e, _)| e.clone())
        .unwrap_or_else(|| BigRational::new(1.into(), 2.into()));
    for (expr, span) in [(&on_tail, on_span), (&off_tail, off_span)] {
        check_range(expr, &probe_eps).map_err(|m| invalid(m, span))?;
    }
    let model = TailModel::piecewise(limit, on_set, on_tail, off_tail, monotone);
    Ok(Scenario {
        name,
        model,
        theta,
        defaults: Defaults {
            alpha: alpha.map(|x| x.0),
            p: p_exp.map(|x| x.0),
            eps: eps.map(|x| x.0),
            delta: delta.map(|x| x.0),
        },
    })
}

/// Samples the expression at small and power-of-two `k`; every value must be
/// a probability.
fn check_range(expr: &TailExpr, eps: &BigRational) -> Result<(), String> {
    let e = ratio_to_f64(eps);
    let ks = (1..=32u64).chain((6..=62).map(|j| 1u64 << j));
    for k in ks {
        let v = expr.eval(k as f64, e);
        if !(v.is_finite() && (-1e-12..=1.0 + 1e-12).contains(&v)) {
            return Err(format!(
                "tail evaluates to {v} at k={k}, eps={}; tails must lie in [0, 1]",
                format_ratio(eps)
            ));
        }
    }
    if eps.is_zero() {
        return Err("eps must be positive".into());
    }
    Ok(())
}
