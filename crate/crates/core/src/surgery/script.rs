//! JSON move scripts.
//!
//! ```json
//! { "cusps": 10, "unfilled": [10],
//!   "params": { "r1": 2, "r3": 4, "r": -5 },
//!   "constraints": ["r = -r3 - 1"],
//!   "moves": [ {"kind":"annulus","i":1,"j":3,"xi":[1,-1],"xj":[1,-1],"r":"r1"},
//!              {"kind":"disk","i":7,"r":"r"} ] }
//! ```
//!
//! Integers may be JSON numbers or decimal strings (for values beyond 64
//! bits). A move's `r` is an integer or a linear expression over `params`.
//! `unfilled`, `orders`, `params` and `constraints` are optional.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use super::{apply_twist, CuspState, FillingEntry, FillingSpec, IntPair, TwistMove};
use crate::error::{Error, Result};

/// Canonical twist sequence for the ten-cusp slope tuple.
pub const SLOPESEQN_SCRIPT: &str = include_str!("../../scripts/slopeseqn.json");

/// `c + Σ k_i · name_i`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearExpr {
    constant: BigInt,
    terms: Vec<(BigInt, String)>,
}

impl LinearExpr {
    pub fn constant(c: BigInt) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = || Error::Parse(format!("bad linear expression {text:?}"));
        let mut expr = Self::constant(BigInt::zero());
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(err());
        }
        let mut pos = 0;
        while pos < chars.len() {
            let mut sign = BigInt::one();
            match chars[pos] {
                '+' => pos += 1,
                '-' | '−' => {
                    sign = -sign;
                    pos += 1;
                }
                _ if pos > 0 => return Err(err()),
                _ => {}
            }
            let start = pos;
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                pos += 1;
            }
            let coeff: Option<BigInt> = if pos > start {
                Some(
                    chars[start..pos]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| err())?,
                )
            } else {
                None
            };
            let starred = coeff.is_some() && pos < chars.len() && chars[pos] == '*';
            if starred {
                pos += 1;
            }
            let name_start = pos;
            while pos < chars.len() && (chars[pos].is_alphanumeric() || chars[pos] == '_') {
                pos += 1;
            }
            let name: String = chars[name_start..pos].iter().collect();
            if (starred && name.is_empty()) || (!name.is_empty() && name.starts_with(|c: char| c.is_ascii_digit())) {
                return Err(err());
            }
            match (coeff, name.is_empty()) {
                (Some(c), true) => expr.constant += sign * c,
                (c, false) => expr.terms.push((sign * c.unwrap_or_else(BigInt::one), name)),
                (None, true) => return Err(err()),
            }
        }
        Ok(expr)
    }

    pub fn eval(&self, params: &BTreeMap<String, BigInt>) -> Result<BigInt> {
        let mut acc = self.constant.clone();
        for (k, name) in &self.terms {
            let v = params
                .get(name)
                .ok_or_else(|| Error::Parse(format!("unknown parameter {name:?}")))?;
            acc += k * v;
        }
        Ok(acc)
    }

    fn to_value(&self) -> Value {
        if self.terms.is_empty() {
            int_to_value(&self.constant)
        } else {
            Value::String(self.to_string())
        }
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, name) in &self.terms {
            let sign = if k.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = k.abs();
            if mag.is_one() {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}*{name}")?;
            }
            first = false;
        }
        if !self.constant.is_zero() || first {
            let sign = if self.constant.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            write!(f, "{sign}{}", self.constant.abs())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptMoveKind {
    Annulus {
        i: usize,
        j: usize,
        xi: IntPair,
        xj: IntPair,
    },
    Disk {
        i: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptMove {
    pub kind: ScriptMoveKind,
    pub r: LinearExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveScript {
    pub cusps: usize,
    pub unfilled: Vec<usize>,
    /// Orbifold order per cusp; all 1 when absent.
    pub orders: Option<Vec<u64>>,
    pub params: BTreeMap<String, BigInt>,
    pub constraints: Vec<(LinearExpr, LinearExpr)>,
    pub moves: Vec<ScriptMove>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn int_from_value(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(schema(format!("expected an integer, got {n}")))
            }
        }
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| schema(format!("expected an integer, got {s:?}"))),
        other => Err(schema(format!("expected an integer, got {other}"))),
    }
}

/// JSON number when it fits in 64 bits, decimal string otherwise.
pub fn int_to_value(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => Value::String(v.to_string()),
    }
}

fn index_from_value(v: Option<&Value>, field: &str) -> Result<usize> {
    v.and_then(Value::as_u64)
        .and_then(|u| usize::try_from(u).ok())
        .ok_or_else(|| schema(format!("field {field:?} must be a non-negative integer")))
}

fn pair_from_value(v: Option<&Value>, field: &str) -> Result<IntPair> {
    match v.and_then(Value::as_array).map(Vec::as_slice) {
        Some([a, b]) => Ok(IntPair::new(int_from_value(a)?, int_from_value(b)?)),
        _ => Err(schema(format!("field {field:?} must be a pair [p, q]"))),
    }
}

fn pair_to_value(p: &IntPair) -> Value {
    json!([int_to_value(&p.p), int_to_value(&p.q)])
}

fn expr_from_value(v: Option<&Value>) -> Result<LinearExpr> {
    match v {
        Some(Value::String(s)) => LinearExpr::parse(s),
        Some(n @ Value::Number(_)) => Ok(LinearExpr::constant(int_from_value(n)?)),
        _ => Err(schema("move needs an integer or expression field \"r\"")),
    }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("unknown field {k:?} in {what}"))),
        None => Ok(()),
    }
}

fn parse_constraint(s: &str) -> Result<(LinearExpr, LinearExpr)> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| schema(format!("constraint {s:?} has no '='")))?;
    Ok((LinearExpr::parse(lhs)?, LinearExpr::parse(rhs)?))
}

impl MoveScript {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| schema(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| schema("script must be a JSON object"))?;
        check_keys(
            obj,
            &["cusps", "unfilled", "orders", "params", "constraints", "moves"],
            "script",
        )?;
        let cusps = index_from_value(obj.get("cusps"), "cusps")?;
        let unfilled = match obj.get("unfilled") {
            None => Vec::new(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| index_from_value(Some(x), "unfilled"))
                .collect::<Result<_>>()?,
            Some(_) => return Err(schema("\"unfilled\" must be an array")),
        };
        let orders = match obj.get("orders") {
            None => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|x| {
                        x.as_u64()
                            .filter(|d| *d >= 1)
                            .ok_or_else(|| schema("orbifold orders must be integers >= 1"))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(_) => return Err(schema("\"orders\" must be an array")),
        };
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p.as_object().ok_or_else(|| schema("\"params\" must be an object"))?;
            for (k, x) in p {
                params.insert(k.clone(), int_from_value(x)?);
            }
        }
        let constraints = match obj.get("constraints") {
            None => Vec::new(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|c| {
                    c.as_str()
                        .ok_or_else(|| schema("constraints must be strings"))
                        .and_then(parse_constraint)
                })
                .collect::<Result<_>>()?,
            Some(_) => return Err(schema("\"constraints\" must be an array")),
        };
        let moves = obj
            .get("moves")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("script needs a \"moves\" array"))?
            .iter()
            .map(parse_move)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cusps,
            unfilled,
            orders,
            params,
            constraints,
            moves,
        })
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("cusps".into(), json!(self.cusps));
        obj.insert("unfilled".into(), json!(self.unfilled));
        if let Some(o) = &self.orders {
            obj.insert("orders".into(), json!(o));
        }
        obj.insert(
            "params".into(),
            Value::Object(self.params.iter().map(|(k, v)| (k.clone(), int_to_value(v))).collect()),
        );
        obj.insert(
            "constraints".into(),
            json!(self
                .constraints
                .iter()
                .map(|(l, r)| format!("{l} = {r}"))
                .collect::<Vec<_>>()),
        );
        let moves: Vec<Value> = self
            .moves
            .iter()
            .map(|m| match &m.kind {
                ScriptMoveKind::Annulus { i, j, xi, xj } => json!({
                    "kind": "annulus", "i": i, "j": j,
                    "xi": pair_to_value(xi), "xj": pair_to_value(xj), "r": m.r.to_value()
                }),
                ScriptMoveKind::Disk { i } => json!({ "kind": "disk", "i": i, "r": m.r.to_value() }),
            })
            .collect();
        obj.insert("moves".into(), Value::Array(moves));
        Value::Object(obj)
    }
}

fn parse_move(v: &Value) -> Result<ScriptMove> {
    let obj = v.as_object().ok_or_else(|| schema("each move must be an object"))?;
    let r = expr_from_value(obj.get("r"))?;
    let kind = match obj.get("kind").and_then(Value::as_str) {
        Some("annulus") => {
            check_keys(obj, &["kind", "i", "j", "xi", "xj", "r"], "annulus move")?;
            ScriptMoveKind::Annulus {
                i: index_from_value(obj.get("i"), "i")?,
                j: index_from_value(obj.get("j"), "j")?,
                xi: pair_from_value(obj.get("xi"), "xi")?,
                xj: pair_from_value(obj.get("xj"), "xj")?,
            }
        }
        Some("disk") => {
            check_keys(obj, &["kind", "i", "r"], "disk move")?;
            ScriptMoveKind::Disk {
                i: index_from_value(obj.get("i"), "i")?,
            }
        }
        _ => return Err(schema("move \"kind\" must be \"annulus\" or \"disk\"")),
    };
    Ok(ScriptMove { kind, r })
}

/// Applies the script's moves to the standard all-meridian state, after
/// checking every constraint. `overrides` replace or add parameters.
pub fn run_script(script: &MoveScript, overrides: &[(String, BigInt)]) -> Result<FillingSpec> {
    let mut params = script.params.clone();
    for (k, v) in overrides {
        params.insert(k.clone(), v.clone());
    }
    for (lhs, rhs) in &script.constraints {
        let (a, b) = (lhs.eval(&params)?, rhs.eval(&params)?);
        if a != b {
            return Err(Error::ConstraintViolated(format!("{lhs} = {rhs} fails ({a} != {b})")));
        }
    }
    let mut state = CuspState::standard(script.cusps);
    for m in &script.moves {
        let r = m.r.eval(&params)?;
        let mv = match &m.kind {
            ScriptMoveKind::Annulus { i, j, xi, xj } => TwistMove::annulus(*i, *j, xi.clone(), xj.clone(), r),
            ScriptMoveKind::Disk { i } => TwistMove::disk(*i, r),
        };
        state = apply_twist(&state, &mv)?;
    }
    let mut spec = state.filling(&script.unfilled)?;
    if let Some(orders) = &script.orders {
        if orders.len() != script.cusps {
            return Err(Error::DimensionMismatch {
                expected: script.cusps,
                got: orders.len(),
            });
        }
        for (e, d) in spec.entries.iter_mut().zip(orders) {
            if let FillingEntry::Filled { d: slot, .. } = e {
                *slot = *d;
            }
        }
    }
    Ok(spec)
}

/// `{"entries": [{"d":1,"p":..,"q":..} | "∞", ...], "formatted": "M(...)"}`
pub fn filling_to_value(spec: &FillingSpec) -> Value {
    let entries: Vec<Value> = spec
        .entries
        .iter()
        .map(|e| match e {
            FillingEntry::Unfilled => json!("∞"),
            FillingEntry::Filled { d, class } => {
                json!({ "d": d, "p": int_to_value(&class.p), "q": int_to_value(&class.q) })
            }
        })
        .collect();
    json!({ "entries": entries, "formatted": super::format_filling(spec) })
}

pub fn filling_from_value(v: &Value) -> Result<FillingSpec> {
    let entries = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("filling needs an \"entries\" array"))?
        .iter()
        .map(|e| match e {
            Value::String(s) if s == "∞" => Ok(FillingEntry::Unfilled),
            Value::Object(o) => Ok(FillingEntry::Filled {
                d: o.get("d")
                    .and_then(Value::as_u64)
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| schema("\"d\" must be an integer >= 1"))?,
                class: IntPair::new(
                    int_from_value(o.get("p").unwrap_or(&Value::Null))?,
                    int_from_value(o.get("q").unwrap_or(&Value::Null))?,
                ),
            }),
            _ => Err(schema("filling entries are objects or \"∞\"")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FillingSpec { entries })
}
