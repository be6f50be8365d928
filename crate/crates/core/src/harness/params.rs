//! Typed experiment parameters: a schema per experiment, a `key = value` config file and
//! command-line overrides on top.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{param, Result};
use crate::lattice::{site2, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    IntList,
    FloatList,
    /// Pole function written `x,y:w;x,y:w`.
    Poles,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

impl ParamDef {
    pub const fn new(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> ParamDef {
        ParamDef { key, kind, default, help }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
    Poles(Vec<(i32, i32, i64)>),
}

fn parse_int(key: &str, s: &str) -> Result<i64> {
    s.trim().parse::<i64>().or_else(|_| param(format!("{key}: '{s}' is not an integer")))
}

fn parse_float(key: &str, s: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => param(format!("{key}: '{s}' is not a finite number")),
    }
}

fn list<T>(key: &str, s: &str, one: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return param(format!("{key}: empty list"));
    }
    items.into_iter().map(|t| one(key, t)).collect()
}

fn parse_poles(key: &str, s: &str) -> Result<Vec<(i32, i32, i64)>> {
    let mut out = Vec::new();
    for entry in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (at, w) = entry.split_once(':').ok_or_else(|| crate::LabError::Parameter(format!("{key}: '{entry}' needs x,y:weight")))?;
        let xy = list(key, at, parse_int)?;
        if xy.len() != 2 {
            return param(format!("{key}: '{at}' is not a planar site"));
        }
        let coord = |v: i64| i32::try_from(v).or_else(|_| param(format!("{key}: coordinate {v} out of range")));
        out.push((coord(xy[0])?, coord(xy[1])?, parse_int(key, w)?));
    }
    if out.is_empty() {
        return param(format!("{key}: no poles given"));
    }
    Ok(out)
}

pub fn parse_value(def: &ParamDef, s: &str) -> Result<Value> {
    Ok(match def.kind {
        Kind::Int => Value::Int(parse_int(def.key, s)?),
        Kind::Float => Value::Float(parse_float(def.key, s)?),
        Kind::IntList => Value::IntList(list(def.key, s, parse_int)?),
        Kind::FloatList => Value::FloatList(list(def.key, s, parse_float)?),
        Kind::Poles => Value::Poles(parse_poles(def.key, s)?),
    })
}

/// `key = value` lines; `#` starts a comment. Repeated keys are an error.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return param(format!("config line {}: expected key = value", no + 1));
        };
        let k = k.trim().to_string();
        if out.iter().any(|(seen, _)| *seen == k) {
            return param(format!("config line {}: '{k}' given twice", no + 1));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Validated parameter values of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Params(pub BTreeMap<String, Value>);

impl Params {
    /// Defaults, then the config entries, then the overrides. Unknown keys are rejected.
    pub fn resolve(schema: &[ParamDef], config: &[(String, String)], overrides: &[(String, String)]) -> Result<Params> {
        let mut map = BTreeMap::new();
        for def in schema {
            map.insert(def.key.to_string(), parse_value(def, def.default)?);
        }
        for (k, v) in config.iter().chain(overrides) {
            let def = schema.iter().find(|d| d.key == k).ok_or_else(|| {
                let known: Vec<&str> = schema.iter().map(|d| d.key).collect();
                crate::LabError::Parameter(format!("unknown parameter '{k}' (known: {})", known.join(", ")))
            })?;
            map.insert(k.clone(), parse_value(def, v)?);
        }
        Ok(Params(map))
    }

    fn get(&self, key: &str) -> &Value {
        self.0.get(key).unwrap_or_else(|| panic!("parameter '{key}' is not in the schema"))
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(v) => *v,
            v => panic!("{key} is {v:?}, not an integer"),
        }
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            v => panic!("{key} is {v:?}, not a number"),
        }
    }

    pub fn ints(&self, key: &str) -> Vec<i64> {
        match self.get(key) {
            Value::IntList(v) => v.clone(),
            v => panic!("{key} is {v:?}, not an integer list"),
        }
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Value::FloatList(v) => v.clone(),
            v => panic!("{key} is {v:?}, not a list of numbers"),
        }
    }

    pub fn poles(&self, key: &str) -> Vec<(Site, i64)> {
        match self.get(key) {
            Value::Poles(v) => v.iter().map(|&(x, y, w)| (site2(x, y), w)).collect(),
            v => panic!("{key} is {v:?}, not a pole list"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("seed") as u64
    }

    // range checks used by the per-experiment validators

    pub fn int_in(&self, key: &str, lo: i64, hi: i64) -> Result<i64> {
        let v = self.int(key);
        if v < lo || v > hi {
            return param(format!("{key} = {v} must lie in [{lo}, {hi}]"));
        }
        Ok(v)
    }

    pub fn prob(&self, key: &str) -> Result<f64> {
        let v = self.float(key);
        if !(v > 0.0 && v <= 1.0) {
            return param(format!("{key} = {v} must lie in (0, 1]"));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.float(key);
        if v <= 0.0 {
            return param(format!("{key} = {v} must be positive"));
        }
        Ok(v)
    }
}
