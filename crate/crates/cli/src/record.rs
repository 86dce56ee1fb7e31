//! Ordered output records, rendered as `key=value` lines or one JSON object.

use kindist::format::sig12;
use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Vec(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: Value) -> &mut Self {
        self.fields.push((key.into(), value));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, x: f64) -> &mut Self {
        self.push(key, Value::Num(x))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// One `key=value` per line. Vectors are comma-separated, rows of a
    /// matrix are separated by `;`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let rendered = match v {
                Value::Num(x) => sig12(*x),
                Value::Int(i) => i.to_string(),
                Value::Vec(xs) => join(xs),
                Value::Rows(rows) => rows.iter().map(|r| join(r)).collect::<Vec<_>>().join(";"),
                Value::Text(s) => s.clone(),
                Value::Bool(b) => b.to_string(),
            };
            out.push_str(k);
            out.push('=');
            out.push_str(&rendered);
            out.push('\n');
        }
        out
    }

    /// The same fields as a JSON object, keys in record order. Numbers carry
    /// the 12-digit values of the text form; non-finite numbers become null.
    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        for (k, v) in &self.fields {
            let j = match v {
                Value::Num(x) => num(*x),
                Value::Int(i) => Json::from(*i),
                Value::Vec(xs) => Json::Array(xs.iter().map(|x| num(*x)).collect()),
                Value::Rows(rows) => Json::Array(
                    rows.iter()
                        .map(|r| Json::Array(r.iter().map(|x| num(*x)).collect()))
                        .collect(),
                ),
                Value::Text(s) => Json::String(s.clone()),
                Value::Bool(b) => Json::Bool(*b),
            };
            map.insert(k.clone(), j);
        }
        let mut s = serde_json::to_string_pretty(&Json::Object(map)).expect("record serializes");
        s.push('\n');
        s
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| sig12(*x)).collect::<Vec<_>>().join(",")
}

fn num(x: f64) -> Json {
    let rounded: f64 = sig12(x).parse().unwrap_or(x);
    Number::from_f64(rounded).map_or(Json::Null, Json::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Record {
        let mut r = Record::new();
        r.num("rho_total", 1.0 / 3.0)
            .push("U", Value::Vec(vec![0.0, -2.5]))
            .push("mean_u_per_cell", Value::Rows(vec![vec![1.0, 0.0], vec![0.5, 0.25]]))
            .push("method", Value::Text("bregman".into()))
            .push("steps", Value::Int(4))
            .push("ok", Value::Bool(true));
        r
    }

    #[test]
    fn text_form() {
        assert_eq!(
            sample().to_text(),
            "rho_total=0.333333333333\nU=0,-2.5\nmean_u_per_cell=1,0;0.5,0.25\nmethod=bregman\nsteps=4\nok=true\n"
        );
    }

    #[test]
    fn json_keeps_order_and_precision() {
        let j = sample().to_json();
        let v: Json = serde_json::from_str(&j).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["rho_total", "U", "mean_u_per_cell", "method", "steps", "ok"]);
        assert_eq!(v["rho_total"].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["mean_u_per_cell"][1][1].as_f64().unwrap(), 0.25);
        let mut r = Record::new();
        r.num("bad", f64::NAN);
        assert!(r.to_json().contains("null"));
    }
}
