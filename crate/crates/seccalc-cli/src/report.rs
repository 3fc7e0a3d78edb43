// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON emission with a fixed field order and 17 significant digits.

use seccalc::fcalc::CalcReport;
use seccalc::matops::CMatrix;
use seccalc::normcalc::NormResult;
use seccalc::reprkernel::ReproReport;
use seccalc::verify::{fmt17, BoundCheck, SuiteReport, Table};
use seccalc::C64;
use serde_json::{Map, Value};

/// A float as a JSON number with 17 significant digits; non-finite values
/// become the strings `"inf"`, `"-inf"` and `"nan"`.
pub fn num(x: f64) -> Value {
    let s = fmt17(x);
    if x.is_finite() {
        Value::Number(serde_json::from_str(&s).expect("formatted float is a JSON number"))
    } else {
        Value::String(s)
    }
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(m.rows().iter().map(|r| Value::Array(r.iter().map(|z| complex(*z)).collect())).collect())
}

/// Ordered object builder.
#[derive(Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Obj(Map::new())
    }

    pub fn put(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.0.insert(k.to_string(), v.into());
        self
    }

    pub fn f(self, k: &str, x: f64) -> Self {
        self.put(k, num(x))
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

pub fn norm_result(key: &str, param: Option<(&str, f64)>, r: &NormResult) -> Value {
    let mut o = Obj::new().put("fn", key).put("space", r.space.tag());
    if let Some((name, v)) = param {
        o = o.f(name, v);
    }
    o.f("value", r.value)
        .f("est_abs_err", r.est_abs_err)
        .put("nodes_used", r.nodes_used)
        .put("truncated", r.truncation_flag)
        .put("divergent", r.divergent)
        .put("diagnostic", r.diagnostic.clone().map(Value::String).unwrap_or(Value::Null))
        .build()
}

pub fn repro(r: &ReproReport) -> Value {
    Obj::new()
        .put("formula", r.formula.tag())
        .put("z", complex(r.point))
        .put("reproduced", complex(r.reproduced))
        .put("reference", complex(r.reference))
        .f("abs_err", r.abs_err)
        .f("est_quad_err", r.est_quad_err)
        .put("nodes", r.nodes)
        .build()
}

pub fn calc(key: &str, r: &CalcReport) -> Value {
    Obj::new()
        .put("fn", key)
        .put("method", r.method.tag())
        .f("s_or_psi", r.s_or_psi)
        .put("result", matrix(&r.result))
        .put("quad_nodes", r.quad_nodes)
        .f("est_abs_err", r.est_abs_err)
        .put("oracle_diff", r.oracle_diff.map(num).unwrap_or(Value::Null))
        .put(
            "bound",
            r.bound
                .map(|b| Obj::new().f("lhs", b.lhs).f("rhs", b.rhs).put("holds", b.holds()).build())
                .unwrap_or(Value::Null),
        )
        .build()
}

fn check(c: &BoundCheck) -> Value {
    let mut inputs = Obj::new();
    for (k, v) in &c.inputs {
        inputs = inputs.put(k, v.as_str());
    }
    Obj::new()
        .put("name", c.name.as_str())
        .f("lhs", c.lhs)
        .f("rhs", c.rhs)
        .f("margin", c.margin)
        .put("passed", c.passed)
        .put("inputs", inputs.build())
        .build()
}

fn table(t: &Table) -> Value {
    Obj::new()
        .put("name", t.name.as_str())
        .put("columns", t.columns.clone())
        .put(
            "rows",
            Value::Array(t.rows.iter().map(|r| Value::Array(r.iter().map(|x| num(*x)).collect())).collect()),
        )
        .build()
}

pub fn suite(r: &SuiteReport) -> Value {
    Obj::new()
        .put("suite", r.suite.name())
        .put("passed", r.passed())
        .put("pass_count", r.pass_count())
        .put("check_count", r.checks.len())
        .put("checks", Value::Array(r.checks.iter().map(check).collect()))
        .put("tables", Value::Array(r.tables.iter().map(table).collect()))
        .put("notes", r.notes.clone())
        .build()
}

pub fn summary(reports: &[SuiteReport], seed: u64) -> Value {
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            Obj::new()
                .put("suite", r.suite.name())
                .put("passed", r.passed())
                .put("pass_count", r.pass_count())
                .put("check_count", r.checks.len())
                .build()
        })
        .collect();
    Obj::new()
        .put("seed", seed)
        .put("all_passed", reports.iter().all(|r| r.passed()))
        .put("pass_count", reports.iter().map(|r| r.pass_count()).sum::<usize>())
        .put("check_count", reports.iter().map(|r| r.checks.len()).sum::<usize>())
        .put("suites", Value::Array(rows))
        .build()
}

pub fn summary_csv(reports: &[SuiteReport]) -> String {
    let mut out = String::from("suite,passed,pass_count,check_count\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{}\n", r.suite.name(), r.passed(), r.pass_count(), r.checks.len()));
    }
    out
}

pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(serde_json::to_string(&num(0.1)).unwrap(), "1.0000000000000001e-1");
        assert_eq!(serde_json::to_string(&num(f64::INFINITY)).unwrap(), "\"inf\"");
    }

    #[test]
    fn field_order_is_insertion_order() {
        let v = Obj::new().f("z", 1.0).f("a", 2.0).build();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
    }
}
