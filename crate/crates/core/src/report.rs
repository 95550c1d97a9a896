//! Machine-readable run reports.
//!
//! Every CLI invocation emits one [`RunReport`] as a JSON object:
//!
//! | field | type | meaning |
//! |---|---|---|
//! | `schema` | integer | report schema version, currently `1` |
//! | `tool` | string | `sresim <version>` |
//! | `command` | string | `validate`, `simulate`, `equiv`, `check` or `bench` |
//! | `inputs` | object | file paths and flag values the run was given |
//! | `outcome` | string | `ok`, `negative`, `error` or `limit` (exit codes 0..3) |
//! | `verdicts` | array | command-specific verdict objects |
//! | `counterexamples` | array | property counterexamples, in verdict order |
//! | `errors` | array of strings | diagnostics of a failed run |
//! | `timing` | object | wall milliseconds per phase: `parse_ms`, `simulate_ms`, `abstract_ms`, `match_ms`, `total_ms` |
//! | `memory` | object | `node_count` (largest trace, in term nodes) and `peak_bytes` (process high-water mark or null) |
//!
//! Fields whose name ends in `_ms`, `peak_bytes` or `peak_memory_bytes`
//! are measurements; [`strip_measurements`] removes them so that two runs
//! over identical inputs can be compared byte for byte.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::equiv::{Diagnosis, EquivVerdict};
use crate::prop::{Counterexample, PropVerdict};
use crate::sim::{Trace, TraceMeta};

pub const SCHEMA_VERSION: u32 = 1;

/// Wall time per phase, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseTiming {
    pub simulate_ms: f64,
    pub abstract_ms: f64,
    pub match_ms: f64,
}

impl PhaseTiming {
    pub fn add(&mut self, other: &PhaseTiming) {
        self.simulate_ms += other.simulate_ms;
        self.abstract_ms += other.abstract_ms;
        self.match_ms += other.match_ms;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timing {
    pub parse_ms: f64,
    pub simulate_ms: f64,
    pub abstract_ms: f64,
    pub match_ms: f64,
    pub total_ms: f64,
}

impl Timing {
    pub fn add_phases(&mut self, p: &PhaseTiming) {
        self.simulate_ms += p.simulate_ms;
        self.abstract_ms += p.abstract_ms;
        self.match_ms += p.match_ms;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Memory {
    pub node_count: usize,
    pub peak_bytes: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Negative,
    Error,
    Limit,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Negative => 1,
            Outcome::Error => 2,
            Outcome::Limit => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: String,
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outcome: Outcome,
    pub verdicts: Vec<Value>,
    pub counterexamples: Vec<Counterexample>,
    pub errors: Vec<String>,
    pub timing: Timing,
    pub memory: Memory,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            tool: format!("sresim {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outcome: Outcome::Ok,
            verdicts: Vec::new(),
            counterexamples: Vec::new(),
            errors: Vec::new(),
            timing: Timing::default(),
            memory: Memory::default(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn push_verdict(&mut self, v: impl Serialize) {
        self.verdicts.push(serde_json::to_value(v).unwrap_or(Value::Null));
    }

    /// Raises the outcome; `Ok < Negative < Limit < Error`.
    pub fn escalate(&mut self, o: Outcome) {
        let rank = |o: Outcome| match o {
            Outcome::Ok => 0,
            Outcome::Negative => 1,
            Outcome::Limit => 2,
            Outcome::Error => 3,
        };
        if rank(o) > rank(self.outcome) {
            self.outcome = o;
        }
    }

    pub fn fail(&mut self, o: Outcome, message: impl Into<String>) {
        self.escalate(o);
        self.errors.push(message.into());
    }

    pub fn add_equiv(&mut self, v: &EquivVerdict, diagnosis: Option<&Diagnosis>) {
        for s in &v.scenarios {
            self.timing.add_phases(&s.timing);
            self.memory.node_count = self.memory.node_count.max(s.spec_meta.node_count).max(s.impl_meta.node_count);
        }
        #[derive(Serialize)]
        struct Entry<'a> {
            kind: &'static str,
            #[serde(flatten)]
            verdict: &'a EquivVerdict,
            #[serde(skip_serializing_if = "Option::is_none")]
            diagnosis: Option<&'a Diagnosis>,
        }
        self.push_verdict(Entry { kind: "equivalence", verdict: v, diagnosis });
    }

    /// `replay` tells whether the counterexample reproduced numerically.
    pub fn add_property(&mut self, v: &PropVerdict, replay: Option<bool>) {
        for s in &v.scenarios {
            self.timing.add_phases(&s.timing);
            self.memory.node_count = self.memory.node_count.max(s.meta.node_count);
        }
        self.counterexamples.extend(v.counterexample().cloned());
        #[derive(Serialize)]
        struct Entry<'a> {
            kind: &'static str,
            #[serde(flatten)]
            verdict: &'a PropVerdict,
            #[serde(skip_serializing_if = "Option::is_none")]
            replay_reproduces: Option<bool>,
        }
        self.push_verdict(Entry { kind: "property", verdict: v, replay_reproduces: replay });
    }

    pub fn add_trace(&mut self, t: &Trace) {
        self.timing.simulate_ms += t.meta.wall_time_ms;
        self.memory.node_count = self.memory.node_count.max(t.meta.node_count);
        self.push_verdict(TraceView::from(t));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without measurement fields.
    pub fn stable_view(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_measurements(&mut v);
        v
    }
}

/// Serialized form of a trace: values printed in DSL syntax.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceView {
    pub kind: &'static str,
    pub system: String,
    pub t0: i64,
    pub frames: Vec<FrameView>,
    pub meta: TraceMeta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameView {
    pub time: i64,
    pub values: BTreeMap<String, String>,
}

impl From<&Trace> for TraceView {
    fn from(t: &Trace) -> Self {
        TraceView {
            kind: "trace",
            system: t.system.clone(),
            t0: t.t0,
            frames: t
                .frames
                .iter()
                .map(|f| FrameView { time: f.time, values: f.values.iter().map(|(k, v)| (k.clone(), v.to_string())).collect() })
                .collect(),
            meta: t.meta.clone(),
        }
    }
}

fn is_measurement(key: &str) -> bool {
    key.ends_with("_ms") || key == "peak_bytes" || key == "peak_memory_bytes" || key == "timing"
}

/// Removes timing and memory measurements recursively.
pub fn strip_measurements(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !is_measurement(k));
            map.values_mut().for_each(strip_measurements);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_measurements),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escalation_keeps_worst() {
        let mut r = RunReport::new("check");
        r.escalate(Outcome::Negative);
        r.escalate(Outcome::Ok);
        assert_eq!(r.outcome, Outcome::Negative);
        r.fail(Outcome::Error, "boom");
        r.escalate(Outcome::Limit);
        assert_eq!(r.outcome.exit_code(), 2);
    }

    #[test]
    fn stable_view_drops_measurements() {
        let mut r = RunReport::new("equiv");
        r.timing.total_ms = 12.5;
        r.memory.peak_bytes = Some(7);
        r.push_verdict(serde_json::json!({"overall": "Equivalent", "wall_time_ms": 3.0, "meta": {"cycles": 1, "peak_memory_bytes": 9}}));
        let v = r.stable_view();
        assert!(v.get("timing").is_none());
        assert_eq!(v["memory"], serde_json::json!({"node_count": 0}));
        assert_eq!(v["verdicts"][0], serde_json::json!({"overall": "Equivalent", "meta": {"cycles": 1}}));
    }
}
