//! Machine-readable command reports and their text rendering.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PROPERTY: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub verdict: Verdict,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub exit_code: i32,
    /// Human-readable body for `--format text`.
    #[serde(skip)]
    pub text: Vec<String>,
}

impl Report {
    pub fn new(command: &str, input_digest: Option<String>) -> Self {
        Self {
            command: command.to_string(),
            input_digest,
            verdict: Verdict::Pass,
            checks: BTreeMap::new(),
            data: Value::Null,
            error: None,
            timing_ms: None,
            exit_code: EXIT_PASS,
            text: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool) -> &mut Self {
        self.checks.insert(name.to_string(), passed);
        self
    }

    /// Verdict and exit code from the checks: any failed check is a
    /// violated property.
    pub fn finish(mut self) -> Self {
        if self.checks.values().all(|&c| c) {
            self.verdict = Verdict::Pass;
            self.exit_code = EXIT_PASS;
        } else {
            self.verdict = Verdict::Fail;
            self.exit_code = EXIT_PROPERTY;
        }
        self
    }

    pub fn failure(command: &str, input_digest: Option<String>, error: String, exit_code: i32) -> Self {
        let mut r = Self::new(command, input_digest);
        r.verdict = Verdict::Fail;
        r.error = Some(error);
        r.exit_code = exit_code;
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        if let Some(d) = &self.input_digest {
            out.push_str(&format!("input sha256: {d}\n"));
        }
        for line in &self.text {
            out.push_str(line);
            out.push('\n');
        }
        for (name, passed) in &self.checks {
            out.push_str(&format!("check {name}: {}\n", if *passed { "pass" } else { "FAIL" }));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("time: {t:.1} ms\n"));
        }
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        };
        out.push_str(&format!("verdict: {verdict} (exit {})\n", self.exit_code));
        out
    }
}
