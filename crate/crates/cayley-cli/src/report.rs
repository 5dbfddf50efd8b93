//! Report envelope shared by all subcommands: inputs digest, outputs and
//! the list of verified anchors with expected/computed values.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One verified quantity: a stable reference id (documented in
/// docs/anchors.md), the expected and computed values and the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Anchor {
    /// Stable identifier of the fact being checked.
    pub r#ref: String,
    pub expected: serde_json::Value,
    pub computed: serde_json::Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Anchor {
    pub fn exact_int(id: &str, expected: i64, computed: i64) -> Self {
        Anchor {
            r#ref: id.to_string(),
            expected: serde_json::json!(expected),
            computed: serde_json::json!(computed),
            tolerance: 0.0,
            pass: expected == computed,
        }
    }

    pub fn float(id: &str, expected: f64, computed: f64, tolerance: f64) -> Self {
        Anchor {
            r#ref: id.to_string(),
            expected: serde_json::json!(expected),
            computed: serde_json::json!(computed),
            tolerance,
            pass: (expected - computed).abs() <= tolerance,
        }
    }

    /// Upper-bound check: computed must not exceed the bound.
    pub fn bound(id: &str, bound: f64, computed: f64) -> Self {
        Anchor {
            r#ref: id.to_string(),
            expected: serde_json::json!({ "at_most": bound }),
            computed: serde_json::json!(computed),
            tolerance: bound,
            pass: computed <= bound,
        }
    }

    /// Interval membership check.
    pub fn interval(id: &str, lo: f64, hi: f64, computed: f64) -> Self {
        Anchor {
            r#ref: id.to_string(),
            expected: serde_json::json!({ "interval": [lo, hi] }),
            computed: serde_json::json!(computed),
            tolerance: (hi - lo) / 2.0,
            pass: computed >= lo && computed <= hi,
        }
    }

    pub fn value(id: &str, expected: serde_json::Value, computed: serde_json::Value) -> Self {
        let pass = expected == computed;
        Anchor {
            r#ref: id.to_string(),
            expected,
            computed,
            tolerance: 0.0,
            pass,
        }
    }
}

/// Envelope emitted by every subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub inputs_digest: String,
    pub outputs: serde_json::Value,
    pub paper_anchors: Vec<Anchor>,
}

impl ReportEnvelope {
    pub fn new(command: &str, digest_material: &[&[u8]]) -> Self {
        let mut hasher = Sha256::new();
        for chunk in digest_material {
            hasher.update(chunk);
        }
        ReportEnvelope {
            command: command.to_string(),
            inputs_digest: format!("{:x}", hasher.finalize()),
            outputs: serde_json::Value::Null,
            paper_anchors: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.paper_anchors.iter().all(|a| a.pass)
    }

    /// Human-readable rendering: one line per anchor plus a summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("inputs digest: {}\n", self.inputs_digest));
        if !self.outputs.is_null() {
            out.push_str(&format!(
                "outputs: {}\n",
                serde_json::to_string_pretty(&self.outputs).unwrap()
            ));
        }
        if !self.paper_anchors.is_empty() {
            out.push_str("anchors:\n");
            for a in &self.paper_anchors {
                out.push_str(&format!(
                    "  [{}] {}: expected {} computed {}\n",
                    if a.pass { "pass" } else { "FAIL" },
                    a.r#ref,
                    a.expected,
                    a.computed,
                ));
            }
            let failed = self.paper_anchors.iter().filter(|a| !a.pass).count();
            out.push_str(&format!(
                "summary: {}/{} anchors pass\n",
                self.paper_anchors.len() - failed,
                self.paper_anchors.len()
            ));
        }
        out
    }
}
