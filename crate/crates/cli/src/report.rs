//! Report rows, their JSON and CSV renderings, and the payload hash.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

/// One named quantity. Asserted rows carry the compared value, the bound it
/// is held against and the margin (positive or zero when the assertion holds).
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub name: String,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub aux: String,
    pub value: Option<f64>,
    /// Exact rendering of the value when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub verdict: Verdict,
    pub source: String,
}

/// Parameters shared by a group of rows.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub prefix: String,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub aux: String,
}

impl Ctx {
    pub fn new(prefix: &str) -> Self {
        Ctx {
            prefix: prefix.to_string(),
            ..Ctx::default()
        }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn aux(mut self, aux: impl Into<String>) -> Self {
        self.aux = aux.into();
        self
    }

    fn row(&self, name: &str, source: &str) -> Row {
        Row {
            name: format!("{}.{}", self.prefix, name),
            n: self.n,
            d: self.d,
            aux: self.aux.clone(),
            value: None,
            exact: None,
            bound: None,
            margin: None,
            verdict: Verdict::Info,
            source: source.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Rows(pub Vec<Row>);

impl Rows {
    pub fn info(&mut self, ctx: &Ctx, name: &str, value: f64, exact: Option<String>, source: &str) {
        let mut row = ctx.row(name, source);
        row.value = Some(value);
        row.exact = exact;
        self.0.push(row);
    }

    /// A value shown against a bound that is reported but not asserted.
    pub fn info_bound(&mut self, ctx: &Ctx, name: &str, value: f64, bound: f64, source: &str) {
        let mut row = ctx.row(name, source);
        row.value = Some(value);
        row.bound = Some(bound);
        row.margin = Some(value - bound);
        self.0.push(row);
    }

    /// Attaches an exact rendering to the most recent row.
    pub fn annotate(&mut self, exact: String) {
        if let Some(row) = self.0.last_mut() {
            row.exact = Some(exact);
        }
    }

    /// `value ≤ bound`, with the verdict decided by `holds` (which may come
    /// from exact arithmetic rather than the floats shown).
    pub fn upper(&mut self, ctx: &Ctx, name: &str, value: f64, bound: f64, holds: bool, source: &str) {
        self.push_assert(ctx, name, value, bound, bound - value, holds, source);
    }

    /// `value ≥ bound`.
    pub fn lower(&mut self, ctx: &Ctx, name: &str, value: f64, bound: f64, holds: bool, source: &str) {
        self.push_assert(ctx, name, value, bound, value - bound, holds, source);
    }

    /// `|value − expected| ≤ tol`; `bound` holds the tolerance.
    pub fn close(&mut self, ctx: &Ctx, name: &str, value: f64, expected: f64, tol: f64, source: &str) {
        let margin = tol - (value - expected).abs();
        let mut row = ctx.row(name, source);
        row.value = Some(value);
        row.exact = Some(format_float(expected));
        row.bound = Some(tol);
        row.margin = Some(margin);
        row.verdict = if margin >= 0.0 { Verdict::Pass } else { Verdict::Fail };
        self.0.push(row);
    }

    /// An exact identity or boolean property.
    pub fn exact(&mut self, ctx: &Ctx, name: &str, value: f64, exact: Option<String>, holds: bool, source: &str) {
        let mut row = ctx.row(name, source);
        row.value = Some(value);
        row.exact = exact;
        row.verdict = if holds { Verdict::Pass } else { Verdict::Fail };
        self.0.push(row);
    }

    #[allow(clippy::too_many_arguments)]
    fn push_assert(&mut self, ctx: &Ctx, name: &str, value: f64, bound: f64, margin: f64, holds: bool, source: &str) {
        let mut row = ctx.row(name, source);
        row.value = Some(value);
        row.bound = Some(bound);
        row.margin = Some(margin);
        row.verdict = if holds { Verdict::Pass } else { Verdict::Fail };
        self.0.push(row);
    }

    pub fn extend(&mut self, other: Rows) {
        self.0.extend(other.0);
    }
}

#[derive(Serialize)]
struct Payload<'a> {
    config: &'a RunConfig,
    rows: &'a [Row],
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: RunConfig,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(config: RunConfig, rows: Rows) -> Self {
        Report { config, rows: rows.0 }
    }

    pub fn summary(&self) -> Summary {
        Summary {
            rows: self.rows.len(),
            passed: self.rows.iter().filter(|r| r.verdict == Verdict::Pass).count(),
            failed: self.rows.iter().filter(|r| r.verdict == Verdict::Fail).count(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary().failed == 0
    }

    /// Canonical serialization of configuration and rows; the timestamp is
    /// not part of it.
    pub fn payload(&self) -> String {
        serde_json::to_string(&Payload {
            config: &self.config,
            rows: &self.rows,
        })
        .expect("report rows serialize")
    }

    pub fn payload_sha256(&self) -> String {
        let digest = Sha256::digest(self.payload().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn to_json(&self, timestamp: &str) -> String {
        let doc = serde_json::json!({
            "metadata": {
                "tool": "permgram",
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp": timestamp,
                "payload_sha256": self.payload_sha256(),
            },
            "config": self.config,
            "summary": self.summary(),
            "rows": self.rows,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self, timestamp: &str) -> String {
        let mut out = String::new();
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let summary = self.summary();
        let _ = writeln!(out, "# tool=permgram");
        let _ = writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# timestamp={timestamp}");
        let _ = writeln!(out, "# payload_sha256={}", self.payload_sha256());
        let _ = writeln!(out, "# config={config}");
        let _ = writeln!(out, "# passed={} failed={} rows={}", summary.passed, summary.failed, summary.rows);
        out.push_str("name,n,d,aux,value,bound,margin,verdict,source\n");
        for r in &self.rows {
            let fields = [
                csv_field(&r.name),
                opt_usize(r.n),
                opt_usize(r.d),
                csv_field(&r.aux),
                opt_float(r.value),
                opt_float(r.bound),
                opt_float(r.margin),
                r.verdict.as_str().to_string(),
                csv_field(&r.source),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// very small magnitudes. Independent of locale.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() >= 1e16 || x.abs() < 1e-6) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
