//! Run reports: a manifest that can be re-executed, the outcome, and a flat
//! table for plotting.

use std::io::Write;
use std::path::Path;

use martineq_core::ineq::ConstantComparison;
use martineq_core::sharpness::SearchResult;
use martineq_core::{InequalityId, InequalityReport, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::run::Command;

/// Exact CSV header of the plotting table.
pub const CSV_HEADER: [&str; 11] =
    ["inequality", "p", "n_or_t", "lhs", "rhs", "constant", "ratio", "satisfied", "ci_lhs", "ci_rhs", "seed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved parameters, with input files embedded.
    pub params: Command,
    pub seed: Option<u64>,
    pub version: String,
    /// Execution details that do not influence results.
    pub runtime: Runtime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub duration_ms: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoment {
    pub p: f64,
    /// `E|Z|^p`
    pub moment: f64,
    /// `(E|Z|^p)^{2/p}`, the squared `L^p` norm of `W_1`.
    pub norm_sq: f64,
    /// `p - 1`, the bound on `norm_sq` for `p ≥ 2`.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub id: InequalityId,
    pub p: f64,
    pub evaluated: usize,
    pub satisfied: usize,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub tree: usize,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub trees: usize,
    pub rows: Vec<SweepRow>,
    /// Largest `|ratio - 1|` of PROP1-MAIN at `p = 2`, if swept.
    pub p2_main_deviation: Option<f64>,
    pub failures: Vec<SweepFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Inequalities { records: Vec<InequalityReport> },
    Sharpness { result: SearchResult },
    GaussianMoment(GaussianMoment),
    Constants { comparison: ConstantComparison },
    Sweep(Sweep),
}

/// One row of the CSV table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub inequality: String,
    pub p: f64,
    pub n_or_t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub ratio: f64,
    pub satisfied: &'static str,
    pub ci_lhs: Option<f64>,
    pub ci_rhs: Option<f64>,
    pub seed: Option<u64>,
}

impl CsvRow {
    pub fn from_report(r: &InequalityReport, seed: Option<u64>) -> Self {
        Self {
            inequality: r.id.to_string(),
            p: r.p.get(),
            n_or_t: r.at.as_f64(),
            lhs: r.lhs,
            rhs: r.rhs,
            constant: r.constant,
            ratio: r.ratio,
            satisfied: r.verdict.as_str(),
            ci_lhs: r.lhs_estimate.map(|e| e.half_width),
            ci_rhs: r.rhs_estimate.map(|e| e.half_width),
            seed,
        }
    }
}

/// Overall result of a run, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Satisfied,
    Inconclusive,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub outcome: Outcome,
    #[serde(skip)]
    pub table: Vec<CsvRow>,
}

impl Report {
    pub fn status(&self) -> Status {
        let worst = |verdicts: &mut dyn Iterator<Item = Verdict>| {
            verdicts.fold(Status::Satisfied, |acc, v| match (acc, v) {
                (Status::Violation, _) | (_, Verdict::Violation) => Status::Violation,
                (Status::Inconclusive, _) | (_, Verdict::Inconclusive) => Status::Inconclusive,
                _ => Status::Satisfied,
            })
        };
        match &self.outcome {
            Outcome::Inequalities { records } => worst(&mut records.iter().map(|r| r.verdict)),
            Outcome::Sweep(s) => worst(&mut s.failures.iter().map(|f| f.report.verdict)),
            Outcome::Sharpness { result } if result.violation.is_some() => Status::Violation,
            _ => Status::Satisfied,
        }
    }

    /// 0 satisfied, 2 violation, 3 inconclusive (0 when allowed).
    pub fn exit_code(&self) -> i32 {
        let allow = matches!(self.manifest.params, Command::VerifyContinuous { allow_inconclusive: true, .. });
        match self.status() {
            Status::Satisfied => 0,
            Status::Inconclusive if allow => 0,
            Status::Inconclusive => 3,
            Status::Violation => 2,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::formats::write_json(path, self)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        crate::formats::read_json(path)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.table {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// The serialized report without its runtime section.
    pub fn comparable(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report types serialize");
        if let Some(m) = v.get_mut("manifest").and_then(Value::as_object_mut) {
            m.remove("runtime");
        }
        v
    }

    /// `Ok` when both reports agree on everything but the runtime section.
    pub fn ensure_same(&self, other: &Report) -> Result<()> {
        match first_difference(&self.comparable(), &other.comparable(), String::new()) {
            None => Ok(()),
            Some(path) => Err(Error::ReplayMismatch(format!("first difference at `{path}`"))),
        }
    }

    /// Human-readable summary, one line per record.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        match &self.outcome {
            Outcome::Inequalities { records } => {
                for r in records {
                    let ci = match (r.lhs_estimate, r.rhs_estimate) {
                        (Some(l), Some(h)) => format!(" ±{:.3e}/±{:.3e}", l.half_width, h.half_width),
                        _ => String::new(),
                    };
                    let at = match r.at {
                        martineq_core::ineq::At::Level(n) => format!("n={n}"),
                        martineq_core::ineq::At::Time(t) => format!("t={t}"),
                    };
                    out += &format!(
                        "{:<10} p={} {at} lhs={:.9} rhs={:.9}{ci} ratio={:.6} {}\n",
                        r.id,
                        r.p,
                        r.lhs,
                        r.rhs,
                        r.ratio,
                        r.verdict.as_str()
                    );
                }
            }
            Outcome::Sharpness { result } => {
                out += &format!(
                    "best ratio {:.12} of bound {} ({:.9}) after {} evaluations at {:?}\n",
                    result.best_ratio,
                    result.bound,
                    result.normalized(),
                    result.evaluations,
                    result.best_params
                );
                if let Some(v) = &result.violation {
                    out += &format!("VIOLATION CANDIDATE {} ratio {} > {}\n", v.id, v.ratio, v.bound);
                }
            }
            Outcome::GaussianMoment(g) => {
                out += &format!("E|Z|^{} = {:.15}\n(E|Z|^p)^(2/p) = {:.15}\n", g.p, g.moment, g.norm_sq);
                if let Some(b) = g.bound {
                    out += &format!("bound p-1 = {b}\n");
                }
            }
            Outcome::Constants { comparison: c } => {
                out += &format!(
                    "p={} main: classic {} new {} improved {}\nmax: classic {} new {} improved {}\n",
                    c.p, c.classic_main, c.new_main, c.main_improved, c.classic_max, c.new_max, c.max_improved
                );
            }
            Outcome::Sweep(s) => {
                out += &format!("{} trees\n", s.trees);
                for row in &s.rows {
                    out += &format!(
                        "{:<10} p={:<4} {}/{} satisfied, max ratio {:.12}\n",
                        row.id, row.p, row.satisfied, row.evaluated, row.max_ratio
                    );
                }
                if let Some(dev) = s.p2_main_deviation {
                    out += &format!("p=2 PROP1-MAIN max |ratio-1| = {dev:e}\n");
                }
                for f in &s.failures {
                    out += &format!("FAILED tree {}: {:?}\n", f.tree, f.report);
                }
            }
        }
        out
    }
}

fn first_difference(a: &Value, b: &Value, path: String) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => {
                        if let Some(p) = first_difference(va, vb, format!("{path}/{k}")) {
                            return Some(p);
                        }
                    }
                    None => return Some(format!("{path}/{k}")),
                }
            }
            y.keys().find(|k| !x.contains_key(*k)).map(|k| format!("{path}/{k}"))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{path} (length {} vs {})", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(i, (va, vb))| first_difference(va, vb, format!("{path}/{i}")))
        }
        _ if a == b => None,
        _ => Some(path),
    }
}
