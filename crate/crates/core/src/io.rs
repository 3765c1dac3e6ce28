//! Versioned columnar text files for profiles, phase portraits, contours,
//! single Evans evaluations and real-axis scans.
//!
//! ```text
//! # capshock-<kind> v1
//! # key = value
//! col_a col_b ...
//! 1.0e0 2.0e0 ...
//! ```
//!
//! Numbers are written with 17 significant digits, so a write/parse round
//! trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::contour::ContourResult;
use crate::error::{Error, Result};
use crate::evans::{EvansEvaluation, ScanReport};
use crate::profile::ProfileSolution;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Profile,
    Phase,
    Contour,
    Evans,
    Scan,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Profile => "profile",
            TableKind::Phase => "phase",
            TableKind::Contour => "contour",
            TableKind::Evans => "evans",
            TableKind::Scan => "scan",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            TableKind::Profile => &["x", "v_hat", "v_hat_x", "v_hat_xx"],
            TableKind::Phase => &["v_hat", "v_hat_x", "phi"],
            TableKind::Contour => &["s", "re_lambda", "im_lambda", "re_d", "im_d", "ln_abs_d", "arg_d"],
            TableKind::Evans => &[
                "re_lambda",
                "im_lambda",
                "re_d",
                "im_d",
                "ln_abs_d",
                "arg_d",
                "steps",
                "rejected",
                "evaluations",
            ],
            TableKind::Scan => &["lambda", "ln_abs_d", "phase"],
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        [Self::Profile, Self::Phase, Self::Contour, Self::Evans, Self::Scan]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(kind: TableKind) -> Self {
        Self {
            kind,
            meta: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.kind.columns().iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.kind.columns().len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# capshock-{} v{}\n", self.kind.name(), FORMAT_VERSION);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.kind.columns().join(" "));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let (kind, version) = first
            .strip_prefix("# capshock-")
            .and_then(|rest| rest.split_once(" v"))
            .ok_or_else(|| Error::Parse(format!("missing capshock header, found {first:?}")))?;
        let kind = TableKind::from_name(kind).ok_or_else(|| Error::Parse(format!("unknown file kind {kind:?}")))?;
        let version: u32 = version
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad version {version:?}")))?;
        if version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported {} version {version} (expected {FORMAT_VERSION})",
                kind.name()
            )));
        }
        let mut table = Table::new(kind);
        let expected = kind.columns();
        let mut header_seen = false;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(m) = line.strip_prefix('#') {
                let (k, v) = m
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {}: metadata without '='", i + 1)))?;
                table.meta.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols != expected {
                    return Err(Error::Parse(format!(
                        "line {}: columns {cols:?}, expected {expected:?}",
                        i + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != expected.len() {
                return Err(Error::Parse(format!(
                    "line {}: {} fields, expected {}",
                    i + 1,
                    cells.len(),
                    expected.len()
                )));
            }
            let row = cells
                .iter()
                .zip(expected)
                .map(|(c, name)| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: column {name}: bad number {c:?}", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            table.rows.push(row);
        }
        if !header_seen {
            return Err(Error::Parse("missing column header".into()));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn with_params(table: Table, profile: &ProfileSolution) -> Table {
    let p = &profile.params;
    table
        .with_meta("gamma", p.gamma)
        .with_meta("v_plus", p.v_plus)
        .with_meta("v_minus", p.v_minus)
        .with_meta("d", p.d)
}

pub fn profile_table(profile: &ProfileSolution) -> Table {
    let mut t = with_params(Table::new(TableKind::Profile), profile)
        .with_meta("classification", profile.classification)
        .with_meta("l_minus", profile.l_minus())
        .with_meta("l_plus", profile.l_plus());
    for i in 0..profile.len() {
        t.push(vec![profile.grid[i], profile.v_hat[i], profile.w_hat[i], profile.v_hat_xx[i]]);
    }
    t
}

/// The orbit in the `(v, w)` plane with the nullcline `w = φ(v)` sampled at
/// the same `v`.
pub fn phase_table(profile: &ProfileSolution) -> Table {
    let mut t = with_params(Table::new(TableKind::Phase), profile);
    for (&v, &w) in profile.v_hat.iter().zip(&profile.w_hat) {
        t.push(vec![v, w, profile.params.phi(v)]);
    }
    t
}

pub fn contour_table(result: &ContourResult) -> Table {
    let mut t = Table::new(TableKind::Contour)
        .with_meta("winding", result.winding)
        .with_meta("refinements", result.refinements_used);
    for p in &result.samples {
        let d = p.value();
        t.push(vec![
            p.s,
            p.lambda.re,
            p.lambda.im,
            d.re,
            d.im,
            p.log_value.re,
            p.log_value.im,
        ]);
    }
    t
}

pub fn evans_table(evaluations: &[EvansEvaluation]) -> Table {
    let mut t = Table::new(TableKind::Evans);
    for e in evaluations {
        let s = e.stats();
        t.push(vec![
            e.lambda.re,
            e.lambda.im,
            e.value.re,
            e.value.im,
            e.log_value.re,
            e.log_value.im,
            s.steps as f64,
            s.rejected as f64,
            s.evaluations as f64,
        ]);
    }
    t
}

pub fn scan_table(report: &ScanReport) -> Table {
    let mut t = Table::new(TableKind::Scan).with_meta("sign_changes", report.sign_changes.len());
    for ((&l, &a), &ph) in report.lambdas.iter().zip(&report.log_abs).zip(&report.phase) {
        t.push(vec![l, a, ph]);
    }
    t
}
