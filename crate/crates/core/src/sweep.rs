//! Grid sweeps over `(v₊, d)`: one record per point, written atomically,
//! content-addressed for resume, and a deterministic summary table.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contour::{evans_contour, ContourSpec};
use crate::error::{Error, Result};
use crate::evans::{real_axis_scan, EvansSystem};
use crate::gas::GasParams;
use crate::io::write_atomic;
use crate::ode::Tolerances;
use crate::profile::{classify, solve_profile, validate, Classification, MeshOptions};

pub const RECORD_FORMAT: &str = "capshock-record";
pub const RECORD_VERSION: u32 = 1;
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const RECORD_DIR: &str = "records";

fn default_v_plus() -> Vec<f64> {
    (2..=16).map(|k| k as f64 * 5.0 / 100.0).collect()
}

fn default_d() -> Vec<f64> {
    (1..=16).map(|k| k as f64 * 5.0 / 100.0).collect()
}

/// Flat key-value sweep configuration. Every key is optional; defaults give
/// the full 15 × 16 grid at `γ = 1.4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma: f64,
    pub v_plus: Vec<f64>,
    pub d: Vec<f64>,
    pub radius: f64,
    pub n_arc: usize,
    pub n_imag: usize,
    pub origin_offset: f64,
    pub max_depth: usize,
    pub l_minus: f64,
    pub l_plus: f64,
    /// Upper limit of `|L±|` for automatic enlargement.
    pub l_cap: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Real-axis scan points for monotone profiles.
    pub scan_points: usize,
    /// Worker threads; 0 means one per core, capped by the number of points.
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub resume: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let c = ContourSpec::default();
        let t = Tolerances::default();
        Self {
            gamma: 1.4,
            v_plus: default_v_plus(),
            d: default_d(),
            radius: c.radius,
            n_arc: c.n_arc,
            n_imag: c.n_imag,
            origin_offset: c.origin_offset,
            max_depth: c.max_depth,
            l_minus: -crate::profile::DEFAULT_HALF_WIDTH,
            l_plus: crate::profile::DEFAULT_HALF_WIDTH,
            l_cap: MeshOptions::default().l_cap,
            abs_tol: t.abs,
            rel_tol: t.rel,
            scan_points: 50,
            jobs: 0,
            out_dir: PathBuf::from("sweep-out"),
            resume: false,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_plus.is_empty() || self.d.is_empty() {
            return Err(Error::domain("v_plus and d lists must be non-empty"));
        }
        for &v in &self.v_plus {
            for &d in &self.d {
                GasParams::new(self.gamma, v, d)?;
            }
        }
        if !(self.l_minus < 0.0 && self.l_plus > 0.0) {
            return Err(Error::domain("need l_minus < 0 < l_plus"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("tolerances must be positive"));
        }
        self.point_options().contour.validate()
    }

    pub fn point_options(&self) -> PointOptions {
        PointOptions {
            contour: ContourSpec {
                radius: self.radius,
                n_arc: self.n_arc,
                n_imag: self.n_imag,
                origin_offset: self.origin_offset,
                max_depth: self.max_depth,
                ..ContourSpec::default()
            },
            l_minus: self.l_minus,
            l_plus: self.l_plus,
            mesh: MeshOptions {
                l_cap: self.l_cap,
                ..MeshOptions::default()
            },
            tolerances: Tolerances::new(self.abs_tol, self.rel_tol),
            scan_points: self.scan_points,
        }
    }

    /// Grid points in row-major `(v₊, d)` order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.v_plus
            .iter()
            .flat_map(|&v| self.d.iter().map(move |&d| (v, d)))
            .collect()
    }
}

/// Everything besides `(γ, v₊, d)` that affects a point's result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOptions {
    pub contour: ContourSpec,
    pub l_minus: f64,
    pub l_plus: f64,
    pub mesh: MeshOptions,
    pub tolerances: Tolerances,
    pub scan_points: usize,
}

impl Default for PointOptions {
    fn default() -> Self {
        SweepConfig::default().point_options()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Params,
    Profile,
    Validation,
    Contour,
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub classification: Classification,
    /// Verdict of the `d ≤ d*` predicate.
    pub predicted: Classification,
    /// Whether a disagreement with the predicate could be seen at all.
    pub classification_resolvable: bool,
    pub d_star: f64,
    pub sup_slope: f64,
    /// `ε²/4`.
    pub slope_bound: f64,
    pub slope_bound_ok: bool,
    pub hf_c: f64,
    pub hf_radius: f64,
    pub hf_within_gamma: bool,
    pub residual_norm: f64,
    pub endpoint_errors: (f64, f64),
    pub lyapunov_monotone: bool,
    pub argmax_on_nullcline: bool,
    pub numerically_valid: bool,
    pub l_minus: f64,
    pub l_plus: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSummary {
    pub radius: f64,
    pub winding: i64,
    pub samples: usize,
    pub refinements: usize,
    pub min_abs_d: f64,
    pub min_ln_abs_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub points: usize,
    pub sign_changes: usize,
    pub min_abs_d: f64,
    pub min_ln_abs_d: f64,
    pub argmin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub v_plus: f64,
    pub d: f64,
    pub config_hash: String,
    pub profile: Option<ProfileSummary>,
    pub contour: Option<ContourSummary>,
    pub scan: Option<ScanSummary>,
    pub failure: Option<Failure>,
    pub wall_time_s: f64,
    pub pass: bool,
}

impl SweepRecord {
    pub fn winding(&self) -> Option<i64> {
        self.contour.as_ref().map(|c| c.winding)
    }

    pub fn unstable(&self) -> bool {
        self.winding().is_some_and(|w| w != 0)
    }

    pub fn to_text(&self) -> String {
        let header = serde_json::json!({ "format": RECORD_FORMAT, "version": RECORD_VERSION });
        format!(
            "{header}\n{}\n",
            serde_json::to_string(self).expect("records serialize")
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: serde_json::Value = lines
            .next()
            .ok_or_else(|| Error::Parse("empty record file".into()))
            .and_then(|l| serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string())))?;
        if header["format"] != RECORD_FORMAT || header["version"] != RECORD_VERSION {
            return Err(Error::Parse(format!("unsupported record header {header}")));
        }
        let body = lines.next().ok_or_else(|| Error::Parse("record body missing".into()))?;
        serde_json::from_str(body).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Hex SHA-256 of the canonical JSON of everything that determines a
/// point's result.
pub fn config_hash(gamma: f64, v_plus: f64, d: f64, options: &PointOptions) -> String {
    let key = serde_json::json!({
        "version": RECORD_VERSION,
        "gamma": gamma,
        "v_plus": v_plus,
        "d": d,
        "options": options,
    });
    Sha256::digest(key.to_string().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Profile → validation → contour → (monotone only) real-axis scan. Stage
/// failures end up in `failure`; nothing here returns early with an error.
pub fn run_point(v_plus: f64, d: f64, gamma: f64, options: &PointOptions) -> SweepRecord {
    let start = Instant::now();
    let mut record = SweepRecord {
        gamma,
        v_plus,
        d,
        config_hash: config_hash(gamma, v_plus, d, options),
        profile: None,
        contour: None,
        scan: None,
        failure: None,
        wall_time_s: 0.0,
        pass: false,
    };
    if let Err((stage, e)) = run_stages(&mut record, options) {
        record.failure = Some(Failure {
            stage,
            message: e.to_string(),
        });
    }
    record.pass = record.failure.is_none()
        && record.winding() == Some(0)
        && record.profile.as_ref().is_some_and(|p| p.numerically_valid)
        && record.scan.as_ref().map_or(true, |s| s.sign_changes == 0);
    record.wall_time_s = start.elapsed().as_secs_f64();
    record
}

fn run_stages(record: &mut SweepRecord, options: &PointOptions) -> std::result::Result<(), (Stage, Error)> {
    let params = GasParams::new(record.gamma, record.v_plus, record.d).map_err(|e| (Stage::Params, e))?;
    let profile = solve_profile(&params, options.l_minus, options.l_plus, &options.mesh)
        .map_err(|e| (Stage::Profile, e))?;
    let report = validate(&profile).map_err(|e| (Stage::Validation, e))?;
    let predicted = if params.is_monotone_regime() {
        Classification::Monotone
    } else {
        Classification::Oscillatory
    };
    let resolvable = match classify(&profile) {
        Err(Error::ClassificationMismatch { resolvable, .. }) => resolvable,
        _ => true,
    };
    record.profile = Some(ProfileSummary {
        classification: profile.classification,
        predicted,
        classification_resolvable: resolvable,
        d_star: params.d_star,
        sup_slope: report.sup_slope_resampled,
        slope_bound: report.slope_bound,
        slope_bound_ok: report.slope_bound_ok,
        hf_c: report.hf.c,
        hf_radius: report.hf.radius,
        hf_within_gamma: !report.hf.exceeds_gamma,
        residual_norm: report.residual_norm,
        endpoint_errors: report.endpoint_errors,
        lyapunov_monotone: report.lyapunov_monotone,
        argmax_on_nullcline: report.argmax_on_nullcline,
        numerically_valid: report.numerically_valid(),
        l_minus: profile.l_minus(),
        l_plus: profile.l_plus(),
        nodes: profile.len(),
    });
    let monotone = profile.classification == Classification::Monotone;
    let system = EvansSystem::new(profile).with_tolerances(options.tolerances);
    let spec = ContourSpec {
        radius: options.contour.radius.max(report.hf.radius),
        ..options.contour
    };
    let contour = evans_contour(&system, &spec).map_err(|e| (Stage::Contour, e))?;
    record.contour = Some(ContourSummary {
        radius: spec.radius,
        winding: contour.winding,
        samples: contour.samples.len(),
        refinements: contour.refinements_used,
        min_abs_d: contour.min_abs_d,
        min_ln_abs_d: contour.min_ln_abs_d,
    });
    if monotone {
        let scan = real_axis_scan(&system, spec.origin_offset, spec.radius, options.scan_points)
            .map_err(|e| (Stage::Scan, e))?;
        record.scan = Some(ScanSummary {
            points: scan.lambdas.len(),
            sign_changes: scan.sign_changes.len(),
            min_abs_d: scan.min_abs,
            min_ln_abs_d: scan.min_ln_abs,
            argmin: scan.argmin,
        });
    }
    Ok(())
}

pub fn record_path(out_dir: &Path, v_plus: f64, d: f64) -> PathBuf {
    out_dir.join(RECORD_DIR).join(format!("v{v_plus:.4}_d{d:.4}.jsonl"))
}

/// Existing record for this point if it was computed with the same hash.
fn resumable(path: &Path, hash: &str) -> Option<SweepRecord> {
    let text = fs::read_to_string(path).ok()?;
    SweepRecord::from_text(&text).ok().filter(|r| r.config_hash == hash)
}

/// Runs every grid point, writing one record file per point and the summary
/// table. With `resume`, points whose record carries the same config hash
/// are read back instead of recomputed.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let options = config.point_options();
    let points = config.points();
    let threads = if config.jobs == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        config.jobs
    }
    .min(points.len())
    .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(e.to_string()))?;
    let records = pool.install(|| {
        points
            .par_iter()
            .map(|&(v, d)| {
                let path = record_path(&config.out_dir, v, d);
                let hash = config_hash(config.gamma, v, d, &options);
                if config.resume {
                    if let Some(r) = resumable(&path, &hash) {
                        return Ok(r);
                    }
                }
                let r = run_point(v, d, config.gamma, &options);
                write_atomic(&path, r.to_text().as_bytes())?;
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    write_atomic(&config.out_dir.join(SUMMARY_FILE), summary_table(&records).as_bytes())?;
    Ok(records)
}

/// Tab-separated summary in grid order. Wall times are left out so that
/// reruns are byte-identical.
pub fn summary_table(records: &[SweepRecord]) -> String {
    let mut out = String::from("v_plus\td\twinding\tmin_abs_d\tmin_ln_abs_d\tclassification\tpass\tfailure\n");
    for r in records {
        let (winding, min_abs, min_ln) = match &r.contour {
            Some(c) => (c.winding.to_string(), format!("{:.6e}", c.min_abs_d), format!("{:.6}", c.min_ln_abs_d)),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let class = r.profile.as_ref().map_or("-".to_string(), |p| p.classification.to_string());
        let failure = r.failure.as_ref().map_or("-".to_string(), |f| {
            serde_json::to_value(f.stage).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        });
        out.push_str(&format!(
            "{}\t{}\t{winding}\t{min_abs}\t{min_ln}\t{class}\t{}\t{failure}\n",
            r.v_plus, r.d, r.pass
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_fifteen_by_sixteen() {
        let c = SweepConfig::default();
        assert_eq!(c.points().len(), 240);
        assert_eq!(c.v_plus[0], 0.1);
        assert_eq!(*c.v_plus.last().unwrap(), 0.8);
        assert_eq!(c.d[0], 0.05);
        assert_eq!(*c.d.last().unwrap(), 0.8);
    }

    #[test]
    fn toml_overrides_and_rejects_unknown_keys() {
        let c = SweepConfig::from_toml("v_plus = [0.4]\nd = [0.45, 0.65]\njobs = 2\n").unwrap();
        assert_eq!(c.points(), vec![(0.4, 0.45), (0.4, 0.65)]);
        assert_eq!(c.gamma, 1.4);
        assert!(SweepConfig::from_toml("v_plsu = [0.4]").is_err());
        assert!(SweepConfig::from_toml("v_plus = []").is_err());
        assert!(SweepConfig::from_toml("v_plus = [1.2]").is_err());
    }

    #[test]
    fn hash_depends_on_options() {
        let o = PointOptions::default();
        let h = config_hash(1.4, 0.4, 0.45, &o);
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(1.4, 0.4, 0.45, &o));
        let mut o2 = o;
        o2.contour.n_arc = 80;
        assert_ne!(h, config_hash(1.4, 0.4, 0.45, &o2));
        assert_ne!(h, config_hash(1.4, 0.4, 0.5, &o));
    }

    #[test]
    fn invalid_params_fail_gracefully() {
        let r = run_point(1.5, 0.45, 1.4, &PointOptions::default());
        assert!(!r.pass);
        assert_eq!(r.failure.as_ref().unwrap().stage, Stage::Params);
        assert_eq!(SweepRecord::from_text(&r.to_text()).unwrap(), r);
    }
}
