//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 even when a criterion fails, so that `cargo test` stays usable;
//! set `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use std::time::{Duration, Instant};

use nalgebra::{Matrix4, Matrix6, Schur};
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use capshock_core::contour::{contour_winding, evans_contour, ContourResult};
use capshock_core::evans::system::{flipped_coefficient_matrix, flipped_lifted_matrix};
use capshock_core::evans::{evans, evans_forward, lift_exterior};
use capshock_core::gas::hf_bound;
use capshock_core::profile::{
    endpoint_linearization, shoot_profile_oracle, solve_profile, solve_profile_default, sup_distance,
};
use capshock_core::sweep::run_point;
use capshock_core::{
    Classification, ContourSpec, EvansSystem, GasParams, MeshOptions, PointOptions, ProfileSolution, ShootOptions,
    SweepRecord, Tolerances,
};

const SUBGRID_V: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
const SUBGRID_D: [f64; 4] = [0.05, 0.25, 0.45, 0.65];
const FIG3_V: [f64; 6] = [0.65, 0.45, 0.35, 0.25, 0.20, 0.15];

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn subgrid() -> Vec<(f64, f64)> {
    SUBGRID_V
        .iter()
        .flat_map(|&v| SUBGRID_D.iter().map(move |&d| (v, d)))
        .collect()
}

fn profile_at(gamma: f64, v: f64, d: f64, l: f64) -> ProfileSolution {
    let p = GasParams::new(gamma, v, d).unwrap();
    solve_profile(&p, -l, l, &MeshOptions::default()).unwrap()
}

fn contour_with(
    v: f64,
    d: f64,
    l: f64,
    tol: Tolerances,
    spec: &ContourSpec,
) -> capshock_core::Result<ContourResult> {
    let sys = EvansSystem::new(profile_at(1.4, v, d, l)).with_tolerances(tol);
    evans_contour(&sys, spec)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn critical_capillarity(suite: &mut Suite) {
    let t = Instant::now();
    let p = GasParams::new(5.0 / 3.0, 0.1, 1.0).unwrap();
    // independent check: the node at v₋ turns into a focus at d*
    let focus = |d: f64| {
        endpoint_linearization(p.v_minus, &p.with_d(d).unwrap())
            .unwrap()
            .discriminant()
            < 0.0
    };
    let (mut lo, mut hi) = (0.2, 0.4);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if focus(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let elapsed = t.elapsed();
    let bisected = 0.5 * (lo + hi);
    let pass = (p.d_star - 0.259).abs() <= 1e-3
        && (bisected - p.d_star).abs() <= 1e-9
        && elapsed < Duration::from_secs(1);
    suite.report(
        "critical capillarity",
        pass,
        format!(
            "d* = {:.6} (focus onset {:.6}), target 0.259 +- 0.001, {}",
            p.d_star,
            bisected,
            secs(elapsed)
        ),
    );
}

fn classification(suite: &mut Suite, records: &[SweepRecord]) -> Vec<ProfileSolution> {
    let mut profiles = Vec::new();
    let mut details = Vec::new();
    let mut pass = true;
    for (d, l_cap, expected) in [
        (0.2, 400.0, Classification::Monotone),
        (2.0, 400.0, Classification::Oscillatory),
        (200.0, 10_000.0, Classification::Oscillatory),
    ] {
        let t = Instant::now();
        let p = GasParams::new(5.0 / 3.0, 0.1, d).unwrap();
        let mesh = MeshOptions {
            l_cap,
            ..MeshOptions::default()
        };
        match solve_profile(&p, -25.0, 25.0, &mesh) {
            Ok(prof) => {
                pass &= prof.classification == expected;
                details.push(format!(
                    "d={d}: {} (L=[{:.0},{:.0}], {})",
                    prof.classification,
                    prof.l_minus(),
                    prof.l_plus(),
                    secs(t.elapsed())
                ));
                profiles.push(prof);
            }
            Err(e) => {
                pass = false;
                details.push(format!("d={d}: {e}"));
            }
        }
    }
    let disagree: Vec<String> = records
        .iter()
        .filter_map(|r| {
            let p = r.profile.as_ref()?;
            (p.classification != p.predicted).then(|| format!("({}, {})", r.v_plus, r.d))
        })
        .collect();
    let missing = records.iter().filter(|r| r.profile.is_none()).count();
    pass &= disagree.is_empty() && missing == 0;
    details.push(format!(
        "subgrid predicate disagreements {:?}, unsolved {missing}",
        disagree
    ));
    suite.report("profile classification", pass, details.join("; "));
    profiles
}

fn derivative_bound(suite: &mut Suite, records: &[SweepRecord]) {
    let mut worst = (0.0, 0.0, 0.0, 0.0);
    let mut bound_ok = true;
    let mut on_nullcline = true;
    for r in records {
        let Some(p) = &r.profile else {
            bound_ok = false;
            continue;
        };
        bound_ok &= p.slope_bound_ok;
        on_nullcline &= p.argmax_on_nullcline;
        let ratio = p.sup_slope / p.slope_bound;
        if ratio > worst.0 {
            worst = (ratio, r.v_plus, p.sup_slope, p.slope_bound);
        }
    }
    suite.report(
        "derivative bound",
        bound_ok && on_nullcline,
        format!(
            "sup|v_x| <= eps^2/4 + 1e-8 at all points: {bound_ok}; argmax on w = phi(v): {on_nullcline}; worst ratio {:.3} at v+={} ({:.5} vs {:.5})",
            worst.0, worst.1, worst.2, worst.3
        ),
    );
}

fn figure3(suite: &mut Suite) -> Vec<ProfileSolution> {
    let spec = ContourSpec::default();
    let runs: Vec<_> = FIG3_V
        .iter()
        .map(|&v| {
            let t = Instant::now();
            let prof = solve_profile_default(&GasParams::new(1.4, v, 0.45).unwrap()).unwrap();
            let r = evans_contour(&EvansSystem::new(prof.clone()), &spec);
            (v, r, t.elapsed(), prof)
        })
        .collect();
    let pass = runs
        .iter()
        .all(|(_, r, t, _)| matches!(r, Ok(c) if c.winding == 0) && *t <= Duration::from_secs(120));
    let detail: Vec<String> = runs
        .iter()
        .map(|(v, r, t, _)| match r {
            Ok(c) => format!("{v}: w={} min ln|D|={:.2} {}", c.winding, c.min_ln_abs_d, secs(*t)),
            Err(e) => format!("{v}: {e}"),
        })
        .collect();
    suite.report("figure 3 winding", pass, detail.join(", "));
    runs.into_iter().map(|r| r.3).collect()
}

fn desk_sweep(suite: &mut Suite, records: &[SweepRecord], elapsed: Duration) {
    let bad: Vec<String> = records
        .iter()
        .filter(|r| r.winding() != Some(0))
        .map(|r| {
            let why = r.failure.as_ref().map_or(format!("{:?}", r.winding()), |f| f.message.clone());
            format!("({}, {}): {why}", r.v_plus, r.d)
        })
        .collect();
    suite.report(
        "desk-scale sweep",
        bad.is_empty(),
        format!(
            "{} of {} subgrid points with winding 0 ({}){}",
            records.len() - bad.len(),
            records.len(),
            secs(elapsed),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    );
}

fn high_frequency(suite: &mut Suite, records: &[SweepRecord], extra: &[ProfileSolution]) {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut pass = true;
    let mut count = 0;
    for r in records {
        if let Some(p) = &r.profile {
            count += 1;
            pass &= p.hf_c <= r.gamma && p.hf_radius <= 12.0;
            if p.hf_c / r.gamma > worst.0 {
                worst = (p.hf_c / r.gamma, format!("gamma {} v+ {} d {}", r.gamma, r.v_plus, r.d));
            }
        }
    }
    for prof in extra {
        count += 1;
        let hf = hf_bound(prof);
        let g = prof.params.gamma;
        pass &= hf.c <= g && hf.bound <= 12.0;
        if hf.c / g > worst.0 {
            worst = (hf.c / g, format!("gamma {:.4} v+ {} d {}", g, prof.params.v_plus, prof.params.d));
        }
    }
    suite.report(
        "high-frequency constants",
        pass,
        format!("{count} profiles, max C/gamma = {:.4} ({})", worst.0, worst.1),
    );
}

fn real_axis(suite: &mut Suite, records: &[SweepRecord]) {
    let monotone: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.profile.as_ref().is_some_and(|p| p.classification == Classification::Monotone))
        .collect();
    let pass = !monotone.is_empty()
        && monotone
            .iter()
            .all(|r| r.scan.as_ref().is_some_and(|s| s.sign_changes == 0 && s.min_ln_abs_d.is_finite()));
    let min = monotone
        .iter()
        .filter_map(|r| r.scan.as_ref().map(|s| (s.min_ln_abs_d, r.v_plus, r.d)))
        .fold((f64::INFINITY, 0.0, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    suite.report(
        "real-axis scan",
        pass,
        format!(
            "{} monotone points, no sign changes: {pass}; smallest ln|D| {:.2} at ({}, {})",
            monotone.len(),
            min.0,
            min.1,
            min.2
        ),
    );
}

fn eigenvalues6(m: &Matrix6<C>) -> Vec<C> {
    Schur::new(*m).eigenvalues().expect("complex Schur").iter().copied().collect()
}

fn exterior_lift(suite: &mut Suite) {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut spectral = 0.0f64;
    for _ in 0..100 {
        let a = Matrix4::from_fn(|_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let ev = Schur::new(a).eigenvalues().unwrap();
        let mut sums: Vec<C> = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                sums.push(ev[i] + ev[j]);
            }
        }
        let mut lifted = eigenvalues6(&lift_exterior(&a));
        for s in sums {
            let (k, err) = lifted
                .iter()
                .enumerate()
                .map(|(k, l)| (k, (l - s).norm()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            spectral = spectral.max(err);
            lifted.swap_remove(k);
        }
    }
    let mut entrywise = 0.0f64;
    for _ in 0..20 {
        let gamma = if rng.random_bool(0.5) { 1.4 } else { 5.0 / 3.0 };
        let p = GasParams::new(gamma, rng.random_range(0.1..0.9), rng.random_range(0.05..2.0)).unwrap();
        let v = rng.random_range(p.v_plus..1.0);
        let w = rng.random_range(-0.2..0.0);
        let lambda = C::from_polar(rng.random_range(0.0..12.0), rng.random_range(-1.5..1.5));
        let lifted = lift_exterior(&flipped_coefficient_matrix(&p, v, w, lambda));
        let displayed = flipped_lifted_matrix(&p, v, w, lambda);
        for (x, y) in lifted.iter().zip(displayed.iter()) {
            entrywise = entrywise.max((x - y).norm() / (1.0 + y.norm()));
        }
    }
    suite.report(
        "exterior-lift oracle",
        spectral <= 1e-10 && entrywise <= 1e-12,
        format!("max pair-sum error {spectral:.2e} over 100 matrices; max displayed-matrix mismatch {entrywise:.2e} over 20 probes"),
    );
}

fn robustness(suite: &mut Suite, base: &[(f64, f64, capshock_core::Result<ContourResult>)]) {
    let t = Instant::now();
    let spec = ContourSpec::default();
    let tol = Tolerances::default();
    let l = capshock_core::profile::DEFAULT_HALF_WIDTH;
    let variants: Vec<(&str, f64, Tolerances, ContourSpec)> = vec![
        ("tol/2", l, tol.halved(), spec),
        (
            "2x samples",
            l,
            tol,
            ContourSpec {
                n_arc: 2 * spec.n_arc,
                n_imag: 2 * spec.n_imag,
                ..spec
            },
        ),
        ("2L", 2.0 * l, tol, spec),
        ("delta 1e-3", l, tol, ContourSpec { origin_offset: 1e-3, ..spec }),
        ("delta 1e-5", l, tol, ContourSpec { origin_offset: 1e-5, ..spec }),
    ];
    let mut changed = Vec::new();
    for (name, l, tol, spec) in &variants {
        let results: Vec<_> = base
            .par_iter()
            .map(|(v, d, _)| (*v, *d, contour_with(*v, *d, *l, *tol, spec)))
            .collect();
        for ((v, d, r), (_, _, b)) in results.iter().zip(base) {
            let same = matches!((r, b), (Ok(x), Ok(y)) if x.winding == y.winding);
            if !same {
                changed.push(format!("{name} at ({v}, {d})"));
            }
        }
    }
    // conjugate symmetry: standalone evaluation at λ̄ against the contour value at λ
    let mut conj_err = 0.0f64;
    for (v, d, r) in base {
        let Ok(r) = r else { continue };
        let sys = EvansSystem::new(profile_at(1.4, *v, *d, l));
        let errs: Vec<f64> = r
            .samples
            .par_iter()
            .filter(|s| s.lambda.im > 0.0)
            .map(|s| match evans(s.lambda.conj(), &sys) {
                Ok(e) => ((e.log_value - s.log_value.conj()).exp() - 1.0).norm(),
                Err(_) => f64::INFINITY,
            })
            .collect();
        conj_err = errs.into_iter().fold(conj_err, f64::max);
    }
    // the forward-only formulation must agree on the winding number
    let mut forward = Vec::new();
    for (v, d) in [(0.45, 0.45), (0.2, 0.05)] {
        let sys = EvansSystem::new(profile_at(1.4, v, d, l));
        match contour_winding(&spec, |lam| evans_forward(lam, &sys)) {
            Ok(r) if r.winding == 0 => {}
            Ok(r) => forward.push(format!("({v}, {d}) forward winding {}", r.winding)),
            Err(e) => forward.push(format!("({v}, {d}) forward: {e}")),
        }
    }
    let base_ok = base.iter().all(|(_, _, r)| r.is_ok());
    suite.report(
        "numerical robustness",
        base_ok && changed.is_empty() && conj_err <= 1e-8 && forward.is_empty(),
        format!(
            "{} variants x {} points, winding changes {:?}; max conjugate-symmetry error {conj_err:.2e}; forward formulation {}; {}",
            variants.len(),
            base.len(),
            changed,
            if forward.is_empty() { "agrees".to_string() } else { forward.join(", ") },
            secs(t.elapsed())
        ),
    );
}

fn oracle_equivalence(suite: &mut Suite) {
    let rows: Vec<(f64, f64, Result<f64, String>)> = subgrid()
        .par_iter()
        .map(|&(v, d)| {
            let p = GasParams::new(1.4, v, d).unwrap();
            let r = solve_profile_default(&p).and_then(|bvp| {
                let shot = shoot_profile_oracle(&p, bvp.l_plus(), &ShootOptions::default())?;
                Ok(sup_distance(&bvp, &shot))
            });
            (v, d, r.map_err(|e| e.to_string()))
        })
        .collect();
    let worst = rows
        .iter()
        .filter_map(|(v, d, r)| r.as_ref().ok().map(|e| (*e, *v, *d)))
        .fold((0.0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let errors: Vec<String> = rows
        .iter()
        .filter_map(|(v, d, r)| r.as_ref().err().map(|e| format!("({v}, {d}): {e}")))
        .collect();
    suite.report(
        "profile oracle equivalence",
        errors.is_empty() && worst.0 <= 1e-6,
        format!("max sup|v_bvp - v_shoot| = {:.2e} at ({}, {}){}", worst.0, worst.1, worst.2, if errors.is_empty() { String::new() } else { format!("; {}", errors.join("; ")) }),
    );
}

fn main() {
    if std::env::args().skip(1).any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let mut suite = Suite { failures: 0 };
    critical_capillarity(&mut suite);

    let t = Instant::now();
    let options = PointOptions::default();
    let records: Vec<SweepRecord> = subgrid()
        .par_iter()
        .map(|&(v, d)| run_point(v, d, 1.4, &options))
        .collect();
    let sweep_time = t.elapsed();

    let mut extra = classification(&mut suite, &records);
    derivative_bound(&mut suite, &records);
    extra.extend(figure3(&mut suite));
    desk_sweep(&mut suite, &records, sweep_time);
    high_frequency(&mut suite, &records, &extra);
    real_axis(&mut suite, &records);
    exterior_lift(&mut suite);

    let spec = ContourSpec::default();
    let base: Vec<_> = subgrid()
        .par_iter()
        .map(|&(v, d)| {
            let l = capshock_core::profile::DEFAULT_HALF_WIDTH;
            (v, d, contour_with(v, d, l, Tolerances::default(), &spec))
        })
        .collect();
    robustness(&mut suite, &base);
    oracle_equivalence(&mut suite);

    println!(
        "{} criteria failed; total {}",
        suite.failures,
        secs(started.elapsed())
    );
    if suite.failures > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
