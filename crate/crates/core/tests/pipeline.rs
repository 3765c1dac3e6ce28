use std::f64::consts::PI;

use num_complex::Complex64 as C;

use capshock_core::contour::evans_contour;
use capshock_core::evans::{evans, real_axis_scan};
use capshock_core::io::{contour_table, phase_table, Table, TableKind};
use capshock_core::profile::{classify, solve_profile, solve_profile_default, sup_distance, validate};
use capshock_core::{Classification, ContourSpec, Error, EvansSystem, GasParams, MeshOptions, ProfileSolution};

fn profile(gamma: f64, v: f64, d: f64) -> ProfileSolution {
    solve_profile_default(&GasParams::new(gamma, v, d).unwrap()).unwrap()
}

fn system(v: f64, d: f64) -> EvansSystem {
    EvansSystem::new(profile(1.4, v, d))
}

fn wrapped(a: f64) -> f64 {
    C::from_polar(1.0, a).arg()
}

#[test]
fn classification_transition_sits_at_critical_capillarity() {
    let p = GasParams::new(5.0 / 3.0, 0.1, 1.0).unwrap();
    let at = |d: f64| profile(p.gamma, p.v_plus, d);
    assert_eq!(at(p.d_star * (1.0 - 1e-3)).classification, Classification::Monotone);
    // just above d* the spiral at v₋ is far too damped to be seen on the
    // grid; the classifier must say so instead of passing silently
    match classify(&at(p.d_star * (1.0 + 1e-3))) {
        Err(Error::ClassificationMismatch { resolvable, .. }) => assert!(!resolvable),
        other => panic!("{other:?}"),
    }
    let (mut lo, mut hi) = (0.2, 0.4);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        match classify(&at(mid)) {
            Ok(Classification::Monotone) => lo = mid,
            Ok(Classification::Oscillatory) => hi = mid,
            Err(Error::ClassificationMismatch { resolvable, .. }) => {
                assert!(!resolvable, "resolvable mismatch at d = {mid}");
                lo = mid;
            }
            Err(e) => panic!("{e}"),
        }
    }
    // the visible transition lies just above d*, where the overshoot per
    // half-turn climbs back above double-precision noise
    assert!(lo >= p.d_star && hi <= 1.05 * p.d_star, "{lo} {hi} vs {}", p.d_star);
}

#[test]
fn doubling_the_truncation_keeps_the_profile() {
    for (v, d) in [(0.3, 0.2), (0.5, 0.6)] {
        let p = GasParams::new(1.4, v, d).unwrap();
        let a = solve_profile(&p, -25.0, 25.0, &MeshOptions::default()).unwrap();
        let b = solve_profile(&p, -50.0, 50.0, &MeshOptions::default()).unwrap();
        assert!(b.l_plus() >= 50.0);
        assert!(sup_distance(&a, &b) < 1e-6, "{}", sup_distance(&a, &b));
    }
}

#[test]
fn nonzero_on_positive_reals_and_near_origin() {
    let sys = system(0.45, 0.45);
    for l in [8.0, 10.0, 12.0, 1e-3] {
        let e = evans(C::new(l, 0.0), &sys).unwrap();
        assert!(e.log_value.re.is_finite(), "{l}");
        assert!(e.log_value.im.abs() < 1e-9 || (e.log_value.im.abs() - PI).abs() < 1e-9);
    }
}

#[test]
fn small_circle_around_regular_point_has_zero_winding() {
    let sys = system(0.35, 0.45);
    let center = C::new(1.0, 1.0);
    let logs: Vec<C> = (0..64)
        .map(|k| evans(center + C::from_polar(1e-2, 2.0 * PI * k as f64 / 64.0), &sys).unwrap().log_value)
        .collect();
    let total: f64 = (0..64).map(|k| wrapped(logs[(k + 1) % 64].im - logs[k].im)).sum();
    assert!(total.abs() < 1e-6, "{total}");
}

#[test]
fn stronger_shock_contour_approaches_origin() {
    let spec = ContourSpec::default();
    let weak = evans_contour(&system(0.65, 0.45), &spec).unwrap();
    let strong = evans_contour(&system(0.15, 0.45), &spec).unwrap();
    assert_eq!((weak.winding, strong.winding), (0, 0));
    assert!(strong.min_ln_abs_d < weak.min_ln_abs_d - 10.0);
}

#[test]
fn smaller_capillarity_spreads_contour_values() {
    // the overall size of D₊ depends on how the end-state eigenvectors are
    // normalized, so only the spread of ln|D| along the contour is compared
    let spec = ContourSpec::default();
    let spread = |d: f64| {
        let r = evans_contour(&system(0.25, d), &spec).unwrap();
        assert_eq!(r.winding, 0);
        let ln: Vec<f64> = r.samples.iter().map(|s| s.log_value.re).collect();
        let max = ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ln.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    };
    let (spread_small, spread_large) = (spread(0.15), spread(0.8));
    assert!(spread_small > spread_large, "{spread_small} vs {spread_large}");
}

#[test]
fn real_axis_scans_find_no_crossing() {
    for (v, d) in [(0.25, 0.15), (0.65, 0.45)] {
        let sys = system(v, d);
        assert_eq!(sys.profile.classification, Classification::Monotone);
        let r = real_axis_scan(&sys, 1e-4, 12.0, 50).unwrap();
        assert!(!r.has_crossing(), "({v}, {d}): {:?}", r.sign_changes);
        assert!(r.min_ln_abs.is_finite());
        assert_eq!(r.lambdas.len(), 50);
    }
}

#[test]
fn phase_portrait_overlay_meets_orbit_at_slope_extremum() {
    let prof = profile(5.0 / 3.0, 0.1, 5.0);
    assert_eq!(prof.classification, Classification::Oscillatory);
    let t = Table::parse(&phase_table(&prof).render()).unwrap();
    assert_eq!(t.kind, TableKind::Phase);
    let w = t.column("v_hat_x").unwrap();
    let phi = t.column("phi").unwrap();
    let k = (0..w.len()).min_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    // the orbit crosses the nullcline w = φ(v) next to the minimum of w
    let gap = |i: usize| w[i] - phi[i];
    assert!(gap(k - 1) * gap(k + 1) <= 0.0, "{} {} {}", gap(k - 1), gap(k), gap(k + 1));
    assert!(validate(&prof).unwrap().argmax_on_nullcline);
}

#[test]
fn contour_file_is_a_closed_curve_with_zero_winding() {
    let r = evans_contour(&system(0.45, 0.45), &ContourSpec::default()).unwrap();
    let t = Table::parse(&contour_table(&r).render()).unwrap();
    let arg = t.column("arg_d").unwrap();
    let n = arg.len();
    let total: f64 = (0..n).map(|k| wrapped(arg[(k + 1) % n] - arg[k])).sum();
    assert!(total.abs() < 1e-9);
    let re = t.column("re_lambda").unwrap();
    let im = t.column("im_lambda").unwrap();
    assert_eq!((re[0], im[0]), (12.0, 0.0));
    assert!((im[1] + im[n - 1]).abs() < 1e-15);
}
