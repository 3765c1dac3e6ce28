//! Three-stage Lobatto IIIA collocation (the cubic, C¹ Simpson scheme) for
//! the profile boundary-value problem.
//!
//! Unknowns are `(v, w)` at every mesh node. Each interval contributes the
//! two Simpson collocation equations; the system is closed by the phase
//! condition `v(0) = (v₊ + v₋)/2` and by requiring the right end to sit on the
//! stable eigendirection of the saddle. The left state `(v₋, 0)` has a
//! two-dimensional unstable eigenspace, so the left end is free.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{endpoint_linearization, hermite, hermite_derivative, rhs_unchecked, ProfileSolution};
use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::ode::{self, Control, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    /// Minimum node count of a freshly built mesh.
    pub initial_nodes: usize,
    /// Largest spacing of a freshly built mesh.
    pub max_initial_step: f64,
    /// Bound on the collocation residual `|S' - F(S)|` at interior probes.
    pub residual_tol: f64,
    /// Bound on `|v̂(L±) - v±|`.
    pub endpoint_tol: f64,
    pub max_nodes: usize,
    /// Auto-enlargement never pushes `|L±|` past this.
    pub l_cap: f64,
    pub auto_enlarge: bool,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 400,
            max_initial_step: 0.25,
            residual_tol: 1e-8,
            endpoint_tol: 1e-6,
            max_nodes: 400_000,
            l_cap: 400.0,
            auto_enlarge: true,
        }
    }
}

const NEWTON_MAX_ITER: usize = 40;
const CONTINUATION_TOL: f64 = 1e-6;

/// Solves with the default truncation `[-25, 25]` and mesh options.
pub fn solve_profile_default(params: &GasParams) -> Result<ProfileSolution> {
    solve_profile(
        params,
        -super::DEFAULT_HALF_WIDTH,
        super::DEFAULT_HALF_WIDTH,
        &MeshOptions::default(),
    )
}

pub fn solve_profile(
    params: &GasParams,
    l_minus: f64,
    l_plus: f64,
    opts: &MeshOptions,
) -> Result<ProfileSolution> {
    if !(l_minus < 0.0 && l_plus > 0.0) {
        return Err(Error::domain(format!(
            "truncation must satisfy L- < 0 < L+, got [{l_minus}, {l_plus}]"
        )));
    }
    let mut sol = initial_solve(params, l_minus, l_plus, opts)?;
    loop {
        let (el, er) = sol.endpoint_errors;
        if el <= opts.endpoint_tol && er <= opts.endpoint_tol {
            return Ok(sol);
        }
        let (mut lm, mut lp) = (sol.l_minus(), sol.l_plus());
        if el > opts.endpoint_tol {
            lm *= 2.0;
        }
        if er > opts.endpoint_tol {
            lp *= 2.0;
        }
        if !opts.auto_enlarge || -lm > opts.l_cap || lp > opts.l_cap {
            return Err(Error::Truncation {
                left: el,
                right: er,
                l_minus: sol.l_minus(),
                l_plus: sol.l_plus(),
            });
        }
        let guess = extend(&sol, lm, lp, opts.max_initial_step)?;
        sol = refine_and_solve(params, guess, opts.residual_tol, opts)?;
    }
}

/// Working state of the collocation problem.
#[derive(Debug, Clone)]
struct Mesh {
    x: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl Mesh {
    fn zero_index(&self) -> usize {
        self.x
            .iter()
            .position(|&x| x == 0.0)
            .expect("mesh always contains x = 0")
    }
}

fn uniform_grid(l_minus: f64, l_plus: f64, opts: &MeshOptions) -> Vec<f64> {
    let span = l_plus - l_minus;
    let total = opts
        .initial_nodes
        .max((span / opts.max_initial_step).ceil() as usize + 1);
    let n_left = ((total as f64) * (-l_minus / span)).round().max(2.0) as usize;
    let n_right = (total - n_left.min(total - 2)).max(2);
    let mut x: Vec<f64> = (0..n_left)
        .map(|i| l_minus * (1.0 - i as f64 / n_left as f64))
        .collect();
    x.extend((0..=n_right).map(|i| l_plus * i as f64 / n_right as f64));
    x
}

fn tanh_guess(params: &GasParams, x: Vec<f64>) -> Mesh {
    let eps = params.epsilon;
    let mid = 0.5 * (1.0 + params.v_plus);
    let peak = (0..=200)
        .map(|i| params.phi(params.v_plus + eps * i as f64 / 200.0).abs())
        .fold(0.0, f64::max);
    let kappa = (2.0 * peak / eps).max(1e-3);
    let v = x.iter().map(|&x| mid - 0.5 * eps * (kappa * x).tanh()).collect();
    let w = x
        .iter()
        .map(|&x| -0.5 * eps * kappa / (kappa * x).cosh().powi(2))
        .collect();
    Mesh { x, v, w }
}

fn initial_solve(
    params: &GasParams,
    l_minus: f64,
    l_plus: f64,
    opts: &MeshOptions,
) -> Result<ProfileSolution> {
    let guess = tanh_guess(params, uniform_grid(l_minus, l_plus, opts));
    match refine_and_solve(params, guess.clone(), opts.residual_tol, opts) {
        Ok(sol) => Ok(sol),
        Err(Error::NewtonFailed { .. }) => continuation(params, guess, opts),
        Err(e) => Err(e),
    }
}

/// Natural continuation in `d` from the monotone regime.
fn continuation(params: &GasParams, guess: Mesh, opts: &MeshOptions) -> Result<ProfileSolution> {
    let target = params.d;
    let mut d = 0.5 * target.min(params.d_star);
    let mut current = refine_and_solve(&params.with_d(d)?, guess, CONTINUATION_TOL, opts)?;
    let mut ratio: f64 = 1.5;
    while d < target {
        let next = (d * ratio).min(target);
        let tol = if next == target {
            opts.residual_tol
        } else {
            CONTINUATION_TOL
        };
        let start = Mesh {
            x: current.grid.clone(),
            v: current.v_hat.clone(),
            w: current.w_hat.clone(),
        };
        match refine_and_solve(&params.with_d(next)?, start, tol, opts) {
            Ok(sol) => {
                current = sol;
                d = next;
                ratio = (ratio * 1.5).min(4.0);
            }
            Err(Error::NewtonFailed { .. }) if ratio > 1.0005 => ratio = ratio.sqrt(),
            Err(e) => return Err(e),
        }
    }
    Ok(current)
}

/// Extends a solved profile to `[lm, lp]`: the left tail is marched backward
/// with the profile ODE and the right tail follows the saddle's stable decay.
fn extend(sol: &ProfileSolution, lm: f64, lp: f64, step: f64) -> Result<Mesh> {
    let params = sol.params;
    let mut x = Vec::new();
    let mut v = Vec::new();
    let mut w = Vec::new();
    if lm < sol.l_minus() {
        let n = ((sol.l_minus() - lm) / step).ceil() as usize;
        let nodes: Vec<f64> = (0..=n)
            .map(|i| sol.l_minus() - (sol.l_minus() - lm) * i as f64 / n as f64)
            .collect();
        let mut y = Vector2::new(sol.v_hat[0], sol.w_hat[0]);
        let mut tail = vec![(nodes[0], y)];
        for pair in nodes.windows(2) {
            let s = ode::dopri5(
                |_, y: &Vector2<f64>| {
                    let v = y[0].max(1e-12);
                    Vector2::new(y[1], rhs_unchecked(&params, v, y[1]))
                },
                pair[0],
                y,
                pair[1],
                Tolerances::new(1e-12, 1e-10),
                |_, _, _| Control::Continue,
            )?;
            y = s.y;
            tail.push((pair[1], y));
        }
        for &(xi, yi) in tail.iter().skip(1).rev() {
            x.push(xi);
            v.push(yi[0]);
            w.push(yi[1]);
        }
    }
    x.extend_from_slice(&sol.grid);
    v.extend_from_slice(&sol.v_hat);
    w.extend_from_slice(&sol.w_hat);
    if lp > sol.l_plus() {
        let lin = endpoint_linearization(params.v_plus, &params)?;
        let mu = lin.eigenvalues[1].re;
        let (v_end, w_end) = (sol.v_hat[sol.len() - 1], sol.w_hat[sol.len() - 1]);
        let n = ((lp - sol.l_plus()) / step).ceil() as usize;
        for i in 1..=n {
            let xi = sol.l_plus() + (lp - sol.l_plus()) * i as f64 / n as f64;
            let decay = (mu * (xi - sol.l_plus())).exp();
            x.push(xi);
            v.push(params.v_plus + (v_end - params.v_plus) * decay);
            w.push(w_end * decay);
        }
    }
    Ok(Mesh { x, v, w })
}

#[inline]
fn rhs(params: &GasParams, v: f64, w: f64) -> [f64; 2] {
    [w, rhs_unchecked(params, v, w)]
}

#[inline]
fn jacobian(params: &GasParams, v: f64, w: f64) -> [[f64; 2]; 2] {
    let g = rhs_unchecked(params, v, w);
    let dv = params.d * v;
    [[0.0, 1.0], [-params.phi_prime(v) / dv - g / v, 1.0 / dv]]
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

struct Assembly {
    residual: Vec<f64>,
    jacobian: Option<BandMatrix>,
}

/// Left eigenvector of the saddle's unstable mode; its pairing with
/// `y(L₊) - (v₊, 0)` must vanish.
fn right_boundary_functional(params: &GasParams) -> Result<[f64; 2]> {
    let lin = endpoint_linearization(params.v_plus, params)?;
    let mu = lin.eigenvalues[0].re;
    let b = lin.jacobian[(1, 1)];
    let l = [mu - b, 1.0];
    let n = (l[0] * l[0] + l[1] * l[1]).sqrt();
    Ok([l[0] / n, l[1] / n])
}

fn assemble(
    params: &GasParams,
    mesh: &Mesh,
    k0: usize,
    bc: [f64; 2],
    with_jacobian: bool,
) -> Option<Assembly> {
    let n = mesh.x.len() - 1;
    let dim = 2 * n + 2;
    let mut residual = vec![0.0; dim];
    let mut jac = with_jacobian.then(|| BandMatrix::zeros(dim, 2, 3));
    if mesh.v.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut f_prev = rhs(params, mesh.v[0], mesh.w[0]);
    let mut j_prev = jacobian(params, mesh.v[0], mesh.w[0]);
    for i in 0..n {
        let h = mesh.x[i + 1] - mesh.x[i];
        let y0 = [mesh.v[i], mesh.w[i]];
        let y1 = [mesh.v[i + 1], mesh.w[i + 1]];
        let f0 = f_prev;
        let f1 = rhs(params, y1[0], y1[1]);
        let ym = [
            0.5 * (y0[0] + y1[0]) - h / 8.0 * (f1[0] - f0[0]),
            0.5 * (y0[1] + y1[1]) - h / 8.0 * (f1[1] - f0[1]),
        ];
        if !(ym[0] > 0.0) {
            return None;
        }
        let fm = rhs(params, ym[0], ym[1]);
        let row = if i < k0 { 2 * i } else { 2 * i + 1 };
        for c in 0..2 {
            residual[row + c] = y1[c] - y0[c] - h / 6.0 * (f0[c] + 4.0 * fm[c] + f1[c]);
        }
        let j1 = jacobian(params, y1[0], y1[1]);
        if let Some(jac) = jac.as_mut() {
            let jm = jacobian(params, ym[0], ym[1]);
            let mut dm0 = [[0.0; 2]; 2];
            let mut dm1 = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { 0.5 } else { 0.0 };
                    dm0[r][c] = id + h / 8.0 * j_prev[r][c];
                    dm1[r][c] = id - h / 8.0 * j1[r][c];
                }
            }
            let a0 = mat_mul(&jm, &dm0);
            let a1 = mat_mul(&jm, &dm1);
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { 1.0 } else { 0.0 };
                    let d0 = -id - h / 6.0 * (j_prev[r][c] + 4.0 * a0[r][c]);
                    let d1 = id - h / 6.0 * (j1[r][c] + 4.0 * a1[r][c]);
                    jac.set(row + r, 2 * i + c, d0);
                    jac.set(row + r, 2 * i + 2 + c, d1);
                }
            }
        }
        f_prev = f1;
        j_prev = j1;
    }
    let mid = 0.5 * (params.v_plus + params.v_minus);
    residual[2 * k0] = mesh.v[k0] - mid;
    residual[2 * n + 1] = bc[0] * (mesh.v[n] - params.v_plus) + bc[1] * mesh.w[n];
    if let Some(jac) = jac.as_mut() {
        jac.set(2 * k0, 2 * k0, 1.0);
        jac.set(2 * n + 1, 2 * n, bc[0]);
        jac.set(2 * n + 1, 2 * n + 1, bc[1]);
    }
    Some(Assembly {
        residual,
        jacobian: jac,
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn newton(params: &GasParams, mesh: &mut Mesh) -> Result<()> {
    let k0 = mesh.zero_index();
    let bc = right_boundary_functional(params)?;
    let fail = |it: usize, res: f64, mesh: &Mesh| Error::NewtonFailed {
        iterations: it,
        residual: res,
        last_iterate: Some(Box::new(ProfileSolution::from_nodes(
            *params,
            mesh.x.clone(),
            mesh.v.clone(),
            mesh.w.clone(),
            f64::NAN,
        ))),
    };
    let mut last_norm = f64::INFINITY;
    for it in 0..NEWTON_MAX_ITER {
        let Some(asm) = assemble(params, mesh, k0, bc, true) else {
            return Err(fail(it, f64::INFINITY, mesh));
        };
        let norm0 = inf_norm(&asm.residual);
        last_norm = norm0;
        let mut delta: Vec<f64> = asm.residual.iter().map(|r| -r).collect();
        if asm.jacobian.expect("requested").solve(&mut delta).is_none() {
            return Err(fail(it, norm0, mesh));
        }
        let step_norm = inf_norm(&delta);
        let mut t = 1.0;
        loop {
            let trial = Mesh {
                x: mesh.x.clone(),
                v: mesh.v.iter().enumerate().map(|(i, v)| v + t * delta[2 * i]).collect(),
                w: mesh.w.iter().enumerate().map(|(i, w)| w + t * delta[2 * i + 1]).collect(),
            };
            let accept = match assemble(params, &trial, k0, bc, false) {
                Some(a) => {
                    let nrm = inf_norm(&a.residual);
                    nrm <= (1.0 - 0.1 * t) * norm0 || nrm < 1e-13 || (t == 1.0 && step_norm < 1e-9)
                }
                None => false,
            };
            if accept {
                *mesh = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-4 {
                return Err(fail(it, norm0, mesh));
            }
        }
        if t == 1.0 && step_norm < 1e-11 {
            return Ok(());
        }
    }
    Err(fail(NEWTON_MAX_ITER, last_norm, mesh))
}

/// Per-interval continuous residual `max |S'(x) - F(S(x))|` at the quarter
/// points, where `S` is the collocation cubic.
fn interval_residuals(params: &GasParams, mesh: &Mesh) -> Vec<f64> {
    continuous_residuals(params, &mesh.x, &mesh.v, &mesh.w)
}

pub(super) fn continuous_residuals(params: &GasParams, x: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let g: Vec<f64> = (0..=n).map(|i| rhs_unchecked(params, v[i], w[i])).collect();
    (0..n)
        .map(|i| {
            let h = x[i + 1] - x[i];
            [0.25, 0.75]
                .iter()
                .map(|&t| {
                    let sv = hermite(v[i], w[i], v[i + 1], w[i + 1], h, t);
                    let sw = hermite(w[i], g[i], w[i + 1], g[i + 1], h, t);
                    let dsv = hermite_derivative(v[i], w[i], v[i + 1], w[i + 1], h, t);
                    let dsw = hermite_derivative(w[i], g[i], w[i + 1], g[i + 1], h, t);
                    let r1 = (dsv - sw).abs();
                    let r2 = if sv > 0.0 {
                        (dsw - rhs_unchecked(params, sv, sw)).abs()
                    } else {
                        f64::INFINITY
                    };
                    r1.max(r2)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn refine_mesh(params: &GasParams, mesh: &Mesh, res: &[f64], tol: f64) -> Mesh {
    let n = mesh.x.len() - 1;
    let g: Vec<f64> = (0..=n)
        .map(|i| rhs_unchecked(params, mesh.v[i], mesh.w[i]))
        .collect();
    let mut out = Mesh {
        x: Vec::with_capacity(2 * n),
        v: Vec::with_capacity(2 * n),
        w: Vec::with_capacity(2 * n),
    };
    for i in 0..n {
        out.x.push(mesh.x[i]);
        out.v.push(mesh.v[i]);
        out.w.push(mesh.w[i]);
        if res[i] > tol {
            let k = if res[i].is_finite() {
                ((res[i] / tol).cbrt() * 1.25).ceil().clamp(2.0, 8.0) as usize
            } else {
                2
            };
            let h = mesh.x[i + 1] - mesh.x[i];
            for j in 1..k {
                let t = j as f64 / k as f64;
                out.x.push(mesh.x[i] + t * h);
                out.v
                    .push(hermite(mesh.v[i], mesh.w[i], mesh.v[i + 1], mesh.w[i + 1], h, t));
                out.w.push(hermite(mesh.w[i], g[i], mesh.w[i + 1], g[i + 1], h, t));
            }
        }
    }
    out.x.push(mesh.x[n]);
    out.v.push(mesh.v[n]);
    out.w.push(mesh.w[n]);
    out
}

fn refine_and_solve(
    params: &GasParams,
    mut mesh: Mesh,
    tol: f64,
    opts: &MeshOptions,
) -> Result<ProfileSolution> {
    loop {
        newton(params, &mut mesh)?;
        let res = interval_residuals(params, &mesh);
        let rmax = res.iter().copied().fold(0.0, f64::max);
        if rmax <= tol {
            return Ok(ProfileSolution::from_nodes(
                *params, mesh.x, mesh.v, mesh.w, rmax,
            ));
        }
        if mesh.x.len() >= opts.max_nodes {
            return Err(Error::MeshExhausted {
                residual: rmax,
                nodes: mesh.x.len(),
            });
        }
        mesh = refine_mesh(params, &mesh, &res, tol);
    }
}
