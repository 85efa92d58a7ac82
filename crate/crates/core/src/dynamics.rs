//! Planar motion under a central force, integrated in the first-order form
//! `r' = v`, `v' = J^2/r^3 - U'(r)`, `phi' = J/r^2` with `J` held fixed.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::effective::{eval_v, eval_w};
use crate::forcelaw::{EvalError, ForceLaw};

pub const R_MIN_GUARD: f64 = 1e-9;
pub const R_MAX_GUARD: f64 = 1e9;
/// Relative tolerance of [`check_trajectory_bounds`].
pub const TRAJECTORY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid initial condition: {0}")]
    InvalidInit(&'static str),
    #[error("initial state: {0}")]
    Eval(#[from] EvalError),
    #[error("writing trace: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialConditions {
    pub r0: f64,
    pub r_dot0: f64,
    pub phi0: f64,
    pub j: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitState {
    pub t: f64,
    pub r: f64,
    pub r_dot: f64,
    pub phi: f64,
}

/// How a simulation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// `r` fell below [`R_MIN_GUARD`].
    Collapse { t: f64, r: f64 },
    /// `r` rose above [`R_MAX_GUARD`].
    Escape { t: f64, r: f64 },
    Eval { t: f64, error: EvalError },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::Collapse { t, r } => write!(f, "collapse to centre at t = {t} (r = {r:e})"),
            Termination::Escape { t, r } => write!(f, "escape beyond guard at t = {t} (r = {r:e})"),
            Termination::Eval { t, error } => write!(f, "evaluation failed at t = {t}: {error}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub states: Vec<OrbitState>,
    pub j0: f64,
    pub e0: f64,
    /// Per-sample `r^2 phi' - J0`, with `phi'` from finite differences.
    pub j_resid: Vec<f64>,
    /// Per-sample `E(t) - E0`.
    pub e_resid: Vec<f64>,
    pub max_j_drift: f64,
    pub max_e_drift: f64,
    pub termination: Termination,
}

fn energy(law: &ForceLaw, j: f64, r: f64, v: f64) -> Result<f64, EvalError> {
    Ok(0.5 * v * v + eval_v(law, j, r)?)
}

enum StepFault {
    Guard(f64),
    Eval(EvalError),
}

fn rhs(law: &ForceLaw, j: f64, r: f64, v: f64) -> Result<[f64; 3], StepFault> {
    if !(r > R_MIN_GUARD && r < R_MAX_GUARD) {
        return Err(StepFault::Guard(r));
    }
    let du = law.u_prime(r).map_err(StepFault::Eval)?;
    let r2 = r * r;
    Ok([v, j * j / (r2 * r) - du, j / r2])
}

fn rk4_step(law: &ForceLaw, j: f64, y: [f64; 3], h: f64) -> Result<[f64; 3], StepFault> {
    let at = |k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1]];
    let k1 = rhs(law, j, y[0], y[1])?;
    let [r, v] = at(k1, 0.5 * h);
    let k2 = rhs(law, j, r, v)?;
    let [r, v] = at(k2, 0.5 * h);
    let k3 = rhs(law, j, r, v)?;
    let [r, v] = at(k3, h);
    let k4 = rhs(law, j, r, v)?;
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Classical fixed-step RK4 from `init` up to `t_end`. The trace holds
/// every step; leaving the guard radii or failing to evaluate `U'` ends
/// the run early with the corresponding [`Termination`].
pub fn simulate(
    law: &ForceLaw,
    init: InitialConditions,
    t_end: f64,
    dt: f64,
) -> Result<OrbitTrace, DynamicsError> {
    let InitialConditions { r0, r_dot0, phi0, j } = init;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(DynamicsError::InvalidInit("r0 must be positive and finite"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidInit("dt must be positive"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(DynamicsError::InvalidInit("t_end must be positive"));
    }
    if ![r_dot0, phi0, j].iter().all(|x| x.is_finite()) {
        return Err(DynamicsError::InvalidInit("r_dot0, phi0 and J must be finite"));
    }
    if !(r0 > R_MIN_GUARD && r0 < R_MAX_GUARD) {
        return Err(DynamicsError::InvalidInit("r0 outside the guard radii"));
    }
    let e0 = energy(law, j, r0, r_dot0)?;

    let n_steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(OrbitState { t: 0.0, r: r0, r_dot: r_dot0, phi: phi0 });
    let mut y = [r0, r_dot0, phi0];
    let mut termination = Termination::Completed;
    for i in 1..=n_steps {
        let t_prev = (i - 1) as f64 * dt;
        let t = (i as f64 * dt).min(t_end);
        match rk4_step(law, j, y, t - t_prev) {
            Ok(next) if next.iter().all(|x| x.is_finite()) => y = next,
            Ok(next) => {
                termination = Termination::Eval { t, error: EvalError::NonFinite { r: next[0] } };
                break;
            }
            Err(StepFault::Guard(r)) if r >= R_MAX_GUARD => {
                termination = Termination::Escape { t: t_prev, r };
                break;
            }
            Err(StepFault::Guard(r)) => {
                termination = Termination::Collapse { t: t_prev, r };
                break;
            }
            Err(StepFault::Eval(error)) => {
                termination = Termination::Eval { t: t_prev, error };
                break;
            }
        }
        if y[0] <= R_MIN_GUARD {
            termination = Termination::Collapse { t, r: y[0] };
            break;
        }
        if y[0] >= R_MAX_GUARD {
            termination = Termination::Escape { t, r: y[0] };
            break;
        }
        states.push(OrbitState { t, r: y[0], r_dot: y[1], phi: y[2] });
    }

    let mut trace = OrbitTrace {
        states,
        j0: j,
        e0,
        j_resid: Vec::new(),
        e_resid: Vec::new(),
        max_j_drift: 0.0,
        max_e_drift: 0.0,
        termination,
    };
    let (jr, er) = residual_series(&trace.states, law, j, e0);
    trace.max_j_drift = max_abs(&jr);
    trace.max_e_drift = max_abs(&er);
    trace.j_resid = jr;
    trace.e_resid = er;
    Ok(trace)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `phi'` at every sample: central differences inside, second-order
/// one-sided differences at the ends.
fn phi_rate(states: &[OrbitState]) -> Vec<f64> {
    let n = states.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let d = (states[1].phi - states[0].phi) / (states[1].t - states[0].t);
            vec![d, d]
        }
        _ => (0..n)
            .map(|i| {
                let (a, b, c) = if i == 0 {
                    (0, 1, 2)
                } else if i == n - 1 {
                    (n - 3, n - 2, n - 1)
                } else {
                    (i - 1, i, i + 1)
                };
                let (sa, sb, sc) = (&states[a], &states[b], &states[c]);
                let x = states[i].t;
                // Derivative at x of the quadratic through the three samples.
                let la = (2.0 * x - sb.t - sc.t) / ((sa.t - sb.t) * (sa.t - sc.t));
                let lb = (2.0 * x - sa.t - sc.t) / ((sb.t - sa.t) * (sb.t - sc.t));
                let lc = (2.0 * x - sa.t - sb.t) / ((sc.t - sa.t) * (sc.t - sb.t));
                sa.phi * la + sb.phi * lb + sc.phi * lc
            })
            .collect(),
    }
}

fn residual_series(states: &[OrbitState], law: &ForceLaw, j0: f64, e0: f64) -> (Vec<f64>, Vec<f64>) {
    let rates = phi_rate(states);
    let jr = states
        .iter()
        .zip(&rates)
        .map(|(s, w)| if j0 == 0.0 && *w == 0.0 { 0.0 } else { s.r * s.r * w - j0 })
        .collect();
    let er = states
        .iter()
        .map(|s| energy(law, j0, s.r, s.r_dot).map_or(f64::NAN, |e| e - e0))
        .collect();
    (jr, er)
}

/// Recomputed conservation residuals of a trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticReport {
    pub max_j_resid: f64,
    pub max_e_resid: f64,
}

/// Reconstruct `phi'` by finite differences and report the largest
/// deviations of `r^2 phi'` from `J0` and of the energy from `E0`.
pub fn kinetic_check(trace: &OrbitTrace, law: &ForceLaw) -> KineticReport {
    let (jr, er) = residual_series(&trace.states, law, trace.j0, trace.e0);
    KineticReport { max_j_resid: max_abs(&jr), max_e_resid: max_abs(&er) }
}

/// The sample where the motion inequalities fail worst.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub t: f64,
    pub r: f64,
    /// `V_J(r) - E`, positive when violated.
    pub v_excess: f64,
    /// `J^2 - W_E(r)`, positive when violated.
    pub w_deficit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryReport {
    pub samples: usize,
    pub violations: usize,
    pub tol: f64,
    pub worst: Option<Violation>,
}

/// Check `V_J(r(t)) <= E + tol` and `W_E(r(t)) >= J^2 - tol` at every
/// sample, `tol = 1e-6 (1 + |E|)`. Samples where `U` fails to evaluate
/// count as violations.
pub fn check_trajectory_bounds(trace: &OrbitTrace, law: &ForceLaw, j: f64, e: f64) -> TrajectoryReport {
    let tol = TRAJECTORY_TOL * (1.0 + e.abs());
    let mut report = TrajectoryReport { samples: trace.states.len(), violations: 0, tol, worst: None };
    let mut worst_amount = f64::NEG_INFINITY;
    for (index, s) in trace.states.iter().enumerate() {
        let v_excess = eval_v(law, j, s.r).map_or(f64::INFINITY, |v| v - e);
        let w_deficit = eval_w(law, e, s.r).map_or(f64::INFINITY, |w| j * j - w);
        let amount = v_excess.max(w_deficit);
        if amount > tol || amount.is_nan() {
            report.violations += 1;
            if amount.is_nan() || amount > worst_amount {
                worst_amount = amount;
                report.worst = Some(Violation { index, t: s.t, r: s.r, v_excess, w_deficit });
            }
        }
    }
    report
}

/// CSV with header `t,r,r_dot,phi,J_resid,E_resid`, 17 significant digits.
pub fn write_trace_csv<W: Write>(trace: &OrbitTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "t,r,r_dot,phi,J_resid,E_resid")?;
    for ((s, jr), er) in trace.states.iter().zip(&trace.j_resid).zip(&trace.e_resid) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.r, s.r_dot, s.phi, jr, er
        )?;
    }
    out.flush()
}

pub fn save_trace_csv(trace: &OrbitTrace, path: &Path) -> Result<(), DynamicsError> {
    let file = std::fs::File::create(path)?;
    write_trace_csv(trace, io::BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcelaw::Builtin;

    fn law(b: Builtin) -> ForceLaw {
        ForceLaw::from_builtin(b)
    }

    fn init(r0: f64, r_dot0: f64, j: f64) -> InitialConditions {
        InitialConditions { r0, r_dot0, phi0: 0.0, j }
    }

    #[test]
    fn circular_gravitational_orbit_stays_put() {
        let g = law(Builtin::Gravitational { k: 1.0 });
        let tr = simulate(&g, init(1.0, 0.0, 1.0), 100.0, 1e-3).unwrap();
        assert!(tr.termination.is_completed());
        assert_eq!(tr.states.len(), 100_001);
        assert!(tr.states.iter().all(|s| (s.r - 1.0).abs() <= 1e-6));
        let k = kinetic_check(&tr, &g);
        assert!(k.max_j_resid <= 1e-6 && k.max_e_resid <= 1e-6, "{k:?}");
        let p = check_trajectory_bounds(&tr, &g, 1.0, -0.5);
        assert_eq!(p.violations, 0);
        // phi advances at rate 1.
        assert!((tr.states.last().unwrap().phi - 100.0).abs() < 1e-6);
    }

    #[test]
    fn free_radial_motion() {
        let z = law(Builtin::Zero);
        let tr = simulate(&z, init(1.0, 1.0, 0.0), 10.0, 1e-2).unwrap();
        for s in &tr.states {
            assert!((s.r - (1.0 + s.t)).abs() <= 1e-9);
            assert_eq!(s.phi, 0.0);
        }
        assert_eq!(kinetic_check(&tr, &z).max_j_resid, 0.0);
    }

    #[test]
    fn elliptic_energy_drift() {
        let g = law(Builtin::Gravitational { k: 1.0 });
        let tr = simulate(&g, init(2.0, 0.0, 1.0), 50.0, 1e-3).unwrap();
        assert_eq!(tr.e0, -0.375);
        assert!(tr.max_e_drift <= 1e-8, "{}", tr.max_e_drift);
        assert_eq!(check_trajectory_bounds(&tr, &g, 1.0, -0.375).violations, 0);
    }

    #[test]
    fn corrupted_sample_is_reported() {
        let g = law(Builtin::Gravitational { k: 1.0 });
        let mut tr = simulate(&g, init(2.0, 0.0, 1.0), 5.0, 1e-2).unwrap();
        assert_eq!(check_trajectory_bounds(&tr, &g, 1.0, -0.375).violations, 0);
        // Near pericentre (r ~ 2/3) halving r pushes V_J well above E.
        let (idx, _) = tr
            .states
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.r.total_cmp(&b.1.r))
            .unwrap();
        tr.states[idx].r *= 0.5;
        let p = check_trajectory_bounds(&tr, &g, 1.0, -0.375);
        assert_eq!(p.violations, 1);
        assert_eq!(p.worst.unwrap().index, idx);
    }

    #[test]
    fn collapse_and_escape_are_typed() {
        // Radial infall under gravity reaches the centre.
        let g = law(Builtin::Gravitational { k: 1.0 });
        let tr = simulate(&g, init(1.0, 0.0, 0.0), 10.0, 1e-3).unwrap();
        assert!(matches!(tr.termination, Termination::Collapse { .. }), "{}", tr.termination);
        assert!(tr.states.iter().all(|s| s.r > 0.0));
        // Repulsive elastic force drives r up exponentially.
        let re = law(Builtin::RepulsiveElastic { k: 1.0 });
        let tr = simulate(&re, init(1.0, 0.0, 0.0), 100.0, 1e-2).unwrap();
        assert!(matches!(tr.termination, Termination::Escape { .. }), "{}", tr.termination);
    }

    #[test]
    fn rejects_bad_input() {
        let g = law(Builtin::Gravitational { k: 1.0 });
        assert!(simulate(&g, init(0.0, 0.0, 1.0), 1.0, 1e-3).is_err());
        assert!(simulate(&g, init(1.0, 0.0, 1.0), 1.0, 0.0).is_err());
        assert!(simulate(&g, init(1.0, 0.0, 1.0), -1.0, 1e-3).is_err());
    }

    #[test]
    fn csv_layout() {
        let z = law(Builtin::Zero);
        let tr = simulate(&z, init(1.0, 1.0, 0.0), 0.5, 0.25).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,r,r_dot,phi,J_resid,E_resid");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("5.0000000000000000e-1,1.5000000000000000e0,"));
    }
}
