//! Membership in the angular momentum-energy space `S_U` and in its
//! uniform-rotation subset.
//!
//! A state `(J, E)` is admissible iff `E > inf V_J` or `E` equals an attained
//! minimum of `V_J`; equivalently iff `J^2 < sup W_E` or `J^2` equals an
//! attained maximum of `W_E`. Both routes are implemented; the V-route is the
//! primary verdict and the W-route a cross-check.
//!
//! A circular orbit of radius `s` exists iff `U'(s) >= 0`, and then carries
//! `J^2 = s^3 U'(s)` and `E = U(s) + s U'(s) / 2`.

use std::fmt;

use crate::effective::search::{bisect_predicate, bisect_sign, log_grid};
use crate::effective::{
    eval_v, eval_v_prime, eval_w, eval_w_prime, inf_v, sup_w, Bracket, ExtremumReport,
    JEState, SearchError, SearchOptions, BISECT_RTOL,
};
use crate::forcelaw::{AsymTag, EvalError, ForceLaw};

/// Boundary tolerance factor: `tol = REL_TOL * (1 + |E|)` on the V-route and
/// `REL_TOL * (1 + J^2)` on the W-route.
pub const REL_TOL: f64 = 1e-9;
/// Width of the band, in multiples of `tol`, where numeric verdicts may
/// legitimately disagree with closed forms.
pub const BAND_FACTOR: f64 = 10.0;
/// Relative slack on `U'(s) >= 0` so that exact zeros survive rounding.
pub const ROTATION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Yes,
    No,
    BoundaryAttained,
}

impl Membership {
    /// Whether the state belongs to `S_U` at all.
    pub fn is_member(self) -> bool {
        self != Membership::No
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Yes => "member",
            Membership::No => "non-member",
            Membership::BoundaryAttained => "boundary-attained",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    V,
    W,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub member: Membership,
    pub route: Route,
    pub evidence: ExtremumReport,
    /// `E - inf V` on the V-route, `sup W - J^2` on the W-route.
    pub margin: f64,
    pub tol: f64,
}

impl Classification {
    /// Inside the band where the verdict is too close to call against a
    /// closed form.
    pub fn in_band(&self) -> bool {
        self.margin.abs() <= BAND_FACTOR * self.tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub search: SearchOptions,
    pub rel_tol: f64,
}

impl ClassifyOptions {
    pub fn for_law(law: &ForceLaw) -> ClassifyOptions {
        ClassifyOptions { search: SearchOptions::for_law(law), rel_tol: REL_TOL }
    }
}

fn verdict(margin: f64, tol: f64, evidence: &ExtremumReport) -> Membership {
    if margin > tol {
        Membership::Yes
    } else if margin.abs() <= tol && evidence.is_attained() {
        Membership::BoundaryAttained
    } else {
        Membership::No
    }
}

/// V-route membership test.
pub fn classify(
    law: &ForceLaw,
    state: JEState,
    opts: &ClassifyOptions,
) -> Result<Classification, SearchError> {
    let evidence = inf_v(law, state.j, &opts.search)?;
    let margin = state.e - evidence.value;
    let tol = opts.rel_tol * (1.0 + state.e.abs());
    Ok(Classification { member: verdict(margin, tol, &evidence), route: Route::V, evidence, margin, tol })
}

/// W-route membership test.
pub fn classify_via_w(
    law: &ForceLaw,
    state: JEState,
    opts: &ClassifyOptions,
) -> Result<Classification, SearchError> {
    let evidence = sup_w(law, state.e, &opts.search)?;
    let j2 = state.j * state.j;
    let margin = evidence.value - j2;
    let tol = opts.rel_tol * (1.0 + j2);
    Ok(Classification { member: verdict(margin, tol, &evidence), route: Route::W, evidence, margin, tol })
}

/// A circular orbit of radius `s`. `j` is the non-negative root; `-j` is the
/// same orbit traversed the other way.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformRotation {
    pub s: f64,
    pub j: f64,
    pub e: f64,
    pub angular_rate: f64,
}

impl UniformRotation {
    pub fn state(&self) -> JEState {
        JEState::new(self.j, self.e)
    }

    /// Relative residuals of the four characterisations at `s`:
    /// `V'(s) = 0`, `V(s) = E`, `W'(s) = 0`, `W(s) = J^2`.
    pub fn residuals(&self, law: &ForceLaw) -> Result<[f64; 4], EvalError> {
        let s = self.s;
        let (u, du) = (law.u(s)?, law.u_prime(s)?);
        let j2 = self.j * self.j;
        let rel = |value: f64, scale: f64| if scale == 0.0 { value.abs() } else { value.abs() / scale };

        let centrifugal = j2 / (s * s * s);
        let dv = eval_v_prime(law, self.j, s)?;
        let v_minus_e = eval_v(law, self.j, s)? - self.e;
        let dw = eval_w_prime(law, self.e, s)?;
        let w_minus_j2 = eval_w(law, self.e, s)? - j2;
        Ok([
            rel(dv, centrifugal.max(du.abs())),
            rel(v_minus_e, (j2 / (2.0 * s * s)).max(u.abs()).max(self.e.abs())),
            rel(dw, (4.0 * s * self.e.abs()).max(4.0 * s * u.abs()).max(2.0 * s * s * du.abs())),
            rel(w_minus_j2, (2.0 * s * s * self.e.abs()).max(2.0 * s * s * u.abs()).max(j2)),
        ])
    }
}

/// Outcome of asking for a circular orbit at a given radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotationAt {
    Rotation(UniformRotation),
    /// `U'(s) < 0`: the field pushes outward and no circular orbit exists.
    Rejected { s: f64, u_prime: f64 },
}

fn admits_rotation(u: f64, du: f64, s: f64) -> bool {
    du >= -ROTATION_SLACK * (1.0 + u.abs()) / s
}

/// The uniform rotation of radius `s`, if the field allows one there.
pub fn uniform_rotation_at(law: &ForceLaw, s: f64) -> Result<RotationAt, EvalError> {
    let (u, du) = (law.u(s)?, law.u_prime(s)?);
    if !admits_rotation(u, du, s) {
        return Ok(RotationAt::Rejected { s, u_prime: du });
    }
    let j = (s * s * s * du).max(0.0).sqrt();
    Ok(RotationAt::Rotation(UniformRotation {
        s,
        j,
        e: u + 0.5 * s * du,
        angular_rate: j / (s * s),
    }))
}

/// Uniform rotations over `n` log-spaced radii in `[lo, hi]`; radii where
/// the field is repulsive are skipped.
pub fn ur_curve(law: &ForceLaw, lo: f64, hi: f64, n: usize) -> Result<Vec<UniformRotation>, SearchError> {
    Bracket::new(lo, hi).validate()?;
    if n < 2 {
        return Err(SearchError::GridTooSmall(n));
    }
    let mut out = Vec::new();
    for s in log_grid(lo, hi, n) {
        if let RotationAt::Rotation(ur) = uniform_rotation_at(law, s)? {
            out.push(ur);
        }
    }
    Ok(out)
}

/// Critical points of `V_J` on the grid, ascending.
fn critical_points(law: &ForceLaw, j: f64, opts: &SearchOptions) -> Result<Vec<f64>, SearchError> {
    opts.validate()?;
    let grid = opts.grid();
    let j2 = j * j;
    let mut dv = Vec::with_capacity(grid.len());
    for &r in &grid {
        let du = law.u_prime(r)?;
        let centrifugal = j2 / (r * r * r);
        let d = du - centrifugal;
        // Differences at the rounding level of the two terms count as zero.
        dv.push(if d.abs() <= BISECT_RTOL * (centrifugal + du.abs()) { 0.0 } else { d });
    }
    let mut out = Vec::new();
    for i in 0..grid.len() {
        if dv[i] == 0.0 {
            out.push(grid[i]);
        } else if i + 1 < grid.len() && dv[i + 1] != 0.0 && (dv[i] < 0.0) != (dv[i + 1] < 0.0) {
            out.push(bisect_sign(|r| eval_v_prime(law, j, r), grid[i], grid[i + 1], BISECT_RTOL)?);
        }
    }
    Ok(out)
}

/// Every radius `s` on the grid where `V_J'(s) = 0` and `V_J(s) = E` within
/// the V-route tolerance, ascending.
pub fn ur_witnesses(
    law: &ForceLaw,
    state: JEState,
    opts: &ClassifyOptions,
) -> Result<Vec<f64>, SearchError> {
    let tol = opts.rel_tol * (1.0 + state.e.abs());
    let mut out = Vec::new();
    for s in critical_points(law, state.j, &opts.search)? {
        if (eval_v(law, state.j, s)? - state.e).abs() <= tol {
            out.push(s);
        }
    }
    Ok(out)
}

/// Smallest witness radius of a uniform rotation with this state, if any.
pub fn is_uniform_rotation(
    law: &ForceLaw,
    state: JEState,
    opts: &ClassifyOptions,
) -> Result<Option<f64>, SearchError> {
    let tol = opts.rel_tol * (1.0 + state.e.abs());
    for s in critical_points(law, state.j, &opts.search)? {
        if (eval_v(law, state.j, s)? - state.e).abs() <= tol {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Sorted disjoint closed intervals of radii admitting a circular orbit.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RadiusIntervals(pub Vec<(f64, f64)>);

impl RadiusIntervals {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.0.iter().any(|&(a, b)| a <= r && r <= b)
    }
}

/// Radii in the bracket where `U'(r) >= 0`, endpoints refined by bisection.
pub fn allowed_radii(law: &ForceLaw, opts: &SearchOptions) -> Result<RadiusIntervals, SearchError> {
    opts.validate()?;
    let grid = opts.grid();
    let ok = |r: f64| -> Result<bool, EvalError> { Ok(admits_rotation(law.u(r)?, law.u_prime(r)?, r)) };
    let flags = grid.iter().map(|&r| ok(r)).collect::<Result<Vec<bool>, EvalError>>()?;

    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..grid.len() {
        match (start, flags[i]) {
            (None, true) => {
                start = Some(if i == 0 {
                    grid[0]
                } else {
                    bisect_predicate(ok, grid[i - 1], grid[i], BISECT_RTOL)?
                });
            }
            (Some(a), false) => {
                let b = bisect_predicate(ok, grid[i - 1], grid[i], BISECT_RTOL)?;
                out.push((a, b));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        out.push((a, opts.bracket.hi));
    }
    Ok(RadiusIntervals(out))
}

/// Whether `S_U` is the whole `(J, E)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FullPlane {
    EntirePlane,
    NotEntirePlane,
    Undecidable,
}

impl fmt::Display for FullPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FullPlane::EntirePlane => "entire-plane",
            FullPlane::NotEntirePlane => "not-entire-plane",
            FullPlane::Undecidable => "undecidable",
        })
    }
}

/// `S_U = R^2` iff `liminf r^2 U = -inf` at the origin or `liminf U = -inf`
/// at infinity. Decided from the tags alone.
pub fn full_plane(law: &ForceLaw) -> FullPlane {
    let (z, i) = (law.asym_zero(), law.asym_inf());
    if z.is_minus_infinity() || i.is_minus_infinity() {
        FullPlane::EntirePlane
    } else if z == AsymTag::Unknown || i == AsymTag::Unknown {
        FullPlane::Undecidable
    } else {
        FullPlane::NotEntirePlane
    }
}

/// Sampled `r^2 U(r)` towards the origin and `U(r)` towards infinity, one
/// point per decade. Diagnostic only; never feeds [`full_plane`].
#[derive(Clone, Debug, PartialEq)]
pub struct TailSamples {
    pub near_zero: Vec<(f64, f64)>,
    pub near_infinity: Vec<(f64, f64)>,
}

pub fn tail_samples(law: &ForceLaw, bracket: Bracket) -> Result<TailSamples, SearchError> {
    bracket.validate()?;
    let mut near_zero = Vec::new();
    let mut r = 1.0_f64.min(bracket.hi);
    while r >= bracket.lo * (1.0 - 1e-12) {
        near_zero.push((r, r * r * law.u(r)?));
        r /= 10.0;
    }
    let mut near_infinity = Vec::new();
    let mut r = 1.0_f64.max(bracket.lo);
    while r <= bracket.hi * (1.0 + 1e-12) {
        near_infinity.push((r, law.u(r)?));
        r *= 10.0;
    }
    Ok(TailSamples { near_zero, near_infinity })
}
