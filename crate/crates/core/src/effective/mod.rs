//! Effective force function `V_J(r) = J^2/(2 r^2) + U(r)` and effective
//! angular momentum `W_E(r) = 2 r^2 (E - U(r))`, with the infimum/supremum
//! searches the membership test is built on.
//!
//! The searches sample a log-spaced grid over a finite bracket, refine every
//! interior local extremum by golden-section, then polish the refined point
//! with a bisection on the exact derivative. When the extremum sits on a
//! bracket edge the report says so; it never claims attainment it did not see.

pub mod search;

use thiserror::Error;

use crate::forcelaw::{Builtin, EvalError, ForceLaw};
use search::{bisect_sign, golden_section, log_grid};

/// A pair (angular momentum, total energy), both per unit mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JEState {
    pub j: f64,
    pub e: f64,
}

impl JEState {
    pub fn new(j: f64, e: f64) -> JEState {
        JEState { j, e }
    }
}

/// Closed search interval of radii.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub const fn new(lo: f64, hi: f64) -> Bracket {
        Bracket { lo, hi }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite() {
            Ok(())
        } else {
            Err(SearchError::InvalidBracket { lo: self.lo, hi: self.hi })
        }
    }
}

/// Grid settings for the extremum searches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub bracket: Bracket,
    pub n_grid: usize,
}

pub const DEFAULT_BRACKET: Bracket = Bracket::new(1e-6, 1e6);
pub const DEFAULT_GRID: usize = 2048;
pub const MIN_GRID: usize = 64;
/// Grid for laws that oscillate without bound near the origin.
pub const OSCILLATORY_BRACKET: Bracket = Bracket::new(1e-3, 1e6);
pub const OSCILLATORY_GRID: usize = 65536;

/// Relative radius tolerance of the golden-section refinement.
pub const GOLDEN_RTOL: f64 = 1e-10;
/// Relative radius tolerance of derivative bisection.
pub const BISECT_RTOL: f64 = 1e-12;
/// Edge-versus-centre spread above which a sampled edge counts as unbounded.
pub const DYNAMIC_RANGE: f64 = 1e12;

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions { bracket: DEFAULT_BRACKET, n_grid: DEFAULT_GRID }
    }
}

impl SearchOptions {
    /// Defaults, with the dense grid for `q sin(1/r)`.
    pub fn for_law(law: &ForceLaw) -> SearchOptions {
        match law.builtin_family() {
            Some(Builtin::Oscillatory { .. }) => {
                SearchOptions { bracket: OSCILLATORY_BRACKET, n_grid: OSCILLATORY_GRID }
            }
            _ => SearchOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        self.bracket.validate()?;
        if self.n_grid < MIN_GRID {
            return Err(SearchError::GridTooSmall(self.n_grid));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.bracket.lo, self.bracket.hi, self.n_grid)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid bracket [{lo}, {hi}]: need 0 < lo < hi < inf")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("grid of {0} points is too coarse (minimum {MIN_GRID})")]
    GridTooSmall(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How an infimum (or supremum) was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumKind {
    /// Refined interior local extremum.
    AttainedInterior,
    /// Flat stretch of the grid where the derivative vanishes exactly.
    AttainedAtCriticalPoint,
    /// Approached at the small-radius edge of the bracket, not attained.
    LimitAtZero,
    /// Approached at the large-radius edge of the bracket, not attained.
    LimitAtInfinity,
    Unbounded,
}

/// Whether a verdict follows from the law's asymptotic tags or from sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Proof,
    Evidence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremumReport {
    pub kind: ExtremumKind,
    /// Extremal value; infinite exactly when `kind` is `Unbounded`.
    pub value: f64,
    /// Radius of the extremum when attained.
    pub argmin_r: Option<f64>,
    pub bracket: Bracket,
    /// Grid points sampled (0 when the tags decided).
    pub samples: usize,
    pub grade: Grade,
}

impl ExtremumReport {
    pub fn is_attained(&self) -> bool {
        matches!(self.kind, ExtremumKind::AttainedInterior | ExtremumKind::AttainedAtCriticalPoint)
    }

    fn unbounded_by_tags(bracket: Bracket, sign: f64) -> ExtremumReport {
        ExtremumReport {
            kind: ExtremumKind::Unbounded,
            value: sign * f64::INFINITY,
            argmin_r: None,
            bracket,
            samples: 0,
            grade: Grade::Proof,
        }
    }

    fn negated(mut self) -> ExtremumReport {
        self.value = -self.value;
        self
    }
}

/// `V_J(r) = J^2 / (2 r^2) + U(r)`.
pub fn eval_v(law: &ForceLaw, j: f64, r: f64) -> Result<f64, EvalError> {
    Ok(j * j / (2.0 * r * r) + law.u(r)?)
}

/// `V_J'(r) = -J^2 / r^3 + U'(r)`.
pub fn eval_v_prime(law: &ForceLaw, j: f64, r: f64) -> Result<f64, EvalError> {
    Ok(-j * j / (r * r * r) + law.u_prime(r)?)
}

/// `W_E(r) = 2 r^2 (E - U(r))`.
pub fn eval_w(law: &ForceLaw, e: f64, r: f64) -> Result<f64, EvalError> {
    Ok(2.0 * r * r * (e - law.u(r)?))
}

/// `W_E'(r) = 4 r (E - U(r)) - 2 r^2 U'(r)`.
pub fn eval_w_prime(law: &ForceLaw, e: f64, r: f64) -> Result<f64, EvalError> {
    Ok(4.0 * r * (e - law.u(r)?) - 2.0 * r * r * law.u_prime(r)?)
}

/// Either asymptotic tag forces `inf V = -inf` and `sup W = +inf`.
fn tags_force_unbounded(law: &ForceLaw) -> bool {
    law.asym_zero().is_minus_infinity() || law.asym_inf().is_minus_infinity()
}

/// Infimum of `V_J` over the bracket.
pub fn inf_v(law: &ForceLaw, j: f64, opts: &SearchOptions) -> Result<ExtremumReport, SearchError> {
    opts.validate()?;
    if tags_force_unbounded(law) {
        return Ok(ExtremumReport::unbounded_by_tags(opts.bracket, -1.0));
    }
    minimize(|r| eval_v(law, j, r), |r| eval_v_prime(law, j, r), opts)
}

/// Supremum of `W_E` over the bracket.
pub fn sup_w(law: &ForceLaw, e: f64, opts: &SearchOptions) -> Result<ExtremumReport, SearchError> {
    opts.validate()?;
    if tags_force_unbounded(law) {
        return Ok(ExtremumReport::unbounded_by_tags(opts.bracket, 1.0));
    }
    let report = minimize(
        |r| Ok(-eval_w(law, e, r)?),
        |r| Ok(-eval_w_prime(law, e, r)?),
        opts,
    )?;
    Ok(report.negated())
}

fn tie(v: f64) -> f64 {
    1e-13 * (1.0 + v.abs())
}

struct Candidate {
    r: f64,
    value: f64,
    kind: ExtremumKind,
}

/// Grid search plus refinement for the infimum of `f` on the bracket.
fn minimize<F, D>(f: F, df: D, opts: &SearchOptions) -> Result<ExtremumReport, SearchError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
    D: Fn(f64) -> Result<f64, EvalError>,
{
    let grid = opts.grid();
    let n = grid.len();
    let vals = grid.iter().map(|&r| f(r)).collect::<Result<Vec<f64>, EvalError>>()?;

    let mut best: Option<Candidate> = None;
    for i in 1..n - 1 {
        let (prev, here, next) = (vals[i - 1], vals[i], vals[i + 1]);
        if here > prev || here > next {
            continue;
        }
        // Interior plateau points after the first are the same minimum.
        if i >= 2 && here == prev {
            continue;
        }
        let cand = if (here == prev || here == next) && df(grid[i])? == 0.0 {
            Candidate { r: grid[i], value: here, kind: ExtremumKind::AttainedAtCriticalPoint }
        } else {
            let (r, value) = refine(&f, &df, grid[i - 1], grid[i + 1])?;
            Candidate { r, value, kind: ExtremumKind::AttainedInterior }
        };
        match &best {
            Some(b) if cand.value >= b.value - tie(b.value) => {}
            _ => best = Some(cand),
        }
    }

    let (edge_value, edge_kind) = if vals[0] <= vals[n - 1] {
        (vals[0], ExtremumKind::LimitAtZero)
    } else {
        (vals[n - 1], ExtremumKind::LimitAtInfinity)
    };

    if let Some(b) = best {
        if b.value <= edge_value + tie(edge_value) {
            return Ok(ExtremumReport {
                kind: b.kind,
                value: b.value,
                argmin_r: Some(b.r),
                bracket: opts.bracket,
                samples: n,
                grade: Grade::Evidence,
            });
        }
    }

    let centre = vals[n / 2];
    let (kind, value) = if centre - edge_value > DYNAMIC_RANGE * (1.0 + centre.abs()) {
        (ExtremumKind::Unbounded, f64::NEG_INFINITY)
    } else {
        (edge_kind, edge_value)
    };
    Ok(ExtremumReport {
        kind,
        value,
        argmin_r: None,
        bracket: opts.bracket,
        samples: n,
        grade: Grade::Evidence,
    })
}

/// Golden-section on `[a, b]`, then a derivative bisection around the result
/// when the derivative changes sign there.
fn refine<F, D>(f: &F, df: &D, a: f64, b: f64) -> Result<(f64, f64), EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
    D: Fn(f64) -> Result<f64, EvalError>,
{
    let (x, fx) = golden_section(f, a, b, GOLDEN_RTOL)?;
    let lo = (x * (1.0 - 1e-6)).max(a);
    let hi = (x * (1.0 + 1e-6)).min(b);
    let (dlo, dhi) = (df(lo)?, df(hi)?);
    if dlo < 0.0 && dhi > 0.0 {
        let xp = bisect_sign(df, lo, hi, BISECT_RTOL)?;
        let fp = f(xp)?;
        if fp <= fx + 1e-12 * (1.0 + fx.abs()) {
            return Ok((xp, fp));
        }
    }
    Ok((x, fx))
}
