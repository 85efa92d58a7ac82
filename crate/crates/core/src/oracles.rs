//! Closed-form admissible sets for the classical force laws, used as ground
//! truth for the numeric engine.
//!
//! Comparisons on the closed-form side are exact: all fuzziness belongs to
//! the numeric side and is absorbed by its boundary band. Two cases are not
//! closed-form and are computed by a sweep in `x = 1/r`, independent of the
//! engine's log-grid search:
//!
//! * `q sin(1/r)`, `J != 0`: `inf V_J` is the lowest critical value of
//!   `f(x) = J^2 x^2 / 2 + q sin x`, or the limit 0 as `x -> 0`;
//! * `q sin(1/r)` uniform rotations: the parametric curve
//!   `J^2 = -q s cos(1/s)`, `E = q sin(1/s) - q cos(1/s) / (2 s)`.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::effective::search::bisect_sign;
use crate::effective::{JEState, SearchError};
use crate::forcelaw::{Builtin, ForceLaw};
use crate::space::{classify, classify_via_w, ClassifyOptions, Membership};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("parameter {param} = {value} violates {constraint}")]
    InvalidParameter {
        param: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("unknown law case '{0}'")]
    UnknownCase(String),
    #[error("law case '{case}' needs --{param}")]
    MissingParameter { case: String, param: &'static str },
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A force law with a known admissible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LawCase {
    Isolated,
    Constant { k: f64 },
    Gravitational { k: f64 },
    InverseSquare { k: f64 },
    Hooke { k: f64 },
    RepulsiveElastic { k: f64 },
    GravityPlusInverseSquare { k: f64, q: f64 },
    Power { k: f64, n: f64 },
    Oscillatory { q: f64 },
}

/// Case ids accepted by [`LawCase::from_id`], with their law names.
pub const CASE_IDS: [(&str, &str); 8] = [
    ("4.1", "zero (or constant with k)"),
    ("4.2", "gravitational"),
    ("4.3", "inverse_square"),
    ("4.4", "hooke"),
    ("4.5", "repulsive_elastic"),
    ("4.6", "gravity_plus_inverse_square"),
    ("4.7", "power"),
    ("4.8", "oscillatory"),
];

fn positive(param: &'static str, value: f64) -> Result<(), OracleError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(OracleError::InvalidParameter { param, value, constraint: "> 0" })
    }
}

impl LawCase {
    /// Resolve a case id (`"4.2"`) or law name (`"gravitational"`) with the
    /// parameters the case needs.
    pub fn from_id(
        id: &str,
        k: Option<f64>,
        q: Option<f64>,
        n: Option<f64>,
    ) -> Result<LawCase, OracleError> {
        let need = |v: Option<f64>, param: &'static str| {
            v.ok_or_else(|| OracleError::MissingParameter { case: id.to_string(), param })
        };
        let case = match id {
            "4.1" | "zero" | "isolated" => match k {
                Some(k) => LawCase::Constant { k },
                None => LawCase::Isolated,
            },
            "constant" => LawCase::Constant { k: need(k, "k")? },
            "4.2" | "gravitational" => LawCase::Gravitational { k: need(k, "k")? },
            "4.3" | "inverse_square" => LawCase::InverseSquare { k: need(k, "k")? },
            "4.4" | "hooke" => LawCase::Hooke { k: need(k, "k")? },
            "4.5" | "repulsive_elastic" => LawCase::RepulsiveElastic { k: need(k, "k")? },
            "4.6" | "gravity_plus_inverse_square" => {
                LawCase::GravityPlusInverseSquare { k: need(k, "k")?, q: need(q, "q")? }
            }
            "4.7" | "power" => LawCase::Power { k: need(k, "k")?, n: need(n, "n")? },
            "4.8" | "oscillatory" => LawCase::Oscillatory { q: need(q, "q")? },
            other => return Err(OracleError::UnknownCase(other.to_string())),
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        match *self {
            LawCase::Isolated => Ok(()),
            LawCase::Constant { k } if k.is_finite() => Ok(()),
            LawCase::Constant { k } => {
                Err(OracleError::InvalidParameter { param: "k", value: k, constraint: "finite" })
            }
            LawCase::Gravitational { k }
            | LawCase::InverseSquare { k }
            | LawCase::Hooke { k }
            | LawCase::RepulsiveElastic { k } => positive("k", k),
            LawCase::GravityPlusInverseSquare { k, q } => positive("k", k).and(positive("q", q)),
            LawCase::Power { k, n } => positive("k", k).and(positive("n", n)),
            LawCase::Oscillatory { q } => positive("q", q),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            LawCase::Isolated | LawCase::Constant { .. } => "4.1",
            LawCase::Gravitational { .. } => "4.2",
            LawCase::InverseSquare { .. } => "4.3",
            LawCase::Hooke { .. } => "4.4",
            LawCase::RepulsiveElastic { .. } => "4.5",
            LawCase::GravityPlusInverseSquare { .. } => "4.6",
            LawCase::Power { .. } => "4.7",
            LawCase::Oscillatory { .. } => "4.8",
        }
    }

    pub fn builtin(&self) -> Builtin {
        match *self {
            LawCase::Isolated => Builtin::Zero,
            LawCase::Constant { k } => Builtin::Constant { k },
            LawCase::Gravitational { k } => Builtin::Gravitational { k },
            LawCase::InverseSquare { k } => Builtin::InverseSquare { k },
            LawCase::Hooke { k } => Builtin::Hooke { k },
            LawCase::RepulsiveElastic { k } => Builtin::RepulsiveElastic { k },
            LawCase::GravityPlusInverseSquare { k, q } => Builtin::GravityPlusInverseSquare { k, q },
            LawCase::Power { k, n } => Builtin::Power { k, n },
            LawCase::Oscillatory { q } => Builtin::Oscillatory { q },
        }
    }

    pub fn force_law(&self) -> ForceLaw {
        ForceLaw::from_builtin(self.builtin())
    }
}

impl fmt::Display for LawCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id(), self.force_law())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleVerdict {
    pub in_space: bool,
    pub in_ur: bool,
    pub case: LawCase,
}

/// Closed-form verdict for `(J, E)`.
pub fn oracle(case: LawCase, j: f64, e: f64) -> Result<OracleVerdict, OracleError> {
    case.validate()?;
    Ok(OracleVerdict {
        in_space: in_space(case, j, e),
        in_ur: ur_within(case, j, e, 0.0)?,
        case,
    })
}

fn in_space(case: LawCase, j: f64, e: f64) -> bool {
    let j2 = j * j;
    match case {
        LawCase::Isolated => e > 0.0 || (j == 0.0 && e == 0.0),
        // The isolated-particle set moved up by k.
        LawCase::Constant { k } => e > k || (j == 0.0 && e == k),
        LawCase::Gravitational { k } => e * j2 >= -k * k / 2.0,
        LawCase::InverseSquare { k } => inverse_square_in_space(k, j2, e),
        LawCase::Hooke { k } => e >= k.sqrt() * j.abs() && !(j == 0.0 && e == 0.0),
        LawCase::RepulsiveElastic { .. } => true,
        LawCase::GravityPlusInverseSquare { k, q } => {
            j2 <= 2.0 * q || e * (j2 - 2.0 * q) >= -k * k / 2.0
        }
        LawCase::Power { k, n } => {
            if n == 1.0 {
                inverse_square_in_space(k, j2, e)
            } else if n > 1.0 {
                true
            } else {
                e * j.abs().powf(power_exponent(n)) >= -power_constant(k, n)
            }
        }
        LawCase::Oscillatory { q } => {
            if j == 0.0 {
                e >= -q
            } else {
                let (inf, attained) = oscillatory_inf(q, j2);
                e > inf || (attained && e == inf)
            }
        }
    }
}

fn inverse_square_in_space(k: f64, j2: f64, e: f64) -> bool {
    (j2 > 2.0 * k && e > 0.0) || (j2 == 2.0 * k && e >= 0.0) || j2 < 2.0 * k
}

/// `2n / (1 - n)`.
fn power_exponent(n: f64) -> f64 {
    2.0 * n / (1.0 - n)
}

/// `|n - 1| (2n)^(n/(1-n)) k^(1/(1-n))`.
fn power_constant(k: f64, n: f64) -> f64 {
    (n - 1.0).abs() * (2.0 * n).powf(n / (1.0 - n)) * k.powf(1.0 / (1.0 - n))
}

/// The admissible set for `q sin(1/r)` exactly as it is usually quoted:
/// `E > -q`, plus the single point `(0, -q)`. It holds on the line `J = 0`
/// but not elsewhere: for `J != 0` states with `-q < E < inf V_J` admit no
/// motion (e.g. `q = 1`, `J = 1`, where `inf V_J = 0`).
pub fn oscillatory_set_as_quoted(q: f64, j: f64, e: f64) -> bool {
    e > -q || (j == 0.0 && e == -q)
}

/// Sweep step in `x = 1/r`.
const SWEEP_STEP: f64 = 1e-3;
/// Sweeps stop here; radii below `1/SWEEP_X_MAX` are not examined.
const SWEEP_X_MAX: f64 = 2e4;

/// `inf_{x>0} J^2 x^2 / 2 + q sin x` and whether it is attained.
///
/// The function tends to 0 as `x -> 0`, so the infimum is the smaller of 0
/// and the lowest local minimum. Local minima are where
/// `g(x) = J^2 x + q cos x` turns from negative to positive.
pub fn oscillatory_inf(q: f64, j2: f64) -> (f64, bool) {
    let f = |x: f64| 0.5 * j2 * x * x + q * x.sin();
    let g = |x: f64| Ok(j2 * x + q * x.cos());
    let x_end = (q / j2).min(SWEEP_X_MAX);
    let (mut best, mut attained) = (0.0_f64, false);
    let mut prev = q;
    let mut i = 1u64;
    loop {
        let x = SWEEP_STEP * i as f64;
        // f(x) >= J^2 x^2 / 2 - q, so nothing further out can beat `best`.
        if x > x_end + SWEEP_STEP || 0.5 * j2 * x * x - q >= best {
            break;
        }
        let gx = j2 * x + q * x.cos();
        if prev < 0.0 && gx >= 0.0 {
            let xm = bisect_sign(g, x - SWEEP_STEP, x, 1e-15).expect("infallible");
            let v = f(xm);
            if v < best {
                best = v;
                attained = true;
            }
        }
        prev = gx;
        i += 1;
    }
    (best, attained)
}

/// Whether `(J, E)` lies within `tol` of the uniform-rotation set.
///
/// `tol` applies to the residual of the defining relation; `tol = 0` is
/// exact. The `q sin(1/r)` case always uses at least `1e-6` on `E`.
pub fn ur_within(case: LawCase, j: f64, e: f64, tol: f64) -> Result<bool, OracleError> {
    case.validate()?;
    let j2 = j * j;
    let near = |residual: f64, scale: f64| residual.abs() <= tol * (1.0 + scale.abs());
    Ok(match case {
        LawCase::Isolated => near(j.abs().max(e.abs()), 0.0),
        LawCase::Constant { k } => near(j.abs().max((e - k).abs()), k),
        LawCase::Gravitational { k } => near(e * j2 + k * k / 2.0, k * k / 2.0),
        LawCase::InverseSquare { k } => near((j2 - 2.0 * k).abs().max(e.abs()), 2.0 * k),
        LawCase::Hooke { k } => {
            !(j == 0.0 && e == 0.0) && near(e - k.sqrt() * j.abs(), e)
        }
        LawCase::RepulsiveElastic { .. } => false,
        LawCase::GravityPlusInverseSquare { k, q } => {
            e < 0.0 && near(e * (j2 - 2.0 * q) + k * k / 2.0, k * k / 2.0)
        }
        LawCase::Power { k, n } => {
            if n == 1.0 {
                near((j2 - 2.0 * k).abs().max(e.abs()), 2.0 * k)
            } else {
                let c = power_constant(k, n);
                let target = if n > 1.0 { c } else { -c };
                j != 0.0 && near(e * j.abs().powf(power_exponent(n)) - target, c)
            }
        }
        LawCase::Oscillatory { q } => oscillatory_ur(q, j2, e, tol.max(1e-6)),
    })
}

/// Sweep of the parametric uniform-rotation curve for `q sin(1/r)`:
/// critical points of `f(x) = J^2 x^2 / 2 + q sin x` with `f = E`.
fn oscillatory_ur(q: f64, j2: f64, e: f64, tol: f64) -> bool {
    if j2 == 0.0 {
        // Equilibria at cos(1/s) = 0 carry E = +-q.
        return (e - q).abs() <= tol || (e + q).abs() <= tol;
    }
    let f = |x: f64| 0.5 * j2 * x * x + q * x.sin();
    let g = |x: f64| Ok(j2 * x + q * x.cos());
    let x_end = (q / j2).min(SWEEP_X_MAX);
    let mut prev = q;
    let mut i = 1u64;
    loop {
        let x = SWEEP_STEP * i as f64;
        if x > x_end + SWEEP_STEP {
            return false;
        }
        let gx = j2 * x + q * x.cos();
        if (prev < 0.0) != (gx < 0.0) {
            let xm = bisect_sign(g, x - SWEEP_STEP, x, 1e-15).expect("infallible");
            if (f(xm) - e).abs() <= tol {
                return true;
            }
        }
        prev = gx;
        i += 1;
    }
}

/// Cell-by-cell comparison of the numeric engine with the closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub case: LawCase,
    pub cells: usize,
    /// Numeric V-route verdict differs from the closed form, outside the band.
    pub disagreements: usize,
    /// Cells inside the boundary band of either route.
    pub band_cells: usize,
    /// Disagreements inside the band (permitted).
    pub band_disagreements: usize,
    /// V-route and W-route disagree, outside both bands.
    pub route_disagreements: usize,
    /// Off-band disagreeing states, for diagnostics.
    pub examples: Vec<JEState>,
    pub elapsed: Duration,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.disagreements == 0 && self.route_disagreements == 0
    }
}

/// Classify every lattice point of `j_axis x e_axis` on both routes and
/// compare with [`oracle`], on `threads` workers (0 = available parallelism).
pub fn check_case(
    case: LawCase,
    j_axis: &[f64],
    e_axis: &[f64],
    opts: &ClassifyOptions,
    threads: usize,
) -> Result<OracleCheck, CheckError> {
    let law = case.force_law();
    let start = Instant::now();
    let states: Vec<JEState> = e_axis
        .iter()
        .flat_map(|&e| j_axis.iter().map(move |&j| JEState::new(j, e)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|err| CheckError::Pool(err.to_string()))?;
    let rows = pool.install(|| {
        states
            .par_iter()
            .map(|&st| {
                let v = classify(&law, st, opts)?;
                let w = classify_via_w(&law, st, opts)?;
                Ok((st, v, w))
            })
            .collect::<Result<Vec<_>, SearchError>>()
    })?;

    let mut out = OracleCheck {
        case,
        cells: rows.len(),
        disagreements: 0,
        band_cells: 0,
        band_disagreements: 0,
        route_disagreements: 0,
        examples: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for (st, v, w) in rows {
        let truth = in_space(case, st.j, st.e);
        let numeric = v.member != Membership::No;
        let agree = truth == numeric;
        if v.in_band() || w.in_band() {
            out.band_cells += 1;
            if !agree {
                out.band_disagreements += 1;
            }
            continue;
        }
        if !agree {
            out.disagreements += 1;
            if out.examples.len() < 10 {
                out.examples.push(st);
            }
        }
        if v.member.is_member() != w.member.is_member() {
            out.route_disagreements += 1;
        }
    }
    out.elapsed = start.elapsed();
    Ok(out)
}
