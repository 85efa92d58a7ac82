//! Force functions per unit mass `U(r)` on `(0, inf)`.
//!
//! A [`ForceLaw`] is either one of the closed-form [`Builtin`] laws or a
//! DSL expression (see [`expr`]) whose derivative is produced symbolically.
//! Each law carries two asymptotic tags describing `liminf r^2 U(r)` at the
//! origin and `liminf U(r)` at infinity. The tags are data: exact for the
//! built-ins, `Unknown` for parsed laws unless the text is one of the
//! recognised spellings of a built-in or the caller supplies them.

mod builtin;
pub mod expr;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use builtin::{Builtin, BUILTIN_NAMES};
pub use expr::{diff, Expr, Func};

/// Failures while building a law.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unbound parameter '{0}'")]
    UnboundParameter(String),
    #[error("exponent at offset {pos} depends on r; only constant exponents are allowed")]
    NonConstantExponent { pos: usize },
    #[error("unknown built-in law '{0}'")]
    UnknownBuiltin(String),
    #[error("law '{law}' needs parameter '{param}'")]
    MissingParameter { law: String, param: String },
    #[error("law '{law}', parameter '{param}': {reason}")]
    InvalidParameter {
        law: String,
        param: String,
        reason: String,
    },
    #[error("invalid asymptotic tag '{0}'")]
    InvalidTag(String),
}

/// Failures while evaluating a law at a radius.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("{op} outside its domain at r = {r}")]
    Domain { op: &'static str, r: f64 },
    #[error("non-finite value at r = {r}")]
    NonFinite { r: f64 },
    #[error("parameter '{0}' was never bound")]
    Unbound(String),
}

/// Limit-inferior summary at one end of `(0, inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AsymTag {
    Finite(f64),
    MinusInfinity,
    PlusInfinity,
    Unknown,
}

impl AsymTag {
    pub fn is_minus_infinity(self) -> bool {
        self == AsymTag::MinusInfinity
    }

    fn shifted(self, c: f64) -> AsymTag {
        match self {
            AsymTag::Finite(v) => AsymTag::Finite(v + c),
            other => other,
        }
    }
}

impl fmt::Display for AsymTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymTag::Finite(v) => write!(f, "finite({v})"),
            AsymTag::MinusInfinity => write!(f, "minus-infinity"),
            AsymTag::PlusInfinity => write!(f, "plus-infinity"),
            AsymTag::Unknown => write!(f, "unknown"),
        }
    }
}

impl FromStr for AsymTag {
    type Err = LawError;

    fn from_str(s: &str) -> Result<AsymTag, LawError> {
        let t = s.trim();
        let bad = || LawError::InvalidTag(s.to_string());
        match t {
            "unknown" => return Ok(AsymTag::Unknown),
            "-inf" | "minus-infinity" => return Ok(AsymTag::MinusInfinity),
            "inf" | "+inf" | "plus-infinity" => return Ok(AsymTag::PlusInfinity),
            _ => {}
        }
        let number = t
            .strip_prefix("finite:")
            .or_else(|| t.strip_prefix("finite(").and_then(|x| x.strip_suffix(')')))
            .unwrap_or(t);
        let v: f64 = number.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(AsymTag::Finite(v))
        } else {
            Err(bad())
        }
    }
}

#[derive(Clone, Debug)]
enum Source {
    Builtin(Builtin),
    Expr { ast: Expr, u: Expr, du: Expr },
}

/// A force function per unit mass with its derivative and asymptotic tags.
///
/// Immutable once built; cheap to clone and safe to share between threads.
#[derive(Clone, Debug)]
pub struct ForceLaw {
    name: String,
    params: BTreeMap<String, f64>,
    source: Source,
    shift: f64,
    asym_zero: AsymTag,
    asym_inf: AsymTag,
}

// Alternate spellings accepted as a built-in when tagging parsed laws. The
// oscillatory law is deliberately absent: its text stays an untagged law.
const RECOGNISED: &[(&str, &[&str])] = &[
    ("zero", &["0"]),
    ("constant", &["k"]),
    ("gravitational", &["-k/r", "-(k/r)", "-k*r^-1", "-k*r^(-1)"]),
    ("inverse_square", &["-k/r^2", "-(k/r^2)", "-k*r^-2", "-k*r^(-2)"]),
    ("hooke", &["k/2*r^2", "k*r^2/2", "0.5*k*r^2"]),
    ("repulsive_elastic", &["-k/2*r^2", "-k*r^2/2", "-0.5*k*r^2"]),
    ("gravity_plus_inverse_square", &["-k/r-q/r^2"]),
    ("power", &["-k/r^(2*n)", "-k*r^(-2*n)"]),
];

/// Build a law from DSL text and parameter bindings.
pub fn parse_law(source: &str, params: &BTreeMap<String, f64>) -> Result<ForceLaw, LawError> {
    let ast = Expr::parse(source)?;
    for p in ast.params() {
        if !params.contains_key(&p) {
            return Err(LawError::UnboundParameter(p));
        }
    }
    let u = ast.bind(params)?;
    let du = diff(&ast).bind(params)?;

    let (asym_zero, asym_inf) = recognise(&ast, params)
        .map(|b| (b.asym_zero(), b.asym_inf()))
        .unwrap_or((AsymTag::Unknown, AsymTag::Unknown));

    let used: BTreeMap<String, f64> = ast
        .params()
        .into_iter()
        .map(|p| {
            let v = params[&p];
            (p, v)
        })
        .collect();
    Ok(ForceLaw {
        name: source.split_whitespace().collect(),
        params: used,
        source: Source::Expr { ast, u, du },
        shift: 0.0,
        asym_zero,
        asym_inf,
    })
}

fn recognise(ast: &Expr, params: &BTreeMap<String, f64>) -> Option<Builtin> {
    for (name, spellings) in RECOGNISED {
        for text in *spellings {
            let template = Expr::parse(text).expect("recognised spellings parse");
            if &template == ast {
                let wanted: BTreeMap<String, f64> = template
                    .params()
                    .into_iter()
                    .filter_map(|p| params.get(&p).map(|v| (p, *v)))
                    .collect();
                return Builtin::from_name(name, &wanted).ok();
            }
        }
    }
    None
}

/// Build one of the closed-form laws by name.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ForceLaw, LawError> {
    Ok(ForceLaw::from_builtin(Builtin::from_name(name, params)?))
}

impl ForceLaw {
    pub fn from_builtin(b: Builtin) -> ForceLaw {
        ForceLaw {
            name: b.name().to_string(),
            params: b.params(),
            source: Source::Builtin(b),
            shift: 0.0,
            asym_zero: b.asym_zero(),
            asym_inf: b.asym_inf(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.source {
            Source::Builtin(b) if self.shift == 0.0 => Some(b),
            _ => None,
        }
    }

    /// The built-in this law derives from, shifted or not.
    pub fn builtin_family(&self) -> Option<Builtin> {
        match self.source {
            Source::Builtin(b) => Some(b),
            Source::Expr { .. } => None,
        }
    }

    /// The parsed tree, for laws built from DSL text.
    pub fn ast(&self) -> Option<&Expr> {
        match &self.source {
            Source::Expr { ast, .. } => Some(ast),
            Source::Builtin(_) => None,
        }
    }

    /// The bound derivative tree, for laws built from DSL text.
    pub fn derivative_ast(&self) -> Option<&Expr> {
        match &self.source {
            Source::Expr { du, .. } => Some(du),
            Source::Builtin(_) => None,
        }
    }

    pub fn asym_zero(&self) -> AsymTag {
        self.asym_zero
    }

    pub fn asym_inf(&self) -> AsymTag {
        self.asym_inf
    }

    /// Same law with the asymptotic tags replaced.
    pub fn with_tags(mut self, asym_zero: AsymTag, asym_inf: AsymTag) -> ForceLaw {
        self.asym_zero = asym_zero;
        self.asym_inf = asym_inf;
        self
    }

    /// `U + c`.
    pub fn shifted(&self, c: f64) -> ForceLaw {
        let mut out = self.clone();
        out.shift += c;
        out.name = format!("{}{:+}", self.name, c);
        // r^2 c -> 0 at the origin, so only the far tag moves.
        out.asym_inf = self.asym_inf.shifted(c);
        out
    }

    /// Energy per unit mass `U(r)`.
    pub fn u(&self, r: f64) -> Result<f64, EvalError> {
        if !(r > 0.0) {
            return Err(EvalError::NonPositiveRadius(r));
        }
        let v = match &self.source {
            Source::Builtin(b) => b.u(r),
            Source::Expr { u, .. } => u.eval(r)?,
        } + self.shift;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { r })
        }
    }

    /// `U'(r)`; positive for an attractive field.
    pub fn u_prime(&self, r: f64) -> Result<f64, EvalError> {
        if !(r > 0.0) {
            return Err(EvalError::NonPositiveRadius(r));
        }
        let v = match &self.source {
            Source::Builtin(b) => b.u_prime(r),
            Source::Expr { du, .. } => du.eval(r)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { r })
        }
    }
}

impl fmt::Display for ForceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, " [{}]", ps.join(", "))?;
        }
        Ok(())
    }
}
