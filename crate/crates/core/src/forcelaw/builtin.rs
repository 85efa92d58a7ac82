use std::collections::BTreeMap;

use super::{AsymTag, LawError};

/// The closed-form force functions shipped with the library.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// `U = 0`, an isolated particle.
    Zero,
    /// `U = k` for any real `k`.
    Constant { k: f64 },
    /// `U = -k/r`.
    Gravitational { k: f64 },
    /// `U = -k/r^2`.
    InverseSquare { k: f64 },
    /// `U = k r^2 / 2`.
    Hooke { k: f64 },
    /// `U = -k r^2 / 2`.
    RepulsiveElastic { k: f64 },
    /// `U = -k/r - q/r^2`.
    GravityPlusInverseSquare { k: f64, q: f64 },
    /// `U = -k / r^(2n)`.
    Power { k: f64, n: f64 },
    /// `U = q sin(1/r)`.
    Oscillatory { q: f64 },
}

pub const BUILTIN_NAMES: [&str; 9] = [
    "zero",
    "constant",
    "gravitational",
    "inverse_square",
    "hooke",
    "repulsive_elastic",
    "gravity_plus_inverse_square",
    "power",
    "oscillatory",
];

fn take(
    law: &str,
    params: &BTreeMap<String, f64>,
    expected: &[&str],
) -> Result<Vec<f64>, LawError> {
    for name in params.keys() {
        if !expected.contains(&name.as_str()) {
            return Err(LawError::InvalidParameter {
                law: law.into(),
                param: name.clone(),
                reason: "not a parameter of this law".into(),
            });
        }
    }
    expected
        .iter()
        .map(|p| {
            let v = *params.get(*p).ok_or_else(|| LawError::MissingParameter {
                law: law.into(),
                param: (*p).into(),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(LawError::InvalidParameter {
                    law: law.into(),
                    param: (*p).into(),
                    reason: "must be finite".into(),
                })
            }
        })
        .collect()
}

fn positive(law: &str, param: &str, v: f64) -> Result<f64, LawError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(LawError::InvalidParameter {
            law: law.into(),
            param: param.into(),
            reason: format!("must be > 0, got {v}"),
        })
    }
}

impl Builtin {
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Builtin, LawError> {
        Ok(match name {
            "zero" => {
                take(name, params, &[])?;
                Builtin::Zero
            }
            "constant" => {
                let v = take(name, params, &["k"])?;
                Builtin::Constant { k: v[0] }
            }
            "gravitational" => {
                let v = take(name, params, &["k"])?;
                Builtin::Gravitational { k: positive(name, "k", v[0])? }
            }
            "inverse_square" => {
                let v = take(name, params, &["k"])?;
                Builtin::InverseSquare { k: positive(name, "k", v[0])? }
            }
            "hooke" => {
                let v = take(name, params, &["k"])?;
                Builtin::Hooke { k: positive(name, "k", v[0])? }
            }
            "repulsive_elastic" => {
                let v = take(name, params, &["k"])?;
                Builtin::RepulsiveElastic { k: positive(name, "k", v[0])? }
            }
            "gravity_plus_inverse_square" => {
                let v = take(name, params, &["k", "q"])?;
                Builtin::GravityPlusInverseSquare {
                    k: positive(name, "k", v[0])?,
                    q: positive(name, "q", v[1])?,
                }
            }
            "power" => {
                let v = take(name, params, &["k", "n"])?;
                Builtin::Power {
                    k: positive(name, "k", v[0])?,
                    n: positive(name, "n", v[1])?,
                }
            }
            "oscillatory" => {
                let v = take(name, params, &["q"])?;
                Builtin::Oscillatory { q: positive(name, "q", v[0])? }
            }
            other => return Err(LawError::UnknownBuiltin(other.into())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Zero => "zero",
            Builtin::Constant { .. } => "constant",
            Builtin::Gravitational { .. } => "gravitational",
            Builtin::InverseSquare { .. } => "inverse_square",
            Builtin::Hooke { .. } => "hooke",
            Builtin::RepulsiveElastic { .. } => "repulsive_elastic",
            Builtin::GravityPlusInverseSquare { .. } => "gravity_plus_inverse_square",
            Builtin::Power { .. } => "power",
            Builtin::Oscillatory { .. } => "oscillatory",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            Builtin::Zero => vec![],
            Builtin::Constant { k }
            | Builtin::Gravitational { k }
            | Builtin::InverseSquare { k }
            | Builtin::Hooke { k }
            | Builtin::RepulsiveElastic { k } => vec![("k", k)],
            Builtin::GravityPlusInverseSquare { k, q } => vec![("k", k), ("q", q)],
            Builtin::Power { k, n } => vec![("k", k), ("n", n)],
            Builtin::Oscillatory { q } => vec![("q", q)],
        };
        pairs.into_iter().map(|(n, v)| (n.to_string(), v)).collect()
    }

    /// DSL text producing the same function.
    pub fn dsl(&self) -> &'static str {
        match self {
            Builtin::Zero => "0",
            Builtin::Constant { .. } => "k",
            Builtin::Gravitational { .. } => "-k/r",
            Builtin::InverseSquare { .. } => "-k/r^2",
            Builtin::Hooke { .. } => "k/2*r^2",
            Builtin::RepulsiveElastic { .. } => "-k/2*r^2",
            Builtin::GravityPlusInverseSquare { .. } => "-k/r-q/r^2",
            Builtin::Power { .. } => "-k/r^(2*n)",
            Builtin::Oscillatory { .. } => "q*sin(1/r)",
        }
    }

    pub fn u(&self, r: f64) -> f64 {
        match *self {
            Builtin::Zero => 0.0,
            Builtin::Constant { k } => k,
            Builtin::Gravitational { k } => -k / r,
            Builtin::InverseSquare { k } => -k / (r * r),
            Builtin::Hooke { k } => 0.5 * k * r * r,
            Builtin::RepulsiveElastic { k } => -0.5 * k * r * r,
            Builtin::GravityPlusInverseSquare { k, q } => -k / r - q / (r * r),
            Builtin::Power { k, n } => -k / r.powf(2.0 * n),
            Builtin::Oscillatory { q } => q * (1.0 / r).sin(),
        }
    }

    pub fn u_prime(&self, r: f64) -> f64 {
        match *self {
            Builtin::Zero | Builtin::Constant { .. } => 0.0,
            Builtin::Gravitational { k } => k / (r * r),
            Builtin::InverseSquare { k } => 2.0 * k / (r * r * r),
            Builtin::Hooke { k } => k * r,
            Builtin::RepulsiveElastic { k } => -k * r,
            Builtin::GravityPlusInverseSquare { k, q } => k / (r * r) + 2.0 * q / (r * r * r),
            Builtin::Power { k, n } => 2.0 * n * k / r.powf(2.0 * n + 1.0),
            Builtin::Oscillatory { q } => -q * (1.0 / r).cos() / (r * r),
        }
    }

    /// `liminf r^2 U(r)` as `r -> 0`.
    pub fn asym_zero(&self) -> AsymTag {
        match *self {
            Builtin::InverseSquare { k } => AsymTag::Finite(-k),
            Builtin::GravityPlusInverseSquare { q, .. } => AsymTag::Finite(-q),
            Builtin::Power { k, n } if n == 1.0 => AsymTag::Finite(-k),
            Builtin::Power { n, .. } if n > 1.0 => AsymTag::MinusInfinity,
            _ => AsymTag::Finite(0.0),
        }
    }

    /// `liminf U(r)` as `r -> infinity`.
    pub fn asym_inf(&self) -> AsymTag {
        match *self {
            Builtin::Constant { k } => AsymTag::Finite(k),
            Builtin::Hooke { .. } => AsymTag::PlusInfinity,
            Builtin::RepulsiveElastic { .. } => AsymTag::MinusInfinity,
            _ => AsymTag::Finite(0.0),
        }
    }
}
