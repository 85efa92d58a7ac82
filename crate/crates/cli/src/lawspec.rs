//! `builtin:<name>:<p>=<v>,...` and `expr:<DSL>:<p>=<v>,...` law specs.

use std::collections::BTreeMap;
use std::str::FromStr;

use jespace::forcelaw::LawError;
use jespace::{builtin, parse_law, AsymTag, ForceLaw};

#[derive(Clone, Debug)]
pub struct LawSpec(pub ForceLaw);

fn fail(msg: impl Into<String>) -> String {
    msg.into()
}

impl FromStr for LawSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<LawSpec, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| fail("law must start with 'builtin:' or 'expr:'"))?;
        let (body, params) = match rest.split_once(':') {
            Some((b, p)) => (b, p),
            None => (rest, ""),
        };
        if params.contains("builtin:") || params.contains("expr:") {
            return Err(fail("give either a builtin or an expr law, not both"));
        }
        let mut values = BTreeMap::new();
        let (mut asym0, mut asym_inf) = (None, None);
        for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| fail(format!("parameter '{item}' must be name=value")))?;
            let key = key.trim();
            match key {
                "asym0" => asym0 = Some(value.parse::<AsymTag>().map_err(|e| e.to_string())?),
                "asymInf" => asym_inf = Some(value.parse::<AsymTag>().map_err(|e| e.to_string())?),
                _ => {
                    let v: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| fail(format!("parameter '{key}': '{value}' is not a number")))?;
                    if values.insert(key.to_string(), v).is_some() {
                        return Err(fail(format!("parameter '{key}' given twice")));
                    }
                }
            }
        }
        let law = match kind {
            "builtin" => builtin(body.trim(), &values),
            "expr" => parse_law(body, &values),
            other => return Err(fail(format!("unknown law kind '{other}'"))),
        }
        .map_err(|e: LawError| e.to_string())?;
        let law = match (asym0, asym_inf) {
            (None, None) => law,
            (z, i) => {
                let (z0, i0) = (law.asym_zero(), law.asym_inf());
                law.with_tags(z.unwrap_or(z0), i.unwrap_or(i0))
            }
        };
        Ok(LawSpec(law))
    }
}
