//! JSON run configurations.
//!
//! ```json
//! {
//!   "field": { "p": 2, "modulus": [1, 1, 0, 1] },
//!   "poly": "X^3*Y + Y^3*Z + Z^3*X",
//!   "G": [["(1:0:0)", 4], ["(0:1:0)", 4], ["(0:0:1)", 4]],
//!   "D": "all-affine",
//!   "P_inf": "(0:0:1)"
//! }
//! ```
//!
//! `D` is `"all-affine"`, `"all"` or an explicit list of points. The first
//! two take every rational point (affine ones only for `"all-affine"`)
//! outside `supp(G)` and `P_inf`, in enumeration order.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::agcode::AGCode;
use crate::curve::{Divisor, PlaneCurve, ProjectivePoint};
use crate::decoder::{BranchIDivisor, DecoderOptions};
use crate::gf::{Fe, Field, FieldSpec};
use crate::poly::parse_form;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config schema error: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u32,
    /// Optional; must equal `modulus.len() - 1` when given.
    #[serde(default)]
    pub m: Option<u32>,
    /// Coefficients from the constant term up.
    pub modulus: Vec<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DConfig {
    Named(String),
    Points(Vec<String>),
}

impl Default for DConfig {
    fn default() -> Self {
        DConfig::Named("all-affine".into())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub weights: Option<Vec<usize>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldConfig,
    pub poly: String,
    #[serde(rename = "G")]
    pub g: Vec<(String, i64)>,
    #[serde(rename = "D", default)]
    pub d: DConfig,
    #[serde(rename = "P_inf")]
    pub p_inf: String,
    #[serde(rename = "F0", default)]
    pub f0: Option<Vec<(String, i64)>>,
    #[serde(rename = "G_star", default)]
    pub g_star: Option<Vec<(String, i64)>>,
    #[serde(default)]
    pub branch_i_divisor: Option<BranchIDivisor>,
    #[serde(default)]
    pub strassen_crossover: Option<usize>,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
}

/// A configuration resolved into a curve, a code and decoder options.
pub struct Setup {
    pub field: Field,
    pub curve: Arc<PlaneCurve>,
    pub code: AGCode,
    pub p_inf: usize,
    pub options: DecoderOptions,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::from_json(&text)
    }

    pub fn field(&self) -> Result<Field, ConfigError> {
        let fc = &self.field;
        if let Some(m) = fc.m {
            if m as usize + 1 != fc.modulus.len() {
                return Err(ConfigError::Invalid(format!(
                    "field.m = {m} but the modulus has degree {}",
                    fc.modulus.len().saturating_sub(1)
                )));
            }
        }
        Field::new(FieldSpec::new(fc.p, &fc.modulus)).map_err(|e| ConfigError::Invalid(format!("field: {e}")))
    }

    pub fn build(&self) -> Result<Setup, ConfigError> {
        let field = self.field()?;
        let poly = parse_form(&field, &self.poly).map_err(|e| ConfigError::Invalid(format!("poly: {e}")))?;
        let curve = Arc::new(PlaneCurve::new(&field, poly).map_err(|e| ConfigError::Invalid(format!("curve: {e}")))?);
        let g = divisor(&curve, &self.g, "G")?;
        let p_inf = point(&curve, &self.p_inf, "P_inf")?;
        let d = self.d_points(&curve, &g, p_inf)?;
        let code = AGCode::build(&curve, &d, &g).map_err(|e| ConfigError::Invalid(format!("code: {e}")))?;
        let options = DecoderOptions {
            f0: self.f0.as_ref().map(|t| divisor(&curve, t, "F0")).transpose()?,
            g_star: self.g_star.as_ref().map(|t| divisor(&curve, t, "G_star")).transpose()?,
            branch_i: self.branch_i_divisor.unwrap_or_default(),
        };
        Ok(Setup {
            field,
            curve,
            code,
            p_inf,
            options,
        })
    }

    fn d_points(&self, curve: &PlaneCurve, g: &Divisor, p_inf: usize) -> Result<Vec<usize>, ConfigError> {
        let keep = |p: &usize| g.coeff(*p) == 0 && *p != p_inf;
        match &self.d {
            DConfig::Named(s) if s == "all-affine" => Ok(curve.affine_points().into_iter().filter(keep).collect()),
            DConfig::Named(s) if s == "all" => Ok((0..curve.points().len()).filter(keep).collect()),
            DConfig::Named(s) => Err(ConfigError::Invalid(format!(
                "D must be \"all-affine\", \"all\" or a list of points, got \"{s}\""
            ))),
            DConfig::Points(list) => {
                let pts = list
                    .iter()
                    .map(|s| point(curve, s, "D"))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut seen = std::collections::BTreeSet::new();
                for (&p, s) in pts.iter().zip(list) {
                    if !seen.insert(p) {
                        return Err(ConfigError::Invalid(format!("D lists {s} twice")));
                    }
                    if !keep(&p) {
                        return Err(ConfigError::Invalid(format!("D point {s} lies in supp(G) or is P_inf")));
                    }
                }
                Ok(pts)
            }
        }
    }
}

/// Parses a word file: one symbol per line, `0` or `a^k`; blank lines and
/// `#` comments are skipped.
pub fn parse_word(field: &Field, text: &str) -> Result<Vec<Fe>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        out.push(
            field
                .parse(s)
                .map_err(|e| ConfigError::Invalid(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

pub fn format_word(field: &Field, v: &[Fe]) -> String {
    v.iter().map(|&x| field.format(x) + "\n").collect()
}

fn point(curve: &PlaneCurve, s: &str, what: &str) -> Result<usize, ConfigError> {
    let p = ProjectivePoint::parse(curve.field(), s).map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))?;
    curve
        .point_index(&p)
        .ok_or_else(|| ConfigError::Invalid(format!("{what}: {s} is not a rational point of the curve")))
}

fn divisor(curve: &PlaneCurve, terms: &[(String, i64)], what: &str) -> Result<Divisor, ConfigError> {
    let mut out = Divisor::zero();
    for (s, c) in terms {
        out.add_at(point(curve, s, what)?, *c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLEIN: &str = r#"{
        "field": {"p": 2, "m": 3, "modulus": [1, 1, 0, 1]},
        "poly": "X^3*Y + Y^3*Z + Z^3*X",
        "G": [["(1:0:0)", 4], ["(0:1:0)", 4], ["(0:0:1)", 4]],
        "D": "all-affine",
        "P_inf": "(0:0:1)"
    }"#;

    #[test]
    fn word_files_round_trip() {
        let f = RunConfig::from_json(KLEIN).unwrap().field().unwrap();
        let v = vec![Fe::ZERO, Fe::ONE, f.alpha_pow(5)];
        let text = format_word(&f, &v);
        assert_eq!(text, "0\na^0\na^5\n");
        assert_eq!(parse_word(&f, &format!("# header\n{text}\n")).unwrap(), v);
        assert!(parse_word(&f, "0\nb^2\n").unwrap_err().to_string().contains("line 2"));
    }

    #[test]
    fn klein_config_builds() {
        let s = RunConfig::from_json(KLEIN).unwrap().build().unwrap();
        assert_eq!((s.code.n(), s.code.k()), (21, 11));
        assert!(!s.code.d_points().contains(&s.p_inf));
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let bad = KLEIN.replace("\"poly\"", "\"polly\"");
        let err = RunConfig::from_json(&bad).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let cases = [
            KLEIN.replace("\"m\": 3", "\"m\": 4"),
            KLEIN.replace("[1, 1, 0, 1]", "[1, 0, 1]"),
            KLEIN.replace("\"all-affine\"", "\"some\""),
            KLEIN.replace("\"P_inf\": \"(0:0:1)\"", "\"P_inf\": \"(1:1:1)\""),
            KLEIN.replace("\"all-affine\"", "[\"(0:0:1)\"]"),
        ];
        for c in cases {
            let cfg = RunConfig::from_json(&c).unwrap();
            assert!(matches!(cfg.build(), Err(ConfigError::Invalid(_))), "{c}");
        }
    }
}
