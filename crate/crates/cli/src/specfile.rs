//! Line-oriented spec files.
//!
//! Each non-blank line is `key: value`; `#` starts a comment. Integer lists are
//! written in brackets, e.g. `term: [2, 0] [0, 2] a`. See the README for the
//! full list of keys.

use std::collections::HashSet;

use bergcheck::bergman::{CoefficientValue, Perturbation};
use bergcheck::models::RadialMetricSpec;
use bergcheck::multiindex::MultiIndex;
use bergcheck::scalar::parse_scalar;
use bergcheck::series::{BiKey, BiSeries};
use bergcheck::{PotentialSpecQ, Rational, ScalarSeriesQ};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, message: impl Into<String>) -> SpecFileError {
    SpecFileError::Syntax { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    FubiniStudy,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermLine {
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub value: CoefficientValue<Rational>,
    pub line: usize,
}

/// Truncation orders given on the command line; they win over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Truncation {
    pub dz: Option<u32>,
    pub dc: Option<u32>,
    pub dp: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecFile {
    pub n: Option<usize>,
    pub dz: Option<u32>,
    pub dc: Option<u32>,
    pub dp: Option<u32>,
    pub terms: Vec<TermLine>,
    pub pairs: Vec<(usize, usize)>,
    pub model: Option<ModelKind>,
    pub epsilon: Option<Rational>,
    pub nodes: Option<usize>,
}

const KEYS: [&str; 9] = ["n", "dz", "dc", "dp", "term", "pair", "model", "epsilon", "nodes"];

/// Split a leading `[a, b, …]` off `text`.
fn take_list(text: &str, line: usize) -> Result<(Vec<u32>, &str), SpecFileError> {
    let text = text.trim_start();
    let body = text.strip_prefix('[').ok_or_else(|| syntax(line, format!("expected `[` at `{text}`")))?;
    let close = body.find(']').ok_or_else(|| syntax(line, "unclosed `[`"))?;
    let entries = body[..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| syntax(line, format!("`{s}` is not a non-negative integer"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((entries, &body[close + 1..]))
}

fn parse_list(text: &str, line: usize) -> Result<Vec<u32>, SpecFileError> {
    let (list, rest) = take_list(text, line)?;
    if !rest.trim().is_empty() {
        return Err(syntax(line, format!("unexpected `{}` after list", rest.trim())));
    }
    Ok(list)
}

fn parse_number<N: std::str::FromStr>(text: &str, line: usize, key: &str) -> Result<N, SpecFileError> {
    text.parse().map_err(|_| syntax(line, format!("`{key}` expects a non-negative integer, got `{text}`")))
}

fn is_symbol_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecFileError> {
        let mut out = SpecFile::default();
        let mut seen = HashSet::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once(':').ok_or_else(|| syntax(line, format!("expected `key: value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(syntax(line, format!("unknown key `{key}`")));
            }
            if key != "term" && key != "pair" && !seen.insert(key.to_string()) {
                return Err(syntax(line, format!("`{key}` given twice")));
            }
            match key {
                "n" => out.n = Some(parse_number(value, line, key)?),
                "dz" => out.dz = Some(parse_number(value, line, key)?),
                "dc" => out.dc = Some(parse_number(value, line, key)?),
                "dp" => out.dp = Some(parse_number(value, line, key)?),
                "nodes" => out.nodes = Some(parse_number(value, line, key)?),
                "term" => {
                    let (p, rest) = take_list(value, line)?;
                    let (q, rest) = take_list(rest, line)?;
                    let coeff = rest.trim();
                    let value = if let Some(v) = parse_scalar::<Rational>(coeff) {
                        CoefficientValue::Value(v)
                    } else if is_symbol_name(coeff) {
                        CoefficientValue::Symbol(coeff.to_string())
                    } else {
                        return Err(syntax(line, format!("coefficient `{coeff}` is neither a rational nor a name")));
                    };
                    out.terms.push(TermLine { p, q, value, line });
                }
                "pair" => match parse_list(value, line)?.as_slice() {
                    &[a, b] => out.pairs.push((a as usize, b as usize)),
                    _ => return Err(syntax(line, "`pair` expects two term indices")),
                },
                "model" => {
                    out.model = Some(match value {
                        "fubini_study" => ModelKind::FubiniStudy,
                        "perturbed" => ModelKind::Perturbed,
                        _ => return Err(syntax(line, format!("unknown model `{value}`"))),
                    })
                }
                "epsilon" => {
                    out.epsilon = Some(
                        parse_scalar(value).ok_or_else(|| syntax(line, format!("`{value}` is not a rational")))?,
                    )
                }
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(out)
    }

    fn dimension(&self) -> Result<usize, SpecFileError> {
        let n = self.n.ok_or_else(|| SpecFileError::Invalid("missing `n`".into()))?;
        for t in &self.terms {
            if t.p.len() != n || t.q.len() != n {
                return Err(syntax(t.line, format!("exponent lists must have length n = {n}")));
            }
        }
        Ok(n)
    }

    /// The potential record used by the expansion pipelines.
    pub fn potential_spec(&self, cli: Truncation) -> Result<PotentialSpecQ, SpecFileError> {
        let n = self.dimension()?;
        let dz = cli.dz.or(self.dz).ok_or_else(|| SpecFileError::Invalid("missing `dz` (file or --dz)".into()))?;
        let dc = cli.dc.or(self.dc).ok_or_else(|| SpecFileError::Invalid("missing `dc` (file or --dc)".into()))?;
        let mut spec = PotentialSpecQ::flat(n, dz, dc);
        spec.dp = cli.dp.or(self.dp);
        for t in &self.terms {
            spec = spec.with_perturbation(Perturbation {
                p: MultiIndex::new(t.p.clone()),
                q: MultiIndex::new(t.q.clone()),
                value: t.value.clone(),
            });
        }
        spec.conjugate_pairs = self.pairs.clone();
        spec.validate().map_err(|e| SpecFileError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    /// `|z|² + Σ c z^P z̄^Q` as a plain series truncated at `dz`; every
    /// coefficient must be a number.
    pub fn jet(&self, cli: Truncation) -> Result<ScalarSeriesQ, SpecFileError> {
        let n = self.dimension()?;
        let dz = cli.dz.or(self.dz).ok_or_else(|| SpecFileError::Invalid("missing `dz` (file or --dz)".into()))?;
        let mut k = BiSeries::flat(n, dz);
        for t in &self.terms {
            let CoefficientValue::Value(v) = &t.value else {
                return Err(syntax(t.line, "normal coordinates need numeric coefficients"));
            };
            k.add_term(BiKey::new(MultiIndex::new(t.p.clone()), MultiIndex::new(t.q.clone())), v.clone());
        }
        Ok(k)
    }

    pub fn radial_spec(&self) -> Result<RadialMetricSpec, SpecFileError> {
        let mut spec = match (self.model, &self.epsilon) {
            (None, _) => return Err(SpecFileError::Invalid("missing `model`".into())),
            (Some(ModelKind::FubiniStudy), None) => RadialMetricSpec::fubini_study(),
            (Some(ModelKind::FubiniStudy), Some(_)) => {
                return Err(SpecFileError::Invalid("`epsilon` only applies to the perturbed model".into()))
            }
            (Some(ModelKind::Perturbed), Some(e)) => RadialMetricSpec::perturbed(e.clone()),
            (Some(ModelKind::Perturbed), None) => {
                return Err(SpecFileError::Invalid("the perturbed model needs `epsilon`".into()))
            }
        };
        if let Some(nodes) = self.nodes {
            spec.quadrature.initial_nodes = nodes;
        }
        spec.validate().map_err(|e| SpecFileError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn is_fubini_study(&self) -> bool {
        self.model == Some(ModelKind::FubiniStudy)
    }
}
