//! Run configuration: a TOML file overlaid by command-line flags, resolved
//! into typed settings.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use hamfam_core::verify::Mutation;
use hamfam_core::{Branch, Family, TimeRule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest n accepted for the general family.
pub const MAX_ORDER: u32 = 16;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub map: MapSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// A single order or an inclusive range `a..b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    /// `name=value,...` with complex values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_rule: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySel {
    One(Family),
    GeneralRange(RangeInclusive<u32>),
}

/// Fully typed settings with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub family: FamilySel,
    pub params: Vec<(String, Complex64)>,
    pub map: Option<String>,
    pub branch: Branch,
    pub time_rule: TimeRule,
    pub method: MethodKind,
    pub h: f64,
    pub tol: f64,
    pub t0: f64,
    pub t1: f64,
    pub q0: Complex64,
    pub p0: Complex64,
    pub sweep: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub mutation: Option<Mutation>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t = s.trim().replace(' ', "");
    Complex64::from_str(&t).map_err(|_| usage(format!("`{s}` is not a complex literal like 1.5-0.5i")))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

pub fn parse_params(s: &str) -> Result<Vec<(String, Complex64)>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| usage(format!("parameter `{kv}` is not of the form name=value")))?;
            Ok((k.trim().to_string(), parse_complex(v)?))
        })
        .collect()
}

pub fn parse_n(s: &str) -> Result<RangeInclusive<u32>, CliError> {
    let num = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|_| usage(format!("`{x}` is not a family order")))
    };
    let r = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => {
            let n = num(s)?;
            n..=n
        }
    };
    if r.is_empty() || *r.start() < 2 || *r.end() > MAX_ORDER {
        return Err(usage(format!("n-range `{s}` must lie within 2..{MAX_ORDER}")));
    }
    Ok(r)
}

pub fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let body = s.trim().strip_prefix("h=").unwrap_or(s.trim());
    body.split(',')
        .map(|x| {
            let h: f64 = x.trim().parse().map_err(|_| usage(format!("`{x}` is not a step size")))?;
            if h > 0.0 && h.is_finite() {
                Ok(h)
            } else {
                Err(usage(format!("step size {h} must be positive")))
            }
        })
        .collect()
}

/// `z`, `z^j` (j odd) or an index k selecting ζ^(2k+1).
pub fn parse_branch(s: &str) -> Result<Branch, CliError> {
    let s = s.trim();
    let bad = |e: hamfam_core::SymmetryError| usage(e.to_string());
    if s == "z" {
        return Ok(Branch::PRINCIPAL);
    }
    if let Some(j) = s.strip_prefix("z^") {
        let j: i64 = j.parse().map_err(|_| usage(format!("bad branch `{s}`")))?;
        return Branch::from_zeta_power(j).map_err(bad);
    }
    let k: i64 = s.parse().map_err(|_| usage(format!("bad branch `{s}` (use z, z^7 or an index k)")))?;
    Ok(Branch::from_index(k))
}

fn parse_family(name: &str, n: Option<&str>) -> Result<FamilySel, CliError> {
    match name {
        "autonomous5" | "nonautonomous3" => {
            if n.is_some() {
                return Err(usage(format!("--n does not apply to family {name}")));
            }
            Ok(FamilySel::One(name.parse().map_err(|e: hamfam_core::HamiltonianError| usage(e.to_string()))?))
        }
        "general" => {
            let r = parse_n(n.unwrap_or("2..8"))?;
            Ok(FamilySel::GeneralRange(r))
        }
        other => match other.strip_prefix("general:") {
            Some(k) if n.is_none() => {
                let r = parse_n(k)?;
                Ok(FamilySel::GeneralRange(r))
            }
            Some(_) => Err(usage("give n either in the family name or with --n, not both")),
            None => Err(usage(format!(
                "unknown family `{other}` (expected autonomous5, general or nonautonomous3)"
            ))),
        },
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fields set in `top` win over fields in `self`.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($sec:ident . $f:ident),*) => {$(
                if top.$sec.$f.is_some() {
                    self.$sec.$f = top.$sec.$f;
                }
            )*};
        }
        if top.command.is_some() {
            self.command = top.command;
        }
        take!(
            system.family, system.n, system.params,
            map.name, map.branch, map.time_rule,
            integration.method, integration.h, integration.tol, integration.t0, integration.t1,
            integration.q0, integration.p0, integration.sweep,
            output.out, output.format
        );
        self
    }

    pub fn resolve(&self) -> Result<Settings, CliError> {
        let sys = &self.system;
        let family = parse_family(sys.family.as_deref().unwrap_or("autonomous5"), sys.n.as_deref())?;
        let params = sys.params.as_deref().map(parse_params).transpose()?.unwrap_or_default();
        let integ = &self.integration;
        let method = match integ.method.as_deref().unwrap_or("rk4") {
            "rk4" | "fixed-rk4" => MethodKind::Rk4,
            "rk45" | "adaptive-rk45" => MethodKind::Rk45,
            m => return Err(usage(format!("unknown method `{m}` (expected rk4 or rk45)"))),
        };
        let time_rule = match self.map.time_rule.as_deref().unwrap_or("root") {
            "root" => TimeRule::Root,
            "neg-cube" => TimeRule::NegCube,
            r => return Err(usage(format!("unknown time rule `{r}` (expected root or neg-cube)"))),
        };
        let format = match self.output.format.as_deref().unwrap_or("text") {
            "text" => Format::Text,
            "json" => Format::Json,
            f => return Err(usage(format!("unknown format `{f}` (expected text or json)"))),
        };
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(usage(format!("--{name} must be positive, got {x}")))
            }
        };
        let t0 = integ.t0.unwrap_or(0.0);
        let t1 = integ.t1.unwrap_or(1.0);
        if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
            return Err(usage(format!("time span [{t0}, {t1}] must be finite with t1 >= t0")));
        }
        Ok(Settings {
            family,
            params,
            map: self.map.name.clone(),
            branch: self.map.branch.as_deref().map(parse_branch).transpose()?.unwrap_or_default(),
            time_rule,
            method,
            h: positive("h", integ.h.unwrap_or(1e-3))?,
            tol: positive("tol", integ.tol.unwrap_or(1e-9))?,
            t0,
            t1,
            q0: parse_complex(integ.q0.as_deref().unwrap_or("0.5i"))?,
            p0: parse_complex(integ.p0.as_deref().unwrap_or("0.5"))?,
            sweep: integ.sweep.as_deref().map(parse_sweep).transpose()?.unwrap_or_default(),
            out: self.output.out.as_ref().map(PathBuf::from),
            format,
            mutation: None,
        })
    }

    /// The fully resolved configuration as normalized TOML.
    pub fn canonical(&self) -> Result<String, CliError> {
        let s = self.resolve()?;
        let (family, n) = match &s.family {
            FamilySel::One(f) => (f.to_string(), None),
            FamilySel::GeneralRange(r) if r.start() == r.end() => ("general".to_string(), Some(r.start().to_string())),
            FamilySel::GeneralRange(r) => ("general".to_string(), Some(format!("{}..{}", r.start(), r.end()))),
        };
        let params = (!s.params.is_empty()).then(|| {
            s.params
                .iter()
                .map(|(k, v)| format!("{k}={}", format_complex(*v)))
                .collect::<Vec<_>>()
                .join(",")
        });
        let norm = RunConfig {
            command: self.command.clone(),
            system: SystemSection {
                family: Some(family),
                n,
                params,
            },
            map: MapSection {
                name: s.map.clone(),
                branch: Some(format!("z^{}", s.branch.zeta_power())),
                time_rule: Some(
                    match s.time_rule {
                        TimeRule::Root => "root",
                        TimeRule::NegCube => "neg-cube",
                    }
                    .into(),
                ),
            },
            integration: IntegrationSection {
                method: Some(
                    match s.method {
                        MethodKind::Rk4 => "rk4",
                        MethodKind::Rk45 => "rk45",
                    }
                    .into(),
                ),
                h: Some(s.h),
                tol: Some(s.tol),
                t0: Some(s.t0),
                t1: Some(s.t1),
                q0: Some(format_complex(s.q0)),
                p0: Some(format_complex(s.p0)),
                sweep: (!s.sweep.is_empty())
                    .then(|| s.sweep.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")),
            },
            output: OutputSection {
                out: self.output.out.clone(),
                format: Some(
                    match s.format {
                        Format::Text => "text",
                        Format::Json => "json",
                    }
                    .into(),
                ),
            },
        };
        toml::to_string(&norm).map_err(|e| CliError::Config(e.to_string()))
    }
}
