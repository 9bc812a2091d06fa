//! Run configuration: a flat, human-editable TOML document mirrored by the
//! CLI flags (flags override file values), plus construction of the systems
//! it describes.
//!
//! Numeric map parameters are written as strings (`"1/10"`, `"0:1"`,
//! `"1.2"`) and parsed into rigorous interval enclosures; quotients of
//! integers are exact-rational enclosures. Domain radii are plain floats:
//! they define the box being verified, so the float value itself is the
//! domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{builtin, BuiltinSystem, DynError, EtaLift, HomotopySpec, MapSpec, Params};
use crate::expr::{self, Expr, ExprError};
use crate::geometry::{GeometryError, SubdivisionScheme};
use crate::interval::Interval;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Verify,
    Enclose,
    Degree,
    NhimK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Fiber,
    Full,
    Sequence,
}

/// Expression-language definition of a map or homotopy.
///
/// Plain maps define `theta_out`, `x_out`, `y_out` in `theta, x, y`.
/// Homotopies define `h_theta`, `h_x`, `h_y` in `alpha, theta, x, y` (and
/// `beta` when a family range is set). Verification additionally needs
/// `eta_lift` (a continuous lift expression in `theta`) and `a_coeff`. When
/// `h_*` are omitted but the map fields and endpoint data are present, the
/// standard interpolation homotopy `(1-alpha) f + alpha (eta; A x, 0)` is
/// synthesized.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct MapDef {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_lift: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coeff: Option<String>,
}

/// One member of a sequence run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct SequenceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_def: Option<MapDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default = "default_mode")]
    pub mode: ModeKind,
    #[serde(default = "default_map")]
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_b: Option<String>,
    #[serde(default = "default_ru")]
    pub r_u: f64,
    #[serde(default = "default_rs")]
    pub r_s: f64,
    #[serde(default = "default_scheme")]
    pub scheme: [usize; 4],
    #[serde(default = "default_refine")]
    pub refine_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_def: Option<MapDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<SequenceEntry>>,
    // enclose
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_out: Option<String>,
    // degree
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<usize>,
    // nhim-k
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn default_mode() -> ModeKind {
    ModeKind::Full
}
fn default_map() -> String {
    "cap".into()
}
fn default_ru() -> f64 {
    1.0
}
fn default_rs() -> f64 {
    1.2
}
fn default_scheme() -> [usize; 4] {
    [4, 100, 50, 50]
}
fn default_refine() -> usize {
    10
}

impl RunConfig {
    pub fn new(command: CommandKind) -> RunConfig {
        RunConfig {
            command,
            mode: default_mode(),
            map: default_map(),
            mu: None,
            beta: None,
            winding: None,
            rate_a: None,
            rate_b: None,
            r_u: default_ru(),
            r_s: default_rs(),
            scheme: default_scheme(),
            refine_depth: default_refine(),
            jobs: None,
            report: None,
            cells: None,
            map_def: None,
            sequence: None,
            box_r: None,
            disc_r: None,
            grid: None,
            steps: None,
            iterates: None,
            slice_theta: None,
            slice_out: None,
            eta: None,
            parts: None,
            big_c: None,
            lambda: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &str) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn scheme(&self) -> Result<SubdivisionScheme, ConfigError> {
        Ok(SubdivisionScheme::new(
            self.scheme[0],
            self.scheme[1],
            self.scheme[2],
            self.scheme[3],
        )?)
    }

    fn builtin_params(&self) -> Result<Params, ConfigError> {
        let mut params = Params::new();
        if let Some(mu) = &self.mu {
            params.insert("mu".into(), expr::parse_param(mu)?);
        }
        if let Some(beta) = &self.beta {
            params.insert("beta".into(), expr::parse_param(beta)?);
        }
        if let Some(w) = self.winding {
            params.insert("winding".into(), Interval::point(w as f64));
        }
        if let Some(a) = &self.rate_a {
            params.insert("a".into(), expr::parse_param(a)?);
        }
        if let Some(b) = &self.rate_b {
            params.insert("b".into(), expr::parse_param(b)?);
        }
        Ok(params)
    }

    /// Resolves the configured system for verification.
    pub fn homotopy(&self) -> Result<HomotopySpec, ConfigError> {
        if self.map == "custom" {
            let def = self
                .map_def
                .as_ref()
                .ok_or_else(|| invalid("map_def", "map = \"custom\" needs a [map_def] table"))?;
            return build_homotopy_from_def(def, self.family_range()?);
        }
        let name = canonical_builtin(&self.map);
        let sys = builtin(&name, &self.builtin_params()?)?;
        match sys {
            BuiltinSystem::Homotopy(h) => Ok(h),
            BuiltinSystem::Map(m) => Err(invalid(
                "map",
                format!("builtin `{}` is a plain map; verification needs a homotopy", m.name),
            )),
        }
    }

    /// Resolves the configured system as a plain map (for enclosure runs).
    pub fn plain_map(&self) -> Result<MapSpec, ConfigError> {
        if self.map == "custom" {
            let def = self
                .map_def
                .as_ref()
                .ok_or_else(|| invalid("map_def", "map = \"custom\" needs a [map_def] table"))?;
            return build_map_from_def(def);
        }
        let name = match self.map.as_str() {
            "cap" | "cap_map" | "cap_homotopy" => "cap_map".to_string(),
            "toy" | "toy_fbeta" | "toy_homotopy" => "toy_fbeta".to_string(),
            other => other.to_string(),
        };
        let sys = builtin(&name, &self.builtin_params()?)?;
        Ok(match sys {
            BuiltinSystem::Map(m) => m,
            BuiltinSystem::Homotopy(h) => h.base,
        })
    }

    pub fn sequence_members(&self) -> Result<Vec<HomotopySpec>, ConfigError> {
        let entries = self
            .sequence
            .as_ref()
            .ok_or_else(|| invalid("sequence", "sequence mode needs [[sequence]] entries"))?;
        entries
            .iter()
            .map(|e| {
                let mut member = self.clone();
                member.sequence = None;
                if let Some(map) = &e.map {
                    member.map = map.clone();
                }
                if e.mu.is_some() {
                    member.mu = e.mu.clone();
                }
                if e.beta.is_some() {
                    member.beta = e.beta.clone();
                }
                if e.winding.is_some() {
                    member.winding = e.winding;
                }
                if e.map_def.is_some() {
                    member.map = "custom".into();
                    member.map_def = e.map_def.clone();
                }
                member.homotopy()
            })
            .collect()
    }

    fn family_range(&self) -> Result<Option<Interval>, ConfigError> {
        match &self.beta {
            None => Ok(None),
            Some(b) => {
                let range = expr::parse_param(b)?;
                Ok(if range.width() > 0.0 { Some(range) } else { None })
            }
        }
    }
}

/// Accepts short aliases used on the command line.
fn canonical_builtin(name: &str) -> String {
    match name {
        "cap" => "cap_homotopy".into(),
        "toy" => "toy_homotopy".into(),
        "linear" | "nhim" => "linear_nhim".into(),
        other => other.into(),
    }
}

fn parsed_constants(def: &MapDef) -> Result<BTreeMap<String, Interval>, ConfigError> {
    let mut out = BTreeMap::new();
    for (name, text) in &def.constants {
        out.insert(name.clone(), expr::parse_param(text)?);
    }
    Ok(out)
}

/// Compiles `theta_out`/`x_out`/`y_out` into a [`MapSpec`].
pub fn build_map_from_def(def: &MapDef) -> Result<MapSpec, ConfigError> {
    let consts = parsed_constants(def)?;
    let need = |field: &str, v: &Option<String>| -> Result<Expr, ConfigError> {
        let src = v
            .as_ref()
            .ok_or_else(|| invalid(field, "required for a map definition"))?;
        Ok(expr::parse(src, &consts)?)
    };
    let theta_out = need("theta_out", &def.theta_out)?;
    let x_out = need("x_out", &def.x_out)?;
    let y_out = need("y_out", &def.y_out)?;
    Ok(MapSpec::new(
        "custom",
        std::sync::Arc::new(move |theta, x, y| {
            let env = expr::Env::point_free(theta, x, y);
            let t = theta_out.eval(&env).map_err(expr_dyn)?;
            let xx = x_out.eval(&env).map_err(expr_dyn)?;
            let yy = y_out.eval(&env).map_err(expr_dyn)?;
            Ok((t, xx, yy))
        }),
    ))
}

fn expr_dyn(e: ExprError) -> DynError {
    match e {
        ExprError::Eval(iv) => DynError::eval(iv),
        other => DynError::BadParam {
            name: "expression".into(),
            reason: other.to_string(),
        },
    }
}

/// Compiles a homotopy definition. When only map fields are given, the
/// standard interpolation homotopy to `(eta; A x, 0)` is synthesized.
pub fn build_homotopy_from_def(
    def: &MapDef,
    family: Option<Interval>,
) -> Result<HomotopySpec, ConfigError> {
    let consts = parsed_constants(def)?;
    let eta_src = def
        .eta_lift
        .as_ref()
        .ok_or_else(|| invalid("eta_lift", "required to verify a custom system"))?;
    let eta_expr = expr::parse(eta_src, &consts)?;
    let a_src = def
        .a_coeff
        .as_ref()
        .ok_or_else(|| invalid("a_coeff", "required to verify a custom system"))?;
    let a_expr = expr::parse(a_src, &consts)?;

    let (h_theta, h_x, h_y) = match (&def.h_theta, &def.h_x, &def.h_y) {
        (Some(t), Some(x), Some(y)) => (
            expr::parse(t, &consts)?,
            expr::parse(x, &consts)?,
            expr::parse(y, &consts)?,
        ),
        (None, None, None) => {
            // Synthesize (1-alpha) f + alpha (eta; A x, 0).
            let base_theta = expr::parse(
                def.theta_out
                    .as_ref()
                    .ok_or_else(|| invalid("theta_out", "needed to synthesize a homotopy"))?,
                &consts,
            )?;
            let base_x = expr::parse(
                def.x_out
                    .as_ref()
                    .ok_or_else(|| invalid("x_out", "needed to synthesize a homotopy"))?,
                &consts,
            )?;
            let base_y = expr::parse(
                def.y_out
                    .as_ref()
                    .ok_or_else(|| invalid("y_out", "needed to synthesize a homotopy"))?,
                &consts,
            )?;
            let endpoint_x = Expr::Mul(
                Box::new(a_expr.clone()),
                Box::new(Expr::Var(expr::Var::X)),
            );
            let zero = Expr::Const(Interval::point(0.0));
            (
                base_theta,
                base_x.interpolate_to(endpoint_x),
                base_y.interpolate_to(zero),
            )
        }
        _ => {
            return Err(invalid(
                "h_theta/h_x/h_y",
                "define all three homotopy components or none",
            ))
        }
    };

    let base = if def.theta_out.is_some() && def.x_out.is_some() && def.y_out.is_some() {
        build_map_from_def(def)?
    } else {
        // Base map recovered from the homotopy at alpha = 0.
        let (ht, hx, hy) = (h_theta.clone(), h_x.clone(), h_y.clone());
        MapSpec::new(
            "custom (alpha = 0)",
            std::sync::Arc::new(move |theta, x, y| {
                let mut env = expr::Env::point_free(theta, x, y);
                env.alpha = Interval::point(0.0);
                Ok((
                    ht.eval(&env).map_err(expr_dyn)?,
                    hx.eval(&env).map_err(expr_dyn)?,
                    hy.eval(&env).map_err(expr_dyn)?,
                ))
            }),
        )
    };

    let eta = EtaLift::new(std::sync::Arc::new(move |theta| {
        let env = expr::Env::point_free(theta, Interval::point(0.0), Interval::point(0.0));
        eta_expr.eval(&env).map_err(expr_dyn)
    }));
    let a_coeff = std::sync::Arc::new(move |theta| {
        let env = expr::Env::point_free(theta, Interval::point(0.0), Interval::point(0.0));
        a_expr.eval(&env).map_err(expr_dyn)
    });
    let eval = std::sync::Arc::new(move |alpha, beta, theta, x, y| {
        let env = expr::Env {
            alpha,
            beta,
            theta,
            x,
            y,
            period: Interval::TWO_PI,
        };
        Ok((
            h_theta.eval(&env).map_err(expr_dyn)?,
            h_x.eval(&env).map_err(expr_dyn)?,
            h_y.eval(&env).map_err(expr_dyn)?,
        ))
    });
    let mut h = HomotopySpec::new("custom", eval, eta, a_coeff, base);
    if let Some(range) = family {
        h = h.with_family(range);
    }
    Ok(h)
}
