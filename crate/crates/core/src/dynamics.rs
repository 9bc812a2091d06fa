//! Interval-evaluable maps and homotopies: the built-in example systems plus
//! hooks for config-defined ones.
//!
//! A [`MapSpec`] encloses a continuous map `f: D -> E`; a [`HomotopySpec`]
//! encloses a homotopy `h(alpha, .)` from `f` at `alpha = 0` to the declared
//! model endpoint `(eta(theta); A_theta * x, 0)` at `alpha = 1`. The declared
//! endpoint data (the eta lift and the expansion coefficient) are part of the
//! problem statement and are trusted; a spot-check that the `alpha = 1` image
//! is consistent with them runs in debug builds.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{wrap, Cell};
use crate::interval::{Interval, IntervalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("unknown builtin map `{0}`")]
    UnknownBuiltin(String),
    #[error("parameter `{name}` rejected: {reason}")]
    BadParam { name: String, reason: String },
    #[error("interval evaluation failed{at}: {source}")]
    Eval {
        #[source]
        source: IntervalError,
        at: String,
    },
}

impl DynError {
    pub fn eval(source: IntervalError) -> DynError {
        DynError::Eval {
            source,
            at: String::new(),
        }
    }

    /// Attaches the coordinates of the cell being evaluated.
    pub fn at_cell(self, cell: &Cell) -> DynError {
        match self {
            DynError::Eval { source, .. } => DynError::Eval {
                source,
                at: format!(" at cell {}", describe_cell(cell)),
            },
            other => other,
        }
    }
}

fn describe_cell(c: &Cell) -> String {
    let mut s = format!("theta={} x={} y={}", c.theta, c.x, c.y);
    if let Some(a) = c.alpha {
        s.push_str(&format!(" alpha={a}"));
    }
    if let Some(b) = c.beta {
        s.push_str(&format!(" beta={b}"));
    }
    s
}

pub type Triple = (Interval, Interval, Interval);
pub type MapFn = dyn Fn(Interval, Interval, Interval) -> Result<Triple, DynError> + Send + Sync;
/// Arguments: (alpha, beta, theta, x, y). `beta` is the family parameter and
/// is ignored by homotopies without one.
pub type HomotopyFn =
    dyn Fn(Interval, Interval, Interval, Interval, Interval) -> Result<Triple, DynError>
        + Send
        + Sync;
pub type ScalarFn = dyn Fn(Interval) -> Result<Interval, DynError> + Send + Sync;

/// An interval extension of a continuous map on the bundle.
#[derive(Clone)]
pub struct MapSpec {
    pub name: String,
    eval: Arc<MapFn>,
}

impl MapSpec {
    pub fn new(name: impl Into<String>, eval: Arc<MapFn>) -> MapSpec {
        MapSpec {
            name: name.into(),
            eval,
        }
    }

    pub fn eval(&self, theta: Interval, x: Interval, y: Interval) -> Result<Triple, DynError> {
        (self.eval)(theta, x, y)
    }
}

impl std::fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapSpec").field("name", &self.name).finish()
    }
}

/// A continuous lift of the base-circle map eta, evaluated on lifted angles.
#[derive(Clone)]
pub struct EtaLift {
    lift: Arc<ScalarFn>,
    pub declared_degree: Option<i64>,
}

impl EtaLift {
    pub fn new(lift: Arc<ScalarFn>) -> EtaLift {
        EtaLift {
            lift,
            declared_degree: None,
        }
    }

    /// The lift `theta -> c * theta` of the winding map.
    pub fn linear(c: i64) -> EtaLift {
        let coeff = Interval::point(c as f64);
        EtaLift {
            lift: Arc::new(move |t| Ok(coeff.mul(t))),
            declared_degree: Some(c),
        }
    }

    pub fn with_declared_degree(mut self, d: i64) -> EtaLift {
        self.declared_degree = Some(d);
        self
    }

    pub fn eval(&self, theta: Interval) -> Result<Interval, DynError> {
        (self.lift)(theta)
    }
}

impl std::fmt::Debug for EtaLift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EtaLift")
            .field("declared_degree", &self.declared_degree)
            .finish()
    }
}

/// An interval extension of a homotopy with declared symbolic endpoint.
#[derive(Clone)]
pub struct HomotopySpec {
    pub name: String,
    eval: Arc<HomotopyFn>,
    pub eta: EtaLift,
    a_coeff: Arc<ScalarFn>,
    pub base: MapSpec,
    /// Range of the family parameter, when the homotopy carries one; the
    /// engine subdivides it exactly like alpha.
    pub family: Option<Interval>,
}

impl HomotopySpec {
    pub fn new(
        name: impl Into<String>,
        eval: Arc<HomotopyFn>,
        eta: EtaLift,
        a_coeff: Arc<ScalarFn>,
        base: MapSpec,
    ) -> HomotopySpec {
        HomotopySpec {
            name: name.into(),
            eval,
            eta,
            a_coeff,
            base,
            family: None,
        }
    }

    pub fn with_family(mut self, range: Interval) -> HomotopySpec {
        self.family = Some(range);
        self
    }

    /// A homotopy constant in alpha; useful with separately declared
    /// endpoint data when only fiber conditions are checked.
    pub fn constant(map: MapSpec, eta: EtaLift, a_coeff: Interval) -> HomotopySpec {
        let inner = map.clone();
        HomotopySpec {
            name: format!("{} (constant homotopy)", map.name),
            eval: Arc::new(move |_alpha, _beta, th, x, y| inner.eval(th, x, y)),
            eta,
            a_coeff: Arc::new(move |_| Ok(a_coeff)),
            base: map,
            family: None,
        }
    }

    pub fn eval(
        &self,
        alpha: Interval,
        beta: Interval,
        theta: Interval,
        x: Interval,
        y: Interval,
    ) -> Result<Triple, DynError> {
        (self.eval)(alpha, beta, theta, x, y)
    }

    /// Enclosure of the declared expansion coefficient `A_theta`.
    pub fn a_coeff(&self, theta: Interval) -> Result<Interval, DynError> {
        (self.a_coeff)(theta)
    }
}

impl std::fmt::Debug for HomotopySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomotopySpec")
            .field("name", &self.name)
            .field("family", &self.family)
            .finish()
    }
}

/// Applies the homotopy to a cell. The cell's alpha slot defaults to `[0,1]`
/// and the beta slot to the homotopy's declared family range.
pub fn eval_homotopy(h: &HomotopySpec, cell: &Cell) -> Result<Triple, DynError> {
    let alpha = cell.alpha.unwrap_or(Interval::UNIT);
    let beta = cell
        .beta
        .or(h.family)
        .unwrap_or_else(|| Interval::point(0.0));
    h.eval(alpha, beta, cell.theta, cell.x, cell.y)
        .map_err(|e| e.at_cell(cell))
}

#[derive(Debug, Clone)]
pub enum BuiltinSystem {
    Map(MapSpec),
    Homotopy(HomotopySpec),
}

impl BuiltinSystem {
    pub fn into_homotopy(self) -> Option<HomotopySpec> {
        match self {
            BuiltinSystem::Homotopy(h) => Some(h),
            BuiltinSystem::Map(_) => None,
        }
    }

    pub fn map(&self) -> &MapSpec {
        match self {
            BuiltinSystem::Map(m) => m,
            BuiltinSystem::Homotopy(h) => &h.base,
        }
    }
}

/// Named parameters for builtin systems. Integer-valued parameters (the
/// winding number) are passed as degenerate intervals.
pub type Params = BTreeMap<String, Interval>;

fn param(params: &Params, name: &str) -> Option<Interval> {
    params.get(name).copied()
}

fn mu_param(params: &Params) -> Result<Interval, DynError> {
    let mu = match param(params, "mu") {
        Some(v) => v,
        None => Interval::from_ratio(1, 10).expect("exact divisor"),
    };
    // The toy family contracts on y only for |mu| < 1/2.
    let half = Interval::from_ratio(1, 2).expect("exact divisor");
    if !mu.abs().certainly_less(half) {
        return Err(DynError::BadParam {
            name: "mu".into(),
            reason: format!("|mu| must be certainly below 1/2, got {mu}"),
        });
    }
    Ok(mu)
}

fn beta_param(params: &Params) -> Result<Interval, DynError> {
    let beta = param(params, "beta").unwrap_or_else(|| Interval::point(0.0));
    if !beta.subset(Interval::UNIT) {
        return Err(DynError::BadParam {
            name: "beta".into(),
            reason: format!("beta must lie in [0,1], got {beta}"),
        });
    }
    Ok(beta)
}

fn winding_param(params: &Params) -> Result<i64, DynError> {
    match param(params, "winding") {
        None => Ok(3),
        Some(w) => {
            let v = w.midpoint();
            if w.width() != 0.0 || v.fract() != 0.0 || v.abs() > 1e6 {
                return Err(DynError::BadParam {
                    name: "winding".into(),
                    reason: format!("winding must be a small exact integer, got {w}"),
                });
            }
            Ok(v as i64)
        }
    }
}

fn ie(e: IntervalError) -> DynError {
    DynError::eval(e)
}

/// Looks up a builtin system by name.
///
/// Names: `toy_f0`, `toy_f1`, `toy_fbeta`, `toy_homotopy`, `cap_map`,
/// `cap_homotopy`, `linear_nhim`. Parameters: `mu` (default 1/10, toy and
/// cap families), `beta` (toy family member or range), `winding` (integer
/// base winding, default 3), `a`/`b` (linear_nhim rates), `eta_coeff`
/// (linear_nhim winding, default 1).
pub fn builtin(name: &str, params: &Params) -> Result<BuiltinSystem, DynError> {
    match name {
        "toy_f0" => {
            let mu = mu_param(params)?;
            let w = winding_param(params)?;
            Ok(BuiltinSystem::Map(toy_f0(mu, w)))
        }
        "toy_f1" => {
            let mu = mu_param(params)?;
            let w = winding_param(params)?;
            Ok(BuiltinSystem::Map(toy_f1(mu, w)))
        }
        "toy_fbeta" => {
            let mu = mu_param(params)?;
            let beta = beta_param(params)?;
            let w = winding_param(params)?;
            Ok(BuiltinSystem::Map(toy_fbeta(mu, beta, w)))
        }
        "toy_homotopy" => {
            let mu = mu_param(params)?;
            let beta = beta_param(params)?;
            let w = winding_param(params)?;
            Ok(BuiltinSystem::Homotopy(toy_homotopy(mu, beta, w)))
        }
        "cap_map" => {
            let mu = mu_param(params)?;
            Ok(BuiltinSystem::Map(cap_map(mu)))
        }
        "cap_homotopy" => {
            let mu = mu_param(params)?;
            let w = winding_param(params)?;
            Ok(BuiltinSystem::Homotopy(cap_homotopy(mu, w)))
        }
        "linear_nhim" => {
            let a = param(params, "a").ok_or_else(|| DynError::BadParam {
                name: "a".into(),
                reason: "linear_nhim needs an expansion rate `a`".into(),
            })?;
            let b = param(params, "b").ok_or_else(|| DynError::BadParam {
                name: "b".into(),
                reason: "linear_nhim needs a contraction rate `b`".into(),
            })?;
            let c = match param(params, "eta_coeff") {
                None => 1,
                Some(v) => {
                    let m = v.midpoint();
                    if v.width() != 0.0 || m.fract() != 0.0 {
                        return Err(DynError::BadParam {
                            name: "eta_coeff".into(),
                            reason: format!("must be an exact integer, got {v}"),
                        });
                    }
                    m as i64
                }
            };
            Ok(BuiltinSystem::Homotopy(linear_nhim(a, b, c)))
        }
        other => Err(DynError::UnknownBuiltin(other.into())),
    }
}

fn c(v: f64) -> Interval {
    Interval::point(v)
}

fn wrap_theta(t: Interval) -> Interval {
    wrap(t, Interval::TWO_PI)
}

/// Decoupled toy map `f0(theta; x, y) = (w*theta mod 2pi; 4x, mu*y)`.
pub fn toy_f0(mu: Interval, winding: i64) -> MapSpec {
    let w = c(winding as f64);
    MapSpec::new(
        "toy_f0",
        Arc::new(move |theta, x, y| {
            Ok((wrap_theta(w.mul(theta)), c(4.0).mul(x), mu.mul(y)))
        }),
    )
}

/// Coupled toy map
/// `f1(theta; x, y) = (w*theta mod 2pi; -3x + 5x^3, sin(theta)/2 + mu*y)`.
pub fn toy_f1(mu: Interval, winding: i64) -> MapSpec {
    let w = c(winding as f64);
    MapSpec::new(
        "toy_f1",
        Arc::new(move |theta, x, y| {
            let x_out = c(-3.0).mul(x).add(c(5.0).mul(x.power(3)));
            let y_out = theta.sin().div(c(2.0)).map_err(ie)?.add(mu.mul(y));
            Ok((wrap_theta(w.mul(theta)), x_out, y_out))
        }),
    )
}

fn toy_fbeta_fibers(
    mu: Interval,
    beta: Interval,
    theta: Interval,
    x: Interval,
    y: Interval,
) -> Result<(Interval, Interval), DynError> {
    let one_minus = c(1.0).sub(beta);
    let f0x = c(4.0).mul(x);
    let f1x = c(-3.0).mul(x).add(c(5.0).mul(x.power(3)));
    let x_out = one_minus.mul(f0x).add(beta.mul(f1x));
    let f0y = mu.mul(y);
    let f1y = theta.sin().div(c(2.0)).map_err(ie)?.add(mu.mul(y));
    let y_out = one_minus.mul(f0y).add(beta.mul(f1y));
    Ok((x_out, y_out))
}

/// Convex interpolation `(1-beta) f0 + beta f1` of the toy maps. The theta
/// component is `w*theta` for every member, so it is evaluated directly
/// rather than as a convex combination.
pub fn toy_fbeta(mu: Interval, beta: Interval, winding: i64) -> MapSpec {
    let w = c(winding as f64);
    MapSpec::new(
        "toy_fbeta",
        Arc::new(move |theta, x, y| {
            let (x_out, y_out) = toy_fbeta_fibers(mu, beta, theta, x, y)?;
            Ok((wrap_theta(w.mul(theta)), x_out, y_out))
        }),
    )
}

/// The toy verification homotopy
/// `h(alpha, .) = (1-alpha) f_beta + alpha (w*theta mod 2pi; 2x, 0)`.
///
/// When `beta` is non-degenerate it becomes the homotopy's family parameter
/// and the engine subdivides it alongside alpha.
pub fn toy_homotopy(mu: Interval, beta: Interval, winding: i64) -> HomotopySpec {
    let w = c(winding as f64);
    let eval: Arc<HomotopyFn> = Arc::new(move |alpha, beta, theta, x, y| {
        let (fx, fy) = toy_fbeta_fibers(mu, beta, theta, x, y)?;
        let one_minus = c(1.0).sub(alpha);
        let x_out = one_minus.mul(fx).add(alpha.mul(c(2.0)).mul(x));
        let y_out = one_minus.mul(fy);
        Ok((wrap_theta(w.mul(theta)), x_out, y_out))
    });
    let base = toy_fbeta(mu, beta, winding);
    let h = HomotopySpec::new(
        "toy_homotopy",
        eval,
        EtaLift::linear(winding),
        Arc::new(|_| Ok(c(2.0))),
        base,
    );
    if beta.width() > 0.0 {
        h.with_family(beta)
    } else {
        // A fixed member: bake beta in, no family subdivision needed.
        let mut h = h;
        h.eval = {
            let inner = h.eval.clone();
            Arc::new(move |alpha, _ignored, theta, x, y| inner(alpha, beta, theta, x, y))
        };
        h
    }
}

/// The coupled example map
/// `f(theta; x, y) = (3theta + x y sin(theta) mod 2pi;
///                    4x^3 - 8x/5 + x y / 2,
///                    mu y + 2 sin(theta)/5 + x cos(theta))`.
pub fn cap_map(mu: Interval) -> MapSpec {
    MapSpec::new(
        "cap_map",
        Arc::new(move |theta, x, y| {
            let st = theta.sin();
            let theta_out = wrap_theta(c(3.0).mul(theta).add(x.mul(y).mul(st)));
            let x_out = cap_cubic(x, y)?;
            let y_out = cap_y(mu, theta, x, y)?;
            Ok((theta_out, x_out, y_out))
        }),
    )
}

// -8x/5 + 4x^3 + x*y/2, written as in the reference routine.
fn cap_cubic(x: Interval, y: Interval) -> Result<Interval, DynError> {
    let t1 = c(-8.0).mul(x).div(c(5.0)).map_err(ie)?;
    let t2 = c(4.0).mul(x.power(3));
    let t3 = x.mul(y).div(c(2.0)).map_err(ie)?;
    Ok(t1.add(t2).add(t3))
}

// mu*y + 2 sin(theta)/5 + x cos(theta)
fn cap_y(mu: Interval, theta: Interval, x: Interval, y: Interval) -> Result<Interval, DynError> {
    let t2 = c(2.0).mul(theta.sin()).div(c(5.0)).map_err(ie)?;
    Ok(mu.mul(y).add(t2).add(x.mul(theta.cos())))
}

/// The verification homotopy for [`cap_map`]:
/// `h(alpha, .) = (3theta + (1-alpha) x y sin(theta) mod 2pi;
///                 alpha 2x + (1-alpha)(4x^3 - 8x/5 + x y/2),
///                 (1-alpha)(mu y + 2 sin(theta)/5 + x cos(theta)))`.
pub fn cap_homotopy(mu: Interval, winding: i64) -> HomotopySpec {
    let w = c(winding as f64);
    let eval: Arc<HomotopyFn> = Arc::new(move |alpha, _beta, theta, x, y| {
        let one_minus = c(1.0).sub(alpha);
        let theta_out = wrap_theta(
            w.mul(theta).add(one_minus.mul(x).mul(y).mul(theta.sin())),
        );
        let x_out = alpha
            .mul(c(2.0))
            .mul(x)
            .add(one_minus.mul(cap_cubic(x, y)?));
        let y_out = one_minus.mul(cap_y(mu, theta, x, y)?);
        Ok((theta_out, x_out, y_out))
    });
    HomotopySpec::new(
        "cap_homotopy",
        eval,
        EtaLift::linear(winding),
        Arc::new(|_| Ok(c(2.0))),
        cap_map(mu),
    )
}

/// Linearized dynamics around an invariant circle:
/// `l(theta; x, y) = (c*theta mod 2pi; a x, b y)`, homotoped by scaling the
/// contracting coordinate to zero.
pub fn linear_nhim(a: Interval, b: Interval, eta_coeff: i64) -> HomotopySpec {
    let w = c(eta_coeff as f64);
    let base = MapSpec::new(
        "linear_nhim",
        Arc::new(move |theta, x, y| Ok((wrap_theta(w.mul(theta)), a.mul(x), b.mul(y)))),
    );
    let eval: Arc<HomotopyFn> = Arc::new(move |alpha, _beta, theta, x, y| {
        let y_out = c(1.0).sub(alpha).mul(b).mul(y);
        Ok((wrap_theta(w.mul(theta)), a.mul(x), y_out))
    });
    HomotopySpec::new(
        "linear_nhim",
        eval,
        EtaLift::linear(eta_coeff),
        Arc::new(move |_| Ok(a)),
        base,
    )
}
