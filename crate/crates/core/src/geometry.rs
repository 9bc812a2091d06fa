//! The verification domain over the base circle and its subdivision into
//! cells.
//!
//! The domain is `D = {(theta; x, y) : theta in [0, period), |x| <= r_u,
//! |y| <= r_s}` with exit set `D^- = {|x| = r_u}` and entry set
//! `D^+ = {|y| = r_s}`. Fibers are one-dimensional intervals; the radii are
//! named generically so a ball/box generalization would not change
//! signatures. The stable bundle may be glued with a Mobius twist at the
//! seam; because the domain and every check are symmetric under `y -> -y`,
//! verification works in the local trivialization and the flag is carried
//! only as metadata for plot export.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("fiber radius must be strictly positive and finite, got {0}")]
    BadRadius(String),
    #[error("subdivision counts must all be at least 1")]
    BadScheme,
}

/// The box domain over the circle, with fiber radii and seam metadata.
#[derive(Debug, Clone, Copy)]
pub struct DomainSpec {
    r_u: f64,
    r_s: f64,
    period: Interval,
    pub mobius_stable: bool,
}

impl DomainSpec {
    /// Domain with base period 2*pi and a Mobius-glued stable bundle, as in
    /// the example systems.
    pub fn new(r_u: f64, r_s: f64) -> Result<DomainSpec, GeometryError> {
        if !(r_u.is_finite() && r_u > 0.0) {
            return Err(GeometryError::BadRadius(format!("{r_u}")));
        }
        if !(r_s.is_finite() && r_s > 0.0) {
            return Err(GeometryError::BadRadius(format!("{r_s}")));
        }
        Ok(DomainSpec {
            r_u,
            r_s,
            period: Interval::TWO_PI,
            mobius_stable: true,
        })
    }

    pub fn with_mobius(mut self, mobius: bool) -> DomainSpec {
        self.mobius_stable = mobius;
        self
    }

    pub fn r_u(&self) -> f64 {
        self.r_u
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    /// Enclosure of the base period.
    pub fn period(&self) -> Interval {
        self.period
    }

    /// Coordinate box of the base circle: `[0, period.hi]`, so subdivision
    /// covers every representative even though the float period rounds the
    /// real one down.
    pub fn theta_box(&self) -> Interval {
        Interval::new(0.0, self.period.hi())
    }

    pub fn x_box(&self) -> Interval {
        Interval::new(-self.r_u, self.r_u)
    }

    pub fn y_box(&self) -> Interval {
        Interval::new(-self.r_s, self.r_s)
    }
}

/// Subdivision counts for the homotopy parameter, the base circle, and the
/// two fiber directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionScheme {
    pub n_alpha: usize,
    pub n_theta: usize,
    pub n_x: usize,
    pub n_y: usize,
}

impl SubdivisionScheme {
    pub fn new(
        n_alpha: usize,
        n_theta: usize,
        n_x: usize,
        n_y: usize,
    ) -> Result<SubdivisionScheme, GeometryError> {
        if n_alpha == 0 || n_theta == 0 || n_x == 0 || n_y == 0 {
            return Err(GeometryError::BadScheme);
        }
        Ok(SubdivisionScheme {
            n_alpha,
            n_theta,
            n_x,
            n_y,
        })
    }
}

/// A box `theta x x x y` inside the bundle domain, with optional slots for
/// the homotopy parameter and a family parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub theta: Interval,
    pub x: Interval,
    pub y: Interval,
    pub alpha: Option<Interval>,
    pub beta: Option<Interval>,
}

impl Cell {
    pub fn new(theta: Interval, x: Interval, y: Interval) -> Cell {
        Cell {
            theta,
            x,
            y,
            alpha: None,
            beta: None,
        }
    }

    pub fn with_alpha(mut self, alpha: Interval) -> Cell {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: Interval) -> Cell {
        self.beta = Some(beta);
        self
    }

    /// Splits the widest coordinate (ties resolved in the fixed order alpha,
    /// beta, theta, x, y) into two cells sharing the split point.
    pub fn bisect_widest(&self) -> (Cell, Cell) {
        let widths = [
            self.alpha.map_or(-1.0, Interval::width),
            self.beta.map_or(-1.0, Interval::width),
            self.theta.width(),
            self.x.width(),
            self.y.width(),
        ];
        let mut which = 0;
        for (i, w) in widths.iter().enumerate() {
            if *w > widths[which] {
                which = i;
            }
        }
        let mut a = *self;
        let mut b = *self;
        match which {
            0 => {
                let (l, r) = self.alpha.expect("alpha width picked").bisect();
                a.alpha = Some(l);
                b.alpha = Some(r);
            }
            1 => {
                let (l, r) = self.beta.expect("beta width picked").bisect();
                a.beta = Some(l);
                b.beta = Some(r);
            }
            2 => {
                let (l, r) = self.theta.bisect();
                a.theta = l;
                b.theta = r;
            }
            3 => {
                let (l, r) = self.x.bisect();
                a.x = l;
                b.x = r;
            }
            _ => {
                let (l, r) = self.y.bisect();
                a.y = l;
                b.y = r;
            }
        }
        (a, b)
    }
}

/// Cells covering `[0, period] x [-r_u, r_u] x [-r_s, r_s]`, ordered
/// lexicographically in (theta, x, y) part indices.
pub fn subdivide(d: &DomainSpec, s: &SubdivisionScheme) -> Vec<Cell> {
    let theta_box = d.theta_box();
    let x_box = d.x_box();
    let y_box = d.y_box();
    let mut cells = Vec::with_capacity(s.n_theta * s.n_x * s.n_y);
    for it in 0..s.n_theta {
        let theta = theta_box.part(s.n_theta, it);
        for ix in 0..s.n_x {
            let x = x_box.part(s.n_x, ix);
            for iy in 0..s.n_y {
                cells.push(Cell::new(theta, x, y_box.part(s.n_y, iy)));
            }
        }
    }
    cells
}

/// Cells covering the exit set `D^- = {|x| = r_u}`: the two faces
/// `x = -r_u` and `x = +r_u` as degenerate x-intervals, with theta and y
/// subdivided per scheme. Ordered lexicographically in (face, theta, y).
pub fn exit_faces(d: &DomainSpec, s: &SubdivisionScheme) -> Vec<Cell> {
    let theta_box = d.theta_box();
    let y_box = d.y_box();
    let faces = [
        Interval::point(-d.r_u()),
        Interval::point(d.r_u()),
    ];
    let mut cells = Vec::with_capacity(2 * s.n_theta * s.n_y);
    for face in faces {
        for it in 0..s.n_theta {
            let theta = theta_box.part(s.n_theta, it);
            for iy in 0..s.n_y {
                cells.push(Cell::new(theta, face, y_box.part(s.n_y, iy)));
            }
        }
    }
    cells
}

/// Enclosure of `theta` reduced modulo the period. Inputs spanning a full
/// period, and images that cannot be kept connected inside `[0, period]`,
/// widen to the whole circle; never unsound, only conservative.
pub fn wrap(theta: Interval, period: Interval) -> Interval {
    let full = Interval::new(0.0, period.hi());
    if !theta.is_finite() {
        return full;
    }
    if theta.width() >= period.lo() {
        return full;
    }
    if theta.lo() >= 0.0 && theta.hi() <= period.hi() {
        return theta;
    }
    let base = (theta.lo() / period.lo()).floor();
    for k in [base, base + 1.0, base - 1.0] {
        let shifted = theta.sub(period.mul(Interval::point(k)));
        if shifted.lo() >= 0.0 && shifted.hi() <= period.hi() {
            return shifted;
        }
    }
    full
}
