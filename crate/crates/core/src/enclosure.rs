//! Invariant-set enclosure by discard-and-refine box subdivision.
//!
//! A coordinate box over the circle is cut into cells; each cell is iterated
//! with interval images and discarded only with a certificate that some
//! iterate is certainly disjoint from the domain. Survivors are bisected in
//! all three coordinates and the procedure repeats. Enclosure soundness of
//! the interval images guarantees that a cell containing even a single point
//! of the invariant object is never discarded.

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::MapSpec;
use crate::geometry::{wrap, Cell};
use crate::interval::Interval;

/// Iterates whose endpoints grow beyond this magnitude stop early; the cell
/// is kept unless disjointness was already certified.
const BLOWUP_GUARD: f64 = 1e60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnclosureError {
    #[error("enclosure grid counts must all be at least 1")]
    BadGrid,
    #[error("max_iterates must be at least 1")]
    BadIterates,
}

/// Domain and schedule for an enclosure run.
#[derive(Debug, Clone)]
pub struct EnclosureSpec {
    pub theta: Interval,
    pub x: Interval,
    pub y: Interval,
    /// Optional certified disc constraint `x^2 + y^2 < r^2`; cells certainly
    /// outside it are discarded.
    pub disc_radius: Option<f64>,
    pub grid: (usize, usize, usize),
    pub max_iterates: usize,
    pub refine_steps: usize,
    pub period: Interval,
}

impl EnclosureSpec {
    /// Box `[0, 2pi] x [-r, r] x [-r, r]`.
    pub fn centered_box(r: f64, grid: (usize, usize, usize)) -> EnclosureSpec {
        EnclosureSpec {
            theta: Interval::new(0.0, Interval::TWO_PI.hi()),
            x: Interval::new(-r, r),
            y: Interval::new(-r, r),
            disc_radius: None,
            grid,
            max_iterates: 3,
            refine_steps: 2,
            period: Interval::TWO_PI,
        }
    }

    pub fn with_disc(mut self, r: f64) -> EnclosureSpec {
        self.disc_radius = Some(r);
        self
    }

    fn validate(&self) -> Result<(), EnclosureError> {
        if self.grid.0 == 0 || self.grid.1 == 0 || self.grid.2 == 0 {
            return Err(EnclosureError::BadGrid);
        }
        if self.max_iterates == 0 {
            return Err(EnclosureError::BadIterates);
        }
        Ok(())
    }
}

/// Why a cell was removed, with the iterate index that certified it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    /// The cell itself is certainly outside the disc constraint.
    OutsideDomain,
    /// Some iterate's image is certainly disjoint from the domain box.
    Escaped { iterate: usize },
}

#[derive(Debug, Clone)]
pub struct DiscardedCell {
    pub cell: Cell,
    pub reason: DiscardReason,
}

/// Cells alive and removed at one refinement step.
#[derive(Debug, Clone, Default)]
pub struct StepCells {
    pub survivors: Vec<Cell>,
    pub discarded: Vec<DiscardedCell>,
}

#[derive(Debug, Clone)]
pub struct EnclosureRun {
    pub spec: EnclosureSpec,
    pub map: MapSpec,
    /// One entry per step: step 0 filters the initial grid, each later step
    /// bisects the previous survivors into eight children first.
    pub steps: Vec<StepCells>,
}

impl EnclosureRun {
    pub fn survivors(&self) -> &[Cell] {
        self.steps
            .last()
            .map(|s| s.survivors.as_slice())
            .unwrap_or(&[])
    }
}

fn initial_grid(spec: &EnclosureSpec) -> Vec<Cell> {
    let (nt, nx, ny) = spec.grid;
    let thetas: Vec<Interval> = (0..nt).map(|i| spec.theta.part(nt, i)).collect();
    let xs: Vec<Interval> = (0..nx).map(|i| spec.x.part(nx, i)).collect();
    let ys: Vec<Interval> = (0..ny).map(|i| spec.y.part(ny, i)).collect();
    let mut cells = Vec::with_capacity(nt * nx * ny);
    for t in &thetas {
        for x in &xs {
            for y in &ys {
                cells.push(Cell::new(*t, *x, *y));
            }
        }
    }
    cells
}

fn octants(cell: &Cell) -> [Cell; 8] {
    let (t0, t1) = cell.theta.bisect();
    let (x0, x1) = cell.x.bisect();
    let (y0, y1) = cell.y.bisect();
    [
        Cell::new(t0, x0, y0),
        Cell::new(t0, x0, y1),
        Cell::new(t0, x1, y0),
        Cell::new(t0, x1, y1),
        Cell::new(t1, x0, y0),
        Cell::new(t1, x0, y1),
        Cell::new(t1, x1, y0),
        Cell::new(t1, x1, y1),
    ]
}

/// Certainly outside the open disc `x^2 + y^2 < r^2`.
fn certainly_outside_disc(x: Interval, y: Interval, r: f64) -> bool {
    let rr = Interval::point(r).power(2);
    x.power(2).add(y.power(2)).lo() >= rr.hi()
}

fn classify(map: &MapSpec, spec: &EnclosureSpec, cell: &Cell) -> Option<DiscardReason> {
    if let Some(r) = spec.disc_radius {
        if certainly_outside_disc(cell.x, cell.y, r) {
            return Some(DiscardReason::OutsideDomain);
        }
    }
    let mut theta = cell.theta;
    let mut x = cell.x;
    let mut y = cell.y;
    for it in 1..=spec.max_iterates {
        let Ok((t_img, x_img, y_img)) = map.eval(theta, x, y) else {
            // Evaluation failure is never a certificate; keep the cell.
            return None;
        };
        let t_wrapped = wrap(t_img, spec.period);
        let disjoint_box = !t_wrapped.intersects(spec.theta)
            || !x_img.intersects(spec.x)
            || !y_img.intersects(spec.y);
        let disjoint_disc = spec
            .disc_radius
            .map(|r| certainly_outside_disc(x_img, y_img, r))
            .unwrap_or(false);
        if disjoint_box || disjoint_disc {
            return Some(DiscardReason::Escaped { iterate: it });
        }
        if !x_img.is_finite()
            || !y_img.is_finite()
            || x_img.abs().hi() > BLOWUP_GUARD
            || y_img.abs().hi() > BLOWUP_GUARD
        {
            return None;
        }
        theta = t_wrapped;
        x = x_img;
        y = y_img;
    }
    None
}

fn filter_step(map: &MapSpec, spec: &EnclosureSpec, cells: Vec<Cell>) -> StepCells {
    let classified: Vec<(Cell, Option<DiscardReason>)> = cells
        .into_par_iter()
        .map(|cell| {
            let reason = classify(map, spec, &cell);
            (cell, reason)
        })
        .collect();
    let mut step = StepCells::default();
    for (cell, reason) in classified {
        match reason {
            None => step.survivors.push(cell),
            Some(reason) => step.discarded.push(DiscardedCell { cell, reason }),
        }
    }
    step
}

/// Runs the discard-and-refine schedule and records survivors per step.
pub fn propagate(map: &MapSpec, spec: &EnclosureSpec) -> Result<EnclosureRun, EnclosureError> {
    spec.validate()?;
    let mut steps = Vec::with_capacity(spec.refine_steps + 1);
    let mut current = initial_grid(spec);
    steps.push(filter_step(map, spec, current));
    for _ in 0..spec.refine_steps {
        current = steps
            .last()
            .unwrap()
            .survivors
            .iter()
            .flat_map(octants)
            .collect();
        steps.push(filter_step(map, spec, current));
    }
    Ok(EnclosureRun {
        spec: spec.clone(),
        map: map.clone(),
        steps,
    })
}

/// Final-step survivors whose theta-interval may contain the given angle
/// (wrapped into the base circle first), for plotting.
pub fn slice(run: &EnclosureRun, theta: f64) -> Vec<Cell> {
    let target = wrap(Interval::point(theta), run.spec.period);
    run.survivors()
        .iter()
        .filter(|c| c.theta.intersects(target))
        .copied()
        .collect()
}

/// Replays the certificate of a discarded cell; used by tests and audits.
pub fn replay_discard(map: &MapSpec, spec: &EnclosureSpec, d: &DiscardedCell) -> bool {
    match classify(map, spec, &d.cell) {
        Some(reason) => reason == d.reason,
        None => false,
    }
}
