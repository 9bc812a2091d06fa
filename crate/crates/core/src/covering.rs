//! The verification engine: certifies exit, entry, expansion, and degree
//! conditions, combining them into fiberwise and full covering verdicts.
//!
//! All conditions are open conditions certified on closed boxes, so the
//! engine is one-sided: `NOT_VERIFIED` means "could not verify at this
//! resolution", never "the covering fails". Failed cells are reported as
//! witnesses; each one re-fails its tagged condition when rechecked alone.
//!
//! Cell checks are pure and run in parallel; results are merged in input
//! order, so reports are identical regardless of worker count.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{eval_homotopy, DynError, EtaLift, HomotopySpec};
use crate::geometry::{exit_faces, Cell, DomainSpec, SubdivisionScheme};
use crate::interval::Interval;

/// Cap on stored witness cells per condition; the total failure count is
/// still reported exactly.
const WITNESS_CAP: usize = 64;

/// Once this many failing leaves accumulate under one top-level cell,
/// refinement stops splitting and reports the remaining subcells directly.
const LEAF_FAILURE_BUDGET: u64 = 16;

/// Depth limit for the adaptive bisection inside degree computation.
const DEGREE_SPLIT_DEPTH: usize = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoveringError {
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error("degree not certifiable at depth limit: {0}")]
    DegreeNotCertifiable(String),
    #[error("declared degree {declared} disagrees with rigorously computed degree {computed}")]
    DegreeMismatch { declared: i64, computed: i64 },
    #[error("verify_sequence needs a nonempty sequence")]
    EmptySequence,
    #[error("invalid rates: {0}")]
    BadRates(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    NotVerified,
    Error,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "VERIFIED",
            Verdict::NotVerified => "NOT_VERIFIED",
            Verdict::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fiber,
    Full,
    Sequence,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Fiber => "fiber",
            Mode::Full => "full",
            Mode::Sequence => "sequence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Exit,
    Entry,
    Expansion,
    Degree,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::Exit => "exit",
            Condition::Entry => "entry",
            Condition::Expansion => "expansion",
            Condition::Degree => "degree",
        })
    }
}

#[derive(Debug, Clone)]
pub struct FailedCell {
    pub cell: Cell,
    pub condition: Condition,
}

/// Partial result of one condition check.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub ok: bool,
    pub cells_checked: u64,
    pub failures: Vec<Cell>,
    pub failures_total: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckCounts {
    pub exit: u64,
    pub entry: u64,
    pub expansion: u64,
}

#[derive(Debug, Clone)]
pub struct CoveringReport {
    pub verdict: Verdict,
    pub mode: Mode,
    pub exit_ok: bool,
    pub entry_ok: bool,
    pub expansion_ok: bool,
    pub degree: Option<i64>,
    pub failed_cells: Vec<FailedCell>,
    pub failed_total: u64,
    pub cells_checked: CheckCounts,
    pub wall_time: Duration,
    pub reasons: Vec<String>,
    /// Seam metadata from the domain, carried through for plot consumers;
    /// the checks themselves are symmetric under `y -> -y` and work in the
    /// local trivialization.
    pub mobius_stable: bool,
    /// Per-member reports in sequence mode.
    pub sub_reports: Vec<CoveringReport>,
    pub first_failing_index: Option<usize>,
}

impl CoveringReport {
    fn pending(mode: Mode, d: &DomainSpec) -> CoveringReport {
        CoveringReport {
            verdict: Verdict::Error,
            mode,
            exit_ok: false,
            entry_ok: false,
            expansion_ok: false,
            degree: None,
            failed_cells: Vec::new(),
            failed_total: 0,
            cells_checked: CheckCounts::default(),
            wall_time: Duration::ZERO,
            reasons: Vec::new(),
            mobius_stable: d.mobius_stable,
            sub_reports: Vec::new(),
            first_failing_index: None,
        }
    }

    pub fn deg2(&self) -> Option<i64> {
        self.degree.map(|d| d.rem_euclid(2))
    }
}

struct RefineCtx {
    evals: u64,
    stored: Vec<Cell>,
    failures: u64,
}

fn refine_cell<F>(
    cell: &Cell,
    depth: usize,
    pred: &F,
    ctx: &mut RefineCtx,
) -> Result<(), DynError>
where
    F: Fn(&Cell) -> Result<bool, DynError> + Sync,
{
    ctx.evals += 1;
    if pred(cell)? {
        return Ok(());
    }
    if depth == 0 || ctx.failures >= LEAF_FAILURE_BUDGET {
        ctx.failures += 1;
        if ctx.stored.len() < WITNESS_CAP {
            ctx.stored.push(*cell);
        }
        return Ok(());
    }
    let (a, b) = cell.bisect_widest();
    refine_cell(&a, depth - 1, pred, ctx)?;
    refine_cell(&b, depth - 1, pred, ctx)
}

/// Runs `pred` over `total` cells in parallel with failure-driven bisection,
/// merging outcomes in input order.
fn run_cells<M, F>(
    condition: Condition,
    total: usize,
    make: M,
    pred: F,
    refine_depth: usize,
) -> Result<ConditionCheck, DynError>
where
    M: Fn(usize) -> Cell + Sync,
    F: Fn(&Cell) -> Result<bool, DynError> + Sync,
{
    let outcomes: Result<Vec<RefineCtx>, DynError> = (0..total)
        .into_par_iter()
        .map(|i| {
            let cell = make(i);
            let mut ctx = RefineCtx {
                evals: 0,
                stored: Vec::new(),
                failures: 0,
            };
            refine_cell(&cell, refine_depth, &pred, &mut ctx)?;
            Ok(ctx)
        })
        .collect();
    let outcomes = outcomes?;
    let mut check = ConditionCheck {
        condition,
        ok: true,
        cells_checked: 0,
        failures: Vec::new(),
        failures_total: 0,
    };
    for ctx in outcomes {
        check.cells_checked += ctx.evals;
        check.failures_total += ctx.failures;
        for cell in ctx.stored {
            if check.failures.len() < WITNESS_CAP {
                check.failures.push(cell);
            }
        }
    }
    check.ok = check.failures_total == 0;
    Ok(check)
}

/// Family-parameter parts: homotopies without a family contribute a single
/// `None` slot; with a family, the range is subdivided like alpha.
fn beta_parts(h: &HomotopySpec, n: usize) -> Vec<Option<Interval>> {
    match h.family {
        None => vec![None],
        Some(range) => (0..n).map(|i| Some(range.part(n, i))).collect(),
    }
}

/// Certifies that the homotopy image of the exit set stays outside the
/// domain slab: for every alpha part and exit-face cell, the image
/// x-interval is certainly disjoint from `[-r_u, r_u]` (either side).
pub fn check_exit(
    h: &HomotopySpec,
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> Result<ConditionCheck, DynError> {
    let faces = exit_faces(d, s);
    let betas = beta_parts(h, s.n_alpha);
    let alphas: Vec<Interval> = (0..s.n_alpha)
        .map(|i| Interval::UNIT.part(s.n_alpha, i))
        .collect();
    let x_dom = d.x_box();
    let n_faces = faces.len();
    let total = n_faces * alphas.len() * betas.len();
    run_cells(
        Condition::Exit,
        total,
        |i| {
            let face = i % n_faces;
            let ia = (i / n_faces) % alphas.len();
            let ib = i / (n_faces * alphas.len());
            let mut cell = faces[face].with_alpha(alphas[ia]);
            if let Some(beta) = betas[ib] {
                cell = cell.with_beta(beta);
            }
            cell
        },
        |cell| {
            let (_, xi, _) = eval_homotopy(h, cell)?;
            Ok(xi.certainly_less(x_dom) || x_dom.certainly_less(xi))
        },
        refine_depth,
    )
}

/// Certifies that the homotopy image of the domain avoids the entry set:
/// for every cell of the alpha x theta x fiber grid, either the image
/// x-interval is certainly disjoint from `[-r_u, r_u]` (so the image cannot
/// lie in `D^+`) or the image y-interval is strictly interior to
/// `[-r_s, r_s]`.
pub fn check_entry(
    h: &HomotopySpec,
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> Result<ConditionCheck, DynError> {
    let betas = beta_parts(h, s.n_alpha);
    let alphas: Vec<Interval> = (0..s.n_alpha)
        .map(|i| Interval::UNIT.part(s.n_alpha, i))
        .collect();
    let thetas: Vec<Interval> = (0..s.n_theta)
        .map(|i| d.theta_box().part(s.n_theta, i))
        .collect();
    let xs: Vec<Interval> = (0..s.n_x).map(|i| d.x_box().part(s.n_x, i)).collect();
    let ys: Vec<Interval> = (0..s.n_y).map(|i| d.y_box().part(s.n_y, i)).collect();
    let x_dom = d.x_box();
    let y_dom = d.y_box();
    let total = alphas.len() * betas.len() * s.n_theta * s.n_x * s.n_y;
    run_cells(
        Condition::Entry,
        total,
        |i| {
            let iy = i % s.n_y;
            let ix = (i / s.n_y) % s.n_x;
            let it = (i / (s.n_y * s.n_x)) % s.n_theta;
            let ia = (i / (s.n_y * s.n_x * s.n_theta)) % alphas.len();
            let ib = i / (s.n_y * s.n_x * s.n_theta * alphas.len());
            let mut cell = Cell::new(thetas[it], xs[ix], ys[iy]).with_alpha(alphas[ia]);
            if let Some(beta) = betas[ib] {
                cell = cell.with_beta(beta);
            }
            cell
        },
        |cell| {
            let (_, xi, yi) = eval_homotopy(h, cell)?;
            Ok(xi.certainly_less(x_dom)
                || x_dom.certainly_less(xi)
                || yi.subset_interior(y_dom))
        },
        refine_depth,
    )
}

/// Certifies that the declared endpoint coefficient is expanding: for each
/// theta part, `|A_theta| * r_u` is certainly greater than `r_u`.
pub fn check_expansion(
    h: &HomotopySpec,
    d: &DomainSpec,
    n_theta: usize,
) -> Result<ConditionCheck, DynError> {
    let theta_box = d.theta_box();
    let r_u = Interval::point(d.r_u());
    run_cells(
        Condition::Expansion,
        n_theta,
        |i| {
            Cell::new(theta_box.part(n_theta, i), d.x_box(), d.y_box())
        },
        |cell| {
            let a = h.a_coeff(cell.theta)?;
            Ok(r_u.certainly_less(a.abs().mul(r_u)))
        },
        0,
    )
}

/// Rigorous degree of the circle map described by a continuous lift.
///
/// The lift is evaluated on `n_parts` pieces of `[0, period]`; pieces whose
/// image interval is not certainly narrower than half a period are bisected
/// (catching discontinuous pseudo-lifts). Endpoint increments telescope over
/// shared float boundaries into an enclosure of `L(period) - L(0)`, which
/// must contain exactly one integer multiple of the period.
pub fn compute_degree(
    eta: &EtaLift,
    period: Interval,
    n_parts: usize,
) -> Result<i64, CoveringError> {
    let n_parts = n_parts.max(1);
    let range = Interval::new(0.0, period.hi());
    let half_period = period.lo() / 2.0;

    let mut boundaries = Vec::with_capacity(n_parts + 1);
    boundaries.push(0.0f64);
    for k in 0..n_parts - 1 {
        let b = range.part(n_parts, k).hi();
        boundaries.push(b.clamp(0.0, period.hi()));
    }
    boundaries.push(period.hi());

    let mut total = Interval::point(0.0);
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= b {
            continue;
        }
        total = total.add(piece_increment(eta, a, b, half_period, DEGREE_SPLIT_DEPTH)?);
    }

    if total.width() >= period.lo() {
        return Err(CoveringError::DegreeNotCertifiable(format!(
            "total lift increment {total} is wider than one period"
        )));
    }
    let m0 = (total.midpoint() / period.midpoint()).round();
    if !m0.is_finite() || m0.abs() > 1e15 {
        return Err(CoveringError::DegreeNotCertifiable(format!(
            "total lift increment {total} out of range"
        )));
    }
    let m0 = m0 as i64;
    let mut found = None;
    for m in (m0 - 3)..=(m0 + 3) {
        if Interval::point(m as f64).mul(period).intersects(total) {
            if found.is_some() {
                return Err(CoveringError::DegreeNotCertifiable(format!(
                    "increment {total} is compatible with more than one winding number"
                )));
            }
            found = Some(m);
        }
    }
    found.ok_or_else(|| {
        CoveringError::DegreeNotCertifiable(format!(
            "increment {total} contains no integer multiple of the period"
        ))
    })
}

fn piece_increment(
    eta: &EtaLift,
    a: f64,
    b: f64,
    half_period: f64,
    depth: usize,
) -> Result<Interval, CoveringError> {
    let image = eta.eval(Interval::new(a, b)).map_err(CoveringError::Dyn)?;
    if image.width() >= half_period {
        if depth == 0 {
            return Err(CoveringError::DegreeNotCertifiable(format!(
                "lift image over [{a}, {b}] has width {} >= half a period",
                image.width()
            )));
        }
        let mid = Interval::new(a, b).midpoint();
        if mid <= a || mid >= b {
            return Err(CoveringError::DegreeNotCertifiable(format!(
                "cannot bisect piece [{a}, {b}] further"
            )));
        }
        let left = piece_increment(eta, a, mid, half_period, depth - 1)?;
        let right = piece_increment(eta, mid, b, half_period, depth - 1)?;
        return Ok(left.add(right));
    }
    let at_b = eta.eval(Interval::point(b)).map_err(CoveringError::Dyn)?;
    let at_a = eta.eval(Interval::point(a)).map_err(CoveringError::Dyn)?;
    Ok(at_b.sub(at_a))
}

fn whole_domain_cell(d: &DomainSpec) -> Cell {
    Cell::new(d.theta_box(), d.x_box(), d.y_box()).with_alpha(Interval::UNIT)
}

/// In debug builds, spot-check that the `alpha = 1` image is consistent with
/// the declared symbolic endpoint; the declaration itself is trusted.
fn debug_endpoint_spot_check(h: &HomotopySpec, d: &DomainSpec) {
    if !cfg!(debug_assertions) {
        return;
    }
    let samples = [
        (0.0, 0.5, 0.25),
        (1.0, -0.75, -0.5),
        (3.0, 0.25, 1.0),
    ];
    for (t, xf, yf) in samples {
        let cell = Cell::new(
            Interval::point(t),
            Interval::point(xf * d.r_u()),
            Interval::point(yf * d.r_s()),
        )
        .with_alpha(Interval::point(1.0));
        let Ok((_, xi, yi)) = eval_homotopy(h, &cell) else {
            return;
        };
        let Ok(a) = h.a_coeff(cell.theta) else { return };
        let expected_x = a.mul(cell.x);
        if !yi.contains(0.0) || !xi.intersects(expected_x) {
            eprintln!(
                "warning: homotopy `{}` image at alpha=1 is inconsistent with its declared \
                 endpoint (got x'={xi}, y'={yi}, declared A*x={expected_x})",
                h.name
            );
            return;
        }
    }
}

fn run_condition_checks(
    report: &mut CoveringReport,
    h: &HomotopySpec,
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> Result<(), CoveringError> {
    debug_endpoint_spot_check(h, d);

    let exit = check_exit(h, d, s, refine_depth)?;
    report.exit_ok = exit.ok;
    report.cells_checked.exit = exit.cells_checked;
    record_failures(report, &exit);

    let entry = check_entry(h, d, s, refine_depth)?;
    report.entry_ok = entry.ok;
    report.cells_checked.entry = entry.cells_checked;
    record_failures(report, &entry);

    let expansion = check_expansion(h, d, s.n_theta)?;
    report.expansion_ok = expansion.ok;
    report.cells_checked.expansion = expansion.cells_checked;
    record_failures(report, &expansion);

    Ok(())
}

fn record_failures(report: &mut CoveringReport, check: &ConditionCheck) {
    report.failed_total += check.failures_total;
    if !check.ok {
        report
            .reasons
            .push(format!("{} condition failed on {} cells", check.condition, check.failures_total));
    }
    // check.failures is already capped at WITNESS_CAP per condition.
    for cell in &check.failures {
        report.failed_cells.push(FailedCell {
            cell: *cell,
            condition: check.condition,
        });
    }
}

/// Verifies the fiberwise covering `D_theta => D` for every fiber: exit,
/// entry, and expansion conditions; no degree is required.
pub fn verify_fiber_covering(
    h: &HomotopySpec,
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> CoveringReport {
    let start = Instant::now();
    let mut report = CoveringReport::pending(Mode::Fiber, d);
    match run_condition_checks(&mut report, h, d, s, refine_depth) {
        Ok(()) => {
            report.verdict = if report.exit_ok && report.entry_ok && report.expansion_ok {
                Verdict::Verified
            } else {
                Verdict::NotVerified
            };
        }
        Err(e) => {
            report.verdict = Verdict::Error;
            report.reasons.push(e.to_string());
        }
    }
    report.wall_time = start.elapsed();
    report
}

/// Verifies the full covering `D => D`: the fiber conditions plus a nonzero
/// degree mod 2 of the base circle map.
pub fn verify_full_covering(
    h: &HomotopySpec,
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> CoveringReport {
    let start = Instant::now();
    let mut report = CoveringReport::pending(Mode::Full, d);
    let outcome = (|| -> Result<bool, CoveringError> {
        run_condition_checks(&mut report, h, d, s, refine_depth)?;
        let degree = compute_degree(&h.eta, d.period(), s.n_theta)?;
        if let Some(declared) = h.eta.declared_degree {
            if declared != degree {
                return Err(CoveringError::DegreeMismatch {
                    declared,
                    computed: degree,
                });
            }
        }
        report.degree = Some(degree);
        let degree_ok = degree.rem_euclid(2) == 1;
        if !degree_ok {
            report
                .reasons
                .push(format!("deg2 = 0 (degree {degree} is even)"));
            report.failed_cells.push(FailedCell {
                cell: whole_domain_cell(d),
                condition: Condition::Degree,
            });
            report.failed_total += 1;
        }
        Ok(degree_ok)
    })();
    match outcome {
        Ok(degree_ok) => {
            report.verdict = if report.exit_ok
                && report.entry_ok
                && report.expansion_ok
                && degree_ok
            {
                Verdict::Verified
            } else {
                Verdict::NotVerified
            };
        }
        Err(e) => {
            report.verdict = Verdict::Error;
            report.reasons.push(e.to_string());
        }
    }
    report.wall_time = start.elapsed();
    report
}

/// Verifies a composition of maps: every member must verify the full
/// covering individually. Verification stops at the first failing member.
pub fn verify_sequence(
    hs: &[HomotopySpec],
    d: &DomainSpec,
    s: &SubdivisionScheme,
    refine_depth: usize,
) -> Result<CoveringReport, CoveringError> {
    if hs.is_empty() {
        return Err(CoveringError::EmptySequence);
    }
    let start = Instant::now();
    let mut report = CoveringReport::pending(Mode::Sequence, d);
    report.exit_ok = true;
    report.entry_ok = true;
    report.expansion_ok = true;
    report.verdict = Verdict::Verified;
    for (i, h) in hs.iter().enumerate() {
        let sub = verify_full_covering(h, d, s, refine_depth);
        let verdict = sub.verdict;
        report.exit_ok &= sub.exit_ok;
        report.entry_ok &= sub.entry_ok;
        report.expansion_ok &= sub.expansion_ok;
        report.cells_checked.exit += sub.cells_checked.exit;
        report.cells_checked.entry += sub.cells_checked.entry;
        report.cells_checked.expansion += sub.cells_checked.expansion;
        report.sub_reports.push(sub);
        if verdict != Verdict::Verified {
            report.verdict = verdict;
            report.first_failing_index = Some(i);
            report
                .reasons
                .push(format!("sequence member {i} ({}) did not verify", hs[i].name));
            let sub = report.sub_reports.last().unwrap();
            report.failed_cells = sub.failed_cells.clone();
            report.failed_total = sub.failed_total;
            break;
        }
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Smallest iterate count `k >= 1` with `C * lambda^k < 1`, certified by
/// upward-rounded interval evaluation.
pub fn nhim_min_k(c: f64, lambda: f64) -> Result<u32, CoveringError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(CoveringError::BadRates(format!("C must be positive, got {c}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(CoveringError::BadRates(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    let c_iv = Interval::point(c);
    let lam = Interval::point(lambda);
    let one = Interval::point(1.0);
    for k in 1..=100_000u32 {
        if c_iv.mul(lam.power(k)).certainly_less(one) {
            return Ok(k);
        }
    }
    Err(CoveringError::BadRates(
        "no k <= 100000 certifies C * lambda^k < 1".into(),
    ))
}
