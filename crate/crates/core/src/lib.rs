//! Validated verification of topological covering relations for maps on
//! vector bundles over the circle, with an invariant-set enclosure finder
//! and plot-data export.
//!
//! The crate is organized around six modules:
//!
//! - [`interval`]: rigorous interval arithmetic with outward rounding — the
//!   trust base for everything else;
//! - [`geometry`]: the domain over the base circle, its exit and entry
//!   sets, and subdivision into cells;
//! - [`dynamics`]: interval extensions of the built-in example maps and
//!   homotopies, plus user-defined ones;
//! - [`covering`]: the verification engine for exit, entry, expansion, and
//!   degree conditions and the fiberwise/full covering verdicts;
//! - [`enclosure`]: discard-and-refine invariant-set enclosure;
//! - [`config`] / [`report`] / [`expr`]: CLI-facing configuration, the
//!   expression language, and machine-readable outputs.

pub mod config;
pub mod covering;
pub mod dynamics;
pub mod enclosure;
pub mod expr;
pub mod geometry;
pub mod interval;
pub mod report;

pub use covering::{
    check_entry, check_exit, check_expansion, compute_degree, nhim_min_k, verify_fiber_covering,
    verify_full_covering, verify_sequence, CoveringReport, Verdict,
};
pub use dynamics::{builtin, BuiltinSystem, EtaLift, HomotopySpec, MapSpec};
pub use enclosure::{propagate, slice, EnclosureRun, EnclosureSpec};
pub use geometry::{exit_faces, subdivide, wrap, Cell, DomainSpec, SubdivisionScheme};
pub use interval::Interval;
