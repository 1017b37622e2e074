//! Discrete-time coined quantum-walk search on Johnson graphs `J(n,k)`.
//!
//! Two exact simulators are provided:
//!
//! * [`arc_engine`]: matrix-free evolution over all `N·d` arcs with the Grover
//!   coin, the flip-flop shift, and the marked-vertex reflection.
//! * [`reduced`]: the same search restricted to its `(2k+1)`-dimensional
//!   invariant subspace, in the eigenbasis of the unmarked walk. Cost per
//!   step is independent of `n`.
//!
//! [`spectral`] holds the closed-form spectrum and the run-time schedule,
//! [`oracle`] the dense brute-force checks used to certify both engines.

pub mod arc_engine;
pub mod commands;
pub mod error;
pub mod johnson;
pub mod oracle;
pub mod reduced;
pub mod reports;
pub mod spectral;

pub use arc_engine::{ArcState, ArcWalk, SearchConfig};
pub use error::{Result, WalkError};
pub use johnson::{ArcId, GraphParams, IntersectionRow, JohnsonGraph, VertexId};
pub use reduced::{ReducedOperator, ReducedState, TargetCoords};
pub use reports::{Engine, RunReport, RunRow, SweepReport, SweepRow};
pub use spectral::{Schedule, SpectralTable};
