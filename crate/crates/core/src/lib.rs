//! Lagrangian and Hamiltonian mechanics on general algebroids.
//!
//! An algebroid on a vector bundle `E -> M` is given here in a single chart by
//! its structure functions: the left anchor `rho[a][i]`, the right anchor
//! `sigma[a][i]` and the bracket coefficients `c[k][i][j]`, all symbolic
//! expressions in the base coordinates `x1..xn`. No bracket axioms are
//! assumed; skew symmetry and the Lie conditions are checked, not imposed.
//!
//! Coordinates follow one convention throughout: `x1..xn` on the base,
//! `y1..ym` on the fibers of `E`, `xi1..xim` on the fibers of `E*`.
//!
//! Modules, bottom up:
//! - [`expr`]: parse, evaluate and differentiate scalar expressions;
//! - [`algebroid`]: structure functions, the linear tensor on `E*`, brackets,
//!   adjoint, transport along bundle isomorphisms, axiom checks;
//! - [`lifts`]: vertical and complete lifts of functions, sections and
//!   2-tensors;
//! - [`dynamics`]: Legendre map, the Euler-Lagrange field, Hamiltonian vector
//!   fields, Noether integrals;
//! - [`models`]: generalized geodesics and generalized Wong equations;
//! - [`integrate`]: fixed-step RK4 with conserved-quantity monitors.

pub mod algebroid;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod lifts;
pub mod linalg;
pub mod models;
pub mod sample;

pub use algebroid::{Algebroid, CheckReport, CotangentPoint, Section, TangentDualPoint};
pub use dynamics::{Hamiltonian, Lagrangian, PhasePoint, VelocityPoint};
pub use error::{Error, Result};
pub use expr::{Env, Expr};
pub use integrate::Trajectory;
