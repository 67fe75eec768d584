/*!
Desk-scale laboratory for optimization-based separation of Mixed-Integer
Rounding (MIR) cuts.

The crate implements the full pipeline around an exact MIP-based MIR
separator:

* [`model`] — MIPs in the equality standard form
  `min f'x + g'v  s.t.  Ax + Cv = b, x,v >= 0, x integer`, conversion from
  general (inequality) form, and exact enumeration oracles for tiny
  instances ([`oracle`]).
* [`solver`] — a dense bounded-variable simplex and a branch-and-bound MIP
  solver that collects every improving incumbent in a solution pool.
* [`mirsep`] — the MIR separation MIP: building it for a fractional point,
  recovering cuts from feasible solutions, violation and validity checks,
  and the reduced (row-restricted) variant.
* [`cutloop`] — the iterative cutting loop with per-round gap-closed
  accounting and an optional constraint classifier.
* [`features`] — the 54 per-constraint features fed to the classifier.
* [`learning`] — labeling, gradient-boosted-tree training, evaluation and
  prediction.
* [`instgen`] — objective-perturbed instance families.
* [`mps`] — an MPS reader for fixed and free format files.
*/

pub mod cutloop;
pub mod features;
pub mod instgen;
pub mod learning;
pub mod mirsep;
pub mod model;
pub mod mps;
pub mod oracle;
pub mod solver;

pub use cutloop::{gap_closed, run_cutting_loop, GapValue, LoopConfig, LoopRun, RoundTrace};
pub use features::{compute_features, FeatureVector, FEATURE_COUNT, FEATURE_SCHEMA_VERSION};
pub use mirsep::{MirCut, SeparationConfig, SeparationModel, SeparationSolution};
pub use model::{GeneralMip, MipInstance, ModelError, Point, RowView, Sense};
pub use solver::{LpSolution, LpStatus, MipSolveResult, MipStatus, SolverConfig};
