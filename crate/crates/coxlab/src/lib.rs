//! coxlab: exact computations on Coxeter diagrams of compact hyperbolic
//! polytopes.
//!
//! The crate models edge-labeled Coxeter diagrams, computes Gram-matrix
//! determinants and inertia with certified exact arithmetic, classifies
//! subdiagrams (elliptic / parabolic / Lannér / hyperbolic / superhyperbolic),
//! generates and validates diagram catalogs, enumerates the bounded candidate
//! lists used in the classification of compact polytopes with a single pair
//! of divergent facets, and replays the per-dimension verification chains
//! from declarative scripts.

pub mod arith;
pub mod diagram;
pub mod enumerate;
pub mod filt;
pub mod polytope;
pub mod spectra;

pub use arith::{cos_pi_over, sign_of, AlgebraicReal, QuadExt, WeightPoly};
pub use diagram::{canonical_key, Diagram, DiagramError, EdgeLabel, NodeSet};
