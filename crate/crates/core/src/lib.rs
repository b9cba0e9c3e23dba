//! Exact computations with simple closed curves on the torus: intersection
//! numbers via the Farey complex, triangulated polygons and their dual
//! trees, minimal maximal-intersection searches, and Ford-circle geometry.

pub mod error;
pub mod families;
pub mod farey;
pub mod hyperbolic;
pub mod ksystem;
pub mod numtheory;
pub mod render;
pub mod triangulation;

pub use error::{Error, Result};
pub use families::{FamilyKind, FamilySpec, TableRow};
pub use farey::{continuant, iota, mediant, reduce, Slope, TurnSequence, UnimodularMap};
pub use hyperbolic::{Geodesic, Horocycle, Point};
pub use ksystem::{BranchProfile, SearchMode, SearchOptions, SearchRecord};
pub use numtheory::GammaGraph;
pub use triangulation::{DualTree, FareyLabelling, HoroballRef, Triangulation};
