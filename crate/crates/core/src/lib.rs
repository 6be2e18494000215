//! Palettes, paintings of 3-graphs, palette Lagrangians, palette extremal
//! numbers, weak palette regularity and ordering gadgets.
//!
//! Colors and vertices are 0-based throughout the API. The text formats in
//! [`format`] are 1-based.

pub mod constructions;
pub mod csp;
pub mod error;
pub mod extremal;
pub mod format;
pub mod gadgets;
pub mod graph;
pub mod hom;
pub mod lagrangian;
pub mod painting;
pub mod palette;
pub mod partition;
pub mod regularity;
pub mod search;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{Edge, Pair, ThreeGraph};
pub use painting::Painting;
pub use palette::{Palette, Pattern};
pub use partition::{Equipartition, Partition};
pub use search::{Budget, Report, SearchOutcome, Verdict};
pub use weights::WeightVector;
