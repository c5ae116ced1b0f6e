//! Machine learning on 2-D graphs in inline-based coordinates.
//!
//! An n-D labeled case is mapped losslessly to a polyline graph in the plane
//! ([`mapping`]). Classification models are then discovered directly in that
//! plane:
//!
//! - [`discovery`] scans grid-aligned boxes and greedily accepts pure ones,
//!   removing the cases they cover, until every case is covered.
//! - [`rules`] turns the acceptance trace into hierarchical box rules
//!   (`x ∈ B5 & x ∉ B1 ⇒ malignant`), and simplifies, joins and prunes them.
//! - [`linear`] fits projection-line threshold models on graph nodes.
//! - [`evaluation`] runs k-fold cross-validation and the worst/best-case
//!   scenario arithmetic.
//! - [`render`] draws datasets, mirrored classes and box overlays as SVG.
//! - [`session`] holds the state of an interactive discovery session, where a
//!   human picks boxes from the ranked candidate list.

pub mod case_study;
pub mod dataset;
pub mod discovery;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod linear;
pub mod mapping;
pub mod render;
pub mod rules;
pub mod session;

pub use dataset::{ClassLabel, LabeledDataset, NDPoint};
pub use discovery::{GridBox, BoxStats, DiscoveryConfig, DiscoveryTrace};
pub use error::{Error, Result};
pub use mapping::{MappingKind, MappingMode, PolylineGraph};
pub use rules::{Prediction, Rule, RuleSet};
