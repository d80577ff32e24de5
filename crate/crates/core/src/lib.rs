//! Kernel for reasoning about formal architectures.
//!
//! An [`Architecture`] is a finite universe of elements with named finitary
//! relations and partial functions over it. On top of that the crate offers
//! views and viewpoints ([`views`]), homomorphism checking and search
//! ([`morphism`]), identity and composition ([`category`]), n-tier
//! recognition ([`tiers`]), a bridge to directed graphs and a DOT subset
//! ([`graphbridge`]), common modelling encodings ([`encodings`]) and the
//! `.archc` text format ([`format`]).
//!
//! ```
//! use archcalc::tiers::{elementary_tier, find_max_tiers, TierConfig};
//!
//! let t4 = elementary_tier(4);
//! assert_eq!(find_max_tiers(&t4, &TierConfig::default()).unwrap().tiers, 4);
//! ```

mod bitset;
pub mod category;
pub mod encodings;
pub mod format;
pub mod generate;
pub mod graphbridge;
pub mod model;
pub mod morphism;
pub mod par;
pub mod report;
pub mod tiers;
pub mod views;

pub use model::{Architecture, ElementId, FunctionTable, Relation, Tuple};
pub use morphism::{Homomorphism, MorphismError};
pub use par::Parallelism;
pub use report::{Code, ValidationReport, Violation};
