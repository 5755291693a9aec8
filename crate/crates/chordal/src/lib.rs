//! Exact counting and uniform random generation of chordal graphs, in three
//! regimes: labeled, labeled with a prescribed automorphism (parameterized by
//! its number of moved points), and unlabeled via rejection over
//! automorphism classes. A brute-force oracle validates every component at
//! small n.

pub mod dp;
pub mod error;
pub mod format;
pub mod graph;
pub mod math;
pub mod oracle;
pub mod perm;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod unlabeled;

pub use dp::{CounterKey, CounterKind, DpContext, Mask};
pub use graph::{evaporation_sequence, glue, is_automorphism, phi, LabeledGraph};
pub use perm::Permutation;
pub use rng::RandomStream;
