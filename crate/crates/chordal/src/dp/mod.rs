//! Memoized counter functions for chordal graphs with a prescribed
//! automorphism, and the term machinery the sampler shares with them.

mod cache;
mod ctx;
pub mod families;
pub mod key;
mod layout;

pub use cache::{load_memo, save_memo};
pub use ctx::{base_case_value, DpContext, Term, TermMeta};
pub use key::{CounterKey, CounterKind, Mask};
pub use layout::Layout;
