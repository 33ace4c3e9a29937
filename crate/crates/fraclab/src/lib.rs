//! fraclab: a desk-scale laboratory for algorithmic fractal dimensions and
//! optimal outer measures.
//!
//! A bit-exact toy prefix machine induces a computable surrogate for
//! Kolmogorov complexity. On top of it the crate builds:
//!
//! * exhaustive program enumeration and exact shortest-program dynamic
//!   programming ([`machine`], [`table`]);
//! * exact rational geometry — encoded points of `Q^n`, dyadic cubes, and
//!   open balls ([`geometry`]);
//! * the outer measures kappa, nu, and the algorithmic-probability measure,
//!   staged lower-semicomputable approximators, and a globally dominating
//!   mixture ([`measures`]);
//! * local and global dimension estimators over finite resolutions
//!   ([`dimension`]);
//! * domination analysis on dyadic cubes and balls with empirical verdicts
//!   ([`domination`]).
//!
//! The companion guide in `book/` walks through each layer with runnable
//! snippets; `cargo test` keeps them in sync.

pub mod bits;
pub mod config;
pub mod dimension;
pub mod domination;
pub mod geometry;
pub mod machine;
pub mod measures;
pub mod numeric;
pub mod table;

mod book;

pub use bits::{gamma_encode, BitString};
pub use machine::{parse_run, Program, RunOutcome, RunResult, MACHINE_VERSION};
pub use table::{exact_k, ComplexityTable};
