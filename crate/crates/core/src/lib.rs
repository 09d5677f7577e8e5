//! Numerical laboratory for the mean-squared-error loss landscape of shallow
//! (one hidden layer) neural networks with analytic activations.
//!
//! The crate implements, at desk scale over finite weighted samples:
//!
//! * exact response/cost derivatives up to second order ([`net`], [`cost`]),
//! * the efficient/redundant parameter split with witnesses ([`efficiency`]),
//! * response- and criticality-preserving pruning, extension and redundancy
//!   lines ([`transforms`]),
//! * multivariate polynomial slicing and generalized Vandermonde machinery
//!   ([`polyslice`]),
//! * Gaussian random targets, damped-Newton critical point search, and the
//!   Morse Monte-Carlo harness ([`experiments`]).
//!
//! The narrative guide lives in `book/`; its code blocks compile as doctests
//! of this crate, so the guide cannot drift from the API.

// index-synchronized loops over multiple buffers are the norm here
#![allow(clippy::needless_range_loop)]

pub mod cost;
pub mod efficiency;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod net;
pub mod polyslice;
pub mod rng;
pub mod transforms;

pub use error::{Error, Result};

// Compile the guide's code blocks as doctests.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }
    chapter!(Intro, "../../../book/src/intro.md");
    chapter!(Networks, "../../../book/src/networks.md");
    chapter!(Cost, "../../../book/src/cost.md");
    chapter!(Efficiency, "../../../book/src/efficiency.md");
    chapter!(Transforms, "../../../book/src/transforms.md");
    chapter!(Polyslice, "../../../book/src/polyslice.md");
    chapter!(Experiments, "../../../book/src/experiments.md");
    chapter!(Cli, "../../../book/src/cli.md");
}
