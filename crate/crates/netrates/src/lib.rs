//! Large-deviations inaccuracy rates for consensus+innovations distributed
//! inference and social learning over random networks.
//!
//! Networked agents track the mean of i.i.d. innovations by alternating a
//! local running-average step with DeGroot averaging through a random,
//! symmetric, stochastic weight matrix. The probability that a node's state
//! sits in a "bad" region `C` decays exponentially, and this crate computes
//! sandwich bounds on the decay exponent:
//!
//! ```text
//! I <= I* <= I_i <= I_{i,H} <= N I
//! ```
//!
//! where `I` is the innovation rate function, `I*` is the convex envelope of
//! `inf { N I, I + J }` with `J` the rate of consensus of the graph process,
//! and each `I_{i,H}` lifts `I` by the log-probability of a disconnecting
//! graph collection. A Monte Carlo simulator estimates the empirical decay
//! curves for comparison, and a social-learning layer maps belief recursions
//! onto the same machinery through their log-ratio transform.
//!
//! Modules:
//! - [`graph`]: random network models, cuts, components, rate of consensus.
//! - [`rates`]: Gaussian rate functions, envelope bounds, inaccuracy rates.
//! - [`conjugate`]: discrete Legendre-Fenchel transforms (the numerical
//!   oracle for the closed-form envelopes).
//! - [`sim`]: Monte Carlo engine for the consensus+innovations recursion.
//! - [`social`]: belief-space social learning and its rate functions.
//! - [`config`], [`cli`]: experiment configs and the command-line front end.

pub mod conjugate;
pub mod error;
pub mod graph;
pub mod rates;
pub mod sim;
pub mod social;

pub use error::{Error, Result};
