//! Shape optimization by baseline morphing with batch Bayesian search.
//!
//! The crate has two halves that meet in [`optimizer`]:
//!
//! * a geometry half ([`morph`]) that represents swept shapes as radial
//!   matrices over a shared collocation grid, blends baseline shapes into
//!   new designs, checks them for geometric validity, and projects them
//!   back into 3-D point clouds;
//! * a search half ([`gp`], [`acquisition`], [`hedge`]) that fits a
//!   Gaussian-process surrogate to evaluated designs, proposes batches of
//!   candidates through a portfolio of acquisition functions, and hedges
//!   among the portfolio members based on their past nominations.
//!
//! [`objectives`] supplies analytic benchmark functions, the pressure
//! recovery relations, a desk-scale geometric proxy objective, and a
//! line-protocol client for plugging in an external evaluator process.

pub mod acquisition;
pub mod gp;
pub mod hedge;
mod linalg;
pub mod morph;
pub mod objectives;
pub mod optimizer;
