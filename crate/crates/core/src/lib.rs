//! Numerical toolkit for Gagliardo–Nirenberg type inequalities in
//! rearrangement-invariant spaces.
//!
//! Functions are sampled on uniform cell-centred grids ([`grid`]), reduced
//! to exact step rearrangements ([`rearrange`]) and measured in Lebesgue,
//! Lorentz and Orlicz norms ([`spaces`]). On top of that sit the discrete
//! maximal operator ([`maximal`]), Hölder factorization checks ([`holder`]),
//! the inequality verifiers ([`gn`]) and the dilation falsifier ([`scaling`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gn;
pub mod grid;
pub mod holder;
pub mod maximal;
pub mod numerics;
pub mod rearrange;
pub mod scaling;
pub mod spaces;

pub use error::{Error, Result};
pub use gn::{
    best_constant_scan, mazya_ratio, verify_lorentz, verify_orlicz, verify_ribfs, Form, GNProblem, Verdict,
    VerificationReport,
};
pub use grid::{derivative_tensor, dilate, magnitude, sample, GridFunction, GridShape, TestFamily};
pub use numerics::{Divergence, Witness};
pub use rearrange::{
    hlp_constant, maximal_rearrangement, maximal_step_majorant, rearrange, Segment, StepRearrangement,
};
pub use scaling::{bump_norm_closed_forms, falsify, necessary_condition, FalsifyReport, FalsifyVerdict};
pub use spaces::{
    convexify, fundamental_function, indicator_norm, lorentz_norm, luxemburg_norm, orlicz_modular, space_norm,
    upper_index_estimate, young_inverse, SpaceSpec, YoungFunction,
};
