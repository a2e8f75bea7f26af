//! Exact-arithmetic toolkit for tamely ramified local Galois representations
//! at desk scale.
//!
//! A tame local Galois representation is modelled as a pair of invertible
//! matrices `(T, S)` over a finite field `GF(ℓ^r)` or a truncated Witt ring
//! `W(k)/ℓ^m`, subject to the single relation `S·T·S⁻¹ = T^q`. Everything
//! here is exact integer arithmetic; there is no floating point anywhere.
//!
//! The crate is organised around six subsystems:
//!
//! * [`rings`] — finite fields `GF(ℓ^r)` and truncated Witt rings
//!   `W(k)/ℓ^m`, with Teichmüller lifts and Hensel roots of principal units;
//! * [`linalg`] — exact linear algebra over both kinds of ring, including a
//!   layered solver over `Z/ℓ^m` and similarity testing of matrix pairs;
//! * [`tame`] — type functions classifying tame pairs, the lifting engine
//!   to `W(k)/ℓ^m`, and the product/tensor/twist/induction constructions;
//! * [`cohom`] — dimensions of local Galois cohomology for the modules
//!   derived from tame pairs (`ad`, `ad⁰`, `Hom`, Tate twists), with an
//!   independent cocycle-system oracle for `H¹`;
//! * [`ledger`] — global dimension bookkeeping: Wiles' formula, the tangent
//!   space inequality, relation bounds, big-image thresholds and the
//!   `N = 3` classification of shapes at `ℓ`;
//! * [`cocycle`] — explicit finite models `M^m ⋊ G` of splitting fields and
//!   the greedy search for separating lifts of Frobenius elements.
//!
//! All randomised searches draw from the deterministic [`rng::SplitMix64`]
//! generator, so every result is reproducible from a single seed.

// index loops are the natural idiom for dense matrix code
#![allow(clippy::needless_range_loop)]

pub mod cocycle;
pub mod cohom;
pub mod error;
pub mod json;
pub mod ledger;
pub mod linalg;
pub mod rings;
pub mod rng;
pub mod tame;

pub use error::{Error, Result};
