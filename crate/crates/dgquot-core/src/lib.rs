//! Exact deformation-theoretic machinery for moduli of graded submodules.
//!
//! Fix a nonnegatively graded ring `A` (unital, degreewise finite), a graded
//! `A`-module `M` supported in degrees `>= a`, and a dimension profile
//! `h(s)` for `a <= s <= t`.  This crate builds the finite-dimensional graded
//! Lie algebra whose degree-1 Maurer-Cartan solutions are pairs (an
//! `A`-module structure on an abstract graded space `S` with `dim S_s =
//! h(s)`, a degree-0 module map `S -> M`), all computed over an exact field:
//! arbitrary-precision rationals or a prime field.
//!
//! On top of that core sit the classical-locus predicates (injectivity and
//! generation rank conditions), gauge actions by products of general linear
//! groups, composition invariants that separate gauge orbits, tangent
//! cohomology of twisted complexes, and free graded-commutative presentations
//! of the dual algebras together with window-to-window comparison maps.
//!
//! Everything is deterministic: basis enumeration is lexicographic, matrices
//! are sparse triplet lists in a canonical order, and all sampling takes an
//! explicit seed.  The crate is `no_std` (with `alloc`); IO, file formats and
//! the command-line driver live in the companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cdga;
pub mod dgla;
pub mod error;
pub mod graded;
pub mod index;
pub mod matrix;
pub mod quot;
pub mod scalar;

pub use error::Error;
