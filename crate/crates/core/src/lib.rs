//! Computational toolkit for Turán densities of tent families.
//!
//! The crate is organised around five pieces:
//!
//! * [`hypergraph`]: uniform and partial hypergraphs, tents, tent families,
//!   balanced complete r-partite hypergraphs, blowups and structural predicates.
//! * [`hom`]: homomorphism search (plain, partial, injective), hom-freeness and a
//!   tiny-scale exact Turán number search.
//! * [`lagrangian`]: hypergraph Lagrangians and blowup densities.
//! * [`region`]: the polytope `X_{r,k}` of superadditive sequences, maximization of
//!   `∏ x_i` over it, KKT certificates, segment structure, the perturbation
//!   operator and the explicit construction beating `r!/r^r` for small `k`.
//! * [`entropy`]: discrete entropy, mixtures, random edges with uniform ordering,
//!   ratio sequences, entropic density and the partial-forest sampler.
//!
//! Everything is a pure function of its inputs; randomized routines take an
//! explicit seed.

pub mod entropy;
pub mod error;
pub mod exact;
pub mod hom;
pub mod hypergraph;
pub mod lagrangian;
pub mod region;
pub(crate) mod rng;

pub use error::{Error, Result};
pub use hom::{SearchBudget, VertexMap};
pub use hypergraph::{Family, Hypergraph, PartialHypergraph, TentSpec};
