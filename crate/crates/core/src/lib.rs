//! Deciding topological conjugacy of minimal substitution systems.
//!
//! The library works with primitive substitutions of constant length and the
//! minimal shift systems they generate. Around the basic calculus of
//! substitutions ([`subst`]) and their N-block presentations ([`blocks`]) it
//! builds factor graphs ([`graphs`]), enumerates graph epimorphisms
//! ([`epimorph`]), certifies or refutes candidate factor maps ([`verify`]),
//! and assembles complete lists of substitutive factors and conjugates
//! ([`procedures`]). A command line front end lives in [`cli`].

pub mod blocks;
pub mod cli;
pub mod epimorph;
pub mod graphs;
pub mod letter_map;
pub mod procedures;
pub mod subst;
pub mod verify;

pub use blocks::{block_coding, hat_substitution, BlockCoding, HatBase, ProjectedSystem};
pub use graphs::{block_graph, letter_graph, FactorGraph};
pub use letter_map::LetterMap;
pub use subst::{Alphabet, Aperiodicity, Letter, Substitution, Word};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input that is well formed but outside the domain of the operation
    /// (non-primitive substitution, partition of the wrong alphabet, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Valid request that this implementation does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed rule text. `col` is a 1-based character position.
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
