//! Finite group toolkit built around coset enumeration.
//!
//! The crate materializes finitely presented groups as permutation groups,
//! profiles their Sylow p-subgroups, and classifies generating pairs
//! (sigma1, sigma2) with (sigma1*sigma2)^2 = 1 as rotation groups of regular
//! or chiral polyhedra. Construction helpers build the families of order
//! 2p^m that the verification suites exercise end to end.

pub mod atlas;
pub mod cli;
pub mod constructions;
pub mod coset;
pub mod group;
pub mod pgroup;
pub mod polytope;
pub mod words;

pub use atlas::{
    atlas_append, atlas_diff, atlas_load, search, search_par, search_seq, verify_theorem1_corpus,
    AtlasRecord, DedupeMode, GroupSource, SearchFilters, SearchSpec,
};
pub use constructions::{
    binomial, build_g_case1, build_g_star, build_p, build_theorem2, build_tight, materialize,
    presentation_suite, table1_exponents, verify_lemma_3_1, verify_lemma_3_2, verify_lemma_3_3,
    ConstructError, MaximalClassParams, TheoremTwoParams, TightParams,
};
pub use coset::{enumerate, CosetTable, EnumLimits, Strategy};
pub use group::{ConcreteGroup, ElementSet, GroupElement, Homomorphism, Permutation};
pub use polytope::{classify, Orientation, PolyhedronReport, RotationPair};
pub use words::{parse_presentation, Alphabet, Presentation, Word};
