//! Carbohydrate structure/NMR annotation and chemical-shift regression.
//!
//! The pipeline reads a PDB structure and a shift table, infers bonds,
//! matches monosaccharide residues to shift records through the glycosidic
//! tree, labels atoms with their shifts, derives per-atom features, and
//! trains node-level regressors on the result.
//!
//! ```text
//! structure ─┐
//!            ├─ bonds ─ linkage tree ─ annotate ─ features ─ model ─ analysis
//! shifts ────┘
//! ```

pub mod analysis;
pub mod annotate;
pub mod bonds;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod features;
pub mod labels;
pub mod model;
pub mod shifts;
pub mod structure;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/structures.md")]
    struct Structures;
    #[doc = include_str!("../../../book/src/annotation.md")]
    struct Annotation;
    #[doc = include_str!("../../../book/src/features.md")]
    struct Features;
    #[doc = include_str!("../../../book/src/models.md")]
    struct Models;
    #[doc = include_str!("../../../book/src/analysis.md")]
    struct Analysis;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
