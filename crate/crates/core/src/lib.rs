//! Exact computations with affine quasifold groupoids.
//!
//! The crate models quotients `V/Γ` of open box sets by countable affine
//! groups, their atlases and germ groupoids, bibundles between affine étale
//! groupoids presented as families of affine local lifts, the Morita
//! classification of irrational tori, recovery of affine group elements from
//! sampled orbit-preserving maps, and a numerical study of a flat flow whose
//! orbit relation is not carried by any affine structure.
//!
//! Geometry is generic over [`scalar::Field`]. The aliases at the crate root
//! fix the coefficient type: `Exact*` for [`Scalar`] (ℚ and ℚ(√d), with a
//! tolerance-tagged fallback) and `*F64` for plain floats.

pub mod affine;
pub mod bibundle;
pub mod groupoid;
pub mod json;
pub mod lift;
mod linalg;
pub mod model;
pub mod nonexample;
pub mod sampling;
pub mod scalar;
pub mod search;
pub mod torus;

pub use scalar::{Field, Scalar, ScalarError, Sign, DEFAULT_TOL};

/// Three-valued outcome of a bounded search or an exact decision.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T> {
    Yes(T),
    No,
    Unknown,
}

impl<T> Verdict<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }

    pub fn yes(self) -> Option<T> {
        match self {
            Verdict::Yes(t) => Some(t),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Verdict<U> {
        match self {
            Verdict::Yes(t) => Verdict::Yes(f(t)),
            Verdict::No => Verdict::No,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    /// Drops the witness.
    pub fn decided(&self) -> Verdict<()> {
        match self {
            Verdict::Yes(_) => Verdict::Yes(()),
            Verdict::No => Verdict::No,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        }
    }
}

pub type ExactAffineMap = affine::AffineMap<Scalar>;
pub type ExactAffineGroup = affine::AffineGroup<Scalar>;
pub type ExactGroupElement = affine::GroupElement<Scalar>;
pub type ExactOpenBoxSet = model::OpenBoxSet<Scalar>;
pub type ExactModelQuasifold = model::ModelQuasifold<Scalar>;
pub type ExactAtlas = model::Atlas<Scalar>;
pub type ExactGermArrow = groupoid::GermArrow<Scalar>;
pub type ExactEtaleGroupoid = groupoid::EtaleGroupoid<Scalar>;
pub type ExactLiftFamily = bibundle::LiftFamily<Scalar>;

pub type AffineMapF64 = affine::AffineMap<f64>;
pub type AffineGroupF64 = affine::AffineGroup<f64>;
pub type OpenBoxSetF64 = model::OpenBoxSet<f64>;
pub type EtaleGroupoidF64 = groupoid::EtaleGroupoid<f64>;
pub type LiftFamilyF64 = bibundle::LiftFamily<f64>;
pub type FlatFlowF64 = nonexample::FlatFlow<f64>;
pub type FlatFlowF32 = nonexample::FlatFlow<f32>;
