//! twistkit: an exact symbolic verifier for the first-order deformation
//! computation attached to an explicit family of degree-`d` hypersurfaces.
//!
//! The crate rebuilds, for any `d >= 3`, the hypersurface equation, the
//! thickened line family over a square-zero Artin base, the normal-bundle
//! map with its constant/nilpotent split, a kernel basis, and the derivative
//! matrix whose surjectivity it certifies by an exact determinant over the
//! ring of generic constants, cross-checked by randomized prime-field
//! specializations. All arithmetic is exact; there is no floating point.

pub mod artin;
pub mod bigraded;
pub mod context;
pub mod derivative;
pub mod divisor;
pub mod error;
pub mod family;
pub mod figures;
pub mod linalg;
pub mod modules;
pub mod nil;
pub mod normal_bundle;
pub mod params;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod splitting;

pub use error::{Error, Result};

/// Rational scalars used by the symbolic pipeline.
pub type Rat = scalar::Rat;
/// The prime field used for randomized cross-checks.
pub type Fp62 = scalar::Fp62;
/// Polynomials in the generic constants over the rationals.
pub type QPoly = poly::ParamPoly<Rat>;
/// Polynomials in the generic constants over the specialization field.
pub type FpPoly = poly::ParamPoly<Fp62>;
/// Artin-ring elements with rational coefficients.
pub type QArtin = artin::ArtinElement<Rat>;
/// Bihomogeneous sections with rational Artin coefficients.
pub type QBiSection = bigraded::BiSection<Rat>;
/// Rational matrices.
pub type QMat = linalg::Mat<Rat>;
