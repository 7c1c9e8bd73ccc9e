//! A workbench for computing with etale groupoids at desk scale.
//!
//! Everything here is finite and explicit: groupoids are arrow tables over
//! object graphs, generalized morphisms are bundles presented by cocycles
//! over covers, group extensions are classified by factor-set search, and
//! closed geodesics on developable orbifolds are found by energy descent on
//! twisted discrete loops.

pub mod bundle;
pub mod cocycle;
pub mod cover;
pub mod crossed;
pub mod curry;
pub mod descent;
pub mod equivariant;
pub mod extension;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod group;
pub mod groupoid;
pub mod hom;
pub mod isometry;
pub mod morphism;
pub mod report;
pub mod specfile;
pub mod twisted;

pub use cover::{localize, Localization, OpenCover};
pub use graph::{ObjId, ObjectGraph};
pub use group::FiniteGroup;
pub use groupoid::{ArrowId, FiniteGroupoid, GroupoidViolation};
pub use hom::{find_natural_transformation, GroupoidHom, NaturalTransformation};
