//! Exact lattice and K-theory computations for exceptional collections and
//! semi-orthogonal decompositions of rational surfaces.

pub mod arithmetic;
pub mod catalog;
pub mod equivariant;
pub mod error;
pub mod format;
pub mod ktheory;
pub mod lattice;
pub mod linalg;
pub mod mutation;
pub mod selftest;

pub use error::{Error, Result};
pub use lattice::{Base, DivisorClass, DualMode, SurfaceModel};
pub use linalg::IntMatrix;
pub use ktheory::{KClass, Side};
pub use mutation::{Block, Collection, EqualityMode, ExcObject, Move, MoveKind};
pub use arithmetic::{AtomProfile, SmallAtom};
pub use catalog::{Certificate, LinkDescriptor, MoriFibreSpace};
pub use equivariant::{Atom, BurnsideElement, GroupAction, TransitiveGSet};
