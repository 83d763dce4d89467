//! The abstract C-system interface and everything derived from it.
//!
//! Composition is written in diagrammatic order throughout the crate:
//! `comp(f, g)` is "first `f`, then `g`" and is defined exactly when
//! `f.target() == g.source()`. Every equation in this crate is transcribed in
//! that order, so `s_f ; q(ft f, X) = f` reads left to right.

mod axioms;
mod derived;
mod report;

pub use axioms::{
    canonical_squares, check_c0_axioms, check_pullback_universal, check_s_axioms, check_sf_from_pullback,
    CanonicalSquare,
};
pub use derived::{
    ft_iter, ft_mor, ft_offset, level_offset, op_delta, op_ft, op_partial, op_pt, op_s, op_st, op_t, op_tt,
    proj_iter, q_iter, sect_pull, solve_pullback, star_iter,
};
pub use report::{CheckReport, CheckStats, Counterexample, Status, Tally, MAX_COUNTEREXAMPLES};

use serde_json::Value;
use smallvec::SmallVec;
use thiserror::Error;

use crate::instances::{Budget, Enumerated};

/// Payload of a morphism handle. Semantic instances store the point table
/// here; table-backed instances store a class or row index.
pub type MorData = SmallVec<[u32; 8]>;

/// An interned object. `len` is the value of the length function and never
/// changes for a given id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObHandle {
    id: u32,
    len: u32,
}

impl ObHandle {
    pub fn new(id: u32, len: usize) -> Self {
        ObHandle { id, len: len as u32 }
    }

    pub fn id(self) -> u32 {
        self.id
    }

    /// The length `l(X)`; [`ObHandle::is_pt`] is the length-zero test.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_pt(self) -> bool {
        self.len == 0
    }
}

/// A morphism `source -> target`. Two handles of the same instance are equal
/// exactly when they denote the same morphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorHandle {
    source: ObHandle,
    target: ObHandle,
    data: MorData,
}

impl MorHandle {
    pub fn new(source: ObHandle, target: ObHandle, data: MorData) -> Self {
        MorHandle { source, target, data }
    }

    pub fn source(&self) -> ObHandle {
        self.source
    }

    pub fn target(&self) -> ObHandle {
        self.target
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }
}

/// An element of the set of sections of canonical projections: a morphism
/// `s : ft(X) -> X` with `s ; p_X = Id`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Section(MorHandle);

impl Section {
    /// Checks the section equation before wrapping.
    pub fn new(cs: &dyn CSystem, mor: MorHandle) -> Result<Self, KernelError> {
        let x = mor.target();
        if x.is_pt() {
            return Err(KernelError::domain("section", "target has length 0"));
        }
        if mor.source() != cs.ft(x) {
            return Err(KernelError::domain("section", "source is not ft(target)"));
        }
        let back = cs.comp(&mor, &cs.proj(x))?;
        if back != cs.ident(mor.source()) {
            return Err(KernelError::domain("section", "s ; p_X is not the identity"));
        }
        Ok(Section(mor))
    }

    /// Wraps a morphism already known to be a section (e.g. an `s_f`).
    pub(crate) fn new_unchecked(mor: MorHandle) -> Self {
        Section(mor)
    }

    pub fn mor(&self) -> &MorHandle {
        &self.0
    }

    pub fn into_mor(self) -> MorHandle {
        self.0
    }

    /// `∂(s)`, the object the section lands in.
    pub fn boundary(&self) -> ObHandle {
        self.0.target()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("{op} undefined: {reason}")]
    Domain { op: &'static str, reason: String },
    #[error("{op}: result lies outside the enumerated window")]
    OutOfWindow { op: &'static str },
    #[error("{0} is not supported by this instance")]
    Unsupported(&'static str),
    #[error("invalid encoding: {0}")]
    Decode(String),
}

impl KernelError {
    pub fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        KernelError::Domain { op, reason: reason.into() }
    }
}

pub type Result<T, E = KernelError> = std::result::Result<T, E>;

/// The essentially algebraic structure of a C-system, as seen by every
/// generic operation and checker in this crate.
///
/// Instances implement only the base structure (`pt`, `ft`, `p`, `f*X`, `q`,
/// composition, identities, `s_f`) plus bounded enumeration; all iterated
/// operations and the eight `(Ob, Õb)` operations are derived in
/// [`derived`](self) from these.
///
/// Equality of objects and morphisms is handle equality. Implementations
/// must make that coincide with structural equality, so that the strict
/// equations (`id* X = X`, `(gf)* X = g*(f* X)`) can be checked literally.
pub trait CSystem: Send + Sync {
    /// Short human-readable description of the instance configuration.
    fn describe(&self) -> String;

    fn pt(&self) -> ObHandle;

    /// `ft(pt) = pt`.
    fn ft(&self, x: ObHandle) -> ObHandle;

    /// The canonical projection `p_X : X -> ft(X)` (the identity at `pt`).
    fn proj(&self, x: ObHandle) -> MorHandle;

    fn ident(&self, x: ObHandle) -> MorHandle;

    /// Diagrammatic composition `f ; g`.
    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle>;

    /// `f* X` for `l(X) > 0` and `f : Y -> ft(X)`.
    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle>;

    /// `q(f, X) : f* X -> X`.
    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle>;

    /// `s_f : Y -> (ft f)* X` for `f : Y -> X` with `l(X) > 0`.
    fn sf(&self, f: &MorHandle) -> Result<MorHandle>;

    /// All objects of length at most `max_len`, in canonical order.
    fn enum_objects(&self, max_len: usize, budget: &Budget) -> Enumerated<ObHandle>;

    /// The hom-set `Mor(y, x)` in canonical order, sampled deterministically
    /// from `seed` when it exceeds `budget.hom_cap`.
    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, budget: &Budget, seed: u64) -> Enumerated<MorHandle>;

    /// All `g : z -> x` with `g ; p_x = base`, where `base : z -> ft(x)`.
    /// Truncated (never sampled) past `cap`.
    fn enum_lifts(&self, z: ObHandle, x: ObHandle, base: &MorHandle, cap: usize) -> Enumerated<MorHandle> {
        let budget = Budget { point_cap: usize::MAX, hom_cap: cap };
        let all = self.enum_morphisms(z, x, &budget, 0);
        let p = self.proj(x);
        let items =
            all.items.into_iter().filter(|g| self.comp(g, &p).map(|h| &h == base).unwrap_or(false)).collect();
        Enumerated { items, truncated: all.truncated }
    }

    /// Canonical points of `x`, as coordinate vectors in lexicographic order.
    fn points(&self, _x: ObHandle) -> Result<Vec<Vec<u32>>> {
        Err(KernelError::Unsupported("points"))
    }

    /// A key that orders objects canonically and independently of interning
    /// order. Keys of distinct objects of equal length differ.
    fn ob_key(&self, x: ObHandle) -> Vec<u32>;

    fn encode_ob(&self, x: ObHandle) -> Value;

    fn decode_ob(&self, v: &Value) -> Result<ObHandle>;

    fn encode_mor(&self, f: &MorHandle) -> Value {
        serde_json::json!({
            "source": self.encode_ob(f.source()),
            "target": self.encode_ob(f.target()),
            "map": f.data(),
        })
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle>;

    fn show_ob(&self, x: ObHandle) -> String {
        self.encode_ob(x).to_string()
    }

    fn show_mor(&self, f: &MorHandle) -> String {
        self.encode_mor(f).to_string()
    }
}

/// Canonical ordering key for a morphism: endpoints first, then payload.
pub fn mor_key(cs: &dyn CSystem, f: &MorHandle) -> (usize, Vec<u32>, usize, Vec<u32>, Vec<u32>) {
    (f.source().len(), cs.ob_key(f.source()), f.target().len(), cs.ob_key(f.target()), f.data().to_vec())
}

/// Canonical ordering key for an object.
pub fn ob_sort_key(cs: &dyn CSystem, x: ObHandle) -> (usize, Vec<u32>) {
    (x.len(), cs.ob_key(x))
}
