//! Fault-injected variants of the set-valued instances. Each mutation breaks
//! exactly one operation table; the checkers must notice.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Budget, Enumerated, FamilyCS};
use crate::kernel::{CSystem, MorData, MorHandle, ObHandle, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// `q(f, X)` is post-composed with a cyclic shift of the points of `X`
    /// whenever `l(X) >= 2`, which moves points across fibres.
    PermuteQ,
    /// `s_f` is pre-composed with a cyclic shift of the points of its source.
    ShiftSf,
    /// Composites of non-identities with at least two target points have
    /// their first entry shifted.
    TwistComp,
}

#[derive(Debug)]
pub struct MutantCS {
    base: FamilyCS,
    mutation: Mutation,
}

fn rotate_values(data: &[u32], n: u32) -> MorData {
    data.iter().map(|&v| (v + 1) % n).collect()
}

impl MutantCS {
    pub fn new(base: FamilyCS, mutation: Mutation) -> Self {
        MutantCS { base, mutation }
    }

    pub fn base(&self) -> &FamilyCS {
        &self.base
    }

    pub fn mutation(&self) -> Mutation {
        self.mutation
    }

    fn is_identity(f: &MorHandle) -> bool {
        f.source() == f.target() && f.data().iter().enumerate().all(|(i, &v)| i as u32 == v)
    }
}

impl CSystem for MutantCS {
    fn describe(&self) -> String {
        format!("{}+{:?}", self.base.describe(), self.mutation)
    }

    fn pt(&self) -> ObHandle {
        self.base.pt()
    }

    fn ft(&self, x: ObHandle) -> ObHandle {
        self.base.ft(x)
    }

    fn proj(&self, x: ObHandle) -> MorHandle {
        self.base.proj(x)
    }

    fn ident(&self, x: ObHandle) -> MorHandle {
        self.base.ident(x)
    }

    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle> {
        let h = self.base.comp(f, g)?;
        let n = self.base.point_count(h.target()) as u32;
        if self.mutation == Mutation::TwistComp
            && n >= 2
            && !h.data().is_empty()
            && !Self::is_identity(f)
            && !Self::is_identity(g)
        {
            let mut d = MorData::from_slice(h.data());
            d[0] = (d[0] + 1) % n;
            return Ok(MorHandle::new(h.source(), h.target(), d));
        }
        Ok(h)
    }

    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle> {
        self.base.star(f, x)
    }

    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle> {
        let h = self.base.q(f, x)?;
        let n = self.base.point_count(x) as u32;
        if self.mutation == Mutation::PermuteQ && x.len() >= 2 && n >= 2 {
            return Ok(MorHandle::new(h.source(), h.target(), rotate_values(h.data(), n)));
        }
        Ok(h)
    }

    fn sf(&self, f: &MorHandle) -> Result<MorHandle> {
        let h = self.base.sf(f)?;
        let n = h.data().len();
        if self.mutation == Mutation::ShiftSf && n >= 2 {
            let d: MorData = (0..n).map(|y| h.data()[(y + 1) % n]).collect();
            return Ok(MorHandle::new(h.source(), h.target(), d));
        }
        Ok(h)
    }

    fn enum_objects(&self, max_len: usize, budget: &Budget) -> Enumerated<ObHandle> {
        self.base.enum_objects(max_len, budget)
    }

    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, budget: &Budget, seed: u64) -> Enumerated<MorHandle> {
        self.base.enum_morphisms(y, x, budget, seed)
    }

    fn enum_lifts(&self, z: ObHandle, x: ObHandle, base: &MorHandle, cap: usize) -> Enumerated<MorHandle> {
        self.base.enum_lifts(z, x, base, cap)
    }

    fn points(&self, x: ObHandle) -> Result<Vec<Vec<u32>>> {
        self.base.points(x)
    }

    fn ob_key(&self, x: ObHandle) -> Vec<u32> {
        self.base.ob_key(x)
    }

    fn encode_ob(&self, x: ObHandle) -> Value {
        self.base.encode_ob(x)
    }

    fn decode_ob(&self, v: &Value) -> Result<ObHandle> {
        self.base.decode_ob(v)
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle> {
        self.base.decode_mor(v)
    }
}
