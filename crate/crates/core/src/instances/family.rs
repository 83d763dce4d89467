//! Set-valued C-systems over a finite universe of codes.
//!
//! An object of length `n + 1` is a pair `(X, F)` of an object `X` of length
//! `n` and a family `F : points(X) -> codes`; its points are the dependent
//! pairs `(x, e)` with `e < |El(F(x))|`. Morphisms are all functions between
//! point sets, stored as index vectors into the target's canonical point
//! order.
//!
//! Two flavours share this representation:
//! * **context**: families are constant, so objects are tuples of base
//!   types and points are plain cartesian products;
//! * **universe**: families are arbitrary, so objects are telescopes.
//!
//! Base change is table composition, `(f* (X, F)) = (Y, F ∘ f)`, and objects
//! are interned by `(parent, family)`. Strictness of `(gf)* X = g*(f* X)`
//! therefore holds on the nose.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Budget, Enumerated};
use crate::kernel::{CSystem, KernelError, MorData, MorHandle, ObHandle, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Context,
    Universe,
}

#[derive(Debug)]
struct ObjectData {
    len: usize,
    parent: Option<ObHandle>,
    /// Code chosen over each parent point (empty for `pt`).
    family: Vec<u32>,
    /// `offsets[x]..offsets[x + 1]` is the fibre over parent point `x`.
    offsets: Vec<u32>,
    /// Parent point of every point.
    parents: Vec<u32>,
    /// Position of every point inside its fibre.
    elems: Vec<u32>,
    key: Vec<u32>,
}

impl ObjectData {
    fn npoints(&self) -> usize {
        self.parents.len()
    }
}

#[derive(Debug, Default)]
struct Store {
    index: HashMap<(u32, Vec<u32>), u32>,
    objects: Vec<Arc<ObjectData>>,
}

#[derive(Debug)]
pub struct FamilyCS {
    kind: FamilyKind,
    els: Vec<u32>,
    store: RwLock<Store>,
}

impl FamilyCS {
    /// A context instance over base types of the given (positive) sizes.
    pub fn context(base_sizes: &[u32]) -> Result<Self> {
        if base_sizes.is_empty() {
            return Err(KernelError::Decode("base_sizes must be nonempty".into()));
        }
        if base_sizes.contains(&0) {
            return Err(KernelError::Decode("base sizes must be positive".into()));
        }
        Ok(Self::with(FamilyKind::Context, base_sizes.to_vec()))
    }

    /// A universe instance; `els[u]` is the size of `El(u)`.
    pub fn universe(els: &[u32]) -> Result<Self> {
        if els.is_empty() {
            return Err(KernelError::Decode("universe must have at least one code".into()));
        }
        if els.iter().all(|&e| e == 0) {
            return Err(KernelError::Decode("universe needs a code with a nonempty El".into()));
        }
        Ok(Self::with(FamilyKind::Universe, els.to_vec()))
    }

    fn with(kind: FamilyKind, els: Vec<u32>) -> Self {
        let pt = ObjectData {
            len: 0,
            parent: None,
            family: vec![],
            offsets: vec![0, 1],
            parents: vec![0],
            elems: vec![0],
            key: vec![],
        };
        let store = Store { index: HashMap::new(), objects: vec![Arc::new(pt)] };
        FamilyCS { kind, els, store: RwLock::new(store) }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn els(&self) -> &[u32] {
        &self.els
    }

    fn data(&self, x: ObHandle) -> Arc<ObjectData> {
        self.store.read().objects[x.id() as usize].clone()
    }

    pub fn point_count(&self, x: ObHandle) -> usize {
        self.data(x).npoints()
    }

    /// The object `(parent, family)`, interning it on first use.
    pub fn extend(&self, parent: ObHandle, family: Vec<u32>) -> Result<ObHandle> {
        let pdata = self.data(parent);
        if family.len() != pdata.npoints() {
            return Err(KernelError::Decode(format!(
                "family has {} entries but the parent has {} points",
                family.len(),
                pdata.npoints()
            )));
        }
        if let Some(&bad) = family.iter().find(|&&c| c as usize >= self.els.len()) {
            return Err(KernelError::Decode(format!("unknown code {bad}")));
        }
        if self.kind == FamilyKind::Context && family.windows(2).any(|w| w[0] != w[1]) {
            return Err(KernelError::Decode("context families must be constant".into()));
        }
        let key = (parent.id(), family);
        if let Some(&id) = self.store.read().index.get(&key) {
            return Ok(ObHandle::new(id, pdata.len + 1));
        }
        let mut store = self.store.write();
        if let Some(&id) = store.index.get(&key) {
            return Ok(ObHandle::new(id, pdata.len + 1));
        }
        let family = key.1.clone();
        let mut offsets = Vec::with_capacity(family.len() + 1);
        let mut parents = Vec::new();
        let mut elems = Vec::new();
        offsets.push(0);
        for (x, &code) in family.iter().enumerate() {
            for e in 0..self.els[code as usize] {
                parents.push(x as u32);
                elems.push(e);
            }
            offsets.push(parents.len() as u32);
        }
        let mut okey = pdata.key.clone();
        match self.kind {
            // Context keys are type tuples; the family is constant and nonempty.
            FamilyKind::Context => okey.push(family[0]),
            FamilyKind::Universe => okey.extend_from_slice(&family),
        }
        let data = ObjectData {
            len: pdata.len + 1,
            parent: Some(parent),
            family,
            offsets,
            parents,
            elems,
            key: okey,
        };
        let id = store.objects.len() as u32;
        store.objects.push(Arc::new(data));
        store.index.insert(key, id);
        Ok(ObHandle::new(id, pdata.len + 1))
    }

    /// The context object with the given type tuple.
    pub fn context_object(&self, types: &[u32]) -> Result<ObHandle> {
        let mut x = self.pt();
        for &t in types {
            let n = self.point_count(x);
            x = self.extend(x, vec![t; n])?;
        }
        Ok(x)
    }

    /// The telescope with the given layer families.
    pub fn telescope(&self, layers: &[Vec<u32>]) -> Result<ObHandle> {
        let mut x = self.pt();
        for fam in layers {
            x = self.extend(x, fam.clone())?;
        }
        Ok(x)
    }

    /// Layer families from the bottom up.
    pub fn layers(&self, x: ObHandle) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = self.data(x);
        while let Some(parent) = cur.parent {
            out.push(cur.family.clone());
            cur = self.data(parent);
        }
        out.reverse();
        out
    }

    /// Builds a morphism from an index table, checking ranges.
    pub fn mor_from_table(&self, y: ObHandle, x: ObHandle, table: &[u32]) -> Result<MorHandle> {
        let ny = self.point_count(y);
        let nx = self.point_count(x) as u32;
        if table.len() != ny || table.iter().any(|&t| t >= nx) {
            return Err(KernelError::Decode("table does not fit source and target".into()));
        }
        Ok(MorHandle::new(y, x, MorData::from_slice(table)))
    }

    fn point_coords(&self, x: ObHandle) -> Vec<Vec<u32>> {
        let d = self.data(x);
        match d.parent {
            None => vec![vec![]],
            Some(parent) => {
                let below = self.point_coords(parent);
                (0..d.npoints())
                    .map(|k| {
                        let mut c = below[d.parents[k] as usize].clone();
                        c.push(d.elems[k]);
                        c
                    })
                    .collect()
            }
        }
    }

    fn families_over(&self, n: usize, cap: usize) -> (Vec<Vec<u32>>, bool) {
        let codes = self.els.len() as u32;
        match self.kind {
            FamilyKind::Context => ((0..codes).map(|t| vec![t; n]).collect(), false),
            FamilyKind::Universe => {
                let mut out = Vec::new();
                let truncated = odometer(n, |_| codes, cap, |v| out.push(v.to_vec()));
                (out, truncated)
            }
        }
    }
}

/// Visits index vectors of length `n` with digit `i` below `radix(i)` in
/// lexicographic order; stops after `cap` vectors and reports truncation.
pub(crate) fn odometer(
    n: usize,
    radix: impl Fn(usize) -> u32,
    cap: usize,
    mut visit: impl FnMut(&[u32]),
) -> bool {
    if (0..n).any(|i| radix(i) == 0) {
        return false;
    }
    let mut digits = vec![0u32; n];
    let mut count = 0usize;
    loop {
        if count == cap {
            return true;
        }
        visit(&digits);
        count += 1;
        let mut i = n;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radix(i) {
                break;
            }
            digits[i] = 0;
        }
    }
}

pub(crate) fn mix_seed(seed: u64, parts: &[&[u32]]) -> u64 {
    // FNV-1a over the parts, with separators.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for part in parts {
        for &w in *part {
            h ^= w as u64 + 1;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl CSystem for FamilyCS {
    fn describe(&self) -> String {
        match self.kind {
            FamilyKind::Context => format!("context{:?}", self.els),
            FamilyKind::Universe => format!("universe{:?}", self.els),
        }
    }

    fn pt(&self) -> ObHandle {
        ObHandle::new(0, 0)
    }

    fn ft(&self, x: ObHandle) -> ObHandle {
        self.data(x).parent.unwrap_or(x)
    }

    fn proj(&self, x: ObHandle) -> MorHandle {
        let d = self.data(x);
        match d.parent {
            None => self.ident(x),
            Some(parent) => MorHandle::new(x, parent, MorData::from_slice(&d.parents)),
        }
    }

    fn ident(&self, x: ObHandle) -> MorHandle {
        let n = self.point_count(x) as u32;
        MorHandle::new(x, x, (0..n).collect())
    }

    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle> {
        if f.target() != g.source() {
            return Err(KernelError::domain("comp", "target(f) != source(g)"));
        }
        let gd = g.data();
        Ok(MorHandle::new(f.source(), g.target(), f.data().iter().map(|&i| gd[i as usize]).collect()))
    }

    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle> {
        let xd = self.data(x);
        let Some(parent) = xd.parent else {
            return Err(KernelError::domain("star", "l(X) = 0"));
        };
        if f.target() != parent {
            return Err(KernelError::domain("star", "target(f) != ft(X)"));
        }
        let fam = f.data().iter().map(|&i| xd.family[i as usize]).collect();
        self.extend(f.source(), fam)
    }

    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle> {
        let fx = self.star(f, x)?;
        let xd = self.data(x);
        let sd = self.data(fx);
        let fdata = f.data();
        let table = (0..sd.npoints())
            .map(|k| xd.offsets[fdata[sd.parents[k] as usize] as usize] + sd.elems[k])
            .collect();
        Ok(MorHandle::new(fx, x, table))
    }

    fn sf(&self, f: &MorHandle) -> Result<MorHandle> {
        let x = f.target();
        let xd = self.data(x);
        if xd.parent.is_none() {
            return Err(KernelError::domain("s_f", "target has length 0"));
        }
        let fam = f.data().iter().map(|&i| xd.family[xd.parents[i as usize] as usize]).collect();
        let w = self.extend(f.source(), fam)?;
        let wd = self.data(w);
        let table = f.data().iter().enumerate().map(|(y, &i)| wd.offsets[y] + xd.elems[i as usize]).collect();
        Ok(MorHandle::new(f.source(), w, table))
    }

    fn enum_objects(&self, max_len: usize, budget: &Budget) -> Enumerated<ObHandle> {
        let mut all = vec![self.pt()];
        let mut layer = vec![self.pt()];
        let mut truncated = false;
        for _ in 0..max_len {
            let mut next = Vec::new();
            for &x in &layer {
                let (fams, t) = self.families_over(self.point_count(x), budget.hom_cap);
                truncated |= t;
                for fam in fams {
                    let obj = self.extend(x, fam).expect("families are well formed");
                    if self.point_count(obj) > budget.point_cap {
                        truncated = true;
                    } else {
                        next.push(obj);
                    }
                }
            }
            all.extend_from_slice(&next);
            layer = next;
        }
        Enumerated { items: all, truncated }
    }

    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, budget: &Budget, seed: u64) -> Enumerated<MorHandle> {
        let ny = self.point_count(y);
        let nx = self.point_count(x) as u32;
        let total = (nx as u128).checked_pow(ny as u32);
        let mk = |t: &[u32]| MorHandle::new(y, x, MorData::from_slice(t));
        match total {
            Some(t) if t <= budget.hom_cap as u128 => {
                let mut items = Vec::with_capacity(t as usize);
                odometer(ny, |_| nx, usize::MAX, |v| items.push(mk(v)));
                Enumerated::full(items)
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
                    seed,
                    &[&self.data(y).key, &[ny as u32], &self.data(x).key, &[nx]],
                ));
                let mut seen = std::collections::BTreeSet::new();
                while seen.len() < budget.hom_cap {
                    let t: Vec<u32> = (0..ny).map(|_| rng.gen_range(0..nx)).collect();
                    seen.insert(t);
                }
                Enumerated { items: seen.iter().map(|t| mk(t)).collect(), truncated: true }
            }
        }
    }

    fn enum_lifts(&self, z: ObHandle, x: ObHandle, base: &MorHandle, cap: usize) -> Enumerated<MorHandle> {
        let xd = self.data(x);
        if xd.parent != Some(base.target()) || base.source() != z {
            return Enumerated::full(vec![]);
        }
        let b = base.data();
        let start = |k: usize| xd.offsets[b[k] as usize];
        let width = |k: usize| xd.offsets[b[k] as usize + 1] - start(k);
        let mut items = Vec::new();
        let truncated = odometer(b.len(), width, cap, |v| {
            let t: MorData = v.iter().enumerate().map(|(k, &e)| start(k) + e).collect();
            items.push(MorHandle::new(z, x, t));
        });
        Enumerated { items, truncated }
    }

    fn points(&self, x: ObHandle) -> Result<Vec<Vec<u32>>> {
        Ok(self.point_coords(x))
    }

    fn ob_key(&self, x: ObHandle) -> Vec<u32> {
        self.data(x).key.clone()
    }

    fn encode_ob(&self, x: ObHandle) -> Value {
        match self.kind {
            FamilyKind::Context => json!(self.data(x).key),
            FamilyKind::Universe => json!(self.layers(x)),
        }
    }

    fn decode_ob(&self, v: &Value) -> Result<ObHandle> {
        let bad = || KernelError::Decode(format!("not an object encoding: {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        match self.kind {
            FamilyKind::Context => {
                let types = arr
                    .iter()
                    .map(|t| t.as_u64().map(|t| t as u32).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                self.context_object(&types)
            }
            FamilyKind::Universe => {
                let layers = arr
                    .iter()
                    .map(|layer| {
                        layer
                            .as_array()
                            .ok_or_else(bad)?
                            .iter()
                            .map(|c| c.as_u64().map(|c| c as u32).ok_or_else(bad))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.telescope(&layers)
            }
        }
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle> {
        let y = self.decode_ob(&v["source"])?;
        let x = self.decode_ob(&v["target"])?;
        let table = v["map"]
            .as_array()
            .ok_or_else(|| KernelError::Decode(format!("morphism without map: {v}")))?
            .iter()
            .map(|t| {
                t.as_u64().map(|t| t as u32).ok_or_else(|| KernelError::Decode(format!("bad map entry {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.mor_from_table(y, x, &table)
    }
}

/// The homomorphism between context instances induced by a map of base
/// types that preserves base sizes. Point sets are carried over unchanged,
/// so morphism tables are too.
#[derive(Debug, Clone)]
pub struct ContextRelabel {
    pub type_map: Vec<u32>,
}

impl ContextRelabel {
    pub fn new(source: &FamilyCS, target: &FamilyCS, type_map: Vec<u32>) -> Result<Self> {
        if source.kind != FamilyKind::Context || target.kind != FamilyKind::Context {
            return Err(KernelError::Unsupported("relabeling of non-context instances"));
        }
        if type_map.len() != source.els.len() {
            return Err(KernelError::Decode("type map must cover every base type".into()));
        }
        for (t, &u) in type_map.iter().enumerate() {
            match target.els.get(u as usize) {
                Some(&size) if size == source.els[t] => {}
                _ => return Err(KernelError::Decode(format!("type {t} cannot map to {u}"))),
            }
        }
        Ok(ContextRelabel { type_map })
    }

    pub fn map_ob(&self, source: &FamilyCS, target: &FamilyCS, x: ObHandle) -> ObHandle {
        let types: Vec<u32> = source.ob_key(x).iter().map(|&t| self.type_map[t as usize]).collect();
        target.context_object(&types).expect("relabeling preserves well-formedness")
    }

    pub fn map_mor(&self, source: &FamilyCS, target: &FamilyCS, f: &MorHandle) -> MorHandle {
        MorHandle::new(
            self.map_ob(source, target, f.source()),
            self.map_ob(source, target, f.target()),
            MorData::from_slice(f.data()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn context_counts() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let x = cs.context_object(&[0, 0]).unwrap();
        assert_eq!(cs.point_count(x), 4);
        let y = cs.context_object(&[0]).unwrap();
        assert_eq!(cs.enum_morphisms(y, x, &budget(), 0).items.len(), 16);
        let cs23 = FamilyCS::context(&[2, 3]).unwrap();
        let x = cs23.context_object(&[0, 1]).unwrap();
        let pts = cs23.points(x).unwrap();
        assert_eq!(pts.len(), 6);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
    }

    #[test]
    fn singleton_context_is_terminal_like() {
        let cs = FamilyCS::context(&[1]).unwrap();
        let objs = cs.enum_objects(3, &budget()).items;
        for &y in &objs {
            assert_eq!(cs.point_count(y), 1);
            for &x in &objs {
                assert_eq!(cs.enum_morphisms(y, x, &budget(), 0).items.len(), 1);
            }
        }
    }

    #[test]
    fn interning_is_structural() {
        let cs = FamilyCS::universe(&[1, 2]).unwrap();
        let a = cs.telescope(&[vec![1], vec![0, 1]]).unwrap();
        let b = cs.telescope(&[vec![1], vec![0, 1]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(cs.decode_ob(&cs.encode_ob(a)).unwrap(), a);
        assert_eq!(cs.point_count(a), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(FamilyCS::context(&[]).is_err());
        assert!(FamilyCS::universe(&[0, 0]).is_err());
        let cs = FamilyCS::context(&[2, 2]).unwrap();
        let x = cs.context_object(&[0]).unwrap();
        assert!(cs.extend(x, vec![0, 1]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let x = cs.context_object(&[0, 0, 0]).unwrap();
        let a = cs.enum_morphisms(x, x, &budget(), 7);
        let b = cs.enum_morphisms(x, x, &budget(), 7);
        assert!(a.truncated);
        assert_eq!(a.items.len(), 4096);
        assert_eq!(a.items, b.items);
        let c = cs.enum_morphisms(x, x, &budget(), 8);
        assert_ne!(a.items, c.items);
    }

    #[test]
    fn lifts_match_filtered_hom() {
        let cs = FamilyCS::universe(&[1, 2]).unwrap();
        let objs = cs.enum_objects(2, &budget()).items;
        for &z in &objs {
            for &x in objs.iter().filter(|x| !x.is_pt()) {
                for base in cs.enum_morphisms(z, cs.ft(x), &budget(), 0).items {
                    let fast = cs.enum_lifts(z, x, &base, 4096).items;
                    let p = cs.proj(x);
                    let slow: Vec<_> = cs
                        .enum_morphisms(z, x, &budget(), 0)
                        .items
                        .into_iter()
                        .filter(|g| cs.comp(g, &p).unwrap() == base)
                        .collect();
                    assert_eq!(fast, slow);
                }
            }
        }
    }
}
