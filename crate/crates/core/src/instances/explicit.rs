//! Hand-built C0-like structures on finite sets, given by explicit tables.
//! Used for fixtures that no semantic instance can produce, such as a
//! canonical square that is not a pullback.

use std::collections::HashMap;

use serde_json::{json, Value};

use super::family::odometer;
use super::{Budget, Enumerated};
use crate::kernel::{CSystem, KernelError, MorData, MorHandle, ObHandle, Result};

#[derive(Clone, Debug)]
pub struct SetObject {
    pub name: String,
    pub len: usize,
    pub ft: u32,
    pub points: u32,
    /// Image of each point under `p_X`.
    pub proj: Vec<u32>,
}

type StarKey = (u32, u32, MorData, u32);

/// Objects are finite sets, morphisms all functions between them, and base
/// change is looked up in a table. `s_f` is not provided.
#[derive(Clone, Debug, Default)]
pub struct SetPrecategory {
    objects: Vec<SetObject>,
    stars: HashMap<StarKey, (u32, MorData)>,
}

impl SetPrecategory {
    fn handle(&self, id: u32) -> ObHandle {
        ObHandle::new(id, self.objects[id as usize].len)
    }

    fn add(&mut self, name: &str, ft: u32, points: u32, proj: Vec<u32>) -> u32 {
        let len = if self.objects.is_empty() { 0 } else { self.objects[ft as usize].len + 1 };
        self.objects.push(SetObject { name: name.into(), len, ft, points, proj });
        (self.objects.len() - 1) as u32
    }

    fn base_change(&mut self, f: (u32, u32, &[u32]), x: u32, result: u32, q: &[u32]) {
        self.stars.insert((f.0, f.1, MorData::from_slice(f.2), x), (result, MorData::from_slice(q)));
    }

    /// Objects `pt`, `A` (one point), `B` (two points) and `P` over `A` with
    /// two points. Both `!_A^* A` and `!_A^* B` are `P`; the second is the
    /// product `A × B`, the first is not a pullback since the cone
    /// `(Id_A, Id_A)` has two fillers.
    pub fn fat_square() -> Self {
        let mut cs = SetPrecategory::default();
        let pt = cs.add("pt", 0, 1, vec![0]);
        let a = cs.add("A", pt, 1, vec![0]);
        let b = cs.add("B", pt, 2, vec![0, 0]);
        let p = cs.add("P", a, 2, vec![0, 0]);
        cs.base_change((pt, pt, &[0]), a, a, &[0]);
        cs.base_change((pt, pt, &[0]), b, b, &[0, 1]);
        cs.base_change((a, pt, &[0]), a, p, &[0, 0]);
        cs.base_change((a, pt, &[0]), b, p, &[0, 1]);
        cs.base_change((a, a, &[0]), p, p, &[0, 1]);
        cs
    }

    pub fn object(&self, name: &str) -> Option<ObHandle> {
        self.objects.iter().position(|o| o.name == name).map(|i| self.handle(i as u32))
    }

    fn obj(&self, x: ObHandle) -> &SetObject {
        &self.objects[x.id() as usize]
    }
}

impl CSystem for SetPrecategory {
    fn describe(&self) -> String {
        "set-precategory".into()
    }

    fn pt(&self) -> ObHandle {
        self.handle(0)
    }

    fn ft(&self, x: ObHandle) -> ObHandle {
        self.handle(self.obj(x).ft)
    }

    fn proj(&self, x: ObHandle) -> MorHandle {
        MorHandle::new(x, self.ft(x), MorData::from_slice(&self.obj(x).proj))
    }

    fn ident(&self, x: ObHandle) -> MorHandle {
        MorHandle::new(x, x, (0..self.obj(x).points).collect())
    }

    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle> {
        if f.target() != g.source() {
            return Err(KernelError::domain("comp", "target(f) != source(g)"));
        }
        let gd = g.data();
        Ok(MorHandle::new(f.source(), g.target(), f.data().iter().map(|&i| gd[i as usize]).collect()))
    }

    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle> {
        self.q(f, x).map(|q| q.source())
    }

    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle> {
        if x.is_pt() {
            return Err(KernelError::domain("star", "l(X) = 0"));
        }
        if f.target() != self.ft(x) {
            return Err(KernelError::domain("star", "target(f) != ft(X)"));
        }
        let key = (f.source().id(), f.target().id(), MorData::from_slice(f.data()), x.id());
        let (fx, q) = self.stars.get(&key).ok_or(KernelError::OutOfWindow { op: "star" })?;
        Ok(MorHandle::new(self.handle(*fx), x, q.clone()))
    }

    fn sf(&self, _f: &MorHandle) -> Result<MorHandle> {
        Err(KernelError::Unsupported("s_f"))
    }

    fn enum_objects(&self, max_len: usize, _: &Budget) -> Enumerated<ObHandle> {
        let mut all: Vec<ObHandle> =
            (0..self.objects.len() as u32).map(|i| self.handle(i)).filter(|x| x.len() <= max_len).collect();
        all.sort_by_key(|x| (x.len(), x.id()));
        Enumerated::full(all)
    }

    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, budget: &Budget, _: u64) -> Enumerated<MorHandle> {
        let ny = self.obj(y).points as usize;
        let nx = self.obj(x).points;
        let mut items = Vec::new();
        let truncated = odometer(
            ny,
            |_| nx,
            budget.hom_cap,
            |v| items.push(MorHandle::new(y, x, MorData::from_slice(v))),
        );
        Enumerated { items, truncated }
    }

    fn points(&self, x: ObHandle) -> Result<Vec<Vec<u32>>> {
        Ok((0..self.obj(x).points).map(|i| vec![i]).collect())
    }

    fn ob_key(&self, x: ObHandle) -> Vec<u32> {
        vec![x.id()]
    }

    fn encode_ob(&self, x: ObHandle) -> Value {
        json!(self.obj(x).name)
    }

    fn decode_ob(&self, v: &Value) -> Result<ObHandle> {
        v.as_str()
            .and_then(|s| self.object(s))
            .ok_or_else(|| KernelError::Decode(format!("unknown object {v}")))
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle> {
        let y = self.decode_ob(&v["source"])?;
        let x = self.decode_ob(&v["target"])?;
        let map: Vec<u32> =
            serde_json::from_value(v["map"].clone()).map_err(|e| KernelError::Decode(e.to_string()))?;
        if map.len() != self.obj(y).points as usize || map.iter().any(|&i| i >= self.obj(x).points) {
            return Err(KernelError::Decode("map does not fit".into()));
        }
        Ok(MorHandle::new(y, x, MorData::from_slice(&map)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fat_square_shape() {
        let cs = SetPrecategory::fat_square();
        let a = cs.object("A").unwrap();
        let p = cs.object("P").unwrap();
        let bang = cs.proj(a);
        assert_eq!(cs.star(&bang, a).unwrap(), p);
        assert_eq!(cs.ft(p), a);
        assert!(matches!(cs.sf(&cs.ident(a)), Err(KernelError::Unsupported(_))));
        let all = cs.enum_objects(2, &Budget::default()).items;
        assert_eq!(all.len(), 4);
    }
}
