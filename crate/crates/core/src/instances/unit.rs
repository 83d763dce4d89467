//! The degenerate C-system with one object per length and exactly one
//! morphism in every hom-set.

use serde_json::{json, Value};

use super::{Budget, Enumerated};
use crate::kernel::{CSystem, KernelError, MorData, MorHandle, ObHandle, Result};

#[derive(Debug, Default, Clone)]
pub struct UnitCS;

impl UnitCS {
    pub fn new() -> Self {
        UnitCS
    }

    pub fn object(&self, n: usize) -> ObHandle {
        ObHandle::new(n as u32, n)
    }

    fn arrow(&self, y: ObHandle, x: ObHandle) -> MorHandle {
        MorHandle::new(y, x, MorData::new())
    }
}

impl CSystem for UnitCS {
    fn describe(&self) -> String {
        "unit".into()
    }

    fn pt(&self) -> ObHandle {
        self.object(0)
    }

    fn ft(&self, x: ObHandle) -> ObHandle {
        self.object(x.len().saturating_sub(1))
    }

    fn proj(&self, x: ObHandle) -> MorHandle {
        self.arrow(x, self.ft(x))
    }

    fn ident(&self, x: ObHandle) -> MorHandle {
        self.arrow(x, x)
    }

    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle> {
        if f.target() != g.source() {
            return Err(KernelError::domain("comp", "target(f) != source(g)"));
        }
        Ok(self.arrow(f.source(), g.target()))
    }

    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle> {
        if x.is_pt() {
            return Err(KernelError::domain("star", "l(X) = 0"));
        }
        if f.target() != self.ft(x) {
            return Err(KernelError::domain("star", "target(f) != ft(X)"));
        }
        Ok(self.object(f.source().len() + 1))
    }

    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle> {
        let fx = self.star(f, x)?;
        Ok(self.arrow(fx, x))
    }

    fn sf(&self, f: &MorHandle) -> Result<MorHandle> {
        if f.target().is_pt() {
            return Err(KernelError::domain("s_f", "target has length 0"));
        }
        let y = f.source();
        Ok(self.arrow(y, self.object(y.len() + 1)))
    }

    fn enum_objects(&self, max_len: usize, _budget: &Budget) -> Enumerated<ObHandle> {
        Enumerated::full((0..=max_len).map(|n| self.object(n)).collect())
    }

    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, _: &Budget, _: u64) -> Enumerated<MorHandle> {
        Enumerated::full(vec![self.arrow(y, x)])
    }

    fn enum_lifts(&self, z: ObHandle, x: ObHandle, _: &MorHandle, _: usize) -> Enumerated<MorHandle> {
        Enumerated::full(vec![self.arrow(z, x)])
    }

    fn ob_key(&self, x: ObHandle) -> Vec<u32> {
        vec![x.len() as u32]
    }

    fn encode_ob(&self, x: ObHandle) -> Value {
        json!(x.len())
    }

    fn decode_ob(&self, v: &Value) -> Result<ObHandle> {
        v.as_u64()
            .map(|n| self.object(n as usize))
            .ok_or_else(|| KernelError::Decode(format!("unit object must be a length, got {v}")))
    }

    fn encode_mor(&self, f: &MorHandle) -> Value {
        json!({"source": f.source().len(), "target": f.target().len()})
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle> {
        let y = self.decode_ob(&v["source"])?;
        let x = self.decode_ob(&v["target"])?;
        Ok(self.arrow(y, x))
    }
}
