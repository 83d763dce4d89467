//! Concrete C-systems with decidable equality and bounded enumeration.

mod explicit;
mod family;
mod fragment;
mod mutant;
mod unit;

pub use explicit::{SetObject, SetPrecategory};
pub use family::{ContextRelabel, FamilyCS, FamilyKind};
pub use fragment::{bounded_product, bounded_range, enumerate_fragment, Fragment, FragmentConfig, HomTable};
pub use mutant::{MutantCS, Mutation};
pub use unit::UnitCS;

use serde::{Deserialize, Serialize};

use crate::kernel::{CSystem, ObHandle, Result};

/// Enumeration caps: objects with more points than `point_cap` are left out,
/// hom-sets larger than `hom_cap` are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub point_cap: usize,
    pub hom_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        FragmentConfig::default().budget()
    }
}

/// Result of a bounded enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumerated<T> {
    pub items: Vec<T>,
    pub truncated: bool,
}

impl<T> Enumerated<T> {
    pub fn full(items: Vec<T>) -> Self {
        Enumerated { items, truncated: false }
    }
}

/// Instance configuration as read from JSON. `kind` and the size lists are
/// the interchange format; `mutation` is an optional fault-injection hook
/// used by the mutation fixtures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceConfig {
    Unit,
    Context {
        base_sizes: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mutation: Option<Mutation>,
    },
    Universe {
        els: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mutation: Option<Mutation>,
    },
}

impl InstanceConfig {
    pub fn context(base_sizes: &[u32]) -> Self {
        InstanceConfig::Context { base_sizes: base_sizes.to_vec(), mutation: None }
    }

    pub fn universe(els: &[u32]) -> Self {
        InstanceConfig::Universe { els: els.to_vec(), mutation: None }
    }

    pub fn mutated(self, m: Mutation) -> Self {
        match self {
            InstanceConfig::Unit => InstanceConfig::Unit,
            InstanceConfig::Context { base_sizes, .. } => {
                InstanceConfig::Context { base_sizes, mutation: Some(m) }
            }
            InstanceConfig::Universe { els, .. } => InstanceConfig::Universe { els, mutation: Some(m) },
        }
    }
}

/// A built instance.
#[derive(Debug)]
pub enum Instance {
    Unit(UnitCS),
    Family(FamilyCS),
    Mutant(MutantCS),
}

impl Instance {
    pub fn build(config: &InstanceConfig) -> Result<Self> {
        let (family, mutation) = match config {
            InstanceConfig::Unit => return Ok(Instance::Unit(build_unit())),
            InstanceConfig::Context { base_sizes, mutation } => (build_context(base_sizes)?, mutation),
            InstanceConfig::Universe { els, mutation } => (build_universe(els)?, mutation),
        };
        Ok(match mutation {
            None => Instance::Family(family),
            Some(m) => Instance::Mutant(MutantCS::new(family, *m)),
        })
    }

    pub fn cs(&self) -> &dyn CSystem {
        match self {
            Instance::Unit(u) => u,
            Instance::Family(f) => f,
            Instance::Mutant(m) => m,
        }
    }

    /// The underlying set-valued instance, if any.
    pub fn family(&self) -> Option<&FamilyCS> {
        match self {
            Instance::Unit(_) => None,
            Instance::Family(f) => Some(f),
            Instance::Mutant(m) => Some(m.base()),
        }
    }
}

pub fn build_unit() -> UnitCS {
    UnitCS::new()
}

pub fn build_context(base_sizes: &[u32]) -> Result<FamilyCS> {
    FamilyCS::context(base_sizes)
}

pub fn build_universe(els: &[u32]) -> Result<FamilyCS> {
    FamilyCS::universe(els)
}

/// Canonical points of `x`; unsupported for instances without a point
/// interpretation.
pub fn points(cs: &dyn CSystem, x: ObHandle) -> Result<Vec<Vec<u32>>> {
    cs.points(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelError;

    #[test]
    fn config_json_round_trip() {
        let txt = r#"{"kind":"context","base_sizes":[2,2]}"#;
        let cfg: InstanceConfig = serde_json::from_str(txt).unwrap();
        assert_eq!(cfg, InstanceConfig::context(&[2, 2]));
        assert_eq!(serde_json::to_string(&cfg).unwrap(), txt);
        let u: InstanceConfig = serde_json::from_str(r#"{"kind":"unit"}"#).unwrap();
        assert_eq!(u, InstanceConfig::Unit);
        let v: InstanceConfig = serde_json::from_str(r#"{"kind":"universe","els":[1,2]}"#).unwrap();
        assert!(Instance::build(&v).is_ok());
        assert!(serde_json::from_str::<InstanceConfig>(r#"{"kind":"context"}"#).is_err());
    }

    #[test]
    fn unit_has_no_points() {
        let u = build_unit();
        assert!(matches!(points(&u, u.pt()), Err(KernelError::Unsupported(_))));
    }

    #[test]
    fn point_of_pt_is_single() {
        let cs = build_universe(&[1, 2]).unwrap();
        assert_eq!(points(&cs, cs.pt()).unwrap(), vec![Vec::<u32>::new()]);
        let x = cs.telescope(&[vec![1]]).unwrap();
        assert_eq!(points(&cs, x).unwrap().len(), 2);
    }

    #[test]
    fn empty_code_instances_build() {
        let cs = build_universe(&[0, 1]).unwrap();
        let x = cs.telescope(&[vec![0]]).unwrap();
        assert!(points(&cs, x).unwrap().is_empty());
        assert!(build_context(&[]).is_err());
    }
}
