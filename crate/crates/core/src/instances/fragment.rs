//! Length- and budget-bounded windows onto an instance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Budget, Enumerated};
use crate::exec::Exec;
use crate::kernel::{CSystem, MorHandle, ObHandle, Section};

fn default_max_len() -> usize {
    3
}
fn default_point_cap() -> usize {
    8
}
fn default_hom_cap() -> usize {
    4096
}

/// Fragment configuration; field names are part of the JSON interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentConfig {
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_point_cap")]
    pub point_cap: usize,
    #[serde(default = "default_hom_cap")]
    pub hom_cap: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for FragmentConfig {
    fn default() -> Self {
        FragmentConfig {
            max_len: default_max_len(),
            point_cap: default_point_cap(),
            hom_cap: default_hom_cap(),
            rng_seed: 0,
        }
    }
}

impl FragmentConfig {
    pub fn with_max_len(max_len: usize) -> Self {
        FragmentConfig { max_len, ..Default::default() }
    }

    pub fn budget(&self) -> Budget {
        Budget { point_cap: self.point_cap, hom_cap: self.hom_cap }
    }
}

#[derive(Clone, Debug)]
pub struct HomTable {
    pub mors: Vec<MorHandle>,
    pub truncated: bool,
}

/// The enumerated part of an instance every check quantifies over: all
/// objects of length at most `max_len` (within the point cap) and the
/// hom-sets between them, sampled past the hom cap. Truncation is flagged,
/// never silent.
#[derive(Clone, Debug)]
pub struct Fragment {
    pub config: FragmentConfig,
    pub exec: Exec,
    objects: Vec<ObHandle>,
    index: HashMap<ObHandle, usize>,
    homs: Vec<HomTable>,
    objects_truncated: bool,
}

/// Enumerates the fragment of `cs` described by `config`. The result is a
/// function of the instance configuration and `config` alone.
pub fn enumerate_fragment(cs: &dyn CSystem, config: FragmentConfig) -> Fragment {
    Fragment::build(cs, config, Exec::default())
}

impl Fragment {
    pub fn build(cs: &dyn CSystem, config: FragmentConfig, exec: Exec) -> Fragment {
        assert!(config.hom_cap > 0, "hom_cap must be positive");
        let budget = config.budget();
        let Enumerated { items: mut objects, truncated: objects_truncated } =
            cs.enum_objects(config.max_len, &budget);
        objects.retain(|x| x.len() <= config.max_len);
        let mut index: HashMap<ObHandle, usize> = HashMap::new();
        for (i, &x) in objects.iter().enumerate() {
            index.insert(x, i);
        }
        debug_assert!(objects.iter().all(|&x| index.contains_key(&cs.ft(x))));
        let pairs: Vec<(ObHandle, ObHandle)> =
            objects.iter().flat_map(|&y| objects.iter().map(move |&x| (y, x))).collect();
        let homs = exec.map(&pairs, |&(y, x)| {
            let e = cs.enum_morphisms(y, x, &budget, config.rng_seed);
            HomTable { mors: e.items, truncated: e.truncated }
        });
        Fragment { config, exec, objects, index, homs, objects_truncated }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn max_len(&self) -> usize {
        self.config.max_len
    }

    pub fn objects(&self) -> &[ObHandle] {
        &self.objects
    }

    pub fn objects_truncated(&self) -> bool {
        self.objects_truncated
    }

    pub fn contains(&self, x: ObHandle) -> bool {
        self.index.contains_key(&x)
    }

    pub fn index_of(&self, x: ObHandle) -> Option<usize> {
        self.index.get(&x).copied()
    }

    /// The hom table between two fragment objects.
    pub fn hom(&self, y: ObHandle, x: ObHandle) -> Option<&HomTable> {
        let n = self.objects.len();
        Some(&self.homs[self.index_of(y)? * n + self.index_of(x)?])
    }

    /// Hom table entries, empty when either end lies outside the fragment.
    pub fn mors(&self, y: ObHandle, x: ObHandle) -> &[MorHandle] {
        self.hom(y, x).map(|h| h.mors.as_slice()).unwrap_or(&[])
    }

    pub fn any_hom_truncated(&self) -> bool {
        self.homs.iter().any(|h| h.truncated)
    }

    /// Every listed morphism, grouped by (source, target) in canonical order.
    pub fn all_morphisms(&self) -> impl Iterator<Item = &MorHandle> {
        self.homs.iter().flat_map(|h| h.mors.iter())
    }

    pub fn in_window(&self, len: usize) -> bool {
        len <= self.config.max_len
    }

    /// Sections `ft(X) -> X`, exhaustive up to the hom cap.
    pub fn sections(&self, cs: &dyn CSystem, x: ObHandle) -> Enumerated<Section> {
        if x.is_pt() {
            return Enumerated::full(vec![]);
        }
        let base = cs.ident(cs.ft(x));
        let lifts = cs.enum_lifts(cs.ft(x), x, &base, self.config.hom_cap);
        Enumerated {
            items: lifts.items.into_iter().map(Section::new_unchecked).collect(),
            truncated: lifts.truncated,
        }
    }

    /// Canonical JSON description; identical inputs give identical bytes.
    pub fn dump(&self, cs: &dyn CSystem) -> Value {
        let n = self.objects.len();
        let homs: Vec<Value> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let h = &self.homs[i * n + j];
                json!({"source": i, "target": j, "size": h.mors.len(), "truncated": h.truncated})
            })
            .collect();
        json!({
            "config": self.config,
            "objects": self.objects.iter().map(|&x| cs.encode_ob(x)).collect::<Vec<_>>(),
            "objects_truncated": self.objects_truncated,
            "homs": homs,
        })
    }
}

/// Up to `cap` index pairs from `0..a × 0..b`: all of them when they fit,
/// otherwise an evenly strided deterministic subset. The flag reports
/// whether sampling happened.
pub fn bounded_product(a: usize, b: usize, cap: usize, seed: u64) -> (Vec<(usize, usize)>, bool) {
    let total = a.saturating_mul(b);
    if total <= cap {
        let v = (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).collect();
        return (v, false);
    }
    let step = total.div_ceil(cap);
    let start = (seed as usize) % step;
    let v = (start..total).step_by(step).map(|k| (k / b, k % b)).collect();
    (v, true)
}

/// Up to `cap` indices of `0..n`, strided when sampling is needed.
pub fn bounded_range(n: usize, cap: usize, seed: u64) -> (Vec<usize>, bool) {
    if n <= cap {
        return ((0..n).collect(), false);
    }
    let step = n.div_ceil(cap);
    let start = (seed as usize) % step;
    ((start..n).step_by(step).collect(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{FamilyCS, UnitCS};

    #[test]
    fn unit_fragment_counts() {
        let cs = UnitCS::new();
        let f = enumerate_fragment(&cs, FragmentConfig::with_max_len(3));
        assert_eq!(f.objects().len(), 4);
        let sizes: Vec<usize> = f.all_morphisms().map(|_| 1).collect();
        assert_eq!(sizes.len(), 16);
    }

    #[test]
    fn context_fragment_objects() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let f = enumerate_fragment(&cs, FragmentConfig::with_max_len(2));
        let enc: Vec<String> = f.objects().iter().map(|&x| cs.show_ob(x)).collect();
        assert_eq!(enc, vec!["[]", "[0]", "[0,0]"]);
    }

    #[test]
    fn dump_is_reproducible() {
        let a = FamilyCS::context(&[2]).unwrap();
        let b = FamilyCS::context(&[2]).unwrap();
        let cfg = FragmentConfig::with_max_len(3);
        let fa = enumerate_fragment(&a, cfg);
        let fb = Fragment::build(&b, cfg, Exec::Sequential);
        assert_eq!(fa.dump(&a).to_string(), fb.dump(&b).to_string());
        let ma: Vec<String> = fa.all_morphisms().map(|f| a.show_mor(f)).collect();
        let mb: Vec<String> = fb.all_morphisms().map(|f| b.show_mor(f)).collect();
        assert_eq!(ma, mb);
        assert!(fa.any_hom_truncated());
    }

    #[test]
    fn bounded_product_samples_evenly() {
        let (all, t) = bounded_product(3, 4, 100, 0);
        assert_eq!(all.len(), 12);
        assert!(!t);
        let (some, t) = bounded_product(100, 100, 50, 3);
        assert!(t);
        assert!(some.len() <= 50 && some.len() >= 49);
    }
}
