//! Regular congruence relations, their presentation by a pair of
//! equivalences on objects and sections, and quotients.
//!
//! All relations live on a [`CongDomain`]: the fragment's objects, the
//! auxiliary objects `g* W` of length `L + 1` needed to read off `s_f` for
//! every fragment morphism, and every section into one of these. Domain
//! elements are indexed in canonical order, and the representative of a
//! class is its least index.

mod close;
mod extend;
mod identity;
mod quotient;

pub use close::{
    check_prop_conditions, cong_close, CongError, CongruencePair, Elem, OpInst, OpKind, OpTable,
};
pub use extend::{check_congruence_def, extend_to_mor, roundtrip_injectivity, MorPartition};
pub use identity::{proj_section_identity, proj_section_sweep};
pub use quotient::{
    build_quotient, check_quotient_iso, check_tilde_ob_quotient, class_keys, kernel_seed, QuotientCS,
    QuotientMutation,
};

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::instances::Fragment;
use crate::kernel::{mor_key, ob_sort_key, CSystem, KernelError, ObHandle, Result, Section};

/// Union-find over `0..n` whose roots are always the least index of their
/// class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parent: Vec<u32>,
}

impl Partition {
    pub fn discrete(n: usize) -> Self {
        Partition { parent: (0..n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            i = self.parent[i] as usize;
        }
        i
    }

    /// Merges the classes of `a` and `b`; returns whether they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo as u32;
        self.compress(a);
        self.compress(b);
        true
    }

    fn compress(&mut self, mut i: usize) {
        let root = self.find(i);
        while self.parent[i] as usize != root {
            let next = self.parent[i] as usize;
            self.parent[i] = root as u32;
            i = next;
        }
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Classes in order of their least element, each sorted.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..self.len() {
            by_root.entry(self.find(i)).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
        out.sort();
        out
    }

    pub fn class_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.find(i) == i).count()
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        (0..self.len()).all(|i| other.same(i, self.find(i)))
    }
}

/// Partition of the domain's objects.
pub type ObPartition = Partition;
/// Partition of the domain's sections.
pub type SectPartition = Partition;

/// The elements a congruence is computed over.
#[derive(Clone, Debug)]
pub struct CongDomain {
    pub max_len: usize,
    objects: Vec<ObHandle>,
    ob_index: HashMap<ObHandle, usize>,
    sections: Vec<Section>,
    sect_index: HashMap<Section, usize>,
    by_boundary: HashMap<ObHandle, Vec<usize>>,
    children: HashMap<ObHandle, Vec<usize>>,
    /// Some section enumeration hit its cap.
    pub truncated: bool,
}

impl CongDomain {
    pub fn build(cs: &dyn CSystem, frag: &Fragment) -> Self {
        let mut objects: Vec<ObHandle> = frag.objects().to_vec();
        let mut seen: std::collections::HashSet<ObHandle> = objects.iter().copied().collect();
        let targets: Vec<ObHandle> = frag.objects().iter().copied().filter(|w| !w.is_pt()).collect();
        let aux = frag.exec.map(&targets, |&w| {
            let mut out = Vec::new();
            for &y in frag.objects() {
                for g in frag.mors(y, cs.ft(w)) {
                    if let Ok(s) = cs.star(g, w) {
                        out.push(s);
                    }
                }
            }
            out
        });
        for s in aux.into_iter().flatten() {
            if seen.insert(s) {
                objects.push(s);
            }
        }
        objects.sort_by_cached_key(|&x| ob_sort_key(cs, x));
        let ob_index: HashMap<ObHandle, usize> = objects.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut truncated = frag.objects_truncated() || frag.any_hom_truncated();
        let mut sections = Vec::new();
        for &x in objects.iter().filter(|x| !x.is_pt()) {
            let base = cs.ident(cs.ft(x));
            let lifts = cs.enum_lifts(cs.ft(x), x, &base, frag.config.hom_cap);
            truncated |= lifts.truncated;
            sections.extend(lifts.items.into_iter().map(Section::new_unchecked));
        }
        sections.sort_by_cached_key(|s| mor_key(cs, s.mor()));
        let sect_index: HashMap<Section, usize> =
            sections.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut by_boundary: HashMap<ObHandle, Vec<usize>> = HashMap::new();
        for (i, s) in sections.iter().enumerate() {
            by_boundary.entry(s.boundary()).or_default().push(i);
        }
        let mut children: HashMap<ObHandle, Vec<usize>> = HashMap::new();
        for (i, &x) in objects.iter().enumerate() {
            if !x.is_pt() {
                children.entry(cs.ft(x)).or_default().push(i);
            }
        }
        CongDomain {
            max_len: frag.max_len(),
            objects,
            ob_index,
            sections,
            sect_index,
            by_boundary,
            children,
            truncated,
        }
    }

    pub fn objects(&self) -> &[ObHandle] {
        &self.objects
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn ob_index(&self, x: ObHandle) -> Option<usize> {
        self.ob_index.get(&x).copied()
    }

    pub fn sect_index(&self, s: &Section) -> Option<usize> {
        self.sect_index.get(s).copied()
    }

    /// Sections with boundary `x`.
    pub fn sections_over(&self, x: ObHandle) -> &[usize] {
        self.by_boundary.get(&x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Objects `Y` with `ft(Y) = x`, `l(Y) > 0`.
    pub fn children(&self, x: ObHandle) -> &[usize] {
        self.children.get(&x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Whether the object is auxiliary (beyond the fragment's length bound).
    pub fn is_aux(&self, x: ObHandle) -> bool {
        x.len() > self.max_len
    }
}

/// Pairs generating a relation, as read from `{"ob_pairs": [[a, b], ...],
/// "sect_pairs": [[s, t], ...]}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationSeed {
    pub ob_pairs: Vec<(ObHandle, ObHandle)>,
    pub sect_pairs: Vec<(Section, Section)>,
}

impl RelationSeed {
    pub fn decode(cs: &dyn CSystem, v: &Value) -> Result<Self> {
        if !v.is_object() {
            return Err(KernelError::Decode("relation seed must be an object".into()));
        }
        let pairs = |field: &str| -> Result<Vec<(Value, Value)>> {
            let Some(list) = v.get(field) else { return Ok(vec![]) };
            let list =
                list.as_array().ok_or_else(|| KernelError::Decode(format!("{field} must be a list")))?;
            list.iter()
                .map(|p| match p.as_array().map(|a| a.as_slice()) {
                    Some([a, b]) => Ok((a.clone(), b.clone())),
                    _ => Err(KernelError::Decode(format!("{field} entries must be pairs, got {p}"))),
                })
                .collect()
        };
        let ob_pairs = pairs("ob_pairs")?
            .iter()
            .map(|(a, b)| Ok((cs.decode_ob(a)?, cs.decode_ob(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let sect_pairs = pairs("sect_pairs")?
            .iter()
            .map(|(a, b)| Ok((Section::new(cs, cs.decode_mor(a)?)?, Section::new(cs, cs.decode_mor(b)?)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RelationSeed { ob_pairs, sect_pairs })
    }

    pub fn encode(&self, cs: &dyn CSystem) -> Value {
        json!({
            "ob_pairs": self.ob_pairs.iter()
                .map(|&(a, b)| json!([cs.encode_ob(a), cs.encode_ob(b)]))
                .collect::<Vec<_>>(),
            "sect_pairs": self.sect_pairs.iter()
                .map(|(a, b)| json!([cs.encode_mor(a.mor()), cs.encode_mor(b.mor())]))
                .collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{enumerate_fragment, FamilyCS, FragmentConfig};

    #[test]
    fn partition_roots_are_least() {
        let mut p = Partition::discrete(6);
        assert!(p.union(4, 2));
        assert!(p.union(5, 4));
        assert!(!p.union(2, 5));
        assert_eq!(p.find(5), 2);
        assert_eq!(p.classes(), vec![vec![0], vec![1], vec![2, 4, 5], vec![3]]);
        assert_eq!(p.class_count(), 4);
        assert!(Partition::discrete(6).refines(&p));
        assert!(!p.refines(&Partition::discrete(6)));
    }

    #[test]
    fn domain_has_aux_layer() {
        let cs = FamilyCS::context(&[2, 2]).unwrap();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(2));
        let dom = CongDomain::build(&cs, &frag);
        // 7 fragment objects plus the 8 contexts of length 3.
        assert_eq!(dom.objects().len(), 15);
        // Sections of length-1, 2, 3 objects: 2*2 + 4*4 + 8*16.
        assert_eq!(dom.sections().len(), 4 + 16 + 128);
        assert!(dom.is_aux(dom.objects()[14]));
    }

    #[test]
    fn seed_decoding() {
        let cs = FamilyCS::context(&[2, 2]).unwrap();
        let v: Value = serde_json::from_str(
            r#"{"ob_pairs":[[[0],[1]]],"sect_pairs":[[{"source":[],"target":[0],"map":[0]},{"source":[],"target":[1],"map":[0]}]]}"#,
        )
        .unwrap();
        let seed = RelationSeed::decode(&cs, &v).unwrap();
        assert_eq!(seed.ob_pairs.len(), 1);
        assert_eq!(seed.sect_pairs.len(), 1);
        assert_eq!(RelationSeed::decode(&cs, &seed.encode(&cs)).unwrap(), seed);
        let bad: Value = serde_json::from_str(r#"{"ob_pairs":[[[0]]]}"#).unwrap();
        assert!(RelationSeed::decode(&cs, &bad).is_err());
    }
}
