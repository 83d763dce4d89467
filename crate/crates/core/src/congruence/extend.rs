use std::collections::{HashMap, HashSet};

use super::{CongDomain, CongruencePair, Partition};
use crate::instances::{bounded_product, bounded_range, Fragment};
use crate::kernel::{
    ft_mor, mor_key, CSystem, CheckReport, KernelError, MorHandle, ObHandle, Result, Section, Tally,
};

/// Pairs sampled per triple of objects for composition.
const COMP_CAP: usize = 16;
/// Base-change arguments sampled per `(Y, W)`.
const STAR_CAP: usize = 16;
/// Alternative class members tried per sampled input.
const ALT_CAP: usize = 4;

/// An equivalence on the fragment's morphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorPartition {
    mors: Vec<MorHandle>,
    index: HashMap<MorHandle, usize>,
    class: Vec<u32>,
    members: Vec<Vec<usize>>,
}

impl MorPartition {
    fn from_keys(mors: Vec<MorHandle>, keys: Vec<Vec<u32>>) -> Self {
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let class: Vec<u32> = keys
            .into_iter()
            .map(|k| {
                let next = ids.len() as u32;
                *ids.entry(k).or_insert(next)
            })
            .collect();
        let index = mors.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        let mut p = MorPartition { mors, index, class, members: vec![] };
        p.rebuild_members();
        p
    }

    fn rebuild_members(&mut self) {
        // Renumber by least member so ids depend only on the classes.
        let mut renumber: HashMap<u32, u32> = HashMap::new();
        for c in self.class.iter_mut() {
            let next = renumber.len() as u32;
            *c = *renumber.entry(*c).or_insert(next);
        }
        self.members = vec![Vec::new(); renumber.len()];
        for (i, &c) in self.class.iter().enumerate() {
            self.members[c as usize].push(i);
        }
    }

    pub fn len(&self) -> usize {
        self.mors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mors.is_empty()
    }

    pub fn mors(&self) -> &[MorHandle] {
        &self.mors
    }

    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, f: &MorHandle) -> Option<u32> {
        self.index.get(f).map(|&i| self.class[i])
    }

    /// Member indices of class `c`, ascending.
    pub fn members(&self, c: u32) -> &[usize] {
        &self.members[c as usize]
    }

    pub fn mor(&self, i: usize) -> &MorHandle {
        &self.mors[i]
    }

    /// Merges the classes of `f` and `g`.
    pub fn merge_classes(&mut self, f: &MorHandle, g: &MorHandle) {
        let (Some(a), Some(b)) = (self.class_of(f), self.class_of(g)) else { return };
        for c in self.class.iter_mut() {
            if *c == b {
                *c = a;
            }
        }
        self.rebuild_members();
    }

    /// Moves `f` into a class of its own.
    pub fn isolate(&mut self, f: &MorHandle) {
        let Some(&i) = self.index.get(f) else { return };
        self.class[i] = u32::MAX;
        self.rebuild_members();
    }
}

/// `[ob(Y_k), sect(s_{ft^{k-1} f}), ..., sect(s_f)]` read from the last
/// entry backwards: the classes of `s_{ft^j f}` for `j < l(X)` followed by
/// the class of the source.
fn class_key(cs: &dyn CSystem, dom: &CongDomain, pair: &CongruencePair, f: &MorHandle) -> Result<Vec<u32>> {
    let mut key = Vec::with_capacity(f.target().len() + 1);
    let mut cur = f.clone();
    while !cur.target().is_pt() {
        let s = Section::new_unchecked(cs.sf(&cur)?);
        let i = dom.sect_index(&s).ok_or_else(|| {
            KernelError::domain("extend_to_mor", format!("s_f outside the domain: {}", cs.show_mor(s.mor())))
        })?;
        key.push(pair.sect.find(i) as u32);
        cur = ft_mor(cs, &cur)?;
    }
    let y = dom
        .ob_index(cur.source())
        .ok_or_else(|| KernelError::domain("extend_to_mor", "source outside the domain"))?;
    key.push(pair.ob.find(y) as u32);
    Ok(key)
}

/// The relation on morphisms determined by `(∼, ≃)`: maps to `pt` are
/// related when their sources are, and otherwise `f1 ∼ f2` when
/// `ft f1 ∼ ft f2` and `s_{f1} ≃ s_{f2}`.
pub fn extend_to_mor(
    cs: &dyn CSystem,
    frag: &Fragment,
    dom: &CongDomain,
    pair: &CongruencePair,
) -> Result<MorPartition> {
    let mut mors: Vec<MorHandle> = frag.all_morphisms().cloned().collect();
    mors.sort_by_cached_key(|f| mor_key(cs, f));
    let keys = frag.exec.map(&mors, |f| class_key(cs, dom, pair, f));
    let keys = keys.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(MorPartition::from_keys(mors, keys))
}

struct View<'a> {
    cs: &'a dyn CSystem,
    dom: &'a CongDomain,
    ob: &'a Partition,
    sect: &'a Partition,
    mor: &'a MorPartition,
    /// (class, source) -> a member with that source.
    by_source: HashMap<(u32, ObHandle), usize>,
}

impl<'a> View<'a> {
    fn new(
        cs: &'a dyn CSystem,
        dom: &'a CongDomain,
        pair: &'a CongruencePair,
        mor: &'a MorPartition,
    ) -> Self {
        let mut by_source = HashMap::new();
        for (i, f) in mor.mors().iter().enumerate() {
            by_source.entry((mor.class[i], f.source())).or_insert(i);
        }
        View { cs, dom, ob: &pair.ob, sect: &pair.sect, mor, by_source }
    }

    fn obc(&self, x: ObHandle) -> Option<usize> {
        self.dom.ob_index(x).map(|i| self.ob.find(i))
    }

    /// Up to `ALT_CAP` members of `f`'s class, spread over the class.
    fn alternatives(&self, f: &MorHandle) -> Vec<&MorHandle> {
        let Some(c) = self.mor.class_of(f) else { return vec![] };
        let m = self.mor.members(c);
        let (idx, _) = bounded_range(m.len(), ALT_CAP, 0);
        idx.into_iter().map(|k| self.mor.mor(m[k])).collect()
    }

    fn show(&self, f: &MorHandle) -> String {
        self.cs.show_mor(f)
    }
}

/// Checks the definition of a regular congruence for `(∼, ∼_Mor)`:
/// compatibility with every operation, length, and both lifting conditions.
pub fn check_congruence_def(
    cs: &dyn CSystem,
    frag: &Fragment,
    dom: &CongDomain,
    pair: &CongruencePair,
    mor: &MorPartition,
) -> CheckReport {
    let v = View::new(cs, dom, pair, mor);
    let mut t = Tally::new();
    t.mark_truncated(dom.truncated);
    compat_per_class(&v, &mut t);
    compat_comp(&v, frag, &mut t);
    compat_star(&v, frag, &mut t);
    lifting(&v, frag, &mut t);
    t.finish("congruence_def")
}

fn compat_per_class(v: &View, t: &mut Tally) {
    let cs = v.cs;
    for c in 0..v.mor.class_count() as u32 {
        let m = v.mor.members(c);
        let f0 = v.mor.mor(m[0]);
        let ft0 = (!f0.target().is_pt()).then(|| ft_mor(cs, f0).ok().and_then(|g| v.mor.class_of(&g)));
        let sf0 = (!f0.target().is_pt())
            .then(|| cs.sf(f0).ok().and_then(|s| v.dom.sect_index(&Section::new_unchecked(s))));
        for &i in &m[1..] {
            let f = v.mor.mor(i);
            let inputs = || vec![v.show(f0), v.show(f)];
            t.expect(
                v.obc(f.source()) == v.obc(f0.source()),
                "def.1.source",
                inputs,
                || "related sources".into(),
                || "unrelated".into(),
            );
            t.expect(
                v.obc(f.target()) == v.obc(f0.target()),
                "def.1.target",
                inputs,
                || "related targets".into(),
                || "unrelated".into(),
            );
            if let Some(ft0) = ft0 {
                let ft1 = ft_mor(cs, f).ok().and_then(|g| v.mor.class_of(&g));
                t.expect(
                    ft0.is_some() && ft0 == ft1,
                    "def.1.ft",
                    inputs,
                    || format!("{ft0:?}"),
                    || format!("{ft1:?}"),
                );
            }
            if let Some(sf0) = sf0 {
                let sf1 = cs.sf(f).ok().and_then(|s| v.dom.sect_index(&Section::new_unchecked(s)));
                let same = matches!((sf0, sf1), (Some(a), Some(b)) if v.sect.same(a, b));
                t.expect(same, "def.1.sf", inputs, || "related s_f".into(), || "unrelated s_f".into());
            }
        }
    }
    let mut id_of: HashMap<usize, (ObHandle, Option<u32>, Option<u32>)> = HashMap::new();
    for &x in v.dom.objects().iter().filter(|x| !v.dom.is_aux(**x)) {
        let Some(r) = v.obc(x) else { continue };
        let id = v.mor.class_of(&cs.ident(x));
        let p = (!x.is_pt()).then(|| v.mor.class_of(&cs.proj(x))).flatten();
        match id_of.get(&r) {
            Some(&(x0, id0, p0)) => {
                let inputs = || vec![cs.show_ob(x0), cs.show_ob(x)];
                t.expect(id == id0, "def.1.id", inputs, || format!("{id0:?}"), || format!("{id:?}"));
                t.expect(p == p0, "def.1.p", inputs, || format!("{p0:?}"), || format!("{p:?}"));
            }
            None => {
                id_of.insert(r, (x, id, p));
            }
        }
    }
}

fn compat_comp(v: &View, frag: &Fragment, t: &mut Tally) {
    let cs = v.cs;
    let objs = frag.objects();
    let n = objs.len();
    let triples: Vec<usize> = (0..n * n * n).collect();
    let parts = frag.exec.map(&triples, |&k| {
        let mut t = Tally::new();
        let (z, y, x) = (objs[k / (n * n)], objs[k / n % n], objs[k % n]);
        let (a, b) = (frag.mors(z, y), frag.mors(y, x));
        let (pairs, _) = bounded_product(a.len(), b.len(), COMP_CAP, frag.config.rng_seed ^ k as u64);
        for (i, j) in pairs {
            let (f, g) = (&a[i], &b[j]);
            let Ok(fg) = cs.comp(f, g) else { continue };
            let c = v.mor.class_of(&fg);
            let gc = v.mor.class_of(g).expect("fragment morphism");
            for f2 in v.alternatives(f) {
                let Some(&gi) = v.by_source.get(&(gc, f2.target())) else {
                    // Missing lifts are reported by the lifting check.
                    continue;
                };
                let g2 = v.mor.mor(gi);
                let c2 = cs.comp(f2, g2).ok().and_then(|h| v.mor.class_of(&h));
                t.expect(
                    c.is_some() && c == c2,
                    "def.1.comp",
                    || vec![v.show(f), v.show(g), v.show(f2), v.show(g2)],
                    || format!("{c:?}"),
                    || format!("{c2:?}"),
                );
            }
        }
        t
    });
    t.merge(Tally::merge_all(parts));
}

fn compat_star(v: &View, frag: &Fragment, t: &mut Tally) {
    let cs = v.cs;
    let targets: Vec<ObHandle> = frag.objects().iter().copied().filter(|w| !w.is_pt()).collect();
    let parts = frag.exec.map(&targets, |&w| {
        let mut t = Tally::new();
        let Some(wc) = v.obc(w) else { return t };
        for &y in frag.objects() {
            let gs = frag.mors(y, cs.ft(w));
            let (idx, _) = bounded_range(gs.len(), STAR_CAP, frag.config.rng_seed);
            for i in idx {
                let g = &gs[i];
                let (Ok(s), Ok(q)) = (cs.star(g, w), cs.q(g, w)) else { continue };
                let sc = v.obc(s);
                let qc = v.mor.class_of(&q);
                for g2 in v.alternatives(g) {
                    let w2 = v
                        .dom
                        .children(g2.target())
                        .iter()
                        .map(|&c| v.dom.objects()[c])
                        .find(|&x| v.obc(x) == Some(wc));
                    let Some(w2) = w2 else { continue };
                    let inputs = || vec![v.show(g), cs.show_ob(w), v.show(g2), cs.show_ob(w2)];
                    let (Ok(s2), Ok(q2)) = (cs.star(g2, w2), cs.q(g2, w2)) else {
                        t.case();
                        t.fail("def.1.star", inputs(), "defined", "undefined");
                        continue;
                    };
                    match (sc, v.obc(s2)) {
                        (Some(a), Some(b)) => {
                            t.expect(a == b, "def.1.star", inputs, || cs.show_ob(s), || cs.show_ob(s2))
                        }
                        _ => t.out_of_window(),
                    }
                    match (qc, v.mor.class_of(&q2)) {
                        (Some(a), Some(b)) => {
                            t.expect(a == b, "def.1.q", inputs, || v.show(&q), || v.show(&q2))
                        }
                        _ => t.out_of_window(),
                    }
                }
            }
        }
        t
    });
    t.merge(Tally::merge_all(parts));
}

fn lifting(v: &View, frag: &Fragment, t: &mut Tally) {
    let cs = v.cs;
    let mut frag_class: HashMap<usize, Vec<ObHandle>> = HashMap::new();
    for &x in frag.objects() {
        if let Some(r) = v.obc(x) {
            frag_class.entry(r).or_default().push(x);
        }
    }
    for members in frag_class.values() {
        for &x in &members[1..] {
            t.expect(
                x.len() == members[0].len(),
                "def.2",
                || vec![cs.show_ob(members[0]), cs.show_ob(x)],
                || members[0].len().to_string(),
                || x.len().to_string(),
            );
        }
    }
    for &x in frag.objects().iter().filter(|x| !x.is_pt()) {
        let xc = v.obc(x);
        let Some(fc) = v.obc(cs.ft(x)) else { continue };
        for &f in &frag_class[&fc] {
            let found = v.dom.children(f).iter().any(|&c| Some(v.ob.find(c)) == xc);
            t.expect(
                found,
                "def.3",
                || vec![cs.show_ob(x), cs.show_ob(f)],
                || "a related object over F".into(),
                || "none".into(),
            );
        }
    }
    let ends: HashSet<(u32, ObHandle, ObHandle)> =
        v.mor.mors().iter().enumerate().map(|(i, f)| (v.mor.class[i], f.source(), f.target())).collect();
    for c in 0..v.mor.class_count() as u32 {
        let f = v.mor.mor(v.mor.members(c)[0]);
        let (Some(yc), Some(xc)) = (v.obc(f.source()), v.obc(f.target())) else { continue };
        for &y2 in &frag_class[&yc] {
            for &x2 in &frag_class[&xc] {
                if ends.contains(&(c, y2, x2)) {
                    t.case();
                } else if frag.hom(y2, x2).is_none_or(|h| h.truncated) {
                    t.skip();
                } else {
                    t.case();
                    t.fail(
                        "def.4",
                        vec![v.show(f), cs.show_ob(y2), cs.show_ob(x2)],
                        "a related morphism",
                        "none",
                    );
                }
            }
        }
    }
}

/// Checks that `(∼, ≃) ↦ ∼_Mor` is injective on this input: restricting
/// `∼_Mor` to sections gives back `≃`, rebuilding from the restriction gives
/// back `∼_Mor`, and identities recover `∼`.
pub fn roundtrip_injectivity(
    cs: &dyn CSystem,
    frag: &Fragment,
    dom: &CongDomain,
    pair: &CongruencePair,
    mor: &MorPartition,
) -> CheckReport {
    let mut t = Tally::new();
    let mut restricted = pair.sect.clone();
    let mut by_sect: HashMap<usize, (u32, usize)> = HashMap::new();
    let mut by_mor: HashMap<u32, usize> = HashMap::new();
    for (i, s) in dom.sections().iter().enumerate() {
        let Some(m) = mor.class_of(s.mor()) else { continue };
        let r = pair.sect.find(i);
        let show = |j: usize| cs.show_mor(dom.sections()[j].mor());
        match by_sect.get(&r) {
            Some(&(m0, j)) => t.expect(
                m0 == m,
                "roundtrip.restrict",
                || vec![show(j), show(i)],
                || "related morphisms".into(),
                || "unrelated".into(),
            ),
            None => {
                t.case();
                by_sect.insert(r, (m, i));
            }
        }
        match by_mor.get(&m) {
            Some(&j) => {
                t.expect(
                    pair.sect.same(i, j),
                    "roundtrip.inject",
                    || vec![show(j), show(i)],
                    || "related sections".into(),
                    || "unrelated".into(),
                );
                restricted.union(i, j);
            }
            None => {
                by_mor.insert(m, i);
            }
        }
    }
    let rebuilt_pair = CongruencePair { ob: pair.ob.clone(), sect: restricted };
    match extend_to_mor(cs, frag, dom, &rebuilt_pair) {
        Ok(rebuilt) => t.expect(
            &rebuilt == mor,
            "roundtrip.rebuild",
            Vec::new,
            || format!("{} classes", mor.class_count()),
            || format!("{} classes", rebuilt.class_count()),
        ),
        Err(e) => {
            t.case();
            t.fail("roundtrip.rebuild", vec![], "defined", e.to_string());
        }
    }
    let mut by_id: HashMap<u32, ObHandle> = HashMap::new();
    for &x in frag.objects() {
        let (Some(c), Some(xi)) = (mor.class_of(&cs.ident(x)), dom.ob_index(x)) else { continue };
        match by_id.get(&c) {
            Some(&x0) => {
                let x0i = dom.ob_index(x0).expect("fragment object");
                t.expect(
                    pair.ob.same(xi, x0i),
                    "roundtrip.objects",
                    || vec![cs.show_ob(x0), cs.show_ob(x)],
                    || "related objects".into(),
                    || "unrelated".into(),
                );
            }
            None => {
                t.case();
                by_id.insert(c, x);
            }
        }
    }
    t.finish("roundtrip_injectivity")
}
