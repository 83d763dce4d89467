use std::collections::{HashMap, HashSet};

use serde_json::{json, Value};
use smallvec::smallvec;

use super::{CongDomain, CongruencePair, MorPartition, RelationSeed};
use crate::instances::{bounded_range, Budget, ContextRelabel, Enumerated, FamilyCS, Fragment};
use crate::kernel::{
    ft_mor, mor_key, CSystem, CheckReport, KernelError, MorHandle, ObHandle, Result, Section, Tally,
};

/// Representatives and partner classes tried per class when checking
/// independence of representatives.
const REP_CAP: usize = 4;

/// Deliberate corruptions of the quotient's operation tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientMutation {
    /// `s_F` answers with the next class in the same hom-set.
    ShiftSf,
}

/// The quotient `CC / ∼` over a fragment. Objects and morphisms are classes;
/// operations are computed on representatives.
pub struct QuotientCS<'a> {
    base: &'a dyn CSystem,
    max_len: usize,
    ob_reps: Vec<ObHandle>,
    ob_class: HashMap<ObHandle, u32>,
    ob_members: Vec<Vec<ObHandle>>,
    mor: MorPartition,
    mor_ends: Vec<(u32, u32)>,
    by_source: HashMap<(u32, ObHandle), usize>,
    homs: HashMap<(u32, u32), Vec<u32>>,
    hom_truncated: HashSet<(u32, u32)>,
    mutation: Option<QuotientMutation>,
}

impl<'a> QuotientCS<'a> {
    pub fn base(&self) -> &'a dyn CSystem {
        self.base
    }

    pub fn class_count(&self) -> (usize, usize) {
        (self.ob_reps.len(), self.mor.class_count())
    }

    pub fn with_mutation(mut self, m: QuotientMutation) -> Self {
        self.mutation = Some(m);
        self
    }

    fn qob(&self, c: u32) -> ObHandle {
        ObHandle::new(c, self.ob_reps[c as usize].len())
    }

    fn qmor(&self, c: u32) -> MorHandle {
        let (y, x) = self.mor_ends[c as usize];
        MorHandle::new(self.qob(y), self.qob(x), smallvec![c])
    }

    /// The class of a base object, if it lies in the fragment.
    pub fn class_of_ob(&self, x: ObHandle) -> Option<ObHandle> {
        self.ob_class.get(&x).map(|&c| self.qob(c))
    }

    /// The class of a base morphism, if it lies in the fragment.
    pub fn class_of_mor(&self, f: &MorHandle) -> Option<MorHandle> {
        self.mor.class_of(f).map(|c| self.qmor(c))
    }

    pub fn ob_representative(&self, x: ObHandle) -> ObHandle {
        self.ob_reps[x.id() as usize]
    }

    pub fn ob_members(&self, x: ObHandle) -> &[ObHandle] {
        &self.ob_members[x.id() as usize]
    }

    pub fn representative(&self, f: &MorHandle) -> &MorHandle {
        self.mor.mor(self.mor.members(f.data()[0])[0])
    }

    /// Members of the class `f`.
    pub fn members(&self, f: &MorHandle) -> impl Iterator<Item = &MorHandle> {
        self.mor.members(f.data()[0]).iter().map(|&i| self.mor.mor(i))
    }

    fn member_from(&self, c: u32, y: ObHandle) -> Option<&MorHandle> {
        self.by_source.get(&(c, y)).map(|&i| self.mor.mor(i))
    }

    fn out_class(&self, op: &'static str, x: ObHandle) -> Result<ObHandle> {
        self.class_of_ob(x).ok_or(KernelError::OutOfWindow { op })
    }

    fn out_mor(&self, op: &'static str, f: &MorHandle) -> Result<MorHandle> {
        self.class_of_mor(f).ok_or(KernelError::OutOfWindow { op })
    }

    /// A member of class `x` whose `ft` is the base object `b`.
    fn lift_over(&self, x: ObHandle, b: ObHandle) -> Result<ObHandle> {
        self.ob_members(x)
            .iter()
            .copied()
            .find(|&m| self.base.ft(m) == b)
            .ok_or_else(|| KernelError::domain("star", "no member of the class lies over the representative"))
    }

    fn check_star_args(&self, f: &MorHandle, x: ObHandle) -> Result<()> {
        if x.is_pt() {
            return Err(KernelError::domain("star", "l(X) = 0"));
        }
        if f.target() != self.ft(x) {
            return Err(KernelError::domain("star", "target(f) != ft(X)"));
        }
        Ok(())
    }
}

impl CSystem for QuotientCS<'_> {
    fn describe(&self) -> String {
        format!("quotient of {}", self.base.describe())
    }

    fn pt(&self) -> ObHandle {
        self.class_of_ob(self.base.pt()).expect("pt lies in the fragment")
    }

    fn ft(&self, x: ObHandle) -> ObHandle {
        self.class_of_ob(self.base.ft(self.ob_representative(x))).expect("fragments are ft-closed")
    }

    fn proj(&self, x: ObHandle) -> MorHandle {
        self.class_of_mor(&self.base.proj(self.ob_representative(x)))
            .expect("projections lie in the fragment")
    }

    fn ident(&self, x: ObHandle) -> MorHandle {
        self.class_of_mor(&self.base.ident(self.ob_representative(x)))
            .expect("identities lie in the fragment")
    }

    fn comp(&self, f: &MorHandle, g: &MorHandle) -> Result<MorHandle> {
        if f.target() != g.source() {
            return Err(KernelError::domain("comp", "target(f) != source(g)"));
        }
        let f0 = self.representative(f);
        let g0 = self
            .member_from(g.data()[0], f0.target())
            .ok_or_else(|| KernelError::domain("comp", "no member of g starts at target(f)"))?;
        self.out_mor("comp", &self.base.comp(f0, g0)?)
    }

    fn star(&self, f: &MorHandle, x: ObHandle) -> Result<ObHandle> {
        self.check_star_args(f, x)?;
        let f0 = self.representative(f);
        let x0 = self.lift_over(x, f0.target())?;
        self.out_class("star", self.base.star(f0, x0)?)
    }

    fn q(&self, f: &MorHandle, x: ObHandle) -> Result<MorHandle> {
        self.check_star_args(f, x)?;
        let f0 = self.representative(f);
        let x0 = self.lift_over(x, f0.target())?;
        self.out_mor("q", &self.base.q(f0, x0)?)
    }

    fn sf(&self, f: &MorHandle) -> Result<MorHandle> {
        if f.target().is_pt() {
            return Err(KernelError::domain("s_f", "target has length 0"));
        }
        let s = self.out_mor("s_f", &self.base.sf(self.representative(f))?)?;
        match self.mutation {
            Some(QuotientMutation::ShiftSf) => {
                let hom = &self.homs[&(s.source().id(), s.target().id())];
                let k = hom.iter().position(|&c| c == s.data()[0]).expect("class is in its hom");
                Ok(self.qmor(hom[(k + 1) % hom.len()]))
            }
            None => Ok(s),
        }
    }

    fn enum_objects(&self, max_len: usize, _: &Budget) -> Enumerated<ObHandle> {
        let mut all: Vec<ObHandle> = (0..self.ob_reps.len() as u32)
            .map(|c| self.qob(c))
            .filter(|x| x.len() <= max_len.min(self.max_len))
            .collect();
        all.sort_by_cached_key(|&x| (x.len(), self.ob_key(x)));
        Enumerated::full(all)
    }

    fn enum_morphisms(&self, y: ObHandle, x: ObHandle, budget: &Budget, _: u64) -> Enumerated<MorHandle> {
        let key = (y.id(), x.id());
        let all = self.homs.get(&key).map(|v| v.as_slice()).unwrap_or(&[]);
        let take = all.len().min(budget.hom_cap);
        Enumerated {
            items: all[..take].iter().map(|&c| self.qmor(c)).collect(),
            truncated: take < all.len() || self.hom_truncated.contains(&key),
        }
    }

    fn ob_key(&self, x: ObHandle) -> Vec<u32> {
        self.base.ob_key(self.ob_representative(x))
    }

    fn encode_ob(&self, x: ObHandle) -> Value {
        self.base.encode_ob(self.ob_representative(x))
    }

    fn decode_ob(&self, v: &Value) -> Result<ObHandle> {
        let x = self.base.decode_ob(v)?;
        self.class_of_ob(x).ok_or_else(|| KernelError::Decode(format!("object outside the quotient: {v}")))
    }

    fn encode_mor(&self, f: &MorHandle) -> Value {
        self.base.encode_mor(self.representative(f))
    }

    fn decode_mor(&self, v: &Value) -> Result<MorHandle> {
        let f = self.base.decode_mor(v)?;
        self.class_of_mor(&f)
            .ok_or_else(|| KernelError::Decode(format!("morphism outside the quotient: {v}")))
    }
}

/// Builds the quotient by `(∼, ∼_Mor)` and checks that each operation's
/// value does not depend on the representatives used to compute it.
pub fn build_quotient<'a>(
    cs: &'a dyn CSystem,
    frag: &Fragment,
    dom: &CongDomain,
    pair: &CongruencePair,
    mor: &MorPartition,
) -> (QuotientCS<'a>, CheckReport) {
    let mut ob_reps = Vec::new();
    let mut ob_members: Vec<Vec<ObHandle>> = Vec::new();
    let mut ob_class = HashMap::new();
    let mut root_to_class: HashMap<usize, u32> = HashMap::new();
    for (i, &x) in dom.objects().iter().enumerate() {
        if !frag.contains(x) {
            continue;
        }
        let c = *root_to_class.entry(pair.ob.find(i)).or_insert_with(|| {
            ob_reps.push(x);
            ob_members.push(Vec::new());
            (ob_reps.len() - 1) as u32
        });
        ob_members[c as usize].push(x);
        ob_class.insert(x, c);
    }
    let mut mor_ends = Vec::with_capacity(mor.class_count());
    let mut homs: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for c in 0..mor.class_count() as u32 {
        let f = mor.mor(mor.members(c)[0]);
        let ends = (ob_class[&f.source()], ob_class[&f.target()]);
        mor_ends.push(ends);
        homs.entry(ends).or_default().push(c);
    }
    let mut by_source = HashMap::new();
    for c in 0..mor.class_count() as u32 {
        for &i in mor.members(c) {
            by_source.entry((c, mor.mor(i).source())).or_insert(i);
        }
    }
    let mut hom_truncated = HashSet::new();
    for &y in frag.objects() {
        for &x in frag.objects() {
            if frag.hom(y, x).is_some_and(|h| h.truncated) {
                hom_truncated.insert((ob_class[&y], ob_class[&x]));
            }
        }
    }
    let q = QuotientCS {
        base: cs,
        max_len: frag.max_len(),
        ob_reps,
        ob_class,
        ob_members,
        mor: mor.clone(),
        mor_ends,
        by_source,
        homs,
        hom_truncated,
        mutation: None,
    };
    let report = well_defined(&q, frag);
    (q, report)
}

fn well_defined(q: &QuotientCS, frag: &Fragment) -> CheckReport {
    let cs = q.base;
    let mut t = Tally::new();
    let mut classes_from: HashMap<u32, Vec<u32>> = HashMap::new();
    for (c, &(y, _)) in q.mor_ends.iter().enumerate() {
        classes_from.entry(y).or_default().push(c as u32);
    }
    let mut children: HashMap<u32, Vec<u32>> = HashMap::new();
    for (c, &x) in q.ob_reps.iter().enumerate() {
        if !x.is_pt() {
            children.entry(q.ob_class[&cs.ft(x)]).or_default().push(c as u32);
        }
    }
    for (c, members) in q.ob_members.iter().enumerate() {
        let want = q.ft(q.qob(c as u32));
        for &x in members {
            t.expect(
                q.class_of_ob(cs.ft(x)) == Some(want),
                "quotient.ft",
                || vec![cs.show_ob(x)],
                || q.show_ob(want),
                || cs.show_ob(cs.ft(x)),
            );
        }
    }
    let classes: Vec<u32> = (0..q.mor.class_count() as u32).collect();
    let parts = frag.exec.map(&classes, |&c| {
        let mut t = Tally::new();
        let fq = q.qmor(c);
        let members = q.mor.members(c);
        let (alts, _) = bounded_range(members.len(), REP_CAP, 0);
        let tgt = q.mor_ends[c as usize].1;
        let nexts = classes_from.get(&tgt).map(|v| v.as_slice()).unwrap_or(&[]);
        let (gs, _) = bounded_range(nexts.len(), REP_CAP, c as u64);
        let kids = children.get(&tgt).map(|v| v.as_slice()).unwrap_or(&[]);
        let (xs, _) = bounded_range(kids.len(), REP_CAP, c as u64);
        for k in alts {
            let f = q.mor.mor(members[k]);
            let inputs = || vec![cs.show_mor(f)];
            if !f.target().is_pt() {
                if let Ok(want) = q.sf(&fq) {
                    let got = cs.sf(f).ok().and_then(|s| q.class_of_mor(&s));
                    t.expect(
                        got.as_ref() == Some(&want),
                        "quotient.sf",
                        inputs,
                        || q.show_mor(&want),
                        || format!("{got:?}"),
                    );
                }
            }
            for &j in &gs {
                let gq = q.qmor(nexts[j]);
                let Some(g) = q.member_from(nexts[j], f.target()) else {
                    t.case();
                    t.fail("quotient.comp", vec![cs.show_mor(f)], "a composable member", "none");
                    continue;
                };
                if let Ok(want) = q.comp(&fq, &gq) {
                    let got = cs.comp(f, g).ok().and_then(|h| q.class_of_mor(&h));
                    t.expect(
                        got.as_ref() == Some(&want),
                        "quotient.comp",
                        || vec![cs.show_mor(f), cs.show_mor(g)],
                        || q.show_mor(&want),
                        || format!("{got:?}"),
                    );
                }
            }
            for &j in &xs {
                let xq = q.qob(kids[j]);
                let Ok(x) = q.lift_over(xq, f.target()) else {
                    t.case();
                    t.fail(
                        "quotient.star",
                        vec![cs.show_mor(f), q.show_ob(xq)],
                        "a member over target(f)",
                        "none",
                    );
                    continue;
                };
                match (q.star(&fq, xq), cs.star(f, x)) {
                    (Ok(want), Ok(s)) => t.expect(
                        q.class_of_ob(s) == Some(want),
                        "quotient.star",
                        || vec![cs.show_mor(f), cs.show_ob(x)],
                        || q.show_ob(want),
                        || cs.show_ob(s),
                    ),
                    _ => t.out_of_window(),
                }
                match (q.q(&fq, xq), cs.q(f, x)) {
                    (Ok(want), Ok(m)) => {
                        let got = q.class_of_mor(&m);
                        t.expect(
                            got.as_ref() == Some(&want),
                            "quotient.q",
                            || vec![cs.show_mor(f), cs.show_ob(x)],
                            || q.show_mor(&want),
                            || cs.show_mor(&m),
                        )
                    }
                    _ => t.out_of_window(),
                }
            }
        }
        t
    });
    t.merge(Tally::merge_all(parts));
    t.finish("quotient_well_defined")
}

/// Checks that the sections of the quotient are exactly the classes of
/// sections: each quotient section `T` contains `s_t` for its members `t`
/// with `ft(t)` an identity, every original section is a quotient section,
/// and distinct `≃`-classes stay distinct.
pub fn check_tilde_ob_quotient(
    q: &QuotientCS,
    qfrag: &Fragment,
    dom: &CongDomain,
    pair: &CongruencePair,
) -> CheckReport {
    let cs = q.base;
    let mut t = Tally::new();
    let mut quotient_sections = 0usize;
    for &xq in qfrag.objects().iter().filter(|x| !x.is_pt()) {
        let lifts = qfrag.sections(q, xq);
        t.mark_truncated(lifts.truncated);
        if lifts.truncated {
            t.skip();
        }
        quotient_sections += lifts.items.len();
        for sq in &lifts.items {
            if let Some(fixed) = t.absorb(q.sf(sq.mor()), "tilde.fix", || vec![q.show_mor(sq.mor())]) {
                t.expect(
                    &fixed == sq.mor(),
                    "tilde.fix",
                    || vec![q.show_mor(sq.mor())],
                    || q.show_mor(sq.mor()),
                    || q.show_mor(&fixed),
                );
            }
            let t0 = q.members(sq.mor()).find(|m| !m.target().is_pt() && m.source() == cs.ft(m.target()));
            let Some(t0) = t0 else {
                t.case();
                t.fail("tilde.lift", vec![q.show_mor(sq.mor())], "a member ft X -> X", "none");
                continue;
            };
            let inputs = || vec![cs.show_mor(t0)];
            let Some(st) = t.absorb(cs.sf(t0), "tilde.lift", inputs) else { continue };
            let genuine = Section::new(cs, st.clone()).is_ok();
            let cls = q.class_of_mor(&st);
            t.expect(
                genuine && cls.as_ref() == Some(sq.mor()),
                "tilde.lift",
                inputs,
                || q.show_mor(sq.mor()),
                || cs.show_mor(&st),
            );
        }
    }
    let mut roots = HashSet::new();
    for (i, s) in dom.sections().iter().enumerate() {
        let Some(sq) = q.class_of_mor(s.mor()) else { continue };
        roots.insert(pair.sect.find(i));
        let inputs = || vec![cs.show_mor(s.mor())];
        let back = q.comp(&sq, &q.proj(sq.target()));
        let ok = matches!(&back, Ok(m) if *m == q.ident(sq.source())) && sq.source() == q.ft(sq.target());
        t.expect(ok, "tilde.restrict", inputs, || "a quotient section".into(), || format!("{back:?}"));
    }
    t.expect(
        roots.len() == quotient_sections,
        "tilde.count",
        Vec::new,
        || roots.len().to_string(),
        || quotient_sections.to_string(),
    );
    t.finish("tilde_ob_quotient")
}

/// Generators of the kernel of a relabeling: every domain element paired
/// with the first element of its fibre.
pub fn kernel_seed(
    dom: &CongDomain,
    src: &FamilyCS,
    tgt: &FamilyCS,
    relabel: &ContextRelabel,
) -> RelationSeed {
    let mut seed = RelationSeed::default();
    let mut first_ob: HashMap<ObHandle, ObHandle> = HashMap::new();
    for &x in dom.objects() {
        let img = relabel.map_ob(src, tgt, x);
        let head = *first_ob.entry(img).or_insert(x);
        if head != x {
            seed.ob_pairs.push((head, x));
        }
    }
    let mut first_sect: HashMap<MorHandle, &Section> = HashMap::new();
    for s in dom.sections() {
        let img = relabel.map_mor(src, tgt, s.mor());
        let head = *first_sect.entry(img).or_insert(s);
        if head != s {
            seed.sect_pairs.push((head.clone(), s.clone()));
        }
    }
    seed
}

/// Checks that `x ↦ relabel(rep x)` is an isomorphism from the quotient's
/// fragment onto the target's fragment, commuting with the structure.
pub fn check_quotient_iso(
    q: &QuotientCS,
    qfrag: &Fragment,
    src: &FamilyCS,
    tgt: &FamilyCS,
    tfrag: &Fragment,
    relabel: &ContextRelabel,
) -> CheckReport {
    let mut t = Tally::new();
    let map_ob = |x: ObHandle| relabel.map_ob(src, tgt, q.ob_representative(x));
    let map_mor = |f: &MorHandle| relabel.map_mor(src, tgt, q.representative(f));
    let images: Vec<ObHandle> = qfrag.objects().iter().map(|&x| map_ob(x)).collect();
    let distinct: HashSet<ObHandle> = images.iter().copied().collect();
    let onto: HashSet<ObHandle> = tfrag.objects().iter().copied().collect();
    t.expect(
        distinct == onto && distinct.len() == images.len(),
        "iso.objects",
        Vec::new,
        || format!("{} objects", onto.len()),
        || format!("{} images, {} distinct", images.len(), distinct.len()),
    );
    for &y in qfrag.objects() {
        for &x in qfrag.objects() {
            let (my, mx) = (map_ob(y), map_ob(x));
            let qh = qfrag.mors(y, x);
            let th = tfrag.hom(my, mx);
            if th.is_none_or(|h| h.truncated) || qfrag.hom(y, x).is_some_and(|h| h.truncated) {
                t.skip();
                continue;
            }
            let target: HashSet<MorHandle> = th.unwrap().mors.iter().cloned().collect();
            let imgs: HashSet<MorHandle> = qh.iter().map(map_mor).collect();
            t.expect(
                imgs == target && imgs.len() == qh.len(),
                "iso.morphisms",
                || vec![q.show_ob(y), q.show_ob(x)],
                || format!("{} morphisms", target.len()),
                || format!("{} classes, {} images", qh.len(), imgs.len()),
            );
            for f in qh.iter().take(REP_CAP) {
                let inputs = || vec![q.show_mor(f)];
                let mf = map_mor(f);
                if !x.is_pt() {
                    if let (Ok(a), Ok(b)) = (ft_mor(q, f), ft_mor(tgt, &mf)) {
                        t.expect(
                            map_mor(&a) == b,
                            "iso.ft",
                            inputs,
                            || tgt.show_mor(&b),
                            || tgt.show_mor(&map_mor(&a)),
                        );
                    }
                    if let (Ok(a), Ok(b)) = (q.sf(f), tgt.sf(&mf)) {
                        t.expect(
                            map_mor(&a) == b,
                            "iso.sf",
                            inputs,
                            || tgt.show_mor(&b),
                            || tgt.show_mor(&map_mor(&a)),
                        );
                    }
                }
            }
        }
    }
    for &x in qfrag.objects().iter().filter(|x| !x.is_pt()) {
        for &y in qfrag.objects() {
            for f in qfrag.mors(y, q.ft(x)).iter().take(REP_CAP) {
                let (Ok(a), Ok(b)) = (q.star(f, x), tgt.star(&map_mor(f), map_ob(x))) else { continue };
                t.expect(
                    map_ob(a) == b,
                    "iso.star",
                    || vec![q.show_mor(f), q.show_ob(x)],
                    || tgt.show_ob(b),
                    || tgt.show_ob(map_ob(a)),
                );
            }
        }
    }
    t.finish("quotient_iso")
}

/// Sorted canonical keys of a quotient's morphism classes, for comparisons
/// that must not depend on class numbering.
pub fn class_keys(q: &QuotientCS) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = (0..q.mor.class_count() as u32)
        .map(|c| {
            let mut v: Vec<_> = q.mor.members(c).iter().map(|&i| q.mor.mor(i)).collect();
            v.sort_by_cached_key(|f| mor_key(q.base, f));
            v.iter().map(|f| json!(q.base.encode_mor(f)).to_string()).collect()
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::super::{cong_close, extend_to_mor, OpTable};
    use super::*;
    use crate::instances::{enumerate_fragment, FragmentConfig};
    use crate::kernel::{check_c0_axioms, check_s_axioms};
    use crate::Exec;

    struct Setup {
        src: FamilyCS,
        tgt: FamilyCS,
        frag: Fragment,
        dom: CongDomain,
        table: OpTable,
        relabel: ContextRelabel,
    }

    fn setup() -> Setup {
        let src = FamilyCS::context(&[2, 2]).unwrap();
        let tgt = FamilyCS::context(&[2]).unwrap();
        let frag = enumerate_fragment(&src, FragmentConfig::with_max_len(2));
        let dom = CongDomain::build(&src, &frag);
        let table = OpTable::build(&src, &dom, Exec::default()).unwrap();
        let relabel = ContextRelabel::new(&src, &tgt, vec![0, 0]).unwrap();
        Setup { src, tgt, frag, dom, table, relabel }
    }

    #[test]
    fn kernel_is_closed_and_matches_fibres() {
        let s = setup();
        let seed = kernel_seed(&s.dom, &s.src, &s.tgt, &s.relabel);
        let pair = cong_close(&s.src, &s.dom, &s.table, &seed).unwrap();
        // Oracle: the fibres of the relabeling.
        for (i, &a) in s.dom.objects().iter().enumerate() {
            for (j, &b) in s.dom.objects().iter().enumerate() {
                let same = s.relabel.map_ob(&s.src, &s.tgt, a) == s.relabel.map_ob(&s.src, &s.tgt, b);
                assert_eq!(pair.ob.same(i, j), same);
            }
        }
        assert_eq!(pair.ob.class_count(), 4);
    }

    #[test]
    fn kernel_quotient_is_the_smaller_instance() {
        let s = setup();
        let seed = kernel_seed(&s.dom, &s.src, &s.tgt, &s.relabel);
        let pair = cong_close(&s.src, &s.dom, &s.table, &seed).unwrap();
        let mor = extend_to_mor(&s.src, &s.frag, &s.dom, &pair).unwrap();
        let (q, wd) = build_quotient(&s.src, &s.frag, &s.dom, &pair, &mor);
        assert!(wd.passed(), "{wd:?}");
        let qfrag = enumerate_fragment(&q, FragmentConfig::with_max_len(2));
        let tfrag = enumerate_fragment(&s.tgt, FragmentConfig::with_max_len(2));
        assert_eq!(q.class_count().0, 3);
        let iso = check_quotient_iso(&q, &qfrag, &s.src, &s.tgt, &tfrag, &s.relabel);
        assert!(iso.passed(), "{iso:?}");
        assert!(check_c0_axioms(&q, &qfrag).passed());
        assert!(check_s_axioms(&q, &qfrag).passed());
        let tilde = check_tilde_ob_quotient(&q, &qfrag, &s.dom, &pair);
        assert!(tilde.passed(), "{tilde:?}");
    }

    #[test]
    fn corrupted_sf_table_is_caught() {
        let s = setup();
        let pair = cong_close(&s.src, &s.dom, &s.table, &RelationSeed::default()).unwrap();
        let mor = extend_to_mor(&s.src, &s.frag, &s.dom, &pair).unwrap();
        let (q, _) = build_quotient(&s.src, &s.frag, &s.dom, &pair, &mor);
        let q = q.with_mutation(QuotientMutation::ShiftSf);
        let qfrag = enumerate_fragment(&q, FragmentConfig::with_max_len(2));
        assert!(check_s_axioms(&q, &qfrag).failed());
        assert!(check_tilde_ob_quotient(&q, &qfrag, &s.dom, &pair).cites("tilde.fix"));
    }
}
