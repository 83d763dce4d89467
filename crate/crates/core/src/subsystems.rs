//! C-subsystems as pairs `(B, B̃)`.
//!
//! Every nontrivial subsystem is infinite, since `δ(X)` lives over an object
//! one longer than `X`. Closure is therefore computed inside a window of
//! objects of length at most `L`: productions that would land beyond it are
//! recorded on the frontier and not used further. Every claim made about a
//! window is scoped to it.
//!
//! Morphism membership is decided from `(B, B̃)` alone by recursion on the
//! length of the target: `Y -> pt` is a member iff `Y ∈ B`, and `f : Y -> X`
//! is a member iff `X ∈ B`, `ft(f)` is a member and `s_f ∈ B̃`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::instances::{bounded_product, bounded_range, Fragment};
use crate::kernel::{
    ft_iter, ft_mor, mor_key, ob_sort_key, op_delta, op_st, op_tt, proj_iter, sect_pull, solve_pullback,
    CSystem, CheckReport, KernelError, MorHandle, ObHandle, Result, Section, Tally,
};

const PAIR_CAP: usize = 256;
const LEG_CAP: usize = 32;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsystemSeed {
    pub objects: Vec<ObHandle>,
    pub sections: Vec<Section>,
}

impl SubsystemSeed {
    pub fn objects(objects: Vec<ObHandle>) -> Self {
        SubsystemSeed { objects, sections: vec![] }
    }

    /// Reads `{"objects": [...], "sections": [...]}` in the instance's
    /// canonical encodings. Sections are validated.
    pub fn decode(cs: &dyn CSystem, v: &Value) -> Result<Self> {
        let list = |field: &str| -> Result<Vec<Value>> {
            match v.get(field) {
                None => Ok(vec![]),
                Some(Value::Array(a)) => Ok(a.clone()),
                Some(other) => Err(KernelError::Decode(format!("{field} must be a list, got {other}"))),
            }
        };
        if !v.is_object() {
            return Err(KernelError::Decode("seed must be an object".into()));
        }
        let objects = list("objects")?.iter().map(|o| cs.decode_ob(o)).collect::<Result<Vec<_>>>()?;
        let sections = list("sections")?
            .iter()
            .map(|s| Section::new(cs, cs.decode_mor(s)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(SubsystemSeed { objects, sections })
    }

    pub fn encode(&self, cs: &dyn CSystem) -> Value {
        json!({
            "objects": self.objects.iter().map(|&x| cs.encode_ob(x)).collect::<Vec<_>>(),
            "sections": self.sections.iter().map(|s| cs.encode_mor(s.mor())).collect::<Vec<_>>(),
        })
    }

    /// The seed with every object `X` with `1 <= l(X) < max_len` replaced by
    /// `δ(X)`. Its closure in the same window is the same pair.
    pub fn delta_variant(&self, cs: &dyn CSystem, max_len: usize) -> Self {
        let mut out = SubsystemSeed { objects: vec![], sections: self.sections.clone() };
        for &x in &self.objects {
            match op_delta(cs, x) {
                Ok(d) if x.len() < max_len => out.sections.push(d),
                _ => out.objects.push(x),
            }
        }
        out
    }
}

/// A production of the closure that lands beyond the window.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FrontierItem {
    pub length: usize,
    pub condition: &'static str,
    pub encoding: String,
}

#[derive(Clone, Debug)]
pub struct SubsystemWindow {
    pub max_len: usize,
    pub b: HashSet<ObHandle>,
    pub bt: HashSet<Section>,
    pub frontier: BTreeSet<FrontierItem>,
    pub saturated_within_window: bool,
}

impl SubsystemWindow {
    /// An arbitrary pair, not known to be closed.
    pub fn from_sets(
        max_len: usize,
        b: impl IntoIterator<Item = ObHandle>,
        bt: impl IntoIterator<Item = Section>,
    ) -> Self {
        SubsystemWindow {
            max_len,
            b: b.into_iter().collect(),
            bt: bt.into_iter().collect(),
            frontier: BTreeSet::new(),
            saturated_within_window: false,
        }
    }

    /// The improper subsystem: every object and section of the fragment.
    pub fn full(cs: &dyn CSystem, frag: &Fragment) -> Self {
        let mut bt = Vec::new();
        for &x in frag.objects() {
            bt.extend(frag.sections(cs, x).items);
        }
        let mut w = Self::from_sets(frag.max_len(), frag.objects().iter().copied(), bt);
        w.saturated_within_window = true;
        w
    }

    pub fn objects_sorted(&self, cs: &dyn CSystem) -> Vec<ObHandle> {
        let mut v: Vec<ObHandle> = self.b.iter().copied().collect();
        v.sort_by_cached_key(|&x| ob_sort_key(cs, x));
        v
    }

    pub fn sections_sorted(&self, cs: &dyn CSystem) -> Vec<Section> {
        let mut v: Vec<Section> = self.bt.iter().cloned().collect();
        v.sort_by_cached_key(|s| mor_key(cs, s.mor()));
        v
    }

    /// A copy with `s` removed from `B̃`.
    pub fn without_section(&self, s: &Section) -> Self {
        let mut w = self.clone();
        w.bt.remove(s);
        w.saturated_within_window = false;
        w
    }

    /// Same `(B, B̃)`.
    pub fn same_sets(&self, other: &SubsystemWindow) -> bool {
        self.b == other.b && self.bt == other.bt
    }

    /// Canonical JSON dump.
    pub fn dump(&self, cs: &dyn CSystem) -> Value {
        json!({
            "max_len": self.max_len,
            "B": self.objects_sorted(cs).iter().map(|&x| cs.encode_ob(x)).collect::<Vec<_>>(),
            "B_tilde": self
                .sections_sorted(cs)
                .iter()
                .map(|s| cs.encode_mor(s.mor()))
                .collect::<Vec<_>>(),
            "frontier": self
                .frontier
                .iter()
                .map(|f| json!({"length": f.length, "condition": f.condition, "element": f.encoding}))
                .collect::<Vec<_>>(),
            "saturated_within_window": self.saturated_within_window,
        })
    }
}

struct Closure<'a> {
    cs: &'a dyn CSystem,
    w: SubsystemWindow,
    obs: Vec<ObHandle>,
    secs: Vec<Section>,
    ob_queue: VecDeque<ObHandle>,
    sec_queue: VecDeque<Section>,
}

impl Closure<'_> {
    fn add_ob(&mut self, x: ObHandle, condition: &'static str) {
        if x.len() > self.w.max_len {
            self.w.frontier.insert(FrontierItem { length: x.len(), condition, encoding: self.cs.show_ob(x) });
        } else if self.w.b.insert(x) {
            self.obs.push(x);
            self.ob_queue.push_back(x);
        }
    }

    fn add_sec(&mut self, s: Result<Section>, condition: &'static str) {
        let Ok(s) = s else { return };
        let len = s.boundary().len();
        if len > self.w.max_len {
            self.w.frontier.insert(FrontierItem {
                length: len,
                condition,
                encoding: self.cs.show_mor(s.mor()),
            });
        } else if self.w.bt.insert(s.clone()) {
            self.secs.push(s.clone());
            self.sec_queue.push_back(s);
        }
    }

    fn run(&mut self) {
        let cs = self.cs;
        loop {
            if let Some(x) = self.ob_queue.pop_front() {
                self.add_ob(cs.ft(x), "cond.2");
                if !x.is_pt() {
                    self.add_sec(op_delta(cs, x), "cond.6");
                }
                for k in 0..self.secs.len() {
                    let r = self.secs[k].clone();
                    self.add_sec(op_tt(cs, x, &r), "cond.4");
                }
            } else if let Some(s) = self.sec_queue.pop_front() {
                self.add_ob(s.boundary(), "cond.3");
                for k in 0..self.obs.len() {
                    let y = self.obs[k];
                    self.add_sec(op_tt(cs, y, &s), "cond.4");
                }
                for k in 0..self.secs.len() {
                    let r = self.secs[k].clone();
                    self.add_sec(op_st(cs, &s, &r), "cond.5");
                    self.add_sec(op_st(cs, &r, &s), "cond.5");
                }
            } else {
                break;
            }
        }
    }
}

/// The smallest pair containing `seed` and closed under the six conditions
/// within objects of length at most `max_len`.
pub fn close_window(cs: &dyn CSystem, seed: &SubsystemSeed, max_len: usize) -> SubsystemWindow {
    let mut c = Closure {
        cs,
        w: SubsystemWindow::from_sets(max_len, [], []),
        obs: vec![],
        secs: vec![],
        ob_queue: VecDeque::new(),
        sec_queue: VecDeque::new(),
    };
    c.add_ob(cs.pt(), "cond.1");
    for &x in &seed.objects {
        c.add_ob(x, "seed");
    }
    for s in &seed.sections {
        c.add_sec(Ok(s.clone()), "seed");
    }
    c.run();
    c.w.saturated_within_window = true;
    c.w
}

/// Re-closes `(B, B̃)` of `w` under the larger bound `max_len`. Elements of
/// the result that are short enough for `w` but missing from it were only
/// derivable through the frontier.
pub fn widen_window(cs: &dyn CSystem, w: &SubsystemWindow, max_len: usize) -> SubsystemWindow {
    let seed = SubsystemSeed { objects: w.objects_sorted(cs), sections: w.sections_sorted(cs) };
    close_window(cs, &seed, max_len.max(w.max_len))
}

/// Lists every violated instance of the six conditions whose result lies in
/// the window. Results beyond the window are counted, not checked.
pub fn check_closed(cs: &dyn CSystem, w: &SubsystemWindow) -> CheckReport {
    let mut t = Tally::new();
    let max = w.max_len;
    let obs = w.objects_sorted(cs);
    let secs = w.sections_sorted(cs);
    let pt = cs.pt();
    t.expect(w.b.contains(&pt), "cond.1", Vec::new, || cs.show_ob(pt), || "absent".into());
    for &x in &obs {
        t.expect(
            x.len() <= max,
            "window",
            || vec![cs.show_ob(x)],
            || format!("l <= {max}"),
            || x.len().to_string(),
        );
        let fx = cs.ft(x);
        t.expect(w.b.contains(&fx), "cond.2", || vec![cs.show_ob(x)], || cs.show_ob(fx), || "absent".into());
        if x.is_pt() {
            continue;
        }
        match op_delta(cs, x) {
            Ok(d) if d.boundary().len() <= max => {
                t.expect(
                    w.bt.contains(&d),
                    "cond.6",
                    || vec![cs.show_ob(x)],
                    || cs.show_mor(d.mor()),
                    || "absent".into(),
                );
            }
            Ok(_) => t.out_of_window(),
            Err(e) => t.fail("cond.6", vec![cs.show_ob(x)], "δ defined", e.to_string()),
        }
    }
    for s in &secs {
        let m = s.mor();
        let ok = Section::new(cs, m.clone()).is_ok();
        t.expect(ok, "section", || vec![cs.show_mor(m)], || "a section".into(), || "not a section".into());
        let d = s.boundary();
        t.expect(w.b.contains(&d), "cond.3", || vec![cs.show_mor(m)], || cs.show_ob(d), || "absent".into());
    }
    let member = |t: &mut Tally, r: Result<Section>, cond: &str, inputs: Vec<String>| {
        let Ok(r) = r else { return };
        if r.boundary().len() > max {
            t.out_of_window();
            return;
        }
        let present = w.bt.contains(&r);
        t.expect(present, cond, || inputs, || cs.show_mor(r.mor()), || "absent".into());
    };
    for &y in &obs {
        for r in &secs {
            let inputs = vec![cs.show_ob(y), cs.show_mor(r.mor())];
            member(&mut t, op_tt(cs, y, r), "cond.4", inputs);
        }
    }
    for s in &secs {
        for r in &secs {
            let inputs = vec![cs.show_mor(s.mor()), cs.show_mor(r.mor())];
            member(&mut t, op_st(cs, s, r), "cond.5", inputs);
        }
    }
    t.finish("check_closed")
}

/// Whether `f` lies in the sub-pre-category determined by `(B, B̃)`.
/// Fails with an out-of-window error when some `s_f` on the way lands
/// beyond the window.
pub fn mor_member(cs: &dyn CSystem, f: &MorHandle, w: &SubsystemWindow) -> Result<bool> {
    let op = "mor_member";
    let x = f.target();
    if x.is_pt() {
        if f.source().len() > w.max_len {
            return Err(KernelError::OutOfWindow { op });
        }
        return Ok(w.b.contains(&f.source()));
    }
    if x.len() > w.max_len {
        return Err(KernelError::OutOfWindow { op });
    }
    if !w.b.contains(&x) {
        return Ok(false);
    }
    let s = cs.sf(f)?;
    if s.target().len() > w.max_len {
        return Err(KernelError::OutOfWindow { op });
    }
    if !w.bt.contains(&Section::new_unchecked(s)) {
        return Ok(false);
    }
    mor_member(cs, &ft_mor(cs, f)?, w)
}

/// Membership of every fragment morphism whose membership the window
/// decides.
pub fn member_table(cs: &dyn CSystem, w: &SubsystemWindow, frag: &Fragment) -> HashMap<MorHandle, bool> {
    let n = frag.objects().len();
    let pairs: Vec<usize> = (0..n * n).collect();
    let objs = frag.objects();
    let parts = frag.exec.map(&pairs, |&k| {
        frag.mors(objs[k / n], objs[k % n])
            .iter()
            .filter_map(|f| mor_member(cs, f, w).ok().map(|m| (f.clone(), m)))
            .collect::<Vec<_>>()
    });
    parts.into_iter().flatten().collect()
}

struct LemmaCtx<'a> {
    cs: &'a dyn CSystem,
    w: &'a SubsystemWindow,
    frag: &'a Fragment,
    members: HashMap<MorHandle, bool>,
    wide: OnceLock<SubsystemWindow>,
}

impl LemmaCtx<'_> {
    /// Membership, computing it directly for morphisms outside the table.
    fn is_member(&self, f: &MorHandle) -> Result<bool> {
        match self.members.get(f) {
            Some(&m) => Ok(m),
            None => mor_member(self.cs, f, self.w),
        }
    }

    fn member_mors(&self, y: ObHandle, x: ObHandle) -> Vec<&MorHandle> {
        self.frag.mors(y, x).iter().filter(|f| self.members.get(*f) == Some(&true)).collect()
    }

    fn expect_member(
        &self,
        t: &mut Tally,
        f: Result<MorHandle>,
        cond: &str,
        inputs: impl FnOnce() -> Vec<String>,
    ) {
        let cs = self.cs;
        let Ok(f) = f else {
            t.fail(cond, inputs(), "defined", "undefined");
            return;
        };
        match self.is_member(&f) {
            Ok(m) => {
                t.expect(m, cond, inputs, || "member".into(), || format!("{} not a member", cs.show_mor(&f)))
            }
            Err(KernelError::OutOfWindow { .. }) => t.out_of_window(),
            Err(e) => t.fail(cond, inputs(), "decidable", e.to_string()),
        }
    }

    /// Expects `x ∈ B`. An absent `x` that the window one step wider
    /// derives is a window artifact and only counted.
    fn expect_object(&self, t: &mut Tally, x: ObHandle, cond: &str, inputs: impl FnOnce() -> Vec<String>) {
        let (cs, w) = (self.cs, self.w);
        if w.b.contains(&x) {
            t.case();
            return;
        }
        if !w.frontier.is_empty() {
            let wide = self.wide.get_or_init(|| widen_window(cs, w, w.max_len + 1));
            if wide.b.contains(&x) {
                t.out_of_window();
                return;
            }
        }
        t.case();
        t.fail(cond, inputs(), cs.show_ob(x), "absent");
    }

    fn projections(&self) -> Tally {
        let (cs, w) = (self.cs, self.w);
        let mut t = Tally::new();
        for x in w.objects_sorted(cs) {
            for i in 0..=x.len() {
                self.expect_member(&mut t, proj_iter(cs, x, i), "lemma.projections", || {
                    vec![cs.show_ob(x), i.to_string()]
                });
            }
        }
        t
    }

    fn section_pullback(&self) -> Tally {
        let (cs, w) = (self.cs, self.w);
        let mut t = Tally::new();
        for r in w.sections_sorted(cs) {
            let x = r.boundary();
            for i in 1..=x.len() {
                let base = ft_iter(cs, x, i);
                for (yi, &y) in self.frag.objects().iter().enumerate() {
                    let fs = self.member_mors(y, base);
                    let (idx, tr) = bounded_range(fs.len(), LEG_CAP, self.frag.config.rng_seed ^ yi as u64);
                    t.mark_truncated(tr);
                    for k in idx {
                        let f = fs[k];
                        let inputs = || vec![cs.show_mor(f), cs.show_mor(r.mor()), i.to_string()];
                        match sect_pull(cs, f, &r, i) {
                            Ok(p) if p.boundary().len() > w.max_len => t.out_of_window(),
                            Ok(p) => t.expect(
                                w.bt.contains(&p),
                                "lemma.section_pullback",
                                inputs,
                                || cs.show_mor(p.mor()),
                                || "absent".into(),
                            ),
                            Err(e) => t.fail("lemma.section_pullback", inputs(), "defined", e.to_string()),
                        }
                    }
                }
            }
        }
        t
    }

    fn composition(&self) -> Tally {
        let cs = self.cs;
        let objs = self.frag.objects();
        let n = objs.len();
        let triples: Vec<usize> = (0..n * n * n).collect();
        let parts = self.frag.exec.map(&triples, |&k| {
            let mut t = Tally::new();
            let (z, y, x) = (objs[k / (n * n)], objs[k / n % n], objs[k % n]);
            if !(self.w.b.contains(&z) && self.w.b.contains(&y) && self.w.b.contains(&x)) {
                return t;
            }
            let gs = self.member_mors(z, y);
            let fs = self.member_mors(y, x);
            let (pairs, tr) =
                bounded_product(gs.len(), fs.len(), PAIR_CAP, self.frag.config.rng_seed ^ k as u64);
            t.mark_truncated(tr);
            for (i, j) in pairs {
                let (g, f) = (gs[i], fs[j]);
                self.expect_member(&mut t, cs.comp(g, f), "lemma.composition", || {
                    vec![cs.show_mor(g), cs.show_mor(f)]
                });
            }
            t
        });
        Tally::merge_all(parts)
    }

    fn q_closure(&self) -> Tally {
        let (cs, w) = (self.cs, self.w);
        let mut t = Tally::new();
        for x in w.objects_sorted(cs).into_iter().filter(|x| !x.is_pt()) {
            for &y in self.frag.objects() {
                if y.len() + 1 > w.max_len {
                    continue;
                }
                for f in self.member_mors(y, cs.ft(x)) {
                    let inputs = || vec![cs.show_mor(f), cs.show_ob(x)];
                    match cs.star(f, x) {
                        Ok(s) => self.expect_object(&mut t, s, "lemma.q_closure", inputs),
                        Err(e) => t.fail("lemma.q_closure", inputs(), "defined", e.to_string()),
                    }
                    self.expect_member(&mut t, cs.q(f, x), "lemma.q_closure", inputs);
                }
            }
        }
        t
    }

    /// Canonical squares of member data are pullbacks in the subsystem: the
    /// filler of a cone of members is a member.
    fn pullback(&self) -> Tally {
        let (cs, w) = (self.cs, self.w);
        let mut t = Tally::new();
        let cap = self.frag.config.hom_cap;
        for x in w.objects_sorted(cs).into_iter().filter(|x| !x.is_pt()) {
            for &y in self.frag.objects() {
                if y.len() + 1 > w.max_len {
                    continue;
                }
                let fs = self.member_mors(y, cs.ft(x));
                let (fi, tr) = bounded_range(fs.len(), 8, self.frag.config.rng_seed);
                t.mark_truncated(tr);
                for a in fi {
                    let f = fs[a];
                    for &z in self.frag.objects().iter().filter(|z| w.b.contains(z)) {
                        let legs = self.member_mors(z, y);
                        let (gi, tr) = bounded_range(legs.len(), 8, self.frag.config.rng_seed);
                        t.mark_truncated(tr);
                        for b in gi {
                            let g1 = legs[b];
                            let Ok(base) = cs.comp(g1, f) else { continue };
                            let cones = cs.enum_lifts(z, x, &base, cap);
                            t.mark_truncated(cones.truncated);
                            for g2 in cones.items.iter().filter(|g2| self.is_member(g2) == Ok(true)) {
                                self.expect_member(
                                    &mut t,
                                    solve_pullback(cs, g1, g2, f),
                                    "lemma.pullback",
                                    || vec![cs.show_mor(f), cs.show_ob(x), cs.show_mor(g1), cs.show_mor(g2)],
                                );
                            }
                        }
                    }
                }
            }
        }
        t
    }

    /// Reading `(Ob, Õb)` back off the membership predicate gives `(B, B̃)`.
    fn roundtrip(&self) -> Tally {
        let (cs, w) = (self.cs, self.w);
        let mut t = Tally::new();
        for &x in self.frag.objects() {
            match self.is_member(&cs.ident(x)) {
                Ok(m) => t.expect(
                    m == w.b.contains(&x),
                    "roundtrip.objects",
                    || vec![cs.show_ob(x)],
                    || w.b.contains(&x).to_string(),
                    || m.to_string(),
                ),
                Err(_) => t.out_of_window(),
            }
            let secs = self.frag.sections(cs, x);
            t.mark_truncated(secs.truncated);
            for s in secs.items {
                match self.is_member(s.mor()) {
                    Ok(m) => {
                        let inside = w.bt.contains(&s);
                        t.expect(
                            m == inside,
                            "roundtrip.sections",
                            || vec![cs.show_mor(s.mor())],
                            || inside.to_string(),
                            || m.to_string(),
                        )
                    }
                    Err(_) => t.out_of_window(),
                }
            }
        }
        t
    }
}

/// The lemmas behind the subsystem correspondence, as properties of the
/// window over the fragment: projections, section pull-back, composition,
/// q-closure and pullbacks in the subsystem, plus the round trip back to
/// `(B, B̃)`.
pub fn verify_subsystem_lemmas(cs: &dyn CSystem, w: &SubsystemWindow, frag: &Fragment) -> CheckReport {
    let ctx = LemmaCtx { cs, w, frag, members: member_table(cs, w, frag), wide: OnceLock::new() };
    let mut t = Tally::new();
    t.mark_truncated(frag.any_hom_truncated() || frag.objects_truncated());
    t.merge(ctx.projections());
    t.merge(ctx.section_pullback());
    t.merge(ctx.composition());
    t.merge(ctx.q_closure());
    t.merge(ctx.pullback());
    t.merge(ctx.roundtrip());
    t.finish("subsystem_lemmas")
}

/// Objects of positive length read back from `B̃` as `ft(∂s)` for the
/// diagonal sections `s = δ(ft(∂s))` it contains.
pub fn recover_objects(cs: &dyn CSystem, bt: &HashSet<Section>) -> HashSet<ObHandle> {
    bt.iter()
        .filter_map(|s| {
            let x = cs.ft(s.boundary());
            (!x.is_pt() && op_delta(cs, x).ok().as_ref() == Some(s)).then_some(x)
        })
        .collect()
}

/// (a) windows with equal `(B, B̃)` have the same members on the fragment;
/// (b) windows with equal `B̃` have equal `B` on lengths `1..L-1`, which is
/// where `B` can be read back from `B̃` inside the window.
pub fn check_determination(
    cs: &dyn CSystem,
    w1: &SubsystemWindow,
    w2: &SubsystemWindow,
    frag: &Fragment,
) -> CheckReport {
    let mut t = Tally::new();
    t.mark_truncated(frag.any_hom_truncated());
    if w1.same_sets(w2) {
        let m1 = member_table(cs, w1, frag);
        let m2 = member_table(cs, w2, frag);
        for f in frag.all_morphisms() {
            let (a, b) = (m1.get(f), m2.get(f));
            t.expect(
                a == b,
                "determination.a",
                || vec![cs.show_mor(f)],
                || format!("{a:?}"),
                || format!("{b:?}"),
            );
        }
    }
    let max = w1.max_len.min(w2.max_len);
    if w1.bt == w2.bt {
        let r1 = recover_objects(cs, &w1.bt);
        let r2 = recover_objects(cs, &w2.bt);
        for &x in frag.objects() {
            if x.is_pt() || x.len() >= max {
                continue;
            }
            let inputs = || vec![cs.show_ob(x)];
            let (a, b) = (w1.b.contains(&x), w2.b.contains(&x));
            t.expect(a == b, "determination.b", inputs, || a.to_string(), || b.to_string());
            t.expect(
                r1.contains(&x) == a,
                "determination.recover",
                inputs,
                || a.to_string(),
                || r1.contains(&x).to_string(),
            );
            t.expect(
                r2.contains(&x) == b,
                "determination.recover",
                inputs,
                || b.to_string(),
                || r2.contains(&x).to_string(),
            );
        }
    }
    t.finish("determination")
}

/// Deterministic seeds derived from the fragment's canonical order: the
/// empty seed, the first object of length 1, the first object of length 2,
/// the first section over `pt`, every object of length 1, and the last
/// object of length `L - 1` together with the last section of the fragment.
pub fn default_seeds(cs: &dyn CSystem, frag: &Fragment) -> Vec<SubsystemSeed> {
    let objs = frag.objects();
    let of_len = |n: usize| objs.iter().copied().filter(move |x| x.len() == n);
    let mut seeds = vec![SubsystemSeed::default()];
    seeds.push(SubsystemSeed::objects(of_len(1).take(1).collect()));
    seeds.push(SubsystemSeed::objects(of_len(2).take(1).collect()));
    let first_section = of_len(1).flat_map(|x| frag.sections(cs, x).items).next();
    seeds.push(SubsystemSeed { objects: vec![], sections: first_section.into_iter().collect() });
    seeds.push(SubsystemSeed::objects(of_len(1).collect()));
    let last_ob = of_len(frag.max_len().saturating_sub(1)).next_back();
    let last_sec = objs.iter().rev().find_map(|&x| frag.sections(cs, x).items.last().cloned());
    seeds.push(SubsystemSeed {
        objects: last_ob.into_iter().collect(),
        sections: last_sec.into_iter().collect(),
    });
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{enumerate_fragment, FamilyCS, FragmentConfig, UnitCS};

    #[test]
    fn empty_seed_gives_point() {
        let cs = UnitCS::new();
        let w = close_window(&cs, &SubsystemSeed::default(), 3);
        assert_eq!(w.b.len(), 1);
        assert!(w.b.contains(&cs.pt()));
        assert!(w.bt.is_empty());
        assert!(w.frontier.is_empty());
    }

    #[test]
    fn unit_delta_chain() {
        // Hand-run: X -> δ(X) over length 2 -> δ of that over length 3 -> ...,
        // stopping at the bound with δ of the length-3 object on the frontier.
        let cs = UnitCS::new();
        let w = close_window(&cs, &SubsystemSeed::objects(vec![cs.object(1)]), 3);
        let lens: BTreeSet<usize> = w.b.iter().map(|x| x.len()).collect();
        assert_eq!(lens, (0..=3).collect());
        let slens: BTreeSet<usize> = w.bt.iter().map(|s| s.boundary().len()).collect();
        assert_eq!(slens, (2..=3).collect());
        assert!(w.frontier.iter().any(|f| f.length == 4 && f.condition == "cond.6"));
        assert!(check_closed(&cs, &w).passed());
    }

    #[test]
    fn section_seed_pulls_in_boundary_chain() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let x = cs.context_object(&[0, 0]).unwrap();
        let base = cs.ident(cs.ft(x));
        let s = cs.enum_lifts(cs.ft(x), x, &base, 16).items[1].clone();
        let s = Section::new(&cs, s).unwrap();
        let seed = SubsystemSeed { objects: vec![], sections: vec![s] };
        let w = close_window(&cs, &seed, 3);
        assert!(w.b.contains(&x));
        assert!(w.b.contains(&cs.ft(x)));
        assert!(w.b.contains(&cs.pt()));
    }

    #[test]
    fn membership_examples() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(3));
        let x = cs.context_object(&[0]).unwrap();
        let w = close_window(&cs, &SubsystemSeed::objects(vec![x]), 3);
        assert_eq!(mor_member(&cs, &proj_iter(&cs, x, 1).unwrap(), &w), Ok(true));
        assert_eq!(mor_member(&cs, &cs.ident(x), &w), Ok(true));
        // Constant maps into (t) need a constant section, which the seed lacks.
        let c = cs.mor_from_table(x, x, &[0, 0]).unwrap();
        assert_eq!(mor_member(&cs, &c, &w), Ok(false));
        let big = cs.context_object(&[0, 0, 0]).unwrap();
        assert!(matches!(mor_member(&cs, &cs.ident(big), &w), Err(KernelError::OutOfWindow { .. })));
        let r = verify_subsystem_lemmas(&cs, &w, &frag);
        assert!(r.passed(), "{:?}", r.counterexamples);
    }

    #[test]
    fn dropping_a_diagonal_is_caught() {
        let cs = FamilyCS::context(&[2]).unwrap();
        let x = cs.context_object(&[0]).unwrap();
        let w = close_window(&cs, &SubsystemSeed::objects(vec![x]), 3);
        let broken = w.without_section(&op_delta(&cs, x).unwrap());
        let r = check_closed(&cs, &broken);
        assert!(r.failed());
        assert!(r.cites("cond.6"));
    }

    #[test]
    fn mixed_contexts_need_the_frontier() {
        // Hand-run with seed {(0), (1)}, L = 2: δ(0) lies over (0,0) and δ(1)
        // over (1,1). The mixed context (1,0) is ft of the boundary (1,0,0)
        // of T̃((1), δ(0)), which is beyond the bound; (0,1) likewise.
        let cs = FamilyCS::context(&[2, 2]).unwrap();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(2));
        let ob = |t: &[u32]| cs.context_object(t).unwrap();
        let w = close_window(&cs, &SubsystemSeed::objects(vec![ob(&[0]), ob(&[1])]), 2);
        let wide = widen_window(&cs, &w, 3);
        assert!(w.b.contains(&ob(&[0, 0])) && w.b.contains(&ob(&[1, 1])));
        for mixed in [ob(&[0, 1]), ob(&[1, 0])] {
            assert!(!w.b.contains(&mixed));
            assert!(wide.b.contains(&mixed));
        }
        let r = verify_subsystem_lemmas(&cs, &w, &frag);
        assert!(r.passed(), "{:?}", r.counterexamples);
        assert!(r.stats.out_of_window > 0);
    }

    #[test]
    fn full_window_is_closed() {
        let cs = FamilyCS::universe(&[1, 2]).unwrap();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(2));
        let w = SubsystemWindow::full(&cs, &frag);
        assert!(check_closed(&cs, &w).passed());
        assert!(verify_subsystem_lemmas(&cs, &w, &frag).passed());
    }

    #[test]
    fn delta_seed_closes_to_same_window() {
        let cs = FamilyCS::context(&[2, 2]).unwrap();
        let frag = enumerate_fragment(&cs, FragmentConfig::with_max_len(2));
        for seed in default_seeds(&cs, &frag) {
            let a = close_window(&cs, &seed, 2);
            let b = close_window(&cs, &seed.delta_variant(&cs, 2), 2);
            assert!(a.same_sets(&b));
            assert!(check_determination(&cs, &a, &b, &frag).passed());
        }
    }
}
