//! Axiom checks over a fragment.
//!
//! Quantifiers range over the fragment, restricted to inputs whose
//! constructed objects stay within the length bound: base change along
//! `f : Y -> ft X` is checked only when `l(Y) + 1 <= L`. Excluded inputs are
//! counted in `stats.out_of_window`.

use std::collections::HashMap;

use super::derived::{ft_mor, solve_pullback};
use super::{CSystem, CheckReport, MorHandle, ObHandle, Tally};
use crate::instances::{bounded_product, bounded_range, Fragment};

/// Sampled triples per quadruple of objects for associativity.
const ASSOC_CAP: usize = 64;
/// Sampled `(g, f)` pairs per triple of objects for functoriality.
const FUNCTOR_CAP: usize = 512;
/// Sampled first legs per `(square, Z)` in the pullback check.
const CONE_LEG_CAP: usize = 16;
/// Sampled morphisms per hom-set for the section checks.
const SECTION_CAP: usize = 512;

fn show(cs: &dyn CSystem, f: &MorHandle) -> String {
    cs.show_mor(f)
}

fn ob(cs: &dyn CSystem, x: ObHandle) -> String {
    cs.show_ob(x)
}

fn mix(seed: u64, parts: &[usize]) -> u64 {
    parts.iter().fold(seed, |h, &p| h.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(p as u64 + 1))
}

fn check_precategory(cs: &dyn CSystem, frag: &Fragment) -> Tally {
    let objs = frag.objects();
    let mut t = Tally::new();
    for f in frag.all_morphisms() {
        let inputs = || vec![show(cs, f)];
        let l = t.absorb(cs.comp(&cs.ident(f.source()), f), "precat.identity", inputs);
        let r = t.absorb(cs.comp(f, &cs.ident(f.target())), "precat.identity", inputs);
        if let (Some(l), Some(r)) = (l, r) {
            t.expect(
                &l == f && &r == f,
                "precat.identity",
                inputs,
                || show(cs, f),
                || format!("{} / {}", show(cs, &l), show(cs, &r)),
            );
        }
    }
    let n = objs.len();
    let quads: Vec<usize> = (0..n * n * n * n).collect();
    let parts = frag.exec.map(&quads, |&q| {
        let mut t = Tally::new();
        let (w, z, y, x) = (objs[q / (n * n * n)], objs[q / (n * n) % n], objs[q / n % n], objs[q % n]);
        let (a, b, c) = (frag.mors(w, z), frag.mors(z, y), frag.mors(y, x));
        let (pairs, tr) =
            bounded_product(a.len(), b.len() * c.len(), ASSOC_CAP, mix(frag.config.rng_seed, &[q]));
        t.mark_truncated(tr);
        for (i, jk) in pairs {
            let (f, g, h) = (&a[i], &b[jk / c.len()], &c[jk % c.len()]);
            let inputs = || vec![show(cs, f), show(cs, g), show(cs, h)];
            let lhs = cs.comp(f, g).and_then(|fg| cs.comp(&fg, h));
            let rhs = cs.comp(g, h).and_then(|gh| cs.comp(f, &gh));
            if let (Some(l), Some(r)) =
                (t.absorb(lhs, "precat.assoc", inputs), t.absorb(rhs, "precat.assoc", inputs))
            {
                t.expect(l == r, "precat.assoc", inputs, || show(cs, &l), || show(cs, &r));
            }
        }
        t
    });
    t.merge(Tally::merge_all(parts));
    t
}

/// Conditions 5 and 7 for one target object `X`.
fn c0_over(cs: &dyn CSystem, frag: &Fragment, x: ObHandle) -> Tally {
    let mut t = Tally::new();
    let fx = cs.ft(x);
    let max = frag.max_len();
    let px = cs.proj(x);
    for (yi, &y) in frag.objects().iter().enumerate() {
        let fs = frag.mors(y, fx);
        if fs.is_empty() {
            continue;
        }
        if y.len() + 1 > max {
            t.out_of_window();
            continue;
        }
        for f in fs {
            let inputs = || vec![show(cs, f), ob(cs, x)];
            let Some(q) = t.absorb(cs.q(f, x), "c0.5", inputs) else { continue };
            let s = q.source();
            t.expect(s.len() > 0, "c0.5", inputs, || "l(f*X) > 0".into(), || s.len().to_string());
            t.expect(cs.ft(s) == y, "c0.5", inputs, || ob(cs, y), || ob(cs, cs.ft(s)));
            t.expect(q.target() == x, "c0.5", inputs, || ob(cs, x), || ob(cs, q.target()));
            let Some(star) = t.absorb(cs.star(f, x), "c0.5", inputs) else { continue };
            t.expect(star == s, "c0.5", inputs, || ob(cs, star), || ob(cs, s));
            let top = t.absorb(cs.comp(&q, &px), "c0.5", inputs);
            let bottom = t.absorb(cs.comp(&cs.proj(s), f), "c0.5", inputs);
            if let (Some(a), Some(b)) = (top, bottom) {
                t.expect(a == b, "c0.5", inputs, || show(cs, &b), || show(cs, &a));
            }
        }
        for (zi, &z) in frag.objects().iter().enumerate() {
            if z.len() + 1 > max {
                continue;
            }
            let gs = frag.mors(z, y);
            let seed = mix(frag.config.rng_seed, &[x.id() as usize, yi, zi]);
            let (pairs, tr) = bounded_product(gs.len(), fs.len(), FUNCTOR_CAP, seed);
            t.mark_truncated(tr);
            for (i, j) in pairs {
                let (g, f) = (&gs[i], &fs[j]);
                let inputs = || vec![show(cs, g), show(cs, f), ob(cs, x)];
                let lhs = cs.comp(g, f).and_then(|gf| Ok((cs.star(&gf, x)?, cs.q(&gf, x)?)));
                let rhs = cs.star(f, x).and_then(|fx| {
                    let q = cs.comp(&cs.q(g, fx)?, &cs.q(f, x)?)?;
                    Ok((cs.star(g, fx)?, q))
                });
                let (Some((ls, lq)), Some((rs, rq))) =
                    (t.absorb(lhs, "c0.7", inputs), t.absorb(rhs, "c0.7", inputs))
                else {
                    continue;
                };
                t.expect(ls == rs, "c0.7", inputs, || ob(cs, ls), || ob(cs, rs));
                t.expect(lq == rq, "c0.7", inputs, || show(cs, &lq), || show(cs, &rq));
            }
        }
    }
    t
}

/// The seven conditions on a C0-system and the pre-category laws.
pub fn check_c0_axioms(cs: &dyn CSystem, frag: &Fragment) -> CheckReport {
    let mut t = Tally::new();
    t.mark_truncated(frag.objects_truncated() || frag.any_hom_truncated());
    let pt = cs.pt();
    t.expect(pt.is_pt(), "c0.1", || vec![ob(cs, pt)], || "0".into(), || pt.len().to_string());
    for &x in frag.objects() {
        let fx = cs.ft(x);
        if x.is_pt() {
            t.expect(x == pt, "c0.1", || vec![ob(cs, x)], || ob(cs, pt), || ob(cs, x));
            t.expect(fx == pt, "c0.3", || vec![ob(cs, x)], || ob(cs, pt), || ob(cs, fx));
        } else {
            t.expect(
                fx.len() + 1 == x.len(),
                "c0.2",
                || vec![ob(cs, x)],
                || (x.len() - 1).to_string(),
                || fx.len().to_string(),
            );
            let inputs = || vec![ob(cs, x)];
            let id = cs.ident(fx);
            if let Some(s) = t.absorb(cs.star(&id, x), "c0.6", inputs) {
                t.expect(s == x, "c0.6", inputs, || ob(cs, x), || ob(cs, s));
            }
            if let Some(q) = t.absorb(cs.q(&id, x), "c0.6", inputs) {
                let idx = cs.ident(x);
                t.expect(q == idx, "c0.6", inputs, || show(cs, &idx), || show(cs, &q));
            }
        }
        let p = cs.proj(x);
        t.expect(
            p.source() == x && p.target() == fx,
            "c0.p",
            || vec![ob(cs, x)],
            || format!("{} -> {}", ob(cs, x), ob(cs, fx)),
            || show(cs, &p),
        );
        match frag.hom(x, pt) {
            Some(h) if !h.truncated => t.expect(
                h.mors.len() == 1,
                "c0.4",
                || vec![ob(cs, x)],
                || "1".into(),
                || h.mors.len().to_string(),
            ),
            _ => t.skip(),
        }
    }
    t.merge(check_precategory(cs, frag));
    let targets: Vec<ObHandle> = frag.objects().iter().copied().filter(|x| !x.is_pt()).collect();
    t.merge(Tally::merge_all(frag.exec.map(&targets, |&x| c0_over(cs, frag, x))));
    t.finish("c0_axioms")
}

/// Conditions 1 to 3 for all `f : Y -> X` with `X` fixed.
fn s_over(cs: &dyn CSystem, frag: &Fragment, x: ObHandle) -> Tally {
    let mut t = Tally::new();
    let max = frag.max_len();
    for &y in frag.objects() {
        let fs = frag.mors(y, x);
        if fs.is_empty() {
            continue;
        }
        if y.len() + 1 > max {
            t.out_of_window();
            continue;
        }
        let (idx, tr) = bounded_range(fs.len(), SECTION_CAP, frag.config.rng_seed);
        t.mark_truncated(tr);
        for i in idx {
            let f = &fs[i];
            let inputs = || vec![show(cs, f)];
            let Some(ftf) = t.absorb(ft_mor(cs, f), "s.1", inputs) else { continue };
            let Some(s) = t.absorb(cs.sf(f), "s.1", inputs) else { continue };
            let Some(w) = t.absorb(cs.star(&ftf, x), "s.1", inputs) else { continue };
            t.expect(
                s.source() == y && s.target() == w,
                "s.1",
                inputs,
                || format!("{} -> {}", ob(cs, y), ob(cs, w)),
                || show(cs, &s),
            );
            if s.target() != w {
                continue;
            }
            if let Some(back) = t.absorb(cs.comp(&s, &cs.proj(w)), "s.2", inputs) {
                let id = cs.ident(y);
                t.expect(back == id, "s.2", inputs, || show(cs, &id), || show(cs, &back));
            }
            let re = cs.q(&ftf, x).and_then(|q| cs.comp(&s, &q));
            if let Some(re) = t.absorb(re, "s.3", inputs) {
                t.expect(&re == f, "s.3", inputs, || show(cs, f), || show(cs, &re));
            }
        }
    }
    t
}

/// Condition 4 for all `X = g* U` with `U` fixed.
fn s4_over(cs: &dyn CSystem, frag: &Fragment, u: ObHandle) -> Tally {
    let mut t = Tally::new();
    let max = frag.max_len();
    let fu = cs.ft(u);
    for (wi, &w) in frag.objects().iter().enumerate() {
        let gs = frag.mors(w, fu);
        if gs.is_empty() || w.len() + 1 > max {
            continue;
        }
        let (gi, tr) = bounded_range(gs.len(), 32, mix(frag.config.rng_seed, &[u.id() as usize, wi]));
        t.mark_truncated(tr);
        for i in gi {
            let g = &gs[i];
            let inputs = || vec![show(cs, g), ob(cs, u)];
            let Some(x) = t.absorb(cs.star(g, u), "s.4", inputs) else { continue };
            let Some(qg) = t.absorb(cs.q(g, u), "s.4", inputs) else { continue };
            for &y in frag.objects() {
                if y.len() + 1 > max {
                    continue;
                }
                let fs = frag.mors(y, x);
                let (fi, tr) = bounded_range(fs.len(), 32, frag.config.rng_seed);
                t.mark_truncated(tr);
                for j in fi {
                    let f = &fs[j];
                    let inputs = || vec![show(cs, f), show(cs, g), ob(cs, u)];
                    let lhs = cs.sf(f);
                    let rhs = cs.comp(f, &qg).and_then(|fq| cs.sf(&fq));
                    if let (Some(l), Some(r)) = (t.absorb(lhs, "s.4", inputs), t.absorb(rhs, "s.4", inputs)) {
                        t.expect(l == r, "s.4", inputs, || show(cs, &l), || show(cs, &r));
                    }
                }
            }
        }
    }
    t
}

/// The four conditions on `f ↦ s_f`, plus `ft(s) = Id` and `s_s = s` for
/// every section in the window.
pub fn check_s_axioms(cs: &dyn CSystem, frag: &Fragment) -> CheckReport {
    let mut t = Tally::new();
    t.mark_truncated(frag.objects_truncated() || frag.any_hom_truncated());
    let targets: Vec<ObHandle> = frag.objects().iter().copied().filter(|x| !x.is_pt()).collect();
    t.merge(Tally::merge_all(frag.exec.map(&targets, |&x| s_over(cs, frag, x))));
    t.merge(Tally::merge_all(frag.exec.map(&targets, |&u| s4_over(cs, frag, u))));
    for &x in &targets {
        let secs = frag.sections(cs, x);
        if secs.truncated {
            t.truncated();
        }
        for s in &secs.items {
            let m = s.mor();
            let inputs = || vec![show(cs, m)];
            if let Some(ft) = t.absorb(ft_mor(cs, m), "s.fix", inputs) {
                let id = cs.ident(cs.ft(x));
                t.expect(ft == id, "s.fix", inputs, || show(cs, &id), || show(cs, &ft));
            }
            if let Some(ss) = t.absorb(cs.sf(m), "s.fix", inputs) {
                t.expect(&ss == m, "s.fix", inputs, || show(cs, m), || show(cs, &ss));
            }
        }
    }
    t.finish("s_axioms")
}

/// A canonical square: `f : Y -> ft X` together with `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalSquare {
    pub f: MorHandle,
    pub x: ObHandle,
}

/// Every canonical square of the fragment whose base change stays within
/// the window and is defined.
pub fn canonical_squares(cs: &dyn CSystem, frag: &Fragment) -> Vec<CanonicalSquare> {
    let mut out = Vec::new();
    for &x in frag.objects().iter().filter(|x| !x.is_pt()) {
        for &y in frag.objects() {
            if y.len() + 1 > frag.max_len() {
                continue;
            }
            for f in frag.mors(y, cs.ft(x)) {
                if cs.star(f, x).is_ok() {
                    out.push(CanonicalSquare { f: f.clone(), x });
                }
            }
        }
    }
    out
}

/// Existence and uniqueness of fillers for the canonical square of
/// `(f, X)`, for every `Z` in the fragment.
///
/// For each first leg `g1 : Z -> Y` the cones over it are the lifts of
/// `g1 ; f` along `p_X`, and the candidate fillers are the lifts of `g1`
/// along `p_{f*X}`; both are enumerated exhaustively. The map
/// `g ↦ g ; q(f, X)` must be a bijection between them, and the filler of
/// each cone must be the canonical one. First legs are sampled past a fixed
/// budget per `Z`.
pub fn check_pullback_universal(
    cs: &dyn CSystem,
    frag: &Fragment,
    f: &MorHandle,
    x: ObHandle,
) -> super::Result<CheckReport> {
    if x.is_pt() || f.target() != cs.ft(x) {
        return Err(super::KernelError::domain("pullback", "not a canonical square"));
    }
    let fx = cs.star(f, x)?;
    let q = cs.q(f, x)?;
    let y = f.source();
    let cap = frag.config.hom_cap;
    let mut t = Tally::new();
    for (zi, &z) in frag.objects().iter().enumerate() {
        let legs = frag.mors(z, y);
        t.mark_truncated(frag.hom(z, y).is_some_and(|h| h.truncated));
        let (idx, tr) = bounded_range(legs.len(), CONE_LEG_CAP, mix(frag.config.rng_seed, &[zi]));
        t.mark_truncated(tr);
        for i in idx {
            let g1 = &legs[i];
            let inputs = || vec![show(cs, f), ob(cs, x), show(cs, g1)];
            let Some(base) = t.absorb(cs.comp(g1, f), "pullback.cone", inputs) else { continue };
            let cones = cs.enum_lifts(z, x, &base, cap);
            let fillers = cs.enum_lifts(z, fx, g1, cap);
            if cones.truncated || fillers.truncated {
                t.skip();
                continue;
            }
            let mut image: HashMap<MorHandle, MorHandle> = HashMap::new();
            for g in fillers.items {
                let Some(g2) = t.absorb(cs.comp(&g, &q), "pullback.cone", inputs) else { continue };
                if let Some(prev) = image.get(&g2) {
                    t.case();
                    t.fail(
                        "pullback.unique",
                        vec![show(cs, f), ob(cs, x), show(cs, g1), show(cs, &g2)],
                        format!("one filler, {}", show(cs, prev)),
                        format!("also {}", show(cs, &g)),
                    );
                    continue;
                }
                image.insert(g2, g);
            }
            for g2 in &cones.items {
                let inputs = || vec![show(cs, f), ob(cs, x), show(cs, g1), show(cs, g2)];
                let Some(g) = image.remove(g2) else {
                    t.case();
                    t.fail("pullback.exists", inputs(), "a filler", "none");
                    continue;
                };
                if let Some(canon) = t.absorb(solve_pullback(cs, g1, g2, f), "pullback.solve", inputs) {
                    t.expect(canon == g, "pullback.solve", inputs, || show(cs, &g), || show(cs, &canon));
                } else {
                    t.case();
                }
            }
            for (g2, g) in image {
                t.case();
                t.fail(
                    "pullback.commutes",
                    vec![show(cs, f), ob(cs, x), show(cs, g1), show(cs, &g)],
                    "a cone over g1 ; f",
                    show(cs, &g2),
                );
            }
        }
    }
    Ok(t.finish("pullback_universal"))
}

/// `s_f` recovered from the pullback property equals the instance's `s_f`:
/// among the lifts `g : Y -> (ft f)* X` of `Id_Y`, exactly one has
/// `g ; q(ft f, X) = f`, and it is `s_f`.
pub fn check_sf_from_pullback(cs: &dyn CSystem, frag: &Fragment) -> CheckReport {
    let targets: Vec<ObHandle> = frag.objects().iter().copied().filter(|x| !x.is_pt()).collect();
    let parts = frag.exec.map(&targets, |&x| {
        let mut t = Tally::new();
        for &y in frag.objects() {
            let fs = frag.mors(y, x);
            if fs.is_empty() {
                continue;
            }
            if y.len() + 1 > frag.max_len() {
                t.out_of_window();
                continue;
            }
            let (idx, tr) = bounded_range(fs.len(), SECTION_CAP, frag.config.rng_seed);
            t.mark_truncated(tr);
            for i in idx {
                let f = &fs[i];
                let inputs = || vec![show(cs, f)];
                let Some(ftf) = t.absorb(ft_mor(cs, f), "sf.pullback", inputs) else { continue };
                let w = cs.star(&ftf, x).and_then(|w| Ok((w, cs.q(&ftf, x)?)));
                let Some((w, q)) = t.absorb(w, "sf.pullback", inputs) else { continue };
                let lifts = cs.enum_lifts(y, w, &cs.ident(y), frag.config.hom_cap);
                if lifts.truncated {
                    t.skip();
                    continue;
                }
                let hits: Vec<MorHandle> =
                    lifts.items.into_iter().filter(|g| cs.comp(g, &q).is_ok_and(|h| &h == f)).collect();
                t.expect(hits.len() == 1, "sf.unique", inputs, || "1".into(), || hits.len().to_string());
                if hits.len() != 1 {
                    continue;
                }
                if let Some(s) = t.absorb(cs.sf(f), "sf.pullback", inputs) {
                    t.expect(s == hits[0], "sf.pullback", inputs, || show(cs, &hits[0]), || show(cs, &s));
                }
            }
        }
        t
    });
    Tally::merge_all(parts).finish("sf_from_pullback")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{
        enumerate_fragment, FamilyCS, FragmentConfig, MutantCS, Mutation, SetPrecategory, UnitCS,
    };
    use crate::kernel::Status;

    fn frag(cs: &dyn CSystem, l: usize) -> Fragment {
        enumerate_fragment(cs, FragmentConfig::with_max_len(l))
    }

    #[test]
    fn unit_passes_everything() {
        let cs = UnitCS::new();
        let f = frag(&cs, 4);
        assert_eq!(check_c0_axioms(&cs, &f).status, Status::Pass);
        assert_eq!(check_s_axioms(&cs, &f).status, Status::Pass);
        assert_eq!(check_sf_from_pullback(&cs, &f).status, Status::Pass);
        for sq in canonical_squares(&cs, &f) {
            let r = check_pullback_universal(&cs, &f, &sq.f, sq.x).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn small_context_passes() {
        let cs = FamilyCS::context(&[1, 2]).unwrap();
        let f = frag(&cs, 2);
        let c0 = check_c0_axioms(&cs, &f);
        assert!(c0.passed(), "{:?}", c0.counterexamples);
        let s = check_s_axioms(&cs, &f);
        assert!(s.passed(), "{:?}", s.counterexamples);
    }

    #[test]
    fn universe_with_empty_code_passes() {
        let cs = FamilyCS::universe(&[0, 1]).unwrap();
        let f = frag(&cs, 2);
        assert!(check_c0_axioms(&cs, &f).passed());
        assert!(check_s_axioms(&cs, &f).passed());
        for sq in canonical_squares(&cs, &f) {
            assert!(check_pullback_universal(&cs, &f, &sq.f, sq.x).unwrap().passed());
        }
    }

    #[test]
    fn permuted_q_breaks_condition_5() {
        let cs = MutantCS::new(FamilyCS::context(&[2]).unwrap(), Mutation::PermuteQ);
        let r = check_c0_axioms(&cs, &frag(&cs, 2));
        assert!(r.failed());
        assert!(r.cites("c0.5"));
    }

    #[test]
    fn shifted_sf_breaks_condition_2() {
        let cs = MutantCS::new(FamilyCS::context(&[2]).unwrap(), Mutation::ShiftSf);
        let r = check_s_axioms(&cs, &frag(&cs, 2));
        assert!(r.failed());
        assert!(r.cites("s.2"));
    }

    #[test]
    fn twisted_comp_breaks_associativity_or_identity() {
        let cs = MutantCS::new(FamilyCS::context(&[2]).unwrap(), Mutation::TwistComp);
        let r = check_c0_axioms(&cs, &frag(&cs, 2));
        assert!(r.failed());
    }

    #[test]
    fn fat_square_is_not_a_pullback() {
        let cs = SetPrecategory::fat_square();
        let f = frag(&cs, 2);
        let a = cs.object("A").unwrap();
        let r = check_pullback_universal(&cs, &f, &cs.proj(a), a).unwrap();
        assert!(r.failed());
        assert!(r.cites("pullback.unique"));
        let b = cs.object("B").unwrap();
        let r = check_pullback_universal(&cs, &f, &cs.proj(a), b).unwrap();
        assert!(!r.failed(), "{r:?}");
    }

    #[test]
    fn rejects_non_squares() {
        let cs = UnitCS::new();
        let f = frag(&cs, 2);
        let x = cs.object(2);
        assert!(check_pullback_universal(&cs, &f, &cs.ident(x), x).is_err());
    }
}
