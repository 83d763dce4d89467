use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::{CongDomain, Partition, RelationSeed};
use crate::kernel::{
    ft_iter, op_delta, op_s, op_st, op_t, op_tt, CSystem, CheckReport, KernelError, Result, Tally,
};
use crate::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OpKind {
    Ft,
    Partial,
    Delta,
    T,
    Tt,
    S,
    St,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Ft => "ft",
            OpKind::Partial => "partial",
            OpKind::Delta => "delta",
            OpKind::T => "T",
            OpKind::Tt => "T~",
            OpKind::S => "S",
            OpKind::St => "S~",
        }
    }
}

/// An element of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Ob(u32),
    Sect(u32),
}

/// One application of an operation to domain elements. `output` is `None`
/// when the result leaves the domain.
#[derive(Clone, Copy, Debug)]
pub struct OpInst {
    pub op: OpKind,
    pub inputs: [Elem; 2],
    pub output: Option<Elem>,
}

/// Every operation instance with inputs in the domain.
#[derive(Clone, Debug)]
pub struct OpTable {
    pub instances: Vec<OpInst>,
    /// Instances whose output escaped the domain.
    pub escaped: u64,
}

fn lift<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(KernelError::OutOfWindow { .. }) | Err(KernelError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

impl OpTable {
    pub fn build(cs: &dyn CSystem, dom: &CongDomain, exec: Exec) -> Result<Self> {
        let unary = Elem::Ob(u32::MAX);
        let ob = |x| dom.ob_index(x).map(|i| Elem::Ob(i as u32));
        let sect = |s: &_| dom.sect_index(s).map(|i| Elem::Sect(i as u32));
        let obs: Vec<usize> = (0..dom.objects().len()).collect();
        let from_obs = exec.map(&obs, |&xi| -> Result<Vec<OpInst>> {
            let x = dom.objects()[xi];
            let me = Elem::Ob(xi as u32);
            let mut out = Vec::new();
            if x.is_pt() {
                return Ok(out);
            }
            out.push(OpInst { op: OpKind::Ft, inputs: [me, unary], output: ob(cs.ft(x)) });
            let d = lift(op_delta(cs, x))?;
            out.push(OpInst { op: OpKind::Delta, inputs: [me, unary], output: d.as_ref().and_then(sect) });
            for i in 1..=x.len() {
                let b = ft_iter(cs, x, i);
                for &yi in dom.children(b) {
                    let t = lift(op_t(cs, dom.objects()[yi], x))?;
                    out.push(OpInst {
                        op: OpKind::T,
                        inputs: [Elem::Ob(yi as u32), me],
                        output: t.and_then(ob),
                    });
                }
                for &si in dom.sections_over(b) {
                    let s = lift(op_s(cs, &dom.sections()[si], x))?;
                    out.push(OpInst {
                        op: OpKind::S,
                        inputs: [Elem::Sect(si as u32), me],
                        output: s.and_then(ob),
                    });
                }
            }
            Ok(out)
        });
        let sects: Vec<usize> = (0..dom.sections().len()).collect();
        let from_sects = exec.map(&sects, |&ri| -> Result<Vec<OpInst>> {
            let r = &dom.sections()[ri];
            let me = Elem::Sect(ri as u32);
            let x = r.boundary();
            let mut out = vec![OpInst { op: OpKind::Partial, inputs: [me, unary], output: ob(x) }];
            for i in 1..=x.len() {
                let b = ft_iter(cs, x, i);
                for &yi in dom.children(b) {
                    let t = lift(op_tt(cs, dom.objects()[yi], r))?;
                    out.push(OpInst {
                        op: OpKind::Tt,
                        inputs: [Elem::Ob(yi as u32), me],
                        output: t.as_ref().and_then(sect),
                    });
                }
                for &si in dom.sections_over(b) {
                    let s = lift(op_st(cs, &dom.sections()[si], r))?;
                    out.push(OpInst {
                        op: OpKind::St,
                        inputs: [Elem::Sect(si as u32), me],
                        output: s.as_ref().and_then(sect),
                    });
                }
            }
            Ok(out)
        });
        let mut instances = Vec::new();
        for part in from_obs.into_iter().chain(from_sects) {
            instances.extend(part?);
        }
        let escaped = instances.iter().filter(|i| i.output.is_none()).count() as u64;
        Ok(OpTable { instances, escaped })
    }
}

/// The pair `(∼, ≃)` of equivalences on domain objects and sections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruencePair {
    pub ob: Partition,
    pub sect: Partition,
}

impl CongruencePair {
    pub fn discrete(dom: &CongDomain) -> Self {
        CongruencePair {
            ob: Partition::discrete(dom.objects().len()),
            sect: Partition::discrete(dom.sections().len()),
        }
    }

    fn root(&self, e: Elem) -> Elem {
        match e {
            Elem::Ob(u32::MAX) => e,
            Elem::Ob(i) => Elem::Ob(self.ob.find(i as usize) as u32),
            Elem::Sect(i) => Elem::Sect(self.sect.find(i as usize) as u32),
        }
    }

    fn union(&mut self, a: Elem, b: Elem) -> bool {
        match (a, b) {
            (Elem::Ob(a), Elem::Ob(b)) => self.ob.union(a as usize, b as usize),
            (Elem::Sect(a), Elem::Sect(b)) => self.sect.union(a as usize, b as usize),
            _ => unreachable!("operation outputs have a fixed sort"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CongError {
    #[error("seed pair relates elements of different lengths: {left} and {right}")]
    LengthMismatch { left: String, right: String },
    #[error("seed element outside the domain: {0}")]
    NotInDomain(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl CongError {
    /// The rejection as a failed report.
    pub fn report(&self, name: &str) -> CheckReport {
        let mut t = Tally::new();
        t.case();
        match self {
            CongError::LengthMismatch { left, right } => {
                t.fail("prop.2", vec![left.clone(), right.clone()], "equal lengths", "different lengths")
            }
            other => t.fail("seed", vec![], "seed inside the domain", other.to_string()),
        }
        t.finish(name)
    }
}

fn seed_pairs(
    cs: &dyn CSystem,
    dom: &CongDomain,
    seed: &RelationSeed,
) -> std::result::Result<Vec<(Elem, Elem)>, CongError> {
    let mut out = Vec::new();
    for &(a, b) in &seed.ob_pairs {
        if a.len() != b.len() {
            return Err(CongError::LengthMismatch { left: cs.show_ob(a), right: cs.show_ob(b) });
        }
        let idx = |x| dom.ob_index(x).ok_or_else(|| CongError::NotInDomain(cs.show_ob(x)));
        out.push((Elem::Ob(idx(a)? as u32), Elem::Ob(idx(b)? as u32)));
    }
    for (s, t) in &seed.sect_pairs {
        if s.boundary().len() != t.boundary().len() {
            return Err(CongError::LengthMismatch {
                left: cs.show_mor(s.mor()),
                right: cs.show_mor(t.mor()),
            });
        }
        let idx = |s| dom.sect_index(s).ok_or_else(|| CongError::NotInDomain(cs.show_mor(s.mor())));
        out.push((Elem::Sect(idx(s)? as u32), Elem::Sect(idx(t)? as u32)));
    }
    Ok(out)
}

/// The least pair of equivalences containing the seed and compatible with
/// every operation instance in `table`.
pub fn cong_close(
    cs: &dyn CSystem,
    dom: &CongDomain,
    table: &OpTable,
    seed: &RelationSeed,
) -> std::result::Result<CongruencePair, CongError> {
    let mut pair = CongruencePair::discrete(dom);
    for (a, b) in seed_pairs(cs, dom, seed)? {
        pair.union(a, b);
    }
    loop {
        let mut changed = false;
        let mut sig: HashMap<(OpKind, Elem, Elem), Elem> = HashMap::new();
        for inst in &table.instances {
            let Some(out) = inst.output else { continue };
            let key = (inst.op, pair.root(inst.inputs[0]), pair.root(inst.inputs[1]));
            match sig.get(&key) {
                Some(&prev) => changed |= pair.union(prev, out),
                None => {
                    sig.insert(key, out);
                }
            }
        }
        if !changed {
            return Ok(pair);
        }
    }
}

/// Checks that `pair` satisfies the four conditions characterising the
/// object and section parts of a regular congruence.
pub fn check_prop_conditions(
    cs: &dyn CSystem,
    dom: &CongDomain,
    table: &OpTable,
    pair: &CongruencePair,
) -> CheckReport {
    let mut t = Tally::new();
    t.mark_truncated(dom.truncated);
    for _ in 0..table.escaped {
        t.out_of_window();
    }
    let show = |e: Elem| match e {
        Elem::Ob(u32::MAX) => "-".to_string(),
        Elem::Ob(i) => cs.show_ob(dom.objects()[i as usize]),
        Elem::Sect(i) => cs.show_mor(dom.sections()[i as usize].mor()),
    };
    let mut sig: HashMap<(OpKind, Elem, Elem), (Elem, &[Elem; 2])> = HashMap::new();
    for inst in &table.instances {
        let Some(out) = inst.output else { continue };
        let key = (inst.op, pair.root(inst.inputs[0]), pair.root(inst.inputs[1]));
        match sig.get(&key) {
            Some(&(prev, prev_in)) => {
                t.expect(
                    pair.root(prev) == pair.root(out),
                    &format!("prop.1.{}", inst.op.name()),
                    || {
                        let mut v: Vec<String> = prev_in.iter().map(|&e| show(e)).collect();
                        v.extend(inst.inputs.iter().map(|&e| show(e)));
                        v
                    },
                    || show(prev),
                    || show(out),
                );
            }
            None => {
                t.case();
                sig.insert(key, (out, &inst.inputs));
            }
        }
    }
    let ob_classes = pair.ob.classes();
    for class in &ob_classes {
        let x0 = dom.objects()[class[0]];
        for &i in &class[1..] {
            let x = dom.objects()[i];
            t.expect(
                x.len() == x0.len(),
                "prop.2",
                || vec![cs.show_ob(x0), cs.show_ob(x)],
                || x0.len().to_string(),
                || x.len().to_string(),
            );
        }
    }
    // Object lifting: every F ∼ ft X carries some X_F ∼ X.
    for (xi, &x) in dom.objects().iter().enumerate() {
        if x.is_pt() {
            continue;
        }
        let Some(fi) = dom.ob_index(cs.ft(x)) else { continue };
        for (gi, &f) in dom.objects().iter().enumerate() {
            if gi == fi || !pair.ob.same(gi, fi) {
                continue;
            }
            let found = dom.children(f).iter().any(|&c| pair.ob.same(c, xi));
            if found {
                t.case();
            } else if dom.is_aux(x) {
                t.out_of_window();
            } else {
                t.case();
                t.fail("prop.3", vec![cs.show_ob(x), cs.show_ob(f)], "a lift over F", "none");
            }
        }
    }
    // Section lifting: every X' ∼ ∂s carries some s' ≃ s.
    for (si, s) in dom.sections().iter().enumerate() {
        let xi = dom.ob_index(s.boundary()).expect("boundaries lie in the domain");
        for &xj in &ob_classes[class_pos(&ob_classes, pair.ob.find(xi))] {
            if xj == xi {
                continue;
            }
            let x2 = dom.objects()[xj];
            let found = dom.sections_over(x2).iter().any(|&sj| pair.sect.same(sj, si));
            if found {
                t.case();
            } else if dom.is_aux(x2) {
                t.out_of_window();
            } else {
                t.case();
                t.fail("prop.4", vec![cs.show_mor(s.mor()), cs.show_ob(x2)], "a related section", "none");
            }
        }
    }
    t.finish("prop_conditions")
}

fn class_pos(classes: &[Vec<usize>], root: usize) -> usize {
    classes.binary_search_by_key(&root, |c| c[0]).expect("roots are class minima")
}
