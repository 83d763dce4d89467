//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. Each
//! criterion runs the library's suites and then checks them against an
//! oracle computed here: brute-force search over hom-sets, point-level
//! semantics of the context instances, and hand-counted sizes.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use csys::checker::{
    mutation_suites, shipped_fixtures, suite_c0_c, suite_congruence, suite_kernel_collapse,
    suite_proj_section, suite_prop_pullback, suite_subsystem,
};
use csys::congruence::{
    build_quotient, cong_close, extend_to_mor, kernel_seed, CongDomain, OpTable, QuotientCS, RelationSeed,
};
use csys::instances::{ContextRelabel, FamilyCS, Fragment, FragmentConfig, Instance};
use csys::kernel::{ft_iter, ft_mor, op_delta, op_tt, proj_iter, solve_pullback, CSystem};
use csys::subsystems::default_seeds;
use csys::Exec;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fragment(cs: &dyn CSystem, max_len: usize) -> Fragment {
    Fragment::build(cs, FragmentConfig::with_max_len(max_len), Exec::default())
}

fn fixtures() -> Vec<(String, Instance, usize)> {
    shipped_fixtures()
        .into_iter()
        .map(|fx| (fx.name.to_string(), Instance::build(&fx.instance).unwrap(), fx.max_len))
        .collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut cases = 0;
    for (name, inst, l) in fixtures() {
        let frag = fragment(inst.cs(), l);
        let r = suite_c0_c(inst.cs(), &frag);
        ensure!(r.passed(), "{name}: {}", r.render_text());
        cases += r.checks.iter().map(|c| c.cases).sum::<u64>();
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("4 fixtures, {cases} cases, {:.1}s", elapsed.as_secs_f64()))
}

/// Searches the whole hom-set for fillers and for sections with the `s_f`
/// property, instead of using the closed forms.
fn brute_force_pullbacks(cs: &dyn CSystem, frag: &Fragment) -> Result<usize, String> {
    ensure!(!frag.any_hom_truncated(), "hom-sets were sampled");
    let mut cones = 0;
    let objs = frag.objects();
    for &x in objs.iter().filter(|x| !x.is_pt()) {
        for &y in objs.iter().filter(|y| y.len() < frag.max_len()) {
            for f in frag.mors(y, cs.ft(x)) {
                let fx = cs.star(f, x).map_err(|e| e.to_string())?;
                let q = cs.q(f, x).map_err(|e| e.to_string())?;
                for &z in objs {
                    for g1 in frag.mors(z, y) {
                        let base = cs.comp(g1, f).unwrap();
                        for g2 in frag.mors(z, x).iter().filter(|g2| ft_mor(cs, g2).unwrap() == base) {
                            let fillers: Vec<_> = frag
                                .mors(z, fx)
                                .iter()
                                .filter(|g| ft_mor(cs, g).unwrap() == *g1 && cs.comp(g, &q).unwrap() == *g2)
                                .collect();
                            ensure!(fillers.len() == 1, "{} fillers for {}", fillers.len(), cs.show_mor(g2));
                            let solved = solve_pullback(cs, g1, g2, f).map_err(|e| e.to_string())?;
                            ensure!(*fillers[0] == solved, "filler differs for {}", cs.show_mor(g2));
                            cones += 1;
                        }
                    }
                }
            }
        }
    }
    // s_f for f : Y -> X is the unique section of (ft f)* X over Y whose
    // composite with q(ft f, X) is f.
    for &x in objs.iter().filter(|x| !x.is_pt()) {
        for &y in objs.iter().filter(|y| y.len() < frag.max_len()) {
            for f in frag.mors(y, x) {
                let ftf = ft_mor(cs, f).unwrap();
                let pb = cs.star(&ftf, x).unwrap();
                let q = cs.q(&ftf, x).unwrap();
                let secs: Vec<_> = frag
                    .mors(y, pb)
                    .iter()
                    .filter(|s| ft_mor(cs, s).unwrap() == cs.ident(y) && cs.comp(s, &q).unwrap() == *f)
                    .collect();
                ensure!(secs.len() == 1, "{} candidates for s_f of {}", secs.len(), cs.show_mor(f));
                ensure!(*secs[0] == cs.sf(f).unwrap(), "s_f differs for {}", cs.show_mor(f));
            }
        }
    }
    Ok(cones)
}

fn criterion_2() -> Verdict {
    let mut cones = 0;
    for (name, inst, l) in fixtures() {
        let frag = fragment(inst.cs(), l);
        let r = suite_prop_pullback(inst.cs(), &frag);
        ensure!(r.passed(), "{name}: {}", r.render_text());
    }
    let ctx = FamilyCS::context(&[2]).unwrap();
    let uni = FamilyCS::universe(&[1, 2]).unwrap();
    for cs in [&ctx as &dyn CSystem, &uni] {
        cones += brute_force_pullbacks(cs, &fragment(cs, 2))?;
    }
    ensure!(cones > 0, "no cones examined");
    Ok(format!("suites pass; {cones} cones brute-forced"))
}

fn criterion_3() -> Verdict {
    let mut runs = 0;
    for (name, inst, l) in fixtures() {
        let cs = inst.cs();
        let frag = fragment(cs, l);
        let seeds = default_seeds(cs, &frag);
        let distinct: BTreeSet<String> = seeds.iter().map(|s| s.encode(cs).to_string()).collect();
        ensure!(distinct.len() >= 5, "{name}: only {} distinct seeds", distinct.len());
        for seed in &seeds {
            let r = suite_subsystem(cs, seed, &frag);
            for check in ["check_closed", "subsystem_lemmas", "determination"] {
                let c = r.check(check).ok_or(format!("{name}: no {check} report"))?;
                ensure!(c.passed(), "{name} seed {}: {check} {:?}", seed.encode(cs), c.counterexamples);
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} seeded closures"))
}

/// Point-level oracle in a context instance: `s_{p_{X,i}}` sends a point
/// `c` of `X` to `c` extended by its coordinate at position `l(X) - i - 1`.
fn context_section_oracle(cs: &FamilyCS, l: usize) -> Result<usize, String> {
    let frag = fragment(cs, l);
    let mut n = 0;
    for &x in frag.objects() {
        for i in 1..x.len() {
            let s = cs.sf(&proj_iter(cs, x, i).unwrap()).unwrap();
            let src = cs.points(s.source()).unwrap();
            let tgt = cs.points(s.target()).unwrap();
            for (c, &k) in src.iter().zip(s.data()) {
                let mut want = c.clone();
                want.push(c[x.len() - i - 1]);
                ensure!(tgt[k as usize] == want, "{} at i = {i}", cs.show_ob(x));
            }
            n += 1;
        }
    }
    Ok(n)
}

fn criterion_4() -> Verdict {
    let mut cases = 0;
    for (name, inst, l) in fixtures() {
        let cs = inst.cs();
        let frag = fragment(cs, l);
        let r = suite_proj_section(cs, &frag);
        ensure!(r.passed(), "{name}: {}", r.render_text());
        for &x in frag.objects() {
            for i in 1..x.len() {
                let lhs = cs.sf(&proj_iter(cs, x, i).unwrap()).unwrap();
                let mut rhs = op_delta(cs, ft_iter(cs, x, i)).unwrap();
                for j in (0..i).rev() {
                    rhs = op_tt(cs, ft_iter(cs, x, j), &rhs).unwrap();
                }
                ensure!(lhs == *rhs.mor(), "{name}: {} at i = {i}", cs.show_ob(x));
                cases += 1;
            }
        }
    }
    let sem = context_section_oracle(&FamilyCS::context(&[2, 3]).unwrap(), 3)?;
    Ok(format!("{cases} cases; {sem} checked pointwise"))
}

/// `sum over Y, X of |X|^|Y|` for objects with the given point counts.
fn hom_total(point_counts: &[u64]) -> u64 {
    point_counts.iter().flat_map(|&y| point_counts.iter().map(move |&x| x.pow(y as u32))).sum()
}

fn quotient_of<'a>(cs: &'a FamilyCS, frag: &Fragment, seed: &RelationSeed) -> (QuotientCS<'a>, CongDomain) {
    let dom = CongDomain::build(cs, frag);
    let table = OpTable::build(cs, &dom, frag.exec).unwrap();
    let pair = cong_close(cs, &dom, &table, seed).unwrap();
    let mor = extend_to_mor(cs, frag, &dom, &pair).unwrap();
    let (q, wd) = build_quotient(cs, frag, &dom, &pair, &mor);
    assert!(wd.passed(), "{wd:?}");
    (q, dom)
}

fn criterion_5() -> Verdict {
    let src = FamilyCS::context(&[2, 2]).unwrap();
    let tgt = FamilyCS::context(&[2]).unwrap();
    let frag = fragment(&src, 2);
    let relabel = ContextRelabel::new(&src, &tgt, vec![0, 0]).unwrap();

    let discrete = suite_congruence(&src, &RelationSeed::default(), &frag);
    ensure!(discrete.report.passed(), "discrete: {}", discrete.report.render_text());
    let kernel = suite_kernel_collapse(&src, &tgt, &relabel, &frag);
    ensure!(kernel.passed(), "kernel: {}", kernel.render_text());
    ensure!(kernel.check("quotient_iso").is_some(), "iso check missing");

    // Discrete: 7 objects with 1, 2, 2, 4, 4, 4, 4 points.
    let (q, _) = quotient_of(&src, &frag, &RelationSeed::default());
    let qfrag = fragment(&q, 2);
    let homs: u64 = qfrag.all_morphisms().count() as u64;
    ensure!(qfrag.objects().len() == 7, "discrete objects {}", qfrag.objects().len());
    ensure!(homs == hom_total(&[1, 2, 2, 4, 4, 4, 4]), "discrete morphisms {homs}");

    // Kernel: every type collapses, so a length-n class has 2^n members and
    // the quotient matches contexts over one type of size 2.
    let dom = CongDomain::build(&src, &frag);
    let (q, _) = quotient_of(&src, &frag, &kernel_seed(&dom, &src, &tgt, &relabel));
    let qfrag = fragment(&q, 2);
    ensure!(qfrag.objects().len() == 3, "kernel objects {}", qfrag.objects().len());
    for &x in qfrag.objects() {
        let members = q.ob_members(x).len();
        ensure!(members == 1 << x.len(), "class of length {} has {members} members", x.len());
    }
    let homs: u64 = qfrag.all_morphisms().count() as u64;
    ensure!(homs == hom_total(&[1, 2, 4]), "kernel morphisms {homs}");
    Ok(format!("discrete and kernel quotients; kernel has {homs} morphisms"))
}

fn criterion_6() -> Verdict {
    let outcomes = mutation_suites(Exec::default());
    ensure!(outcomes.len() >= 6, "only {} mutations", outcomes.len());
    let mut lines = Vec::new();
    for m in &outcomes {
        let cited: BTreeSet<&str> = m
            .report
            .checks
            .iter()
            .flat_map(|c| c.counterexamples.iter().map(|cx| cx.condition.as_str()))
            .collect();
        ensure!(!cited.is_empty(), "{} has no counterexample", m.mutation);
        ensure!(m.caught, "{} not caught", m.mutation);
        lines.push(format!("{}: {}", m.mutation, cited.into_iter().collect::<Vec<_>>().join("/")));
    }
    Ok(format!("{} caught ({})", outcomes.len(), lines.join(", ")))
}

fn criterion_7() -> Verdict {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_csys"))
            .args(["suite-all", "--format", "json"])
            .output()
            .expect("csys runs")
    };
    let (a, b) = (run(), run());
    ensure!(a.status.code() == Some(0), "exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr));
    ensure!(!a.stdout.is_empty(), "empty output");
    ensure!(a.stdout == b.stdout, "outputs differ");
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    ensure!(v["suites"].as_array().is_some_and(|s| !s.is_empty()), "no suites in JSON");
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 axioms on shipped fixtures", criterion_1),
        ("2 pullbacks and s_f", criterion_2),
        ("3 seeded subsystems", criterion_3),
        ("4 projection sections", criterion_4),
        ("5 congruence pipelines", criterion_5),
        ("6 mutations caught", criterion_6),
        ("7 deterministic suite-all", criterion_7),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let verdict = f();
        eprintln!("criterion {name}: {:.1}s", start.elapsed().as_secs_f64());
        match verdict {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
