//! Named suites over the kernel, subsystem and congruence checks, the
//! shipped fixtures, and the mutation fixtures that must be caught.

use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::congruence::{
    build_quotient, check_congruence_def, check_prop_conditions, check_quotient_iso, check_tilde_ob_quotient,
    cong_close, extend_to_mor, kernel_seed, proj_section_sweep, roundtrip_injectivity, CongDomain,
    CongruencePair, MorPartition, OpTable, QuotientCS, QuotientMutation, RelationSeed,
};
use crate::instances::{
    ContextRelabel, FamilyCS, Fragment, FragmentConfig, Instance, InstanceConfig, Mutation, SetPrecategory,
};
use crate::kernel::{
    canonical_squares, check_c0_axioms, check_pullback_universal, check_s_axioms, check_sf_from_pullback,
    op_delta, CSystem, CheckReport, Status,
};
use crate::subsystems::{
    check_closed, check_determination, close_window, default_seeds, verify_subsystem_lemmas, SubsystemSeed,
};
use crate::Exec;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckReport>,
    pub totals: Totals,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckReport>) -> Self {
        let mut totals = Totals::default();
        for c in &checks {
            match c.status {
                Status::Pass => totals.pass += 1,
                Status::Fail => totals.fail += 1,
                Status::Skipped => totals.skipped += 1,
            }
        }
        SuiteReport { suite: suite.into(), checks, totals, wall_time: Duration::ZERO }
    }

    fn timed(suite: impl Into<String>, start: Instant, checks: Vec<CheckReport>) -> Self {
        let mut r = SuiteReport::new(suite, checks);
        r.wall_time = start.elapsed();
        r
    }

    /// Every check passed.
    pub fn passed(&self) -> bool {
        self.totals.fail == 0 && self.totals.skipped == 0
    }

    pub fn failed(&self) -> bool {
        self.totals.fail > 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable rendering with decoded encodings.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "suite {}: {} pass, {} fail, {} skipped\n",
            self.suite, self.totals.pass, self.totals.fail, self.totals.skipped
        );
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out.push_str(&format!("  [{status}] {} ({} cases", c.name, c.cases));
            if c.stats.out_of_window > 0 {
                out.push_str(&format!(", {} out of window", c.stats.out_of_window));
            }
            if c.stats.truncated {
                out.push_str(", sampled");
            }
            out.push_str(")\n");
            for ce in &c.counterexamples {
                out.push_str(&format!(
                    "    {}: {}\n      expected {}\n      actual   {}\n",
                    ce.condition,
                    ce.inputs.join(", "),
                    ce.expected,
                    ce.actual
                ));
            }
        }
        out
    }
}

/// Axioms of a C0-system and of the operation `f ↦ s_f`.
pub fn suite_c0_c(cs: &dyn CSystem, frag: &Fragment) -> SuiteReport {
    let start = Instant::now();
    SuiteReport::timed("c0_c", start, vec![check_c0_axioms(cs, frag), check_s_axioms(cs, frag)])
}

/// Canonical squares are pullbacks, with the canonical filler, and `s_f` is
/// the one the pullback property forces.
pub fn suite_prop_pullback(cs: &dyn CSystem, frag: &Fragment) -> SuiteReport {
    let start = Instant::now();
    let squares = canonical_squares(cs, frag);
    let parts = frag.exec.map(&squares, |sq| match check_pullback_universal(cs, frag, &sq.f, sq.x) {
        Ok(r) => r,
        Err(e) => {
            let mut t = crate::kernel::Tally::new();
            t.case();
            t.fail("pullback.square", vec![cs.show_mor(&sq.f), cs.show_ob(sq.x)], "defined", e.to_string());
            t.finish("pullback_universal")
        }
    });
    let pullback = CheckReport::combine("pullback_universal", parts);
    SuiteReport::timed("prop_pullback", start, vec![pullback, check_sf_from_pullback(cs, frag)])
}

/// The identity between sections of iterated projections and nested
/// weakenings of diagonals.
pub fn suite_proj_section(cs: &dyn CSystem, frag: &Fragment) -> SuiteReport {
    let start = Instant::now();
    SuiteReport::timed("proj_section", start, vec![proj_section_sweep(cs, frag)])
}

/// Closure of `seed`, its closedness and lemmas, and determination against
/// the closure of the seed with objects replaced by their diagonals.
pub fn suite_subsystem(cs: &dyn CSystem, seed: &SubsystemSeed, frag: &Fragment) -> SuiteReport {
    let start = Instant::now();
    let l = frag.max_len();
    let w = close_window(cs, seed, l);
    let w2 = close_window(cs, &seed.delta_variant(cs, l), l);
    SuiteReport::timed(
        "subsystem",
        start,
        vec![
            check_closed(cs, &w),
            verify_subsystem_lemmas(cs, &w, frag),
            check_determination(cs, &w, &w2, frag),
        ],
    )
}

/// Result of the congruence pipeline: the suite and, when the quotient was
/// built, its dump.
pub struct CongruenceOutcome {
    pub report: SuiteReport,
    pub quotient: Option<Value>,
}

struct Pipeline<'a> {
    frag: Fragment,
    dom: CongDomain,
    pair: CongruencePair,
    mor: MorPartition,
    quotient: QuotientCS<'a>,
    qfrag: Fragment,
}

fn run_pipeline<'a>(
    cs: &'a dyn CSystem,
    seed: &RelationSeed,
    frag: &Fragment,
    checks: &mut Vec<CheckReport>,
) -> Option<Pipeline<'a>> {
    let dom = CongDomain::build(cs, frag);
    let table = match OpTable::build(cs, &dom, frag.exec) {
        Ok(t) => t,
        Err(e) => {
            checks.push(crate::congruence::CongError::from(e).report("cong_close"));
            return None;
        }
    };
    let pair = match cong_close(cs, &dom, &table, seed) {
        Ok(p) => p,
        Err(e) => {
            checks.push(e.report("cong_close"));
            return None;
        }
    };
    let mut t = crate::kernel::Tally::new();
    t.case();
    for _ in 0..table.escaped {
        t.out_of_window();
    }
    checks.push(t.finish("cong_close"));
    checks.push(check_prop_conditions(cs, &dom, &table, &pair));
    let mor = match extend_to_mor(cs, frag, &dom, &pair) {
        Ok(m) => m,
        Err(e) => {
            let mut t = crate::kernel::Tally::new();
            t.case();
            t.fail("extend", vec![], "defined", e.to_string());
            checks.push(t.finish("extend_to_mor"));
            return None;
        }
    };
    let mut t = crate::kernel::Tally::new();
    t.case();
    checks.push(t.finish("extend_to_mor"));
    checks.push(check_congruence_def(cs, frag, &dom, &pair, &mor));
    checks.push(proj_section_sweep(cs, frag));
    let (quotient, wd) = build_quotient(cs, frag, &dom, &pair, &mor);
    checks.push(wd);
    let qfrag = Fragment::build(&quotient, frag.config, frag.exec);
    Some(Pipeline { frag: frag.clone(), dom, pair, mor, quotient, qfrag })
}

fn finish_pipeline(p: &Pipeline, checks: &mut Vec<CheckReport>) {
    checks.push(check_c0_axioms(&p.quotient, &p.qfrag).renamed("quotient.c0_axioms"));
    checks.push(check_s_axioms(&p.quotient, &p.qfrag).renamed("quotient.s_axioms"));
    checks.push(check_tilde_ob_quotient(&p.quotient, &p.qfrag, &p.dom, &p.pair));
    checks.push(roundtrip_injectivity(p.quotient.base(), &p.frag, &p.dom, &p.pair, &p.mor));
}

/// The quotient's objects with their members and `ft`, and its morphism
/// classes with representatives and `s_F`.
pub fn dump_quotient(q: &QuotientCS, qfrag: &Fragment) -> Value {
    let objects: Vec<Value> = qfrag
        .objects()
        .iter()
        .map(|&x| {
            json!({
                "rep": q.encode_ob(x),
                "members": q.ob_members(x).iter().map(|&m| q.base().encode_ob(m)).collect::<Vec<_>>(),
                "ft": q.encode_ob(q.ft(x)),
            })
        })
        .collect();
    let mut morphisms = Vec::new();
    for &y in qfrag.objects() {
        for &x in qfrag.objects() {
            for f in qfrag.mors(y, x) {
                let sf = if x.is_pt() {
                    Value::Null
                } else {
                    q.sf(f).map(|s| q.encode_mor(&s)).unwrap_or(Value::Null)
                };
                morphisms.push(json!({
                    "rep": q.encode_mor(f),
                    "size": q.members(f).count(),
                    "sf": sf,
                }));
            }
        }
    }
    json!({"objects": objects, "morphisms": morphisms})
}

/// The full congruence pipeline for the relation generated by `seed`.
pub fn suite_congruence(cs: &dyn CSystem, seed: &RelationSeed, frag: &Fragment) -> CongruenceOutcome {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut quotient = None;
    if let Some(p) = run_pipeline(cs, seed, frag, &mut checks) {
        finish_pipeline(&p, &mut checks);
        quotient = Some(dump_quotient(&p.quotient, &p.qfrag));
    }
    CongruenceOutcome { report: SuiteReport::timed("congruence", start, checks), quotient }
}

/// The pipeline for the kernel of relabeling `src` onto `tgt`, plus the
/// isomorphism of the quotient with `tgt`'s fragment.
pub fn suite_kernel_collapse(
    src: &FamilyCS,
    tgt: &FamilyCS,
    relabel: &ContextRelabel,
    frag: &Fragment,
) -> SuiteReport {
    let start = Instant::now();
    let dom = CongDomain::build(src, frag);
    let seed = kernel_seed(&dom, src, tgt, relabel);
    let mut checks = Vec::new();
    if let Some(p) = run_pipeline(src, &seed, frag, &mut checks) {
        finish_pipeline(&p, &mut checks);
        let tfrag = Fragment::build(tgt, frag.config, frag.exec);
        checks.push(check_quotient_iso(&p.quotient, &p.qfrag, src, tgt, &tfrag, relabel));
    }
    SuiteReport::timed("kernel_collapse", start, checks)
}

/// A shipped instance together with its length bound.
#[derive(Clone, Debug, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    pub instance: InstanceConfig,
    pub max_len: usize,
}

impl Fixture {
    pub fn fragment_config(&self) -> FragmentConfig {
        FragmentConfig::with_max_len(self.max_len)
    }
}

pub fn shipped_fixtures() -> Vec<Fixture> {
    vec![
        Fixture { name: "unit", instance: InstanceConfig::Unit, max_len: 4 },
        Fixture { name: "context_2", instance: InstanceConfig::context(&[2]), max_len: 3 },
        Fixture { name: "context_2_2", instance: InstanceConfig::context(&[2, 2]), max_len: 2 },
        Fixture { name: "universe_1_2", instance: InstanceConfig::universe(&[1, 2]), max_len: 2 },
    ]
}

/// A suite run against a named target.
#[derive(Clone, Debug, Serialize)]
pub struct NamedSuite {
    pub fixture: String,
    #[serde(flatten)]
    pub report: SuiteReport,
}

/// A mutation fixture's outcome: `caught` when some check failed with a
/// counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct MutationOutcome {
    pub mutation: String,
    pub caught: bool,
    pub report: SuiteReport,
}

impl MutationOutcome {
    fn new(mutation: &str, report: SuiteReport) -> Self {
        let caught = report.checks.iter().any(|c| c.failed() && !c.counterexamples.is_empty());
        MutationOutcome { mutation: mutation.into(), caught, report }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AllReport {
    pub suites: Vec<NamedSuite>,
    pub mutations: Vec<MutationOutcome>,
    pub totals: Totals,
    pub mutations_caught: usize,
}

impl AllReport {
    /// Appends a suite and counts it in the totals.
    pub fn push(&mut self, s: NamedSuite) {
        self.totals.pass += s.report.totals.pass;
        self.totals.fail += s.report.totals.fail;
        self.totals.skipped += s.report.totals.skipped;
        self.suites.push(s);
    }

    /// Every shipped suite passed and every mutation was caught.
    pub fn ok(&self) -> bool {
        self.suites.iter().all(|s| s.report.passed()) && self.mutations.iter().all(|m| m.caught)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!("[{}] ", s.fixture));
            out.push_str(&s.report.render_text());
        }
        for m in &self.mutations {
            out.push_str(&format!(
                "mutation {}: {}\n",
                m.mutation,
                if m.caught { "caught" } else { "NOT CAUGHT" }
            ));
        }
        out.push_str(&format!(
            "total: {} pass, {} fail, {} skipped; {}/{} mutations caught\n",
            self.totals.pass,
            self.totals.fail,
            self.totals.skipped,
            self.mutations_caught,
            self.mutations.len()
        ));
        out
    }
}

/// Every suite on one fixture: axioms, the pullback property, the
/// projection-section identity and the subsystem suite for each default seed.
pub fn fixture_suites(cs: &dyn CSystem, frag: &Fragment) -> Vec<SuiteReport> {
    let mut out = vec![suite_c0_c(cs, frag), suite_prop_pullback(cs, frag), suite_proj_section(cs, frag)];
    for (k, seed) in default_seeds(cs, frag).iter().enumerate() {
        let mut r = suite_subsystem(cs, seed, frag);
        r.suite = format!("subsystem[{k}]");
        out.push(r);
    }
    out
}

fn context_2_2_frag(exec: Exec) -> (FamilyCS, Fragment) {
    let cs = FamilyCS::context(&[2, 2]).expect("valid sizes");
    let frag = Fragment::build(&cs, FragmentConfig::with_max_len(2), exec);
    (cs, frag)
}

/// Mutated instances, windows, relations and quotients; each must fail.
pub fn mutation_suites(exec: Exec) -> Vec<MutationOutcome> {
    let mut out = Vec::new();
    for (name, m) in [
        ("permuted_q", Mutation::PermuteQ),
        ("shifted_sf", Mutation::ShiftSf),
        ("twisted_comp", Mutation::TwistComp),
    ] {
        let inst = Instance::build(&InstanceConfig::context(&[2]).mutated(m)).expect("valid config");
        let frag = Fragment::build(inst.cs(), FragmentConfig::with_max_len(3), exec);
        out.push(MutationOutcome::new(name, suite_c0_c(inst.cs(), &frag)));
    }
    let fat = SetPrecategory::fat_square();
    let frag = Fragment::build(&fat, FragmentConfig::with_max_len(2), exec);
    let r = suite_prop_pullback(&fat, &frag);
    out.push(MutationOutcome::new("non_pullback_square", SuiteReport::new(r.suite, r.checks[..1].to_vec())));

    let cs = FamilyCS::context(&[2]).expect("valid sizes");
    let frag = Fragment::build(&cs, FragmentConfig::with_max_len(3), exec);
    let x = cs.context_object(&[0]).expect("valid context");
    let w = close_window(&cs, &SubsystemSeed::objects(vec![x]), 3);
    let dropped = w.without_section(&op_delta(&cs, x).expect("l(X) > 0"));
    let r = SuiteReport::new(
        "subsystem",
        vec![check_closed(&cs, &dropped), verify_subsystem_lemmas(&cs, &dropped, &frag)],
    );
    out.push(MutationOutcome::new("dropped_section", r));

    let (cs, frag) = context_2_2_frag(exec);
    let t0 = cs.context_object(&[0]).expect("valid context");
    let mut checks = Vec::new();
    if let Some(mut p) = run_pipeline(&cs, &RelationSeed::default(), &frag, &mut checks) {
        let s = frag.sections(&cs, t0).items;
        p.mor.merge_classes(s[0].mor(), s[1].mor());
        let r = SuiteReport::new(
            "congruence",
            vec![
                check_congruence_def(&cs, &frag, &p.dom, &p.pair, &p.mor),
                roundtrip_injectivity(&cs, &frag, &p.dom, &p.pair, &p.mor),
            ],
        );
        out.push(MutationOutcome::new("merged_morphisms", r));
    }

    let tgt = FamilyCS::context(&[2]).expect("valid sizes");
    let relabel = ContextRelabel::new(&cs, &tgt, vec![0, 0]).expect("sizes agree");
    let dom = CongDomain::build(&cs, &frag);
    let seed = kernel_seed(&dom, &cs, &tgt, &relabel);
    let mut checks = Vec::new();
    if let Some(mut p) = run_pipeline(&cs, &seed, &frag, &mut checks) {
        let t1 = cs.context_object(&[1]).expect("valid context");
        p.mor.isolate(&cs.ident(t1));
        let r =
            SuiteReport::new("congruence", vec![check_congruence_def(&cs, &frag, &p.dom, &p.pair, &p.mor)]);
        out.push(MutationOutcome::new("split_class", r));
    }

    let mut checks = Vec::new();
    if let Some(p) = run_pipeline(&cs, &RelationSeed::default(), &frag, &mut checks) {
        let Pipeline { quotient, dom, pair, .. } = p;
        let q = quotient.with_mutation(QuotientMutation::ShiftSf);
        let qfrag = Fragment::build(&q, frag.config, exec);
        let r = SuiteReport::new(
            "quotient",
            vec![
                check_s_axioms(&q, &qfrag).renamed("quotient.s_axioms"),
                check_tilde_ob_quotient(&q, &qfrag, &dom, &pair),
            ],
        );
        out.push(MutationOutcome::new("corrupted_quotient_sf", r));
    }
    out
}

/// Every fixture suite, both congruence pipelines on the two-type context
/// instance, and every mutation fixture.
pub fn suite_all(exec: Exec) -> AllReport {
    let mut suites = Vec::new();
    for fx in shipped_fixtures() {
        let inst = Instance::build(&fx.instance).expect("shipped fixtures are valid");
        let frag = Fragment::build(inst.cs(), fx.fragment_config(), exec);
        for report in fixture_suites(inst.cs(), &frag) {
            suites.push(NamedSuite { fixture: fx.name.into(), report });
        }
    }
    let (cs, frag) = context_2_2_frag(exec);
    let discrete = suite_congruence(&cs, &RelationSeed::default(), &frag).report;
    suites.push(NamedSuite { fixture: "context_2_2/discrete".into(), report: discrete });
    let tgt = FamilyCS::context(&[2]).expect("valid sizes");
    let relabel = ContextRelabel::new(&cs, &tgt, vec![0, 0]).expect("sizes agree");
    let kernel = suite_kernel_collapse(&cs, &tgt, &relabel, &frag);
    suites.push(NamedSuite { fixture: "context_2_2/base_collapse".into(), report: kernel });

    let mutations = mutation_suites(exec);
    let mutations_caught = mutations.iter().filter(|m| m.caught).count();
    let mut all = AllReport { suites: Vec::new(), mutations, totals: Totals::default(), mutations_caught };
    for s in suites {
        all.push(s);
    }
    all
}
