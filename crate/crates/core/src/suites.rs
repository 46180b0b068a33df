//! Verification suites shared by the acceptance test and `modalred selftest`.
//!
//! Each suite instantiates one property of the reductions at a fixed,
//! small scale and reports pass/fail together with its running time.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decide::{sat_bruteforce, sat_decide, Budget, SatResult};
use crate::formula::{parse, substitute, Formula, Substitution};
use crate::kripke::mask::{self, MaskFormula};
use crate::kripke::FrameClass;
use crate::onevar::{self, build_chain, Attachment, ChainModel, EmbeddingContext};
use crate::qbf::{self, Qbf, Quantifier};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub title: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
    pub time_limit: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.elapsed <= self.time_limit
    }

    /// One line: `PASS name: title (N checks)` plus the first failure.
    /// Timing is left out so the line is reproducible; see [`Self::timing`].
    pub fn summary(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {}: {} ({} checks)", self.name, self.title, self.checks);
        if let Some(first) = self.failures.first() {
            line.push_str(&format!("; {} failure(s), first: {first}", self.failures.len()));
        } else if self.elapsed > self.time_limit {
            line.push_str("; over the time limit");
        }
        line
    }

    pub fn timing(&self) -> String {
        format!("{:.2}s of {}s", self.elapsed.as_secs_f64(), self.time_limit.as_secs())
    }
}

/// Collects failures, keeping only the first few messages.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
    failure_count: usize,
}

impl Tally {
    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < 10 {
                self.failures.push(message());
            }
        }
    }

    fn finish(mut self, spec: &SuiteSpec, start: Instant) -> SuiteReport {
        if self.failure_count > self.failures.len() {
            let hidden = self.failure_count - self.failures.len();
            self.failures.push(format!("... and {hidden} more"));
        }
        SuiteReport {
            name: spec.name,
            title: spec.title,
            checks: self.checks,
            failures: self.failures,
            elapsed: start.elapsed(),
            time_limit: spec.time_limit,
        }
    }
}

pub struct SuiteSpec {
    pub name: &'static str,
    pub title: &'static str,
    pub time_limit: Duration,
    run: fn(&SuiteConfig, &mut Tally),
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub const SUITES: &[SuiteSpec] = &[
    SuiteSpec {
        name: "lemma3",
        title: "epsilon_i holds exactly at c_i on the chain segment from the root, k <= 5",
        time_limit: secs(10),
        run: |_, t| lemma3_checks(&build_chain, 5, t),
    },
    SuiteSpec {
        name: "chain",
        title: "M_k has k^2+3k+3 worlds, the documented p pattern and a KTB frame, k <= 10",
        time_limit: secs(1),
        run: |_, t| chain_checks(t),
    },
    SuiteSpec {
        name: "hat",
        title: "hat(phi) with the fresh variable set to true agrees with phi on all K-models up to 3 worlds",
        time_limit: secs(60),
        run: hat_checks,
    },
    SuiteSpec {
        name: "lemma4",
        title: "star_witness turns every small K/KB/KTB witness of phi into a model of star(phi)",
        time_limit: secs(120),
        run: lemma4_checks,
    },
    SuiteSpec {
        name: "sublemma2",
        title: "<>alpha_k holds at an original world iff it sees the root of M_k",
        time_limit: secs(120),
        run: sublemma2_checks,
    },
    SuiteSpec {
        name: "substitution",
        title: "star(phi) equals substitute(hat(phi), p_i -> beta_i) and uses only p1",
        time_limit: secs(60),
        run: substitution_checks,
    },
    SuiteSpec {
        name: "theorem1",
        title: "true QBFs get a KTB tree model of f(theta); false ones make f(theta) K-unsatisfiable",
        time_limit: secs(600),
        run: |_, t| theorem1_checks(t),
    },
    SuiteSpec {
        name: "theorem3",
        title: "for true QBFs with one quantifier, (~t(theta))* has a constructed KTB model; embed(t(theta)) uses only p1",
        time_limit: secs(120),
        run: |_, t| theorem3_checks(t),
    },
    SuiteSpec {
        name: "oracle",
        title: "sat_decide never contradicts exhaustive search over formulas of size <= 6 in p1, p2, all classes",
        time_limit: secs(600),
        run: |_, t| oracle_checks(t),
    },
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.name)
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Option<SuiteReport> {
    let spec = SUITES.iter().find(|s| s.name == name)?;
    Some(run_spec(spec, config))
}

pub fn run_all(config: &SuiteConfig) -> Vec<SuiteReport> {
    SUITES.iter().map(|s| run_spec(s, config)).collect()
}

fn run_spec(spec: &SuiteSpec, config: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    let mut tally = Tally::default();
    (spec.run)(config, &mut tally);
    tally.finish(spec, start)
}

/// Runs the chain-segment check against an arbitrary chain builder and
/// returns the failures.
pub fn lemma3_with(build: &dyn Fn(usize) -> ChainModel, max_k: usize) -> Vec<String> {
    let mut tally = Tally::default();
    lemma3_checks(build, max_k, &mut tally);
    tally.failures
}

fn lemma3_checks(build: &dyn Fn(usize) -> ChainModel, max_k: usize, t: &mut Tally) {
    for k in 1..=max_k {
        let chain = build(k);
        for i in 1..=k {
            let ext = chain.model().extension(&onevar::epsilon(i));
            for x in chain.segment_to(i) {
                let expected = x == chain.c_world(i);
                t.check(ext.contains(x) == expected, || {
                    format!("M_{k}, world {x}: epsilon_{i} is {}, expected {expected}", ext.contains(x))
                });
            }
        }
    }
}

fn chain_checks(t: &mut Tally) {
    for k in 1..=10 {
        let chain = build_chain(k);
        let m = chain.model();
        // Walk the description: root, then per block 2i+1 ~p worlds with a
        // p-world between blocks, then three p-worlds.
        let mut pattern = vec![true];
        for i in 1..=k {
            if i > 1 {
                pattern.push(true);
            }
            pattern.extend(std::iter::repeat_n(false, 2 * i + 1));
        }
        pattern.extend([true; 3]);
        t.check(m.world_count() == pattern.len(), || {
            format!("M_{k}: {} worlds, expected {}", m.world_count(), pattern.len())
        });
        t.check(m.world_count() == k * k + 3 * k + 3, || format!("M_{k}: world count formula"));
        let p_worlds: BTreeSet<usize> = (0..pattern.len()).filter(|&w| pattern[w]).collect();
        t.check(m.truth_set(1) == p_worlds, || format!("M_{k}: p pattern differs"));
        t.check(m.frame().is_reflexive() && m.frame().is_symmetric(), || {
            format!("M_{k}: frame is not reflexive and symmetric")
        });
        let chain_edges = (0..m.world_count())
            .flat_map(|a| (0..m.world_count()).map(move |b| (a, b)))
            .all(|(a, b)| m.frame().has_edge(a, b) == (a.abs_diff(b) <= 1));
        t.check(chain_edges, || format!("M_{k}: relation is not the closed chain"));
        for i in 1..=k {
            let mut start = 1;
            for j in 1..i {
                start += 2 * j + 2;
            }
            let middle = start + i;
            t.check(chain.c_world(i) == middle, || format!("M_{k}: c_{i} = {}, expected {middle}", chain.c_world(i)));
        }
    }
}

fn random_formula(rng: &mut ChaCha8Rng, size: usize, vars: u32) -> Formula {
    if size == 1 {
        return match rng.gen_range(0..vars + 2) {
            0 => Formula::Falsum,
            1 => Formula::Top,
            v => Formula::Var(v - 1),
        };
    }
    let unary_only = size == 2;
    if unary_only || rng.gen_bool(0.4) {
        let inner = random_formula(rng, size - 1, vars);
        return match rng.gen_range(0..3) {
            0 => Formula::not(inner),
            1 => Formula::boxed(inner),
            _ => Formula::diamond(inner),
        };
    }
    let left = rng.gen_range(1..size - 1);
    let a = random_formula(rng, left, vars);
    let b = random_formula(rng, size - 1 - left, vars);
    match rng.gen_range(0..3) {
        0 => Formula::And(vec![a, b]),
        1 => Formula::Or(vec![a, b]),
        _ => Formula::implies(a, b),
    }
}

/// 250 distinct seeded formulas of size 1..=8 whose variables are among
/// `p1`, `p2`.
pub fn formula_corpus(seed: u64) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < 250 {
        let size = rng.gen_range(1..=8);
        let vars = rng.gen_range(1..=2);
        let f = random_formula(&mut rng, size, vars);
        if seen.insert(f.clone()) {
            out.push(f);
        }
    }
    out
}

fn hat_checks(config: &SuiteConfig, t: &mut Tally) {
    for phi in formula_corpus(config.seed) {
        let ctx = EmbeddingContext::for_formula(&phi);
        let hat = onevar::hat(&phi, &ctx).expect("context covers the formula");
        let unguarded = substitute(&hat, &Substitution::identity().with(ctx.fresh(), Formula::Top));
        let a = MaskFormula::compile(&phi);
        let b = MaskFormula::compile(&unguarded);
        assert_eq!(a.vars(), b.vars());
        let (mut sa, mut sb) = (Vec::new(), Vec::new());
        for n in 1..=3 {
            let mut mismatch = None;
            mask::for_each_model(n, FrameClass::K, a.vars().len(), |rel, truth| {
                let succ = mask::successor_masks(n, rel);
                if a.eval(&succ, truth, &mut sa) != b.eval(&succ, truth, &mut sb) {
                    mismatch = Some(rel);
                    return false;
                }
                true
            });
            t.check(mismatch.is_none(), || format!("{phi}: disagreement on a {n}-world model"));
        }
    }
}

const EMBEDDING_CLASSES: [FrameClass; 3] = [FrameClass::K, FrameClass::KB, FrameClass::KTB];

/// The attached models built from the corpus: one per formula and class
/// that has a witness with at most 3 worlds.
fn corpus_attachments(seed: u64, t: &mut Tally) -> Vec<(Formula, FrameClass, Attachment, usize)> {
    let mut out = Vec::new();
    for phi in formula_corpus(seed) {
        for class in EMBEDDING_CLASSES {
            let SatResult::Sat { model, world } = sat_bruteforce(&phi, class, 3) else {
                continue;
            };
            match onevar::star_witness(&model, world, &phi, class) {
                Ok((attached, w0)) => out.push((phi.clone(), class, attached, w0)),
                Err(e) => t.check(false, || format!("{phi} on {class}: star_witness failed: {e}")),
            }
        }
    }
    out
}

fn lemma4_checks(config: &SuiteConfig, t: &mut Tally) {
    for (phi, class, attached, w0) in corpus_attachments(config.seed, t) {
        let ctx = EmbeddingContext::for_formula(&phi);
        let star = onevar::star(&phi, &ctx).expect("context covers the formula");
        let m = &attached.model;
        t.check(m.frame().is_in_class(class), || format!("{phi}: attached frame is not {class}"));
        t.check(m.model_check(w0, &star).unwrap_or(false), || {
            format!("{phi} on {class}: star(phi) fails at world {w0} of the attached model")
        });
    }
}

fn sublemma2_checks(config: &SuiteConfig, t: &mut Tally) {
    for (phi, class, attached, _) in corpus_attachments(config.seed, t) {
        let m = &attached.model;
        for k in 1..=attached.roots.len() {
            let alpha = onevar::alpha(k).expect("k >= 1");
            let sees_alpha = m.extension(&Formula::diamond(alpha));
            let root = attached.roots[k - 1];
            for x in 0..attached.original_worlds {
                let edge = m.frame().has_edge(x, root);
                t.check(sees_alpha.contains(x) == edge, || {
                    format!("{phi} on {class}: world {x}, k = {k}: <>alpha_k is {}, edge {edge}", !edge)
                });
            }
            // Inside the attached chain, epsilon_i still singles out c_i.
            let chain = build_chain(k);
            for i in 1..=k {
                let eps = m.extension(&onevar::epsilon(i));
                for x in chain.segment_to(i) {
                    let w = attached.chain_world(k, x);
                    t.check(eps.contains(w) == (x == chain.c_world(i)), || {
                        format!("{phi} on {class}: epsilon_{i} at world {x} of attached M_{k}")
                    });
                }
            }
        }
    }
}

fn substitution_checks(config: &SuiteConfig, t: &mut Tally) {
    for phi in formula_corpus(config.seed) {
        let ctx = EmbeddingContext::for_formula(&phi);
        let star = onevar::star(&phi, &ctx).expect("context covers the formula");
        let hat = onevar::hat(&phi, &ctx).expect("context covers the formula");
        let sigma: Substitution = (1..=ctx.fresh())
            .map(|i| (i, onevar::beta(i as usize).expect("i >= 1")))
            .collect();
        t.check(star == substitute(&hat, &sigma), || format!("{phi}: star differs from sigma(hat)"));
        t.check(star.vars().is_subset(&[1].into()), || format!("{phi}: star uses other variables"));
        t.check(onevar::embed(&phi).vars().is_subset(&[1].into()), || {
            format!("{phi}: embed uses other variables")
        });
    }
}

/// Prenex QBFs with one or two quantifiers over fixed matrix templates.
pub fn qbf_corpus() -> Vec<Qbf> {
    use Quantifier::{Exists as E, Forall as A};
    let one = ["p1", "~p1", "true", "false", "p1 | ~p1", "p1 & ~p1"];
    let two = [
        "p1", "p2", "~p1", "~p2", "p1 & p2", "p1 | p2", "p1 -> p2", "p2 -> p1", "(p1 -> p2) & (p2 -> p1)",
        "~((p1 -> p2) & (p2 -> p1))", "p1 & ~p2", "~p1 | p2 & ~p2",
    ];
    let mut out = Vec::new();
    for q in [E, A] {
        for m in one {
            out.push(Qbf::new(vec![q], parse(m).unwrap()).unwrap());
        }
    }
    for q1 in [E, A] {
        for q2 in [E, A] {
            for m in two {
                out.push(Qbf::new(vec![q1, q2], parse(m).unwrap()).unwrap());
            }
        }
    }
    out
}

fn theorem1_checks(t: &mut Tally) {
    let budget = Budget {
        timeout: Duration::from_secs(60),
        ..Budget::default()
    };
    for theta in qbf_corpus() {
        let f = qbf::ladner_translate(&theta);
        if qbf::eval_qbf(&theta) {
            match qbf::witness_model(&theta) {
                Ok((model, root)) => {
                    t.check(model.frame().is_in_class(FrameClass::KTB), || {
                        format!("{theta}: witness frame is not KTB")
                    });
                    t.check(model.model_check(root, &f).unwrap_or(false), || {
                        format!("{theta}: f(theta) fails at the root of the witness")
                    });
                }
                Err(e) => t.check(false, || format!("{theta}: {e}")),
            }
        } else {
            let r = sat_decide(&f, FrameClass::K, budget);
            t.check(matches!(r, Ok(SatResult::Unsat(_))), || {
                format!("{theta}: expected K-unsatisfiable, got {r:?}")
            });
        }
    }
}

fn theorem3_checks(t: &mut Tally) {
    for theta in qbf_corpus().into_iter().filter(|q| q.m() == 1) {
        let tt = qbf::negated_translate(&theta);
        t.check(onevar::embed(&tt).vars() == [1].into(), || format!("{theta}: embed(t) is not single-variable"));
        if !qbf::eval_qbf(&theta) {
            continue;
        }
        let neg = Formula::not(tt);
        let ctx = EmbeddingContext::for_formula(&neg);
        let star = onevar::star(&neg, &ctx).expect("context covers the formula");
        let (model, root) = qbf::witness_model(&theta).expect("theta is true");
        match onevar::star_witness(&model, root, &neg, FrameClass::KTB) {
            Ok((attached, w0)) => {
                t.check(attached.model.frame().is_in_class(FrameClass::KTB), || {
                    format!("{theta}: attached frame is not KTB")
                });
                t.check(attached.model.model_check(w0, &star).unwrap_or(false), || {
                    format!("{theta}: (~t(theta))* fails on the constructed model")
                });
            }
            Err(e) => t.check(false, || format!("{theta}: star_witness failed: {e}")),
        }
    }
}

/// Every formula of exactly `size` nodes built from `atoms` with `~`,
/// `[]`, `<>` and binary `&`, `|`, `->`.
pub fn formulas_of_size(size: usize, atoms: &[Formula]) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(), atoms.to_vec()];
    for s in 2..=size {
        let mut next = Vec::new();
        for a in &by_size[s - 1] {
            next.push(Formula::not(a.clone()));
            next.push(Formula::boxed(a.clone()));
            next.push(Formula::diamond(a.clone()));
        }
        for left in 1..s - 1 {
            for a in &by_size[left] {
                for b in &by_size[s - 1 - left] {
                    next.push(Formula::And(vec![a.clone(), b.clone()]));
                    next.push(Formula::Or(vec![a.clone(), b.clone()]));
                    next.push(Formula::implies(a.clone(), b.clone()));
                }
            }
        }
        by_size.push(next);
    }
    if size == 0 {
        return Vec::new();
    }
    by_size.swap_remove(size)
}

/// Largest witness size the oracle enumerates.
pub const ORACLE_WORLDS: usize = 3;

fn oracle_checks(t: &mut Tally) {
    let atoms = [Formula::Var(1), Formula::Var(2), Formula::Falsum, Formula::Top];
    let budget = Budget::default();
    for size in 1..=6 {
        for f in formulas_of_size(size, &atoms) {
            // Renaming p1 and p2 preserves satisfiability, so one of each
            // mirrored pair suffices.
            let swapped = substitute(
                &f,
                &Substitution::identity().with(1, Formula::Var(2)).with(2, Formula::Var(1)),
            );
            if swapped < f {
                continue;
            }
            for class in FrameClass::ALL {
                let decided = sat_decide(&f, class, budget);
                let brute = sat_bruteforce(&f, class, ORACLE_WORLDS);
                let ok = match (&decided, &brute) {
                    (Ok(SatResult::Sat { .. }), SatResult::Unsat(_)) => false,
                    (Ok(SatResult::Unsat(_)), SatResult::Sat { .. }) => false,
                    (Ok(SatResult::Sat { model, .. }), SatResult::Inconclusive { .. }) => {
                        model.world_count() > ORACLE_WORLDS
                    }
                    (Ok(_), _) => true,
                    (Err(_), _) => false,
                };
                t.check(ok && matches!(decided, Ok(ref r) if r.is_conclusive()), || {
                    format!("{f} on {class}: decide {decided:?} vs enumeration {brute:?}")
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_in_range() {
        let a = formula_corpus(0);
        assert_eq!(a, formula_corpus(0));
        assert_ne!(a, formula_corpus(1));
        assert_eq!(a.len(), 250);
        for f in &a {
            assert!(f.size() <= 8);
            assert!(f.max_var() <= 2);
        }
    }

    #[test]
    fn enumeration_counts() {
        let atoms = [Formula::Var(1), Formula::Falsum];
        // n(1) = 2, n(2) = 3 n(1), n(3) = 3 n(2) + 3 n(1)^2
        assert_eq!(formulas_of_size(1, &atoms).len(), 2);
        assert_eq!(formulas_of_size(2, &atoms).len(), 6);
        assert_eq!(formulas_of_size(3, &atoms).len(), 30);
        let set: BTreeSet<_> = formulas_of_size(4, &atoms).into_iter().collect();
        assert_eq!(set.len(), 3 * 30 + 3 * (2 * 2 * 6));
        assert!(set.iter().all(|f| f.size() == 4));
    }

    #[test]
    fn qbf_corpus_covers_the_named_cases() {
        let corpus = qbf_corpus();
        assert!(corpus.len() >= 50);
        let texts: Vec<String> = corpus.iter().map(|q| q.to_string()).collect();
        for wanted in ["E p1 . p1", "A p1 . p1", "A p1 E p2 . (p1 -> p2) & (p2 -> p1)", "E p1 A p2 . (p1 -> p2) & (p2 -> p1)"] {
            assert!(texts.iter().any(|t| t == wanted), "{wanted} missing from {texts:?}");
        }
    }

    #[test]
    fn mutated_chain_fails_lemma3() {
        assert!(lemma3_with(&build_chain, 5).is_empty());
        let broken = |k: usize| {
            let mut m = build_chain(k).into_model();
            let mut p = m.truth_set(1);
            p.insert(1);
            m.set_var(1, p).unwrap();
            ChainModel::from_model(m, k)
        };
        assert!(!lemma3_with(&broken, 5).is_empty());
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["lemma3", "chain", "substitution"] {
            let r = run_suite(name, &SuiteConfig::default()).unwrap();
            assert!(r.passed(), "{}", r.summary());
        }
        assert!(run_suite("nope", &SuiteConfig::default()).is_none());
    }
}
