//! Bit-mask evaluation over models with at most 8 worlds.
//!
//! A relation on `n` worlds is a `u64` whose bit `a * n + b` is the edge
//! `(a, b)`; a truth set is a `u64` with bit `w` for world `w`. This is the
//! engine behind exhaustive enumeration, kept separate from [`super::Evaluator`]
//! so the two can cross-check each other.

use std::collections::BTreeSet;

use crate::formula::Formula;

use super::{Frame, FrameClass, Model, World};

pub const MAX_WORLDS: usize = 8;

/// Successor masks of a relation mask on `n` worlds.
pub fn successor_masks(n: usize, relation: u64) -> Vec<u64> {
    (0..n)
        .map(|a| (relation >> (a * n)) & ((1u64 << n) - 1))
        .collect()
}

pub fn relation_in_class(n: usize, relation: u64, class: FrameClass) -> bool {
    let succ = successor_masks(n, relation);
    let reflexive = || (0..n).all(|w| succ[w] >> w & 1 == 1);
    let symmetric = || (0..n).all(|a| (0..n).all(|b| succ[a] >> b & 1 == succ[b] >> a & 1));
    let serial = || succ.iter().all(|&s| s != 0);
    (!class.requires_reflexive() || reflexive())
        && (!class.requires_symmetric() || symmetric())
        && (!class.requires_serial() || serial())
}

/// All relation masks on `n` worlds in ascending numeric order, filtered
/// to `class`.
pub fn relations(n: usize, class: FrameClass) -> impl Iterator<Item = u64> {
    assert!((1..=MAX_WORLDS).contains(&n), "mask enumeration supports 1..=8 worlds");
    let bits = n * n;
    let end: u64 = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    (0..=end).filter(move |&r| relation_in_class(n, r, class))
}

pub fn frame_from_mask(n: usize, relation: u64) -> Frame {
    let edges = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| relation >> (a * n + b) & 1 == 1);
    Frame::new(n, edges).expect("mask worlds are in range")
}

/// Builds a model from a relation mask and one truth mask per variable.
pub fn model_from_masks(n: usize, relation: u64, vars: &[u32], truth: &[u64]) -> Model {
    let valuation = vars.iter().zip(truth).map(|(&v, &mask)| {
        let ws: BTreeSet<World> = (0..n).filter(|w| mask >> w & 1 == 1).collect();
        (v, ws)
    });
    Model::new(frame_from_mask(n, relation), valuation).expect("mask worlds are in range")
}

#[derive(Clone, Debug)]
enum Op {
    Var(usize),
    Const(bool),
    Not(usize),
    Implies(usize, usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Box(usize),
    Diamond(usize),
}

/// A formula flattened into a post-order program over truth masks.
#[derive(Clone, Debug)]
pub struct MaskFormula {
    ops: Vec<Op>,
    vars: Vec<u32>,
}

impl MaskFormula {
    pub fn compile(f: &Formula) -> MaskFormula {
        let vars: Vec<u32> = f.vars().into_iter().collect();
        let mut ops = Vec::with_capacity(f.size());
        Self::emit(f, &vars, &mut ops);
        MaskFormula { ops, vars }
    }

    fn emit(f: &Formula, vars: &[u32], ops: &mut Vec<Op>) -> usize {
        let op = match f {
            Formula::Var(i) => Op::Var(vars.binary_search(i).unwrap()),
            Formula::Falsum => Op::Const(false),
            Formula::Top => Op::Const(true),
            Formula::Not(a) => Op::Not(Self::emit(a, vars, ops)),
            Formula::Box(a) => Op::Box(Self::emit(a, vars, ops)),
            Formula::Diamond(a) => Op::Diamond(Self::emit(a, vars, ops)),
            Formula::Implies(a, b) => {
                let a = Self::emit(a, vars, ops);
                Op::Implies(a, Self::emit(b, vars, ops))
            }
            Formula::And(xs) => Op::And(xs.iter().map(|x| Self::emit(x, vars, ops)).collect()),
            Formula::Or(xs) => Op::Or(xs.iter().map(|x| Self::emit(x, vars, ops)).collect()),
        };
        ops.push(op);
        ops.len() - 1
    }

    /// Variables in slot order; `truth[k]` in [`Self::eval`] belongs to
    /// `vars()[k]`.
    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    /// Truth mask of the formula on the model `(succ, truth)`.
    pub fn eval(&self, succ: &[u64], truth: &[u64], scratch: &mut Vec<u64>) -> u64 {
        let n = succ.len();
        let full = (1u64 << n) - 1;
        let boxed = |inner: u64| -> u64 {
            (0..n)
                .filter(|&w| succ[w] & !inner == 0)
                .fold(0u64, |acc, w| acc | 1 << w)
        };
        scratch.clear();
        for op in &self.ops {
            let v = match op {
                Op::Var(k) => truth[*k],
                Op::Const(b) => {
                    if *b {
                        full
                    } else {
                        0
                    }
                }
                Op::Not(a) => !scratch[*a] & full,
                Op::Implies(a, b) => (!scratch[*a] | scratch[*b]) & full,
                Op::And(xs) => xs.iter().fold(full, |acc, &x| acc & scratch[x]),
                Op::Or(xs) => xs.iter().fold(0, |acc, &x| acc | scratch[x]),
                Op::Box(a) => boxed(scratch[*a]),
                Op::Diamond(a) => !boxed(!scratch[*a] & full) & full,
            };
            scratch.push(v);
        }
        *scratch.last().unwrap()
    }
}

/// Calls `visit(relation, truth)` for every model on `n` worlds whose frame
/// is in `class`, with truth masks for `vars` enumerated in ascending
/// order of the combined bit string. Stops early when `visit` returns
/// `false`.
pub fn for_each_model(
    n: usize,
    class: FrameClass,
    var_count: usize,
    mut visit: impl FnMut(u64, &[u64]) -> bool,
) -> bool {
    let val_bits = n * var_count;
    assert!(val_bits < 64, "too many valuation bits");
    let world_mask = (1u64 << n) - 1;
    let mut truth = vec![0u64; var_count];
    for relation in relations(n, class) {
        for code in 0..(1u64 << val_bits) {
            for (k, t) in truth.iter_mut().enumerate() {
                *t = (code >> (k * n)) & world_mask;
            }
            if !visit(relation, &truth) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn class_counts_on_two_worlds() {
        let count = |c| relations(2, c).count();
        assert_eq!(count(FrameClass::K), 16);
        assert_eq!(count(FrameClass::T), 4);
        assert_eq!(count(FrameClass::KB), 8);
        assert_eq!(count(FrameClass::KTB), 2);
        // serial: each world has a nonempty successor set, 3 * 3
        assert_eq!(count(FrameClass::KD), 9);
        // serial and symmetric: {01,10} plus loops, or both loops
        assert_eq!(count(FrameClass::KDB), 5);
    }

    #[test]
    fn agrees_with_set_evaluator() {
        let formulas = ["[]p1 -> <>p2", "<>[]~p1 & p2", "p1 | ~<>(p2 -> []false)", "true & []true"];
        for text in formulas {
            let f = parse(text).unwrap();
            let mf = MaskFormula::compile(&f);
            let mut scratch = Vec::new();
            for n in 1..=2 {
                for_each_model(n, FrameClass::K, mf.vars().len(), |rel, truth| {
                    let succ = successor_masks(n, rel);
                    let mask = mf.eval(&succ, truth, &mut scratch);
                    let model = model_from_masks(n, rel, mf.vars(), truth);
                    let ext = model.extension(&f);
                    for w in 0..n {
                        assert_eq!(mask >> w & 1 == 1, ext.contains(w), "{text}");
                    }
                    true
                });
            }
        }
    }
}
