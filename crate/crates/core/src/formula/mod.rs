//! Modal formulas: the term language, the standard abbreviations, traversal
//! helpers, and uniform substitution.
//!
//! The core language is `p_i`, `false`, `->` and `[]`. `~`, `&`, `|`, `<>`
//! and `true` are kept as their own node kinds so that generated formulas
//! print the way a human would write them; every semantic operation
//! interprets them by the usual classical abbreviations.

pub(crate) mod parse;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse, ParseError};
pub use subst::{substitute, Substitution};

/// A propositional modal formula.
///
/// Variable indices are 1-based. `And(vec![])` means `true` and
/// `Or(vec![])` means `false`; the constructors [`Formula::and`] and
/// [`Formula::or`] never build the empty or singleton forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(u32),
    Falsum,
    Top,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
}

impl Formula {
    /// The variable `p_index`.
    ///
    /// Panics if `index` is 0.
    pub fn var(index: u32) -> Formula {
        assert!(index >= 1, "variable indices start at 1");
        Formula::Var(index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    /// Conjunction of `parts`: `true` when empty, the sole element when
    /// there is exactly one.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::Top,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction of `parts`: `false` when empty, the sole element when
    /// there is exactly one.
    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::Falsum,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Binary conjunction, always an `And` node.
    pub fn and2(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(vec![lhs, rhs])
    }

    /// Binary disjunction, always an `Or` node.
    pub fn or2(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(vec![lhs, rhs])
    }

    /// `(a -> b) & (b -> a)`; there is no dedicated biconditional node.
    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::and2(
            Formula::implies(lhs.clone(), rhs.clone()),
            Formula::implies(rhs, lhs),
        )
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Falsum | Formula::Top => Vec::new(),
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => vec![a],
            Formula::Implies(a, b) => vec![a, b],
            Formula::And(xs) | Formula::Or(xs) => xs.iter().collect(),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Maximum nesting of `[]` and `<>`.
    pub fn modal_depth(&self) -> usize {
        let below = self
            .children()
            .into_iter()
            .map(Formula::modal_depth)
            .max()
            .unwrap_or(0);
        match self {
            Formula::Box(_) | Formula::Diamond(_) => below + 1,
            _ => below,
        }
    }

    /// Indices of the variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        if let Formula::Var(i) = self {
            out.insert(*i);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Largest variable index, or 0 for a variable-free formula.
    pub fn max_var(&self) -> u32 {
        self.vars().into_iter().next_back().unwrap_or(0)
    }

    /// The set of distinct subformulas, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<&Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if out.insert(f) {
                stack.extend(f.children());
            }
        }
        out
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::Box(_) | Formula::Diamond(_))
    }

    /// Rewrites every sugar node into `Var`, `Falsum`, `Implies` and `Box`.
    pub fn to_core(&self) -> Formula {
        let falsum = || Formula::Falsum;
        let neg = |f: Formula| Formula::implies(f, Formula::Falsum);
        match self {
            Formula::Var(i) => Formula::Var(*i),
            Formula::Falsum => Formula::Falsum,
            Formula::Top => neg(falsum()),
            Formula::Not(a) => neg(a.to_core()),
            Formula::Implies(a, b) => Formula::implies(a.to_core(), b.to_core()),
            Formula::Box(a) => Formula::boxed(a.to_core()),
            Formula::Diamond(a) => neg(Formula::boxed(neg(a.to_core()))),
            Formula::And(xs) => match xs.split_first() {
                None => neg(falsum()),
                Some((x, [])) => x.to_core(),
                Some((x, rest)) => {
                    let tail = Formula::And(rest.to_vec()).to_core();
                    neg(Formula::implies(x.to_core(), neg(tail)))
                }
            },
            Formula::Or(xs) => match xs.split_first() {
                None => falsum(),
                Some((x, [])) => x.to_core(),
                Some((x, rest)) => {
                    let tail = Formula::Or(rest.to_vec()).to_core();
                    Formula::implies(neg(x.to_core()), tail)
                }
            },
        }
    }

    /// Conjuncts of nested `And` nodes, flattened left to right.
    pub fn flatten_and(&self) -> Vec<&Formula> {
        match self {
            Formula::And(xs) => xs.iter().flat_map(Formula::flatten_and).collect(),
            other => vec![other],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_formula(f, self, 0)
    }
}

/// `[]^n f`.
pub fn box_pow(n: usize, f: Formula) -> Formula {
    (0..n).fold(f, |acc, _| Formula::boxed(acc))
}

/// `<>^n f`, built from `Diamond` nodes.
pub fn diamond_pow(n: usize, f: Formula) -> Formula {
    (0..n).fold(f, |acc, _| Formula::diamond(acc))
}

/// `[]^{<=n} f = f & [] f & ... & []^n f`, associated to the left:
/// `[]^{<=n+1} f = []^{<=n} f & []^{n+1} f`.
pub fn box_upto(n: usize, f: Formula) -> Formula {
    (1..=n).fold(f.clone(), |acc, i| {
        Formula::and2(acc, box_pow(i, f.clone()))
    })
}

/// `[]^+ f = f & [] f`.
pub fn box_plus(f: Formula) -> Formula {
    Formula::and2(f.clone(), Formula::boxed(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> Formula {
        Formula::var(i)
    }

    #[test]
    fn box_upto_associates_left() {
        let expected = Formula::and2(
            Formula::and2(p(1), Formula::boxed(p(1))),
            box_pow(2, p(1)),
        );
        assert_eq!(box_upto(2, p(1)), expected);
        assert_eq!(box_upto(0, p(3)), p(3));
    }

    #[test]
    fn powers_and_plus() {
        assert_eq!(box_pow(0, p(1)), p(1));
        assert_eq!(diamond_pow(0, p(1)), p(1));
        assert_eq!(
            diamond_pow(2, p(1)),
            Formula::diamond(Formula::diamond(p(1)))
        );
        assert_eq!(box_plus(p(1)), Formula::and2(p(1), Formula::boxed(p(1))));
    }

    #[test]
    fn structural_measures() {
        let f = Formula::boxed(p(1));
        let subs: Vec<_> = f.subformulas().into_iter().cloned().collect();
        assert_eq!(subs.len(), 2);
        assert!(subs.contains(&f) && subs.contains(&p(1)));
        assert_eq!(diamond_pow(2, p(1)).modal_depth(), 2);
        assert_eq!(Formula::implies(p(1), p(2)).size(), 3);
        assert_eq!(
            Formula::and2(p(3), Formula::diamond(p(1))).vars(),
            [1, 3].into_iter().collect()
        );
        assert_eq!(Formula::Top.max_var(), 0);
    }

    #[test]
    fn subformulas_are_deduplicated() {
        let f = Formula::and2(p(1), p(1));
        assert_eq!(f.subformulas().len(), 2);
    }

    #[test]
    fn smart_constructors_normalize_arity() {
        assert_eq!(Formula::and(vec![]), Formula::Top);
        assert_eq!(Formula::or(vec![]), Formula::Falsum);
        assert_eq!(Formula::and(vec![p(2)]), p(2));
        assert_eq!(Formula::or(vec![p(2)]), p(2));
    }

    #[test]
    fn core_expansion_has_no_sugar() {
        let f = Formula::Or(vec![
            Formula::And(vec![p(1), Formula::Top, Formula::not(p(2))]),
            Formula::diamond(p(1)),
            Formula::And(vec![]),
        ]);
        fn core_only(f: &Formula) -> bool {
            matches!(
                f,
                Formula::Var(_) | Formula::Falsum | Formula::Implies(..) | Formula::Box(_)
            ) && f.children().into_iter().all(core_only)
        }
        assert!(core_only(&f.to_core()));
        assert_eq!(f.to_core().modal_depth(), 1);
    }

    #[test]
    #[should_panic]
    fn var_zero_panics() {
        let _ = Formula::var(0);
    }
}
