//! Prenex quantified Boolean formulas and their reduction to modal
//! satisfiability.
//!
//! A QBF `Q1 p1 ... Qm pm . phi` maps to a modal formula `f(theta)` that is
//! KTB-satisfiable when `theta` is true and not even K-satisfiable when it
//! is false. The level markers `q_0..q_m` are realized as the fresh
//! variables `p_{m+1}..p_{2m+1}`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::formula::parse::{Parser, Tok};
use crate::formula::{box_pow, box_upto, Formula, ParseError};
use crate::kripke::{Frame, Model, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("a QBF needs at least one quantifier")]
    NoQuantifiers,
    #[error("quantifier {position} binds p{found}; variables must be bound as p1, p2, ... in order")]
    NonContiguous { position: usize, found: u32 },
    #[error("the matrix must not contain modal operators")]
    ModalMatrix,
    #[error("matrix variable p{0} is not bound by the prefix")]
    UnboundVariable(u32),
    #[error("the QBF is false, so it has no witnessing quantifier tree")]
    False,
}

/// A prenex QBF whose prefix binds `p_1..p_m` in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Qbf {
    prefix: Vec<Quantifier>,
    matrix: Formula,
}

impl Qbf {
    pub fn new(prefix: Vec<Quantifier>, matrix: Formula) -> Result<Qbf, QbfError> {
        if prefix.is_empty() {
            return Err(QbfError::NoQuantifiers);
        }
        if matrix.modal_depth() > 0 {
            return Err(QbfError::ModalMatrix);
        }
        if let Some(&v) = matrix.vars().iter().find(|&&v| v as usize > prefix.len()) {
            return Err(QbfError::UnboundVariable(v));
        }
        Ok(Qbf { prefix, matrix })
    }

    /// Number of quantified variables.
    pub fn m(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[Quantifier] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    /// Quantifier binding `p_i` (1-based).
    pub fn quantifier(&self, i: usize) -> Quantifier {
        self.prefix[i - 1]
    }

    /// The variable realizing the level marker `q_i`.
    pub fn level_var(&self, i: usize) -> u32 {
        (self.m() + 1 + i) as u32
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, q) in self.prefix.iter().enumerate() {
            let sym = match q {
                Quantifier::Exists => "E",
                Quantifier::Forall => "A",
            };
            write!(f, "{sym} p{} ", k + 1)?;
        }
        write!(f, ". {}", self.matrix)
    }
}

/// Parses `E p1 A p2 . <matrix>`.
pub fn parse_qbf(text: &str) -> Result<Qbf, QbfError> {
    let mut p = Parser::new(text)?;
    let mut prefix = Vec::new();
    loop {
        let q = match p.peek() {
            Some(Tok::Exists) => Quantifier::Exists,
            Some(Tok::Forall) => Quantifier::Forall,
            _ => break,
        };
        p.bump();
        let pos = p.pos();
        match p.bump() {
            Some(Tok::Var(v)) if v as usize == prefix.len() + 1 => prefix.push(q),
            Some(Tok::Var(v)) => {
                return Err(QbfError::NonContiguous {
                    position: prefix.len() + 1,
                    found: v,
                })
            }
            _ => return Err(ParseError::new(pos, "expected a variable after the quantifier").into()),
        }
    }
    if prefix.is_empty() {
        return Err(QbfError::NoQuantifiers);
    }
    p.expect(Tok::Dot)?;
    let matrix = p.formula()?;
    p.finish()?;
    Qbf::new(prefix, matrix)
}

/// Classical truth of a modal-free formula; `None` if a modal operator
/// occurs.
pub fn eval_propositional(f: &Formula, assign: &dyn Fn(u32) -> bool) -> Option<bool> {
    Some(match f {
        Formula::Var(i) => assign(*i),
        Formula::Falsum => false,
        Formula::Top => true,
        Formula::Not(a) => !eval_propositional(a, assign)?,
        Formula::Implies(a, b) => !eval_propositional(a, assign)? || eval_propositional(b, assign)?,
        Formula::And(xs) => {
            let mut all = true;
            for x in xs {
                all &= eval_propositional(x, assign)?;
            }
            all
        }
        Formula::Or(xs) => {
            let mut any = false;
            for x in xs {
                any |= eval_propositional(x, assign)?;
            }
            any
        }
        Formula::Box(_) | Formula::Diamond(_) => return None,
    })
}

fn matrix_holds(theta: &Qbf, assignment: &[bool]) -> bool {
    let assign = |v: u32| assignment[v as usize - 1];
    eval_propositional(&theta.matrix, &assign).expect("matrix is modal-free")
}

/// Truth of the remaining quantifiers given values for `p_1..p_k`.
fn eval_from(theta: &Qbf, assignment: &mut Vec<bool>) -> bool {
    let k = assignment.len();
    if k == theta.m() {
        return matrix_holds(theta, assignment);
    }
    let branch = |value: bool, assignment: &mut Vec<bool>| {
        assignment.push(value);
        let r = eval_from(theta, assignment);
        assignment.pop();
        r
    };
    match theta.prefix[k] {
        Quantifier::Exists => branch(false, assignment) || branch(true, assignment),
        Quantifier::Forall => branch(false, assignment) && branch(true, assignment),
    }
}

pub fn eval_qbf(theta: &Qbf) -> bool {
    eval_from(theta, &mut Vec::with_capacity(theta.m()))
}

/// `f(theta)`: the conjunction of the six reduction schemas.
pub fn ladner_translate(theta: &Qbf) -> Formula {
    let m = theta.m();
    let q = |i: usize| Formula::Var(theta.level_var(i));
    let p = |i: usize| Formula::Var(i as u32);
    let guarded = |depth: usize, parts: Vec<Formula>| {
        if parts.is_empty() {
            Formula::Top
        } else {
            box_upto(depth, Formula::and(parts))
        }
    };

    let root = q(0);

    let exclusive = (0..=m)
        .map(|i| {
            let others = (0..=m).filter(|&j| j != i).map(|j| Formula::not(q(j))).collect();
            Formula::implies(q(i), Formula::and(others))
        })
        .collect();
    let exclusive = guarded(m, exclusive);

    let existential = (1..=m)
        .filter(|&i| theta.quantifier(i) == Quantifier::Exists)
        .map(|i| Formula::implies(q(i - 1), Formula::diamond(q(i))))
        .collect();
    let existential = guarded(m - 1, existential);

    let universal = (1..=m)
        .filter(|&i| theta.quantifier(i) == Quantifier::Forall)
        .map(|i| {
            let pos = Formula::diamond(Formula::and2(q(i), p(i)));
            let neg = Formula::diamond(Formula::and2(q(i), Formula::not(p(i))));
            Formula::implies(q(i - 1), Formula::and2(pos, neg))
        })
        .collect();
    let universal = guarded(m - 1, universal);

    let inherit = (1..m)
        .map(|i| {
            let keep_true = (1..=i)
                .map(|j| Formula::implies(p(j), Formula::boxed(Formula::implies(q(i + 1), p(j)))))
                .collect();
            let keep_false = (1..=i)
                .map(|j| {
                    let not_p = Formula::not(p(j));
                    Formula::implies(
                        not_p.clone(),
                        Formula::boxed(Formula::implies(q(i + 1), not_p)),
                    )
                })
                .collect();
            Formula::implies(q(i), Formula::and2(Formula::and(keep_true), Formula::and(keep_false)))
        })
        .collect();
    let inherit = guarded(m - 1, inherit);

    let leaves = box_pow(m, Formula::implies(q(m), theta.matrix.clone()));

    Formula::And(vec![root, exclusive, existential, universal, inherit, leaves])
}

/// `t(theta) = ~f(theta)`.
pub fn negated_translate(theta: &Qbf) -> Formula {
    Formula::not(ladner_translate(theta))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub level: usize,
    /// Values of `p_1..p_level` on the branch through this node.
    pub assignment: Vec<bool>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A quantifier tree numbered breadth-first; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantifierTree {
    pub nodes: Vec<TreeNode>,
}

impl QuantifierTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }
}

/// Witnessing tree of a true `theta`. An existential level where both
/// values work takes `false`; universal levels list `false` before `true`.
pub fn quantifier_tree(theta: &Qbf) -> Result<QuantifierTree, QbfError> {
    if !eval_qbf(theta) {
        return Err(QbfError::False);
    }
    let mut nodes = vec![TreeNode {
        level: 0,
        assignment: Vec::new(),
        parent: None,
        children: Vec::new(),
    }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let level = nodes[id].level;
        if level == theta.m() {
            continue;
        }
        let values = match theta.prefix[level] {
            Quantifier::Forall => vec![false, true],
            Quantifier::Exists => {
                let mut trial = nodes[id].assignment.clone();
                trial.push(false);
                if eval_from(theta, &mut trial) {
                    vec![false]
                } else {
                    vec![true]
                }
            }
        };
        for value in values {
            let mut assignment = nodes[id].assignment.clone();
            assignment.push(value);
            let child = nodes.len();
            nodes.push(TreeNode {
                level: level + 1,
                assignment,
                parent: Some(id),
                children: Vec::new(),
            });
            nodes[id].children.push(child);
            queue.push_back(child);
        }
    }
    Ok(QuantifierTree { nodes })
}

/// KTB model over the quantifier tree satisfying `f(theta)` at the root.
///
/// The relation is the reflexive symmetric closure of the parent/child
/// edges; `q_i` holds exactly at level-`i` nodes; `p_i` holds at a node of
/// level `>= i` iff the branch assigns it `true`, and is false at shallower
/// nodes.
pub fn witness_model(theta: &Qbf) -> Result<(Model, World), QbfError> {
    let tree = quantifier_tree(theta)?;
    let edges = tree
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(id, n)| n.parent.map(|p| (p, id)));
    let frame = Frame::new(tree.nodes.len(), edges)
        .expect("tree nodes are in range")
        .symmetric_closure()
        .reflexive_closure();
    let mut model = Model::empty(frame);
    for i in 0..=theta.m() {
        let at_level: BTreeSet<World> = (0..tree.nodes.len()).filter(|&w| tree.nodes[w].level == i).collect();
        model.set_var(theta.level_var(i), at_level).expect("in range");
    }
    for i in 1..=theta.m() {
        let truth: BTreeSet<World> = (0..tree.nodes.len())
            .filter(|&w| tree.nodes[w].assignment.get(i - 1) == Some(&true))
            .collect();
        model.set_var(i as u32, truth).expect("in range");
    }
    Ok((model, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::FrameClass;

    fn qbf(s: &str) -> Qbf {
        parse_qbf(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let t = qbf("E p1 . p1");
        assert_eq!(t.prefix(), &[Quantifier::Exists]);
        assert_eq!(t.matrix(), &Formula::var(1));
        let t = qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)");
        assert_eq!(t.prefix(), &[Quantifier::Forall, Quantifier::Exists]);
        assert_eq!(parse_qbf(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_qbf("E p2 . p2"),
            Err(QbfError::NonContiguous { position: 1, found: 2 })
        );
        assert_eq!(parse_qbf("p1"), Err(QbfError::NoQuantifiers));
        assert_eq!(parse_qbf("E p1 . []p1"), Err(QbfError::ModalMatrix));
        assert_eq!(parse_qbf("E p1 . p2"), Err(QbfError::UnboundVariable(2)));
        assert!(matches!(parse_qbf("E p1 p1"), Err(QbfError::Parse(_))));
        assert!(matches!(parse_qbf("E . p1"), Err(QbfError::Parse(_))));
        assert!(matches!(parse_qbf("E p1 . p1 )"), Err(QbfError::Parse(_))));
    }

    #[test]
    fn eval_examples() {
        assert!(eval_qbf(&qbf("E p1 . p1")));
        assert!(!eval_qbf(&qbf("A p1 . p1")));
        assert!(eval_qbf(&qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)")));
        assert!(!eval_qbf(&qbf("E p1 A p2 . (p1 -> p2) & (p2 -> p1)")));
    }

    #[test]
    fn translation_of_single_existential() {
        let t = qbf("E p1 . p1");
        let excl = Formula::and2(
            Formula::implies(Formula::var(2), Formula::not(Formula::var(3))),
            Formula::implies(Formula::var(3), Formula::not(Formula::var(2))),
        );
        let expected = Formula::And(vec![
            Formula::var(2),
            Formula::and2(excl.clone(), Formula::boxed(excl)),
            Formula::implies(Formula::var(2), Formula::diamond(Formula::var(3))),
            Formula::Top,
            Formula::Top,
            Formula::boxed(Formula::implies(Formula::var(3), Formula::var(1))),
        ]);
        assert_eq!(ladner_translate(&t), expected);
    }

    #[test]
    fn empty_schemas_are_top() {
        let f = ladner_translate(&qbf("E p1 E p2 . p1 & p2"));
        let Formula::And(parts) = &f else { panic!() };
        assert_eq!(parts[3], Formula::Top);
        assert_ne!(parts[4], Formula::Top);
        let f = ladner_translate(&qbf("A p1 . p1"));
        let Formula::And(parts) = &f else { panic!() };
        assert_eq!(parts[2], Formula::Top);
        assert_eq!(parts[4], Formula::Top);
    }

    #[test]
    fn negation_accounting() {
        let t = qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)");
        let neg = negated_translate(&t);
        assert_eq!(neg, Formula::not(ladner_translate(&t)));
        assert_eq!(neg.size(), ladner_translate(&t).size() + 1);
        assert_eq!(neg.vars(), (1..=5).collect());
    }

    #[test]
    fn tree_examples() {
        let tree = quantifier_tree(&qbf("E p1 . p1")).unwrap();
        assert_eq!(tree.nodes.len(), 2);
        assert_eq!(tree.nodes[1].assignment, vec![true]);

        let tree = quantifier_tree(&qbf("E p1 . true")).unwrap();
        assert_eq!(tree.nodes[1].assignment, vec![false]);

        let tree = quantifier_tree(&qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)")).unwrap();
        assert_eq!(tree.nodes.len(), 5);
        assert_eq!(tree.root().children, vec![1, 2]);
        for (level1, leaf) in [(1, 3), (2, 4)] {
            assert_eq!(tree.nodes[level1].children, vec![leaf]);
            let a = &tree.nodes[leaf].assignment;
            assert_eq!(a[0], a[1]);
        }
        assert_eq!(quantifier_tree(&qbf("A p1 . p1")), Err(QbfError::False));
    }

    #[test]
    fn witness_examples() {
        let t = qbf("E p1 . p1");
        let (m, root) = witness_model(&t).unwrap();
        assert_eq!(m.world_count(), 2);
        assert!(m.frame().is_in_class(FrameClass::KTB));
        assert!(m.model_check(root, &ladner_translate(&t)).unwrap());

        let t = qbf("A p1 E p2 . (p1 -> p2) & (p2 -> p1)");
        let (m, root) = witness_model(&t).unwrap();
        assert_eq!(m.world_count(), 5);
        assert!(m.frame().is_in_class(FrameClass::KTB));
        assert!(m.model_check(root, &ladner_translate(&t)).unwrap());
        for w in 0..m.world_count() {
            let markers = (0..=t.m()).filter(|&i| m.holds_var(t.level_var(i), w)).count();
            assert_eq!(markers, 1);
        }
        assert_eq!(witness_model(&qbf("A p1 . p1")), Err(QbfError::False));
    }
}
