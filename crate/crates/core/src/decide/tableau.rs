//! Depth-bounded labelled tableau for the six frame classes.
//!
//! Each tableau world carries a set of signed subformulas. Propositional
//! rules branch; every unmet `<>`-demand spawns a child world whose label
//! holds the demanded body plus the bodies of all `[]`-facts. A child's
//! universe is restricted to subformulas of smaller modal depth, so the
//! search terminates after `modal_depth(phi)` levels.
//!
//! Class conditions:
//! - reflexive: `[]a` at a world also asserts `a` there, and a demand
//!   already met by the world's own label needs no child;
//! - symmetric: before creating children, a world decides every body `a` of
//!   a modal subformula in the children's universe (analytic cut). A child
//!   then receives `~[]a` whenever the parent has `~a` (and `<>a` whenever
//!   the parent has `a`), which makes the parent a legal successor of the
//!   child; demands met by the parent need no grandchild;
//! - serial: a world without any successor gets one, or a self-loop once no
//!   modal formula is left in its universe.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;
use std::time::Instant;

use crate::formula::Formula;
use crate::kripke::{Frame, FrameClass, Model, World};

use super::Budget;

type Id = u32;
/// `id << 1 | polarity`.
type Lit = u32;

fn lit(id: Id, positive: bool) -> Lit {
    id << 1 | positive as u32
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

fn id_of(l: Lit) -> Id {
    l >> 1
}

fn positive(l: Lit) -> bool {
    l & 1 == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Var(u32),
    Falsum,
    Top,
    Not(Id),
    Implies(Id, Id),
    And(Vec<Id>),
    Or(Vec<Id>),
    Box(Id),
    Diamond(Id),
}

/// Hash-consed subformula table.
struct Closure {
    nodes: Vec<Node>,
    depth: Vec<usize>,
    index: HashMap<Node, Id>,
    /// Modal node ids sorted by modal depth.
    modal: Vec<Id>,
}

impl Closure {
    fn build(f: &Formula) -> (Closure, Id) {
        let mut cl = Closure {
            nodes: Vec::new(),
            depth: Vec::new(),
            index: HashMap::new(),
            modal: Vec::new(),
        };
        let root = cl.intern(f);
        let mut modal: Vec<Id> = (0..cl.nodes.len() as Id)
            .filter(|&i| matches!(cl.nodes[i as usize], Node::Box(_) | Node::Diamond(_)))
            .collect();
        modal.sort_by_key(|&i| (cl.depth[i as usize], i));
        cl.modal = modal;
        (cl, root)
    }

    fn intern(&mut self, f: &Formula) -> Id {
        let node = match f {
            Formula::Var(i) => Node::Var(*i),
            Formula::Falsum => Node::Falsum,
            Formula::Top => Node::Top,
            Formula::Not(a) => Node::Not(self.intern(a)),
            Formula::Box(a) => Node::Box(self.intern(a)),
            Formula::Diamond(a) => Node::Diamond(self.intern(a)),
            Formula::Implies(a, b) => {
                let a = self.intern(a);
                Node::Implies(a, self.intern(b))
            }
            Formula::And(xs) => Node::And(xs.iter().map(|x| self.intern(x)).collect()),
            Formula::Or(xs) => Node::Or(xs.iter().map(|x| self.intern(x)).collect()),
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let depth = match &node {
            Node::Var(_) | Node::Falsum | Node::Top => 0,
            Node::Not(a) => self.depth[*a as usize],
            Node::Box(a) | Node::Diamond(a) => self.depth[*a as usize] + 1,
            Node::Implies(a, b) => self.depth[*a as usize].max(self.depth[*b as usize]),
            Node::And(xs) | Node::Or(xs) => xs.iter().map(|&x| self.depth[x as usize]).max().unwrap_or(0),
        };
        let id = self.nodes.len() as Id;
        self.nodes.push(node.clone());
        self.depth.push(depth);
        self.index.insert(node, id);
        id
    }

    fn node(&self, id: Id) -> &Node {
        &self.nodes[id as usize]
    }

    /// Body literal a modal literal asserts at every successor.
    fn fact(&self, l: Lit) -> Option<Lit> {
        match (self.node(id_of(l)), positive(l)) {
            (Node::Box(a), true) => Some(lit(*a, true)),
            (Node::Diamond(a), false) => Some(lit(*a, false)),
            _ => None,
        }
    }

    /// Body literal a modal literal demands at some successor.
    fn demand(&self, l: Lit) -> Option<Lit> {
        match (self.node(id_of(l)), positive(l)) {
            (Node::Box(a), false) => Some(lit(*a, false)),
            (Node::Diamond(a), true) => Some(lit(*a, true)),
            _ => None,
        }
    }

    fn modal_upto(&self, depth: usize) -> impl Iterator<Item = Id> + '_ {
        self.modal
            .iter()
            .copied()
            .take_while(move |&m| self.depth[m as usize] <= depth)
    }

    fn body(&self, modal: Id) -> Id {
        match self.node(modal) {
            Node::Box(a) | Node::Diamond(a) => *a,
            _ => unreachable!("not a modal node"),
        }
    }
}

pub(super) struct Exhausted;

type Label = BTreeSet<Lit>;

/// A partially expanded propositional branch.
struct Pending {
    label: Label,
    queue: Vec<Lit>,
    /// Disjunctive choices, each alternative a single literal.
    choices: Vec<Vec<Lit>>,
}

/// Lazily enumerates the open saturated branches of one world.
struct Branches {
    stack: Vec<Pending>,
}

impl Branches {
    fn new(label: Label, queue: Vec<Lit>, choices: Vec<Vec<Lit>>) -> Self {
        Branches {
            stack: vec![Pending { label, queue, choices }],
        }
    }

    fn next(&mut self, t: &mut Search<'_>) -> Result<Option<Label>, Exhausted> {
        'outer: while let Some(mut p) = self.stack.pop() {
            t.tick()?;
            while let Some(l) = p.queue.pop() {
                if p.label.contains(&neg(l)) {
                    continue 'outer;
                }
                if !p.label.insert(l) {
                    continue;
                }
                let pos = positive(l);
                match t.cl.node(id_of(l)) {
                    Node::Var(_) => {}
                    Node::Falsum if pos => continue 'outer,
                    Node::Top if !pos => continue 'outer,
                    Node::Falsum | Node::Top => {}
                    Node::Not(a) => p.queue.push(lit(*a, !pos)),
                    Node::Implies(a, b) => {
                        if pos {
                            p.choices.push(vec![lit(*a, false), lit(*b, true)]);
                        } else {
                            p.queue.push(lit(*b, false));
                            p.queue.push(lit(*a, true));
                        }
                    }
                    Node::And(xs) | Node::Or(xs) => {
                        let conj = matches!(t.cl.node(id_of(l)), Node::And(_));
                        if conj == pos {
                            p.queue.extend(xs.iter().rev().map(|&x| lit(x, pos)));
                        } else if xs.is_empty() {
                            continue 'outer;
                        } else {
                            p.choices.push(xs.iter().map(|&x| lit(x, pos)).collect());
                        }
                    }
                    Node::Box(_) | Node::Diamond(_) => {
                        if t.class.requires_reflexive() {
                            if let Some(f) = t.cl.fact(l) {
                                p.queue.push(f);
                            }
                        }
                    }
                }
            }
            // First choice not yet satisfied by the label.
            let open = p
                .choices
                .iter()
                .position(|alts| !alts.iter().any(|a| p.label.contains(a)));
            let Some(k) = open else {
                return Ok(Some(p.label));
            };
            let alts = p.choices.swap_remove(k);
            for &alt in alts.iter().rev() {
                if p.label.contains(&neg(alt)) {
                    continue;
                }
                self.stack.push(Pending {
                    label: p.label.clone(),
                    queue: vec![alt],
                    choices: p.choices.clone(),
                });
            }
        }
        Ok(None)
    }
}

/// A satisfiable tableau world with its children.
struct Tree {
    true_vars: Vec<u32>,
    children: Vec<Rc<Tree>>,
    self_loop: bool,
}

type Key = (usize, Vec<Lit>, Option<Vec<Lit>>);

pub(super) struct Search<'c> {
    cl: &'c Closure,
    class: FrameClass,
    budget: Budget,
    start: Instant,
    pub(super) steps: usize,
    pub(super) worlds_expanded: usize,
    cache: HashMap<Key, Option<Rc<Tree>>>,
}

pub(super) enum Outcome {
    Sat(Model),
    Unsat,
    Exhausted { worlds_expanded: usize },
    TooLarge { worlds: usize },
}

pub(super) fn run(f: &Formula, class: FrameClass, budget: Budget) -> Outcome {
    let (cl, root) = Closure::build(f);
    let mut search = Search {
        cl: &cl,
        class,
        budget,
        start: Instant::now(),
        steps: 0,
        worlds_expanded: 0,
        cache: HashMap::new(),
    };
    let remaining = cl.depth[root as usize];
    match search.solve(vec![lit(root, true)], remaining, None) {
        Err(Exhausted) => Outcome::Exhausted {
            worlds_expanded: search.worlds_expanded,
        },
        Ok(None) => Outcome::Unsat,
        Ok(Some(tree)) => {
            let worlds = count_worlds(&tree);
            if worlds > budget.max_worlds {
                return Outcome::TooLarge { worlds };
            }
            Outcome::Sat(materialize(&tree, class))
        }
    }
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), Exhausted> {
        self.steps += 1;
        if self.steps > self.budget.max_nodes {
            return Err(Exhausted);
        }
        if self.steps.is_multiple_of(1024) && self.start.elapsed() > self.budget.timeout {
            return Err(Exhausted);
        }
        Ok(())
    }

    /// Parent literals that can influence a child with `remaining` depth.
    fn projection(&self, parent: &Label, remaining: usize) -> Vec<Lit> {
        self.cl
            .modal_upto(remaining)
            .map(|m| self.cl.body(m))
            .flat_map(|b| [lit(b, true), lit(b, false)])
            .filter(|l| parent.contains(l))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn solve(
        &mut self,
        mut initial: Vec<Lit>,
        remaining: usize,
        parent: Option<&Label>,
    ) -> Result<Option<Rc<Tree>>, Exhausted> {
        initial.sort_unstable();
        initial.dedup();
        let symmetric = self.class.requires_symmetric();
        let key = (
            remaining,
            initial.clone(),
            parent.map(|p| if symmetric { self.projection(p, remaining) } else { Vec::new() }),
        );
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        self.worlds_expanded += 1;
        self.tick()?;
        let mut queue = initial;
        queue.reverse();
        let mut branches = Branches::new(Label::new(), queue, Vec::new());
        let mut found = None;
        while let Some(label) = branches.next(self)? {
            if let Some(tree) = self.expand_world(&label, remaining, parent)? {
                found = Some(tree);
                break;
            }
        }
        self.cache.insert(key, found.clone());
        Ok(found)
    }

    fn expand_world(
        &mut self,
        label: &Label,
        remaining: usize,
        parent: Option<&Label>,
    ) -> Result<Option<Rc<Tree>>, Exhausted> {
        if !self.class.requires_symmetric() || self.child_specs(label, remaining, parent).0.is_empty() {
            return self.build(label, remaining, parent);
        }
        let cuts: Vec<Vec<Lit>> = self
            .cl
            .modal_upto(remaining - 1)
            .map(|m| self.cl.body(m))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|b| vec![lit(b, true), lit(b, false)])
            .rev()
            .collect();
        let mut decided = Branches::new(label.clone(), Vec::new(), cuts);
        while let Some(full) = decided.next(self)? {
            if let Some(tree) = self.build(&full, remaining, parent)? {
                return Ok(Some(tree));
            }
        }
        Ok(None)
    }

    /// Initial labels of the children `label` needs, and whether a
    /// self-loop is needed instead.
    fn child_specs(&self, label: &Label, remaining: usize, parent: Option<&Label>) -> (Vec<Vec<Lit>>, bool) {
        let cl = self.cl;
        let reflexive = self.class.requires_reflexive();
        let symmetric = self.class.requires_symmetric();
        let facts: Vec<Lit> = label.iter().filter_map(|&l| cl.fact(l)).collect();
        let mut has_successor = reflexive || (symmetric && parent.is_some());
        let mut needed = BTreeSet::new();
        for d in label.iter().filter_map(|&l| cl.demand(l)) {
            let met_here = reflexive && label.contains(&d);
            let met_by_parent = symmetric && parent.is_some_and(|p| p.contains(&d));
            if met_here || met_by_parent {
                has_successor = true;
            } else {
                needed.insert(d);
            }
        }
        let serial_gap = self.class.requires_serial() && needed.is_empty() && !has_successor;
        if remaining == 0 {
            debug_assert!(needed.is_empty());
            return (Vec::new(), serial_gap);
        }
        let mut constraints = Vec::new();
        if symmetric {
            for m in cl.modal_upto(remaining - 1) {
                let body = cl.body(m);
                match cl.node(m) {
                    Node::Box(_) if label.contains(&lit(body, false)) => constraints.push(lit(m, false)),
                    Node::Diamond(_) if label.contains(&lit(body, true)) => constraints.push(lit(m, true)),
                    _ => {}
                }
            }
        }
        let base: Vec<Lit> = facts.iter().chain(&constraints).copied().collect();
        let mut specs: Vec<Vec<Lit>> = needed
            .into_iter()
            .map(|d| std::iter::once(d).chain(base.iter().copied()).collect())
            .collect();
        if serial_gap {
            specs.push(base);
        }
        (specs, false)
    }

    fn build(
        &mut self,
        label: &Label,
        remaining: usize,
        parent: Option<&Label>,
    ) -> Result<Option<Rc<Tree>>, Exhausted> {
        let (specs, self_loop) = self.child_specs(label, remaining, parent);
        let mut children = Vec::with_capacity(specs.len());
        for spec in specs {
            let Some(child) = self.solve(spec, remaining - 1, Some(label))? else {
                return Ok(None);
            };
            children.push(child);
        }
        let true_vars = label
            .iter()
            .filter(|&&l| positive(l))
            .filter_map(|&l| match self.cl.node(id_of(l)) {
                Node::Var(v) => Some(*v),
                _ => None,
            })
            .collect();
        Ok(Some(Rc::new(Tree {
            true_vars,
            children,
            self_loop,
        })))
    }
}

fn count_worlds(t: &Tree) -> usize {
    1 + t.children.iter().map(|c| count_worlds(c)).sum::<usize>()
}

/// Unfolds the tree in depth-first preorder; the root is world 0.
fn materialize(tree: &Tree, class: FrameClass) -> Model {
    fn walk(
        t: &Tree,
        edges: &mut Vec<(World, World)>,
        vals: &mut Vec<(u32, World)>,
        next: &mut World,
    ) -> World {
        let me = *next;
        *next += 1;
        vals.extend(t.true_vars.iter().map(|&v| (v, me)));
        if t.self_loop {
            edges.push((me, me));
        }
        for c in &t.children {
            let child = walk(c, edges, vals, next);
            edges.push((me, child));
        }
        me
    }
    let mut edges = Vec::new();
    let mut vals = Vec::new();
    let mut count = 0;
    walk(tree, &mut edges, &mut vals, &mut count);
    let frame = Frame::new(count, edges)
        .expect("tree worlds are in range")
        .close_for(class);
    let mut valuation: std::collections::BTreeMap<u32, BTreeSet<World>> = Default::default();
    for (v, w) in vals {
        valuation.entry(v).or_default().insert(w);
    }
    Model::new(frame, valuation).expect("tree worlds are in range")
}
