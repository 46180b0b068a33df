//! Finite Kripke frames and models, frame classes, and model checking.

mod file;
pub mod mask;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::Formula;

pub use file::ModelFileError;

pub type World = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("world {world} out of range for a frame with {world_count} worlds")]
    WorldOutOfRange { world: World, world_count: usize },
    #[error("a frame needs at least one world")]
    NoWorlds,
    #[error("variable index 0 is not allowed")]
    ZeroVariable,
    #[error("disjoint union of an empty list of models")]
    EmptyUnion,
}

/// A finite frame over worlds `0..world_count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    world_count: usize,
    relation: BTreeSet<(World, World)>,
}

impl Frame {
    pub fn new(
        world_count: usize,
        relation: impl IntoIterator<Item = (World, World)>,
    ) -> Result<Frame, KripkeError> {
        if world_count == 0 {
            return Err(KripkeError::NoWorlds);
        }
        let relation: BTreeSet<_> = relation.into_iter().collect();
        for &(a, b) in &relation {
            for world in [a, b] {
                if world >= world_count {
                    return Err(KripkeError::WorldOutOfRange { world, world_count });
                }
            }
        }
        Ok(Frame {
            world_count,
            relation,
        })
    }

    pub fn world_count(&self) -> usize {
        self.world_count
    }

    pub fn worlds(&self) -> std::ops::Range<World> {
        0..self.world_count
    }

    pub fn relation(&self) -> &BTreeSet<(World, World)> {
        &self.relation
    }

    pub fn has_edge(&self, from: World, to: World) -> bool {
        self.relation.contains(&(from, to))
    }

    /// Successor lists indexed by world.
    pub fn successors(&self) -> Vec<Vec<World>> {
        let mut out = vec![Vec::new(); self.world_count];
        for &(a, b) in &self.relation {
            out[a].push(b);
        }
        out
    }

    pub fn is_reflexive(&self) -> bool {
        self.worlds().all(|w| self.has_edge(w, w))
    }

    pub fn is_symmetric(&self) -> bool {
        self.relation.iter().all(|&(a, b)| self.has_edge(b, a))
    }

    pub fn is_serial(&self) -> bool {
        let mut has_succ = vec![false; self.world_count];
        for &(a, _) in &self.relation {
            has_succ[a] = true;
        }
        has_succ.into_iter().all(|b| b)
    }

    pub fn is_in_class(&self, class: FrameClass) -> bool {
        (!class.requires_reflexive() || self.is_reflexive())
            && (!class.requires_symmetric() || self.is_symmetric())
            && (!class.requires_serial() || self.is_serial())
    }

    pub fn reflexive_closure(&self) -> Frame {
        let mut relation = self.relation.clone();
        relation.extend(self.worlds().map(|w| (w, w)));
        Frame {
            world_count: self.world_count,
            relation,
        }
    }

    pub fn symmetric_closure(&self) -> Frame {
        let mut relation = self.relation.clone();
        relation.extend(self.relation.iter().map(|&(a, b)| (b, a)));
        Frame {
            world_count: self.world_count,
            relation,
        }
    }

    /// Smallest superframe in `class` obtained by the closures the class
    /// needs. Seriality is not a closure property and is left untouched.
    pub fn close_for(&self, class: FrameClass) -> Frame {
        let mut f = self.clone();
        if class.requires_reflexive() {
            f = f.reflexive_closure();
        }
        if class.requires_symmetric() {
            f = f.symmetric_closure();
        }
        f
    }
}

pub fn is_in_class(frame: &Frame, class: FrameClass) -> bool {
    frame.is_in_class(class)
}

pub fn reflexive_closure(frame: &Frame) -> Frame {
    frame.reflexive_closure()
}

pub fn symmetric_closure(frame: &Frame) -> Frame {
    frame.symmetric_closure()
}

/// The six frame classes between K and KTB handled by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameClass {
    K,
    KD,
    T,
    KB,
    KDB,
    KTB,
}

impl FrameClass {
    pub const ALL: [FrameClass; 6] = [
        FrameClass::K,
        FrameClass::KD,
        FrameClass::T,
        FrameClass::KB,
        FrameClass::KDB,
        FrameClass::KTB,
    ];

    pub fn requires_reflexive(self) -> bool {
        matches!(self, FrameClass::T | FrameClass::KTB)
    }

    pub fn requires_symmetric(self) -> bool {
        matches!(self, FrameClass::KB | FrameClass::KDB | FrameClass::KTB)
    }

    pub fn requires_serial(self) -> bool {
        matches!(self, FrameClass::KD | FrameClass::KDB)
    }

    /// Every frame in `self` also belongs to `other`.
    pub fn is_subclass_of(self, other: FrameClass) -> bool {
        // Reflexive frames are serial.
        let serial = self.requires_serial() || self.requires_reflexive();
        (!other.requires_reflexive() || self.requires_reflexive())
            && (!other.requires_symmetric() || self.requires_symmetric())
            && (!other.requires_serial() || serial)
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::K => "K",
            FrameClass::KD => "KD",
            FrameClass::T => "T",
            FrameClass::KB => "KB",
            FrameClass::KDB => "KDB",
            FrameClass::KTB => "KTB",
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown frame class `{0}` (expected one of K, KD, T, KB, KDB, KTB)")]
pub struct UnknownFrameClass(pub String);

impl FromStr for FrameClass {
    type Err = UnknownFrameClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownFrameClass(s.to_string()))
    }
}

/// A frame together with a valuation. Unlisted variables are false
/// everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Model {
    frame: Frame,
    valuation: BTreeMap<u32, BTreeSet<World>>,
}

impl Model {
    pub fn new(
        frame: Frame,
        valuation: impl IntoIterator<Item = (u32, BTreeSet<World>)>,
    ) -> Result<Model, KripkeError> {
        let mut model = Model {
            frame,
            valuation: BTreeMap::new(),
        };
        for (var, worlds) in valuation {
            model.set_var(var, worlds)?;
        }
        Ok(model)
    }

    /// A model with every variable false.
    pub fn empty(frame: Frame) -> Model {
        Model {
            frame,
            valuation: BTreeMap::new(),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn world_count(&self) -> usize {
        self.frame.world_count
    }

    pub fn valuation(&self) -> &BTreeMap<u32, BTreeSet<World>> {
        &self.valuation
    }

    pub fn truth_set(&self, var: u32) -> BTreeSet<World> {
        self.valuation.get(&var).cloned().unwrap_or_default()
    }

    pub fn holds_var(&self, var: u32, world: World) -> bool {
        self.valuation.get(&var).is_some_and(|s| s.contains(&world))
    }

    /// Replaces the truth set of `var`.
    pub fn set_var(&mut self, var: u32, worlds: BTreeSet<World>) -> Result<(), KripkeError> {
        if var == 0 {
            return Err(KripkeError::ZeroVariable);
        }
        self.check_world_set(&worlds)?;
        if worlds.is_empty() {
            self.valuation.remove(&var);
        } else {
            self.valuation.insert(var, worlds);
        }
        Ok(())
    }

    /// Drops every variable not accepted by `keep`.
    pub fn retain_vars(&mut self, mut keep: impl FnMut(u32) -> bool) {
        self.valuation.retain(|v, _| keep(*v));
    }

    fn check_world(&self, world: World) -> Result<(), KripkeError> {
        if world >= self.frame.world_count {
            return Err(KripkeError::WorldOutOfRange {
                world,
                world_count: self.frame.world_count,
            });
        }
        Ok(())
    }

    fn check_world_set(&self, worlds: &BTreeSet<World>) -> Result<(), KripkeError> {
        worlds.iter().try_for_each(|&w| self.check_world(w))
    }

    /// The set of worlds where `f` holds.
    pub fn extension(&self, f: &Formula) -> FixedBitSet {
        Evaluator::new(self).extension(f)
    }

    pub fn model_check(&self, world: World, f: &Formula) -> Result<bool, KripkeError> {
        self.check_world(world)?;
        Ok(self.extension(f).contains(world))
    }

    /// The submodel induced by `keep`, with worlds renumbered in ascending
    /// order. Returns the model and, for each new world, its old id.
    pub fn induced_submodel(&self, keep: &BTreeSet<World>) -> Result<(Model, Vec<World>), KripkeError> {
        if keep.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        self.check_world_set(keep)?;
        let old_ids: Vec<World> = keep.iter().copied().collect();
        let new_id: BTreeMap<World, World> = old_ids.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let relation = self
            .frame
            .relation
            .iter()
            .filter_map(|(a, b)| Some((*new_id.get(a)?, *new_id.get(b)?)));
        let frame = Frame::new(old_ids.len(), relation)?;
        let valuation = self.valuation.iter().map(|(v, ws)| {
            let ws = ws.iter().filter_map(|w| new_id.get(w).copied()).collect();
            (*v, ws)
        });
        Ok((Model::new(frame, valuation)?, old_ids))
    }
}

pub fn model_check(model: &Model, world: World, f: &Formula) -> Result<bool, KripkeError> {
    model.model_check(world, f)
}

/// Places the models side by side. World `w` of `models[i]` becomes
/// `offsets[i] + w` in the union.
pub fn disjoint_union(models: &[Model]) -> Result<(Model, Vec<usize>), KripkeError> {
    if models.is_empty() {
        return Err(KripkeError::EmptyUnion);
    }
    let mut offsets = Vec::with_capacity(models.len());
    let mut relation = BTreeSet::new();
    let mut valuation: BTreeMap<u32, BTreeSet<World>> = BTreeMap::new();
    let mut total = 0;
    for m in models {
        offsets.push(total);
        relation.extend(m.frame.relation.iter().map(|&(a, b)| (a + total, b + total)));
        for (v, ws) in &m.valuation {
            valuation.entry(*v).or_default().extend(ws.iter().map(|w| w + total));
        }
        total += m.world_count();
    }
    let model = Model {
        frame: Frame {
            world_count: total,
            relation,
        },
        valuation,
    };
    Ok((model, offsets))
}

/// Bottom-up computation of truth sets over a fixed model.
pub struct Evaluator<'m> {
    model: &'m Model,
    successors: Vec<Vec<World>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Evaluator {
            model,
            successors: model.frame.successors(),
        }
    }

    fn full(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.model.world_count());
        s.insert_range(..);
        s
    }

    fn complement(&self, mut s: FixedBitSet) -> FixedBitSet {
        s.toggle_range(..);
        s
    }

    /// Worlds all of whose successors lie in `inner`.
    fn necessity(&self, inner: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.model.world_count());
        for (w, succ) in self.successors.iter().enumerate() {
            if succ.iter().all(|&v| inner.contains(v)) {
                out.insert(w);
            }
        }
        out
    }

    pub fn extension(&self, f: &Formula) -> FixedBitSet {
        let n = self.model.world_count();
        match f {
            Formula::Var(i) => {
                let mut s = FixedBitSet::with_capacity(n);
                if let Some(ws) = self.model.valuation.get(i) {
                    ws.iter().for_each(|&w| s.insert(w));
                }
                s
            }
            Formula::Falsum => FixedBitSet::with_capacity(n),
            Formula::Top => self.full(),
            Formula::Not(a) => self.complement(self.extension(a)),
            Formula::Implies(a, b) => {
                let mut s = self.complement(self.extension(a));
                s.union_with(&self.extension(b));
                s
            }
            Formula::And(xs) => xs.iter().fold(self.full(), |mut acc, x| {
                acc.intersect_with(&self.extension(x));
                acc
            }),
            Formula::Or(xs) => xs.iter().fold(FixedBitSet::with_capacity(n), |mut acc, x| {
                acc.union_with(&self.extension(x));
                acc
            }),
            Formula::Box(a) => self.necessity(&self.extension(a)),
            Formula::Diamond(a) => {
                let not_a = self.complement(self.extension(a));
                self.complement(self.necessity(&not_a))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn set(ws: &[World]) -> BTreeSet<World> {
        ws.iter().copied().collect()
    }

    #[test]
    fn single_reflexive_world() {
        let frame = Frame::new(1, [(0, 0)]).unwrap();
        let m = Model::new(frame, [(1, set(&[0]))]).unwrap();
        assert!(m.model_check(0, &parse("[]p1").unwrap()).unwrap());
    }

    #[test]
    fn vacuous_box() {
        let m = Model::empty(Frame::new(1, []).unwrap());
        assert!(m.model_check(0, &parse("[]false").unwrap()).unwrap());
        assert!(!m.model_check(0, &parse("<>true").unwrap()).unwrap());
    }

    #[test]
    fn world_out_of_range() {
        let m = Model::empty(Frame::new(2, []).unwrap());
        assert_eq!(
            m.model_check(2, &Formula::Top),
            Err(KripkeError::WorldOutOfRange { world: 2, world_count: 2 })
        );
        assert!(Frame::new(2, [(0, 2)]).is_err());
        assert_eq!(Frame::new(0, []), Err(KripkeError::NoWorlds));
        let frame = Frame::new(1, []).unwrap();
        assert!(Model::new(frame.clone(), [(1, set(&[1]))]).is_err());
        assert_eq!(Model::new(frame, [(0, set(&[0]))]), Err(KripkeError::ZeroVariable));
    }

    #[test]
    fn class_membership_examples() {
        let ktb = Frame::new(2, [(0, 0), (1, 1), (0, 1), (1, 0)]).unwrap();
        assert!(ktb.is_in_class(FrameClass::KTB));
        let one_way = Frame::new(2, [(0, 1)]).unwrap();
        assert!(!one_way.is_in_class(FrameClass::KB));
        assert!(one_way.is_in_class(FrameClass::K));
        let lonely = Frame::new(1, []).unwrap();
        assert!(!lonely.is_in_class(FrameClass::KD));
        assert!(lonely.is_in_class(FrameClass::KB));
    }

    #[test]
    fn closure_examples() {
        let f = Frame::new(2, [(0, 1)]).unwrap();
        assert_eq!(f.symmetric_closure().relation(), &[(0, 1), (1, 0)].into_iter().collect());
        let e = Frame::new(2, []).unwrap();
        assert_eq!(e.reflexive_closure().relation(), &[(0, 0), (1, 1)].into_iter().collect());
        let closed = f.close_for(FrameClass::KTB);
        assert_eq!(closed.close_for(FrameClass::KTB), closed);
        assert!(closed.is_in_class(FrameClass::KTB));
    }

    #[test]
    fn interval_order_of_classes() {
        use FrameClass::*;
        for c in FrameClass::ALL {
            assert!(KTB.is_subclass_of(c), "KTB <= {c}");
            assert!(c.is_subclass_of(K));
        }
        assert!(!KB.is_subclass_of(KDB));
        assert!(KDB.is_subclass_of(KD));
        assert!(T.is_subclass_of(KD));
        assert!(!KD.is_subclass_of(T));
    }

    #[test]
    fn class_names_case_insensitive() {
        assert_eq!("ktb".parse::<FrameClass>().unwrap(), FrameClass::KTB);
        assert_eq!("Kd".parse::<FrameClass>().unwrap(), FrameClass::KD);
        assert!("S4".parse::<FrameClass>().is_err());
    }

    #[test]
    fn disjoint_union_offsets() {
        let a = Model::new(Frame::new(1, [(0, 0)]).unwrap(), [(1, set(&[0]))]).unwrap();
        let b = Model::new(Frame::new(1, []).unwrap(), [(2, set(&[0]))]).unwrap();
        let (u, offsets) = disjoint_union(&[a.clone(), b]).unwrap();
        assert_eq!(offsets, vec![0, 1]);
        assert_eq!(u.world_count(), 2);
        assert_eq!(u.frame().relation(), &[(0, 0)].into_iter().collect());
        assert_eq!(u.truth_set(1), a.truth_set(1));
        assert_eq!(u.truth_set(2), set(&[1]));
        assert_eq!(disjoint_union(&[]), Err(KripkeError::EmptyUnion));
    }

    #[test]
    fn induced_submodel_renumbers() {
        let frame = Frame::new(3, [(0, 2), (2, 0), (1, 1)]).unwrap();
        let m = Model::new(frame, [(1, set(&[0, 2]))]).unwrap();
        let (sub, old) = m.induced_submodel(&set(&[0, 2])).unwrap();
        assert_eq!(old, vec![0, 2]);
        assert_eq!(sub.frame().relation(), &[(0, 1), (1, 0)].into_iter().collect());
        assert_eq!(sub.truth_set(1), set(&[0, 1]));
        assert!(m.induced_submodel(&BTreeSet::new()).is_err());
    }

    #[test]
    fn sugar_semantics() {
        let frame = Frame::new(2, [(0, 1)]).unwrap();
        let m = Model::new(frame, [(1, set(&[1]))]).unwrap();
        let check = |s: &str| m.model_check(0, &parse(s).unwrap()).unwrap();
        assert!(check("<>p1"));
        assert!(check("~p1 & <>p1"));
        assert!(check("p1 | true"));
        assert!(!check("p1 | false"));
        assert!(check("p1 -> false"));
        assert!(m.model_check(0, &Formula::And(vec![])).unwrap());
        assert!(!m.model_check(0, &Formula::Or(vec![])).unwrap());
    }
}
