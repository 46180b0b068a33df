//! Embedding of a modal formula into the single-variable fragment.
//!
//! A formula over `p_1..p_n` is relativized to a fresh variable `p_{n+1}`,
//! and every `p_i` is then replaced by a formula `beta_i` over `p_1` alone.
//! `beta_i` holds at a world exactly when that world sees the root of the
//! chain model `M_i`, which is how [`attach`] turns a model of `phi` into a
//! model of `star(phi)`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{box_plus, box_upto, diamond_pow, Formula, Substitution};
use crate::kripke::{disjoint_union, Frame, FrameClass, KripkeError, Model, World};

/// The single output variable.
pub const P: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OnevarError {
    #[error("p{var} collides with the fresh variable p{fresh}")]
    FreshCollision { var: u32, fresh: u32 },
    #[error("index out of range: need 1 <= {i} <= {k}")]
    IndexRange { i: usize, k: usize },
    #[error("the embedding supports only K, KB and KTB, not {0}")]
    UnsupportedClass(FrameClass),
    #[error("the model's frame is not in class {0}")]
    FrameNotInClass(FrameClass),
    #[error("p{var} must hold at every world, but fails at world {world}")]
    FreshNotUniversal { var: u32, world: World },
    #[error("the formula does not hold at world {0}")]
    NotSatisfied(World),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// Fixes `n`, the largest variable index the input may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EmbeddingContext {
    pub n: u32,
}

impl EmbeddingContext {
    pub fn new(n: u32) -> Self {
        EmbeddingContext { n }
    }

    /// `n` is the largest variable index of `f`, or 0 if it has none.
    pub fn for_formula(f: &Formula) -> Self {
        EmbeddingContext { n: f.max_var() }
    }

    pub fn fresh(&self) -> u32 {
        self.n + 1
    }

    fn check(&self, f: &Formula) -> Result<(), OnevarError> {
        match f.vars().into_iter().find(|&v| v > self.n) {
            Some(var) => Err(OnevarError::FreshCollision {
                var,
                fresh: self.fresh(),
            }),
            None => Ok(()),
        }
    }
}

fn relativize_core(f: &Formula, guard: &Formula) -> Formula {
    match f {
        Formula::Var(_) | Formula::Falsum => f.clone(),
        Formula::Implies(a, b) => Formula::implies(relativize_core(a, guard), relativize_core(b, guard)),
        Formula::Box(a) => Formula::boxed(Formula::implies(guard.clone(), relativize_core(a, guard))),
        _ => unreachable!("input is in core form"),
    }
}

/// Guards every box with `p_{n+1}`. The formula is first rewritten into
/// `Var`, `Falsum`, `Implies` and `Box`.
pub fn relativize(f: &Formula, ctx: &EmbeddingContext) -> Result<Formula, OnevarError> {
    ctx.check(f)?;
    Ok(relativize_core(&f.to_core(), &Formula::Var(ctx.fresh())))
}

/// `p_{n+1} & relativize(f)`.
pub fn hat(f: &Formula, ctx: &EmbeddingContext) -> Result<Formula, OnevarError> {
    Ok(Formula::and2(Formula::Var(ctx.fresh()), relativize(f, ctx)?))
}

fn p() -> Formula {
    Formula::Var(P)
}

/// `[]^{<=i} ~p & <>^{i+1} p`.
pub fn epsilon(i: usize) -> Formula {
    Formula::and2(box_upto(i, Formula::not(p())), diamond_pow(i + 1, p()))
}

/// `p & []p`.
pub fn delta() -> Formula {
    box_plus(p())
}

fn delta_unchecked(i: usize, k: usize) -> Formula {
    if i == k {
        Formula::and2(epsilon(k), diamond_pow(k + 2, delta()))
    } else {
        Formula::and2(epsilon(i), diamond_pow(2 * i + 3, delta_unchecked(i + 1, k)))
    }
}

fn check_range(i: usize, k: usize) -> Result<(), OnevarError> {
    if 1 <= i && i <= k {
        Ok(())
    } else {
        Err(OnevarError::IndexRange { i, k })
    }
}

pub fn delta_i_k(i: usize, k: usize) -> Result<Formula, OnevarError> {
    check_range(i, k)?;
    Ok(delta_unchecked(i, k))
}

fn alpha_unchecked(k: usize) -> Formula {
    Formula::and2(p(), diamond_pow(2, delta_unchecked(1, k)))
}

fn beta_unchecked(k: usize) -> Formula {
    Formula::and2(Formula::not(p()), Formula::diamond(alpha_unchecked(k)))
}

/// `p & <><> delta_1^k`; holds in `M_k` at the root.
pub fn alpha(k: usize) -> Result<Formula, OnevarError> {
    check_range(1, k)?;
    Ok(alpha_unchecked(k))
}

/// `~p & <> alpha_k`; stands in for `p_k`.
pub fn beta(k: usize) -> Result<Formula, OnevarError> {
    check_range(1, k)?;
    Ok(beta_unchecked(k))
}

/// `{p_i -> beta_i : 1 <= i <= n+1}`.
pub fn sigma(ctx: &EmbeddingContext) -> Substitution {
    (1..=ctx.fresh()).map(|i| (i, beta_unchecked(i as usize))).collect()
}

fn star_core(f: &Formula, betas: &[Formula], guard: &Formula) -> Formula {
    match f {
        Formula::Var(i) => betas[*i as usize - 1].clone(),
        Formula::Falsum => Formula::Falsum,
        Formula::Implies(a, b) => Formula::implies(star_core(a, betas, guard), star_core(b, betas, guard)),
        Formula::Box(a) => Formula::boxed(Formula::implies(guard.clone(), star_core(a, betas, guard))),
        _ => unreachable!("input is in core form"),
    }
}

/// The single-variable image of `f`, computed in one pass. It coincides
/// with `substitute(hat(f), sigma)`.
pub fn star(f: &Formula, ctx: &EmbeddingContext) -> Result<Formula, OnevarError> {
    ctx.check(f)?;
    let betas: Vec<Formula> = (1..=ctx.fresh() as usize).map(beta_unchecked).collect();
    let guard = betas[ctx.n as usize].clone();
    Ok(Formula::and2(guard.clone(), star_core(&f.to_core(), &betas, &guard)))
}

/// `~star(~f)`: validity-preserving in both directions.
pub fn embed(f: &Formula) -> Formula {
    let neg = Formula::not(f.clone());
    let ctx = EmbeddingContext::for_formula(&neg);
    Formula::not(star(&neg, &ctx).expect("context covers the formula"))
}

/// The chain model `M_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainModel {
    model: Model,
    k: usize,
}

impl ChainModel {
    /// Treats `model` as `M_k` without checking its shape.
    pub fn from_model(model: Model, k: usize) -> ChainModel {
        ChainModel { model, k }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> World {
        0
    }

    /// Middle world of the `i`-th `~p` block.
    pub fn c_world(&self, i: usize) -> World {
        assert!(1 <= i && i <= self.k, "c_world({i}) out of range for k = {}", self.k);
        i * i + 2 * i - 1
    }

    /// Worlds `root..=c_world(i)` in chain order.
    pub fn segment_to(&self, i: usize) -> std::ops::RangeInclusive<World> {
        self.root()..=self.c_world(i)
    }
}

pub fn chain_world_count(k: usize) -> usize {
    k * k + 3 * k + 3
}

/// Builds `M_k`: a root `p`-world, then for each `i` in `1..=k` a block of
/// `2i+1` `~p`-worlds with single `p`-worlds between blocks, then three
/// final `p`-worlds. Consecutive worlds are linked, and the relation is
/// closed reflexively and symmetrically.
pub fn build_chain(k: usize) -> ChainModel {
    assert!(k >= 1, "chain models start at k = 1");
    let mut p_worlds = BTreeSet::from([0]);
    let mut w = 0;
    for i in 1..=k {
        w += 2 * i + 1;
        if i < k {
            w += 1;
            p_worlds.insert(w);
        }
    }
    p_worlds.extend(w + 1..=w + 3);
    let count = w + 4;
    debug_assert_eq!(count, chain_world_count(k));
    let frame = Frame::new(count, (1..count).map(|x| (x - 1, x)))
        .expect("chain worlds are in range")
        .close_for(FrameClass::KTB);
    let model = Model::new(frame, [(P, p_worlds)]).expect("chain worlds are in range");
    ChainModel { model, k }
}

/// `M'`: `M` followed by `M_1..M_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attachment {
    pub model: Model,
    /// `roots[m - 1]` is the root of `M_m` in `model`.
    pub roots: Vec<World>,
    /// Number of worlds taken over from the input model.
    pub original_worlds: usize,
}

impl Attachment {
    /// World of `M'` that is world `x` of the attached `M_k`.
    pub fn chain_world(&self, k: usize, x: World) -> World {
        self.roots[k - 1] + x
    }
}

fn check_class(model: &Model, class: FrameClass) -> Result<(), OnevarError> {
    if !matches!(class, FrameClass::K | FrameClass::KB | FrameClass::KTB) {
        return Err(OnevarError::UnsupportedClass(class));
    }
    if !model.frame().is_in_class(class) {
        return Err(OnevarError::FrameNotInClass(class));
    }
    Ok(())
}

/// Attaches the chain models to `model` and links each original world `x`
/// with the root of `M_m` in both directions when `p_m` holds at `x`.
/// Afterwards `p_1` is false on the original worlds and every other
/// variable is cleared.
pub fn attach(model: &Model, ctx: &EmbeddingContext, class: FrameClass) -> Result<Attachment, OnevarError> {
    check_class(model, class)?;
    let fresh = ctx.fresh();
    if let Some(world) = model.frame().worlds().find(|&w| !model.holds_var(fresh, w)) {
        return Err(OnevarError::FreshNotUniversal { var: fresh, world });
    }
    let original_worlds = model.world_count();
    let mut base = model.clone();
    base.retain_vars(|_| false);
    let mut parts = vec![base];
    parts.extend((1..=fresh as usize).map(|k| build_chain(k).into_model()));
    let (joined, offsets) = disjoint_union(&parts)?;
    let roots = offsets[1..].to_vec();

    let mut relation = joined.frame().relation().clone();
    for (m, &root) in (1..=fresh).zip(&roots) {
        for x in model.truth_set(m) {
            relation.insert((x, root));
            relation.insert((root, x));
        }
    }
    let frame = Frame::new(joined.world_count(), relation)?;
    let valuation = joined.valuation().clone();
    let result = Model::new(frame, valuation)?;
    debug_assert!(result.frame().is_in_class(class));
    Ok(Attachment {
        model: result,
        roots,
        original_worlds,
    })
}

/// Turns a model of `f` at `w0` into a model of `star(f)` at `w0`: makes
/// `p_{n+1}` true everywhere and attaches the chain models.
pub fn star_witness(
    model: &Model,
    w0: World,
    f: &Formula,
    class: FrameClass,
) -> Result<(Attachment, World), OnevarError> {
    check_class(model, class)?;
    if !model.model_check(w0, f)? {
        return Err(OnevarError::NotSatisfied(w0));
    }
    let ctx = EmbeddingContext::for_formula(f);
    let mut m = model.clone();
    m.retain_vars(|v| v <= ctx.n);
    m.set_var(ctx.fresh(), m.frame().worlds().collect())?;
    Ok((attach(&m, &ctx, class)?, w0))
}
