//! Satisfiability and validity relative to a frame class.
//!
//! [`sat_decide`] runs a terminating tableau (see [`tableau`]) and
//! re-verifies every witness it returns. [`sat_bruteforce`] enumerates
//! small models directly and serves as an independent oracle.

mod tableau;

use std::time::Duration;

use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::mask::{self, MaskFormula};
use crate::kripke::{FrameClass, Model, World};

/// Why a formula was declared unsatisfiable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnsatMethod {
    /// Every tableau branch closed.
    TableauClosed,
    /// Exhaustive enumeration reached the filtration bound.
    BoundExhaustedComplete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat { model: Model, world: World },
    Unsat(UnsatMethod),
    Inconclusive { worlds_searched: usize, complete_bound: u64 },
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat(_))
    }

    pub fn is_conclusive(&self) -> bool {
        !matches!(self, SatResult::Inconclusive { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid { countermodel: Model, world: World },
    Inconclusive,
}

/// Resource limits for [`sat_decide`]. Exceeding any of them yields
/// `Inconclusive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest witness model that may be returned.
    pub max_worlds: usize,
    /// Tableau expansion steps.
    pub max_nodes: usize,
    pub timeout: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_worlds: 100_000,
            max_nodes: 20_000_000,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("budget limits must be positive")]
    InvalidBudget,
    #[error("internal error: the tableau produced a witness that fails re-verification")]
    WitnessRejected,
}

/// `2^|sub(phi)|`, saturating at `u64::MAX`.
pub fn filtration_bound(f: &Formula) -> u64 {
    let n = f.subformulas().len();
    if n >= 64 {
        u64::MAX
    } else {
        1u64 << n
    }
}

fn verify_witness(f: &Formula, class: FrameClass, model: &Model, world: World) -> bool {
    model.frame().is_in_class(class) && model.model_check(world, f).unwrap_or(false)
}

/// Decides `class`-satisfiability of `f` within `budget`.
pub fn sat_decide(f: &Formula, class: FrameClass, budget: Budget) -> Result<SatResult, DecideError> {
    if budget.max_worlds == 0 || budget.max_nodes == 0 || budget.timeout.is_zero() {
        return Err(DecideError::InvalidBudget);
    }
    if *f == Formula::Falsum {
        return Ok(SatResult::Unsat(UnsatMethod::TableauClosed));
    }
    match tableau::run(f, class, budget) {
        tableau::Outcome::Unsat => Ok(SatResult::Unsat(UnsatMethod::TableauClosed)),
        tableau::Outcome::Sat(model) => {
            if !verify_witness(f, class, &model, 0) {
                return Err(DecideError::WitnessRejected);
            }
            Ok(SatResult::Sat { model, world: 0 })
        }
        tableau::Outcome::Exhausted { worlds_expanded } => Ok(SatResult::Inconclusive {
            worlds_searched: worlds_expanded,
            complete_bound: filtration_bound(f),
        }),
        tableau::Outcome::TooLarge { worlds } => Ok(SatResult::Inconclusive {
            worlds_searched: worlds,
            complete_bound: filtration_bound(f),
        }),
    }
}

/// `f` is valid on `class` iff `~f` is not satisfiable there.
pub fn valid(f: &Formula, class: FrameClass, budget: Budget) -> Result<Validity, DecideError> {
    Ok(match sat_decide(&Formula::not(f.clone()), class, budget)? {
        SatResult::Unsat(_) => Validity::Valid,
        SatResult::Sat { model, world } => Validity::Invalid {
            countermodel: model,
            world,
        },
        SatResult::Inconclusive { .. } => Validity::Inconclusive,
    })
}

/// Largest world count the enumeration can handle for `var_count`
/// variables.
fn enumerable_limit(var_count: usize) -> usize {
    (1..=mask::MAX_WORLDS)
        .take_while(|n| n * var_count < 64)
        .last()
        .unwrap_or(0)
}

/// Exhaustive search over every model of `class` with `1..=max_worlds`
/// worlds and every valuation of `vars(f)`.
///
/// Order: world count ascending, relation bitmask ascending, valuation
/// bitmask ascending, witness world ascending. The first witness is
/// returned. Without a witness the answer is `Unsat` only if the search
/// reached the filtration bound; otherwise it is `Inconclusive`. World
/// counts above 8 are beyond the enumeration and are not searched.
pub fn sat_bruteforce(f: &Formula, class: FrameClass, max_worlds: usize) -> SatResult {
    let bound = filtration_bound(f);
    let compiled = MaskFormula::compile(f);
    let var_count = compiled.vars().len();
    let limit = max_worlds.min(enumerable_limit(var_count));
    let mut scratch = Vec::new();
    for n in 1..=limit {
        let mut found = None;
        mask::for_each_model(n, class, var_count, |relation, truth| {
            let succ = mask::successor_masks(n, relation);
            let ext = compiled.eval(&succ, truth, &mut scratch);
            if ext != 0 {
                found = Some((relation, truth.to_vec(), ext.trailing_zeros() as World));
                return false;
            }
            true
        });
        if let Some((relation, truth, world)) = found {
            let model = mask::model_from_masks(n, relation, compiled.vars(), &truth);
            debug_assert!(verify_witness(f, class, &model, world));
            return SatResult::Sat { model, world };
        }
    }
    if limit as u64 >= bound {
        SatResult::Unsat(UnsatMethod::BoundExhaustedComplete)
    } else {
        SatResult::Inconclusive {
            worlds_searched: limit,
            complete_bound: bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn decide(s: &str, c: FrameClass) -> SatResult {
        sat_decide(&f(s), c, Budget::default()).unwrap()
    }

    #[test]
    fn bruteforce_examples() {
        let g = f("p1 & []~p1");
        assert_eq!(filtration_bound(&g), 16);
        assert_eq!(
            sat_bruteforce(&g, FrameClass::T, 2),
            SatResult::Inconclusive { worlds_searched: 2, complete_bound: 16 }
        );

        let SatResult::Sat { model, world } = sat_bruteforce(&f("p1 & <>[]~p1"), FrameClass::K, 2) else {
            panic!("expected a witness");
        };
        assert_eq!(world, 0);
        assert_eq!(model.world_count(), 2);
        assert_eq!(model.frame().relation(), &[(0, 1)].into_iter().collect());
        assert_eq!(model.truth_set(1), [0].into());

        let SatResult::Sat { model, .. } = sat_bruteforce(&Formula::Top, FrameClass::K, 1) else {
            panic!("expected a witness");
        };
        assert_eq!(model.world_count(), 1);
        assert!(model.frame().relation().is_empty());
    }

    #[test]
    fn bruteforce_unsat_when_bound_reached() {
        // sub(false) = {false}: bound 2
        assert_eq!(
            sat_bruteforce(&Formula::Falsum, FrameClass::KTB, 2),
            SatResult::Unsat(UnsatMethod::BoundExhaustedComplete)
        );
    }

    #[test]
    fn decide_examples() {
        assert!(decide("[]false & <>true", FrameClass::K).is_unsat());
        assert!(decide("p1 & <>[]~p1", FrameClass::KB).is_unsat());
        assert!(decide("p1 & <>[]~p1", FrameClass::K).is_sat());
        assert!(decide("p1 & []~p1", FrameClass::T).is_unsat());
        assert!(decide("p1 & []~p1", FrameClass::KB).is_sat());
        assert!(decide("false", FrameClass::K).is_unsat());
        assert!(decide("[]false", FrameClass::KD).is_unsat());
        assert!(decide("[]false", FrameClass::KB).is_sat());
        assert!(decide("[]false", FrameClass::KDB).is_unsat());
        assert!(decide("<>[]false", FrameClass::KDB).is_unsat());
        assert!(decide("<>[]false", FrameClass::KB).is_unsat());
        assert!(decide("<>[]false", FrameClass::KD).is_unsat());
        assert!(decide("<>[]false", FrameClass::K).is_sat());
    }

    #[test]
    fn validity_examples() {
        let b = Budget::default();
        assert_eq!(valid(&f("[](p1 -> p1)"), FrameClass::K, b).unwrap(), Validity::Valid);
        assert_eq!(valid(&f("p1 -> []<>p1"), FrameClass::KB, b).unwrap(), Validity::Valid);
        assert_eq!(valid(&f("[]p1 -> p1"), FrameClass::T, b).unwrap(), Validity::Valid);
        assert_eq!(valid(&f("[]p1 -> <>p1"), FrameClass::KD, b).unwrap(), Validity::Valid);
        assert_eq!(valid(&f("[]p1 -> <>p1"), FrameClass::KDB, b).unwrap(), Validity::Valid);
        assert!(matches!(valid(&f("p1 -> []<>p1"), FrameClass::T, b).unwrap(), Validity::Invalid { .. }));
        assert!(matches!(valid(&f("[]p1 -> [][]p1"), FrameClass::KTB, b).unwrap(), Validity::Invalid { .. }));
        let Validity::Invalid { countermodel, world } = valid(&f("p1 -> []p1"), FrameClass::K, b).unwrap() else {
            panic!("expected a countermodel");
        };
        assert_eq!(countermodel.world_count(), 2);
        assert!(!countermodel.model_check(world, &f("p1 -> []p1")).unwrap());
    }

    #[test]
    fn budget_must_be_positive() {
        let b = Budget { max_nodes: 0, ..Budget::default() };
        assert_eq!(sat_decide(&Formula::Top, FrameClass::K, b), Err(DecideError::InvalidBudget));
    }

    #[test]
    fn tiny_budget_is_inconclusive() {
        let b = Budget { max_nodes: 3, ..Budget::default() };
        let r = sat_decide(&f("<>p1 & <>p2 & [](p1 | p2) & <><>~p1"), FrameClass::K, b).unwrap();
        assert!(matches!(r, SatResult::Inconclusive { .. }));
        let b = Budget { max_worlds: 1, ..Budget::default() };
        let r = sat_decide(&f("<>p1"), FrameClass::K, b).unwrap();
        assert!(matches!(r, SatResult::Inconclusive { .. }));
    }
}
