use std::collections::BTreeMap;

use super::Formula;

/// A finite map from variable indices to formulas, identity elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<u32, Formula>,
}

impl Substitution {
    pub fn identity() -> Self {
        Substitution::default()
    }

    pub fn with(mut self, var: u32, image: Formula) -> Self {
        self.insert(var, image);
        self
    }

    pub fn insert(&mut self, var: u32, image: Formula) {
        self.map.insert(var, image);
    }

    pub fn get(&self, var: u32) -> Option<&Formula> {
        self.map.get(&var)
    }

    pub fn domain(&self) -> impl Iterator<Item = u32> + '_ {
        self.map.keys().copied()
    }

    /// Simultaneously replaces every `Var(i)` in `f` by the image of `i`.
    pub fn apply(&self, f: &Formula) -> Formula {
        match f {
            Formula::Var(i) => self.map.get(i).cloned().unwrap_or(Formula::Var(*i)),
            Formula::Falsum => Formula::Falsum,
            Formula::Top => Formula::Top,
            Formula::Not(a) => Formula::not(self.apply(a)),
            Formula::Box(a) => Formula::boxed(self.apply(a)),
            Formula::Diamond(a) => Formula::diamond(self.apply(a)),
            Formula::Implies(a, b) => Formula::implies(self.apply(a), self.apply(b)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| self.apply(x)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| self.apply(x)).collect()),
        }
    }

    /// `self` after `first`: applying the result equals applying `first`
    /// and then `self`.
    pub fn after(&self, first: &Substitution) -> Substitution {
        let mut map: BTreeMap<u32, Formula> = first
            .map
            .iter()
            .map(|(v, img)| (*v, self.apply(img)))
            .collect();
        for (v, img) in &self.map {
            map.entry(*v).or_insert_with(|| img.clone());
        }
        Substitution { map }
    }
}

impl FromIterator<(u32, Formula)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (u32, Formula)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Shorthand for `s.apply(f)`.
pub fn substitute(f: &Formula, s: &Substitution) -> Formula {
    s.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> Formula {
        Formula::var(i)
    }

    #[test]
    fn replaces_under_box() {
        let s = Substitution::identity().with(1, Formula::and2(p(2), p(3)));
        assert_eq!(
            s.apply(&Formula::boxed(p(1))),
            Formula::boxed(Formula::and2(p(2), p(3)))
        );
    }

    #[test]
    fn identity_is_identity() {
        let f = Formula::implies(Formula::diamond(p(1)), Formula::Or(vec![p(2), Formula::Top]));
        assert_eq!(Substitution::identity().apply(&f), f);
    }

    #[test]
    fn simultaneous_replacement() {
        let s = Substitution::identity()
            .with(1, Formula::Falsum)
            .with(2, Formula::Falsum);
        assert_eq!(
            s.apply(&Formula::implies(p(1), p(2))),
            Formula::implies(Formula::Falsum, Formula::Falsum)
        );
        let swap = Substitution::identity().with(1, p(2)).with(2, p(1));
        assert_eq!(swap.apply(&Formula::and2(p(1), p(2))), Formula::and2(p(2), p(1)));
    }
}
