//! The one-sided and symmetrized Lipschitz metrics on Outer space,
//! computed exactly over the candidate loops of the source graph.
//!
//! Distances are stored multiplicatively as exact rationals; logarithms
//! appear only in reports.

use crate::candidates::candidates;
use crate::error::{Error, Result};
use crate::graph::MarkedGraph;
use crate::words::ConjClass;
use crate::Rational;

/// Multiplicative stretch factor `exp(d_L)` with an attaining witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stretch {
    pub value: Rational,
    pub witness: ConjClass,
}

impl Stretch {
    pub fn log(&self) -> f64 {
        crate::to_f64(&self.value).ln()
    }
}

/// `exp(d_L(S, T))`: the maximal length ratio over candidates of `S`.
pub fn lipschitz_stretch(s: &MarkedGraph, t: &MarkedGraph) -> Result<Stretch> {
    if s.rank() != t.rank() {
        return Err(Error::RankMismatch(s.rank(), t.rank()));
    }
    let mut best: Option<Stretch> = None;
    for c in candidates(s).classes() {
        let ratio = t.translation_length(c)? / s.translation_length(c)?;
        if best.as_ref().is_none_or(|b| ratio > b.value) {
            best = Some(Stretch {
                value: ratio,
                witness: c.clone(),
            });
        }
    }
    best.ok_or_else(|| Error::invalid("empty candidate set"))
}

/// Exact pair of stretch factors; the symmetrized distance is the log of
/// their product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymDistance {
    pub forward: Stretch,
    pub backward: Stretch,
}

impl SymDistance {
    /// `exp(d(S, T))` as an exact rational.
    pub fn exp_value(&self) -> Rational {
        &self.forward.value * &self.backward.value
    }

    pub fn log(&self) -> f64 {
        crate::to_f64(&self.exp_value()).ln()
    }

    pub fn is_zero(&self) -> bool {
        use num::One;
        self.forward.value.is_one() && self.backward.value.is_one()
    }
}

pub fn sym_distance(s: &MarkedGraph, t: &MarkedGraph) -> Result<SymDistance> {
    Ok(SymDistance {
        forward: lipschitz_stretch(s, t)?,
        backward: lipschitz_stretch(t, s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::Automorphism;
    use crate::graph::{marked_isometric, rose, standard_rose, theta};
    use crate::ratio;
    use crate::words::enumerate_classes;
    use num::One;

    #[test]
    fn identity_stretch_is_one() {
        let t = standard_rose(2);
        let s = lipschitz_stretch(&t, &t).unwrap();
        assert!(s.value.is_one());
        assert!(sym_distance(&t, &t).unwrap().is_zero());
    }

    #[test]
    fn two_roses_stretch_pair() {
        let s = rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let t = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let fwd = lipschitz_stretch(&s, &t).unwrap();
        assert_eq!(fwd.value, ratio(4, 3));
        assert_eq!(fwd.witness.to_string(), "b");
        let bwd = lipschitz_stretch(&t, &s).unwrap();
        assert_eq!(bwd.value, ratio(3, 2));
        assert_eq!(bwd.witness.to_string(), "a");
        let d = sym_distance(&s, &t).unwrap();
        assert_eq!(d.exp_value(), ratio(2, 1));
        // symmetry
        assert_eq!(sym_distance(&t, &s).unwrap().exp_value(), d.exp_value());
    }

    #[test]
    fn candidate_oracle_equivalence_small() {
        // sup over all classes of word length <= 8 equals the candidate max
        let s = rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let t = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let cand = lipschitz_stretch(&s, &t).unwrap().value;
        let mut best = ratio(0, 1);
        for c in enumerate_classes(2, 8) {
            if c.is_trivial() {
                continue;
            }
            let r = t.translation_length(&c).unwrap() / s.translation_length(&c).unwrap();
            if r > best {
                best = r;
            }
        }
        assert_eq!(best, cand);
    }

    #[test]
    fn theta_vs_rose_oracle() {
        let s = theta([ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap();
        let t = rose(2, vec![ratio(2, 5), ratio(3, 5)]).unwrap();
        for (x, y) in [(&s, &t), (&t, &s)] {
            let cand = lipschitz_stretch(x, y).unwrap().value;
            let mut best = ratio(0, 1);
            for c in enumerate_classes(2, 8) {
                if c.is_trivial() {
                    continue;
                }
                let r = y.translation_length(&c).unwrap() / x.translation_length(&c).unwrap();
                if r > best {
                    best = r;
                }
            }
            assert_eq!(best, cand);
            assert!(cand >= ratio(1, 1));
        }
    }

    #[test]
    fn act_is_isometric() {
        let s = rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let t = theta([ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap();
        let phi = Automorphism::parse(&["ab", "a"], &["b", "Ba"]).unwrap();
        let d0 = sym_distance(&s, &t).unwrap();
        let d1 = sym_distance(&s.act(&phi).unwrap(), &t.act(&phi).unwrap()).unwrap();
        assert_eq!(d0.exp_value(), d1.exp_value());
    }

    #[test]
    fn zero_distance_iff_marked_isometric() {
        let s = rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let inner = crate::aut::inner_by(&crate::words::Word::parse("ab", 2).unwrap());
        let t = s.act(&inner).unwrap();
        let d = sym_distance(&s, &t).unwrap();
        assert!(d.is_zero());
        assert!(marked_isometric(&s, &t));
        let u = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert!(!sym_distance(&s, &u).unwrap().is_zero());
        assert!(!marked_isometric(&s, &u));
    }
}
