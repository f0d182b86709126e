//! Rational measured laminations: finitely supported positive weightings of
//! conjugacy classes, the length pairing with marked graphs, finite-depth
//! approximations of iwip fixed laminations, positivity ("fills") proxies,
//! and the balance parameter.

use crate::aut::{iwip_heuristic, Automorphism};
use crate::error::{Error, Result};
use crate::graph::{standard_rose, MarkedGraph};
use crate::whitehead::{common_proper_factor, FactorVerdict};
use crate::words::ConjClass;
use crate::Rational;
use num::Signed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalLamination {
    rank: u8,
    /// canonical classes with positive weights, sorted, no duplicates
    support: Vec<(ConjClass, Rational)>,
}

impl RationalLamination {
    pub fn new(support: Vec<(ConjClass, Rational)>, rank: u8) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("empty lamination"));
        }
        let mut support = support;
        support.sort_by_key(|(c, _)| c.order_key());
        for (c, w) in &support {
            if c.is_trivial() {
                return Err(Error::invalid("trivial class in support"));
            }
            if c.rank() != rank {
                return Err(Error::RankMismatch(rank, c.rank()));
            }
            if !w.is_positive() {
                return Err(Error::invalid("non-positive weight"));
            }
        }
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("duplicate class in support"));
        }
        Ok(RationalLamination { rank, support })
    }

    /// A single Dirac mass.
    pub fn dirac(class: ConjClass) -> Result<Self> {
        let rank = class.rank();
        RationalLamination::new(vec![(class, Rational::from_integer(1.into()))], rank)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn support(&self) -> &[(ConjClass, Rational)] {
        &self.support
    }

    pub fn classes(&self) -> impl Iterator<Item = &ConjClass> {
        self.support.iter().map(|(c, _)| c)
    }

    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        RationalLamination::new(
            self.support
                .iter()
                .map(|(cl, w)| (cl.clone(), w * c))
                .collect(),
            self.rank,
        )
    }

    /// Push every support class through `phi` (the action `phi · mu`).
    pub fn map(&self, phi: &Automorphism) -> Result<Self> {
        if phi.rank() != self.rank {
            return Err(Error::RankMismatch(self.rank, phi.rank()));
        }
        let mut out: Vec<(ConjClass, Rational)> = Vec::new();
        for (c, w) in &self.support {
            let img = phi.apply_class(c);
            match out.iter_mut().find(|(k, _)| *k == img) {
                Some((_, wk)) => *wk += w,
                None => out.push((img, w.clone())),
            }
        }
        RationalLamination::new(out, self.rank)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.rank != self.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut out = self.support.clone();
        for (c, w) in &other.support {
            match out.iter_mut().find(|(k, _)| k == c) {
                Some((_, wk)) => *wk += w,
                None => out.push((c.clone(), w.clone())),
            }
        }
        RationalLamination::new(out, self.rank)
    }
}

/// The length pairing `⟨T, μ⟩ = Σ w_i · ℓ_T(α_i)`.
pub fn pairing(t: &MarkedGraph, mu: &RationalLamination) -> Result<Rational> {
    if t.rank() != mu.rank() {
        return Err(Error::RankMismatch(t.rank(), mu.rank()));
    }
    let mut sum = Rational::from_integer(0.into());
    for (c, w) in mu.support() {
        sum += w * t.translation_length(c)?;
    }
    Ok(sum)
}

/// Normalize so the pairing with `t` is 1, i.e. project into Λ(T).
pub fn normalize_at(t: &MarkedGraph, mu: &RationalLamination) -> Result<RationalLamination> {
    let p = pairing(t, mu)?;
    mu.scale(&p.recip())
}

/// Finite-depth specification of an iwip axis: the attracting and repelling
/// fixed laminations truncated at depth `m`.
#[derive(Clone, Debug)]
pub struct IwipAxisSpec {
    pub phi: Automorphism,
    pub seed: ConjClass,
    pub depth: u32,
    /// ℓ_{T_0}(φ^m seed) / ℓ_{T_0}(φ^{m-1} seed) at the standard rose
    pub lambda_estimate: Rational,
}

impl IwipAxisSpec {
    pub fn new(phi: Automorphism, seed: ConjClass, depth: u32) -> Result<Self> {
        if !iwip_heuristic(&phi).passed() {
            return Err(Error::invalid(
                "automorphism fails the iwip heuristic",
            ));
        }
        if seed.is_trivial() {
            return Err(Error::invalid("trivial seed"));
        }
        if seed.rank() != phi.rank() {
            return Err(Error::RankMismatch(phi.rank(), seed.rank()));
        }
        let t0 = standard_rose(phi.rank());
        let m = depth.max(1) as i64;
        let hi = t0.translation_length(&phi.pow(m).apply_class(&seed))?;
        let lo = t0.translation_length(&phi.pow(m - 1).apply_class(&seed))?;
        let lambda_estimate = hi / lo;
        if lambda_estimate <= Rational::from_integer(1.into()) {
            return Err(Error::invalid("no expansion detected at this depth"));
        }
        Ok(IwipAxisSpec {
            phi,
            seed,
            depth,
            lambda_estimate,
        })
    }
}

/// Depth-`m` Dirac approximations `(μ_m, ν_m)` of the attracting and
/// repelling fixed laminations, each normalized to pairing 1 at the
/// standard rose.
pub fn iwip_laminations(
    spec: &IwipAxisSpec,
) -> Result<(RationalLamination, RationalLamination)> {
    let t0 = standard_rose(spec.phi.rank());
    let m = spec.depth as i64;
    let mu = RationalLamination::dirac(spec.phi.pow(m).apply_class(&spec.seed))?;
    let nu = RationalLamination::dirac(spec.phi.pow(-m).apply_class(&spec.seed))?;
    Ok((normalize_at(&t0, &mu)?, normalize_at(&t0, &nu)?))
}

/// Positivity proxy: the combined supports admit no common proper free
/// factor. A negative answer carries the containing factor as witness.
#[derive(Clone, Debug)]
pub enum FillsVerdict {
    Certified,
    NotCertified { factor: Vec<crate::words::Word> },
    Inconclusive,
}

impl FillsVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, FillsVerdict::Certified)
    }
}

pub fn fills_certificate(
    mu: &RationalLamination,
    nu: &RationalLamination,
) -> Result<FillsVerdict> {
    if mu.rank() != nu.rank() {
        return Err(Error::RankMismatch(mu.rank(), nu.rank()));
    }
    let mut combined: Vec<ConjClass> = mu.classes().cloned().collect();
    for c in nu.classes() {
        if !combined.contains(c) {
            combined.push(c.clone());
        }
    }
    Ok(match common_proper_factor(&combined)? {
        FactorVerdict::Fills => FillsVerdict::Certified,
        FactorVerdict::Contained { factor } => FillsVerdict::NotCertified { factor },
        FactorVerdict::Inconclusive => FillsVerdict::Inconclusive,
    })
}

/// The balance parameter `t` with `⟨T, e^{t/2}μ⟩ = ⟨T, e^{-t/2}ν⟩`, stored
/// multiplicatively: returns the exact rational `exp(t) = ⟨T,ν⟩/⟨T,μ⟩`.
pub fn balance_param_exp(
    t: &MarkedGraph,
    mu: &RationalLamination,
    nu: &RationalLamination,
) -> Result<Rational> {
    Ok(pairing(t, nu)? / pairing(t, mu)?)
}

/// The balance parameter as a logarithm, for reports.
pub fn balance_param(
    t: &MarkedGraph,
    mu: &RationalLamination,
    nu: &RationalLamination,
) -> Result<f64> {
    Ok(crate::to_f64(&balance_param_exp(t, mu, nu)?).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rose;
    use crate::ratio;
    use crate::words::Word;

    fn class(s: &str, r: u8) -> ConjClass {
        ConjClass::parse(s, r).unwrap()
    }

    fn golden_spec(m: u32) -> IwipAxisSpec {
        IwipAxisSpec::new(Automorphism::golden(), class("a", 2), m).unwrap()
    }

    #[test]
    fn pairing_arithmetic() {
        let t = rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let mu = RationalLamination::new(
            vec![(class("a", 2), ratio(1, 1)), (class("b", 2), ratio(2, 1))],
            2,
        )
        .unwrap();
        assert_eq!(pairing(&t, &mu).unwrap(), ratio(3, 2));
        // scaling
        let c = ratio(7, 3);
        assert_eq!(
            pairing(&t, &mu.scale(&c).unwrap()).unwrap(),
            c * ratio(3, 2)
        );
        // normalization into Λ(T)
        let nrm = normalize_at(&t, &mu).unwrap();
        assert_eq!(pairing(&t, &nrm).unwrap(), ratio(1, 1));
    }

    #[test]
    fn pairing_action_convention() {
        // pairing(act(T, φ), μ) = pairing(T, φ·μ)
        let t = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let phi = Automorphism::golden();
        let mu = RationalLamination::new(
            vec![(class("ab", 2), ratio(1, 2)), (class("a", 2), ratio(3, 1))],
            2,
        )
        .unwrap();
        assert_eq!(
            pairing(&t.act(&phi).unwrap(), &mu).unwrap(),
            pairing(&t, &mu.map(&phi).unwrap()).unwrap()
        );
    }

    #[test]
    fn iwip_laminations_depth_one() {
        // φ = (a→ab, b→a): μ_1 ∝ δ_ab, ν_1 ∝ δ_{φ⁻¹(a)} = δ_b
        let (mu, nu) = iwip_laminations(&golden_spec(1)).unwrap();
        assert_eq!(mu.support().len(), 1);
        assert_eq!(mu.support()[0].0, class("ab", 2));
        assert_eq!(nu.support()[0].0, class("b", 2));
        // normalized at the standard rose
        let t0 = standard_rose(2);
        assert_eq!(pairing(&t0, &mu).unwrap(), ratio(1, 1));
        assert_eq!(pairing(&t0, &nu).unwrap(), ratio(1, 1));
    }

    #[test]
    fn iwip_depth_zero_degenerate() {
        let spec = golden_spec(0);
        let (mu, nu) = iwip_laminations(&spec).unwrap();
        assert_eq!(mu.support()[0].0, class("a", 2));
        assert_eq!(nu.support()[0].0, class("a", 2));
    }

    #[test]
    fn fibonacci_word_lengths() {
        let phi = Automorphism::golden();
        let a = Word::parse("a", 2).unwrap();
        let expect = [1usize, 2, 3, 5, 8, 13, 21, 34, 55];
        for (m, &e) in expect.iter().enumerate() {
            assert_eq!(phi.pow(m as i64).apply(&a).len(), e, "depth {m}");
        }
    }

    #[test]
    fn fills_certificates() {
        let da = RationalLamination::dirac(class("a", 2)).unwrap();
        match fills_certificate(&da, &da).unwrap() {
            FillsVerdict::NotCertified { factor } => {
                assert_eq!(factor.len(), 1);
                assert_eq!(factor[0].to_string(), "a");
            }
            v => panic!("expected not-certified, got {v:?}"),
        }
        let comm = RationalLamination::dirac(class("abAB", 2)).unwrap();
        let dab = RationalLamination::dirac(class("ab", 2)).unwrap();
        assert!(fills_certificate(&comm, &dab).unwrap().is_certified());
        // golden pair at depth 3
        let (mu, nu) = iwip_laminations(&golden_spec(3)).unwrap();
        assert!(fills_certificate(&mu, &nu).unwrap().is_certified());
    }

    #[test]
    fn balance_parameter() {
        let t = standard_rose(2);
        let da = RationalLamination::dirac(class("a", 2)).unwrap();
        let db = RationalLamination::dirac(class("b", 2)).unwrap();
        assert_eq!(balance_param_exp(&t, &da, &db).unwrap(), ratio(1, 1));
        // pairing 1 vs 4 → exp(t) = 4
        let db4 = db.scale(&ratio(4, 1)).unwrap();
        assert_eq!(balance_param_exp(&t, &da, &db4).unwrap(), ratio(4, 1));
        // antisymmetry: exp flips to its reciprocal
        assert_eq!(
            balance_param_exp(&t, &db4, &da).unwrap(),
            ratio(1, 4)
        );
        // scaling law: μ → cμ multiplies exp(t) by 1/c
        let c = ratio(5, 2);
        assert_eq!(
            balance_param_exp(&t, &da.scale(&c).unwrap(), &db4).unwrap(),
            ratio(4, 1) / c
        );
    }

    #[test]
    fn golden_balance_stabilizes() {
        // successive depth ratios stay within [1/λ², λ²]
        let spec = golden_spec(8);
        let t0 = standard_rose(2);
        let lam2 = &spec.lambda_estimate * &spec.lambda_estimate;
        let mut prev: Option<Rational> = None;
        for m in 4..=8 {
            let (mu, nu) = iwip_laminations(&golden_spec(m)).unwrap();
            let e = balance_param_exp(&t0, &mu, &nu).unwrap();
            if let Some(p) = prev {
                let r = &e / &p;
                assert!(r <= lam2 && r >= lam2.recip(), "depth {m}: ratio {r}");
            }
            prev = Some(e);
        }
    }
}
