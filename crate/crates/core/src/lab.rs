//! Experiment catalog and laboratory: Schottky subgroup construction with a
//! certified freeness check, orbit quasi-isometry experiments, reproducible
//! experiment configs, and structured-text/CSV report rendering.

use crate::aut::{iwip_heuristic, Automorphism};
use crate::error::{Error, Result};
use crate::factorgraph::upsilon;
use crate::graph::MarkedGraph;
use crate::laminations::{fills_certificate, iwip_laminations, IwipAxisSpec};
use crate::lipschitz::sym_distance;
use crate::words::ConjClass;
use crate::Rational;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

/// Depth of the Dirac approximations used for the fixed-lamination
/// independence check in `schottky_build`.
const FIXED_LAMINATION_DEPTH: u32 = 5;

/// A formal reduced word in two generators and their inverses, coded
/// `1, -1, 2, -2`.
pub type GenWord = Vec<i8>;

pub fn gen_word_to_string(w: &[i8]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|&s| match s {
            1 => 'g',
            -1 => 'G',
            2 => 'h',
            _ => 'H',
        })
        .collect()
}

/// Outcome of the bounded freeness check on `{g, h}` in `Out(F_n)`.
#[derive(Clone, Debug)]
pub enum FreenessVerdict {
    /// every pair of distinct reduced words of length <= bound is distinct
    FreeUpTo { bound: usize },
    /// a nonempty reduced word representing an inner automorphism
    Relation { word: GenWord },
}

impl FreenessVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, FreenessVerdict::FreeUpTo { .. })
    }
}

fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = a.len();
    let mut c = vec![vec![0i128; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn mat_identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn abelianization_i128(phi: &Automorphism) -> Vec<Vec<i128>> {
    phi.abelianization()
        .into_iter()
        .map(|row| row.into_iter().map(i128::from).collect())
        .collect()
}

/// All reduced words of length <= `bound` in `{g, h}^{±1}` are pairwise
/// distinct in `Out(F_n)` iff no nonempty reduced word of length <= `2·bound`
/// is inner. Homology separates first (inner automorphisms act trivially on
/// `H_1`); only words whose abelianization is the identity matrix are
/// escalated to the exact inner-ness decision.
pub fn free_up_to(g: &Automorphism, h: &Automorphism, bound: usize) -> Result<FreenessVerdict> {
    if g.rank() != h.rank() {
        return Err(Error::RankMismatch(g.rank(), h.rank()));
    }
    let n = g.rank() as usize;
    let gens = [g.clone(), g.inverse(), h.clone(), h.inverse()];
    let mats = [
        abelianization_i128(&gens[0]),
        abelianization_i128(&gens[1]),
        abelianization_i128(&gens[2]),
        abelianization_i128(&gens[3]),
    ];
    let codes: [i8; 4] = [1, -1, 2, -2];
    let id = mat_identity(n);
    // DFS over reduced words, product matrices maintained incrementally
    let mut stack: Vec<(GenWord, Vec<Vec<i128>>)> = vec![(Vec::new(), id.clone())];
    while let Some((word, mat)) = stack.pop() {
        if !word.is_empty() && mat == id {
            // homology cannot separate; decide exactly
            let mut aut = Automorphism::identity(g.rank());
            for &s in &word {
                let idx = codes.iter().position(|&c| c == s).unwrap();
                aut = aut.compose(&gens[idx])?;
            }
            if aut.is_inner().is_inner() {
                return Ok(FreenessVerdict::Relation { word });
            }
        }
        if word.len() < 2 * bound {
            for (idx, &code) in codes.iter().enumerate() {
                if word.last().is_some_and(|&l| l == -code) {
                    continue; // not reduced
                }
                let mut w = word.clone();
                w.push(code);
                stack.push((w, mat_mul(&mat, &mats[idx])));
            }
        }
    }
    Ok(FreenessVerdict::FreeUpTo { bound })
}

/// A candidate Schottky pair: powers of two heuristically-iwip automorphisms
/// whose fixed laminations pass the pairwise fills (independence) check, with
/// the bounded freeness verdict attached.
#[derive(Clone, Debug)]
pub struct SchottkySpec {
    pub phi: Automorphism,
    pub psi: Automorphism,
    pub k: u32,
    /// the generators `φ^k` and `ψ^k`
    pub gen1: Automorphism,
    pub gen2: Automorphism,
    pub freeness_bound: usize,
    pub freeness: FreenessVerdict,
}

impl SchottkySpec {
    pub fn generator(&self, code: i8) -> &Automorphism {
        match code {
            1 => &self.gen1,
            2 => &self.gen2,
            _ => unreachable!("generator codes are 1 and 2"),
        }
    }

    /// The automorphism represented by a formal reduced word.
    pub fn word_automorphism(&self, word: &[i8]) -> Result<Automorphism> {
        let mut aut = Automorphism::identity(self.phi.rank());
        for &s in word {
            let g = self.generator(s.abs());
            let g = if s < 0 { g.inverse() } else { g.clone() };
            aut = aut.compose(&g)?;
        }
        Ok(aut)
    }
}

/// Build a Schottky spec: check the iwip heuristic for both generators,
/// certify pairwise fills of the four approximated fixed laminations, then
/// run the bounded freeness check on `{φ^k, ψ^k}`.
pub fn schottky_build(
    phi: &Automorphism,
    psi: &Automorphism,
    k: u32,
    bound: usize,
) -> Result<SchottkySpec> {
    if k == 0 {
        return Err(Error::invalid("power k = 0 gives the identity generator"));
    }
    if phi.rank() != psi.rank() {
        return Err(Error::RankMismatch(phi.rank(), psi.rank()));
    }
    for (name, a) in [("phi", phi), ("psi", psi)] {
        if !iwip_heuristic(a).passed() {
            return Err(Error::invalid(format!(
                "{name} fails the iwip heuristic"
            )));
        }
    }
    // four approximated fixed laminations, pairwise fills required
    let seed = ConjClass::parse("a", phi.rank())?;
    let sp = IwipAxisSpec::new(phi.clone(), seed.clone(), FIXED_LAMINATION_DEPTH)?;
    let sq = IwipAxisSpec::new(psi.clone(), seed, FIXED_LAMINATION_DEPTH)?;
    let (mu_p, nu_p) = iwip_laminations(&sp)?;
    let (mu_q, nu_q) = iwip_laminations(&sq)?;
    let lams = [("mu_phi", &mu_p), ("nu_phi", &nu_p), ("mu_psi", &mu_q), ("nu_psi", &nu_q)];
    for i in 0..4 {
        for j in i + 1..4 {
            if !fills_certificate(lams[i].1, lams[j].1)?.is_certified() {
                return Err(Error::invalid(format!(
                    "fixed laminations {} and {} do not fill",
                    lams[i].0, lams[j].0
                )));
            }
        }
    }
    let gen1 = phi.pow(k as i64);
    let gen2 = psi.pow(k as i64);
    let freeness = free_up_to(&gen1, &gen2, bound)?;
    Ok(SchottkySpec {
        phi: phi.clone(),
        psi: psi.clone(),
        k,
        gen1,
        gen2,
        freeness_bound: bound,
        freeness,
    })
}

/// One orbit point of the experiment.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    pub word: GenWord,
    pub len: usize,
    /// symmetrized distance d(T, gT)
    pub d: f64,
    /// shadow separation verdict for |g| >= shadow_min_len
    pub shadow_fills: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub bound: usize,
    pub points: Vec<OrbitPoint>,
    /// least-squares slope of d against |g| (identity excluded)
    pub c_lower: f64,
    /// intercept shift making `d >= c·|g| − c′` hold at every point
    pub c_prime: f64,
    /// root-mean-square residual of the least-squares fit
    pub residual: f64,
    /// max over points of d/|g|
    pub upper_slope: f64,
    pub shadow_min_len: usize,
    pub shadow_checked: usize,
    pub shadow_fills: usize,
}

impl OrbitReport {
    pub fn shadow_fraction(&self) -> f64 {
        if self.shadow_checked == 0 {
            return 0.0;
        }
        self.shadow_fills as f64 / self.shadow_checked as f64
    }
}

fn reduced_words(bound: usize) -> Vec<GenWord> {
    let codes: [i8; 4] = [1, -1, 2, -2];
    let mut out: Vec<GenWord> = vec![Vec::new()];
    let mut frontier: Vec<GenWord> = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in &codes {
                if w.last().is_some_and(|&l| l == -c) {
                    continue;
                }
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Orbit quasi-isometry experiment: for every reduced word `g` of length at
/// most `bound`, measure `d(T, gT)`, fit the lower-bound line
/// `d >= c·|g| − c′`, and for words with `|g| >= shadow_min_len` run the
/// shadow separation test between `Υ(T)` and `Υ(gT)`.
pub fn orbit_qi_experiment(
    spec: &SchottkySpec,
    t: &MarkedGraph,
    bound: usize,
    shadow_min_len: usize,
) -> Result<OrbitReport> {
    if !spec.freeness.is_free() {
        return Err(Error::invalid(
            "spec carries a relation witness; orbit experiment requires free-at-(k, L)",
        ));
    }
    t.validate()?;
    let base_shadow = upsilon(t)?;
    let mut points = Vec::new();
    for word in reduced_words(bound) {
        let len = word.len();
        let aut = spec.word_automorphism(&word)?;
        let gt = t.act(&aut)?;
        let d = sym_distance(t, &gt)?.log();
        let shadow_fills = if len >= shadow_min_len {
            let s = upsilon(&gt)?;
            Some(if s.class == base_shadow.class {
                false
            } else {
                crate::factorgraph::ff_leq2(&base_shadow.class, &s.class)?.is_at_least_three()
            })
        } else {
            None
        };
        points.push(OrbitPoint {
            word,
            len,
            d,
            shadow_fills,
        });
    }
    // least-squares fit over the non-identity points
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.len > 0)
        .map(|p| (p.len as f64, p.d))
        .collect();
    let n = fit.len() as f64;
    let sx: f64 = fit.iter().map(|(x, _)| x).sum();
    let sy: f64 = fit.iter().map(|(_, y)| y).sum();
    let sxx: f64 = fit.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = fit.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let c_lower = if denom.abs() > 0.0 {
        (n * sxy - sx * sy) / denom
    } else {
        0.0
    };
    let intercept = (sy - c_lower * sx) / n;
    let residual = (fit
        .iter()
        .map(|(x, y)| {
            let e = y - (c_lower * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let c_prime = fit
        .iter()
        .map(|(x, y)| c_lower * x - y)
        .fold(0.0f64, f64::max);
    let upper_slope = fit.iter().map(|(x, y)| y / x).fold(0.0f64, f64::max);
    let shadow_checked = points.iter().filter(|p| p.shadow_fills.is_some()).count();
    let shadow_fills = points
        .iter()
        .filter(|p| p.shadow_fills == Some(true))
        .count();
    Ok(OrbitReport {
        bound,
        points,
        c_lower,
        c_prime,
        residual,
        upper_slope,
        shadow_min_len,
        shadow_checked,
        shadow_fills,
    })
}

/// A fully reproducible experiment configuration; every field is echoed into
/// the reports and the hash of the serialized form identifies a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub rank: u8,
    pub eps: Rational,
    /// lamination approximation depth m
    pub depth: u32,
    pub grid: Vec<Rational>,
    pub b: Rational,
    pub samples: usize,
    pub seed: u64,
    /// Schottky power
    pub k: u32,
    /// freeness check bound L
    pub l_free: usize,
    /// orbit word length bound
    pub l_orbit: usize,
}

impl ExperimentConfig {
    pub fn golden() -> ExperimentConfig {
        ExperimentConfig {
            name: "golden".into(),
            rank: 2,
            eps: crate::ratio(1, 20),
            depth: 8,
            grid: (-8..=8).map(|i| crate::ratio(i, 2)).collect(),
            b: crate::ratio(20, 1),
            samples: 200,
            seed: 2024,
            k: 4,
            l_free: 6,
            l_orbit: 4,
        }
    }

    /// The catalog automorphism pair for this config's rank.
    pub fn automorphisms(&self) -> Result<(Automorphism, Automorphism)> {
        catalog_pair(self.rank)
    }

    pub fn to_text(&self) -> String {
        let grid = self
            .grid
            .iter()
            .map(crate::graph::rational_to_string)
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "name = {}\nrank = {}\neps = {}\ndepth = {}\ngrid = {}\nB = {}\nsamples = {}\nseed = {}\nk = {}\nL_free = {}\nL_orbit = {}\n",
            self.name,
            self.rank,
            crate::graph::rational_to_string(&self.eps),
            self.depth,
            grid,
            crate::graph::rational_to_string(&self.b),
            self.samples,
            self.seed,
            self.k,
            self.l_free,
            self.l_orbit,
        )
    }

    pub fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::golden();
        let mut seen = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::invalid(format!("line {}: bad {what}", lineno + 1));
            match key {
                "name" => cfg.name = value.to_string(),
                "rank" => cfg.rank = value.parse().map_err(|_| bad("rank"))?,
                "eps" => cfg.eps = crate::graph::rational_from_string(value)?,
                "depth" => cfg.depth = value.parse().map_err(|_| bad("depth"))?,
                "grid" => {
                    cfg.grid = value
                        .split(',')
                        .map(|s| crate::graph::rational_from_string(s.trim()))
                        .collect::<Result<_>>()?
                }
                "B" => cfg.b = crate::graph::rational_from_string(value)?,
                "samples" => cfg.samples = value.parse().map_err(|_| bad("samples"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "k" => cfg.k = value.parse().map_err(|_| bad("k"))?,
                "L_free" => cfg.l_free = value.parse().map_err(|_| bad("L_free"))?,
                "L_orbit" => cfg.l_orbit = value.parse().map_err(|_| bad("L_orbit"))?,
                _ => return Err(Error::invalid(format!("line {}: unknown key {key}", lineno + 1))),
            }
            seen.push(key.to_string());
        }
        if !seen.contains(&"name".to_string()) {
            return Err(Error::invalid("config must set a name"));
        }
        Ok(cfg)
    }

    /// Hex digest identifying this configuration.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        hex::encode(&h.finalize()[..8])
    }
}

/// The shipped catalog automorphism pair: `ψ = τ φ τ⁻¹` so the two fixed
/// lamination pairs are genuinely different while sharing the expansion rate.
pub fn catalog_pair(rank: u8) -> Result<(Automorphism, Automorphism)> {
    match rank {
        2 => {
            let phi = Automorphism::golden();
            let tau = Automorphism::parse(&["a", "ab"], &["a", "Ab"])?;
            let psi = tau.compose(&phi)?.compose(&tau.inverse())?;
            Ok((phi, psi))
        }
        3 => {
            let phi = Automorphism::parse(&["ab", "c", "a"], &["c", "Ca", "b"])?;
            let tau = Automorphism::parse(&["a", "ab", "c"], &["a", "Ab", "c"])?;
            let psi = tau.compose(&phi)?.compose(&tau.inverse())?;
            Ok((phi, psi))
        }
        _ => Err(Error::invalid("catalog covers ranks 2 and 3")),
    }
}

/// Structured-text rendering of an orbit report (deterministic; no
/// timestamps).
pub fn render_orbit_report(cfg: &ExperimentConfig, spec: &SchottkySpec, rep: &OrbitReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# orbit quasi-isometry experiment");
    let _ = writeln!(s, "config_hash = {}", cfg.hash());
    s.push_str(&cfg.to_text());
    let _ = writeln!(
        s,
        "freeness = {}",
        match &spec.freeness {
            FreenessVerdict::FreeUpTo { bound } => format!("free-at-(k={}, L={bound})", spec.k),
            FreenessVerdict::Relation { word } =>
                format!("relation {}", gen_word_to_string(word)),
        }
    );
    let _ = writeln!(s, "words = {}", rep.points.len());
    let _ = writeln!(s, "c_lower = {:.6}", rep.c_lower);
    let _ = writeln!(s, "c_prime = {:.6}", rep.c_prime);
    let _ = writeln!(s, "fit_residual = {:.6}", rep.residual);
    let _ = writeln!(s, "upper_slope = {:.6}", rep.upper_slope);
    let _ = writeln!(
        s,
        "shadow_fills = {}/{} (min length {})",
        rep.shadow_fills, rep.shadow_checked, rep.shadow_min_len
    );
    s
}

/// CSV of the orbit points: word, length, distance, shadow verdict.
pub fn orbit_csv(rep: &OrbitReport) -> String {
    let mut s = String::from("word,length,d,shadow_fills\n");
    for p in &rep.points {
        let _ = writeln!(
            s,
            "{},{},{:.9},{}",
            gen_word_to_string(&p.word),
            p.len,
            p.d,
            match p.shadow_fills {
                Some(true) => "yes",
                Some(false) => "no",
                None => "",
            }
        );
    }
    s
}

/// CSV of a line of minima: grid value, minimum, balance weight.
pub fn axis_csv(gamma: &crate::minima::LineOfMinima) -> String {
    let mut s = String::from("t,min_value,weight_mu,weight_nu\n");
    for i in 0..gamma.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            crate::graph::rational_to_string(&gamma.grid[i]),
            crate::graph::rational_to_string(&gamma.values[i]),
            crate::graph::rational_to_string(&gamma.weights[i].0),
            crate::graph::rational_to_string(&gamma.weights[i].1),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_zero_rejected() {
        let (phi, psi) = catalog_pair(2).unwrap();
        assert!(schottky_build(&phi, &psi, 0, 2).is_err());
    }

    #[test]
    fn inverse_pair_has_relation_at_length_two() {
        let phi = Automorphism::golden();
        match free_up_to(&phi, &phi.inverse(), 1).unwrap() {
            FreenessVerdict::Relation { word } => assert_eq!(word.len(), 2),
            v => panic!("expected a relation, got {v:?}"),
        }
    }

    #[test]
    fn catalog_pair_is_free_at_small_bound() {
        let (phi, psi) = catalog_pair(2).unwrap();
        let spec = schottky_build(&phi, &psi, 4, 2).unwrap();
        assert!(spec.freeness.is_free(), "{:?}", spec.freeness);
        // monotone: free at L implies free at L' <= L
        assert!(free_up_to(&spec.gen1, &spec.gen2, 1).unwrap().is_free());
    }

    #[test]
    fn orbit_experiment_small_bound() {
        let (phi, psi) = catalog_pair(2).unwrap();
        let spec = schottky_build(&phi, &psi, 2, 2).unwrap();
        let t = crate::graph::standard_rose(2);
        let rep = orbit_qi_experiment(&spec, &t, 2, 3).unwrap();
        // identity excluded from the fit, d = 0 there
        let id = rep.points.iter().find(|p| p.len == 0).unwrap();
        assert_eq!(id.d, 0.0);
        // every length-1 orbit point moves the rose
        for p in rep.points.iter().filter(|p| p.len == 1) {
            assert!(p.d > 0.0, "word {} fixed T", gen_word_to_string(&p.word));
        }
        assert!(rep.c_lower > 0.0, "slope {}", rep.c_lower);
        assert_eq!(rep.points.len(), 1 + 4 + 12);
        // lower-bound line actually bounds every point
        for p in rep.points.iter().filter(|p| p.len > 0) {
            assert!(p.d >= rep.c_lower * p.len as f64 - rep.c_prime - 1e-12);
        }
    }

    #[test]
    fn config_roundtrip_and_hash() {
        let cfg = ExperimentConfig::golden();
        let back = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        assert!(ExperimentConfig::from_text("nonsense").is_err());
        assert!(ExperimentConfig::from_text("frobnicate = 3\nname = x").is_err());
    }

    #[test]
    fn rank3_catalog_passes_iwip_heuristic() {
        let (phi, psi) = catalog_pair(3).unwrap();
        assert!(iwip_heuristic(&phi).passed());
        assert!(iwip_heuristic(&psi).passed());
    }
}
