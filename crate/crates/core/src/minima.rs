//! The optimization core: exact per-simplex linear programs for the
//! ε-thick minimum of a length functional, local search across simplices
//! of Outer space, lines of minima, and the balancing projection.

use crate::candidates::embedded_circles;
use crate::error::{Error, Result};
use crate::graph::{standard_rose, MarkedGraph};
use crate::laminations::{balance_param_exp, fills_certificate, RationalLamination};
use crate::lipschitz::sym_distance;
use crate::lp::{solve, LpResult};
use crate::whitehead::whitehead_moves;
use crate::{dyadic_from_f64, to_f64, Rational};
use num::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// The restriction of `⟨·, μ⟩` over `Thick_ε` to one simplex of Outer
/// space: the topology and marking are fixed, the edge lengths vary.
#[derive(Clone, Debug)]
pub struct SimplexProgram {
    pub graph: MarkedGraph,
    /// objective coefficient per geometric edge (weighted occupancy counts)
    pub objective: Vec<Rational>,
    pub eps: Rational,
}

impl SimplexProgram {
    pub fn new(graph: &MarkedGraph, mu: &RationalLamination, eps: &Rational) -> Result<Self> {
        if graph.rank() != mu.rank() {
            return Err(Error::RankMismatch(graph.rank(), mu.rank()));
        }
        if !eps.is_positive() {
            return Err(Error::invalid("epsilon must be positive"));
        }
        let mut objective = vec![Rational::zero(); graph.num_edges()];
        for (c, w) in mu.support() {
            for (e, &k) in graph.occupancy(c)?.iter().enumerate() {
                if k > 0 {
                    objective[e] += w * Rational::from_integer(k.into());
                }
            }
        }
        Ok(SimplexProgram {
            graph: graph.clone(),
            objective,
            eps: eps.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexOutcome {
    Optimal {
        lengths: Vec<Rational>,
        value: Rational,
    },
    Infeasible,
}

/// Exact minimum of the objective over the closed simplex: volume one,
/// every embedded-circle length at least ε, edge lengths nonnegative
/// (faces with zero-length edges are admitted and handled by the caller).
pub fn simplex_min(prog: &SimplexProgram) -> Result<SimplexOutcome> {
    let ne = prog.graph.num_edges();
    let a_eq = vec![vec![Rational::one(); ne]];
    let b_eq = vec![Rational::one()];
    let mut a_ge = Vec::new();
    let mut b_ge = Vec::new();
    for circle in embedded_circles(&prog.graph) {
        let mut row = vec![Rational::zero(); ne];
        for e in circle {
            row[(e / 2) as usize] = Rational::one();
        }
        a_ge.push(row);
        b_ge.push(prog.eps.clone());
    }
    match solve(&a_eq, &b_eq, &a_ge, &b_ge, &prog.objective) {
        LpResult::Optimal { x, value } => Ok(SimplexOutcome::Optimal { lengths: x, value }),
        LpResult::Infeasible => Ok(SimplexOutcome::Infeasible),
        LpResult::Unbounded => Err(Error::invalid("bounded program reported unbounded")),
    }
}

/// Solve on the current simplex and walk through faces: zero-length edges
/// in the optimum are collapsed and the program re-solved, so the returned
/// graph is a valid point realizing the optimum value.
fn settle(
    mu: &RationalLamination,
    eps: &Rational,
    mut graph: MarkedGraph,
) -> Result<(MarkedGraph, Rational)> {
    loop {
        let prog = SimplexProgram::new(&graph, mu, eps)?;
        match simplex_min(&prog)? {
            SimplexOutcome::Infeasible => return Err(Error::Infeasible("epsilon too large for this topology".into())),
            SimplexOutcome::Optimal { lengths, value } => {
                if let Some(z) = lengths.iter().position(|l| l.is_zero()) {
                    // loops are embedded circles with length >= eps, so a
                    // zero edge is collapsible
                    graph = graph.collapse(z)?;
                    continue;
                }
                let graph = graph.with_lengths(lengths)?;
                return Ok((graph, value));
            }
        }
    }
}

/// Adjacent simplices: every one-edge collapse, every re-expansion of the
/// merged vertex, and (on roses) every Whitehead re-marking.
fn neighbors(g: &MarkedGraph) -> Vec<MarkedGraph> {
    let mut out = Vec::new();
    for e in 0..g.num_edges() {
        if g.is_loop(e) {
            continue;
        }
        if let Ok(c) = g.collapse(e) {
            for (u, side) in c.expansions() {
                if let Ok(x) = c.expand(u, &side, crate::ratio(1, 100)) {
                    out.push(x);
                }
            }
            out.push(c);
        }
    }
    if g.num_vertices() == 1 {
        for m in rose_remarkings(g.rank()) {
            if let Ok(x) = g.act(m) {
                out.push(x);
            }
        }
    }
    out
}

/// Re-marking moves for roses: Whitehead automorphisms of both kinds and,
/// in rank 2, all products of two of them (single type-II moves cannot
/// realize e.g. `a -> ab, b -> a`, which strands the descent on plateaus).
fn rose_remarkings(rank: u8) -> &'static [crate::aut::Automorphism] {
    use crate::aut::Automorphism;
    use std::collections::HashSet;
    use std::sync::OnceLock;
    static CACHE: [OnceLock<Vec<Automorphism>>; 2] = [OnceLock::new(), OnceLock::new()];
    assert!(rank == 2 || rank == 3, "supported ranks are 2 and 3");
    CACHE[(rank - 2) as usize].get_or_init(|| {
        let mut gens = whitehead_moves(rank);
        gens.extend(crate::whitehead::letter_symmetries(rank));
        let key = |a: &Automorphism| {
            a.images()
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut seen: HashSet<String> = HashSet::new();
        let mut out: Vec<Automorphism> = Vec::new();
        for m in &gens {
            if seen.insert(key(m)) {
                out.push(m.clone());
            }
        }
        if rank == 2 {
            for m1 in &gens {
                for m2 in &gens {
                    if let Ok(p) = m1.compose(m2) {
                        if !p.is_identity() && seen.insert(key(&p)) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    })
}

const SEARCH_STEP_CAP: usize = 200;

/// Local search for a point of `Min_ε(μ)`: exact descent over adjacent
/// simplices, terminating at a certified local minimum (no neighbor's
/// simplex optimum improves the value). Global optimality is not claimed.
pub fn min_search(
    mu: &RationalLamination,
    eps: &Rational,
    seed: &MarkedGraph,
) -> Result<(MarkedGraph, Rational)> {
    let (mut graph, mut value) = settle(mu, eps, seed.clone())?;
    for _ in 0..SEARCH_STEP_CAP {
        let mut best: Option<(MarkedGraph, Rational)> = None;
        for n in neighbors(&graph) {
            let prog = SimplexProgram::new(&n, mu, eps)?;
            if let SimplexOutcome::Optimal { value: v, .. } = simplex_min(&prog)? {
                if v < value && best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((n, v));
                }
            }
        }
        match best {
            None => return Ok((graph, value)),
            Some((n, _)) => {
                let (g2, v2) = settle(mu, eps, n)?;
                debug_assert!(v2 < value);
                graph = g2;
                value = v2;
            }
        }
    }
    Ok((graph, value))
}

/// A computed line of minima: one thick local minimum per grid parameter,
/// with the recorded dyadic weight approximations and the empirical
/// coarse-geodesic defect.
#[derive(Clone, Debug)]
pub struct LineOfMinima {
    pub mu: RationalLamination,
    pub nu: RationalLamination,
    pub eps: Rational,
    pub grid: Vec<Rational>,
    pub points: Vec<MarkedGraph>,
    pub values: Vec<Rational>,
    /// recorded approximations of (e^{t/2}, e^{-t/2}) per grid point
    pub weights: Vec<(Rational, Rational)>,
    /// max over grid pairs s<t of | d(γ(s),γ(t)) − |s−t| |
    pub kappa_emp: f64,
    /// the pair was not fills-certified
    pub positivity_warning: bool,
}

impl LineOfMinima {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn point(&self, i: usize) -> &MarkedGraph {
        &self.points[i]
    }
}

/// Dyadic approximation of `e^{t/2}` with relative error well below 2⁻⁴⁰.
pub fn half_exp_weights(t: &Rational) -> (Rational, Rational) {
    let tf = to_f64(t);
    (
        dyadic_from_f64((tf / 2.0).exp()),
        dyadic_from_f64((-tf / 2.0).exp()),
    )
}

pub fn line_of_minima(
    mu: &RationalLamination,
    nu: &RationalLamination,
    eps: &Rational,
    grid: &[Rational],
) -> Result<LineOfMinima> {
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    let positivity_warning = !fills_certificate(mu, nu)?.is_certified();
    let mut points = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    let mut weights = Vec::with_capacity(grid.len());
    let mut prev = standard_rose(mu.rank());
    for t in grid {
        let (wp, wm) = half_exp_weights(t);
        let objective = mu.scale(&wp)?.add(&nu.scale(&wm)?)?;
        let (point, value) = min_search(&objective, eps, &prev)?;
        prev = point.clone();
        points.push(point);
        values.push(value);
        weights.push((wp, wm));
    }
    let mut kappa_emp = 0.0f64;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let d = sym_distance(&points[i], &points[j])?.log();
            let gap = to_f64(&(&grid[j] - &grid[i]));
            kappa_emp = kappa_emp.max((d - gap).abs());
        }
    }
    Ok(LineOfMinima {
        mu: mu.clone(),
        nu: nu.clone(),
        eps: eps.clone(),
        grid: grid.to_vec(),
        points,
        values,
        weights,
        kappa_emp,
        positivity_warning,
    })
}

/// Result of projecting a tree to the axis grid.
#[derive(Clone, Debug)]
pub struct Projection {
    /// index of the chosen grid point
    pub index: usize,
    /// the chosen grid parameter
    pub t: Rational,
    /// exact `exp(t*)` of the true balance parameter
    pub t_star_exp: Rational,
    /// `t*` as a logarithm
    pub t_star: f64,
    /// `t*` fell outside the grid span
    pub clamped: bool,
}

/// The balancing projection, snapped to the nearest grid point (ties to
/// the smaller parameter).
pub fn balancing_projection(gamma: &LineOfMinima, t: &MarkedGraph) -> Result<Projection> {
    let t_star_exp = balance_param_exp(t, &gamma.mu, &gamma.nu)?;
    let t_star = to_f64(&t_star_exp).ln();
    let mut index = 0;
    let mut best = f64::INFINITY;
    for (i, g) in gamma.grid.iter().enumerate() {
        let d = (t_star - to_f64(g)).abs();
        if d < best {
            best = d;
            index = i;
        }
    }
    let clamped = t_star < to_f64(&gamma.grid[0]) - 1e-12
        || t_star > to_f64(gamma.grid.last().unwrap()) + 1e-12;
    Ok(Projection {
        index,
        t: gamma.grid[index].clone(),
        t_star_exp,
        t_star,
        clamped,
    })
}

// ---------------------------------------------------------------------------
// random points of Outer space (shared by the certification samplers)

/// A pseudo-random point: a catalog topology re-marked by a short random
/// composition of Whitehead moves, with random positive rational lengths.
pub fn random_point(rng: &mut ChaCha8Rng, rank: u8) -> MarkedGraph {
    let moves = whitehead_moves(rank);
    let mut g = match (rank, rng.random_range(0..3u8)) {
        (2, 1) => crate::graph::theta(random_lengths::<3>(rng)).unwrap(),
        (2, 2) => crate::graph::barbell(random_lengths::<3>(rng)).unwrap(),
        _ => {
            let ls = (0..rank as usize)
                .map(|_| Rational::from_integer((rng.random_range(1..9i64)).into()))
                .collect::<Vec<_>>();
            let tot: Rational = ls.iter().sum();
            crate::graph::rose(rank, ls.into_iter().map(|l| l / &tot).collect()).unwrap()
        }
    };
    for _ in 0..rng.random_range(0..4) {
        let m = &moves[rng.random_range(0..moves.len())];
        g = g.act(m).expect("action preserves validity");
    }
    g
}

fn random_lengths<const N: usize>(rng: &mut ChaCha8Rng) -> [Rational; N] {
    let raw: Vec<Rational> = (0..N)
        .map(|_| Rational::from_integer((rng.random_range(1..9i64)).into()))
        .collect();
    let tot: Rational = raw.iter().sum();
    let v: Vec<Rational> = raw.into_iter().map(|l| l / &tot).collect();
    v.try_into().unwrap()
}

/// Sample a point of `Bal(μ', ν')` (pairings equal) with the given topology
/// and marking: a feasibility LP with a random objective, edge lengths
/// bounded below to stay inside the simplex.
pub fn sample_balanced(
    rng: &mut ChaCha8Rng,
    template: &MarkedGraph,
    mu: &RationalLamination,
    nu: &RationalLamination,
) -> Result<Option<MarkedGraph>> {
    let ne = template.num_edges();
    let mut occ_mu = vec![Rational::zero(); ne];
    for (c, w) in mu.support() {
        for (e, &k) in template.occupancy(c)?.iter().enumerate() {
            occ_mu[e] += w * Rational::from_integer(k.into());
        }
    }
    let mut occ_nu = vec![Rational::zero(); ne];
    for (c, w) in nu.support() {
        for (e, &k) in template.occupancy(c)?.iter().enumerate() {
            occ_nu[e] += w * Rational::from_integer(k.into());
        }
    }
    let diff: Vec<Rational> = occ_mu
        .iter()
        .zip(&occ_nu)
        .map(|(a, b)| a - b)
        .collect();
    let a_eq = vec![vec![Rational::one(); ne], diff];
    let b_eq = vec![Rational::one(), Rational::zero()];
    // floor keeps every edge positive (Bal ∩ cv_0, not necessarily thick)
    let floor = crate::ratio(1, 1000);
    let a_ge: Vec<Vec<Rational>> = (0..ne)
        .map(|i| {
            (0..ne)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let b_ge = vec![floor; ne];
    let c: Vec<Rational> = (0..ne)
        .map(|_| Rational::from_integer((rng.random_range(1..20i64)).into()))
        .collect();
    match solve(&a_eq, &b_eq, &a_ge, &b_ge, &c) {
        LpResult::Optimal { x, .. } => Ok(Some(template.with_lengths(x)?)),
        LpResult::Infeasible => Ok(None),
        LpResult::Unbounded => Err(Error::invalid("bounded program reported unbounded")),
    }
}

/// The distinguished point of `Min_ε(μ+ν)` used by the certification
/// routines: local search seeded at the standard rose.
pub fn distinguished_point(
    mu: &RationalLamination,
    nu: &RationalLamination,
    eps: &Rational,
) -> Result<(MarkedGraph, Rational)> {
    min_search(&mu.add(nu)?, eps, &standard_rose(mu.rank()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rose;
    use crate::laminations::pairing;
    use crate::ratio;
    use crate::words::ConjClass;

    fn class(s: &str, r: u8) -> ConjClass {
        ConjClass::parse(s, r).unwrap()
    }

    fn dirac(s: &str, r: u8) -> RationalLamination {
        RationalLamination::dirac(class(s, r)).unwrap()
    }

    #[test]
    fn simplex_min_by_hand() {
        // rose R_2, objective 2ℓ_a + ℓ_b, ε = 1/10 → (1/10, 9/10), 11/10
        let g = standard_rose(2);
        let mu = dirac("a", 2)
            .scale(&ratio(2, 1))
            .unwrap()
            .add(&dirac("b", 2))
            .unwrap();
        let prog = SimplexProgram::new(&g, &mu, &ratio(1, 10)).unwrap();
        assert_eq!(prog.objective, vec![ratio(2, 1), ratio(1, 1)]);
        let SimplexOutcome::Optimal { lengths, value } = simplex_min(&prog).unwrap() else {
            panic!("expected optimum")
        };
        assert_eq!(lengths, vec![ratio(1, 10), ratio(9, 10)]);
        assert_eq!(value, ratio(11, 10));
    }

    #[test]
    fn simplex_volume_objective() {
        let g = standard_rose(2);
        let mu = dirac("a", 2).add(&dirac("b", 2)).unwrap();
        let prog = SimplexProgram::new(&g, &mu, &ratio(1, 10)).unwrap();
        let SimplexOutcome::Optimal { value, .. } = simplex_min(&prog).unwrap() else {
            panic!("expected optimum")
        };
        assert_eq!(value, ratio(1, 1));
    }

    #[test]
    fn simplex_infeasible_thickness() {
        let g = standard_rose(2);
        let mu = dirac("a", 2);
        let prog = SimplexProgram::new(&g, &mu, &ratio(3, 5)).unwrap();
        assert_eq!(simplex_min(&prog).unwrap(), SimplexOutcome::Infeasible);
    }

    #[test]
    fn min_search_volume_and_crossing_objectives() {
        let eps = ratio(1, 10);
        let seed = standard_rose(2);
        // δ_a + δ_b: every rose gives value 1 (oracle: exhaustive over
        // rank-2 topologies, value 1 is the global optimum)
        let mu = dirac("a", 2).add(&dirac("b", 2)).unwrap();
        let (g, v) = min_search(&mu, &eps, &seed).unwrap();
        assert_eq!(v, ratio(1, 1));
        g.validate().unwrap();
        // δ_ab + δ_aB: both classes cross both petals of any rose → 2
        let mu2 = dirac("ab", 2).add(&dirac("aB", 2)).unwrap();
        let (_, v2) = min_search(&mu2, &eps, &seed).unwrap();
        assert_eq!(v2, ratio(2, 1));
        // idempotence
        let (g3, v3) = min_search(&mu, &eps, &g).unwrap();
        assert_eq!(v3, v);
        let (_, v4) = min_search(&mu, &eps, &g3).unwrap();
        assert_eq!(v4, v3);
    }

    #[test]
    fn min_search_escapes_bad_marking() {
        // objective concentrated on φ(a): the re-marked rose does better
        let phi = crate::aut::Automorphism::golden();
        let mu = RationalLamination::dirac(phi.apply_class(&class("a", 2)))
            .unwrap()
            .add(&RationalLamination::dirac(phi.apply_class(&class("b", 2))).unwrap())
            .unwrap();
        let (_, v) = min_search(&mu, &ratio(1, 10), &standard_rose(2)).unwrap();
        // at the φ-re-marked rose both classes are petals: value 1
        assert_eq!(v, ratio(1, 1));
    }

    #[test]
    fn min_search_infeasible_eps() {
        let mu = dirac("a", 2);
        assert!(matches!(
            min_search(&mu, &ratio(3, 5), &standard_rose(2)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn line_single_point_grid() {
        let mu = dirac("abAB", 2);
        let nu = dirac("ab", 2);
        let gamma = line_of_minima(&mu, &nu, &ratio(1, 10), &[ratio(0, 1)]).unwrap();
        assert_eq!(gamma.len(), 1);
        assert_eq!(gamma.kappa_emp, 0.0);
        assert!(!gamma.positivity_warning);
        // every point is thick and a local minimum
        let (sys, thick) =
            crate::candidates::systole_thick(gamma.point(0), &gamma.eps).unwrap();
        assert!(thick, "systole {sys}");
    }

    #[test]
    fn degenerate_pair_warned() {
        let mu = dirac("a", 2);
        let gamma = line_of_minima(&mu, &mu, &ratio(1, 10), &[ratio(0, 1)]).unwrap();
        assert!(gamma.positivity_warning);
    }

    #[test]
    fn projection_rules() {
        let mu = dirac("abAB", 2);
        let nu = dirac("ab", 2);
        let grid: Vec<Rational> = (-2..=2).map(|k| ratio(k, 1)).collect();
        let gamma = line_of_minima(&mu, &nu, &ratio(1, 20), &grid).unwrap();
        // a tree with equal pairings projects to t* = 0
        let t0 = gamma.point(2).clone();
        let scale = balance_param_exp(&t0, &mu, &nu).unwrap();
        // rescale ν so the pairings balance exactly at t0
        let nu_balanced = nu.scale(&scale.recip()).unwrap();
        let gamma_b = line_of_minima(&mu, &nu_balanced, &ratio(1, 20), &grid).unwrap();
        let p = balancing_projection(&gamma_b, &t0).unwrap();
        assert_eq!(p.t_star_exp, ratio(1, 1));
        assert_eq!(p.t, ratio(0, 1));
        assert!(!p.clamped);
        // clamp: a tree balancing far outside the grid
        let skew = rose(2, vec![ratio(1, 1000), ratio(999, 1000)]).unwrap();
        let far = balancing_projection(&gamma_b, &skew).unwrap();
        if far.t_star.abs() > 2.0 {
            assert!(far.clamped);
            assert!(far.index == 0 || far.index == grid.len() - 1);
        }
    }

    #[test]
    fn balanced_sampler_lands_in_bal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mu = dirac("abAB", 2);
        let nu = dirac("ab", 2);
        let mut hit = 0;
        for _ in 0..20 {
            let tpl = random_point(&mut rng, 2);
            if let Some(u) = sample_balanced(&mut rng, &tpl, &mu, &nu).unwrap() {
                assert_eq!(
                    pairing(&u, &mu).unwrap(),
                    pairing(&u, &nu).unwrap(),
                    "balance must be exact"
                );
                hit += 1;
            }
        }
        assert!(hit > 0, "sampler never found a balanced point");
    }

    #[test]
    fn random_points_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            random_point(&mut rng, 2).validate().unwrap();
        }
        for _ in 0..10 {
            random_point(&mut rng, 3).validate().unwrap();
        }
    }
}
