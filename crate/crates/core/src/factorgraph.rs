//! Free-factor-graph shadows: basic classes, the shadow map Υ, coarse
//! distance decisions between rank-1 factors, and the retraction Ψ.

use crate::error::{Error, Result};
use crate::graph::{rose_adapted_to, EdgeId, MarkedGraph};
use crate::stallings::is_basis_of_its_span;
use crate::whitehead::{common_proper_factor, is_primitive, FactorVerdict};
use crate::words::{ConjClass, Word};
use crate::Rational;
use num::FromPrimitive;

/// Path-search budget for basic-class enumeration; runs that would exceed it
/// are truncated and flagged.
pub const BASIC_PATH_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct BasicClasses {
    /// tight loops of metric length <= 2, sorted by (length, canonical form)
    pub classes: Vec<ConjClass>,
    pub paths_explored: usize,
    pub truncated: bool,
}

/// All conjugacy classes represented by a tight loop of metric length at
/// most two in the volume-one quotient graph.
pub fn basic_classes(t: &MarkedGraph) -> BasicClasses {
    let bound = Rational::from_u32(2).unwrap();
    let ne = t.num_oriented_edges() as EdgeId;
    let mut found: Vec<(Rational, ConjClass)> = Vec::new();
    let mut explored = 0usize;
    let mut truncated = false;
    // cyclic paths: enumerate from each start vertex; a class is recorded
    // when the path closes up tightly (first edge != reverse of last)
    for start in 0..t.num_vertices() {
        let mut stack: Vec<(Vec<EdgeId>, Rational)> = (0..ne)
            .filter(|&e| t.edge_start(e) == start)
            .map(|e| (vec![e], t.path_length(&[e])))
            .collect();
        stack.reverse();
        while let Some((path, len)) = stack.pop() {
            if len > bound {
                continue;
            }
            explored += 1;
            if explored > BASIC_PATH_CAP {
                truncated = true;
                break;
            }
            let end = t.edge_end(*path.last().unwrap());
            if end == start && path[0] != path.last().unwrap() ^ 1 {
                let c = ConjClass::of(&t.word_of_path(&path));
                if !c.is_trivial() && !found.iter().any(|(_, k)| *k == c) {
                    found.push((t.translation_length(&c).unwrap(), c));
                }
            }
            for e in 0..ne {
                if t.edge_start(e) == end && e != path.last().unwrap() ^ 1 {
                    let nl = &len + t.length((e / 2) as usize);
                    if nl <= bound {
                        let mut p = path.clone();
                        p.push(e);
                        stack.push((p, nl));
                    }
                }
            }
        }
        if truncated {
            break;
        }
    }
    found.sort_by(|(la, ca), (lb, cb)| la.cmp(lb).then_with(|| ca.order_key().cmp(&cb.order_key())));
    BasicClasses {
        classes: found.into_iter().map(|(_, c)| c).collect(),
        paths_explored: explored,
        truncated,
    }
}

/// A vertex of the free factor graph: a conjugacy class of a proper free
/// factor, recorded by a certified basis.
#[derive(Clone, Debug)]
pub struct FFVertex {
    pub generators: Vec<Word>,
    pub factor_rank: usize,
}

impl FFVertex {
    pub fn new(generators: Vec<Word>, ambient_rank: u8) -> Result<FFVertex> {
        let k = generators.len();
        if k == 0 || k >= ambient_rank as usize {
            return Err(Error::invalid("factor rank must be in 1..n"));
        }
        if !is_basis_of_its_span(&generators, ambient_rank) {
            return Err(Error::invalid("generators are not a basis of their span"));
        }
        Ok(FFVertex {
            generators,
            factor_rank: k,
        })
    }
}

/// The shadow of a tree: the rank-1 factor of its first primitive basic
/// class, with the chooser trace recorded.
#[derive(Clone, Debug)]
pub struct ShadowPoint {
    pub vertex: FFVertex,
    pub class: ConjClass,
    /// classes inspected before the winner, in order, with primitivity
    pub trace: Vec<(ConjClass, bool)>,
    pub truncated: bool,
}

pub fn upsilon(t: &MarkedGraph) -> Result<ShadowPoint> {
    let basics = basic_classes(t);
    let mut trace = Vec::new();
    for c in &basics.classes {
        let cert = is_primitive(c)?;
        match cert {
            Some(cert) => {
                let rep = cert.basis()[cert.representative].clone();
                return Ok(ShadowPoint {
                    vertex: FFVertex::new(vec![rep], t.rank())?,
                    class: c.clone(),
                    trace,
                    truncated: basics.truncated,
                });
            }
            None => trace.push((c.clone(), false)),
        }
    }
    Err(Error::Inconclusive(
        "no primitive basic class found".into(),
    ))
}

/// Coarse distance decision between distinct rank-1 vertices of the free
/// factor graph.
#[derive(Clone, Debug)]
pub enum FFDistance {
    /// distance <= 2, witnessed by a common proper factor (middle vertex)
    AtMostTwo { factor: Vec<Word> },
    /// the pair fills: distance >= 3
    AtLeastThree,
    Inconclusive,
}

impl FFDistance {
    pub fn is_at_least_three(&self) -> bool {
        matches!(self, FFDistance::AtLeastThree)
    }
}

pub fn ff_leq2(alpha: &ConjClass, beta: &ConjClass) -> Result<FFDistance> {
    if alpha == beta {
        return Err(Error::invalid("equal classes give distance 0, not a pair"));
    }
    if is_primitive(alpha)?.is_none() || is_primitive(beta)?.is_none() {
        return Err(Error::invalid("both classes must be primitive"));
    }
    Ok(match common_proper_factor(&[alpha.clone(), beta.clone()])? {
        FactorVerdict::Contained { factor } => FFDistance::AtMostTwo { factor },
        FactorVerdict::Fills => FFDistance::AtLeastThree,
        FactorVerdict::Inconclusive => FFDistance::Inconclusive,
    })
}

/// Upper bound on the free-factor-graph distance between the endpoints of a
/// chain whose consecutive entries are at distance <= 2.
pub fn ff_upper_bound(chain: &[ConjClass]) -> Result<usize> {
    if chain.is_empty() {
        return Err(Error::invalid("empty chain"));
    }
    for (i, pair) in chain.windows(2).enumerate() {
        match ff_leq2(&pair[0], &pair[1])? {
            FFDistance::AtMostTwo { .. } => {}
            FFDistance::AtLeastThree => {
                return Err(Error::invalid(format!(
                    "chain broken at positions {i}..{}: ({}, {}) fills",
                    i + 1,
                    pair[0],
                    pair[1]
                )))
            }
            FFDistance::Inconclusive => {
                return Err(Error::Inconclusive(format!(
                    "chain link {i} undecided",
                )))
            }
        }
    }
    Ok(2 * (chain.len() - 1))
}

/// The retraction Ψ: project the adapted rose of a primitive class to the
/// axis via the balancing projection.
pub fn psi_retraction(
    gamma: &crate::minima::LineOfMinima,
    alpha: &ConjClass,
) -> Result<crate::minima::Projection> {
    let t = rose_adapted_to(alpha)?;
    crate::minima::balancing_projection(gamma, &t)
}
