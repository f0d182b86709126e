//! Candidate loops: the finite witness set over which the Lipschitz stretch
//! between marked graphs is attained — embedded circles, figure-eights
//! (two circles wedged at a vertex), and barbells (two disjoint circles
//! joined by an embedded arc).

use crate::graph::{reverse_path, EdgeId, EdgePath, MarkedGraph};
use crate::words::ConjClass;
use crate::Rational;
use num::Signed;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateTag {
    EmbeddedCircle,
    FigureEight,
    Barbell,
}

#[derive(Clone, Debug)]
pub struct CandidateSet {
    pub loops: Vec<(ConjClass, CandidateTag)>,
}

impl CandidateSet {
    pub fn classes(&self) -> impl Iterator<Item = &ConjClass> {
        self.loops.iter().map(|(c, _)| c)
    }
}

/// All embedded circles, one edge path per circle (orientation and start
/// chosen deterministically). A circle is a closed immersed path with
/// pairwise-distinct vertices.
pub fn embedded_circles(t: &MarkedGraph) -> Vec<EdgePath> {
    let ne = t.num_oriented_edges() as EdgeId;
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut out: Vec<EdgePath> = Vec::new();
    for start in 0..t.num_vertices() {
        let mut path: EdgePath = Vec::new();
        dfs(t, ne, start, start, &mut path, &mut seen, &mut out);
    }
    out
}

fn dfs(
    t: &MarkedGraph,
    ne: EdgeId,
    start: usize,
    cur: usize,
    path: &mut EdgePath,
    seen: &mut BTreeSet<Vec<u32>>,
    out: &mut Vec<EdgePath>,
) {
    for e in 0..ne {
        if t.edge_start(e) != cur {
            continue;
        }
        if let Some(&last) = path.last() {
            if last ^ 1 == e {
                continue; // not immersed
            }
        }
        if path.iter().any(|&f| f / 2 == e / 2) {
            continue; // repeated geometric edge
        }
        let next = t.edge_end(e);
        if next == start {
            path.push(e);
            let mut key: Vec<u32> = path.iter().map(|&f| f / 2).collect();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(canonical_orientation(t, path.clone()));
            }
            path.pop();
            continue;
        }
        // `next` must be a fresh vertex
        if path.iter().any(|&f| t.edge_end(f) == next) {
            continue;
        }
        path.push(e);
        dfs(t, ne, start, next, path, seen, out);
        path.pop();
    }
}

fn canonical_orientation(t: &MarkedGraph, p: EdgePath) -> EdgePath {
    let rev = reverse_path(&p);
    let a = ConjClass::of(&t.word_of_path(&p));
    let b = ConjClass::of(&t.word_of_path(&rev));
    if b.order_key() < a.order_key() {
        rev
    } else {
        p
    }
}

fn vertex_set(t: &MarkedGraph, p: &[EdgeId]) -> BTreeSet<usize> {
    p.iter().map(|&e| t.edge_start(e)).collect()
}

fn edge_set(p: &[EdgeId]) -> BTreeSet<u32> {
    p.iter().map(|&e| e / 2).collect()
}

/// Rotate a circle so it starts (and ends) at vertex `v`.
fn rotate_to(t: &MarkedGraph, p: &[EdgeId], v: usize) -> EdgePath {
    let i = p
        .iter()
        .position(|&e| t.edge_start(e) == v)
        .expect("vertex on circle");
    let mut out = p[i..].to_vec();
    out.extend_from_slice(&p[..i]);
    out
}

/// Complete candidate enumeration in a deterministic order.
pub fn candidates(t: &MarkedGraph) -> CandidateSet {
    let circles = embedded_circles(t);
    let mut loops: Vec<(ConjClass, CandidateTag)> = Vec::new();
    let push = |class: ConjClass, tag: CandidateTag, loops: &mut Vec<(ConjClass, CandidateTag)>| {
        if !loops.iter().any(|(c, _)| *c == class) {
            loops.push((class, tag));
        }
    };
    for c in &circles {
        push(
            ConjClass::of(&t.word_of_path(c)),
            CandidateTag::EmbeddedCircle,
            &mut loops,
        );
    }
    let vsets: Vec<BTreeSet<usize>> = circles.iter().map(|c| vertex_set(t, c)).collect();
    let esets: Vec<BTreeSet<u32>> = circles.iter().map(|c| edge_set(c)).collect();
    // figure-eights: circles sharing exactly one vertex, edge-disjoint
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            if !esets[i].is_disjoint(&esets[j]) {
                continue;
            }
            let common: Vec<usize> = vsets[i].intersection(&vsets[j]).copied().collect();
            if common.len() != 1 {
                continue;
            }
            let v = common[0];
            let c1 = rotate_to(t, &circles[i], v);
            let c2 = rotate_to(t, &circles[j], v);
            for second in [c2.clone(), reverse_path(&c2)] {
                let mut p = c1.clone();
                p.extend(second);
                push(
                    ConjClass::of(&t.word_of_path(&p)),
                    CandidateTag::FigureEight,
                    &mut loops,
                );
            }
        }
    }
    // barbells: vertex-disjoint circles joined by an embedded arc
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            if !vsets[i].is_disjoint(&vsets[j]) {
                continue;
            }
            for arc in arcs_between(t, &vsets[i], &vsets[j]) {
                let u = t.edge_start(arc[0]);
                let w = t.edge_end(*arc.last().unwrap());
                let c1 = rotate_to(t, &circles[i], u);
                let c2 = rotate_to(t, &circles[j], w);
                for second in [c2.clone(), reverse_path(&c2)] {
                    let mut p = c1.clone();
                    p.extend(arc.iter().copied());
                    p.extend(second);
                    p.extend(reverse_path(&arc));
                    push(
                        ConjClass::of(&t.word_of_path(&p)),
                        CandidateTag::Barbell,
                        &mut loops,
                    );
                }
            }
        }
    }
    CandidateSet { loops }
}

/// Embedded arcs from `from` to `to` whose interior avoids both vertex sets.
fn arcs_between(
    t: &MarkedGraph,
    from: &BTreeSet<usize>,
    to: &BTreeSet<usize>,
) -> Vec<EdgePath> {
    let ne = t.num_oriented_edges() as EdgeId;
    let mut out = Vec::new();
    let mut stack: Vec<EdgePath> = (0..ne)
        .filter(|&e| from.contains(&t.edge_start(e)))
        .map(|e| vec![e])
        .collect();
    while let Some(p) = stack.pop() {
        let end = t.edge_end(*p.last().unwrap());
        if to.contains(&end) {
            out.push(p);
            continue;
        }
        if from.contains(&end) {
            continue;
        }
        if p.iter().take(p.len() - 1).any(|&f| t.edge_end(f) == end) {
            continue; // repeated interior vertex
        }
        for e in 0..ne {
            if t.edge_start(e) == end && e != p.last().unwrap() ^ 1 {
                let mut q = p.clone();
                q.push(e);
                stack.push(q);
            }
        }
    }
    out.sort();
    out
}

/// Shortest embedded loop and the thick-part test.
pub fn systole_thick(t: &MarkedGraph, eps: &Rational) -> crate::error::Result<(Rational, bool)> {
    if !eps.is_positive() {
        return Err(crate::error::Error::invalid("epsilon must be positive"));
    }
    let sys = systole(t);
    let in_thick = sys >= *eps;
    Ok((sys, in_thick))
}

pub fn systole(t: &MarkedGraph) -> Rational {
    embedded_circles(t)
        .iter()
        .map(|c| t.path_length(c))
        .min()
        .expect("a core graph has an embedded circle")
}
