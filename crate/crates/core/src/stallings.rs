//! Stallings fold graphs for finitely generated subgroups of `F_n`.
//!
//! A fold graph is a deterministic labeled graph: at every vertex, at most
//! one outgoing edge per signed letter. Folding the wedge of generator loops
//! yields the core graph of the subgroup, which decides membership and
//! certifies bases.

use crate::words::{Letter, Word};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct FoldGraph {
    rank: u8,
    /// adjacency: out[v][letter] = target vertex
    out: Vec<HashMap<Letter, usize>>,
    base: usize,
}

impl FoldGraph {
    /// Fold the wedge of loops labeled by `generators` at a single basepoint.
    pub fn from_generators(generators: &[Word], rank: u8) -> FoldGraph {
        // build as a multimap, then fold to a deterministic graph
        let mut edges: Vec<(usize, Letter, usize)> = Vec::new();
        let mut num_vertices = 1usize;
        for g in generators {
            if g.is_empty() {
                continue;
            }
            let mut cur = 0usize;
            let ls = g.letters();
            for (i, &l) in ls.iter().enumerate() {
                let next = if i + 1 == ls.len() {
                    0
                } else {
                    num_vertices += 1;
                    num_vertices - 1
                };
                edges.push((cur, l, next));
                cur = next;
            }
        }
        fold(rank, num_vertices, edges, 0)
    }

    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    /// Number of geometric edges.
    pub fn num_edges(&self) -> usize {
        self.out.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Rank of the subgroup: first Betti number of the core graph.
    pub fn subgroup_rank(&self) -> usize {
        let core = self.core();
        if core.out.is_empty() {
            return 0;
        }
        core.num_edges() + 1 - core.num_vertices()
    }

    /// The core: iteratively strip valence-1 vertices (basepoint included;
    /// the core carries the conjugacy-class information).
    pub fn core(&self) -> FoldGraph {
        let mut alive = vec![true; self.out.len()];
        let mut degree: Vec<usize> = self.out.iter().map(|m| m.len()).collect();
        loop {
            let mut changed = false;
            for v in 0..self.out.len() {
                if alive[v] && degree[v] <= 1 {
                    alive[v] = false;
                    changed = true;
                    for (_, &t) in &self.out[v] {
                        if alive[t] {
                            degree[t] -= 1;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut remap = HashMap::new();
        let mut out: Vec<HashMap<Letter, usize>> = Vec::new();
        for v in 0..self.out.len() {
            if alive[v] {
                remap.insert(v, out.len());
                out.push(HashMap::new());
            }
        }
        for v in 0..self.out.len() {
            if !alive[v] {
                continue;
            }
            for (&l, &t) in &self.out[v] {
                if alive[t] {
                    out[remap[&v]].insert(l, remap[&t]);
                }
            }
        }
        let base = *remap.get(&self.base).unwrap_or(&0);
        FoldGraph {
            rank: self.rank,
            out,
            base,
        }
    }

    /// Based membership: does `w` label a closed loop at the basepoint?
    pub fn contains_based(&self, w: &Word) -> bool {
        let mut cur = self.base;
        for &l in w.letters() {
            match self.out[cur].get(&l) {
                Some(&t) => cur = t,
                None => return false,
            }
        }
        cur == self.base
    }

    /// Conjugacy-class membership: does some conjugate of `w` lie in the
    /// subgroup? Equivalently the cyclic word labels a closed loop somewhere
    /// in the core graph.
    pub fn contains_class(&self, w: &Word) -> bool {
        if w.is_empty() {
            return true;
        }
        let core = self.core();
        'vertex: for v in 0..core.out.len() {
            let mut cur = v;
            for &l in w.letters() {
                match core.out[cur].get(&l) {
                    Some(&t) => cur = t,
                    None => continue 'vertex,
                }
            }
            if cur == v {
                return true;
            }
        }
        false
    }

    /// True iff the folded graph is the standard rose: one vertex carrying a
    /// loop for every basis letter. This certifies that the generators
    /// generate all of `F_n`.
    pub fn is_full_rose(&self) -> bool {
        if self.out.len() != 1 {
            return false;
        }
        (1..=self.rank as i8).all(|l| self.out[0].get(&l) == Some(&0))
    }
}

/// Fold a raw edge multiset into a deterministic graph: merge targets of
/// same-labeled edges at a common source until no conflicts remain.
fn fold(rank: u8, num_vertices: usize, edges: Vec<(usize, Letter, usize)>, base: usize) -> FoldGraph {
    let mut parent: Vec<usize> = (0..num_vertices).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // symmetric closure: an edge (u, l, v) is also (v, -l, u)
    let all: Vec<(usize, Letter, usize)> = edges
        .iter()
        .copied()
        .flat_map(|(u, l, v)| [(u, l, v), (v, -l, u)])
        .collect();
    loop {
        let mut merged_any = false;
        let mut slots: HashMap<(usize, Letter), usize> = HashMap::new();
        for &(u, l, v) in &all {
            let ru = find(&mut parent, u);
            let rv = find(&mut parent, v);
            match slots.get(&(ru, l)) {
                Some(&prev) => {
                    let (a, b) = (find(&mut parent, prev), rv);
                    if a != b {
                        parent[b] = a;
                        merged_any = true;
                    }
                }
                None => {
                    slots.insert((ru, l), rv);
                }
            }
        }
        if !merged_any {
            break;
        }
    }
    // normalize to dense vertex ids, basepoint first
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let rb = find(&mut parent, base);
    remap.insert(rb, 0);
    let mut out: Vec<HashMap<Letter, usize>> = vec![HashMap::new()];
    for &(u, l, v) in &all {
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        let ui = *remap.entry(ru).or_insert_with(|| {
            out.push(HashMap::new());
            out.len() - 1
        });
        let vi = *remap.entry(rv).or_insert_with(|| {
            out.push(HashMap::new());
            out.len() - 1
        });
        out[ui].insert(l, vi);
    }
    FoldGraph { rank, out, base: 0 }
}

/// Do the given words form a basis of the subgroup they generate, i.e. does
/// folding their wedge perform no rank collapse?
pub fn is_basis_of_its_span(generators: &[Word], rank: u8) -> bool {
    let nontrivial = generators.iter().filter(|g| !g.is_empty()).count();
    FoldGraph::from_generators(generators, rank).subgroup_rank() == nontrivial
}

/// Do the given words generate all of `F_n`?
pub fn generates_full_group(generators: &[Word], rank: u8) -> bool {
    FoldGraph::from_generators(generators, rank).is_full_rose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, r: u8) -> Word {
        Word::parse(s, r).unwrap()
    }

    #[test]
    fn standard_basis_folds_to_rose() {
        assert!(generates_full_group(&[w("a", 2), w("b", 2)], 2));
    }

    #[test]
    fn aab_ab_is_basis_of_f2() {
        // aab·(ab)^{-1} = a, then b recoverable
        assert!(generates_full_group(&[w("aab", 2), w("ab", 2)], 2));
    }

    #[test]
    fn squares_do_not_generate() {
        assert!(!generates_full_group(&[w("aa", 2), w("bb", 2)], 2));
    }

    #[test]
    fn proper_subgroup_membership() {
        let g = FoldGraph::from_generators(&[w("a", 2), w("bab", 2)], 2);
        assert!(g.contains_based(&w("a", 2)));
        assert!(g.contains_based(&w("bab", 2)));
        assert!(g.contains_based(&w("babA", 2).concat(&w("", 2)).unwrap()) == g.contains_based(&w("babA", 2)));
        assert!(!g.contains_based(&w("b", 2)));
    }

    #[test]
    fn class_membership_up_to_conjugacy() {
        // H = <a>: the class of b a b^{-1} ... as a conjugacy class "a" is in H.
        let g = FoldGraph::from_generators(&[w("a", 2)], 2);
        assert!(g.contains_class(&w("a", 2)));
        assert!(g.contains_class(&w("aa", 2)));
        assert!(!g.contains_class(&w("ab", 2)));
        assert!(!g.contains_class(&w("b", 2)));
    }

    #[test]
    fn rank_collapse_detected() {
        // {ab, a, b} generates F_2 but is not a basis of its span.
        assert!(!is_basis_of_its_span(&[w("ab", 2), w("a", 2), w("b", 2)], 2));
        assert!(is_basis_of_its_span(&[w("aab", 2), w("ab", 2)], 2));
    }

    #[test]
    fn commutator_subgroup_core() {
        let g = FoldGraph::from_generators(&[w("abAB", 2)], 2);
        assert_eq!(g.subgroup_rank(), 1);
        assert!(g.contains_class(&w("abAB", 2)));
        assert!(!g.contains_class(&w("ab", 2)));
    }
}
