//! Marked metric graphs: points of volume-one Outer space `cv_0(F_n)`.
//!
//! A point is a finite metric core graph with first Betti number `n`,
//! positive rational edge lengths summing to one, and marking data in both
//! directions: each basis letter maps to a closed edge path at the
//! basepoint, and each oriented edge carries the word it spells under the
//! marking-inverse. Consistency (`omega(m(x_i)) = x_i`) is validated after
//! every constructor and move.
//!
//! Oriented edges are numbered `0..2E`; edge `e` and its reverse `e ^ 1`
//! form the geometric edge `e / 2`.

use crate::aut::Automorphism;
use crate::error::{Error, Result};
use crate::words::{ConjClass, Word};
use crate::Rational;
use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub type EdgeId = u32;
pub type EdgePath = Vec<EdgeId>;

pub fn reverse_edge(e: EdgeId) -> EdgeId {
    e ^ 1
}

pub fn reverse_path(p: &[EdgeId]) -> EdgePath {
    p.iter().rev().map(|&e| e ^ 1).collect()
}

/// Cancel adjacent edge–reverse pairs.
pub fn path_reduce(p: impl IntoIterator<Item = EdgeId>) -> EdgePath {
    let mut out: EdgePath = Vec::new();
    for e in p {
        if out.last() == Some(&(e ^ 1)) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    out
}

/// Cyclic reduction of a closed reduced path.
pub fn path_cyclic_reduce(mut p: EdgePath) -> EdgePath {
    while p.len() >= 2 && p[0] == p[p.len() - 1] ^ 1 {
        p.pop();
        p.remove(0);
    }
    p
}

#[derive(Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    rank: u8,
    num_vertices: usize,
    /// start vertex of each oriented edge (length 2E)
    edge_start: Vec<usize>,
    /// length of each geometric edge (length E)
    lengths: Vec<Rational>,
    /// omega: word spelled by each oriented edge (length 2E)
    edge_word: Vec<Word>,
    /// m: closed tight edge path at the basepoint per basis letter
    marking: Vec<EdgePath>,
    basepoint: usize,
}

impl MarkedGraph {
    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.lengths.len()
    }

    pub fn num_oriented_edges(&self) -> usize {
        self.edge_start.len()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn edge_start(&self, e: EdgeId) -> usize {
        self.edge_start[e as usize]
    }

    pub fn edge_end(&self, e: EdgeId) -> usize {
        self.edge_start[(e ^ 1) as usize]
    }

    pub fn length(&self, geometric: usize) -> &Rational {
        &self.lengths[geometric]
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn edge_word(&self, e: EdgeId) -> &Word {
        &self.edge_word[e as usize]
    }

    pub fn marking(&self, letter: u8) -> &EdgePath {
        &self.marking[(letter - 1) as usize]
    }

    pub fn is_loop(&self, geometric: usize) -> bool {
        let e = (2 * geometric) as EdgeId;
        self.edge_start(e) == self.edge_end(e)
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edge_start.iter().filter(|&&s| s == v).count()
    }

    pub fn volume(&self) -> Rational {
        self.lengths.iter().sum()
    }

    pub fn path_length(&self, p: &[EdgeId]) -> Rational {
        p.iter().map(|&e| &self.lengths[(e / 2) as usize]).sum()
    }

    /// Word spelled by an edge path under the marking inverse.
    pub fn word_of_path(&self, p: &[EdgeId]) -> Word {
        let mut acc: Vec<i8> = Vec::new();
        for &e in p {
            acc.extend_from_slice(self.edge_word[e as usize].letters());
        }
        Word::new(crate::words::free_reduce(acc), self.rank).expect("alphabet")
    }

    /// Marking path of a signed basis letter.
    fn letter_path(&self, l: i8) -> EdgePath {
        if l > 0 {
            self.marking[(l - 1) as usize].clone()
        } else {
            reverse_path(&self.marking[((-l) - 1) as usize])
        }
    }

    /// Tight closed path at the basepoint representing `w` via the marking.
    pub fn path_of_word(&self, w: &Word) -> EdgePath {
        let mut acc: EdgePath = Vec::new();
        for &l in w.letters() {
            for e in self.letter_path(l) {
                if acc.last() == Some(&(e ^ 1)) {
                    acc.pop();
                } else {
                    acc.push(e);
                }
            }
        }
        acc
    }

    /// The cyclically reduced edge loop representing a conjugacy class.
    pub fn loop_of_class(&self, class: &ConjClass) -> Result<EdgePath> {
        if class.is_trivial() {
            return Err(Error::invalid("trivial class"));
        }
        if class.rank() != self.rank {
            return Err(Error::RankMismatch(self.rank, class.rank()));
        }
        Ok(path_cyclic_reduce(self.path_of_word(&class.representative())))
    }

    /// Translation length: the metric length of the tight loop.
    pub fn translation_length(&self, class: &ConjClass) -> Result<Rational> {
        Ok(self.path_length(&self.loop_of_class(class)?))
    }

    /// Edge occupancy counts of the tight loop (per geometric edge); the
    /// translation length is the dot product with the edge lengths.
    pub fn occupancy(&self, class: &ConjClass) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.num_edges()];
        for e in self.loop_of_class(class)? {
            counts[(e / 2) as usize] += 1;
        }
        Ok(counts)
    }

    /// Right action of an automorphism: same metric graph, marking
    /// precomposed with `phi` (and omega with `phi^{-1}`).
    pub fn act(&self, phi: &Automorphism) -> Result<MarkedGraph> {
        if phi.rank() != self.rank {
            return Err(Error::RankMismatch(self.rank, phi.rank()));
        }
        let inv = phi.inverse();
        let marking: Vec<EdgePath> = (1..=self.rank)
            .map(|i| self.path_of_word(phi.image_of(i)))
            .collect();
        let edge_word: Vec<Word> = self.edge_word.iter().map(|w| inv.apply(w)).collect();
        let g = MarkedGraph {
            rank: self.rank,
            num_vertices: self.num_vertices,
            edge_start: self.edge_start.clone(),
            lengths: self.lengths.clone(),
            edge_word,
            marking,
            basepoint: self.basepoint,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same graph with new edge lengths (must be positive, volume one).
    pub fn with_lengths(&self, lengths: Vec<Rational>) -> Result<MarkedGraph> {
        if lengths.len() != self.num_edges() {
            return Err(Error::invalid("wrong number of edge lengths"));
        }
        let g = MarkedGraph {
            lengths,
            ..self.clone()
        };
        g.validate()?;
        Ok(g)
    }

    /// Full invariant check: connected core graph of the right rank, volume
    /// one, positive lengths, valence >= 3, marking consistency.
    pub fn validate(&self) -> Result<()> {
        let ne = self.num_oriented_edges();
        if ne % 2 != 0 || ne / 2 != self.lengths.len() || self.edge_word.len() != ne {
            return Err(Error::invalid("inconsistent edge arrays"));
        }
        for &s in &self.edge_start {
            if s >= self.num_vertices {
                return Err(Error::invalid("edge endpoint out of range"));
            }
        }
        // connectivity
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![self.basepoint];
        seen[self.basepoint] = true;
        while let Some(v) = stack.pop() {
            for e in 0..ne {
                if self.edge_start[e] == v {
                    let w = self.edge_start[e ^ 1];
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::invalid("graph not connected"));
        }
        let betti = self.num_edges() as i64 - self.num_vertices as i64 + 1;
        if betti != self.rank as i64 {
            return Err(Error::invalid(format!(
                "first Betti number {betti} does not match rank {}",
                self.rank
            )));
        }
        for v in 0..self.num_vertices {
            if self.valence(v) < 3 {
                return Err(Error::invalid(format!("vertex {v} has valence < 3")));
            }
        }
        for l in &self.lengths {
            if !l.is_positive() {
                return Err(Error::invalid("non-positive edge length"));
            }
        }
        if !self.volume().is_one() {
            return Err(Error::invalid("volume is not one"));
        }
        // omega involution
        for g in 0..self.num_edges() {
            let e = (2 * g) as usize;
            if self.edge_word[e].inverse() != self.edge_word[e + 1] {
                return Err(Error::invalid("edge words not inverse-paired"));
            }
        }
        // marking paths: composable closed tight loops at the basepoint
        for (i, p) in self.marking.iter().enumerate() {
            let mut cur = self.basepoint;
            for &e in p {
                if self.edge_start(e) != cur {
                    return Err(Error::invalid(format!("marking path {i} not composable")));
                }
                cur = self.edge_end(e);
            }
            if cur != self.basepoint {
                return Err(Error::invalid(format!("marking path {i} not closed")));
            }
            if path_reduce(p.iter().copied()) != *p {
                return Err(Error::invalid(format!("marking path {i} not tight")));
            }
            // consistency with omega
            let w = self.word_of_path(p);
            if w != Word::generator((i + 1) as u8, self.rank) {
                return Err(Error::invalid(format!(
                    "marking inconsistency: omega(m(x_{})) = {w}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Collapse a non-loop geometric edge; the result is renormalized to
    /// volume one. The basepoint end of the edge survives.
    pub fn collapse(&self, geometric: usize) -> Result<MarkedGraph> {
        if self.is_loop(geometric) {
            return Err(Error::invalid("cannot collapse a loop edge"));
        }
        let mut e = (2 * geometric) as EdgeId; // collapse e: keep start, drop end
        if self.edge_end(e) == self.basepoint {
            e ^= 1;
        }
        let u = self.edge_start(e);
        let v = self.edge_end(e);
        debug_assert_ne!(u, v);
        let omega_e = self.edge_word[e as usize].clone();

        // remap vertices: drop v
        let vmap = |x: usize| -> usize {
            if x == v {
                u
            } else if x > v {
                x - 1
            } else {
                x
            }
        };
        // remap oriented edges: drop pair (e, e^1)
        let g2 = 2 * geometric as u32;
        let emap = |f: EdgeId| -> EdgeId {
            debug_assert!(f / 2 != geometric as u32);
            if f >= g2 + 2 {
                f - 2
            } else {
                f
            }
        };
        let mut edge_start = Vec::with_capacity(self.edge_start.len() - 2);
        let mut edge_word = Vec::with_capacity(self.edge_word.len() - 2);
        for f in 0..self.num_oriented_edges() as u32 {
            if f / 2 == geometric as u32 {
                continue;
            }
            edge_start.push(vmap(self.edge_start(f)));
            let mut w = self.edge_word[f as usize].clone();
            if self.edge_start(f) == v {
                w = omega_e.concat(&w)?;
            }
            if self.edge_end(f) == v {
                w = w.concat(&omega_e.inverse())?;
            }
            edge_word.push(w);
        }
        let marking: Vec<EdgePath> = self
            .marking
            .iter()
            .map(|p| {
                path_reduce(
                    p.iter()
                        .filter(|&&f| f / 2 != geometric as u32)
                        .map(|&f| emap(f)),
                )
            })
            .collect();
        let mut lengths: Vec<Rational> = self
            .lengths
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != geometric)
            .map(|(_, l)| l.clone())
            .collect();
        let total: Rational = lengths.iter().sum();
        if total.is_zero() {
            return Err(Error::invalid("degenerate collapse"));
        }
        for l in &mut lengths {
            *l = &*l / &total;
        }
        let g = MarkedGraph {
            rank: self.rank,
            num_vertices: self.num_vertices - 1,
            edge_start,
            lengths,
            edge_word,
            marking,
            basepoint: vmap(self.basepoint),
        };
        g.validate()?;
        Ok(g)
    }

    /// Blow up vertex `u` into an edge: the oriented edges listed in
    /// `side_v` (all starting at `u`) are moved to the new vertex. The new
    /// edge receives the given length; all lengths are renormalized.
    pub fn expand(&self, u: usize, side_v: &[EdgeId], new_len: Rational) -> Result<MarkedGraph> {
        for &f in side_v {
            if self.edge_start(f) != u {
                return Err(Error::invalid("side edge does not start at the vertex"));
            }
        }
        if side_v.len() < 2 || self.valence(u) - side_v.len() < 2 {
            return Err(Error::invalid("both sides of a blow-up need >= 2 ends"));
        }
        if !new_len.is_positive() {
            return Err(Error::invalid("new edge length must be positive"));
        }
        let v = self.num_vertices;
        let mut edge_start = self.edge_start.clone();
        for &f in side_v {
            edge_start[f as usize] = v;
        }
        // new geometric edge: oriented ids 2E (u -> v) and 2E+1 (v -> u)
        let e_fwd = self.num_oriented_edges() as EdgeId;
        edge_start.push(u);
        edge_start.push(v);
        let mut edge_word = self.edge_word.clone();
        edge_word.push(Word::identity(self.rank));
        edge_word.push(Word::identity(self.rank));
        let mut lengths = self.lengths.clone();
        lengths.push(new_len);
        let total: Rational = lengths.iter().sum();
        for l in &mut lengths {
            *l = &*l / &total;
        }
        // repair marking paths: insert the new edge at broken junctions
        let start_of = |f: EdgeId| -> usize { edge_start[f as usize] };
        let end_of = |f: EdgeId| -> usize { edge_start[(f ^ 1) as usize] };
        let marking: Vec<EdgePath> = self
            .marking
            .iter()
            .map(|p| {
                let mut out: EdgePath = Vec::new();
                let mut cur = self.basepoint; // basepoint stays at u's side
                for &f in p {
                    let s = start_of(f);
                    if s != cur {
                        debug_assert!((s == v && cur == u) || (s == u && cur == v));
                        out.push(if s == v { e_fwd } else { e_fwd ^ 1 });
                    }
                    out.push(f);
                    cur = end_of(f);
                }
                if cur != self.basepoint {
                    out.push(if cur == v { e_fwd ^ 1 } else { e_fwd });
                }
                path_reduce(out)
            })
            .collect();
        let g = MarkedGraph {
            rank: self.rank,
            num_vertices: self.num_vertices + 1,
            edge_start,
            lengths,
            edge_word,
            marking,
            basepoint: self.basepoint,
        };
        g.validate()?;
        Ok(g)
    }

    /// All blow-up moves at vertices of valence >= 4, one representative per
    /// unordered side partition.
    pub fn expansions(&self) -> Vec<(usize, Vec<EdgeId>)> {
        let mut out = Vec::new();
        for u in 0..self.num_vertices {
            let ends: Vec<EdgeId> = (0..self.num_oriented_edges() as EdgeId)
                .filter(|&f| self.edge_start(f) == u)
                .collect();
            let k = ends.len();
            if k < 4 {
                continue;
            }
            // fix ends[0] on the u side to kill the side swap symmetry
            for mask in 0u32..(1 << (k - 1)) {
                let side: Vec<EdgeId> = (1..k)
                    .filter(|&i| mask & (1 << (i - 1)) != 0)
                    .map(|i| ends[i])
                    .collect();
                if side.len() >= 2 && k - side.len() >= 2 {
                    out.push((u, side));
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for MarkedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MarkedGraph(rank {}, V={}, E={}, lengths=[",
            self.rank,
            self.num_vertices,
            self.num_edges()
        )?;
        for (i, l) in self.lengths.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "])")
    }
}

// ---------------------------------------------------------------------------
// constructors

/// The rose with the standard marking and the given petal lengths.
pub fn rose(rank: u8, lengths: Vec<Rational>) -> Result<MarkedGraph> {
    if lengths.len() != rank as usize {
        return Err(Error::invalid("rose needs one length per petal"));
    }
    let edge_start = vec![0usize; 2 * rank as usize];
    let mut edge_word = Vec::new();
    for i in 1..=rank {
        let w = Word::generator(i, rank);
        edge_word.push(w.clone());
        edge_word.push(w.inverse());
    }
    let marking: Vec<EdgePath> = (0..rank as usize).map(|i| vec![(2 * i) as EdgeId]).collect();
    let g = MarkedGraph {
        rank,
        num_vertices: 1,
        edge_start,
        lengths,
        edge_word,
        marking,
        basepoint: 0,
    };
    g.validate()?;
    Ok(g)
}

/// Equal-length rose.
pub fn standard_rose(rank: u8) -> MarkedGraph {
    let l = Rational::new(BigInt::one(), BigInt::from(rank));
    rose(rank, vec![l; rank as usize]).expect("standard rose is valid")
}

/// Rose whose petals spell the images of `basis_auto` (petal `i` represents
/// `basis_auto(x_{i+1})`), with the given lengths.
pub fn rose_with_basis(basis_auto: &Automorphism, lengths: Vec<Rational>) -> Result<MarkedGraph> {
    let rank = basis_auto.rank();
    let std = rose(rank, lengths)?;
    // act by the inverse: petals of act(R, phi) spell phi^{-1}; we want the
    // petals to spell basis_auto's images, so act by its inverse.
    std.act(&basis_auto.inverse())
}

/// Equal-length rose marked by a certified basis containing the given
/// primitive class: the class becomes a petal of length `1/n`, hence basic.
pub fn rose_adapted_to(class: &ConjClass) -> Result<MarkedGraph> {
    let cert = crate::whitehead::is_primitive(class)?
        .ok_or_else(|| Error::invalid(format!("class {class} is not primitive")))?;
    let rank = class.rank();
    let l = Rational::new(BigInt::one(), BigInt::from(rank));
    rose_with_basis(&cert.auto, vec![l; rank as usize])
}

/// Rank-2 theta graph: two vertices joined by three edges `e0, e1, e2`,
/// marked by `a = e0 e1^{-1}`, `b = e1 e2^{-1}`.
pub fn theta(lengths: [Rational; 3]) -> Result<MarkedGraph> {
    let rank = 2;
    // oriented: e0=0 (0->1), 1 (1->0); e1=2 (0->1), 3; e2=4 (0->1), 5
    let edge_start = vec![0, 1, 0, 1, 0, 1];
    let a = Word::generator(1, rank);
    let b = Word::generator(2, rank);
    let edge_word = vec![
        a.clone(),
        a.inverse(),
        Word::identity(rank),
        Word::identity(rank),
        b.inverse(),
        b.clone(),
    ];
    let marking = vec![vec![0, 3], vec![2, 5]];
    let g = MarkedGraph {
        rank,
        num_vertices: 2,
        edge_start,
        lengths: lengths.to_vec(),
        edge_word,
        marking,
        basepoint: 0,
    };
    g.validate()?;
    Ok(g)
}

/// Rank-2 barbell: loops at two vertices joined by a bridge, marked by
/// `a = ` left loop, `b = bridge · right loop · bridge^{-1}`.
pub fn barbell(lengths: [Rational; 3]) -> Result<MarkedGraph> {
    let rank = 2;
    // e0 = loop at 0 (ids 0,1); e1 = loop at 1 (ids 2,3); e2 = bridge 0->1 (ids 4,5)
    let edge_start = vec![0, 0, 1, 1, 0, 1];
    let a = Word::generator(1, rank);
    let b = Word::generator(2, rank);
    let edge_word = vec![
        a.clone(),
        a.inverse(),
        b.clone(),
        b.inverse(),
        Word::identity(rank),
        Word::identity(rank),
    ];
    let marking = vec![vec![0], vec![4, 2, 5]];
    let g = MarkedGraph {
        rank,
        num_vertices: 2,
        edge_start,
        lengths: lengths.to_vec(),
        edge_word,
        marking,
        basepoint: 0,
    };
    g.validate()?;
    Ok(g)
}

// ---------------------------------------------------------------------------
// marked isometry

/// Decide whether two points of Outer space are equal as marked metric
/// graphs: a length-preserving graph isomorphism under which the markings
/// agree up to one inner automorphism.
pub fn marked_isometric(s: &MarkedGraph, t: &MarkedGraph) -> bool {
    if s.rank() != t.rank()
        || s.num_vertices() != t.num_vertices()
        || s.num_edges() != t.num_edges()
    {
        return false;
    }
    let ne = s.num_edges();
    // assign each geometric edge of s to a geometric edge of t (with an
    // orientation), backtracking on incidence and length
    let mut assignment: Vec<Option<EdgeId>> = vec![None; ne]; // image of oriented edge 2i
    let mut used = vec![false; ne];
    let mut vmap: Vec<Option<usize>> = vec![None; s.num_vertices()];
    let mut vused = vec![false; t.num_vertices()];
    fn try_assign(
        s: &MarkedGraph,
        t: &MarkedGraph,
        i: usize,
        assignment: &mut Vec<Option<EdgeId>>,
        used: &mut Vec<bool>,
        vmap: &mut Vec<Option<usize>>,
        vused: &mut Vec<bool>,
    ) -> bool {
        if i == s.num_edges() {
            return markings_match(s, t, assignment);
        }
        let e = (2 * i) as EdgeId;
        for j in 0..t.num_edges() {
            if used[j] || s.length(i) != t.length(j) {
                continue;
            }
            for flip in [0u32, 1u32] {
                let f = (2 * j) as EdgeId ^ flip;
                // check vertex compatibility
                let (su, sv) = (s.edge_start(e), s.edge_end(e));
                let (tu, tv) = (t.edge_start(f), t.edge_end(f));
                let ok = |sx: usize, tx: usize, vmap: &Vec<Option<usize>>, vused: &Vec<bool>| {
                    match vmap[sx] {
                        Some(m) => m == tx,
                        None => !vused[tx],
                    }
                };
                if !ok(su, tu, vmap, vused) {
                    continue;
                }
                // tentatively set su -> tu before checking sv (they may be equal)
                let saved_su = vmap[su];
                let saved_tu = vused[tu];
                vmap[su] = Some(tu);
                vused[tu] = true;
                if !ok(sv, tv, vmap, vused) {
                    vmap[su] = saved_su;
                    vused[tu] = saved_tu;
                    continue;
                }
                let saved_sv = vmap[sv];
                let saved_tv = vused[tv];
                vmap[sv] = Some(tv);
                vused[tv] = true;
                used[j] = true;
                assignment[i] = Some(f);
                if try_assign(s, t, i + 1, assignment, used, vmap, vused) {
                    return true;
                }
                assignment[i] = None;
                used[j] = false;
                vmap[sv] = saved_sv;
                vused[tv] = saved_tv;
                vmap[su] = saved_su;
                vused[tu] = saved_tu;
            }
        }
        false
    }
    try_assign(s, t, 0, &mut assignment, &mut used, &mut vmap, &mut vused)
}

fn markings_match(s: &MarkedGraph, t: &MarkedGraph, assignment: &[Option<EdgeId>]) -> bool {
    let map_edge = |e: EdgeId| -> EdgeId {
        let img = assignment[(e / 2) as usize].expect("complete assignment");
        img ^ (e & 1)
    };
    let images: Vec<Word> = (1..=s.rank())
        .map(|i| {
            let mapped: EdgePath = s.marking(i).iter().map(|&e| map_edge(e)).collect();
            t.word_of_path(&mapped)
        })
        .collect();
    crate::aut::images_inner_conjugator(&images, s.rank()).is_some()
}

// ---------------------------------------------------------------------------
// serialization

#[derive(Serialize, Deserialize)]
struct EdgeSchema {
    start: usize,
    end: usize,
    length: String,
    word: String,
}

/// Structured-text schema with exact round-trip.
#[derive(Serialize, Deserialize)]
pub struct MarkedGraphSchema {
    rank: u8,
    num_vertices: usize,
    basepoint: usize,
    edges: Vec<EdgeSchema>,
    /// signed 1-based geometric edge indices per basis letter
    marking: Vec<Vec<i64>>,
}

pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_from_string(s: &str) -> Result<Rational> {
    // "p/q", or a plain integer "p" read as p/1
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::invalid(format!("bad numerator in {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::invalid(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::invalid("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

impl MarkedGraph {
    pub fn to_schema(&self) -> MarkedGraphSchema {
        MarkedGraphSchema {
            rank: self.rank,
            num_vertices: self.num_vertices,
            basepoint: self.basepoint,
            edges: (0..self.num_edges())
                .map(|i| EdgeSchema {
                    start: self.edge_start((2 * i) as EdgeId),
                    end: self.edge_end((2 * i) as EdgeId),
                    length: rational_to_string(&self.lengths[i]),
                    word: self.edge_word[2 * i].to_string(),
                })
                .collect(),
            marking: self
                .marking
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|&e| {
                            let idx = (e / 2 + 1) as i64;
                            if e & 1 == 0 {
                                idx
                            } else {
                                -idx
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_schema(schema: &MarkedGraphSchema) -> Result<MarkedGraph> {
        let rank = schema.rank;
        let mut edge_start = Vec::new();
        let mut lengths = Vec::new();
        let mut edge_word = Vec::new();
        for e in &schema.edges {
            edge_start.push(e.start);
            edge_start.push(e.end);
            lengths.push(rational_from_string(&e.length)?);
            let w = if e.word == "1" {
                Word::identity(rank)
            } else {
                Word::parse(&e.word, rank)?
            };
            edge_word.push(w.clone());
            edge_word.push(w.inverse());
        }
        let marking: Vec<EdgePath> = schema
            .marking
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&i| {
                        let e = ((i.unsigned_abs() - 1) * 2) as EdgeId;
                        if i > 0 {
                            e
                        } else {
                            e ^ 1
                        }
                    })
                    .collect()
            })
            .collect();
        let g = MarkedGraph {
            rank,
            num_vertices: schema.num_vertices,
            edge_start,
            lengths,
            edge_word,
            marking,
            basepoint: schema.basepoint,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_schema()).expect("schema serializes")
    }

    pub fn from_json(s: &str) -> Result<MarkedGraph> {
        let schema: MarkedGraphSchema = serde_json::from_str(s)?;
        MarkedGraph::from_schema(&schema)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    fn half_rose() -> MarkedGraph {
        rose(2, vec![ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    fn class(s: &str, r: u8) -> ConjClass {
        ConjClass::parse(s, r).unwrap()
    }

    #[test]
    fn translation_lengths_on_roses() {
        let t = half_rose();
        assert_eq!(t.translation_length(&class("abab", 2)).unwrap(), ratio(2, 1));
        assert_eq!(t.translation_length(&class("abAB", 2)).unwrap(), ratio(2, 1));
        let t2 = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(t2.translation_length(&class("b", 2)).unwrap(), ratio(2, 3));
    }

    #[test]
    fn occupancy_matches_direct_evaluation() {
        let t = rose(2, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        for s in ["a", "b", "ab", "aB", "abAB", "aabbb"] {
            let c = class(s, 2);
            let counts = t.occupancy(&c).unwrap();
            let dot: Rational = counts
                .iter()
                .zip(t.lengths())
                .map(|(&c, l)| Rational::from(BigInt::from(c)) * l)
                .sum();
            assert_eq!(dot, t.translation_length(&c).unwrap());
        }
    }

    #[test]
    fn trivial_class_rejected() {
        let t = half_rose();
        assert!(t.translation_length(&ConjClass::of(&Word::identity(2))).is_err());
    }

    #[test]
    fn act_identity_fixes_graph() {
        let t = half_rose();
        let t2 = t.act(&Automorphism::identity(2)).unwrap();
        assert!(marked_isometric(&t, &t2));
    }

    #[test]
    fn act_length_functional() {
        // l_{T phi}(alpha) = l_T(phi(alpha))
        let t = half_rose();
        let phi = Automorphism::parse(&["ab", "a"], &["b", "Ba"]).unwrap();
        let tphi = t.act(&phi).unwrap();
        for s in ["a", "b", "ab", "abAB", "aab"] {
            let c = class(s, 2);
            assert_eq!(
                tphi.translation_length(&c).unwrap(),
                t.translation_length(&phi.apply_class(&c)).unwrap(),
                "class {s}"
            );
        }
        assert_eq!(tphi.translation_length(&class("a", 2)).unwrap(), ratio(1, 1));
    }

    #[test]
    fn theta_and_barbell_validate() {
        let th = theta([ratio(1, 3), ratio(1, 3), ratio(1, 3)]).unwrap();
        assert_eq!(th.translation_length(&class("a", 2)).unwrap(), ratio(2, 3));
        let bb = barbell([ratio(1, 3), ratio(1, 3), ratio(1, 3)]).unwrap();
        assert_eq!(bb.translation_length(&class("a", 2)).unwrap(), ratio(1, 3));
        // [b] is conjugate into the far loop; the bridge drops out cyclically
        assert_eq!(bb.translation_length(&class("b", 2)).unwrap(), ratio(1, 3));
        // the commutator crosses both loops and the bridge twice each
        assert_eq!(
            bb.translation_length(&class("abAB", 2)).unwrap(),
            ratio(8, 3)
        );
    }

    #[test]
    fn collapse_theta_gives_rose() {
        let th = theta([ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        // collapsing e1 (the tree edge of the marking) merges the two vertices
        let c = th.collapse(1).unwrap();
        assert_eq!(c.num_vertices(), 1);
        assert_eq!(c.num_edges(), 2);
        c.validate().unwrap();
        // lengths renormalized to 1/2, 1/2
        assert_eq!(c.lengths()[0], ratio(1, 2));
    }

    #[test]
    fn collapse_barbell_bridge() {
        let bb = barbell([ratio(2, 5), ratio(2, 5), ratio(1, 5)]).unwrap();
        let c = bb.collapse(2).unwrap();
        assert_eq!(c.num_vertices(), 1);
        c.validate().unwrap();
        assert_eq!(c.lengths()[0], ratio(1, 2));
    }

    #[test]
    fn expand_rose_round_trips() {
        let t = standard_rose(3);
        let expansions = t.expansions();
        assert!(!expansions.is_empty());
        for (u, side) in expansions.iter().take(5) {
            let ex = t.expand(*u, side, ratio(1, 10)).unwrap();
            ex.validate().unwrap();
            // translation lengths only gain the tiny new edge crossings;
            // collapsing the new edge returns to a rose
            let back = ex.collapse(ex.num_edges() - 1).unwrap();
            assert!(marked_isometric(&back, &t));
        }
    }

    #[test]
    fn marked_isometry_detects_marking_twist() {
        let t = half_rose();
        let phi = Automorphism::parse(&["ab", "a"], &["b", "Ba"]).unwrap();
        let tphi = t.act(&phi).unwrap();
        assert!(!marked_isometric(&t, &tphi));
        // inner twists are invisible
        let inner = crate::aut::inner_by(&Word::parse("ab", 2).unwrap());
        let tinner = t.act(&inner).unwrap();
        assert!(marked_isometric(&t, &tinner));
    }

    #[test]
    fn adapted_rose_makes_class_a_petal() {
        // "a" gives the standard rose
        let r = rose_adapted_to(&class("a", 2)).unwrap();
        assert!(marked_isometric(&r, &standard_rose(2)));
        // "aab" becomes a petal of length 1/2
        let c = class("aab", 2);
        let r = rose_adapted_to(&c).unwrap();
        assert_eq!(r.translation_length(&c).unwrap(), ratio(1, 2));
        assert!(rose_adapted_to(&class("abab", 2)).is_err());
    }

    #[test]
    fn schema_round_trip_exact() {
        for g in [
            half_rose(),
            theta([ratio(1, 7), ratio(2, 7), ratio(4, 7)]).unwrap(),
            barbell([ratio(1, 3), ratio(1, 2), ratio(1, 6)]).unwrap(),
        ] {
            let json = g.to_json();
            let back = MarkedGraph::from_json(&json).unwrap();
            assert_eq!(g, back);
        }
    }
}
