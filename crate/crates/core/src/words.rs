//! Freely reduced words in `F_n` and canonical conjugacy classes.
//!
//! Letters are nonzero `i8`: `i` is the basis letter `x_i`, `-i` its inverse.
//! The ASCII form uses `a..z` for generators and `A..Z` for inverses, so the
//! rank is capped at 26 (far above the ranks 2–3 this crate targets).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Letter = i8;

/// Total order on letters used for canonical forms: `a < A < b < B < ...`.
pub fn letter_key(l: Letter) -> u8 {
    debug_assert!(l != 0);
    let idx = (l.unsigned_abs() - 1) * 2;
    if l > 0 {
        idx
    } else {
        idx + 1
    }
}

pub fn letter_to_char(l: Letter) -> char {
    if l > 0 {
        (b'a' + (l as u8 - 1)) as char
    } else {
        (b'A' + ((-l) as u8 - 1)) as char
    }
}

pub fn letter_from_char(c: char) -> Option<Letter> {
    match c {
        'a'..='z' => Some((c as u8 - b'a' + 1) as i8),
        'A'..='Z' => Some(-((c as u8 - b'A' + 1) as i8)),
        _ => None,
    }
}

/// A freely reduced word over a declared ambient rank.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
    rank: u8,
}

/// Free reduction of a raw letter sequence.
pub fn free_reduce(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl Word {
    pub fn new(letters: Vec<Letter>, rank: u8) -> Result<Self> {
        if rank < 2 || rank > 26 {
            return Err(Error::invalid(format!("rank {rank} out of range 2..=26")));
        }
        for &l in &letters {
            if l == 0 || l.unsigned_abs() > rank {
                return Err(Error::invalid(format!(
                    "letter {l} outside alphabet of rank {rank}"
                )));
            }
        }
        Ok(Word {
            letters: free_reduce(letters),
            rank,
        })
    }

    pub fn identity(rank: u8) -> Self {
        Word {
            letters: Vec::new(),
            rank,
        }
    }

    pub fn generator(i: u8, rank: u8) -> Self {
        assert!(i >= 1 && i <= rank);
        Word {
            letters: vec![i as i8],
            rank,
        }
    }

    /// Parse from the ASCII form, e.g. `"abAB"`.
    pub fn parse(s: &str, rank: u8) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = letter_from_char(c)
                .ok_or_else(|| Error::invalid(format!("bad word character {c:?}")))?;
            letters.push(l);
        }
        Word::new(letters, rank)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
            rank: self.rank,
        }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(Word {
            letters: free_reduce(
                self.letters
                    .iter()
                    .chain(other.letters.iter())
                    .copied()
                    .collect::<Vec<_>>(),
            ),
            rank: self.rank,
        })
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k >= 0 { self.clone() } else { self.inverse() };
        let mut letters = Vec::new();
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word {
            letters: free_reduce(letters),
            rank: self.rank,
        }
    }

    /// `g w g^{-1}`, freely reduced.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        let mut letters: Vec<Letter> = g.letters.clone();
        letters.extend_from_slice(&self.letters);
        letters.extend(g.letters.iter().rev().map(|&l| -l));
        Word {
            letters: free_reduce(letters),
            rank: self.rank,
        }
    }

    /// Exponent-sum vector of the abelianized word.
    pub fn abelianized(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.rank as usize];
        for &l in &self.letters {
            v[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
        }
        v
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.letters {
            write!(f, "{}", letter_to_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({}, rank {})", self, self.rank)
    }
}

/// A conjugacy class, stored as the lexicographically least rotation of the
/// cyclically reduced representative. A class and its inverse are distinct.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConjClass {
    cyclic: Vec<Letter>,
    rank: u8,
}

/// Cyclic reduction: strip matching first/last letters.
pub fn cyclic_reduce(mut letters: Vec<Letter>) -> Vec<Letter> {
    while letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
        letters.pop();
        letters.remove(0);
    }
    letters
}

fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    if letters.is_empty() {
        return Vec::new();
    }
    let n = letters.len();
    let key = |rot: usize, i: usize| letter_key(letters[(rot + i) % n]);
    let mut best = 0usize;
    for rot in 1..n {
        for i in 0..n {
            match key(rot, i).cmp(&key(best, i)) {
                std::cmp::Ordering::Less => {
                    best = rot;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    (0..n).map(|i| letters[(best + i) % n]).collect()
}

impl ConjClass {
    /// Canonical form of the conjugacy class of `w`.
    pub fn of(w: &Word) -> ConjClass {
        let cyc = cyclic_reduce(w.letters.clone());
        ConjClass {
            cyclic: least_rotation(&cyc),
            rank: w.rank,
        }
    }

    pub fn parse(s: &str, rank: u8) -> Result<ConjClass> {
        Ok(ConjClass::of(&Word::parse(s, rank)?))
    }

    pub fn is_trivial(&self) -> bool {
        self.cyclic.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cyclic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cyclic.is_empty()
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.cyclic
    }

    /// A freely reduced based representative.
    pub fn representative(&self) -> Word {
        Word {
            letters: self.cyclic.clone(),
            rank: self.rank,
        }
    }

    pub fn inverse(&self) -> ConjClass {
        ConjClass::of(&self.representative().inverse())
    }

    /// Class of the image under a letter map (used by Whitehead moves and
    /// automorphism pushes).
    pub fn map_letters(&self, f: impl Fn(Letter) -> Vec<Letter>) -> ConjClass {
        let mut letters = Vec::new();
        for &l in &self.cyclic {
            letters.extend(f(l));
        }
        ConjClass {
            cyclic: least_rotation(&cyclic_reduce(free_reduce(letters))),
            rank: self.rank,
        }
    }

    /// Sort key: length first, then canonical letters.
    pub fn order_key(&self) -> (usize, Vec<u8>) {
        (
            self.cyclic.len(),
            self.cyclic.iter().map(|&l| letter_key(l)).collect(),
        )
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cyclic.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.cyclic {
            write!(f, "{}", letter_to_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConjClass({}, rank {})", self, self.rank)
    }
}

/// Enumerate all cyclically reduced words of length in `1..=max_len`, one
/// representative letter sequence per sequence (not deduplicated by
/// conjugacy). Test oracle helper.
pub fn enumerate_cyclically_reduced(rank: u8, max_len: usize) -> Vec<Vec<Letter>> {
    let alphabet: Vec<Letter> = (1..=rank as i8).flat_map(|i| [i, -i]).collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Letter>> = alphabet.iter().map(|&l| vec![l]).collect();
    while let Some(w) = stack.pop() {
        if w[0] != -w[w.len() - 1] || w.len() == 1 {
            out.push(w.clone());
        }
        if w.len() < max_len {
            for &l in &alphabet {
                if l != -w[w.len() - 1] {
                    let mut next = w.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
    }
    out
}

/// All distinct conjugacy classes with canonical length in `1..=max_len`.
pub fn enumerate_classes(rank: u8, max_len: usize) -> Vec<ConjClass> {
    let mut set = std::collections::BTreeSet::new();
    for letters in enumerate_cyclically_reduced(rank, max_len) {
        set.insert(ConjClass {
            cyclic: least_rotation(&letters),
            rank,
        });
    }
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn free_reduction_forced() {
        // a b b^{-1} a -> aa
        assert_eq!(ConjClass::of(&w("abBa")).to_string(), "aa");
    }

    #[test]
    fn cyclic_reduction_of_conjugate() {
        // b a b^{-1} -> a
        assert_eq!(ConjClass::of(&w("baB")).to_string(), "a");
    }

    #[test]
    fn lex_least_rotation() {
        assert_eq!(ConjClass::of(&w("ba")).to_string(), "ab");
    }

    #[test]
    fn canonicalize_idempotent() {
        for s in ["abAB", "aabab", "BBa", "AbaB"] {
            let c = ConjClass::of(&w(s));
            let again = ConjClass::of(&c.representative());
            assert_eq!(c, again);
        }
    }

    #[test]
    fn letter_outside_alphabet_rejected() {
        assert!(Word::parse("ac", 2).is_err());
        assert!(Word::parse("a c", 2).is_err());
    }

    #[test]
    fn inverse_classes_distinct() {
        let c = ConjClass::of(&w("ab"));
        assert_ne!(c, c.inverse());
    }

    #[test]
    fn enumeration_counts() {
        // Rank 2: 4 cyclically reduced words of length 1, 12 of length 2
        // (4*3 non-backtracking minus none since len-2 cyclic words also
        // exclude first == -last: 4*4 - 4 (reduction) - ... count directly.
        let words = enumerate_cyclically_reduced(2, 1);
        assert_eq!(words.len(), 4);
        let classes = enumerate_classes(2, 2);
        // length 1: a, A, b, B; length 2: aa, AA, bb, BB, ab, ba~ab, aB, Ab, AB, ...
        for c in &classes {
            assert!(c.len() <= 2 && !c.is_trivial());
        }
        // canonical dedup: length-2 classes are aa, AA, bb, BB, ab, aB, Ab, AB
        assert_eq!(classes.iter().filter(|c| c.len() == 2).count(), 8);
    }
}
