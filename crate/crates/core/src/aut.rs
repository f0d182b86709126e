//! Automorphisms of `F_n` given by basis images, with verified inverses.
//!
//! Elements of `Out(F_n)` are represented by automorphisms compared up to
//! inner automorphisms via [`Automorphism::is_inner`].

use crate::error::{Error, Result};
use crate::words::{ConjClass, Letter, Word};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    rank: u8,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

/// Outcome of the inner-ness decision. A positive verdict carries a verified
/// conjugator `g` with `phi(x) = g x g^{-1}` on the basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerVerdict {
    Inner { conjugator: Word },
    NotInner,
}

impl InnerVerdict {
    pub fn is_inner(&self) -> bool {
        matches!(self, InnerVerdict::Inner { .. })
    }
}

fn apply_images(images: &[Word], w: &Word, rank: u8) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(w.len() * 2);
    for &l in w.letters() {
        let img = &images[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            letters.extend_from_slice(img.letters());
        } else {
            letters.extend(img.letters().iter().rev().map(|&x| -x));
        }
    }
    Word::new(letters, rank).expect("letters stay in alphabet")
}

impl Automorphism {
    /// Build from images and claimed inverse images; both directions are
    /// checked to be mutually inverse on the basis.
    pub fn new(images: Vec<Word>, inverse_images: Vec<Word>) -> Result<Self> {
        if images.is_empty() || images.len() != inverse_images.len() {
            return Err(Error::InvalidAutomorphism(
                "image lists empty or of unequal length".into(),
            ));
        }
        let rank = images.len() as u8;
        for w in images.iter().chain(inverse_images.iter()) {
            if w.rank() != rank {
                return Err(Error::RankMismatch(rank, w.rank()));
            }
        }
        let phi = Automorphism {
            rank,
            images,
            inverse_images,
        };
        for i in 1..=rank {
            let x = Word::generator(i, rank);
            let fwd = apply_images(&phi.images, &apply_images(&phi.inverse_images, &x, rank), rank);
            let bwd = apply_images(&phi.inverse_images, &apply_images(&phi.images, &x, rank), rank);
            if fwd != x || bwd != x {
                return Err(Error::InvalidAutomorphism(format!(
                    "images and inverse images are not mutually inverse on x_{i}"
                )));
            }
        }
        Ok(phi)
    }

    /// Parse from ASCII image strings, e.g. `(["ab", "a"], ["b", "aB"]...)`.
    pub fn parse(images: &[&str], inverse_images: &[&str]) -> Result<Self> {
        let rank = images.len() as u8;
        let im = images
            .iter()
            .map(|s| Word::parse(s, rank))
            .collect::<Result<Vec<_>>>()?;
        let inv = inverse_images
            .iter()
            .map(|s| Word::parse(s, rank))
            .collect::<Result<Vec<_>>>()?;
        Automorphism::new(im, inv)
    }

    pub fn identity(rank: u8) -> Self {
        let images: Vec<Word> = (1..=rank).map(|i| Word::generator(i, rank)).collect();
        Automorphism {
            rank,
            images: images.clone(),
            inverse_images: images,
        }
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.inverse_images
    }

    pub fn image_of(&self, i: u8) -> &Word {
        &self.images[(i - 1) as usize]
    }

    pub fn apply(&self, w: &Word) -> Word {
        apply_images(&self.images, w, self.rank)
    }

    pub fn apply_class(&self, c: &ConjClass) -> ConjClass {
        ConjClass::of(&self.apply(&c.representative()))
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            rank: self.rank,
            images: self.inverse_images.clone(),
            inverse_images: self.images.clone(),
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(Automorphism {
            rank: self.rank,
            images: other.images.iter().map(|w| self.apply(w)).collect(),
            inverse_images: self
                .inverse_images
                .iter()
                .map(|w| other.inverse().apply(w))
                .collect(),
        })
    }

    pub fn pow(&self, k: i64) -> Automorphism {
        let base = if k >= 0 { self.clone() } else { self.inverse() };
        let mut acc = Automorphism::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            acc = base.compose(&acc).expect("same rank");
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        (1..=self.rank).all(|i| self.image_of(i) == &Word::generator(i, self.rank))
    }

    /// The golden-ratio automorphism `a -> ab, b -> a` of `F_2`, the
    /// smallest-dilatation iwip (expansion factor the golden ratio).
    pub fn golden() -> Automorphism {
        Automorphism::parse(&["ab", "a"], &["b", "Ba"]).expect("golden automorphism is valid")
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Abelianization matrix: entry `(i, j)` is the exponent sum of `x_i`
    /// in the image of `x_j`.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        let n = self.rank as usize;
        let mut m = vec![vec![0i64; n]; n];
        for j in 0..n {
            let col = self.images[j].abelianized();
            for i in 0..n {
                m[i][j] = col[i];
            }
        }
        m
    }

    /// Decide whether this automorphism is inner, i.e. conjugation by some
    /// `g`. The candidate conjugator is read off from the conjugacy of
    /// `phi(x_1)` with `x_1`, with a residual power of `x_1` searched in the
    /// bound `|k| <= max image length`; every positive answer is verified on
    /// the whole basis.
    pub fn is_inner(&self) -> InnerVerdict {
        match images_inner_conjugator(&self.images, self.rank) {
            Some(conjugator) => InnerVerdict::Inner { conjugator },
            None => InnerVerdict::NotInner,
        }
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Aut[")?;
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}->{}", crate::words::letter_to_char((i + 1) as i8), w)?;
        }
        write!(f, "]")
    }
}

/// Decide whether the endomorphism sending each basis letter `x_i` to
/// `images[i]` is conjugation by a single `g`, and return that `g`.
/// The candidate conjugator is read off from the conjugacy of `images[0]`
/// with `x_1`; the residual power of `x_1` (the centralizer ambiguity) is
/// searched within `|k| <= max image length`, and every positive answer is
/// verified on the whole basis.
pub fn images_inner_conjugator(images: &[Word], rank: u8) -> Option<Word> {
    let identity: Vec<Word> = (1..=rank).map(|i| Word::generator(i, rank)).collect();
    if images == identity.as_slice() {
        return Some(Word::identity(rank));
    }
    // Inner maps act trivially on homology.
    for (j, w) in images.iter().enumerate() {
        let ab = w.abelianized();
        for (i, &v) in ab.iter().enumerate() {
            if v != if i == j { 1 } else { 0 } {
                return None;
            }
        }
    }
    // images[0] must reduce to u x_1 u^{-1}.
    let ls = images[0].letters();
    if ls.len() % 2 == 0 {
        return None;
    }
    let mid = ls.len() / 2;
    if ls[mid] != 1 {
        return None;
    }
    let u = Word::new(ls[..mid].to_vec(), rank).expect("sub-word");
    let bound = images.iter().map(Word::len).max().unwrap_or(0) as i64;
    let x1 = Word::generator(1, rank);
    for k in -bound..=bound {
        let g = u.concat(&x1.pow(k)).expect("same rank");
        let ok = (1..=rank).all(|i| {
            &images[(i - 1) as usize] == &Word::generator(i, rank).conjugate_by(&g)
        });
        if ok {
            return Some(g);
        }
    }
    None
}

/// Conjugation by `g`: `x -> g x g^{-1}`.
pub fn inner_by(g: &Word) -> Automorphism {
    let rank = g.rank();
    let images = (1..=rank)
        .map(|i| Word::generator(i, rank).conjugate_by(g))
        .collect();
    let ginv = g.inverse();
    let inverse_images = (1..=rank)
        .map(|i| Word::generator(i, rank).conjugate_by(&ginv))
        .collect();
    Automorphism {
        rank,
        images,
        inverse_images,
    }
}

/// Verdict of the abelianization-level iwip screening.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IwipVerdict {
    Pass { char_poly: Vec<i64> },
    Fail { reason: IwipFailure },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IwipFailure {
    RootsOfUnity,
    ReduciblePolynomial,
    NoExpandingEigenvalue,
}

impl IwipVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, IwipVerdict::Pass { .. })
    }
}

/// Characteristic polynomial of a small integer matrix, monic, returned as
/// coefficients from constant term up (degree <= 3).
pub fn char_poly(m: &[Vec<i64>]) -> Vec<i64> {
    let n = m.len();
    match n {
        2 => {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            vec![det, -tr, 1]
        }
        3 => {
            let tr = m[0][0] + m[1][1] + m[2][2];
            // sum of principal 2x2 minors
            let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
                + m[0][0] * m[2][2]
                - m[0][2] * m[2][0]
                + m[1][1] * m[2][2]
                - m[1][2] * m[2][1];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            vec![-det, m2, -tr, 1]
        }
        _ => panic!("char_poly supports ranks 2 and 3"),
    }
}

fn poly_div_exact(p: &[i64], d: &[i64]) -> Option<Vec<i64>> {
    // both monic-ish; d monic. Returns quotient if remainder is zero.
    let mut rem = p.to_vec();
    let dd = d.len() - 1;
    if rem.len() - 1 < dd {
        return None;
    }
    let mut quot = vec![0i64; rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        for i in 0..=dd {
            rem[k + i] -= c * d[i];
        }
    }
    if rem.iter().all(|&c| c == 0) {
        Some(quot)
    } else {
        None
    }
}

/// True if the monic integer polynomial is a product of cyclotomic
/// polynomials of degree <= its own (so all roots are roots of unity).
fn all_roots_of_unity(p: &[i64]) -> bool {
    let cyclotomics: [&[i64]; 5] = [
        &[-1, 1],    // x - 1
        &[1, 1],     // x + 1
        &[1, 1, 1],  // x^2 + x + 1
        &[1, 0, 1],  // x^2 + 1
        &[1, -1, 1], // x^2 - x + 1
    ];
    let mut work = p.to_vec();
    loop {
        if work.len() == 1 {
            return work[0] == 1;
        }
        let mut divided = false;
        for c in cyclotomics {
            if let Some(q) = poly_div_exact(&work, c) {
                work = q;
                divided = true;
                break;
            }
        }
        if !divided {
            return false;
        }
    }
}

/// Irreducibility over Q for monic integer polynomials of degree 2 or 3:
/// such a polynomial is reducible iff it has an integer root (degree 3) or
/// an integer root / square discriminant (degree 2); for monic polynomials
/// rational roots are integers dividing the constant term.
fn irreducible_over_q(p: &[i64]) -> bool {
    let deg = p.len() - 1;
    let constant = p[0];
    if constant == 0 {
        return false; // x divides
    }
    let mut divisors = Vec::new();
    for d in 1..=constant.abs() {
        if constant % d == 0 {
            divisors.push(d);
            divisors.push(-d);
        }
    }
    let eval = |x: i64| -> i64 {
        p.iter()
            .rev()
            .fold(0i64, |acc, &c| acc.saturating_mul(x).saturating_add(c))
    };
    if divisors.iter().any(|&r| eval(r) == 0) {
        return false;
    }
    match deg {
        2 => true, // no rational root => irreducible
        3 => true, // cubic with no rational root is irreducible
        _ => panic!("degree out of range"),
    }
}

fn spectral_radius(p: &[i64]) -> f64 {
    // Largest root modulus of a monic polynomial of degree <= 3, via the
    // closed forms for quadratics and trisection of cubics by Newton from
    // several starts on the companion matrix's Gershgorin bound.
    let deg = p.len() - 1;
    match deg {
        2 => {
            let b = p[1] as f64;
            let c = p[0] as f64;
            let disc = b * b - 4.0 * c;
            if disc >= 0.0 {
                let r1 = (-b + disc.sqrt()) / 2.0;
                let r2 = (-b - disc.sqrt()) / 2.0;
                r1.abs().max(r2.abs())
            } else {
                c.abs().sqrt()
            }
        }
        3 => {
            // Find one real root by bisection+Newton (a real cubic always
            // has one), deflate to a quadratic, combine.
            let f = |x: f64| ((x + p[2] as f64) * x + p[1] as f64) * x + p[0] as f64;
            let bound = 1.0 + p.iter().take(3).map(|&c| (c as f64).abs()).fold(0.0, f64::max);
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            // Deflated quadratic x^2 + (p2 + r) x + (p1 + r*(p2 + r))
            let b = p[2] as f64 + r;
            let c = p[1] as f64 + r * b;
            let disc = b * b - 4.0 * c;
            let quad_max = if disc >= 0.0 {
                let r1 = (-b + disc.sqrt()) / 2.0;
                let r2 = (-b - disc.sqrt()) / 2.0;
                r1.abs().max(r2.abs())
            } else {
                c.abs().sqrt()
            };
            r.abs().max(quad_max)
        }
        _ => panic!("degree out of range"),
    }
}

/// Heuristic iwip screening on the abelianization: pass iff the
/// characteristic polynomial is irreducible over Q, not cyclotomic, and has
/// an eigenvalue of modulus > 1. A pass is a flag, not a proof.
pub fn iwip_heuristic(phi: &Automorphism) -> IwipVerdict {
    let p = char_poly(&phi.abelianization());
    if all_roots_of_unity(&p) {
        return IwipVerdict::Fail {
            reason: IwipFailure::RootsOfUnity,
        };
    }
    if !irreducible_over_q(&p) {
        return IwipVerdict::Fail {
            reason: IwipFailure::ReduciblePolynomial,
        };
    }
    if spectral_radius(&p) <= 1.0 + 1e-9 {
        return IwipVerdict::Fail {
            reason: IwipFailure::NoExpandingEigenvalue,
        };
    }
    IwipVerdict::Pass { char_poly: p }
}
