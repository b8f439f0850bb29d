//! Closed surface groups ⟨a₁,b₁,…,a_g,b_g | Π[a_i,b_i]⟩: word problem by
//! Dehn reduction and a conjugacy normal form for cyclic words.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A signed generator: a_i is 2i−1, b_i is 2i, inverses are negated.
pub type Letter = i8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("genus must be at least 2, got {0}")]
    Genus(u8),
    #[error("cannot parse letter {0:?}")]
    BadLetter(String),
    #[error("letter {0:?} is outside the genus-{1} alphabet")]
    OutOfAlphabet(String, u8),
    #[error("word represents the trivial class")]
    Trivial,
    #[error("empty word")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceGroup {
    genus: u8,
}

impl SurfaceGroup {
    pub fn new(genus: u8) -> Result<Self, WordError> {
        if genus < 2 {
            return Err(WordError::Genus(genus));
        }
        Ok(SurfaceGroup { genus })
    }

    pub fn genus(&self) -> u8 {
        self.genus
    }

    pub fn rank(&self) -> usize {
        2 * self.genus as usize
    }

    /// a₁ b₁ a₁⁻¹ b₁⁻¹ ⋯ a_g b_g a_g⁻¹ b_g⁻¹.
    pub fn relator(&self) -> Vec<Letter> {
        (1..=self.genus as i8).flat_map(|i| [2 * i - 1, 2 * i, -(2 * i - 1), -(2 * i)]).collect()
    }

    /// Counterclockwise order of the edge labels around every vertex of the
    /// planar Cayley graph: a₁, B₁, A₁, b₁, a₂, B₂, A₂, b₂, …
    pub fn rotation(&self) -> Vec<Letter> {
        (1..=self.genus as i8).flat_map(|i| [2 * i - 1, -(2 * i), -(2 * i - 1), 2 * i]).collect()
    }

    /// Position of each letter in the rotation, indexed by `slot(letter)`.
    pub fn rotation_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; 2 * self.rank()];
        for (k, &x) in self.rotation().iter().enumerate() {
            pos[self.slot(x)] = k;
        }
        pos
    }

    /// Dense index of a letter in 0..4g.
    pub fn slot(&self, x: Letter) -> usize {
        let g = x.unsigned_abs() as usize - 1;
        2 * g + usize::from(x < 0)
    }

    pub fn parse_letter(&self, s: &str) -> Result<Letter, WordError> {
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(|| WordError::BadLetter(s.into()))?;
        let idx: u8 = chars.as_str().parse().map_err(|_| WordError::BadLetter(s.into()))?;
        if idx == 0 || idx > self.genus {
            return Err(WordError::OutOfAlphabet(s.into(), self.genus));
        }
        let base = 2 * idx as i8;
        match head {
            'a' => Ok(base - 1),
            'A' => Ok(-(base - 1)),
            'b' => Ok(base),
            'B' => Ok(-base),
            _ => Err(WordError::BadLetter(s.into())),
        }
    }

    /// Parses letters such as `a1B2A1b2`; whitespace is ignored.
    pub fn parse_word(&self, s: &str) -> Result<Vec<Letter>, WordError> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut out = Vec::new();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let digits = rest[1..].find(|c: char| !c.is_ascii_digit()).map_or(rest.len(), |k| k + 1);
            out.push(self.parse_letter(&rest[..digits])?);
            rest = &rest[digits..];
        }
        Ok(out)
    }

    /// Dehn reduction of a linear word; returns the reduced word.
    pub fn dehn_reduce(&self, word: &[Letter]) -> Vec<Letter> {
        let pieces = relator_pieces(self);
        let n = 4 * self.genus as usize;
        let half = n / 2;
        let mut w = free_reduce(word);
        'outer: loop {
            for s in 0..w.len() {
                for piece in &pieces[self.slot(w[s])] {
                    let mut l = 0;
                    while l < n && s + l < w.len() && w[s + l] == piece[l] {
                        l += 1;
                    }
                    if l > half {
                        let replacement = inverse(&piece[l..]);
                        let mut next = w[..s].to_vec();
                        next.extend(replacement);
                        next.extend_from_slice(&w[s + l..]);
                        w = free_reduce(&next);
                        continue 'outer;
                    }
                }
            }
            return w;
        }
    }

    pub fn is_trivial(&self, word: &[Letter]) -> bool {
        self.dehn_reduce(word).is_empty()
    }

    /// One step of cyclic Dehn reduction, or None if the cyclic word has no
    /// subword longer than half a relator.
    fn cyclic_shorten(&self, w: &[Letter]) -> Option<Vec<Letter>> {
        let pieces = relator_pieces(self);
        let n = 4 * self.genus as usize;
        let half = n / 2;
        let len = w.len();
        for s in 0..len {
            for piece in &pieces[self.slot(w[s])] {
                let mut l = 0;
                while l < n && l < len && w[(s + l) % len] == piece[l] {
                    l += 1;
                }
                if l > half {
                    let mut next = inverse(&piece[l..]);
                    next.extend((l..len).map(|k| w[(s + k) % len]));
                    return Some(cyclic_reduce(&next));
                }
            }
        }
        None
    }

    /// Cyclic words of equal length obtained by replacing half a relator by
    /// the inverse of the complementary half.
    fn half_swaps(&self, w: &[Letter]) -> Vec<Vec<Letter>> {
        let pieces = relator_pieces(self);
        let half = 2 * self.genus as usize;
        let len = w.len();
        let mut out = Vec::new();
        if len < half {
            return out;
        }
        for s in 0..len {
            for piece in &pieces[self.slot(w[s])] {
                if (0..half).all(|k| w[(s + k) % len] == piece[k]) {
                    let mut next = inverse(&piece[half..]);
                    next.extend((half..len).map(|k| w[(s + k) % len]));
                    out.push(cyclic_reduce(&next));
                }
            }
        }
        out
    }

    /// Conjugacy normal form: the least rotation, in letter order, among all
    /// shortest cyclic words of the class.
    pub fn canonicalize(&self, word: &[Letter]) -> Result<CyclicWord, WordError> {
        if word.is_empty() {
            return Err(WordError::Empty);
        }
        let mut start = cyclic_reduce(word);
        'restart: loop {
            while let Some(shorter) = self.cyclic_shorten(&start) {
                start = shorter;
            }
            if start.is_empty() {
                return Err(WordError::Trivial);
            }
            let len = start.len();
            let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
            let mut queue = VecDeque::new();
            let first = least_rotation(&start);
            seen.insert(first.clone());
            queue.push_back(first);
            while let Some(w) = queue.pop_front() {
                for next in self.half_swaps(&w) {
                    if next.len() < len || self.cyclic_shorten(&next).is_some() {
                        start = next;
                        continue 'restart;
                    }
                    let key = least_rotation(&next);
                    if seen.insert(key.clone()) {
                        queue.push_back(key);
                    }
                }
            }
            // Periodic representatives come first so that proper powers
            // stay visibly periodic in canonical form.
            let best = seen
                .into_iter()
                .min_by_key(|w| (std::cmp::Reverse(w.len() / period(w)), word_key(w)))
                .expect("nonempty orbit");
            return Ok(CyclicWord { genus: self.genus, letters: best });
        }
    }

    pub fn canonicalize_str(&self, s: &str) -> Result<CyclicWord, WordError> {
        self.canonicalize(&self.parse_word(s)?)
    }
}

/// Rotations of the relator and of its inverse, grouped by first letter
/// and indexed by slot. Built once per genus.
fn relator_pieces(group: &SurfaceGroup) -> Arc<Vec<[Vec<Letter>; 2]>> {
    static CACHE: OnceLock<Mutex<BTreeMap<u8, Arc<Vec<[Vec<Letter>; 2]>>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("piece cache poisoned");
    cache
        .entry(group.genus)
        .or_insert_with(|| {
            let rel = group.relator();
            let inv = inverse(&rel);
            let n = rel.len();
            let from = |r: &[Letter], x: Letter| -> Vec<Letter> {
                let k = r.iter().position(|&y| y == x).expect("every letter occurs once");
                (0..n).map(|t| r[(k + t) % n]).collect()
            };
            let mut out = vec![[Vec::new(), Vec::new()]; n];
            for x in (1..=group.rank() as i8).flat_map(|x| [x, -x]) {
                out[group.slot(x)] = [from(&rel, x), from(&inv, x)];
            }
            Arc::new(out)
        })
        .clone()
}

pub fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&x| -x).collect()
}

pub fn free_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn cyclic_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out = free_reduce(w);
    while out.len() >= 2 && out[0] == -out[out.len() - 1] {
        out.pop();
        out.remove(0);
    }
    out
}

/// Sort key of a letter: a₁ < A₁ < b₁ < B₁ < a₂ < ⋯
pub fn letter_key(x: Letter) -> u8 {
    2 * (x.unsigned_abs() - 1) + u8::from(x < 0)
}

fn word_key(w: &[Letter]) -> Vec<u8> {
    w.iter().map(|&x| letter_key(x)).collect()
}

/// Smallest p such that the word is a power of its first p letters.
fn period(w: &[Letter]) -> usize {
    let n = w.len();
    (1..=n).find(|&p| n % p == 0 && (0..n).all(|k| w[k] == w[k % p])).unwrap_or(n)
}

pub fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    let n = w.len();
    (0..n)
        .map(|k| (0..n).map(|t| w[(k + t) % n]).collect::<Vec<_>>())
        .min_by_key(|r| word_key(r))
        .unwrap_or_default()
}

/// A nontrivial conjugacy class in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    genus: u8,
    letters: Vec<Letter>,
}

impl PartialOrd for CyclicWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CyclicWord {
    /// Shorter words first, then letter order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.genus, self.letters.len(), word_key(&self.letters)).cmp(&(
            other.genus,
            other.letters.len(),
            word_key(&other.letters),
        ))
    }
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn group(&self) -> SurfaceGroup {
        SurfaceGroup { genus: self.genus }
    }

    /// The class with reversed orientation.
    pub fn reversed(&self) -> CyclicWord {
        self.group().canonicalize(&inverse(&self.letters)).expect("inverse of a nontrivial class")
    }

    /// Smallest p such that the word is (letters[..p])^(n/p).
    pub fn root_length(&self) -> usize {
        period(&self.letters)
    }

    pub fn power_exponent(&self) -> usize {
        self.len() / self.root_length()
    }

    pub fn parse(genus: u8, s: &str) -> Result<CyclicWord, WordError> {
        SurfaceGroup::new(genus)?.canonicalize_str(s)
    }
}

pub fn format_letter(x: Letter) -> String {
    let i = (x.unsigned_abs() + 1) / 2;
    let c = match (x.unsigned_abs() % 2 == 1, x > 0) {
        (true, true) => 'a',
        (true, false) => 'A',
        (false, true) => 'b',
        (false, false) => 'B',
    };
    format!("{c}{i}")
}

pub fn format_word(w: &[Letter]) -> String {
    w.iter().map(|&x| format_letter(x)).collect()
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.letters))
    }
}

/// Every canonical class whose normal form has exactly `len` letters, in
/// canonical order.
pub fn classes_of_length(group: SurfaceGroup, len: usize) -> Vec<CyclicWord> {
    let letters: Vec<Letter> = (1..=group.rank() as i8).flat_map(|x| [x, -x]).collect();
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<Letter>> = vec![vec![]];
    while let Some(w) = stack.pop() {
        if w.len() == len {
            if w[0] != -w[len - 1] && least_rotation(&w) == w {
                if let Ok(c) = group.canonicalize(&w) {
                    if c.len() == len {
                        out.insert(c);
                    }
                }
            }
            continue;
        }
        for &x in &letters {
            if w.last() != Some(&-x) {
                let mut next = w.clone();
                next.push(x);
                stack.push(next);
            }
        }
    }
    out.into_iter().collect()
}

impl Serialize for CyclicWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("g{}:{}", self.genus, self))
    }
}

impl<'de> Deserialize<'de> for CyclicWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        let (g, w) = s.split_once(':').ok_or_else(|| D::Error::custom("expected g<genus>:<word>"))?;
        let genus: u8 = g.trim_start_matches('g').parse().map_err(D::Error::custom)?;
        CyclicWord::parse(genus, w).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> SurfaceGroup {
        SurfaceGroup::new(2).unwrap()
    }

    #[test]
    fn parse_and_format() {
        let g = g2();
        let w = g.parse_word("a1B2A1b2").unwrap();
        assert_eq!(format_word(&w), "a1B2A1b2");
        assert!(g.parse_word("a3").is_err());
        assert!(SurfaceGroup::new(1).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let g = g2();
        assert_eq!(g.canonicalize_str("a1A1b1").unwrap().to_string(), "b1");
        assert_eq!(g.canonicalize_str("b1a1").unwrap(), g.canonicalize_str("a1b1").unwrap());
        assert_eq!(g.canonicalize_str("a1b1A1B1a2b2A2B2"), Err(WordError::Trivial));
    }

    #[test]
    fn relator_faces_match_rotation() {
        // Walking a face: arrive along x, leave along the counterclockwise
        // successor of x⁻¹. Every face must spell a rotation of the relator.
        let g = g2();
        let rot = g.rotation();
        let pos = g.rotation_positions();
        let rel = g.relator();
        let n = rot.len();
        for &start in &rot {
            let mut word = vec![start];
            let mut x = start;
            for _ in 1..n {
                let back = -x;
                x = rot[(pos[g.slot(back)] + 1) % n];
                word.push(x);
            }
            let rotations: Vec<Vec<Letter>> = (0..n).map(|k| (0..n).map(|t| rel[(k + t) % n]).collect()).collect();
            assert!(rotations.contains(&word), "face {} is not a relator rotation", format_word(&word));
        }
    }

    #[test]
    fn half_swap_classes_agree() {
        let g = g2();
        // a1 b1 A1 B1 = (a2 b2 A2 B2)⁻¹ conjugacy-wise: two spellings of one class.
        let x = g.canonicalize_str("a1b1A1B1").unwrap();
        let y = g.canonicalize_str("b2a2B2A2").unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn roots() {
        let g = g2();
        let w = g.canonicalize_str("a1a1").unwrap();
        assert_eq!(w.root_length(), 1);
        assert_eq!(w.power_exponent(), 2);
    }
}
