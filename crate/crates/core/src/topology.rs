//! Goldman bracket and Turaev cobracket by linked pairs of lifts in the
//! planar Cayley graph of a surface group.
//!
//! A lift of a cyclic word through the identity vertex is the bi-infinite
//! path reading the word periodically. Two distinct lifts cross exactly when
//! the ends of one lie on opposite sides of the other. Sides are read off the
//! counterclockwise rotation of edge labels at the first and last vertices the
//! two paths share. Each crossing is recorded once, at the first shared vertex
//! along the second branch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::surface::{CyclicWord, Letter, SurfaceGroup};

/// A crossing of two lifts: the word positions at which the first and second
/// branch pass through the shared base vertex, and the orientation sign of
/// the frame (first branch, second branch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub first: usize,
    pub second: usize,
    pub sign: i8,
}

/// A bi-infinite periodic path through the identity, starting to read the
/// word at `offset`.
struct Line<'a> {
    word: &'a [Letter],
    offset: usize,
}

impl Line<'_> {
    /// Letter on the edge from vertex k to vertex k + 1.
    fn letter(&self, k: i64) -> Letter {
        let n = self.word.len() as i64;
        self.word[(self.offset as i64 + k).rem_euclid(n) as usize]
    }

    /// Edge labels at vertex k: (towards k − 1, towards k + 1).
    fn edges(&self, k: i64) -> (Letter, Letter) {
        (-self.letter(k - 1), self.letter(k))
    }

    /// Word spelling the path from the identity to vertex k.
    fn path_to(&self, k: i64) -> Vec<Letter> {
        if k >= 0 {
            (0..k).map(|t| self.letter(t)).collect()
        } else {
            (k..0).rev().map(|t| -self.letter(t)).collect()
        }
    }
}

struct Planar {
    group: SurfaceGroup,
    pos: Vec<usize>,
    rank2: usize,
}

impl Planar {
    fn new(group: SurfaceGroup) -> Self {
        Planar { group, pos: group.rotation_positions(), rank2: 2 * group.rank() }
    }

    fn h1(&self, x: Letter) -> (usize, i32) {
        (x.unsigned_abs() as usize - 1, if x > 0 { 1 } else { -1 })
    }

    /// True when `e` lies counterclockwise strictly between `out` and `inn`,
    /// that is on the left of a path arriving along `inn` and leaving along
    /// `out`.
    fn on_left(&self, inn: Letter, out: Letter, e: Letter) -> bool {
        let n = self.rank2;
        let p = |x: Letter| self.pos[self.group.slot(x)];
        let d_e = (p(e) + n - p(out)) % n;
        let d_in = (p(inn) + n - p(out)) % n;
        d_e < d_in
    }

    /// Homology classes of the vertices k = −window..=window of a line,
    /// flattened row by row.
    fn homology(&self, line: &Line, window: i64) -> Vec<i32> {
        let rank = self.group.rank();
        let width = 2 * window as usize + 1;
        let mut out = vec![0i32; width * rank];
        let mid = window as usize;
        for k in 0..window {
            let (g, s) = self.h1(line.letter(k));
            let (prev, next) = out.split_at_mut((mid + k as usize + 1) * rank);
            next[..rank].copy_from_slice(&prev[(mid + k as usize) * rank..]);
            next[g] += s;
        }
        for k in (-window..0).rev() {
            let row = (mid as i64 + k) as usize;
            let (prev, next) = out.split_at_mut((row + 1) * rank);
            prev[row * rank..].copy_from_slice(&next[..rank]);
            let (g, s) = self.h1(line.letter(k));
            prev[row * rank + g] -= s;
        }
        out
    }

    /// Vertices shared by two lines within |index| ≤ window, as pairs of
    /// indices (index on p, index on q), ordered along q. Homology filters
    /// candidates; the word problem decides.
    fn shared_vertices(&self, p: &Line, q: &Line, window: i64) -> Vec<(i64, i64)> {
        let rank = self.group.rank();
        let (hp, hq) = (self.homology(p, window), self.homology(q, window));
        let mut out = Vec::new();
        for (mi, row_q) in hq.chunks_exact(rank).enumerate() {
            for (ki, row_p) in hp.chunks_exact(rank).enumerate() {
                if row_p != row_q {
                    continue;
                }
                let (k, m) = (ki as i64 - window, mi as i64 - window);
                let mut w = crate::surface::inverse(&p.path_to(k));
                w.extend(q.path_to(m));
                if self.group.is_trivial(&w) {
                    out.push((k, m));
                }
            }
        }
        out
    }

    /// Shared vertices, widening the window until none lies near its edge.
    fn shared_vertices_adaptive(&self, p: &Line, q: &Line) -> Vec<(i64, i64)> {
        let period = p.word.len().max(q.word.len()) as i64;
        let margin = 2 * self.rank2 as i64;
        let mut window = 2 * period + margin;
        loop {
            let shared = self.shared_vertices(p, q, window);
            let edge = shared.iter().any(|&(k, m)| k.abs() > window - margin || m.abs() > window - margin);
            if !edge {
                return shared;
            }
            window *= 2;
            assert!(window < 1 << 16, "lines fail to diverge; are they the same geodesic?");
        }
    }

    /// Sign of the crossing of q over p if the identity is the first vertex
    /// of q on p and the lines cross; None otherwise.
    fn linked(&self, p: &Line, q: &Line) -> Option<i8> {
        let shared = self.shared_vertices_adaptive(p, q);
        let &(k_first, m_first) = shared.first()?;
        if m_first != 0 || k_first != 0 {
            return None;
        }
        let &(k_last, m_last) = shared.last()?;
        let (p_in, p_out) = p.edges(k_first);
        let q_in = q.edges(m_first).0;
        let back_left = self.on_left(p_in, p_out, q_in);
        let (p_in, p_out) = p.edges(k_last);
        let q_out = q.edges(m_last).1;
        let front_left = self.on_left(p_in, p_out, q_out);
        match (back_left, front_left) {
            (false, true) => Some(1),
            (true, false) => Some(-1),
            _ => None,
        }
    }
}

/// Two lifts through the identity share an axis exactly when the elements
/// they translate by commute.
fn coaxial(group: &SurfaceGroup, a: &[Letter], i: usize, b: &[Letter], j: usize) -> bool {
    let (g, h) = (rotate(a, i), rotate(b, j));
    let mut c = g.clone();
    c.extend(&h);
    c.extend(crate::surface::inverse(&g));
    c.extend(crate::surface::inverse(&h));
    group.is_trivial(&c)
}

fn rotate(w: &[Letter], from: usize) -> Vec<Letter> {
    (0..w.len()).map(|t| w[(from + t) % w.len()]).collect()
}

/// Cyclic subword from position `from` up to, not including, `to`.
fn arc(w: &[Letter], from: usize, to: usize) -> Vec<Letter> {
    let n = w.len();
    let len = (to + n - from) % n;
    (0..len).map(|t| w[(from + t) % n]).collect()
}

/// How proper powers are resolved, recorded in cobracket output.
pub const POWER_CONVENTION: &str = "the n-th power of a primitive class has n² crossings per double point of its root and no twist crossings";

/// Crossings between distinct lifts of one class, one entry per
/// self-intersection. Coaxial lifts of a proper power are not compared, so a
/// power counts each transverse double point of its root with multiplicity
/// n² and adds no twist crossings.
pub fn self_intersection_pairs(w: &CyclicWord) -> Vec<Crossing> {
    let planar = Planar::new(w.group());
    let letters = w.letters();
    let n = letters.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if coaxial(&planar.group, letters, i, letters, j) {
                continue;
            }
            let p = Line { word: letters, offset: i };
            let q = Line { word: letters, offset: j };
            if let Some(sign) = planar.linked(&p, &q) {
                if sign > 0 {
                    out.push(Crossing { first: i, second: j, sign: 1 });
                }
            }
        }
    }
    out.sort();
    out
}

/// Crossings between lifts of two classes, one entry per intersection point.
/// Coaxial lifts, as for a class and its reverse, never cross.
pub fn intersection_pairs(a: &CyclicWord, b: &CyclicWord) -> Vec<Crossing> {
    let planar = Planar::new(a.group());
    let (la, lb) = (a.letters(), b.letters());
    let mut out = Vec::new();
    for i in 0..la.len() {
        for j in 0..lb.len() {
            if coaxial(&planar.group, la, i, lb, j) {
                continue;
            }
            let p = Line { word: la, offset: i };
            let q = Line { word: lb, offset: j };
            if let Some(sign) = planar.linked(&p, &q) {
                out.push(Crossing { first: i, second: j, sign });
            }
        }
    }
    out.sort();
    out
}

pub type PairKey = (CyclicWord, CyclicWord);

/// Integer combination of tensor pairs of classes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSum {
    pub terms: BTreeMap<String, i64>,
    #[serde(skip)]
    pairs: BTreeMap<PairKey, i64>,
}

impl TensorSum {
    pub fn add(&mut self, a: CyclicWord, b: CyclicWord, c: i64) {
        *self.pairs.entry((a, b)).or_insert(0) += c;
        self.pairs.retain(|_, v| *v != 0);
        self.sync();
    }

    fn sync(&mut self) {
        self.terms = self.pairs.iter().map(|((a, b), c)| (format!("{a} ⊗ {b}"), *c)).collect();
    }

    pub fn pairs(&self) -> &BTreeMap<PairKey, i64> {
        &self.pairs
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn swapped(&self) -> TensorSum {
        let mut out = TensorSum::default();
        for ((a, b), c) in &self.pairs {
            out.add(b.clone(), a.clone(), *c);
        }
        out
    }

    pub fn negated(&self) -> TensorSum {
        let mut out = self.clone();
        for v in out.pairs.values_mut() {
            *v = -*v;
        }
        out.sync();
        out
    }

    pub fn from_pairs(pairs: BTreeMap<PairKey, i64>) -> TensorSum {
        let mut out = TensorSum { terms: BTreeMap::new(), pairs };
        out.pairs.retain(|_, v| *v != 0);
        out.sync();
        out
    }
}

/// Integer combination of classes.
pub type ClassSum = BTreeMap<CyclicWord, i64>;

fn add_class(sum: &mut ClassSum, w: CyclicWord, c: i64) {
    let e = sum.entry(w.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        sum.remove(&w);
    }
}

/// The two loops obtained by resolving a self-crossing: the one leaving
/// along the first branch, then the other.
pub fn resolve(w: &CyclicWord, x: &Crossing) -> (CyclicWord, CyclicWord) {
    let g = w.group();
    let l = w.letters();
    let s1 = g.canonicalize(&arc(l, x.first, x.second)).expect("resolved loop is nontrivial");
    let s2 = g.canonicalize(&arc(l, x.second, x.first)).expect("resolved loop is nontrivial");
    (s1, s2)
}

/// Δ(w) = Σ over self-crossings of s₁ ⊗ s₂ − s₂ ⊗ s₁.
pub fn cobracket(w: &CyclicWord) -> TensorSum {
    let mut pairs: BTreeMap<PairKey, i64> = BTreeMap::new();
    for x in self_intersection_pairs(w) {
        let (s1, s2) = resolve(w, &x);
        let s = x.sign as i64;
        *pairs.entry((s1.clone(), s2.clone())).or_insert(0) += s;
        *pairs.entry((s2, s1)).or_insert(0) -= s;
    }
    TensorSum::from_pairs(pairs)
}

/// Goldman bracket: Σ over intersection points of ε · (a ·ₓ b).
pub fn bracket(a: &CyclicWord, b: &CyclicWord) -> ClassSum {
    let g = a.group();
    let mut out = ClassSum::new();
    for x in intersection_pairs(a, b) {
        let mut word = rotate(a.letters(), x.first);
        word.extend(rotate(b.letters(), x.second));
        let c = g.canonicalize(&word).expect("loop product is nontrivial for crossing classes");
        add_class(&mut out, c, x.sign as i64);
    }
    out
}

/// Orientation convention for the label [j]: the representative that
/// compares smaller than its reverse is the positive one.
pub fn is_positive(w: &CyclicWord) -> bool {
    *w <= w.reversed()
}

/// Lazily assigned integer labels; [−j] is the reversed class of [j].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Registry {
    pub labels: BTreeMap<String, i64>,
    #[serde(skip)]
    by_class: BTreeMap<CyclicWord, i64>,
    #[serde(default)]
    next: i64,
}

impl Registry {
    pub fn label(&mut self, w: &CyclicWord) -> i64 {
        if let Some(&l) = self.by_class.get(w) {
            return l;
        }
        let rev = w.reversed();
        let (pos, neg) = if is_positive(w) { (w.clone(), rev) } else { (rev, w.clone()) };
        self.next += 1;
        let l = self.next;
        self.labels.insert(pos.to_string(), l);
        self.labels.insert(neg.to_string(), -l);
        self.by_class.insert(pos, l);
        self.by_class.insert(neg, -l);
        self.by_class[w]
    }

    /// Rebuilds the class index after deserialization.
    pub fn restore(&mut self, genus: u8) -> Result<(), crate::surface::WordError> {
        self.by_class.clear();
        for (s, &l) in &self.labels {
            self.by_class.insert(CyclicWord::parse(genus, s)?, l);
            self.next = self.next.max(l.abs());
        }
        Ok(())
    }
}

/// Coefficients A_{j,k} of Δ(w) in registry labels.
pub fn cobracket_coefficients(w: &CyclicWord, registry: &mut Registry) -> BTreeMap<(i64, i64), i64> {
    let delta = cobracket(w);
    let mut out = BTreeMap::new();
    for ((a, b), c) in delta.pairs() {
        out.insert((registry.label(a), registry.label(b)), *c);
    }
    out
}

/// d = Σ_j A_{j,−j} over positive labels j, read from the coefficient map.
pub fn sporadic_count(w: &CyclicWord, registry: &mut Registry) -> i64 {
    cobracket_coefficients(w, registry)
        .iter()
        .filter(|((j, k), _)| *j > 0 && *k == -*j)
        .map(|(_, c)| c)
        .sum()
}

/// Same count from the crossings directly: a crossing whose resolved loops
/// are reverses of each other contributes its sign, oriented by which loop
/// carries the positive label.
pub fn sporadic_count_direct(w: &CyclicWord) -> i64 {
    let mut d = 0;
    for x in self_intersection_pairs(w) {
        let (s1, s2) = resolve(w, &x);
        if s2 == s1.reversed() {
            d += if is_positive(&s1) { x.sign as i64 } else { -(x.sign as i64) };
        }
    }
    d
}
