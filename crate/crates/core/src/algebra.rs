//! Exact graded algebra of orbit generators over ℚ[[ħ]], the differential
//! driven by a table of curve counts, and the algebraic torsion solver.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown generator id {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator id {0}")]
    DuplicateGenerator(String),
    #[error("generator {0} is a bad orbit and cannot appear")]
    BadOrbit(String),
    #[error("count entry with no positive ends")]
    NoPositiveEnds,
    #[error("covering multiplicity of {0} must be at least 1")]
    ZeroMultiplicity(String),
    #[error("truncation parameters must be positive")]
    BadTruncation,
    #[error("differential does not square to zero; witness {0}")]
    NotSquareZero(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_index(cz: i64) -> Parity {
        if cz.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// A generator q_γ for a good orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub parity: Parity,
    pub multiplicity: u32,
    #[serde(with = "crate::ratio")]
    pub action: BigRational,
    #[serde(default = "default_good")]
    pub good: bool,
}

fn default_good() -> bool {
    true
}

/// The generators of the algebra, in a fixed order that sets the storage
/// order of monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Generators {
    gens: Vec<Generator>,
    by_id: BTreeMap<String, usize>,
}

impl Generators {
    pub fn new(gens: Vec<Generator>) -> Result<Self, AlgebraError> {
        let mut by_id = BTreeMap::new();
        for (k, g) in gens.iter().enumerate() {
            if g.multiplicity == 0 {
                return Err(AlgebraError::ZeroMultiplicity(g.id.clone()));
            }
            if by_id.insert(g.id.clone(), k).is_some() {
                return Err(AlgebraError::DuplicateGenerator(g.id.clone()));
            }
        }
        Ok(Generators { gens, by_id })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn get(&self, k: usize) -> &Generator {
        &self.gens[k]
    }

    pub fn all(&self) -> &[Generator] {
        &self.gens
    }

    /// Index of a good generator.
    pub fn index(&self, id: &str) -> Result<usize, AlgebraError> {
        let k = *self.by_id.get(id).ok_or_else(|| AlgebraError::UnknownGenerator(id.to_string()))?;
        if !self.gens[k].good {
            return Err(AlgebraError::BadOrbit(id.to_string()));
        }
        Ok(k)
    }

    fn is_odd(&self, k: usize) -> bool {
        self.gens[k].parity.is_odd()
    }
}

/// A product of generators, stored in increasing generator order, times a
/// power of ħ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub hbar: u32,
    pub vars: Vec<usize>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial::default()
    }

    pub fn var(k: usize) -> Self {
        Monomial { hbar: 0, vars: vec![k] }
    }

    pub fn hbar_power(j: u32) -> Self {
        Monomial { hbar: j, vars: vec![] }
    }

    /// Product of the generators in the given order, with the sign of
    /// sorting them; None when an odd generator repeats.
    pub fn from_ordered(gens: &Generators, hbar: u32, ordered: &[usize]) -> Option<(i8, Monomial)> {
        let (sign, vars) = sort_with_sign(gens, ordered)?;
        Some((sign, Monomial { hbar, vars }))
    }

    pub fn parity(&self, gens: &Generators) -> Parity {
        self.vars.iter().fold(Parity::Even, |p, &k| p.add(gens.get(k).parity))
    }

    pub fn action(&self, gens: &Generators) -> BigRational {
        self.vars.iter().fold(BigRational::zero(), |a, &k| a + &gens.get(k).action)
    }

    pub fn render(&self, gens: &Generators) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.hbar == 1 {
            parts.push("ħ".into());
        } else if self.hbar > 1 {
            parts.push(format!("ħ^{}", self.hbar));
        }
        parts.extend(self.vars.iter().map(|&k| format!("q[{}]", gens.get(k).id)));
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

/// Stable sort of generator indices, tracking the sign of transposing odd
/// generators; None when an odd generator appears twice.
fn sort_with_sign(gens: &Generators, ordered: &[usize]) -> Option<(i8, Vec<usize>)> {
    let mut odd_inversions = 0usize;
    for i in 0..ordered.len() {
        for j in i + 1..ordered.len() {
            let (a, b) = (ordered[i], ordered[j]);
            if a == b && gens.is_odd(a) {
                return None;
            }
            if a > b && gens.is_odd(a) && gens.is_odd(b) {
                odd_inversions += 1;
            }
        }
    }
    let mut vars = ordered.to_vec();
    vars.sort_unstable();
    Some((if odd_inversions % 2 == 0 { 1 } else { -1 }, vars))
}

/// Finite ℚ-combination of monomials with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, BigRational>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::unit(), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn generator(k: usize) -> Self {
        Self::monomial(Monomial::var(k), BigRational::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&mut self, other: &AlgebraElement) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn scaled(&self, c: &BigRational) -> AlgebraElement {
        let mut out = Self::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Common parity of all terms, if homogeneous and nonzero.
    pub fn parity(&self, gens: &Generators) -> Option<Parity> {
        let ps: BTreeSet<Parity> = self.terms.keys().map(|m| m.parity(gens)).collect();
        (ps.len() == 1).then(|| *ps.iter().next().expect("one parity"))
    }

    /// Product in the graded-commutative algebra.
    pub fn mul(&self, other: &AlgebraElement, gens: &Generators) -> AlgebraElement {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let ordered: Vec<usize> = a.vars.iter().chain(&b.vars).copied().collect();
                if let Some((s, m)) = Monomial::from_ordered(gens, a.hbar + b.hbar, &ordered) {
                    out.add_term(m, x * y * ratio::int(s as i64));
                }
            }
        }
        out
    }

    pub fn truncated(&self, gens: &Generators, trunc: &Truncation) -> AlgebraElement {
        AlgebraElement { terms: self.terms.iter().filter(|(m, _)| trunc.admits(gens, m)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn render(&self, gens: &Generators) -> BTreeMap<String, String> {
        self.terms.iter().map(|(m, c)| (m.render(gens), ratio::format(c))).collect()
    }
}

/// Limits on the ħ exponent, the number of generators and the total action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_hbar: u32,
    pub max_len: usize,
    #[serde(with = "crate::ratio")]
    pub action_cap: BigRational,
}

impl Truncation {
    pub fn new(max_hbar: u32, max_len: usize, action_cap: BigRational) -> Result<Self, AlgebraError> {
        if max_hbar == 0 || max_len == 0 || !action_cap.is_positive() {
            return Err(AlgebraError::BadTruncation);
        }
        Ok(Truncation { max_hbar, max_len, action_cap })
    }

    pub fn admits(&self, gens: &Generators, m: &Monomial) -> bool {
        m.hbar <= self.max_hbar && m.vars.len() <= self.max_len && m.action(gens) <= self.action_cap
    }

    /// Every admissible monomial without ħ, in storage order.
    pub fn basis(&self, gens: &Generators) -> Vec<Monomial> {
        let good: Vec<usize> = (0..gens.len()).filter(|&k| gens.get(k).good).collect();
        let mut out = vec![Monomial::unit()];
        let mut frontier = vec![(Vec::<usize>::new(), BigRational::zero())];
        for _ in 0..self.max_len {
            let mut next = Vec::new();
            for (vars, action) in &frontier {
                let start = vars.last().copied();
                for &k in &good {
                    if start.is_some_and(|s| k < s || (k == s && gens.is_odd(k))) {
                        continue;
                    }
                    let a = action + &gens.get(k).action;
                    if a > self.action_cap {
                        continue;
                    }
                    let mut v = vars.clone();
                    v.push(k);
                    out.push(Monomial { hbar: 0, vars: v.clone() });
                    next.push((v, a));
                }
            }
            frontier = next;
        }
        out.sort();
        out
    }
}

/// Key of a curve count: genus, positive ends and negative ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    pub genus: u32,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

impl CountKey {
    /// The k of the D_k this count feeds.
    pub fn order(&self) -> u32 {
        self.positive.len() as u32 + self.genus
    }
}

/// Rational counts n_g(Γ⁺, Γ⁻) over the generators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CurveCountTable {
    entries: BTreeMap<CountKey, BigRational>,
}

impl CurveCountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: CountKey, count: BigRational) -> Result<(), AlgebraError> {
        if key.positive.is_empty() {
            return Err(AlgebraError::NoPositiveEnds);
        }
        let slot = self.entries.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += count;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<CountKey, BigRational> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_order(&self) -> u32 {
        self.entries.keys().map(CountKey::order).max().unwrap_or(0)
    }
}

/// s⁻! · s⁺! · κ(γ₁⁻) ⋯ κ(γ_{s⁻}⁻).
pub fn combinatorial_factor(negative_multiplicities: &[u32], positive_count: usize) -> BigInt {
    let fact = |n: usize| (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k));
    negative_multiplicities.iter().fold(fact(negative_multiplicities.len()) * fact(positive_count), |a, &k| a * BigInt::from(k))
}

fn key_factor(gens: &Generators, key: &CountKey) -> BigRational {
    let kappas: Vec<u32> = key.negative.iter().map(|&k| gens.get(k).multiplicity).collect();
    BigRational::from_integer(combinatorial_factor(&kappas, key.positive.len()))
}

/// ∂/∂q_x applied to a monomial, with the Koszul sign of moving the
/// derivative past the odd generators stored before x.
fn derivative(gens: &Generators, x: usize, m: &Monomial) -> Option<(i64, Monomial)> {
    let first = m.vars.iter().position(|&v| v == x)?;
    let count = m.vars.iter().filter(|&&v| v == x).count();
    let sign = if gens.is_odd(x) && m.vars[..first].iter().filter(|&&v| gens.is_odd(v)).count() % 2 == 1 { -1 } else { 1 };
    let mut vars = m.vars.clone();
    vars.remove(first);
    Some((sign * count as i64, Monomial { hbar: m.hbar, vars }))
}

/// q_{Γ⁻} ∂_{Γ⁺} applied to one monomial, ħ untouched.
fn apply_key(gens: &Generators, key: &CountKey, m: &Monomial) -> Option<(BigRational, Monomial)> {
    let mut coef = 1i64;
    let mut cur = m.clone();
    for &x in key.positive.iter().rev() {
        let (c, next) = derivative(gens, x, &cur)?;
        coef *= c;
        cur = next;
    }
    let ordered: Vec<usize> = key.negative.iter().chain(&cur.vars).copied().collect();
    let (s, out) = Monomial::from_ordered(gens, cur.hbar, &ordered)?;
    Some((ratio::int(coef * s as i64), out))
}

/// D_k of an element, without truncation.
fn dk_exact(gens: &Generators, k: u32, counts: &CurveCountTable, x: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (key, n) in counts.entries().iter().filter(|(key, _)| key.order() == k) {
        let weight = n / key_factor(gens, key);
        for (m, c) in x.terms() {
            if let Some((s, image)) = apply_key(gens, key, m) {
                out.add_term(image, &weight * s * c);
            }
        }
    }
    out
}

/// D_k(x), truncated.
pub fn apply_dk(gens: &Generators, k: u32, counts: &CurveCountTable, x: &AlgebraElement, trunc: &Truncation) -> AlgebraElement {
    dk_exact(gens, k, counts, x).truncated(gens, trunc)
}

/// D(x) = Σ_k ħ^(k−1) D_k(x) with nothing discarded.
pub fn apply_d_exact(gens: &Generators, counts: &CurveCountTable, x: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for k in 1..=counts.max_order() {
        for (m, c) in dk_exact(gens, k, counts, x).terms() {
            out.add_term(Monomial { hbar: m.hbar + k - 1, vars: m.vars.clone() }, c.clone());
        }
    }
    out
}

/// D(x), truncated.
pub fn apply_d(gens: &Generators, counts: &CurveCountTable, x: &AlgebraElement, trunc: &Truncation) -> AlgebraElement {
    apply_d_exact(gens, counts, x).truncated(gens, trunc)
}

/// Outcome of the square-zero check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareZero {
    pub holds: bool,
    pub witness: Option<Monomial>,
    pub checked: usize,
}

/// Checks D∘D = 0 on every basis monomial of the truncation, comparing the
/// terms of D∘D that lie inside the truncation.
pub fn check_square_zero(gens: &Generators, counts: &CurveCountTable, trunc: &Truncation) -> SquareZero {
    let basis = trunc.basis(gens);
    for m in &basis {
        let x = AlgebraElement::monomial(m.clone(), BigRational::one());
        let dd = apply_d_exact(gens, counts, &apply_d_exact(gens, counts, &x)).truncated(gens, trunc);
        if !dd.is_zero() {
            return SquareZero { holds: false, witness: Some(m.clone()), checked: basis.len() };
        }
    }
    SquareZero { holds: true, witness: None, checked: basis.len() }
}

/// Result of the torsion solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TorsionOrder {
    /// D x = ħ^order with x the certificate.
    Certified { order: u32, certificate: AlgebraElement },
    Unknown,
}

/// Sparse integer vector over monomials.
type SparseRow = BTreeMap<Monomial, BigInt>;

/// Vector together with the integer combination of unknowns producing it.
struct Tracked {
    vector: SparseRow,
    combination: BTreeMap<usize, BigInt>,
}

impl Tracked {
    /// self ← a·self − b·other.
    fn eliminate(&mut self, a: &BigInt, b: &BigInt, other: &Tracked) {
        fn combine<K: Ord + Clone>(x: &mut BTreeMap<K, BigInt>, a: &BigInt, b: &BigInt, y: &BTreeMap<K, BigInt>) {
            for v in x.values_mut() {
                *v *= a;
            }
            for (k, v) in y {
                let slot = x.entry(k.clone()).or_insert_with(BigInt::zero);
                *slot -= b * v;
            }
            x.retain(|_, v| !v.is_zero());
        }
        combine(&mut self.vector, a, b, &other.vector);
        combine(&mut self.combination, a, b, &other.combination);
        self.normalize();
    }

    /// Divides vector and combination by their common content.
    fn normalize(&mut self) {
        let g = self.vector.values().chain(self.combination.values()).fold(BigInt::zero(), |g, v| g.gcd(v));
        if g > BigInt::one() {
            for v in self.vector.values_mut().chain(self.combination.values_mut()) {
                *v /= &g;
            }
        }
    }
}

/// Integer row with the least common denominator cleared.
fn integral(x: &AlgebraElement) -> (SparseRow, BigInt) {
    let den = x.terms().values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let row = x.terms().iter().map(|(m, c)| (m.clone(), c.numer() * (&den / c.denom()))).collect();
    (row, den)
}

/// Echelon basis of the images D(u) of admissible unknowns u.
pub struct ImageBasis {
    unknowns: Vec<Monomial>,
    /// Keyed by leading monomial; each vector equals Σ combination_j · D(u_j).
    pivots: BTreeMap<Monomial, Tracked>,
}

impl ImageBasis {
    /// Unknowns are ħ^j·m for basis monomials m whose full image stays in
    /// the truncation.
    pub fn build(gens: &Generators, counts: &CurveCountTable, trunc: &Truncation) -> ImageBasis {
        let mut unknowns = Vec::new();
        let mut pivots: BTreeMap<Monomial, Tracked> = BTreeMap::new();
        for m in trunc.basis(gens) {
            for j in 0..=trunc.max_hbar {
                let u = Monomial { hbar: j, vars: m.vars.clone() };
                let image = apply_d_exact(gens, counts, &AlgebraElement::monomial(u.clone(), BigRational::one()));
                if image.is_zero() || image.terms().keys().any(|t| !trunc.admits(gens, t)) {
                    continue;
                }
                let (row, den) = integral(&image);
                let idx = unknowns.len();
                unknowns.push(u);
                let mut t = Tracked { vector: row, combination: BTreeMap::from([(idx, den)]) };
                t.normalize();
                reduce(&mut t, &pivots);
                if let Some((lead, _)) = t.vector.iter().next() {
                    pivots.insert(lead.clone(), t);
                }
            }
        }
        ImageBasis { unknowns, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves D x = target within the unknowns, if possible.
    pub fn solve(&self, target: &AlgebraElement) -> Option<AlgebraElement> {
        let (row, den) = integral(target);
        // Invariant: vector = scale·den·target − Σ combination_j · D(u_j).
        let mut t = Tracked { vector: row, combination: BTreeMap::new() };
        let mut scale = BigInt::one();
        while let Some((lead, coef)) = t.vector.iter().next().map(|(m, c)| (m.clone(), c.clone())) {
            let p = self.pivots.get(&lead)?;
            let a = p.vector[&lead].clone();
            let g = a.gcd(&coef);
            let (a, b) = (&a / &g, &coef / &g);
            for v in t.vector.values_mut().chain(t.combination.values_mut()) {
                *v *= &a;
            }
            scale *= &a;
            for (k, v) in &p.vector {
                let slot = t.vector.entry(k.clone()).or_insert_with(BigInt::zero);
                *slot -= &b * v;
            }
            for (k, v) in &p.combination {
                let slot = t.combination.entry(*k).or_insert_with(BigInt::zero);
                *slot += &b * v;
            }
            t.vector.retain(|_, v| !v.is_zero());
            t.combination.retain(|_, v| !v.is_zero());
        }
        let denom = scale * den;
        let mut x = AlgebraElement::zero();
        for (k, v) in &t.combination {
            x.add_term(self.unknowns[*k].clone(), BigRational::new(v.clone(), denom.clone()));
        }
        Some(x)
    }
}

fn reduce(t: &mut Tracked, pivots: &BTreeMap<Monomial, Tracked>) {
    loop {
        let Some((lead, coef)) = t.vector.iter().find(|(m, _)| pivots.contains_key(*m)).map(|(m, c)| (m.clone(), c.clone())) else {
            return;
        };
        let p = &pivots[&lead];
        let a = p.vector[&lead].clone();
        let g = a.gcd(&coef);
        t.eliminate(&(&a / &g), &(&coef / &g), p);
    }
}

/// Smallest k ≤ max_hbar with ħ^k exact inside the truncation, with the
/// solving element as certificate.
pub fn torsion_order(gens: &Generators, counts: &CurveCountTable, trunc: &Truncation) -> Result<TorsionOrder, AlgebraError> {
    let sz = check_square_zero(gens, counts, trunc);
    if let Some(w) = sz.witness {
        return Err(AlgebraError::NotSquareZero(w.render(gens)));
    }
    let basis = ImageBasis::build(gens, counts, trunc);
    for k in 0..=trunc.max_hbar {
        let target = AlgebraElement::monomial(Monomial::hbar_power(k), BigRational::one());
        if let Some(x) = basis.solve(&target) {
            debug_assert_eq!(apply_d_exact(gens, counts, &x), target);
            return Ok(TorsionOrder::Certified { order: k, certificate: x });
        }
    }
    Ok(TorsionOrder::Unknown)
}

/// JSON form of a count table over named generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountDocument {
    pub generators: Vec<Generator>,
    pub counts: Vec<CountEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountEntry {
    pub genus: u32,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    #[serde(with = "crate::ratio")]
    pub count: BigRational,
}

impl CountDocument {
    pub fn resolve(&self) -> Result<(Generators, CurveCountTable), AlgebraError> {
        let gens = Generators::new(self.generators.clone())?;
        let mut table = CurveCountTable::new();
        for e in &self.counts {
            let ids = |v: &[String]| v.iter().map(|s| gens.index(s)).collect::<Result<Vec<_>, _>>();
            table.insert(CountKey { genus: e.genus, positive: ids(&e.positive)?, negative: ids(&e.negative)? }, e.count.clone())?;
        }
        Ok((gens, table))
    }
}
