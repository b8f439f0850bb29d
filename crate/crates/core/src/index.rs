//! Index calculus: Conley–Zehnder shifts, Fredholm and normal indices,
//! transversality predicates and obstruction ranks. Pure integer arithmetic.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("orbit {id} has cover {cover} above the covering threshold {threshold}")]
    ThresholdViolation { id: String, cover: u32, threshold: u32 },
    #[error("orbit {0} has no base critical point")]
    MissingBase(String),
    #[error("orbit {0} is not a right-side orbit")]
    NotRightSide(String),
    #[error("obstruction rank would be negative ({0})")]
    NegativeRank(i64),
    #[error("Morse index {0} outside 0..=2")]
    BadMorseIndex(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Spine,
}

/// A critical point together with its Morse index (0, 1 or 2).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CritLabel {
    pub label: String,
    pub index: u8,
}

impl CritLabel {
    pub fn new(label: impl Into<String>, index: u8) -> Self {
        CritLabel { label: label.into(), index }
    }

    pub fn is_extremal(&self) -> bool {
        self.index != 1
    }
}

/// A closed Reeb orbit generator: cover of a simple orbit over a critical
/// point of the Morse function on the surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSymbol {
    pub id: String,
    pub side: Side,
    pub crit_sigma: CritLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crit_base: Option<CritLabel>,
    pub cover: u32,
    #[serde(with = "crate::ratio")]
    pub action: BigRational,
    pub cz_base: i64,
    pub good: bool,
    pub contractible: bool,
}

/// Which completion an index is evaluated in: the five-dimensional
/// symplectization or the four-dimensional semi-filling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    M,
    W0,
}

/// Ambient CZ index of an orbit: base index shifted by one over extrema.
pub fn cz_in_model(o: &OrbitSymbol, cover_threshold: u32) -> Result<i64, IndexError> {
    if o.cover > cover_threshold {
        return Err(IndexError::ThresholdViolation {
            id: o.id.clone(),
            cover: o.cover,
            threshold: cover_threshold,
        });
    }
    match o.crit_sigma.index {
        0 | 2 => Ok(o.cz_base + 1),
        1 => Ok(o.cz_base),
        i => Err(IndexError::BadMorseIndex(i)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RightCz {
    pub ambient: i64,
    pub w0: i64,
}

/// CZ indices of a right-side orbit from the Morse index of its base point.
pub fn cz_right(o: &OrbitSymbol) -> Result<RightCz, IndexError> {
    if o.side != Side::Right {
        return Err(IndexError::NotRightSide(o.id.clone()));
    }
    let q = o.crit_base.as_ref().ok_or_else(|| IndexError::MissingBase(o.id.clone()))?;
    if q.index > 2 {
        return Err(IndexError::BadMorseIndex(q.index));
    }
    let w0 = q.index as i64 - 1;
    let shift = match o.crit_sigma.index {
        1 => 0,
        0 | 2 => 1,
        i => return Err(IndexError::BadMorseIndex(i)),
    };
    Ok(RightCz { ambient: w0 + shift, w0 })
}

/// CZ index of an orbit in the requested ambient.
pub fn resolve_cz(o: &OrbitSymbol, ambient: Ambient, cover_threshold: u32) -> Result<i64, IndexError> {
    match ambient {
        Ambient::M => cz_in_model(o, cover_threshold),
        Ambient::W0 => {
            if o.cover > cover_threshold {
                return Err(IndexError::ThresholdViolation {
                    id: o.id.clone(),
                    cover: o.cover,
                    threshold: cover_threshold,
                });
            }
            Ok(o.cz_base)
        }
    }
}

/// Genus plus the counts of positive and negative punctures over critical
/// points of Morse index 0, 1 and 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PunctureProfile {
    pub genus: u32,
    pub positive: [u32; 3],
    pub negative: [u32; 3],
}

impl PunctureProfile {
    pub fn new(genus: u32, positive: [u32; 3], negative: [u32; 3]) -> Self {
        PunctureProfile { genus, positive, negative }
    }

    /// Profile of a curve from the Morse indices of its asymptotic critical points.
    pub fn from_ends(genus: u32, positive: &[u8], negative: &[u8]) -> Self {
        let mut p = PunctureProfile { genus, ..Default::default() };
        for &i in positive {
            p.positive[i as usize] += 1;
        }
        for &i in negative {
            p.negative[i as usize] += 1;
        }
        p
    }

    pub fn puncture_count(&self) -> u32 {
        self.positive.iter().chain(self.negative.iter()).sum()
    }

    pub fn gamma_even(&self) -> u32 {
        self.positive[1] + self.negative[1]
    }

    /// At most one Morse index occurs among positive ends and at most one
    /// among negative ends.
    pub fn is_single_hypersurface(&self) -> bool {
        self.positive.iter().filter(|&&c| c != 0).count() <= 1
            && self.negative.iter().filter(|&&c| c != 0).count() <= 1
    }

    pub fn euler_char(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.puncture_count() as i64
    }
}

/// Data entering the Fredholm index: dimension, topology, relative Chern
/// number and resolved CZ indices of the asymptotics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveIndexData {
    pub half_dim: i64,
    pub euler_char: i64,
    pub rel_chern: i64,
    pub positive_cz: Vec<i64>,
    pub negative_cz: Vec<i64>,
}

pub fn fredholm_index(c: &CurveIndexData) -> i64 {
    (c.half_dim - 2) * c.euler_char + 2 * c.rel_chern + c.positive_cz.iter().sum::<i64>()
        - c.negative_cz.iter().sum::<i64>()
}

/// Index of the normal operator of a curve inside a leaf.
pub fn normal_index(p: &PunctureProfile) -> i64 {
    let g = p.genus as i64;
    let [a0, a1, _a2] = p.positive.map(|c| c as i64);
    let [b0, b1, b2] = p.negative.map(|c| c as i64);
    let first = 2 - 2 * g - 2 * b0 - 2 * b2 - a1 - b1;
    let total = p.puncture_count() as i64;
    let second = 2 - 2 * g - total + a0 + p.positive[2] as i64 - b0 - b2;
    assert_eq!(first, second, "normal index forms disagree on {p:?}");
    first
}

pub fn automatic_transversality(p: &PunctureProfile, ind: i64) -> bool {
    ind > -2 + 2 * p.genus as i64 + p.gamma_even() as i64
}

pub fn regularity_transfer(p: &PunctureProfile, regular_in_leaf: bool) -> bool {
    regular_in_leaf && p.genus == 0 && p.negative[0] + p.negative[1] + p.positive[1] + p.negative[2] < 2
}

/// Smallest k + l with k ≤ G, l even and 2k + l > 2c.
pub fn kernel_bound(c1n: i64, gamma_even: u32) -> i64 {
    let g = gamma_even as i64;
    (0..=g)
        .map(|k| {
            let deficit = 2 * c1n + 1 - 2 * k;
            let l = if deficit <= 0 { 0 } else { deficit + deficit % 2 };
            k + l
        })
        .min()
        .expect("k = 0 is always admissible")
}

pub fn obstruction_rank(rank_in_leaf: i64, ind_n: i64, dim_ker_n: i64) -> Result<i64, IndexError> {
    let r = rank_in_leaf - ind_n + dim_ker_n;
    if r < 0 {
        Err(IndexError::NegativeRank(r))
    } else {
        Ok(r)
    }
}

pub fn gluing_base_dim(virt_dim: i64, rank: i64) -> i64 {
    virt_dim + rank
}
