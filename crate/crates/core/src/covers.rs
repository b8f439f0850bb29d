//! Branched-cover arithmetic: total branching, Riemann–Hurwitz, the
//! punctured adjunction budget and the super-rigidity verdict.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("base must have at least one puncture")]
    NoBasePunctures,
    #[error("puncture multiplicities sum to {got}, expected degree times base punctures = {expected}")]
    MultiplicitySum { got: u64, expected: u64 },
    #[error("puncture multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("cover Euler characteristic {chi} with {punctures} punctures gives no closed surface of non-negative genus")]
    RiemannHurwitz { chi: i64, punctures: u64 },
}

/// Branch data of a holomorphic cover of a punctured surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchProfile {
    pub degree: u32,
    pub interior_vanishing: u32,
    /// Multiplicities of the cover punctures, sorted in decreasing order.
    pub puncture_multiplicities: Vec<u32>,
    pub base_punctures: u32,
    pub base_euler: i64,
}

impl BranchProfile {
    pub fn new(
        degree: u32,
        interior_vanishing: u32,
        mut puncture_multiplicities: Vec<u32>,
        base_punctures: u32,
        base_euler: i64,
    ) -> Result<Self, CoverError> {
        puncture_multiplicities.sort_unstable_by(|a, b| b.cmp(a));
        let bp = BranchProfile { degree, interior_vanishing, puncture_multiplicities, base_punctures, base_euler };
        bp.validate()?;
        Ok(bp)
    }

    /// Profile with no branching at the punctures.
    pub fn unbranched_at_punctures(degree: u32, interior_vanishing: u32, base_punctures: u32, base_euler: i64) -> Result<Self, CoverError> {
        Self::new(degree, interior_vanishing, vec![1; (degree * base_punctures) as usize], base_punctures, base_euler)
    }

    pub fn validate(&self) -> Result<(), CoverError> {
        if self.degree == 0 {
            return Err(CoverError::ZeroDegree);
        }
        if self.base_punctures == 0 {
            return Err(CoverError::NoBasePunctures);
        }
        if self.puncture_multiplicities.contains(&0) {
            return Err(CoverError::ZeroMultiplicity);
        }
        let got: u64 = self.puncture_multiplicities.iter().map(|&k| k as u64).sum();
        let expected = self.degree as u64 * self.base_punctures as u64;
        if got != expected {
            return Err(CoverError::MultiplicitySum { got, expected });
        }
        let chi = self.cover_euler();
        let closed = chi + self.cover_punctures() as i64;
        if closed > 2 || closed % 2 != 0 {
            return Err(CoverError::RiemannHurwitz { chi, punctures: self.cover_punctures() });
        }
        Ok(())
    }

    pub fn cover_punctures(&self) -> u64 {
        self.puncture_multiplicities.len() as u64
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.puncture_multiplicities.iter().map(|&k| k as u64).sum()
    }

    pub fn cover_euler(&self) -> i64 {
        riemann_hurwitz(self.degree, self.base_euler, self.interior_vanishing)
    }

    pub fn cover_genus(&self) -> i64 {
        (2 - self.cover_euler() - self.cover_punctures() as i64) / 2
    }
}

pub fn total_branching(bp: &BranchProfile) -> i64 {
    bp.interior_vanishing as i64 + (bp.degree as i64 * bp.base_punctures as i64 - bp.cover_punctures() as i64)
}

pub fn riemann_hurwitz(d: u32, base_euler: i64, z: u32) -> i64 {
    d as i64 * base_euler - z as i64
}

/// Self-intersection of the cover curve, d² times that of the base.
pub fn self_intersection_multiple(d: u32, chi_v: i64) -> BigRational {
    let d = d as i64;
    ratio::int(-d * d * chi_v) / ratio::int(2)
}

/// Twice the count of double points of the kernel-section curve, computed
/// from the puncture counts.
pub fn double_point_budget(bp: &BranchProfile) -> BigRational {
    let d = bp.degree as i64;
    ratio::int(d * (1 - d) * bp.base_euler) / ratio::int(2) - ratio::int(bp.interior_vanishing as i64)
        + ratio::int(bp.cover_punctures() as i64)
        - ratio::int(d * bp.base_punctures as i64)
}

/// Same quantity through the total branching.
pub fn double_point_budget_via_branching(bp: &BranchProfile) -> BigRational {
    let d = bp.degree as i64;
    ratio::int(d * (1 - d) * bp.base_euler) / ratio::int(2) - ratio::int(total_branching(bp))
}

/// Same quantity through the punctured adjunction formula, with the
/// spectral covering number equal to the total multiplicity.
pub fn double_point_budget_via_adjunction(bp: &BranchProfile) -> BigRational {
    let d = ratio::int(bp.degree as i64);
    let chi_v = ratio::int(bp.base_euler);
    let c1_normal = -chi_v.clone() / ratio::int(2);
    let c1_tangent_normal = chi_v.clone() + c1_normal;
    let chi_u = ratio::int(bp.cover_euler());
    let sigma_bar = ratio::int(bp.total_multiplicity() as i64);
    let gamma_u = ratio::int(bp.cover_punctures() as i64);
    let self_int = self_intersection_multiple(bp.degree, bp.base_euler);
    self_int - d * c1_tangent_normal + chi_u - sigma_bar + gamma_u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InjectiveForced,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub verdict: Verdict,
    #[serde(with = "crate::ratio")]
    pub budget: BigRational,
    pub total_branching: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub const UNBRANCHED_NOTE: &str = "unbranched cover: regularity follows from the unbranched-cover theorem regime";

pub fn super_rigidity_verdict(bp: &BranchProfile) -> RigidityReport {
    let branching = total_branching(bp);
    let budget = double_point_budget(bp);
    let verdict = if bp.base_euler >= 0 && branching > 0 { Verdict::InjectiveForced } else { Verdict::Inconclusive };
    let note = (branching == 0).then(|| UNBRANCHED_NOTE.to_string());
    RigidityReport { verdict, budget, total_branching: branching, note }
}

/// Partitions of n into parts of size at most max_part, in decreasing order.
fn partitions(n: u32, max_part: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max_part)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every branch profile of a degree-d cover with interior vanishing at most
/// max_z that satisfies the multiplicity and Riemann–Hurwitz constraints.
pub fn enumerate_branch_profiles(d: u32, base_euler: i64, base_punctures: u32, max_z: u32) -> Vec<BranchProfile> {
    let fiber = partitions(d, d);
    let mut fibers: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..base_punctures {
        fibers = fibers
            .iter()
            .flat_map(|acc| fiber.iter().map(move |p| acc.iter().chain(p).copied().collect()))
            .collect();
    }
    let mut out: Vec<BranchProfile> = fibers
        .into_iter()
        .flat_map(|k| (0..=max_z).filter_map(move |z| BranchProfile::new(d, z, k.clone(), base_punctures, base_euler).ok()))
        .collect();
    out.sort();
    out.dedup();
    out
}
