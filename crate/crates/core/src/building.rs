//! Enumeration of index-1 buildings without negative ends, constraint
//! checking, the twin involution on flow lines, and twin-pair cancellation.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{CountDocument, CountEntry};
use crate::index::{fredholm_index, gluing_base_dim, normal_index, obstruction_rank, CurveIndexData, PunctureProfile};
use crate::model::{Half, Model, Orbit};
use crate::ratio;
use crate::topology::sporadic_count_direct;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildingError {
    #[error("genus {genus} with {ends} positive ends is outside the enumerated range (genus + ends <= 2, ends >= 1)")]
    OutOfRange { genus: u32, ends: u32 },
    #[error("building has no component on an index-1 flow line or a page asymptotic to one")]
    NoTwin,
    #[error("twin of {0} is missing from the list")]
    Closure(String),
    #[error("unknown orbit {0}")]
    UnknownOrbit(String),
    #[error("model has no left geodesic with nonzero sporadic count")]
    NoSporadic,
}

/// Leaf of the foliation containing a component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypersurface {
    /// Cylinder over a critical point of the surface function.
    Cylindrical { crit: String },
    /// Cylinder over an index-1 gradient line.
    Flowline1 { line: String },
    /// Two-dimensional family of gradient lines from the maximum to the minimum.
    Flowline2 { upper: String, lower: String },
    /// Page of the semi-filling asymptotic to a gradient line crossing sides.
    Pagelike { line: String },
}

impl Hypersurface {
    /// Dimension of the normal kernel available inside the leaf family.
    pub fn kernel_dim(&self) -> i64 {
        match self {
            Hypersurface::Cylindrical { .. } => 0,
            Hypersurface::Flowline1 { .. } | Hypersurface::Pagelike { .. } => 1,
            Hypersurface::Flowline2 { .. } => 2,
        }
    }

    pub fn is_main(&self) -> bool {
        matches!(self, Hypersurface::Pagelike { .. } | Hypersurface::Flowline2 { .. })
    }

    fn twistable(&self) -> bool {
        matches!(self, Hypersurface::Flowline1 { .. } | Hypersurface::Pagelike { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Main,
    UpperLeft,
    UpperRight,
}

/// Projection of a right-side component to the base surface.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseMotion {
    Fixed,
    Line { line: String },
    Family,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub genus: u32,
    pub region: Region,
    pub hypersurface: Hypersurface,
    pub base_motion: BaseMotion,
    pub degree: u32,
    pub positive_ends: Vec<String>,
    pub negative_ends: Vec<String>,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Floor {
    pub components: Vec<Component>,
}

/// A negative end on `floor` matched to a positive end on `floor - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndMatch {
    pub floor: usize,
    pub component: usize,
    pub end: usize,
    pub lower_component: usize,
    pub lower_end: usize,
}

/// Floors run from the bottom level (index 0) upwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Building {
    pub floors: Vec<Floor>,
    pub matching: Vec<EndMatch>,
    pub total_index: i64,
    pub arithmetic_genus: u32,
    pub positive_end_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Plane,
    CylinderTwoPositive,
    TorusOnePositive,
}

impl Case {
    pub fn shape(self) -> (u32, u32) {
        match self {
            Case::Plane => (0, 1),
            Case::CylinderTwoPositive => (0, 2),
            Case::TorusOnePositive => (1, 1),
        }
    }

    pub fn from_shape(genus: u32, ends: u32) -> Result<Case, BuildingError> {
        match (genus, ends) {
            (0, 1) => Ok(Case::Plane),
            (0, 2) => Ok(Case::CylinderTwoPositive),
            (1, 1) => Ok(Case::TorusOnePositive),
            _ => Err(BuildingError::OutOfRange { genus, ends }),
        }
    }
}

pub fn classify_case(b: &Building) -> Result<Case, BuildingError> {
    Case::from_shape(b.arithmetic_genus, b.positive_end_count)
}

/// The constraint a configuration breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    /// Orbit ids exist within the covering threshold.
    Orbits,
    /// Matched ends agree, every negative end is matched, none at the bottom.
    Matching,
    /// The building is connected.
    Connected,
    /// No component has ends on both sides.
    SideConfinement,
    /// Ends lie on the leaf, region fits the leaf, single-hypersurface profile.
    LeafConsistency,
    /// Genus-0 components above the left side are trivial over the geodesic.
    LeftUpperTrivial,
    /// Main cylinders over the left join the two orientations of one geodesic.
    GeodesicPairing,
    /// Components above the right side cover flow-line cylinders.
    FlowLineCover,
    /// Planes are asymptotic to contractible orbits.
    PlaneAsymptote,
    /// The leaf comes in an isolated family.
    Isolation,
    /// Normal index fits in the leaf family.
    NormalFeasibility,
    /// Main-level components have nonnegative index in the semi-filling.
    MainIndex,
    /// Positive-genus components above the left need a geodesic with nonzero sporadic count.
    SporadicCapability,
    /// No floor made only of trivial cylinders.
    Stability,
    /// Total index one.
    TotalIndex,
    /// Top asymptotics have nonnegative CZ index.
    TopIndex,
    /// Positive-end action within the threshold.
    Action,
}

impl Fact {
    /// Short tag used in reports.
    pub fn tag(self) -> &'static str {
        match self {
            Fact::MainIndex => "(A)",
            Fact::SideConfinement => "(C)",
            Fact::LeftUpperTrivial => "(D)",
            Fact::GeodesicPairing => "(E)",
            Fact::FlowLineCover => "flow-line cover",
            Fact::Orbits => "orbits",
            Fact::Matching => "matching",
            Fact::Connected => "connected",
            Fact::LeafConsistency => "leaf",
            Fact::PlaneAsymptote => "plane asymptote",
            Fact::Isolation => "isolation",
            Fact::NormalFeasibility => "normal feasibility",
            Fact::SporadicCapability => "sporadic capability",
            Fact::Stability => "stability",
            Fact::TotalIndex => "total index",
            Fact::TopIndex => "top index",
            Fact::Action => "action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub fact: Fact,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub ok: bool,
    pub violation: Option<Violation>,
}

fn fail<T>(fact: Fact, detail: impl Into<String>) -> Result<T, Violation> {
    Err(Violation { fact, detail: detail.into() })
}

fn ends<'m>(model: &'m Model, ids: &[String]) -> Result<Vec<&'m Orbit>, Violation> {
    ids.iter().map(|id| model.orbit(id).ok_or_else(|| Violation { fact: Fact::Orbits, detail: format!("unknown orbit {id}") })).collect()
}

pub fn profile(model: &Model, c: &Component) -> PunctureProfile {
    let idx = |ids: &[String]| ids.iter().map(|id| model.orbit(id).map_or(0, |o| o.symbol.crit_sigma.index)).collect::<Vec<_>>();
    PunctureProfile::from_ends(c.genus, &idx(&c.positive_ends), &idx(&c.negative_ends))
}

fn euler(c: &Component) -> i64 {
    2 - 2 * c.genus as i64 - (c.positive_ends.len() + c.negative_ends.len()) as i64
}

/// Fredholm index of a component in the five-dimensional model.
pub fn index_in_model(model: &Model, c: &Component) -> i64 {
    let cz = |ids: &[String]| ids.iter().filter_map(|id| model.orbit(id)).map(|o| model.cz_m(o)).collect();
    fredholm_index(&CurveIndexData { half_dim: 2, euler_char: euler(c), rel_chern: 0, positive_cz: cz(&c.positive_ends), negative_cz: cz(&c.negative_ends) })
}

/// Fredholm index of a main-level component in the semi-filling.
pub fn index_in_filling(model: &Model, c: &Component) -> i64 {
    let cz = |ids: &[String]| ids.iter().filter_map(|id| model.orbit(id)).map(|o| model.cz_w0(o)).collect();
    fredholm_index(&CurveIndexData { half_dim: 1, euler_char: euler(c), rel_chern: 0, positive_cz: cz(&c.positive_ends), negative_cz: cz(&c.negative_ends) })
}

fn expected_region(h: &Hypersurface, side: Half) -> Region {
    match (h.is_main(), side) {
        (true, _) => Region::Main,
        (false, Half::Left) => Region::UpperLeft,
        (false, Half::Right) => Region::UpperRight,
    }
}

/// Constraints local to one component.
fn check_component(model: &Model, c: &Component, floor: usize) -> Result<(), Violation> {
    let pos = ends(model, &c.positive_ends)?;
    let neg = ends(model, &c.negative_ends)?;
    let all: Vec<&Orbit> = pos.iter().chain(neg.iter()).copied().collect();
    let Some(first) = all.first() else { return fail(Fact::LeafConsistency, "component without ends") };
    if pos.is_empty() {
        return fail(Fact::LeafConsistency, "component without positive ends");
    }
    let side = first.half();
    if all.iter().any(|o| o.half() != side) {
        return fail(Fact::SideConfinement, "component has ends on both sides");
    }
    if c.region != expected_region(&c.hypersurface, side) {
        return fail(Fact::LeafConsistency, format!("{:?} leaf placed in region {:?}", c.hypersurface, c.region));
    }
    if c.region == Region::Main && floor != 0 {
        return fail(Fact::LeafConsistency, "main-level component above the bottom floor");
    }
    if c.degree == 0 || all.iter().any(|o| o.symbol.cover % c.degree != 0) {
        return fail(Fact::LeafConsistency, "degree does not divide the end multiplicities");
    }
    let crit_of = |o: &Orbit| model.crit(o.crit).id.as_str();
    let leaf_ok = match &c.hypersurface {
        Hypersurface::Cylindrical { crit } => all.iter().all(|o| crit_of(o) == crit),
        Hypersurface::Flowline1 { line } => match model.line_index.get(line) {
            None => false,
            Some(_) => {
                let l = model.line(line);
                let (u, d) = (model.crit_by_id(&l.upper), model.crit_by_id(&l.lower));
                let (ext, hyp) = if u.index == 1 { (d, u) } else { (u, d) };
                u.side == side && d.side == side && pos.iter().all(|o| crit_of(o) == ext.id) && neg.iter().all(|o| crit_of(o) == hyp.id)
            }
        },
        Hypersurface::Pagelike { line } => match model.line_index.get(line) {
            None => false,
            Some(_) => {
                let l = model.line(line);
                let (u, d) = (model.crit_by_id(&l.upper), model.crit_by_id(&l.lower));
                let here = if u.side == side { u } else { d };
                u.side != d.side && neg.is_empty() && pos.iter().all(|o| crit_of(o) == here.id)
            }
        },
        Hypersurface::Flowline2 { upper, lower } => {
            let (u, d) = (model.crit_by_id(upper), model.crit_by_id(lower));
            let here = if u.side == side { u } else { d };
            u.index == 2 && d.index == 0 && neg.is_empty() && pos.iter().all(|o| crit_of(o) == here.id)
        }
    };
    if !leaf_ok {
        return fail(Fact::LeafConsistency, format!("ends do not lie on {:?}", c.hypersurface));
    }
    let prof = profile(model, c);
    if !prof.is_single_hypersurface() {
        return fail(Fact::LeafConsistency, "ends violate the single-hypersurface profile");
    }
    let cylinder_one_one = c.genus == 0 && pos.len() == 1 && neg.len() == 1;
    if c.trivial {
        let fixed = c.base_motion == BaseMotion::Fixed && matches!(c.hypersurface, Hypersurface::Cylindrical { .. });
        if !(cylinder_one_one && c.positive_ends == c.negative_ends && fixed) {
            return fail(Fact::LeafConsistency, "trivial flag on a nontrivial component");
        }
        return Ok(());
    }
    if side == Half::Left && c.base_motion != BaseMotion::Fixed {
        return fail(Fact::LeafConsistency, "left components have no base projection");
    }
    if c.region == Region::UpperLeft && c.genus == 0 {
        let same = cylinder_one_one && pos[0].geodesic == neg[0].geodesic && pos[0].symbol.cover == neg[0].symbol.cover;
        if !same {
            return fail(Fact::LeftUpperTrivial, "genus-0 component above the left side is not trivial over its geodesic");
        }
    }
    if c.region == Region::UpperLeft && c.genus > 0 {
        let capable = pos.iter().all(|o| o.geodesic.is_some_and(|(g, _)| model.sporadic[g] != 0));
        if !capable {
            return fail(Fact::SporadicCapability, "positive-genus component over a geodesic with zero sporadic count");
        }
    }
    if c.region == Region::Main && side == Half::Left && c.genus == 0 && pos.len() == 2 {
        let (a, b) = (pos[0], pos[1]);
        let joined = match (a.geodesic, b.geodesic) {
            (Some((ga, fa)), Some((gb, fb))) => ga == gb && fa != fb && a.symbol.cover == b.symbol.cover,
            _ => false,
        };
        if !joined {
            return fail(Fact::GeodesicPairing, "main cylinder does not join the two orientations of one geodesic");
        }
    }
    if c.region == Region::UpperRight {
        if !cylinder_one_one || pos[0].symbol.cover != neg[0].symbol.cover {
            return fail(Fact::FlowLineCover, "component above the right side is not a cylinder");
        }
        let (top, bottom) = (pos[0], neg[0]);
        let (y, x) = (top.base.expect("right orbit"), bottom.base.expect("right orbit"));
        let drop = model.base_crit(y).index as i64 - model.base_crit(x).index as i64;
        let motion_ok = match &c.base_motion {
            BaseMotion::Fixed => y == x,
            BaseMotion::Line { line } => {
                model.base_line_index.contains_key(line) && {
                    let l = model.base_line(line);
                    l.upper == model.base_crit(y).id && l.lower == model.base_crit(x).id
                }
            }
            BaseMotion::Family => drop == 2,
        };
        if !motion_ok {
            return fail(Fact::FlowLineCover, "base projection is not a gradient line from the top to the bottom asymptote");
        }
        if top.crit == bottom.crit && y == x {
            return fail(Fact::FlowLineCover, "constant cylinder must be flagged trivial");
        }
    }
    if c.genus == 0 && all.len() == 1 && !all[0].symbol.contractible {
        return fail(Fact::PlaneAsymptote, format!("plane asymptotic to non-contractible orbit {}", all[0].id()));
    }
    if c.hypersurface.kernel_dim() >= 2 {
        return fail(Fact::Isolation, "leaf varies in a two-dimensional family");
    }
    let ind_n = normal_index(&prof);
    if obstruction_rank(0, ind_n, c.hypersurface.kernel_dim()).is_err() {
        return fail(Fact::NormalFeasibility, format!("normal index {ind_n} exceeds the leaf kernel {}", c.hypersurface.kernel_dim()));
    }
    if c.region == Region::Main && index_in_filling(model, c) < 0 {
        return fail(Fact::MainIndex, "main-level component has negative index in the semi-filling");
    }
    Ok(())
}

fn check_building(model: &Model, b: &Building) -> Result<(), Violation> {
    for floor in &b.floors {
        for c in &floor.components {
            ends(model, &c.positive_ends)?;
            ends(model, &c.negative_ends)?;
        }
    }
    let Some(bottom) = b.floors.first() else { return fail(Fact::Matching, "empty building") };
    if bottom.components.iter().any(|c| !c.negative_ends.is_empty()) {
        return fail(Fact::Matching, "negative end on the bottom floor");
    }
    let mut seen_upper = BTreeSet::new();
    let mut seen_lower = BTreeSet::new();
    for m in &b.matching {
        let upper = b.floors.get(m.floor).and_then(|f| f.components.get(m.component)).and_then(|c| c.negative_ends.get(m.end));
        let lower = (m.floor > 0)
            .then(|| b.floors[m.floor - 1].components.get(m.lower_component).and_then(|c| c.positive_ends.get(m.lower_end)))
            .flatten();
        match (upper, lower) {
            (Some(u), Some(l)) if u == l => {}
            _ => return fail(Fact::Matching, format!("matched ends disagree at floor {}", m.floor)),
        }
        if !seen_upper.insert((m.floor, m.component, m.end)) || !seen_lower.insert((m.floor - 1, m.lower_component, m.lower_end)) {
            return fail(Fact::Matching, "end matched twice");
        }
    }
    let top = b.floors.len() - 1;
    for (f, floor) in b.floors.iter().enumerate() {
        for (k, c) in floor.components.iter().enumerate() {
            for e in 0..c.negative_ends.len() {
                if !seen_upper.contains(&(f, k, e)) {
                    return fail(Fact::Matching, format!("unmatched negative end on floor {f}"));
                }
            }
            if f < top {
                for e in 0..c.positive_ends.len() {
                    if !seen_lower.contains(&(f, k, e)) {
                        return fail(Fact::Matching, format!("positive end on floor {f} is not continued upwards"));
                    }
                }
            }
        }
    }
    let nodes: Vec<(usize, usize)> = b.floors.iter().enumerate().flat_map(|(f, fl)| (0..fl.components.len()).map(move |k| (f, k))).collect();
    let mut parent: BTreeMap<(usize, usize), (usize, usize)> = nodes.iter().map(|&n| (n, n)).collect();
    fn root(p: &BTreeMap<(usize, usize), (usize, usize)>, mut n: (usize, usize)) -> (usize, usize) {
        while p[&n] != n {
            n = p[&n];
        }
        n
    }
    for m in &b.matching {
        let (a, c) = (root(&parent, (m.floor, m.component)), root(&parent, (m.floor - 1, m.lower_component)));
        parent.insert(a, c);
    }
    if nodes.iter().map(|&n| root(&parent, n)).collect::<BTreeSet<_>>().len() != 1 {
        return fail(Fact::Connected, "building is disconnected");
    }
    for (f, floor) in b.floors.iter().enumerate() {
        for c in &floor.components {
            check_component(model, c, f)?;
        }
    }
    if let Some(f) = b.floors.iter().position(|fl| fl.components.iter().all(|c| c.trivial)) {
        return fail(Fact::Stability, format!("floor {f} holds only trivial cylinders"));
    }
    let total: i64 = b.floors.iter().flat_map(|f| &f.components).map(|c| index_in_model(model, c)).sum();
    if total != b.total_index {
        return fail(Fact::TotalIndex, format!("recorded index {} differs from recomputed {total}", b.total_index));
    }
    if total != 1 {
        return fail(Fact::TotalIndex, format!("total index {total}"));
    }
    let tops = top_ends(model, b);
    if let Some(o) = tops.iter().find(|o| model.cz_m(o) < 0) {
        return fail(Fact::TopIndex, format!("top asymptote {} has negative CZ index", o.id()));
    }
    let action: BigRational = tops.iter().fold(BigRational::zero(), |acc, o| acc + &o.symbol.action);
    if action > model.config.action_threshold {
        return fail(Fact::Action, format!("positive action {action} exceeds the threshold"));
    }
    Ok(())
}

/// Positive ends of the top floor.
fn top_ends<'m>(model: &'m Model, b: &Building) -> Vec<&'m Orbit> {
    b.floors.last().into_iter().flat_map(|f| &f.components).flat_map(|c| &c.positive_ends).filter_map(|id| model.orbit(id)).collect()
}

pub fn check_constraints(model: &Model, b: &Building) -> ConstraintReport {
    match check_building(model, b) {
        Ok(()) => ConstraintReport { ok: true, violation: None },
        Err(v) => ConstraintReport { ok: false, violation: Some(v) },
    }
}

/// Replaces every index-1 flow line in the building by its twin.
pub fn twin(model: &Model, b: &Building) -> Result<Building, BuildingError> {
    let mut out = b.clone();
    let mut swapped = false;
    for c in out.floors.iter_mut().flat_map(|f| f.components.iter_mut()) {
        if let Hypersurface::Flowline1 { line } | Hypersurface::Pagelike { line } = &mut c.hypersurface {
            *line = model.line(line).twin.clone();
            swapped = true;
        }
    }
    if swapped {
        Ok(out)
    } else {
        Err(BuildingError::NoTwin)
    }
}

pub fn is_twistable(b: &Building) -> bool {
    b.floors.iter().flat_map(|f| &f.components).any(|c| c.hypersurface.twistable())
}

/// How labels are rendered when building a key.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Labels {
    /// Exact ids.
    Exact,
    /// Critical points up to relabeling within their kind and side, flow
    /// lines up to twin, geodesic orientation as given or reversed.
    Class { flip: bool },
}

fn orbit_label(model: &Model, id: &str, labels: Labels) -> String {
    let Labels::Class { flip } = labels else { return id.to_string() };
    let Some(o) = model.orbit(id) else { return id.to_string() };
    let crit = model.crit_class(o.crit);
    match (o.geodesic, o.base) {
        (Some((g, forward)), _) => {
            let sign = if forward != flip { "+" } else { "-" };
            format!("{crit}|{}{sign}|{}", model.config.geodesics[g].id, o.symbol.cover)
        }
        (None, Some(q)) => format!("{crit}|{}|{}", model.base_class(q), o.symbol.cover),
        _ => id.to_string(),
    }
}

fn component_label(model: &Model, c: &Component, labels: Labels) -> String {
    let class = matches!(labels, Labels::Class { .. });
    let crit = |id: &str| if class { model.crit_class(model.crit_index[id]) } else { id.to_string() };
    let line = |id: &str| {
        if class {
            let l = model.line(id);
            format!("{}>{}", crit(&l.upper), crit(&l.lower))
        } else {
            id.to_string()
        }
    };
    let leaf = match &c.hypersurface {
        Hypersurface::Cylindrical { crit: p } => format!("cyl({})", crit(p)),
        Hypersurface::Flowline1 { line: l } => format!("flow({})", line(l)),
        Hypersurface::Flowline2 { upper, lower } => format!("flow2({}>{})", crit(upper), crit(lower)),
        Hypersurface::Pagelike { line: l } => format!("page({})", line(l)),
    };
    let motion = match &c.base_motion {
        BaseMotion::Fixed => "fixed".to_string(),
        BaseMotion::Family => "family".to_string(),
        BaseMotion::Line { line: l } => {
            if class {
                let bl = model.base_line(l);
                let q = |id: &str| model.base_class(model.base_index[id]);
                format!("line({}>{})", q(&bl.upper), q(&bl.lower))
            } else {
                format!("line({l})")
            }
        }
    };
    let mut p: Vec<String> = c.positive_ends.iter().map(|e| orbit_label(model, e, labels)).collect();
    let mut n: Vec<String> = c.negative_ends.iter().map(|e| orbit_label(model, e, labels)).collect();
    p.sort();
    n.sort();
    format!("{:?} g{} {leaf} {motion} d{} +[{}] -[{}]{}", c.region, c.genus, c.degree, p.join(","), n.join(","), if c.trivial { " trivial" } else { "" })
}

/// Tree rendering of the building: each component followed by what sits
/// above each of its positive ends, siblings sorted.
fn building_key(model: &Model, b: &Building, labels: Labels) -> String {
    let mut above: BTreeMap<(usize, usize, usize), (usize, usize)> = BTreeMap::new();
    for m in &b.matching {
        above.insert((m.floor - 1, m.lower_component, m.lower_end), (m.floor, m.component));
    }
    fn node(model: &Model, b: &Building, above: &BTreeMap<(usize, usize, usize), (usize, usize)>, f: usize, k: usize, labels: Labels) -> String {
        let c = &b.floors[f].components[k];
        let mut kids: Vec<String> = (0..c.positive_ends.len())
            .map(|e| match above.get(&(f, k, e)) {
                Some(&(uf, uk)) => node(model, b, above, uf, uk, labels),
                None => "top".to_string(),
            })
            .collect();
        kids.sort();
        format!("{f}:<{}>{{{}}}", component_label(model, c, labels), kids.join(";"))
    }
    let mut roots: Vec<String> = (0..b.floors[0].components.len()).map(|k| node(model, b, &above, 0, k, labels)).collect();
    roots.sort();
    roots.join("|")
}

/// Key identifying a building exactly.
pub fn exact_key(model: &Model, b: &Building) -> String {
    building_key(model, b, Labels::Exact)
}

/// Key of the label class: critical points up to relabeling, twins
/// identified, geodesic orientation up to global reversal.
pub fn class_key(model: &Model, b: &Building) -> String {
    [false, true].into_iter().map(|flip| building_key(model, b, Labels::Class { flip })).min().expect("two candidates")
}

fn component(model: &Model, genus: u32, hypersurface: Hypersurface, base_motion: BaseMotion, pos: Vec<String>, neg: Vec<String>) -> Component {
    let first = model.orbit(&pos[0]).expect("generated orbit");
    let degree = pos.iter().chain(neg.iter()).filter_map(|id| model.orbit(id)).map(|o| o.symbol.cover).fold(0, num_integer::gcd);
    Component { genus, region: expected_region(&hypersurface, first.half()), hypersurface, base_motion, degree, positive_ends: pos, negative_ends: neg, trivial: false }
}

fn trivial_cylinder(model: &Model, id: &str) -> Component {
    let o = model.orbit(id).expect("generated orbit");
    Component {
        genus: 0,
        region: expected_region(&Hypersurface::Cylindrical { crit: String::new() }, o.half()),
        hypersurface: Hypersurface::Cylindrical { crit: model.crit(o.crit).id.clone() },
        base_motion: BaseMotion::Fixed,
        degree: o.symbol.cover,
        positive_ends: vec![id.to_string()],
        negative_ends: vec![id.to_string()],
        trivial: true,
    }
}

/// Leaves that may carry a component whose positive ends all sit over `crit`.
fn leaves_over(model: &Model, crit: usize, with_negative: bool) -> Vec<Hypersurface> {
    let c = model.crit(crit);
    let mut out = vec![Hypersurface::Cylindrical { crit: c.id.clone() }];
    for l in &model.config.surface_lines {
        let (u, d) = (model.crit_by_id(&l.upper), model.crit_by_id(&l.lower));
        let touches = l.upper == c.id || l.lower == c.id;
        if !touches {
            continue;
        }
        if u.side == d.side {
            if c.index != 1 {
                out.push(Hypersurface::Flowline1 { line: l.id.clone() });
            }
        } else if !with_negative {
            out.push(Hypersurface::Pagelike { line: l.id.clone() });
        }
    }
    if !with_negative && c.index != 1 {
        let ext = |i: u8| model.config.surface_crits.iter().find(|s| s.index == i).expect("validated").id.clone();
        out.push(Hypersurface::Flowline2 { upper: ext(2), lower: ext(0) });
    }
    out
}

fn base_motions(model: &Model, top: &Orbit, bottom: &Orbit) -> Vec<BaseMotion> {
    let (Some(y), Some(x)) = (top.base, bottom.base) else { return vec![BaseMotion::Fixed] };
    let mut out = Vec::new();
    if y == x {
        out.push(BaseMotion::Fixed);
    }
    let (qy, qx) = (model.base_crit(y), model.base_crit(x));
    for l in &model.config.base_lines {
        if l.upper == qy.id && l.lower == qx.id {
            out.push(BaseMotion::Line { line: l.id.clone() });
        }
    }
    if qy.index == 2 && qx.index == 0 {
        out.push(BaseMotion::Family);
    }
    out
}

/// Nontrivial one-in one-out components passing the local constraints,
/// grouped by negative end.
fn upper_candidates(model: &Model) -> BTreeMap<String, Vec<Component>> {
    let mut out: BTreeMap<String, Vec<Component>> = BTreeMap::new();
    for bottom in &model.orbits {
        for top in &model.orbits {
            if top.half() != bottom.half() {
                continue;
            }
            for leaf in leaves_over(model, top.crit, true) {
                if leaf.is_main() {
                    continue;
                }
                for motion in base_motions(model, top, bottom) {
                    let c = component(model, 0, leaf.clone(), motion, vec![top.id().to_string()], vec![bottom.id().to_string()]);
                    if top.id() == bottom.id() && c.base_motion == BaseMotion::Fixed && matches!(c.hypersurface, Hypersurface::Cylindrical { .. }) {
                        continue;
                    }
                    if check_component(model, &c, 1).is_ok() {
                        out.entry(bottom.id().to_string()).or_default().push(c);
                    }
                }
            }
        }
    }
    out
}

/// All stacks of upper components over an orbit, listed bottom to top.
fn chains(uppers: &BTreeMap<String, Vec<Component>>, orbit: &str, depth: usize) -> Vec<Vec<Component>> {
    let mut out = vec![Vec::new()];
    if depth == 0 {
        return out;
    }
    for c in uppers.get(orbit).into_iter().flatten() {
        for rest in chains(uppers, &c.positive_ends[0], depth - 1) {
            let mut v = vec![c.clone()];
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// Ways to place several stacks on common floors, keeping each stack's order.
fn interleavings(lengths: &[usize]) -> Vec<Vec<Vec<bool>>> {
    fn go(lengths: &[usize], used: &mut Vec<usize>, acc: &mut Vec<Vec<bool>>, out: &mut Vec<Vec<Vec<bool>>>) {
        if used.iter().zip(lengths).all(|(u, l)| u == l) {
            out.push(acc.clone());
            return;
        }
        let n = lengths.len();
        for mask in 1u32..(1 << n) {
            let step: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            if step.iter().enumerate().any(|(i, &s)| s && used[i] == lengths[i]) {
                continue;
            }
            for (i, &s) in step.iter().enumerate() {
                used[i] += s as usize;
            }
            acc.push(step.clone());
            go(lengths, used, acc, out);
            acc.pop();
            for (i, &s) in step.iter().enumerate() {
                used[i] -= s as usize;
            }
        }
    }
    let mut out = Vec::new();
    go(lengths, &mut vec![0; lengths.len()], &mut Vec::new(), &mut out);
    out
}

/// Stacks the chains above the positive ends of a single bottom component.
fn assemble(model: &Model, main: &Component, stacks: &[&Vec<Component>], pattern: &[Vec<bool>]) -> Building {
    let mut floors = vec![Floor { components: vec![main.clone()] }];
    let mut matching = Vec::new();
    let mut used = vec![0usize; stacks.len()];
    let mut below: Vec<(usize, usize)> = (0..stacks.len()).map(|i| (0, i)).collect();
    let mut current: Vec<String> = main.positive_ends.clone();
    for (f, step) in pattern.iter().enumerate() {
        let floor = f + 1;
        let mut comps = Vec::new();
        for (i, &advance) in step.iter().enumerate() {
            let c = if advance {
                let c = stacks[i][used[i]].clone();
                used[i] += 1;
                c
            } else {
                trivial_cylinder(model, &current[i])
            };
            matching.push(EndMatch { floor, component: i, end: 0, lower_component: below[i].0, lower_end: below[i].1 });
            current[i] = c.positive_ends[0].clone();
            below[i] = (i, 0);
            comps.push(c);
        }
        floors.push(Floor { components: comps });
    }
    let total_index = floors.iter().flat_map(|f| &f.components).map(|c| index_in_model(model, c)).sum();
    let genus_sum: u32 = floors.iter().flat_map(|f| &f.components).map(|c| c.genus).sum();
    let vertices: usize = floors.iter().map(|f| f.components.len()).sum();
    let arithmetic_genus = (genus_sum as i64 + matching.len() as i64 - vertices as i64 + 1) as u32;
    let positive_end_count = floors.last().map_or(0, |f| f.components.iter().map(|c| c.positive_ends.len() as u32).sum());
    Building { floors, matching, total_index, arithmetic_genus, positive_end_count }
}

/// Bottom components with the given topology passing the local constraints.
fn bottom_candidates(model: &Model, genus: u32, ends: u32) -> Vec<Component> {
    let mut out = Vec::new();
    let n = model.orbits.len();
    let tuples: Vec<Vec<usize>> = match ends {
        1 => (0..n).map(|a| vec![a]).collect(),
        2 => (0..n).flat_map(|a| (a..n).map(move |b| vec![a, b])).collect(),
        _ => Vec::new(),
    };
    for t in tuples {
        let first = &model.orbits[t[0]];
        if t.iter().any(|&k| model.orbits[k].crit != first.crit) {
            continue;
        }
        for leaf in leaves_over(model, first.crit, false) {
            let pos = t.iter().map(|&k| model.orbits[k].id().to_string()).collect();
            let c = component(model, genus, leaf, BaseMotion::Fixed, pos, Vec::new());
            if check_component(model, &c, 0).is_ok() {
                out.push(c);
            }
        }
    }
    out
}

/// Every configuration of the given shape satisfying all constraints, with
/// exact duplicates removed, sorted by exact key.
pub fn enumerate_raw(model: &Model, genus: u32, ends: u32) -> Result<Vec<Building>, BuildingError> {
    Case::from_shape(genus, ends)?;
    let uppers = upper_candidates(model);
    let depth = model.orbits.len();
    let mut found: Vec<(String, Building)> = bottom_candidates(model, genus, ends)
        .par_iter()
        .flat_map_iter(|main| {
            let towers: Vec<Vec<Vec<Component>>> = main.positive_ends.iter().map(|o| chains(&uppers, o, depth)).collect();
            let mut out = Vec::new();
            let mut pick = vec![0usize; towers.len()];
            loop {
                let stacks: Vec<&Vec<Component>> = pick.iter().enumerate().map(|(i, &p)| &towers[i][p]).collect();
                let lengths: Vec<usize> = stacks.iter().map(|s| s.len()).collect();
                for pattern in interleavings(&lengths) {
                    let b = assemble(model, main, &stacks, &pattern);
                    if check_building(model, &b).is_ok() {
                        out.push((exact_key(model, &b), b));
                    }
                }
                let mut i = 0;
                while i < pick.len() {
                    pick[i] += 1;
                    if pick[i] < towers[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
                if i == pick.len() {
                    break;
                }
            }
            out
        })
        .collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found.dedup_by(|a, b| a.0 == b.0);
    Ok(found.into_iter().map(|(_, b)| b).collect())
}

/// How twin configurations are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// A configuration and its twin are separate entries.
    TwinsDistinct,
    /// A configuration and its twin form one entry.
    TwinsIdentified,
    /// Cylinders with twins identified, tori with twins distinct.
    Mixed,
}

impl Convention {
    pub fn twins_distinct(self, case: Case) -> bool {
        match self {
            Convention::TwinsDistinct => true,
            Convention::TwinsIdentified => false,
            Convention::Mixed => case != Case::CylinderTwoPositive,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Convention::TwinsDistinct => "label classes (critical points relabeled within kind and side, cylinder ends unordered, geodesic orientation reversed globally); a configuration and its twin counted separately",
            Convention::TwinsIdentified => "label classes (critical points relabeled within kind and side, cylinder ends unordered, geodesic orientation reversed globally); a configuration and its twin counted once",
            Convention::Mixed => "label classes (critical points relabeled within kind and side, cylinder ends unordered, geodesic orientation reversed globally); twins counted once for cylinders and separately for tori",
        }
    }
}

/// Whether an entry is its class representative or the representative's twin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Representative,
    Twin,
}

/// Per-component index data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentAudit {
    pub floor: usize,
    pub component: usize,
    pub trivial: bool,
    pub index_in_model: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index_in_filling: Option<i64>,
    pub normal_index: i64,
    pub kernel_dim: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexAudit {
    pub components: Vec<ComponentAudit>,
    pub total: i64,
}

/// Obstruction data of the bottom component, reported without claiming any count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionData {
    pub rank_in_leaf: i64,
    pub normal_index: i64,
    pub kernel_dim: i64,
    pub rank: i64,
    pub virtual_dim: i64,
    pub base_dim: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub case: Case,
    pub side: Half,
    pub class_key: String,
    pub variant: Variant,
    pub sporadic: bool,
    /// Id of the twin entry, the entry itself when the twin is identified
    /// with it, or none when untwistable.
    pub twin_partner: Option<String>,
    pub profile: PunctureProfile,
    pub index_audit: IndexAudit,
    pub obstruction: ObstructionData,
    pub building: Building,
}

pub fn index_audit(model: &Model, b: &Building) -> IndexAudit {
    let mut components = Vec::new();
    for (f, floor) in b.floors.iter().enumerate() {
        for (k, c) in floor.components.iter().enumerate() {
            components.push(ComponentAudit {
                floor: f,
                component: k,
                trivial: c.trivial,
                index_in_model: index_in_model(model, c),
                index_in_filling: (c.region == Region::Main).then(|| index_in_filling(model, c)),
                normal_index: normal_index(&profile(model, c)),
                kernel_dim: c.hypersurface.kernel_dim(),
            });
        }
    }
    let total = components.iter().map(|c| c.index_in_model).sum();
    IndexAudit { components, total }
}

pub fn obstruction_data(model: &Model, b: &Building) -> ObstructionData {
    let c = &b.floors[0].components[0];
    let ind_n = normal_index(&profile(model, c));
    let kernel_dim = c.hypersurface.kernel_dim();
    let rank = obstruction_rank(0, ind_n, kernel_dim).expect("enumerated buildings pass normal feasibility");
    ObstructionData { rank_in_leaf: 0, normal_index: ind_n, kernel_dim, rank, virtual_dim: b.total_index, base_dim: gluing_base_dim(b.total_index, rank) }
}

fn side_of(model: &Model, b: &Building) -> Half {
    let id = &b.floors[0].components[0].positive_ends[0];
    model.orbit(id).map_or(Half::Left, |o| o.half())
}

/// Configurations of one shape, counted under a convention.
pub fn classify(model: &Model, genus: u32, ends: u32, convention: Convention) -> Result<Vec<Entry>, BuildingError> {
    let case = Case::from_shape(genus, ends)?;
    let raw = enumerate_raw(model, genus, ends)?;
    let mut classes: BTreeMap<String, Building> = BTreeMap::new();
    for b in raw {
        let key = class_key(model, &b);
        let exact = exact_key(model, &b);
        match classes.get(&key) {
            Some(old) if exact_key(model, old) <= exact => {}
            _ => {
                classes.insert(key, b);
            }
        }
    }
    let prefix = match case {
        Case::Plane => "plane",
        Case::CylinderTwoPositive => "cylinder",
        Case::TorusOnePositive => "torus",
    };
    let mut out: Vec<Entry> = Vec::new();
    for (n, (key, rep)) in classes.into_iter().enumerate() {
        let side = side_of(model, &rep);
        let base_id = format!("{prefix}-{}-{:02}", if side == Half::Left { "left" } else { "right" }, n + 1);
        let twin_of = twin(model, &rep).ok();
        let make = |id: String, b: Building, variant: Variant, partner: Option<String>| Entry {
            id,
            case,
            side,
            class_key: key.clone(),
            variant,
            sporadic: partner.is_none(),
            twin_partner: partner,
            profile: profile(model, &b.floors[0].components[0]),
            index_audit: index_audit(model, &b),
            obstruction: obstruction_data(model, &b),
            building: b,
        };
        match twin_of {
            None => out.push(make(base_id, rep, Variant::Representative, None)),
            Some(t) if convention.twins_distinct(case) => {
                let (a, b) = (format!("{base_id}a"), format!("{base_id}b"));
                out.push(make(a.clone(), rep, Variant::Representative, Some(b.clone())));
                out.push(make(b, t, Variant::Twin, Some(a)));
            }
            Some(_) => out.push(make(base_id.clone(), rep, Variant::Representative, Some(base_id))),
        }
    }
    Ok(out)
}

/// All configurations of the enumerated shapes under a convention.
pub fn classify_all(model: &Model, convention: Convention) -> Vec<Entry> {
    [Case::Plane, Case::CylinderTwoPositive, Case::TorusOnePositive]
        .into_iter()
        .flat_map(|c| {
            let (g, r) = c.shape();
            classify(model, g, r, convention).expect("shapes in range")
        })
        .collect()
}

/// Configurations of a shape as buildings, counted under a convention.
pub fn enumerate_buildings(model: &Model, genus: u32, ends: u32, convention: Convention) -> Result<Vec<Building>, BuildingError> {
    Ok(classify(model, genus, ends, convention)?.into_iter().map(|e| e.building).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub members: [String; 2],
    /// The twin is identified with the entry itself.
    pub internal: bool,
    pub obstruction: [ObstructionData; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cancellation {
    pub pairs: Vec<Pair>,
    pub unpaired: Vec<String>,
}

/// Splits entries into twin pairs and leftovers.
pub fn pair_cancellation(entries: &[Entry]) -> Result<Cancellation, BuildingError> {
    let by_id: BTreeMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for e in entries {
        match &e.twin_partner {
            None => unpaired.push(e.id.clone()),
            Some(p) if *p == e.id => pairs.push(Pair { members: [e.id.clone(), e.id.clone()], internal: true, obstruction: [e.obstruction.clone(), e.obstruction.clone()] }),
            Some(p) => {
                let other = by_id.get(p.as_str()).ok_or_else(|| BuildingError::Closure(e.id.clone()))?;
                if other.twin_partner.as_deref() != Some(e.id.as_str()) {
                    return Err(BuildingError::Closure(e.id.clone()));
                }
                if e.id < other.id {
                    pairs.push(Pair { members: [e.id.clone(), other.id.clone()], internal: false, obstruction: [e.obstruction.clone(), other.obstruction.clone()] });
                }
            }
        }
    }
    Ok(Cancellation { pairs, unpaired })
}

/// The single-floor torus in the cylindrical leaf over the minimum with one
/// positive end over a geodesic of nonzero sporadic count.
pub fn sporadic_signature(model: &Model) -> Result<Building, BuildingError> {
    let g = model.sporadic.iter().position(|&d| d != 0).ok_or(BuildingError::NoSporadic)?;
    let min = model.config.surface_crits.iter().position(|c| c.index == 0).expect("validated");
    let candidates = model.orbits.iter().filter(|o| o.crit == min && o.symbol.cover == 1 && o.geodesic.is_some_and(|(k, _)| k == g)).map(|o| {
        let c = component(model, 1, Hypersurface::Cylindrical { crit: model.crit(min).id.clone() }, BaseMotion::Fixed, vec![o.id().to_string()], Vec::new());
        assemble(model, &c, &[], &[])
    });
    Ok(candidates.min_by_key(|b| exact_key(model, b)).expect("left orbits exist for every geodesic"))
}

/// Count table in which each twin pair carries cancelling unit counts and
/// the sporadic configuration carries the sporadic count of its geodesic.
pub fn twin_count_document(model: &Model, entries: &[Entry], include_sporadic: bool) -> Result<CountDocument, BuildingError> {
    let cancellation = pair_cancellation(entries)?;
    let by_id: BTreeMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let row = |e: &Entry, count: BigRational| CountEntry {
        genus: e.building.arithmetic_genus,
        positive: top_ends(model, &e.building).iter().map(|o| o.id().to_string()).collect(),
        negative: Vec::new(),
        count,
    };
    let mut counts = Vec::new();
    for p in &cancellation.pairs {
        counts.push(row(by_id[p.members[0].as_str()], ratio::int(1)));
        counts.push(row(by_id[p.members[1].as_str()], ratio::int(-1)));
    }
    if include_sporadic {
        for id in &cancellation.unpaired {
            let e = by_id[id.as_str()];
            let top = top_ends(model, &e.building);
            let d = top.first().and_then(|o| o.geodesic).map_or(0, |(g, forward)| if forward { model.sporadic[g] } else { sporadic_count_direct(&model.words[g].reversed()) });
            counts.push(row(e, ratio::int(d)));
        }
    }
    Ok(CountDocument { generators: model.generators().all().to_vec(), counts })
}
