//! Model configuration: Morse data on the surface and on the base, left
//! geodesic classes, thresholds, and the closed Reeb orbits they generate.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Generator, Generators, Parity};
use crate::index::{cz_in_model, CritLabel, OrbitSymbol, Side};
use crate::ratio;
use crate::surface::{CyclicWord, SurfaceGroup, WordError};
use crate::topology::sporadic_count_direct;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("schema version {0} is not supported")]
    Schema(u32),
    #[error("field {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("geodesic {id}: {source}")]
    Word { id: String, source: WordError },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invalid { field: field.into(), message: message.into() }
}

/// Which side of the dividing set a critical point of the surface lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    Left,
    Right,
}

impl Half {
    pub fn side(self) -> Side {
        match self {
            Half::Left => Side::Left,
            Half::Right => Side::Right,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Half::Left => "-",
            Half::Right => "+",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCrit {
    pub id: String,
    pub side: Half,
    pub index: u8,
}

/// An index-1 gradient line of the surface Morse function, running down
/// from `upper` to `lower`, with its twin: the other line joining the same
/// two critical points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceLine {
    pub id: String,
    pub upper: String,
    pub lower: String,
    pub twin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCrit {
    pub id: String,
    pub index: u8,
}

/// An index-1 gradient line of the base Morse function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseLine {
    pub id: String,
    pub upper: String,
    pub lower: String,
}

/// A left-side geodesic class, given by a word in the surface group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicSpec {
    pub id: String,
    pub word: String,
    #[serde(with = "crate::ratio")]
    pub action: BigRational,
}

/// Input document describing the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub schema_version: u32,
    pub name: String,
    pub k_circles: u32,
    pub genus_sigma: u32,
    pub word_genus: u8,
    pub surface_crits: Vec<SurfaceCrit>,
    pub surface_lines: Vec<SurfaceLine>,
    pub base_crits: Vec<BaseCrit>,
    pub base_lines: Vec<BaseLine>,
    pub geodesics: Vec<GeodesicSpec>,
    #[serde(with = "crate::ratio")]
    pub right_action: BigRational,
    #[serde(with = "crate::ratio")]
    pub action_threshold: BigRational,
    pub cover_threshold: u32,
    #[serde(default)]
    pub parity_overrides: BTreeMap<String, Parity>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// A generated orbit with the model data it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub symbol: OrbitSymbol,
    pub crit: usize,
    pub base: Option<usize>,
    /// Geodesic index and orientation (true for the word as given).
    pub geodesic: Option<(usize, bool)>,
}

impl Orbit {
    pub fn id(&self) -> &str {
        &self.symbol.id
    }

    pub fn half(&self) -> Half {
        if self.symbol.side == Side::Left {
            Half::Left
        } else {
            Half::Right
        }
    }
}

/// A validated model with generated orbits.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub orbits: Vec<Orbit>,
    pub by_id: BTreeMap<String, usize>,
    pub crit_index: BTreeMap<String, usize>,
    pub base_index: BTreeMap<String, usize>,
    pub line_index: BTreeMap<String, usize>,
    pub base_line_index: BTreeMap<String, usize>,
    pub words: Vec<CyclicWord>,
    /// Sporadic count d of each geodesic class.
    pub sporadic: Vec<i64>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Model, ModelError> {
        if config.schema_version != SCHEMA_VERSION {
            return Err(ModelError::Schema(config.schema_version));
        }
        if config.k_circles == 0 {
            return Err(invalid("k_circles", "must be at least 1"));
        }
        if config.genus_sigma < config.k_circles {
            return Err(invalid("genus_sigma", "must be at least k_circles"));
        }
        if config.cover_threshold == 0 {
            return Err(invalid("cover_threshold", "must be at least 1"));
        }
        if !config.action_threshold.is_positive() || !config.right_action.is_positive() {
            return Err(invalid("action_threshold", "actions must be positive"));
        }
        let crit_index = unique_ids(config.surface_crits.iter().map(|c| c.id.as_str()), "surface_crits")?;
        let base_index = unique_ids(config.base_crits.iter().map(|c| c.id.as_str()), "base_crits")?;
        let line_index = unique_ids(config.surface_lines.iter().map(|c| c.id.as_str()), "surface_lines")?;
        let base_line_index = unique_ids(config.base_lines.iter().map(|c| c.id.as_str()), "base_lines")?;
        unique_ids(config.geodesics.iter().map(|c| c.id.as_str()), "geodesics")?;

        validate_surface(&config, &crit_index, &line_index)?;
        validate_base(&config, &base_index)?;

        let group = SurfaceGroup::new(config.word_genus).map_err(|e| invalid("word_genus", e.to_string()))?;
        let mut words = Vec::new();
        let mut sporadic = Vec::new();
        for g in &config.geodesics {
            if !g.action.is_positive() {
                return Err(invalid(format!("geodesics.{}.action", g.id), "must be positive"));
            }
            let w = group.canonicalize_str(&g.word).map_err(|source| ModelError::Word { id: g.id.clone(), source })?;
            sporadic.push(sporadic_count_direct(&w));
            words.push(w);
        }

        let mut orbits = Vec::new();
        for (ci, c) in config.surface_crits.iter().enumerate() {
            let crit_sigma = CritLabel::new(c.id.clone(), c.index);
            for cover in 1..=config.cover_threshold {
                let l = ratio::int(cover as i64);
                match c.side {
                    Half::Left => {
                        for (gi, g) in config.geodesics.iter().enumerate() {
                            for forward in [true, false] {
                                let sign = if forward { "+" } else { "-" };
                                orbits.push(Orbit {
                                    symbol: OrbitSymbol {
                                        id: format!("{};{}{};{}", c.id, g.id, sign, cover),
                                        side: Side::Left,
                                        crit_sigma: crit_sigma.clone(),
                                        crit_base: None,
                                        cover,
                                        action: &g.action * &l,
                                        cz_base: 0,
                                        good: true,
                                        contractible: false,
                                    },
                                    crit: ci,
                                    base: None,
                                    geodesic: Some((gi, forward)),
                                });
                            }
                        }
                    }
                    Half::Right => {
                        for (bi, b) in config.base_crits.iter().enumerate() {
                            orbits.push(Orbit {
                                symbol: OrbitSymbol {
                                    id: format!("{};{};{}", c.id, b.id, cover),
                                    side: Side::Right,
                                    crit_sigma: crit_sigma.clone(),
                                    crit_base: Some(CritLabel::new(b.id.clone(), b.index)),
                                    cover,
                                    action: &config.right_action * &l,
                                    cz_base: b.index as i64 - 1,
                                    good: true,
                                    contractible: false,
                                },
                                crit: ci,
                                base: Some(bi),
                                geodesic: None,
                            });
                        }
                    }
                }
            }
        }
        let by_id = orbits.iter().enumerate().map(|(k, o)| (o.symbol.id.clone(), k)).collect();
        for id in config.parity_overrides.keys() {
            if !orbits.iter().any(|o| &o.symbol.id == id) {
                return Err(invalid("parity_overrides", format!("unknown orbit {id}")));
            }
        }
        Ok(Model { config, orbits, by_id, crit_index, base_index, line_index, base_line_index, words, sporadic })
    }

    pub fn orbit(&self, id: &str) -> Option<&Orbit> {
        self.by_id.get(id).map(|&k| &self.orbits[k])
    }

    pub fn crit(&self, k: usize) -> &SurfaceCrit {
        &self.config.surface_crits[k]
    }

    pub fn crit_by_id(&self, id: &str) -> &SurfaceCrit {
        &self.config.surface_crits[self.crit_index[id]]
    }

    pub fn line(&self, id: &str) -> &SurfaceLine {
        &self.config.surface_lines[self.line_index[id]]
    }

    pub fn base_crit(&self, k: usize) -> &BaseCrit {
        &self.config.base_crits[k]
    }

    pub fn base_line(&self, id: &str) -> &BaseLine {
        &self.config.base_lines[self.base_line_index[id]]
    }

    /// CZ index of an orbit in the five-dimensional model.
    pub fn cz_m(&self, o: &Orbit) -> i64 {
        cz_in_model(&o.symbol, self.config.cover_threshold).expect("orbits are generated within the covering threshold")
    }

    /// CZ index of an orbit in the semi-filling.
    pub fn cz_w0(&self, o: &Orbit) -> i64 {
        o.symbol.cz_base
    }

    /// Class label of a surface critical point: its kind and side.
    pub fn crit_class(&self, k: usize) -> String {
        let c = self.crit(k);
        let kind = match c.index {
            0 => "min",
            1 => "hyp",
            _ => "max",
        };
        format!("{kind}{}", c.side.tag())
    }

    /// Class label of a base critical point: its Morse index.
    pub fn base_class(&self, k: usize) -> String {
        format!("q{}", self.base_crit(k).index)
    }

    /// Algebra generators for every good orbit, with parity from the model
    /// CZ index unless overridden.
    pub fn generators(&self) -> Generators {
        let gens = self
            .orbits
            .iter()
            .filter(|o| o.symbol.good)
            .map(|o| Generator {
                id: o.symbol.id.clone(),
                parity: self.config.parity_overrides.get(o.id()).copied().unwrap_or_else(|| Parity::from_index(self.cz_m(o))),
                multiplicity: o.symbol.cover,
                action: o.symbol.action.clone(),
                good: true,
            })
            .collect();
        Generators::new(gens).expect("orbit ids are unique")
    }
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a str>, field: &str) -> Result<BTreeMap<String, usize>, ModelError> {
    let mut out = BTreeMap::new();
    for (k, id) in ids.enumerate() {
        if id.is_empty() || id.contains(';') {
            return Err(invalid(field, format!("id {id:?} must be nonempty and free of ';'")));
        }
        if out.insert(id.to_string(), k).is_some() {
            return Err(invalid(field, format!("duplicate id {id}")));
        }
    }
    Ok(out)
}

fn validate_surface(cfg: &ModelConfig, crits: &BTreeMap<String, usize>, lines: &BTreeMap<String, usize>) -> Result<(), ModelError> {
    let crit = |id: &str| crits.get(id).map(|&k| &cfg.surface_crits[k]).ok_or_else(|| invalid("surface_lines", format!("unknown critical point {id}")));
    for c in &cfg.surface_crits {
        if c.index > 2 {
            return Err(invalid("surface_crits", format!("{} has Morse index {}", c.id, c.index)));
        }
        let expected = match c.index {
            0 => Some(Half::Left),
            2 => Some(Half::Right),
            _ => None,
        };
        if expected.is_some_and(|h| h != c.side) {
            return Err(invalid("surface_crits", format!("{}: the minimum lies on the left and the maximum on the right", c.id)));
        }
    }
    let count = |i: u8| cfg.surface_crits.iter().filter(|c| c.index == i).count() as i64;
    if count(0) != 1 || count(2) != 1 {
        return Err(invalid("surface_crits", "need exactly one minimum and one maximum"));
    }
    if count(0) + count(2) - count(1) != 2 - 2 * cfg.genus_sigma as i64 {
        return Err(invalid("surface_crits", "critical points do not match the Euler characteristic of the surface"));
    }
    for l in &cfg.surface_lines {
        let (u, d) = (crit(&l.upper)?, crit(&l.lower)?);
        if u.index != d.index + 1 {
            return Err(invalid("surface_lines", format!("{} must drop the Morse index by one", l.id)));
        }
        let t = lines.get(&l.twin).map(|&k| &cfg.surface_lines[k]).ok_or_else(|| invalid("surface_lines", format!("{}: unknown twin {}", l.id, l.twin)))?;
        if t.id == l.id || t.twin != l.id || t.upper != l.upper || t.lower != l.lower {
            return Err(invalid("surface_lines", format!("{}: twin must be a different line with the same ends, pointing back", l.id)));
        }
    }
    for h in cfg.surface_crits.iter().filter(|c| c.index == 1) {
        for e in cfg.surface_crits.iter().filter(|c| c.index != 1) {
            let n = cfg.surface_lines.iter().filter(|l| (l.upper == h.id && l.lower == e.id) || (l.upper == e.id && l.lower == h.id)).count();
            if n != 2 {
                return Err(invalid("surface_lines", format!("{} needs exactly two lines to {}, found {n}", h.id, e.id)));
            }
        }
    }
    Ok(())
}

fn validate_base(cfg: &ModelConfig, crits: &BTreeMap<String, usize>) -> Result<(), ModelError> {
    for c in &cfg.base_crits {
        if c.index > 2 {
            return Err(invalid("base_crits", format!("{} has Morse index {}", c.id, c.index)));
        }
    }
    let idx: BTreeSet<u8> = cfg.base_crits.iter().map(|c| c.index).collect();
    if !idx.contains(&0) || !idx.contains(&2) {
        return Err(invalid("base_crits", "need a minimum and a maximum"));
    }
    for l in &cfg.base_lines {
        let get = |id: &str| crits.get(id).map(|&k| &cfg.base_crits[k]).ok_or_else(|| invalid("base_lines", format!("unknown critical point {id}")));
        let (u, d) = (get(&l.upper)?, get(&l.lower)?);
        if u.index != d.index + 1 {
            return Err(invalid("base_lines", format!("{} must drop the Morse index by one", l.id)));
        }
    }
    Ok(())
}

/// Reads and validates a model document.
pub fn load(text: &str) -> Result<Model, ModelError> {
    let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| invalid(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    Model::new(cfg)
}

/// The bundled reference model.
pub fn reference() -> Model {
    load(include_str!("../fixtures/reference.json")).expect("bundled fixture is valid")
}
