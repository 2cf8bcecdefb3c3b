//! Self-similar systems: scaling ratios, generators, word enumeration, and
//! the inradius scaling law for tiles.

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::steiner::SteinerRep;
use serde::{Deserialize, Serialize};

/// Maximum number of explicitly enumerated words.
pub const WORD_BUDGET: u128 = 100_000_000;

/// Ratios closer than this are treated as equal for aggregation.
const RATIO_EQ_TOL: f64 = 1e-14;

/// A finite word over the alphabet `{1..J}`; the empty word is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

/// Geometric description of one generator.
#[derive(Clone, Debug)]
pub enum GeneratorSpec {
    Polygon(ConvexPolygon),
    Interval(f64),
    Steiner(SteinerRep),
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub spec: GeneratorSpec,
    pub label: String,
}

impl Generator {
    pub fn polygon(p: ConvexPolygon, label: &str) -> Self {
        Generator {
            spec: GeneratorSpec::Polygon(p),
            label: label.to_string(),
        }
    }

    pub fn interval(len: f64, label: &str) -> Self {
        Generator {
            spec: GeneratorSpec::Interval(len),
            label: label.to_string(),
        }
    }

    pub fn steiner(rep: SteinerRep, label: &str) -> Self {
        Generator {
            spec: GeneratorSpec::Steiner(rep),
            label: label.to_string(),
        }
    }

    /// Resolves the tube-polynomial representation of this generator.
    pub fn resolve(&self, ambient: usize) -> Result<SteinerRep> {
        let rep = match &self.spec {
            GeneratorSpec::Polygon(p) => {
                if ambient != 2 {
                    return Err(Error::InvalidModel(
                        "polygon generators need ambient dimension 2".into(),
                    ));
                }
                SteinerRep::from_polygon(p)?
            }
            GeneratorSpec::Interval(len) => {
                if ambient != 1 {
                    return Err(Error::InvalidModel(
                        "interval generators need ambient dimension 1".into(),
                    ));
                }
                SteinerRep::interval(*len)?
            }
            GeneratorSpec::Steiner(rep) => rep.clone(),
        };
        if rep.dimension() != ambient {
            return Err(Error::InvalidModel(format!(
                "generator \"{}\" has dimension {}, system has {}",
                self.label,
                rep.dimension(),
                ambient
            )));
        }
        Ok(rep)
    }
}

/// A self-similar system: J >= 2 contraction ratios in (0,1), an ambient
/// dimension (1 or 2), and at least one generator. Ratios and generators are
/// stored in nonincreasing order (by value and by inradius respectively).
#[derive(Clone, Debug)]
pub struct SelfSimilarSystem {
    ratios: Vec<f64>,
    dimension: usize,
    generators: Vec<Generator>,
    reps: Vec<SteinerRep>,
    hull_volume: Option<f64>,
}

impl SelfSimilarSystem {
    pub fn new(
        ratios: Vec<f64>,
        dimension: usize,
        generators: Vec<Generator>,
        hull_volume: Option<f64>,
    ) -> Result<Self> {
        if ratios.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least 2 ratios, got {}",
                ratios.len()
            )));
        }
        if ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::InvalidModel("ratios must lie in (0, 1)".into()));
        }
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidModel(format!(
                "ambient dimension {dimension} unsupported (need 1 or 2)"
            )));
        }
        if generators.is_empty() {
            return Err(Error::InvalidModel("need at least one generator".into()));
        }
        let mut ratios = ratios;
        ratios.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sum: f64 = ratios.iter().map(|r| r.powi(dimension as i32)).sum();
        if sum >= 1.0 {
            return Err(Error::DivergentSeries { sum });
        }
        let mut tagged: Vec<(Generator, SteinerRep)> = generators
            .into_iter()
            .map(|gen| {
                let rep = gen.resolve(dimension)?;
                Ok((gen, rep))
            })
            .collect::<Result<_>>()?;
        tagged.sort_by(|a, b| b.1.inradius().partial_cmp(&a.1.inradius()).unwrap());
        let (generators, reps) = tagged.into_iter().unzip();
        Ok(SelfSimilarSystem {
            ratios,
            dimension,
            generators,
            reps,
            hull_volume,
        })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn alphabet_size(&self) -> usize {
        self.ratios.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn reps(&self) -> &[SteinerRep] {
        &self.reps
    }

    pub fn hull_volume(&self) -> Option<f64> {
        self.hull_volume
    }

    /// Product of the per-letter ratios; 1 for the empty word.
    pub fn word_ratio(&self, w: &Word) -> Result<f64> {
        let j = self.alphabet_size();
        let mut prod = 1.0;
        for &letter in w.letters() {
            if letter == 0 || letter > j {
                return Err(Error::InvalidWord {
                    letter,
                    alphabet: j,
                });
            }
            prod *= self.ratios[letter - 1];
        }
        Ok(prod)
    }

    /// Inradius of the tile obtained by applying the word `w` to generator `q`:
    /// `r_w * g_q`.
    pub fn tile_inradius(&self, w: &Word, q: usize) -> Result<f64> {
        let rep = self.reps.get(q).ok_or(Error::GeneratorIndex {
            index: q,
            count: self.reps.len(),
        })?;
        Ok(self.word_ratio(w)? * rep.inradius())
    }

    /// Total volume of all tiles: `sum_q vol(G_q) / (1 - sum_j r_j^d)`.
    pub fn total_tiling_volume(&self) -> Result<f64> {
        let s: f64 = self
            .ratios
            .iter()
            .map(|r| r.powi(self.dimension as i32))
            .sum();
        if s >= 1.0 {
            return Err(Error::DivergentSeries { sum: s });
        }
        let gen_vol: f64 = self.reps.iter().map(|r| r.volume()).sum();
        Ok(gen_vol / (1.0 - s))
    }

    fn ratios_all_equal(&self) -> bool {
        self.ratios
            .iter()
            .all(|r| (r - self.ratios[0]).abs() <= RATIO_EQ_TOL)
    }

    fn word_count(&self, depth: usize) -> u128 {
        let j = self.alphabet_size() as u128;
        let mut total: u128 = 0;
        let mut level: u128 = 1;
        for _ in 0..=depth {
            total = total.saturating_add(level);
            level = level.saturating_mul(j);
        }
        total
    }

    /// All words of length <= depth with their ratios. Equal-ratio systems
    /// are aggregated into one class per length; otherwise the words are
    /// enumerated explicitly, subject to [`WORD_BUDGET`].
    pub fn words_by_depth(&self, depth: usize) -> Result<WordEnumeration<'_>> {
        if self.ratios_all_equal() {
            let j = self.alphabet_size() as u128;
            let mut classes = Vec::with_capacity(depth + 1);
            let mut mult: u128 = 1;
            for k in 0..=depth {
                classes.push(DepthClass {
                    depth: k,
                    ratio: self.ratios[0].powi(k as i32),
                    multiplicity: mult,
                });
                mult = mult.saturating_mul(j);
            }
            Ok(WordEnumeration::Aggregated(classes))
        } else {
            Ok(WordEnumeration::Explicit(self.words_explicit(depth)?))
        }
    }

    /// Explicit word iterator regardless of ratio structure.
    pub fn words_explicit(&self, depth: usize) -> Result<WordsIter<'_>> {
        let count = self.word_count(depth);
        if count > WORD_BUDGET {
            return Err(Error::BudgetExceeded {
                count,
                budget: WORD_BUDGET,
            });
        }
        Ok(WordsIter {
            system: self,
            depth,
            current: Some(Vec::new()),
        })
    }
}

/// One aggregated class of words: all `multiplicity` words of the given
/// length share the same ratio.
#[derive(Clone, Copy, Debug)]
pub struct DepthClass {
    pub depth: usize,
    pub ratio: f64,
    pub multiplicity: u128,
}

pub enum WordEnumeration<'a> {
    Explicit(WordsIter<'a>),
    Aggregated(Vec<DepthClass>),
}

/// Iterates words of length 0..=depth in order of increasing length,
/// lexicographically within each length.
pub struct WordsIter<'a> {
    system: &'a SelfSimilarSystem,
    depth: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for WordsIter<'_> {
    type Item = (Word, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.current.as_ref()?.clone();
        let word = Word(current.clone());
        let ratio = self.system.word_ratio(&word).expect("letters in range");
        // advance: next lexicographic word of the same length, else grow
        let j = self.system.alphabet_size();
        let mut next = current;
        let mut i = next.len();
        loop {
            if i == 0 {
                if next.len() == self.depth {
                    self.current = None;
                } else {
                    self.current = Some(vec![1; next.len() + 1]);
                }
                break;
            }
            if next[i - 1] < j {
                next[i - 1] += 1;
                for slot in next.iter_mut().skip(i) {
                    *slot = 1;
                }
                self.current = Some(next);
                break;
            }
            i -= 1;
        }
        Some((word, ratio))
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    polygon: Option<ConvexPolygon>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steiner: Option<SteinerRep>,
    #[serde(default)]
    label: String,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    ratios: Vec<f64>,
    dimension: usize,
    generators: Vec<GeneratorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hull_volume: Option<f64>,
}

impl Serialize for SelfSimilarSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let generators = self
            .generators
            .iter()
            .map(|gen| {
                let mut row = GeneratorJson {
                    polygon: None,
                    interval_length: None,
                    steiner: None,
                    label: gen.label.clone(),
                };
                match &gen.spec {
                    GeneratorSpec::Polygon(p) => row.polygon = Some(p.clone()),
                    GeneratorSpec::Interval(len) => row.interval_length = Some(*len),
                    GeneratorSpec::Steiner(rep) => row.steiner = Some(rep.clone()),
                }
                row
            })
            .collect();
        SystemJson {
            ratios: self.ratios.clone(),
            dimension: self.dimension,
            generators,
            hull_volume: self.hull_volume,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SelfSimilarSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SystemJson::deserialize(d)?;
        let generators = json
            .generators
            .into_iter()
            .map(|row| {
                let spec = match (row.polygon, row.interval_length, row.steiner) {
                    (Some(p), None, None) => GeneratorSpec::Polygon(p),
                    (None, Some(len), None) => GeneratorSpec::Interval(len),
                    (None, None, Some(rep)) => GeneratorSpec::Steiner(rep),
                    _ => {
                        return Err(serde::de::Error::custom(
                            "generator needs exactly one of polygon, interval_length, steiner",
                        ))
                    }
                };
                Ok(Generator {
                    spec,
                    label: row.label,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        SelfSimilarSystem::new(json.ratios, json.dimension, generators, json.hull_volume)
            .map_err(serde::de::Error::custom)
    }
}
