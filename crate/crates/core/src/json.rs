//! JSON encodings of maps, groups, atlases, groupoids, lift families and
//! sample files.
//!
//! Scalars are strings in the textual scalar syntax (`"1/3"`, `"1+sqrt(2)"`),
//! though plain JSON numbers are accepted on input. Interval endpoints may be
//! `"-inf"` or `"inf"`. Chart indices are 1-based.
//!
//! ```json
//! {"charts": [{"V": [[["0", "2"]]], "group": {"n": 1, "generators": [{"A": [["1"]], "b": ["1"]}]}}],
//!  "cocycle": []}
//! ```

use serde::{Deserialize, Serialize};

use crate::affine::{AffineGroup, AffineMap, Point};
use crate::bibundle::{BibundleClass, BibundleError, Lift, LiftFamily};
use crate::groupoid::{EtaleGroupoid, Pseudogroup};
use crate::lift::{LiftError, SampledMap};
use crate::model::{Atlas, Endpoint, Interval, ModelError, ModelQuasifold, OpenBox, OpenBoxSet, Transition};
use crate::scalar::{Field, ScalarError};
use crate::torus::{self, QuadraticIrrational, TorusError};

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bibundle(#[from] BibundleError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

impl From<crate::affine::AffineError> for JsonError {
    fn from(e: crate::affine::AffineError) -> Self {
        JsonError::Model(e.into())
    }
}

fn invalid(msg: impl Into<String>) -> JsonError {
    JsonError::Invalid(msg.into())
}

/// A scalar as text, or a JSON number on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarText {
    Text(String),
    Int(i64),
    Float(f64),
}

impl ScalarText {
    pub fn of<S: Field>(s: &S) -> Self {
        ScalarText::Text(s.to_string())
    }

    pub fn parse<S: Field>(&self) -> Result<S, JsonError> {
        match self {
            ScalarText::Text(t) => Ok(S::parse_scalar(t)?),
            ScalarText::Int(n) => Ok(S::from_i64(*n)),
            ScalarText::Float(v) => Ok(S::parse_scalar(&v.to_string())?),
        }
    }

    fn endpoint<S: Field>(&self) -> Result<Endpoint<S>, JsonError> {
        if let ScalarText::Text(t) = self {
            match t.trim() {
                "-inf" | "-∞" => return Ok(Endpoint::NegInf),
                "inf" | "+inf" | "∞" => return Ok(Endpoint::PosInf),
                _ => {}
            }
        }
        Ok(Endpoint::Finite(self.parse()?))
    }

    fn of_endpoint<S: Field>(e: &Endpoint<S>) -> Self {
        match e {
            Endpoint::NegInf => ScalarText::Text("-inf".into()),
            Endpoint::PosInf => ScalarText::Text("inf".into()),
            Endpoint::Finite(s) => ScalarText::of(s),
        }
    }
}

fn points<S: Field>(v: &[ScalarText]) -> Result<Point<S>, JsonError> {
    v.iter().map(|s| s.parse()).collect()
}

fn texts<S: Field>(v: &[S]) -> Vec<ScalarText> {
    v.iter().map(ScalarText::of).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<ScalarText>>,
    pub b: Vec<ScalarText>,
}

impl MapJson {
    pub fn of<S: Field>(m: &AffineMap<S>) -> Self {
        MapJson {
            a: m.linear().iter().map(|r| texts(r)).collect(),
            b: texts(m.offset()),
        }
    }

    pub fn build<S: Field>(&self) -> Result<AffineMap<S>, JsonError> {
        let a = self.a.iter().map(|r| points(r)).collect::<Result<Vec<_>, _>>()?;
        Ok(AffineMap::new(a, points(&self.b)?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub n: usize,
    #[serde(default)]
    pub generators: Vec<MapJson>,
}

impl GroupJson {
    pub fn of<S: Field>(g: &AffineGroup<S>) -> Self {
        GroupJson {
            n: g.dim(),
            generators: g.generators().iter().map(MapJson::of).collect(),
        }
    }

    pub fn build<S: Field>(&self) -> Result<AffineGroup<S>, JsonError> {
        let gens = self.generators.iter().map(|m| m.build()).collect::<Result<Vec<_>, _>>()?;
        Ok(AffineGroup::new(self.n, gens)?)
    }
}

/// A union of boxes; each box is a list of `[lo, hi]` pairs.
pub type BoxSetJson = Vec<Vec<[ScalarText; 2]>>;

pub fn box_set_of<S: Field>(set: &OpenBoxSet<S>) -> BoxSetJson {
    set.boxes()
        .iter()
        .map(|b| {
            b.intervals()
                .iter()
                .map(|iv| [ScalarText::of_endpoint(iv.lo()), ScalarText::of_endpoint(iv.hi())])
                .collect()
        })
        .collect()
}

pub fn build_box_set<S: Field>(n: usize, v: &BoxSetJson) -> Result<OpenBoxSet<S>, JsonError> {
    let mut boxes = Vec::new();
    for b in v {
        let ivs = b
            .iter()
            .map(|[lo, hi]| Ok(Interval::new(lo.endpoint()?, hi.endpoint()?)?))
            .collect::<Result<Vec<_>, JsonError>>()?;
        boxes.push(OpenBox::new(ivs));
    }
    Ok(OpenBoxSet::new(n, boxes)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartJson {
    #[serde(rename = "V")]
    pub v: BoxSetJson,
    pub group: GroupJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: usize,
    pub to: usize,
    pub map: MapJson,
    pub dom: BoxSetJson,
}

fn zero_based(i: usize, what: &str) -> Result<usize, JsonError> {
    i.checked_sub(1).ok_or_else(|| invalid(format!("{what} indices are 1-based")))
}

impl TransitionJson {
    fn of<S: Field>(t: &Transition<S>) -> Self {
        TransitionJson {
            from: t.from + 1,
            to: t.to + 1,
            map: MapJson::of(&t.map),
            dom: box_set_of(&t.domain),
        }
    }

    fn build<S: Field>(&self, n: usize) -> Result<Transition<S>, JsonError> {
        Ok(Transition {
            from: zero_based(self.from, "chart")?,
            to: zero_based(self.to, "chart")?,
            map: self.map.build()?,
            domain: build_box_set(n, &self.dom)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasJson {
    pub charts: Vec<ChartJson>,
    #[serde(default)]
    pub cocycle: Vec<TransitionJson>,
}

impl AtlasJson {
    pub fn of<S: Field>(a: &Atlas<S>) -> Self {
        AtlasJson {
            charts: a
                .charts()
                .iter()
                .map(|c| ChartJson {
                    v: box_set_of(c.domain()),
                    group: GroupJson::of(c.group()),
                })
                .collect(),
            cocycle: a.cocycle().iter().map(TransitionJson::of).collect(),
        }
    }

    pub fn build<S: Field>(&self) -> Result<Atlas<S>, JsonError> {
        let n = self.charts.first().map(|c| c.group.n).ok_or_else(|| invalid("atlas has no charts"))?;
        let charts = self
            .charts
            .iter()
            .map(|c| Ok(ModelQuasifold::new(build_box_set(c.group.n, &c.v)?, c.group.build()?)?))
            .collect::<Result<Vec<_>, JsonError>>()?;
        let cocycle = self.cocycle.iter().map(|t| t.build(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(Atlas::new(charts, cocycle)?)
    }
}

/// `action`: `Γ ⋉ V`. `germ`: the germ groupoid of an atlas. `torus`: the
/// action of `ℤ + αℤ` on `ℝ`, a shorthand for input only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GroupoidJson {
    Action {
        group: GroupJson,
        base: BoxSetJson,
    },
    Germ {
        charts: Vec<ChartJson>,
        #[serde(default)]
        cocycle: Vec<TransitionJson>,
    },
    Torus {
        alpha: String,
    },
}

impl GroupoidJson {
    pub fn of<S: Field>(g: &EtaleGroupoid<S>) -> Self {
        match g {
            EtaleGroupoid::Action { group, base } => GroupoidJson::Action {
                group: GroupJson::of(group),
                base: box_set_of(base),
            },
            EtaleGroupoid::Germ(p) => GroupoidJson::Germ {
                charts: p
                    .charts()
                    .iter()
                    .zip(p.groups())
                    .map(|(v, g)| ChartJson {
                        v: box_set_of(v),
                        group: GroupJson::of(g),
                    })
                    .collect(),
                cocycle: p.transitions().iter().map(TransitionJson::of).collect(),
            },
        }
    }

    pub fn build<S: Field>(&self) -> Result<EtaleGroupoid<S>, JsonError> {
        match self {
            GroupoidJson::Action { group, base } => {
                Ok(EtaleGroupoid::action(group.build()?, build_box_set(group.n, base)?)?)
            }
            GroupoidJson::Germ { charts, cocycle } => {
                let n = charts.first().map(|c| c.group.n).ok_or_else(|| invalid("groupoid has no charts"))?;
                let vs = charts.iter().map(|c| build_box_set(c.group.n, &c.v)).collect::<Result<Vec<_>, _>>()?;
                let gs = charts.iter().map(|c| c.group.build()).collect::<Result<Vec<_>, _>>()?;
                let ts = cocycle.iter().map(|t| t.build(n)).collect::<Result<Vec<_>, _>>()?;
                Ok(EtaleGroupoid::Germ(Pseudogroup::new(vs, gs, ts)?))
            }
            GroupoidJson::Torus { alpha } => {
                let alpha = QuadraticIrrational::parse(alpha)?;
                let exact = torus::groupoids_for(&alpha)?;
                // re-encode so the float variants get their own parse
                let EtaleGroupoid::Action { group, base } = exact else {
                    return Err(invalid("torus groupoid is an action groupoid"));
                };
                GroupoidJson::Action {
                    group: GroupJson::of(&group),
                    base: box_set_of(&base),
                }
                .build()
            }
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftJson {
    pub dom: BoxSetJson,
    pub map: MapJson,
    #[serde(default = "one")]
    pub src: usize,
    #[serde(default = "one")]
    pub tgt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BibundleJson {
    pub source: GroupoidJson,
    pub target: GroupoidJson,
    pub lifts: Vec<LiftJson>,
    #[serde(default = "default_class")]
    pub class: String,
}

fn default_class() -> String {
    BibundleClass::LocallyInvertible.name().to_string()
}

impl BibundleJson {
    pub fn of<S: Field>(p: &LiftFamily<S>) -> Self {
        BibundleJson {
            source: GroupoidJson::of(p.source()),
            target: GroupoidJson::of(p.target()),
            lifts: p
                .lifts()
                .iter()
                .map(|l| LiftJson {
                    dom: box_set_of(&l.dom),
                    map: MapJson::of(&l.map),
                    src: l.src_chart + 1,
                    tgt: l.tgt_chart + 1,
                })
                .collect(),
            class: p.class().name().to_string(),
        }
    }

    pub fn build<S: Field>(&self) -> Result<LiftFamily<S>, JsonError> {
        let source = self.source.build::<S>()?;
        let target = self.target.build::<S>()?;
        let n = source.dim();
        let lifts = self
            .lifts
            .iter()
            .map(|l| {
                Ok(Lift {
                    src_chart: zero_based(l.src, "lift chart")?,
                    tgt_chart: zero_based(l.tgt, "lift chart")?,
                    dom: build_box_set(n, &l.dom)?,
                    map: l.map.build()?,
                })
            })
            .collect::<Result<Vec<_>, JsonError>>()?;
        let class = BibundleClass::parse(&self.class).ok_or_else(|| invalid(format!("unknown class {:?}", self.class)))?;
        Ok(LiftFamily::new(source, target, lifts, class)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub x: Vec<ScalarText>,
    pub hx: Vec<ScalarText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesJson {
    pub domain: BoxSetJson,
    pub samples: Vec<SampleJson>,
}

impl SamplesJson {
    pub fn of<S: Field>(h: &SampledMap<S>) -> Self {
        SamplesJson {
            domain: box_set_of(h.domain()),
            samples: h
                .samples()
                .iter()
                .map(|(x, hx)| SampleJson { x: texts(x), hx: texts(hx) })
                .collect(),
        }
    }

    pub fn build<S: Field>(&self) -> Result<SampledMap<S>, JsonError> {
        let n = self.samples.first().map(|s| s.x.len()).or_else(|| self.domain.first().map(|b| b.len())).unwrap_or(0);
        let domain = build_box_set(n, &self.domain)?;
        let samples = self
            .samples
            .iter()
            .map(|s| Ok((points(&s.x)?, points(&s.hx)?)))
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(SampledMap::new(domain, samples)?)
    }
}

pub fn parse_atlas<S: Field>(text: &str) -> Result<Atlas<S>, JsonError> {
    serde_json::from_str::<AtlasJson>(text)?.build()
}

pub fn parse_groupoid<S: Field>(text: &str) -> Result<EtaleGroupoid<S>, JsonError> {
    serde_json::from_str::<GroupoidJson>(text)?.build()
}

pub fn parse_bibundle<S: Field>(text: &str) -> Result<LiftFamily<S>, JsonError> {
    serde_json::from_str::<BibundleJson>(text)?.build()
}

pub fn parse_samples<S: Field>(text: &str) -> Result<SampledMap<S>, JsonError> {
    serde_json::from_str::<SamplesJson>(text)?.build()
}

pub fn parse_box_set<S: Field>(n: usize, text: &str) -> Result<OpenBoxSet<S>, JsonError> {
    build_box_set(n, &serde_json::from_str::<BoxSetJson>(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    const ATLAS: &str = r#"{
        "charts": [
            {"V": [[["0", "2"]]], "group": {"n": 1, "generators": [{"A": [["1"]], "b": ["1"]}, {"A": [[1]], "b": ["sqrt(2)"]}]}},
            {"V": [[["0", "2"]]], "group": {"n": 1, "generators": [{"A": [["1"]], "b": ["1"]}, {"A": [["1"]], "b": ["sqrt(2)"]}]}}
        ],
        "cocycle": [{"from": 1, "to": 2, "map": {"A": [["1"]], "b": ["-1"]}, "dom": [[["1", "2"]]]}]
    }"#;

    #[test]
    fn atlas_round_trip() {
        let a: Atlas<Scalar> = parse_atlas(ATLAS).unwrap();
        let alpha = QuadraticIrrational::parse("sqrt(2)").unwrap();
        let b = torus::two_chart_atlas(&alpha).unwrap();
        assert_eq!(a.cocycle(), b.cocycle());
        let again: Atlas<Scalar> = AtlasJson::of(&a).build().unwrap();
        assert_eq!(AtlasJson::of(&again), AtlasJson::of(&a));
        assert!(parse_atlas::<Scalar>(r#"{"charts": [], "cocycle": []}"#).is_err());
        assert!(parse_atlas::<Scalar>(r#"{"charts": ["#).is_err());
    }

    #[test]
    fn infinite_endpoints_and_floats() {
        let s: OpenBoxSet<f64> = parse_box_set(1, r#"[[["-inf", "inf"]]]"#).unwrap();
        assert!(s.contains(&[1e9]).unwrap());
        assert_eq!(box_set_of(&s), vec![vec![[ScalarText::Text("-inf".into()), ScalarText::Text("inf".into())]]]);
    }

    #[test]
    fn bibundle_round_trip() {
        let text = r#"{"source": {"type": "torus", "alpha": "sqrt(2)"},
                       "target": {"type": "torus", "alpha": "sqrt(2)"},
                       "lifts": [{"dom": [[["-inf", "inf"]]], "map": {"A": [["1"]], "b": ["1/3"]}}],
                       "class": "invertible"}"#;
        let p: LiftFamily<Scalar> = parse_bibundle(text).unwrap();
        assert_eq!(p.lifts()[0].map, AffineMap::translation(vec![Scalar::ratio(1, 3)]));
        let out = serde_json::to_string(&BibundleJson::of(&p)).unwrap();
        let q: LiftFamily<Scalar> = parse_bibundle(&out).unwrap();
        assert_eq!(p, q);
        assert!(out.contains(r#""type":"action""#));
    }

    #[test]
    fn samples_parse() {
        let text = r#"{"domain": [[["-inf", "inf"]]], "samples": [{"x": ["0"], "hx": ["sqrt(2)"]}, {"x": ["1/2"], "hx": ["1/2+sqrt(2)"]}]}"#;
        let h: SampledMap<Scalar> = parse_samples(text).unwrap();
        assert_eq!(h.samples().len(), 2);
        assert!(h.is_exact());
    }
}
