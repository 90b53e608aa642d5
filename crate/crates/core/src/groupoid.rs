//! Étale groupoids over affine data.
//!
//! Two presentations are supported: the action groupoid `(Γ⋉ℝⁿ)|_V` of an
//! affine group restricted to an open set, and the germ groupoid of a
//! pseudogroup generated by chart groups and affine transitions. Arrow spaces
//! are never materialized; arrows are listed per base point up to a search
//! budget. A germ of an affine map is stored as the whole map plus its base
//! point, which loses nothing because an affine map is determined by its
//! germ.

use std::collections::{HashSet, VecDeque};

use crate::affine::{AffineError, AffineGroup, AffineMap, Enumeration, GroupElement, Point};
use crate::model::{fmt_point, Atlas, ModelError, OpenBoxSet, Transition};
use crate::scalar::{Field, QuadCoords};
use crate::search::{self, move_applies, moves_from, PathStep, SearchBudget};
use crate::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroupoidError {
    #[error("arrows are not composable: {0}")]
    NotComposable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<AffineError> for GroupoidError {
    fn from(e: AffineError) -> Self {
        GroupoidError::Model(e.into())
    }
}

/// `germ_base(map)` from chart `src_chart` to chart `tgt_chart`.
#[derive(Debug, Clone, PartialEq)]
pub struct GermArrow<S> {
    pub src_chart: usize,
    pub tgt_chart: usize,
    pub map: AffineMap<S>,
    pub base: Point<S>,
}

impl<S: Field> GermArrow<S> {
    pub fn identity(chart: usize, base: Point<S>) -> Self {
        GermArrow {
            src_chart: chart,
            tgt_chart: chart,
            map: AffineMap::identity(base.len()),
            base,
        }
    }

    pub fn source(&self) -> &[S] {
        &self.base
    }

    pub fn target(&self) -> Result<Point<S>, AffineError> {
        self.map.apply(&self.base)
    }

    pub fn is_identity(&self) -> bool {
        self.src_chart == self.tgt_chart && self.map.is_identity()
    }

    /// `self · h`, defined when `h` ends where `self` starts.
    pub fn compose(&self, h: &GermArrow<S>) -> Result<GermArrow<S>, GroupoidError> {
        if self.src_chart != h.tgt_chart {
            return Err(GroupoidError::NotComposable(format!(
                "chart {} against chart {}",
                self.src_chart, h.tgt_chart
            )));
        }
        let mid = h.target()?;
        if mid != self.base {
            return Err(GroupoidError::NotComposable(format!(
                "target {} against base {}",
                fmt_point(&mid),
                fmt_point(&self.base)
            )));
        }
        Ok(GermArrow {
            src_chart: h.src_chart,
            tgt_chart: self.tgt_chart,
            map: self.map.compose(&h.map)?,
            base: h.base.clone(),
        })
    }

    pub fn inverse(&self) -> Result<GermArrow<S>, AffineError> {
        Ok(GermArrow {
            src_chart: self.tgt_chart,
            tgt_chart: self.src_chart,
            map: self.map.invert()?,
            base: self.target()?,
        })
    }
}

/// `arrow_compose(g, h) = g · h`.
pub fn arrow_compose<S: Field>(g: &GermArrow<S>, h: &GermArrow<S>) -> Result<GermArrow<S>, GroupoidError> {
    g.compose(h)
}

/// An arrow `(γ, x)` of an action groupoid: source `x`, target `γ·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionArrow<S> {
    pub element: GroupElement<S>,
    pub base: Point<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arrow<S> {
    Action(ActionArrow<S>),
    Germ(GermArrow<S>),
}

impl<S: Field> Arrow<S> {
    pub fn map(&self) -> &AffineMap<S> {
        match self {
            Arrow::Action(a) => &a.element.map,
            Arrow::Germ(g) => &g.map,
        }
    }

    pub fn source(&self) -> &[S] {
        match self {
            Arrow::Action(a) => &a.base,
            Arrow::Germ(g) => &g.base,
        }
    }

    pub fn target(&self) -> Result<Point<S>, AffineError> {
        self.map().apply(self.source())
    }

    pub fn src_chart(&self) -> usize {
        match self {
            Arrow::Action(_) => 0,
            Arrow::Germ(g) => g.src_chart,
        }
    }

    pub fn tgt_chart(&self) -> usize {
        match self {
            Arrow::Action(_) => 0,
            Arrow::Germ(g) => g.tgt_chart,
        }
    }
}

/// An arrow together with the generator word that realizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedArrow<S> {
    pub arrow: Arrow<S>,
    pub steps: Vec<PathStep<S>>,
}

/// Arrows out of one base point, in discovery order.
#[derive(Debug, Clone)]
pub struct ArrowSet<S> {
    pub arrows: Vec<RealizedArrow<S>>,
    /// True when no arrow was cut off by the budget.
    pub complete: bool,
}

/// Charts `V_i` with groups `Γ_i` acting inside them, plus affine
/// transitions between charts. The generated pseudogroup is closed lazily by
/// word search.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudogroup<S> {
    charts: Vec<OpenBoxSet<S>>,
    groups: Vec<AffineGroup<S>>,
    transitions: Vec<Transition<S>>,
}

impl<S: Field> Pseudogroup<S> {
    pub fn new(
        charts: Vec<OpenBoxSet<S>>,
        groups: Vec<AffineGroup<S>>,
        transitions: Vec<Transition<S>>,
    ) -> Result<Self, ModelError> {
        let n = charts.first().map(|c| c.dim()).unwrap_or(0);
        if groups.len() != charts.len() {
            return Err(ModelError::Dimension {
                expected: charts.len(),
                found: groups.len(),
            });
        }
        for (c, g) in charts.iter().zip(&groups) {
            for d in [c.dim(), g.dim()] {
                if d != n {
                    return Err(ModelError::Dimension { expected: n, found: d });
                }
            }
        }
        for (index, t) in transitions.iter().enumerate() {
            let from = charts.get(t.from).ok_or(ModelError::BadChart(t.from))?;
            charts.get(t.to).ok_or(ModelError::BadChart(t.to))?;
            if t.map.dim() != n || t.domain.dim() != n {
                return Err(ModelError::BadTransition {
                    index,
                    reason: "dimension mismatch".into(),
                });
            }
            if !from.contains_set(&t.domain)? {
                return Err(ModelError::BadTransition {
                    index,
                    reason: "domain is not inside the source chart".into(),
                });
            }
        }
        Ok(Pseudogroup {
            charts,
            groups,
            transitions,
        })
    }

    pub fn from_atlas(atlas: &Atlas<S>) -> Self {
        Pseudogroup {
            charts: atlas.domains(),
            groups: atlas.groups(),
            transitions: atlas.cocycle().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.charts.first().map(|c| c.dim()).unwrap_or(0)
    }

    pub fn charts(&self) -> &[OpenBoxSet<S>] {
        &self.charts
    }

    pub fn groups(&self) -> &[AffineGroup<S>] {
        &self.groups
    }

    pub fn transitions(&self) -> &[Transition<S>] {
        &self.transitions
    }

    /// Every generator as a transition: chart-group generators on their
    /// chart, then the declared transitions.
    pub fn generators(&self) -> Vec<Transition<S>> {
        let mut out = Vec::new();
        for (i, (v, g)) in self.charts.iter().zip(&self.groups).enumerate() {
            for m in g.generators() {
                out.push(Transition {
                    from: i,
                    to: i,
                    map: m.clone(),
                    domain: v.clone(),
                });
            }
        }
        out.extend(self.transitions.iter().cloned());
        out
    }

    fn restrict(&self, u: &OpenBoxSet<S>) -> Result<Self, ModelError> {
        let charts = self.charts.iter().map(|c| c.intersect(u)).collect::<Result<Vec<_>, _>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|t| {
                Ok(Transition {
                    domain: t.domain.intersect(u)?,
                    ..t.clone()
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Pseudogroup {
            charts,
            groups: self.groups.clone(),
            transitions,
        })
    }

    fn touches(&self, chart: usize) -> bool {
        self.transitions.iter().any(|t| t.from == chart || t.to == chart)
    }
}

/// How effectivity was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffectCertificate {
    /// Distinct enumerated elements are distinct affine maps, so their germs
    /// differ at every point of the open base.
    AffineRigidity { elements_checked: usize },
    /// Arrows of a germ groupoid are germs already.
    GermVariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effectivity {
    pub effective: bool,
    pub certificate: EffectCertificate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtaleGroupoid<S> {
    Action { group: AffineGroup<S>, base: OpenBoxSet<S> },
    Germ(Pseudogroup<S>),
}

impl<S: Field> EtaleGroupoid<S> {
    pub fn action(group: AffineGroup<S>, base: OpenBoxSet<S>) -> Result<Self, ModelError> {
        if group.dim() != base.dim() {
            return Err(ModelError::Dimension {
                expected: base.dim(),
                found: group.dim(),
            });
        }
        Ok(EtaleGroupoid::Action { group, base })
    }

    /// Only identity arrows over `base`.
    pub fn unit(base: OpenBoxSet<S>) -> Self {
        EtaleGroupoid::Action {
            group: AffineGroup::trivial(base.dim()),
            base,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EtaleGroupoid::Action { base, .. } => base.dim(),
            EtaleGroupoid::Germ(p) => p.dim(),
        }
    }

    pub fn chart_count(&self) -> usize {
        match self {
            EtaleGroupoid::Action { .. } => 1,
            EtaleGroupoid::Germ(p) => p.charts.len(),
        }
    }

    pub fn chart_base(&self, chart: usize) -> Result<&OpenBoxSet<S>, ModelError> {
        match self {
            EtaleGroupoid::Action { base, .. } if chart == 0 => Ok(base),
            EtaleGroupoid::Germ(p) => p.charts.get(chart).ok_or(ModelError::BadChart(chart)),
            _ => Err(ModelError::BadChart(chart)),
        }
    }

    pub fn chart_group(&self, chart: usize) -> Result<&AffineGroup<S>, ModelError> {
        match self {
            EtaleGroupoid::Action { group, .. } if chart == 0 => Ok(group),
            EtaleGroupoid::Germ(p) => p.groups.get(chart).ok_or(ModelError::BadChart(chart)),
            _ => Err(ModelError::BadChart(chart)),
        }
    }

    fn check_point(&self, chart: usize, x: &[S]) -> Result<(), ModelError> {
        if !self.chart_base(chart)?.contains(x)? {
            return Err(ModelError::NotInDomain(fmt_point(x)));
        }
        Ok(())
    }

    pub fn identity_arrow(&self, chart: usize, x: Point<S>) -> Result<Arrow<S>, ModelError> {
        self.check_point(chart, &x)?;
        Ok(match self {
            EtaleGroupoid::Action { group, .. } => Arrow::Action(ActionArrow {
                element: group.identity_element(),
                base: x,
            }),
            EtaleGroupoid::Germ(_) => Arrow::Germ(GermArrow::identity(chart, x)),
        })
    }

    /// Arrows with source `(chart, x)`.
    ///
    /// For the germ variant, a chart-group element counts as one step as long
    /// as its endpoints lie in the chart; a transition step needs the point
    /// in the transition's domain.
    pub fn arrows_at(&self, chart: usize, x: &[S], budget: SearchBudget) -> Result<ArrowSet<S>, ModelError> {
        self.check_point(chart, x)?;
        match self {
            EtaleGroupoid::Action { group, base } => {
                let en = group.enumerate_full(budget.word_bound);
                let mut arrows = Vec::new();
                for e in en.elements {
                    if base.contains(&e.map.apply(x)?)? {
                        arrows.push(RealizedArrow {
                            steps: vec![PathStep::Group {
                                chart: 0,
                                element: e.clone(),
                            }],
                            arrow: Arrow::Action(ActionArrow {
                                element: e,
                                base: x.to_vec(),
                            }),
                        });
                    }
                }
                Ok(ArrowSet {
                    arrows,
                    complete: en.saturated,
                })
            }
            EtaleGroupoid::Germ(p) => germ_arrows(p, chart, x, budget),
        }
    }

    /// The germ of the canonical bisection through an arrow.
    pub fn effect(&self, arrow: &Arrow<S>) -> GermArrow<S> {
        match arrow {
            Arrow::Action(a) => GermArrow {
                src_chart: 0,
                tgt_chart: 0,
                map: a.element.map.clone(),
                base: a.base.clone(),
            },
            Arrow::Germ(g) => g.clone(),
        }
    }

    pub fn is_effective(&self, bound: usize) -> Effectivity {
        match self {
            EtaleGroupoid::Action { group, .. } => {
                let elements = group.enumerate(bound);
                let mut keys: HashSet<Vec<QuadCoords>> = HashSet::new();
                let mut inexact: Vec<&AffineMap<S>> = Vec::new();
                let mut effective = true;
                for e in &elements {
                    let fresh = match e.map.exact_key() {
                        Some(k) => keys.insert(k),
                        None => {
                            let fresh = !inexact.contains(&&e.map);
                            inexact.push(&e.map);
                            fresh
                        }
                    };
                    effective &= fresh;
                }
                Effectivity {
                    effective,
                    certificate: EffectCertificate::AffineRigidity {
                        elements_checked: elements.len(),
                    },
                }
            }
            EtaleGroupoid::Germ(_) => Effectivity {
                effective: true,
                certificate: EffectCertificate::GermVariant,
            },
        }
    }

    /// Pullback to `u`: arrows whose source and target both lie in `u`.
    pub fn restrict(&self, u: &OpenBoxSet<S>) -> Result<Self, ModelError> {
        Ok(match self {
            EtaleGroupoid::Action { group, base } => EtaleGroupoid::Action {
                group: group.clone(),
                base: base.intersect(u)?,
            },
            EtaleGroupoid::Germ(p) => EtaleGroupoid::Germ(p.restrict(u)?),
        })
    }

    /// The germ groupoid with the same arrows, as a one-chart pseudogroup.
    pub fn germ_groupoid(&self) -> Self {
        match self {
            EtaleGroupoid::Action { group, base } => EtaleGroupoid::Germ(Pseudogroup {
                charts: vec![base.clone()],
                groups: vec![group.clone()],
                transitions: Vec::new(),
            }),
            g => g.clone(),
        }
    }

    /// Is there an arrow from `(i, x)` to `(j, y)`?
    pub fn orbit_equal(
        &self,
        (i, x): (usize, &[S]),
        (j, y): (usize, &[S]),
        budget: SearchBudget,
    ) -> Result<Verdict<GermArrow<S>>, ModelError> {
        self.check_point(i, x)?;
        self.check_point(j, y)?;
        match self {
            EtaleGroupoid::Action { group, .. } => Ok(group.orbit_equal(x, y, budget.word_bound)?.map(|e| GermArrow {
                src_chart: 0,
                tgt_chart: 0,
                map: e.map,
                base: x.to_vec(),
            })),
            EtaleGroupoid::Germ(p) => {
                let v = search::orbit_search(&p.charts, &p.groups, &p.transitions, (i, x), (j, y), budget)?;
                Ok(v.map(|path| GermArrow {
                    src_chart: i,
                    tgt_chart: j,
                    map: path.map,
                    base: x.to_vec(),
                }))
            }
        }
    }

    /// Is `germ_x(map)`, from chart `i` to chart `j`, an arrow?
    pub fn contains_germ(
        &self,
        (i, x): (usize, &[S]),
        j: usize,
        map: &AffineMap<S>,
        budget: SearchBudget,
    ) -> Result<Verdict<()>, ModelError> {
        self.check_point(i, x)?;
        let y = map.apply(x)?;
        if !self.chart_base(j)?.contains(&y)? {
            return Ok(Verdict::No);
        }
        match self {
            EtaleGroupoid::Action { group, .. } => Ok(group.contains(map, budget.word_bound)?.decided()),
            EtaleGroupoid::Germ(p) => {
                if i == j {
                    let v = p.groups[i].contains(map, budget.word_bound)?;
                    if v.is_yes() || !p.touches(i) {
                        return Ok(v.decided());
                    }
                }
                let set = germ_arrows(p, i, x, budget)?;
                let hit = set.arrows.iter().any(|a| a.arrow.tgt_chart() == j && a.arrow.map() == map);
                Ok(if hit {
                    Verdict::Yes(())
                } else if set.complete {
                    Verdict::No
                } else {
                    Verdict::Unknown
                })
            }
        }
    }
}

/// Builds the germ groupoid of an atlas: chart groups act inside their
/// charts and the cocycle transitions glue them.
pub fn germ_groupoid_of_atlas<S: Field>(atlas: &Atlas<S>) -> EtaleGroupoid<S> {
    EtaleGroupoid::Germ(Pseudogroup::from_atlas(atlas))
}

fn map_key<S: Field>(chart: usize, m: &AffineMap<S>) -> Option<(usize, Vec<QuadCoords>)> {
    m.exact_key().map(|k| (chart, k))
}

struct Node<S> {
    chart: usize,
    point: Point<S>,
    map: AffineMap<S>,
    steps: Vec<PathStep<S>>,
    hops: usize,
}

fn germ_arrows<S: Field>(p: &Pseudogroup<S>, chart: usize, x: &[S], budget: SearchBudget) -> Result<ArrowSet<S>, ModelError> {
    let n = x.len();
    let mut cache: Vec<Option<Enumeration<S>>> = vec![None; p.charts.len()];
    let mut seen_exact: HashSet<(usize, Vec<QuadCoords>)> = HashSet::new();
    let mut seen_inexact: Vec<(usize, AffineMap<S>)> = Vec::new();
    let mut fresh = |c: usize, m: &AffineMap<S>| match map_key(c, m) {
        Some(k) => seen_exact.insert(k),
        None => {
            if seen_inexact.iter().any(|(d, q)| *d == c && q == m) {
                false
            } else {
                seen_inexact.push((c, m.clone()));
                true
            }
        }
    };
    let mut arrows = Vec::new();
    let mut complete = true;
    let mut nodes = 1usize;
    let mut queue = VecDeque::from([Node {
        chart,
        point: x.to_vec(),
        map: AffineMap::identity(n),
        steps: Vec::new(),
        hops: 0,
    }]);
    while let Some(node) = queue.pop_front() {
        let c = node.chart;
        let en = cache[c].get_or_insert_with(|| p.groups[c].enumerate_full(budget.word_bound)).clone();
        complete &= en.saturated;
        let moves = moves_from(&p.transitions, c)?;
        for g in &en.elements {
            let q = g.map.apply(&node.point)?;
            if !p.charts[c].contains(&q)? {
                continue;
            }
            let total = g.map.compose(&node.map)?;
            let mut steps = node.steps.clone();
            if !g.word.is_empty() {
                steps.push(PathStep::Group {
                    chart: c,
                    element: g.clone(),
                });
            }
            if fresh(c, &total) {
                arrows.push(RealizedArrow {
                    arrow: Arrow::Germ(GermArrow {
                        src_chart: chart,
                        tgt_chart: c,
                        map: total.clone(),
                        base: x.to_vec(),
                    }),
                    steps: steps.clone(),
                });
            }
            for (index, inverse, tmap, target) in &moves {
                if !move_applies(&p.transitions, *index, *inverse, tmap, &q)? {
                    continue;
                }
                let r = tmap.apply(&q)?;
                if !p.charts[*target].contains(&r)? {
                    continue;
                }
                if node.hops >= budget.max_hops || nodes >= budget.max_nodes {
                    complete = false;
                    continue;
                }
                nodes += 1;
                let mut next = steps.clone();
                next.push(PathStep::Transition {
                    index: *index,
                    inverse: *inverse,
                });
                queue.push_back(Node {
                    chart: *target,
                    point: r,
                    map: tmap.compose(&total)?,
                    steps: next,
                    hops: node.hops + 1,
                });
            }
        }
    }
    Ok(ArrowSet { arrows, complete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelQuasifold;
    use crate::scalar::Scalar;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn torus() -> AffineGroup<Scalar> {
        AffineGroup::translations_1d(vec![Scalar::int(1), Scalar::sqrt(2)]).unwrap()
    }

    fn budget(b: usize) -> SearchBudget {
        SearchBudget::from_bound(b)
    }

    #[test]
    fn translation_germs_compose() {
        let g = GermArrow {
            src_chart: 0,
            tgt_chart: 0,
            map: AffineMap::translation(vec![Scalar::int(1)]),
            base: vec![Scalar::sqrt(2)],
        };
        let h = GermArrow {
            src_chart: 0,
            tgt_chart: 0,
            map: AffineMap::translation(vec![Scalar::sqrt(2)]),
            base: vec![Scalar::int(0)],
        };
        let gh = arrow_compose(&g, &h).unwrap();
        assert_eq!(gh.base, vec![Scalar::int(0)]);
        assert_eq!(gh.map, AffineMap::translation(vec![Scalar::int(1) + Scalar::sqrt(2)]));
        let id = GermArrow::identity(0, g.base.clone());
        assert_eq!(g.compose(&id).unwrap(), g);
        let back = h.inverse().unwrap().compose(&h).unwrap();
        assert!(back.is_identity());
        assert!(arrow_compose(&h, &h).is_err());
    }

    #[test]
    fn single_chart_arrows_are_group_germs() {
        let chart = ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        let g = germ_groupoid_of_atlas(&Atlas::single(chart));
        let set = g.arrows_at(0, &[q(1, 3)], budget(1)).unwrap();
        assert_eq!(set.arrows.len(), 5);
        assert!(!set.complete);
    }

    #[test]
    fn trivial_atlas_gives_unit_groupoid() {
        let chart = ModelQuasifold::new(OpenBoxSet::full(1), AffineGroup::trivial(1)).unwrap();
        let g = germ_groupoid_of_atlas(&Atlas::single(chart));
        let set = g.arrows_at(0, &[q(2, 7)], budget(4)).unwrap();
        assert_eq!(set.arrows.len(), 1);
        assert!(set.arrows[0].arrow.map().is_identity());
        assert!(set.complete);
    }

    #[test]
    fn restriction_to_short_interval_kills_integer_shifts() {
        let z = AffineGroup::translations_1d(vec![Scalar::int(1)]).unwrap();
        let g = EtaleGroupoid::action(z, OpenBoxSet::full(1)).unwrap();
        let r = g.restrict(&OpenBoxSet::interval(q(0, 1), q(1, 2)).unwrap()).unwrap();
        for k in 1..10 {
            let set = r.arrows_at(0, &[q(k, 20)], budget(5)).unwrap();
            assert_eq!(set.arrows.len(), 1);
        }
        assert_eq!(g.restrict(&OpenBoxSet::full(1)).unwrap(), g);
    }

    #[test]
    fn reflection_survives_symmetric_restriction() {
        let refl = AffineGroup::new(1, vec![AffineMap::line(Scalar::int(-1), Scalar::int(0)).unwrap()]).unwrap();
        let g = EtaleGroupoid::action(refl, OpenBoxSet::full(1)).unwrap();
        let r = g.restrict(&OpenBoxSet::interval(q(-1, 1), q(1, 1)).unwrap()).unwrap();
        let set = r.arrows_at(0, &[q(1, 2)], budget(3)).unwrap();
        assert_eq!(set.arrows.len(), 2);
        assert!(set.complete);
    }

    #[test]
    fn effect_of_action_arrows() {
        let g = EtaleGroupoid::action(torus(), OpenBoxSet::full(1)).unwrap();
        let set = g.arrows_at(0, &[q(0, 1)], budget(1)).unwrap();
        let germs: Vec<_> = set.arrows.iter().map(|a| g.effect(&a.arrow)).collect();
        assert!(germs[0].is_identity());
        for i in 0..germs.len() {
            for j in 0..i {
                assert_ne!(germs[i], germs[j]);
            }
        }
        let e = g.is_effective(3);
        assert!(e.effective);
        assert_eq!(e.certificate, EffectCertificate::AffineRigidity { elements_checked: 25 });
        let unit = EtaleGroupoid::<Scalar>::unit(OpenBoxSet::full(1));
        assert!(unit.is_effective(3).effective);
    }

    #[test]
    fn germ_membership_is_exact_on_lattice_charts() {
        let g = EtaleGroupoid::action(torus(), OpenBoxSet::full(1)).unwrap().germ_groupoid();
        let x = [q(1, 5)];
        let good = AffineMap::translation(vec![Scalar::int(3) - Scalar::sqrt(2)]);
        let bad = AffineMap::translation(vec![q(1, 2)]);
        assert!(g.contains_germ((0, &x), 0, &good, budget(1)).unwrap().is_yes());
        assert!(g.contains_germ((0, &x), 0, &bad, budget(1)).unwrap().is_no());
    }
}
