//! Breadth-first orbit search over charts glued by transitions.
//!
//! A state is a chart and a point in it. Moves apply an element of the
//! chart's group (kept inside the chart) followed by a transition or the
//! inverse of one. Arrival in the target chart is tested with the chart
//! group's own orbit decision, so translation-lattice charts are decided
//! exactly at the last step.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::affine::{AffineGroup, AffineMap, Enumeration, GroupElement, GroupKind, Point};
use crate::model::{fmt_point, ModelError, OpenBoxSet, Transition};
use crate::scalar::{Field, QuadCoords};
use crate::Verdict;

/// Limits for [`orbit_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Word length for chart-group enumeration.
    pub word_bound: usize,
    /// Maximum number of transitions in a path.
    pub max_hops: usize,
    /// Maximum number of distinct states visited.
    pub max_nodes: usize,
}

impl SearchBudget {
    pub fn from_bound(bound: usize) -> Self {
        SearchBudget {
            word_bound: bound,
            max_hops: bound.max(1),
            max_nodes: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathStep<S> {
    Group { chart: usize, element: GroupElement<S> },
    Transition { index: usize, inverse: bool },
}

/// Witness that `map` carries the source representative to the target one,
/// built from the listed steps (applied first to last).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPath<S> {
    pub from: usize,
    pub to: usize,
    pub map: AffineMap<S>,
    pub steps: Vec<PathStep<S>>,
}

struct Node<S> {
    chart: usize,
    point: Point<S>,
    map: AffineMap<S>,
    steps: Vec<PathStep<S>>,
    hops: usize,
}

/// Transitions usable from `chart`: `(index, inverse, map, target chart)`.
pub(crate) fn moves_from<S: Field>(
    transitions: &[Transition<S>],
    chart: usize,
) -> Result<Vec<(usize, bool, AffineMap<S>, usize)>, ModelError> {
    let mut out = Vec::new();
    for (k, t) in transitions.iter().enumerate() {
        if t.from == chart {
            out.push((k, false, t.map.clone(), t.to));
        }
        if t.to == chart {
            out.push((k, true, t.map.invert()?, t.from));
        }
    }
    Ok(out)
}

/// Can the move be applied at `p` (a point of the move's source chart)?
pub(crate) fn move_applies<S: Field>(
    transitions: &[Transition<S>],
    index: usize,
    inverse: bool,
    map: &AffineMap<S>,
    p: &[S],
) -> Result<bool, ModelError> {
    let t = &transitions[index];
    if inverse {
        let q = map.apply(p)?;
        t.domain.contains(&q)
    } else {
        t.domain.contains(p)
    }
}

fn reachable_charts<S>(n: usize, transitions: &[Transition<S>], start: usize) -> HashSet<usize> {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for t in transitions {
            for (a, b) in [(t.from, t.to), (t.to, t.from)] {
                if a == c && b < n && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
    }
    seen
}

struct Visited<S> {
    exact: HashSet<(usize, Vec<QuadCoords>)>,
    inexact: Vec<(usize, Point<S>)>,
}

impl<S: Field> Visited<S> {
    fn insert(&mut self, chart: usize, p: &[S]) -> bool {
        match p.iter().map(|x| x.coords()).collect::<Option<Vec<_>>>() {
            Some(k) => self.exact.insert((chart, k)),
            None => {
                if self.inexact.iter().any(|(c, q)| *c == chart && q.as_slice() == p) {
                    false
                } else {
                    self.inexact.push((chart, p.to_vec()));
                    true
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.exact.len() + self.inexact.len()
    }
}

fn orbit_check<S: Field>(
    group: &AffineGroup<S>,
    en: &Enumeration<S>,
    p: &[S],
    y: &[S],
    bound: usize,
) -> Result<Verdict<GroupElement<S>>, ModelError> {
    if group.kind() == GroupKind::TranslationLattice {
        return Ok(group.orbit_equal(p, y, bound)?);
    }
    for e in &en.elements {
        if e.map.apply(p)? == y {
            return Ok(Verdict::Yes(e.clone()));
        }
    }
    Ok(if en.saturated { Verdict::No } else { Verdict::Unknown })
}

/// Is `(j, y)` reachable from `(i, x)`?
pub(crate) fn orbit_search<S: Field>(
    domains: &[OpenBoxSet<S>],
    groups: &[AffineGroup<S>],
    transitions: &[Transition<S>],
    (i, x): (usize, &[S]),
    (j, y): (usize, &[S]),
    budget: SearchBudget,
) -> Result<Verdict<ChartPath<S>>, ModelError> {
    for (c, p) in [(i, x), (j, y)] {
        let dom = domains.get(c).ok_or(ModelError::BadChart(c))?;
        if !dom.contains(p)? {
            return Err(ModelError::NotInDomain(fmt_point(p)));
        }
    }
    if !reachable_charts(domains.len(), transitions, i).contains(&j) {
        return Ok(Verdict::No);
    }
    let n = x.len();
    let mut cache: HashMap<usize, Enumeration<S>> = HashMap::new();
    let mut visited = Visited {
        exact: HashSet::new(),
        inexact: Vec::new(),
    };
    visited.insert(i, x);
    let mut queue = VecDeque::from([Node {
        chart: i,
        point: x.to_vec(),
        map: AffineMap::identity(n),
        steps: Vec::new(),
        hops: 0,
    }]);
    let mut complete = true;
    while let Some(node) = queue.pop_front() {
        let c = node.chart;
        let en = cache
            .entry(c)
            .or_insert_with(|| groups[c].enumerate_full(budget.word_bound))
            .clone();
        if c == j {
            match orbit_check(&groups[c], &en, &node.point, y, budget.word_bound)? {
                Verdict::Yes(g) => {
                    let map = g.map.compose(&node.map)?;
                    let mut steps = node.steps;
                    if !g.word.is_empty() {
                        steps.push(PathStep::Group { chart: c, element: g });
                    }
                    return Ok(Verdict::Yes(ChartPath { from: i, to: j, map, steps }));
                }
                Verdict::Unknown => complete = false,
                Verdict::No => {}
            }
        }
        let moves = moves_from(transitions, c)?;
        if moves.is_empty() {
            continue;
        }
        if node.hops >= budget.max_hops || !en.saturated {
            complete = false;
        }
        if node.hops >= budget.max_hops {
            continue;
        }
        for g in &en.elements {
            let p = g.map.apply(&node.point)?;
            if !domains[c].contains(&p)? {
                continue;
            }
            for (index, inverse, tmap, target) in &moves {
                if !move_applies(transitions, *index, *inverse, tmap, &p)? {
                    continue;
                }
                let q = tmap.apply(&p)?;
                if !domains[*target].contains(&q)? || !visited.insert(*target, &q) {
                    continue;
                }
                if visited.len() > budget.max_nodes {
                    return Ok(Verdict::Unknown);
                }
                let mut steps = node.steps.clone();
                if !g.word.is_empty() {
                    steps.push(PathStep::Group {
                        chart: c,
                        element: g.clone(),
                    });
                }
                steps.push(PathStep::Transition {
                    index: *index,
                    inverse: *inverse,
                });
                queue.push_back(Node {
                    chart: *target,
                    point: q,
                    map: tmap.compose(&g.map)?.compose(&node.map)?,
                    steps,
                    hops: node.hops + 1,
                });
            }
        }
    }
    Ok(if complete { Verdict::No } else { Verdict::Unknown })
}
