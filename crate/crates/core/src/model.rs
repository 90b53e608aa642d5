//! Open box sets, model quasifolds `V/Γ`, and atlases glued by affine
//! transitions.
//!
//! Open sets are finite unions of open boxes whose endpoints are field
//! elements or ±∞. Membership and containment are decided exactly for exact
//! scalars. Quotient points are represented by representatives in `V`, and
//! comparing two of them is a three-valued orbit question.

use std::fmt;

use thiserror::Error;

use crate::affine::{AffineError, AffineGroup, AffineMap, GroupElement, Point};
use crate::scalar::{Field, ScalarError, Sign};
use crate::search::{self, ChartPath, SearchBudget};
use crate::Verdict;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("empty interval: lower endpoint is not below the upper one")]
    EmptyInterval,
    #[error("point {0} is not in the domain")]
    NotInDomain(String),
    #[error("no chart with index {0}")]
    BadChart(usize),
    #[error("transition {index}: {reason}")]
    BadTransition { index: usize, reason: String },
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, PartialEq)]
pub enum Endpoint<S> {
    NegInf,
    Finite(S),
    PosInf,
}

impl<S: Field> Endpoint<S> {
    /// Sign of `self - other`; infinities compare as usual.
    fn cmp_to(&self, other: &Endpoint<S>) -> Result<Sign, ScalarError> {
        use Endpoint::*;
        Ok(match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Sign::Zero,
            (NegInf, _) | (_, PosInf) => Sign::Negative,
            (PosInf, _) | (_, NegInf) => Sign::Positive,
            (Finite(a), Finite(b)) => a.compare(b)?,
        })
    }

    fn cmp_point(&self, x: &S) -> Result<Sign, ScalarError> {
        self.cmp_to(&Endpoint::Finite(x.clone()))
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Endpoint::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// `a·e + b` for `a ≠ 0`.
    fn affine_image(&self, a: &S, b: &S) -> Result<Endpoint<S>, ScalarError> {
        let neg = a.sign() == Sign::Negative;
        Ok(match self {
            Endpoint::Finite(x) => Endpoint::Finite(a.try_mul(x)?.try_add(b)?),
            Endpoint::NegInf => {
                if neg {
                    Endpoint::PosInf
                } else {
                    Endpoint::NegInf
                }
            }
            Endpoint::PosInf => {
                if neg {
                    Endpoint::NegInf
                } else {
                    Endpoint::PosInf
                }
            }
        })
    }
}

impl<S: fmt::Display> fmt::Display for Endpoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("inf"),
            Endpoint::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for Endpoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("inf"),
            Endpoint::Finite(x) => write!(f, "{x:?}"),
        }
    }
}

/// Open interval `(lo, hi)` with `lo < hi`.
#[derive(Clone, PartialEq, Debug)]
pub struct Interval<S> {
    lo: Endpoint<S>,
    hi: Endpoint<S>,
}

impl<S: Field> Interval<S> {
    pub fn new(lo: Endpoint<S>, hi: Endpoint<S>) -> Result<Self, ModelError> {
        if lo.cmp_to(&hi)? != Sign::Negative {
            return Err(ModelError::EmptyInterval);
        }
        Ok(Interval { lo, hi })
    }

    pub fn finite(lo: S, hi: S) -> Result<Self, ModelError> {
        Interval::new(Endpoint::Finite(lo), Endpoint::Finite(hi))
    }

    pub fn real_line() -> Self {
        Interval {
            lo: Endpoint::NegInf,
            hi: Endpoint::PosInf,
        }
    }

    pub fn lo(&self) -> &Endpoint<S> {
        &self.lo
    }

    pub fn hi(&self) -> &Endpoint<S> {
        &self.hi
    }

    pub fn contains(&self, x: &S) -> Result<bool, ScalarError> {
        Ok(self.lo.cmp_point(x)? == Sign::Negative && self.hi.cmp_point(x)? == Sign::Positive)
    }

    fn contains_interval(&self, other: &Interval<S>) -> Result<bool, ScalarError> {
        Ok(self.lo.cmp_to(&other.lo)? != Sign::Positive && other.hi.cmp_to(&self.hi)? != Sign::Positive)
    }

    pub fn intersect(&self, other: &Interval<S>) -> Result<Option<Interval<S>>, ScalarError> {
        let lo = if self.lo.cmp_to(&other.lo)? == Sign::Negative {
            other.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if self.hi.cmp_to(&other.hi)? == Sign::Positive {
            other.hi.clone()
        } else {
            self.hi.clone()
        };
        Ok(if lo.cmp_to(&hi)? == Sign::Negative {
            Some(Interval { lo, hi })
        } else {
            None
        })
    }

    fn image(&self, a: &S, b: &S) -> Result<Interval<S>, ScalarError> {
        let p = self.lo.affine_image(a, b)?;
        let q = self.hi.affine_image(a, b)?;
        Ok(if a.sign() == Sign::Negative {
            Interval { lo: q, hi: p }
        } else {
            Interval { lo: p, hi: q }
        })
    }
}

/// Product of open intervals.
#[derive(Clone, PartialEq, Debug)]
pub struct OpenBox<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: Field> OpenBox<S> {
    pub fn new(intervals: Vec<Interval<S>>) -> Self {
        OpenBox { intervals }
    }

    pub fn full(n: usize) -> Self {
        OpenBox {
            intervals: vec![Interval::real_line(); n],
        }
    }

    /// One-dimensional box `(lo, hi)`.
    pub fn interval(lo: S, hi: S) -> Result<Self, ModelError> {
        Ok(OpenBox::new(vec![Interval::finite(lo, hi)?]))
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn contains(&self, x: &[S]) -> Result<bool, ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        for (iv, xi) in self.intervals.iter().zip(x) {
            if !iv.contains(xi)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn contains_box(&self, other: &OpenBox<S>) -> Result<bool, ScalarError> {
        for (a, b) in self.intervals.iter().zip(&other.intervals) {
            if !a.contains_interval(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &OpenBox<S>) -> Result<Option<OpenBox<S>>, ScalarError> {
        let mut out = Vec::with_capacity(self.dim());
        for (a, b) in self.intervals.iter().zip(&other.intervals) {
            match a.intersect(b)? {
                Some(iv) => out.push(iv),
                None => return Ok(None),
            }
        }
        Ok(Some(OpenBox { intervals: out }))
    }

    /// Image under a monomial affine map; `None` for other maps.
    pub fn image(&self, f: &AffineMap<S>) -> Result<Option<OpenBox<S>>, ModelError> {
        if f.dim() != self.dim() {
            return Err(ModelError::Dimension {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        if !f.is_monomial() {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(self.dim());
        for (i, row) in f.linear().iter().enumerate() {
            let j = row.iter().position(|a| a.sign() != Sign::Zero).expect("monomial row");
            out.push(self.intervals[j].image(&row[j], &f.offset()[i])?);
        }
        Ok(Some(OpenBox { intervals: out }))
    }

    /// Corner points of the bounded part plus the center, used where exact
    /// images are not available.
    pub fn probe_points(&self) -> Result<Vec<Point<S>>, ScalarError> {
        let mut per_dim: Vec<Vec<S>> = Vec::new();
        for iv in &self.intervals {
            let mut v = Vec::new();
            let two = S::from_i64(2);
            match (&iv.lo, &iv.hi) {
                (Endpoint::Finite(a), Endpoint::Finite(b)) => {
                    v.push(a.clone());
                    v.push(b.clone());
                    v.push(a.try_add(b)?.try_div(&two)?);
                }
                (Endpoint::Finite(a), _) => {
                    v.push(a.clone());
                    v.push(a.try_add(&S::one())?);
                }
                (_, Endpoint::Finite(b)) => {
                    v.push(b.clone());
                    v.push(b.try_sub(&S::one())?);
                }
                _ => v.push(S::zero()),
            }
            per_dim.push(v);
        }
        let mut pts: Vec<Point<S>> = vec![Vec::new()];
        for vals in per_dim {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        Ok(pts)
    }
}

impl<S: Field> fmt::Display for OpenBox<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|iv| format!("({}, {})", iv.lo, iv.hi)).collect();
        f.write_str(&parts.join("×"))
    }
}

/// Finite union of open boxes of a common dimension.
#[derive(Clone, PartialEq, Debug)]
pub struct OpenBoxSet<S> {
    dim: usize,
    boxes: Vec<OpenBox<S>>,
}

impl<S: Field> OpenBoxSet<S> {
    pub fn new(dim: usize, boxes: Vec<OpenBox<S>>) -> Result<Self, ModelError> {
        for b in &boxes {
            if b.dim() != dim {
                return Err(ModelError::Dimension {
                    expected: dim,
                    found: b.dim(),
                });
            }
        }
        Ok(OpenBoxSet { dim, boxes })
    }

    pub fn full(dim: usize) -> Self {
        OpenBoxSet {
            dim,
            boxes: vec![OpenBox::full(dim)],
        }
    }

    pub fn empty(dim: usize) -> Self {
        OpenBoxSet { dim, boxes: Vec::new() }
    }

    pub fn from_box(b: OpenBox<S>) -> Self {
        OpenBoxSet {
            dim: b.dim(),
            boxes: vec![b],
        }
    }

    /// One-dimensional `(lo, hi)`.
    pub fn interval(lo: S, hi: S) -> Result<Self, ModelError> {
        Ok(OpenBoxSet::from_box(OpenBox::interval(lo, hi)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[OpenBox<S>] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, x: &[S]) -> Result<bool, ModelError> {
        if x.len() != self.dim {
            return Err(ModelError::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        for b in &self.boxes {
            if b.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn intersect(&self, other: &OpenBoxSet<S>) -> Result<OpenBoxSet<S>, ModelError> {
        if other.dim != self.dim {
            return Err(ModelError::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                if let Some(c) = a.intersect(b)? {
                    boxes.push(c);
                }
            }
        }
        Ok(OpenBoxSet { dim: self.dim, boxes })
    }

    pub fn union(&self, other: &OpenBoxSet<S>) -> OpenBoxSet<S> {
        let mut boxes = self.boxes.clone();
        boxes.extend(other.boxes.iter().cloned());
        OpenBoxSet { dim: self.dim, boxes }
    }

    /// Image under a monomial affine map; `None` otherwise.
    pub fn image(&self, f: &AffineMap<S>) -> Result<Option<OpenBoxSet<S>>, ModelError> {
        let mut boxes = Vec::new();
        for b in &self.boxes {
            match b.image(f)? {
                Some(i) => boxes.push(i),
                None => return Ok(None),
            }
        }
        Ok(Some(OpenBoxSet { dim: self.dim, boxes }))
    }

    /// Preimage under a monomial affine map; `None` otherwise.
    pub fn preimage(&self, f: &AffineMap<S>) -> Result<Option<OpenBoxSet<S>>, ModelError> {
        if !f.is_monomial() {
            return Ok(None);
        }
        self.image(&f.invert()?)
    }

    /// `None` if `b ⊆ self`, otherwise a point of `b` outside `self`.
    ///
    /// Splits `b` along every endpoint of `self` that falls inside it; each
    /// resulting cell lies entirely inside or outside every box.
    pub fn uncovered_point(&self, b: &OpenBox<S>) -> Result<Option<Point<S>>, ModelError> {
        let mut pieces: Vec<Vec<Piece<S>>> = Vec::new();
        for (k, iv) in b.intervals.iter().enumerate() {
            let mut cuts: Vec<S> = Vec::new();
            for other in &self.boxes {
                let o = &other.intervals[k];
                for e in [&o.lo, &o.hi] {
                    if let Endpoint::Finite(x) = e {
                        if iv.contains(x)? && !cuts.iter().any(|c| c == x) {
                            cuts.push(x.clone());
                        }
                    }
                }
            }
            let mut err = None;
            cuts.sort_by(|a, c| match a.compare(c) {
                Ok(Sign::Negative) => std::cmp::Ordering::Less,
                Ok(Sign::Zero) => std::cmp::Ordering::Equal,
                Ok(Sign::Positive) => std::cmp::Ordering::Greater,
                Err(e) => {
                    err = Some(e);
                    std::cmp::Ordering::Equal
                }
            });
            if let Some(e) = err {
                return Err(e.into());
            }
            let mut ps = Vec::new();
            let mut lo = iv.lo.clone();
            for c in cuts {
                ps.push(Piece::Open(Interval {
                    lo: lo.clone(),
                    hi: Endpoint::Finite(c.clone()),
                }));
                ps.push(Piece::Point(c.clone()));
                lo = Endpoint::Finite(c);
            }
            ps.push(Piece::Open(Interval {
                lo,
                hi: iv.hi.clone(),
            }));
            pieces.push(ps);
        }
        let mut idx = vec![0usize; b.dim()];
        loop {
            let cell: Vec<&Piece<S>> = idx.iter().enumerate().map(|(k, &i)| &pieces[k][i]).collect();
            let mut covered = false;
            for other in &self.boxes {
                let mut inside = true;
                for (k, piece) in cell.iter().enumerate() {
                    if !piece.inside(&other.intervals[k])? {
                        inside = false;
                        break;
                    }
                }
                if inside {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(Some(cell.iter().map(|p| p.representative()).collect::<Result<_, _>>()?));
            }
            // odometer over the cell grid
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(None);
                }
                idx[k] += 1;
                if idx[k] < pieces[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Exact `other ⊆ self`.
    pub fn contains_set(&self, other: &OpenBoxSet<S>) -> Result<bool, ModelError> {
        for b in &other.boxes {
            if self.uncovered_point(b)?.is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Is `f(self) ⊆ target`? Exact for monomial maps; otherwise probes corners
    /// and reports `Unknown` if no probe escapes.
    pub fn maps_into(&self, f: &AffineMap<S>, target: &OpenBoxSet<S>) -> Result<Verdict<()>, ModelError> {
        match self.image(f)? {
            Some(img) => Ok(if target.contains_set(&img)? { Verdict::Yes(()) } else { Verdict::No }),
            None => {
                for b in &self.boxes {
                    for p in b.probe_points()? {
                        if b.contains(&p)? && !target.contains(&f.apply(&p)?)? {
                            return Ok(Verdict::No);
                        }
                    }
                }
                Ok(Verdict::Unknown)
            }
        }
    }
}

impl<S: Field> fmt::Display for OpenBoxSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.boxes.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

enum Piece<S> {
    Open(Interval<S>),
    Point(S),
}

impl<S: Field> Piece<S> {
    fn inside(&self, iv: &Interval<S>) -> Result<bool, ScalarError> {
        match self {
            Piece::Open(p) => iv.contains_interval(p),
            Piece::Point(x) => iv.contains(x),
        }
    }

    fn representative(&self) -> Result<S, ScalarError> {
        match self {
            Piece::Point(x) => Ok(x.clone()),
            Piece::Open(iv) => match (&iv.lo, &iv.hi) {
                (Endpoint::Finite(a), Endpoint::Finite(b)) => a.try_add(b)?.try_div(&S::from_i64(2)),
                (Endpoint::Finite(a), _) => a.try_add(&S::one()),
                (_, Endpoint::Finite(b)) => b.try_sub(&S::one()),
                _ => Ok(S::zero()),
            },
        }
    }
}

/// Outcome of an invariance check of `V` under `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Invariance<S> {
    /// Every generator and inverse maps `V` into `V`, hence so does the group.
    Invariant,
    /// `γ·x ∉ V` for the listed `x ∈ V`.
    CounterexampleFound { element: GroupElement<S>, point: Point<S> },
    Unknown,
}

/// `V/Γ` for an open box set `V` and a finitely generated affine group `Γ`.
/// `V` need not be `Γ`-invariant.
#[derive(Clone, Debug)]
pub struct ModelQuasifold<S> {
    domain: OpenBoxSet<S>,
    group: AffineGroup<S>,
    invariance: Option<Invariance<S>>,
}

impl<S: Field> ModelQuasifold<S> {
    pub fn new(domain: OpenBoxSet<S>, group: AffineGroup<S>) -> Result<Self, ModelError> {
        if domain.dim() != group.dim() {
            return Err(ModelError::Dimension {
                expected: group.dim(),
                found: domain.dim(),
            });
        }
        Ok(ModelQuasifold {
            domain,
            group,
            invariance: None,
        })
    }

    pub fn domain(&self) -> &OpenBoxSet<S> {
        &self.domain
    }

    pub fn group(&self) -> &AffineGroup<S> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Result of the last [`Self::record_invariance`] call.
    pub fn invariance(&self) -> Option<&Invariance<S>> {
        self.invariance.as_ref()
    }

    pub fn record_invariance(&mut self, bound: usize) -> Result<&Invariance<S>, ModelError> {
        let r = self.check_invariance(bound)?;
        self.invariance = Some(r);
        Ok(self.invariance.as_ref().expect("just set"))
    }

    pub fn quotient_point(&self, x: Point<S>) -> Result<OrbitHandle<'_, S>, ModelError> {
        if !self.domain.contains(&x)? {
            return Err(ModelError::NotInDomain(fmt_point(&x)));
        }
        Ok(OrbitHandle { model: self, rep: x })
    }

    /// Checks `γ·V ⊆ V` over the enumerated elements.
    pub fn check_invariance(&self, bound: usize) -> Result<Invariance<S>, ModelError> {
        let mut all_letters_exact = true;
        for e in self.group.enumerate(bound.max(1)) {
            match self.domain.maps_into(&e.map, &self.domain)? {
                Verdict::Yes(()) => {}
                Verdict::No => {
                    let point = self.escaping_point(&e.map)?;
                    return Ok(Invariance::CounterexampleFound { element: e, point });
                }
                Verdict::Unknown => {
                    if e.word.len() <= 1 {
                        all_letters_exact = false;
                    }
                }
            }
        }
        Ok(if all_letters_exact { Invariance::Invariant } else { Invariance::Unknown })
    }

    fn escaping_point(&self, g: &AffineMap<S>) -> Result<Point<S>, ModelError> {
        if let Some(img) = self.domain.image(g)? {
            for b in img.boxes() {
                if let Some(y) = self.domain.uncovered_point(b)? {
                    return Ok(g.invert()?.apply(&y)?);
                }
            }
        }
        for b in self.domain.boxes() {
            for p in b.probe_points()? {
                if b.contains(&p)? && !self.domain.contains(&g.apply(&p)?)? {
                    return Ok(p);
                }
            }
        }
        unreachable!("maps_into reported an escape")
    }

    /// The model over an open subset `U ⊆ V` with the same group.
    pub fn restrict(&self, u: &OpenBoxSet<S>) -> Result<ModelQuasifold<S>, ModelError> {
        ModelQuasifold::new(self.domain.intersect(u)?, self.group.clone())
    }
}

/// A point of `V/Γ`, held by a representative.
#[derive(Clone, Debug)]
pub struct OrbitHandle<'a, S> {
    model: &'a ModelQuasifold<S>,
    rep: Point<S>,
}

impl<S: Field> OrbitHandle<'_, S> {
    pub fn representative(&self) -> &[S] {
        &self.rep
    }

    /// Equal iff the representatives share a `Γ`-orbit; `Unknown` when the
    /// bounded search is inconclusive.
    pub fn compare(&self, other: &OrbitHandle<'_, S>, bound: usize) -> Result<Verdict<GroupElement<S>>, ModelError> {
        Ok(self.model.group.orbit_equal(&self.rep, &other.rep, bound)?)
    }
}

pub(crate) fn fmt_point<S: Field>(x: &[S]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// A chart change `φ: dom → V_to` with `dom ⊆ V_from`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S> {
    pub from: usize,
    pub to: usize,
    pub map: AffineMap<S>,
    pub domain: OpenBoxSet<S>,
}

/// Charts `V_i/Γ_i` glued by affine transitions.
#[derive(Clone, Debug)]
pub struct Atlas<S> {
    charts: Vec<ModelQuasifold<S>>,
    labels: Vec<String>,
    cocycle: Vec<Transition<S>>,
}

impl<S: Field> Atlas<S> {
    pub fn new(charts: Vec<ModelQuasifold<S>>, cocycle: Vec<Transition<S>>) -> Result<Self, ModelError> {
        let labels = (1..=charts.len()).map(|i| format!("chart {i}")).collect();
        Atlas::with_labels(charts, labels, cocycle)
    }

    pub fn with_labels(
        charts: Vec<ModelQuasifold<S>>,
        labels: Vec<String>,
        cocycle: Vec<Transition<S>>,
    ) -> Result<Self, ModelError> {
        for (index, t) in cocycle.iter().enumerate() {
            let bad = |reason: &str| ModelError::BadTransition {
                index,
                reason: reason.to_string(),
            };
            let from = charts.get(t.from).ok_or(ModelError::BadChart(t.from))?;
            let to = charts.get(t.to).ok_or(ModelError::BadChart(t.to))?;
            if t.map.dim() != from.dim() || t.domain.dim() != from.dim() || to.dim() != from.dim() {
                return Err(bad("dimension mismatch"));
            }
            if !from.domain().contains_set(&t.domain)? {
                return Err(bad("domain is not inside the source chart"));
            }
            if t.domain.maps_into(&t.map, to.domain())?.is_no() {
                return Err(bad("image leaves the target chart"));
            }
        }
        Ok(Atlas {
            charts,
            labels,
            cocycle,
        })
    }

    /// Atlas with one chart and no transitions.
    pub fn single(chart: ModelQuasifold<S>) -> Self {
        Atlas {
            charts: vec![chart],
            labels: vec!["chart 1".to_string()],
            cocycle: Vec::new(),
        }
    }

    pub fn charts(&self) -> &[ModelQuasifold<S>] {
        &self.charts
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cocycle(&self) -> &[Transition<S>] {
        &self.cocycle
    }

    pub fn chart(&self, i: usize) -> Result<&ModelQuasifold<S>, ModelError> {
        self.charts.get(i).ok_or(ModelError::BadChart(i))
    }

    pub(crate) fn domains(&self) -> Vec<OpenBoxSet<S>> {
        self.charts.iter().map(|c| c.domain().clone()).collect()
    }

    pub(crate) fn groups(&self) -> Vec<AffineGroup<S>> {
        self.charts.iter().map(|c| c.group().clone()).collect()
    }

    /// The global orbit handle of `x ∈ V_i`.
    pub fn atlas_pi(&self, i: usize, x: Point<S>) -> Result<GlobalHandle<'_, S>, ModelError> {
        let chart = self.chart(i)?;
        if !chart.domain().contains(&x)? {
            return Err(ModelError::NotInDomain(fmt_point(&x)));
        }
        Ok(GlobalHandle {
            atlas: self,
            chart: i,
            rep: x,
        })
    }

    /// Sampled check that composites of declared transitions agree, as germs,
    /// with a declared transition (or a group element) up to group elements of
    /// the target chart.
    pub fn check_cocycle(&self, bound: usize, samples: &[Point<S>]) -> Result<Verdict<()>, ModelError> {
        let mut unknown = false;
        let moves: Vec<(usize, usize, AffineMap<S>, &Transition<S>, bool)> = self
            .cocycle
            .iter()
            .flat_map(|t| {
                let mut v = vec![(t.from, t.to, t.map.clone(), t, false)];
                if let Ok(inv) = t.map.invert() {
                    v.push((t.to, t.from, inv, t, true));
                }
                v
            })
            .collect();
        let in_dom = |m: &(usize, usize, AffineMap<S>, &Transition<S>, bool), p: &[S]| -> Result<bool, ModelError> {
            let (_, _, _, t, inverse) = m;
            if *inverse {
                let q = t.map.invert()?.apply(p)?;
                t.domain.contains(&q)
            } else {
                t.domain.contains(p)
            }
        };
        for first in &moves {
            for second in &moves {
                if first.1 != second.0 {
                    continue;
                }
                let composite = second.2.compose(&first.2)?;
                let (src, dst) = (first.0, second.1);
                for x in samples {
                    if x.len() != composite.dim() || !self.charts[src].domain().contains(x)? || !in_dom(first, x)? {
                        continue;
                    }
                    let mid = first.2.apply(x)?;
                    if !in_dom(second, &mid)? {
                        continue;
                    }
                    let mut candidates = Vec::new();
                    if src == dst {
                        candidates.push(AffineMap::identity(composite.dim()));
                    }
                    for m in &moves {
                        if m.0 == src && m.1 == dst && in_dom(m, x)? {
                            candidates.push(m.2.clone());
                        }
                    }
                    let group = self.charts[dst].group();
                    let mut found = false;
                    for c in &candidates {
                        let eta = composite.compose(&c.invert()?)?;
                        match group.contains(&eta, bound)? {
                            Verdict::Yes(_) => {
                                found = true;
                                break;
                            }
                            Verdict::Unknown => unknown = true,
                            Verdict::No => {}
                        }
                    }
                    if !found && !unknown {
                        return Ok(Verdict::No);
                    }
                }
            }
        }
        Ok(if unknown { Verdict::Unknown } else { Verdict::Yes(()) })
    }
}

/// A point of the global quotient, held as `(chart, representative)`.
#[derive(Clone, Debug)]
pub struct GlobalHandle<'a, S> {
    atlas: &'a Atlas<S>,
    chart: usize,
    rep: Point<S>,
}

impl<S: Field> GlobalHandle<'_, S> {
    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn representative(&self) -> &[S] {
        &self.rep
    }

    /// Equal iff a finite composite of chart-group elements and transitions
    /// carries one representative to the other.
    pub fn compare(&self, other: &GlobalHandle<'_, S>, bound: usize) -> Result<Verdict<ChartPath<S>>, ModelError> {
        self.compare_with(other, SearchBudget::from_bound(bound))
    }

    pub fn compare_with(&self, other: &GlobalHandle<'_, S>, budget: SearchBudget) -> Result<Verdict<ChartPath<S>>, ModelError> {
        let domains = self.atlas.domains();
        let groups = self.atlas.groups();
        search::orbit_search(
            &domains,
            &groups,
            &self.atlas.cocycle,
            (self.chart, &self.rep),
            (other.chart, &other.rep),
            budget,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    fn torus() -> AffineGroup<Scalar> {
        AffineGroup::translations_1d(vec![s("1"), s("sqrt(2)")]).unwrap()
    }

    fn line(a: &str, b: &str) -> AffineMap<Scalar> {
        AffineMap::line(s(a), s(b)).unwrap()
    }

    fn iv(a: &str, b: &str) -> OpenBoxSet<Scalar> {
        OpenBoxSet::interval(s(a), s(b)).unwrap()
    }

    #[test]
    fn interval_validation_and_membership() {
        assert_eq!(Interval::finite(s("1"), s("1")).unwrap_err(), ModelError::EmptyInterval);
        let v = iv("0", "sqrt(2)");
        assert!(v.contains(&[s("7/5")]).unwrap());
        assert!(!v.contains(&[s("3/2")]).unwrap());
        assert!(!v.contains(&[s("0")]).unwrap());
    }

    #[test]
    fn exact_containment_of_unions() {
        let u = iv("0", "1").union(&iv("1/2", "2"));
        assert!(u.contains_set(&iv("1/4", "3/2")).unwrap());
        // the gap point 1 is covered by the second box
        let gap = iv("0", "1").union(&iv("1", "2"));
        assert_eq!(gap.uncovered_point(&OpenBox::interval(s("1/2"), s("3/2")).unwrap()).unwrap(), Some(vec![s("1")]));
        let square = OpenBoxSet::new(
            2,
            vec![OpenBox::new(vec![Interval::finite(s("0"), s("2")).unwrap(), Interval::finite(s("0"), s("1")).unwrap()])],
        )
        .unwrap();
        let tall = OpenBox::new(vec![Interval::finite(s("0"), s("1")).unwrap(), Interval::finite(s("0"), s("2")).unwrap()]);
        let p = square.uncovered_point(&tall).unwrap().unwrap();
        assert!(tall.contains(&p).unwrap() && !square.contains(&p).unwrap());
    }

    #[test]
    fn quotient_points() {
        let m = ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        let x = m.quotient_point(vec![s("3/10")]).unwrap();
        let y = m.quotient_point(vec![s("3/10+(1-sqrt(2))")]).unwrap();
        assert!(x.compare(&y, 6).unwrap().is_yes());
        assert!(x.compare(&x.clone(), 0).unwrap().is_yes());
        let a = m.quotient_point(vec![s("0")]).unwrap();
        let b = m.quotient_point(vec![s("1/3")]).unwrap();
        assert!(a.compare(&b, 6).unwrap().is_no());
        let small = ModelQuasifold::new(iv("0", "1"), torus()).unwrap();
        assert!(matches!(small.quotient_point(vec![s("2")]), Err(ModelError::NotInDomain(_))));
    }

    #[test]
    fn invariance_examples() {
        let whole = ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        assert_eq!(whole.check_invariance(3).unwrap(), Invariance::Invariant);
        let shift = AffineGroup::new(1, vec![line("1", "1")]).unwrap();
        let unit = ModelQuasifold::new(iv("0", "1"), shift).unwrap();
        match unit.check_invariance(3).unwrap() {
            Invariance::CounterexampleFound { element, point } => {
                assert_eq!(element.map, line("1", "1"));
                assert_eq!(point, vec![s("1/2")]);
            }
            other => panic!("{other:?}"),
        }
        let refl = AffineGroup::new(1, vec![line("-1", "0")]).unwrap();
        let sym = ModelQuasifold::new(iv("-1", "1"), refl).unwrap();
        assert_eq!(sym.check_invariance(2).unwrap(), Invariance::Invariant);
    }

    #[test]
    fn non_monomial_invariance_is_unknown_or_counterexample() {
        let shear = AffineMap::new(
            vec![vec![s("1"), s("1")], vec![s("0"), s("1")]],
            vec![s("0"), s("0")],
        )
        .unwrap();
        let g = AffineGroup::new(2, vec![shear]).unwrap();
        let m = ModelQuasifold::new(OpenBoxSet::full(2), g.clone()).unwrap();
        assert_eq!(m.check_invariance(1).unwrap(), Invariance::Unknown);
        let unit_square = OpenBoxSet::from_box(OpenBox::new(vec![
            Interval::finite(s("0"), s("1")).unwrap(),
            Interval::finite(s("0"), s("1")).unwrap(),
        ]));
        let m2 = ModelQuasifold::new(unit_square, g).unwrap();
        assert!(matches!(m2.check_invariance(1).unwrap(), Invariance::CounterexampleFound { .. }));
    }

    fn two_chart(shift: &str, g1: AffineGroup<Scalar>) -> Atlas<Scalar> {
        let c1 = ModelQuasifold::new(OpenBoxSet::full(1), g1).unwrap();
        let c2 = ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        Atlas::new(
            vec![c1, c2],
            vec![Transition {
                from: 0,
                to: 1,
                map: line("1", shift),
                domain: OpenBoxSet::full(1),
            }],
        )
        .unwrap()
    }

    #[test]
    fn atlas_pi_examples() {
        let single = Atlas::single(ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap());
        let a = single.atlas_pi(0, vec![s("0")]).unwrap();
        let b = single.atlas_pi(0, vec![s("1+sqrt(2)")]).unwrap();
        let c = single.atlas_pi(0, vec![s("1/3")]).unwrap();
        assert!(a.compare(&b, 3).unwrap().is_yes());
        assert!(a.compare(&c, 3).unwrap().is_no());

        let glued = two_chart("0", torus());
        let p = glued.atlas_pi(0, vec![s("2/7")]).unwrap();
        let q = glued.atlas_pi(1, vec![s("2/7")]).unwrap();
        assert!(p.compare(&q, 2).unwrap().is_yes());

        let shifted = two_chart("1", AffineGroup::trivial(1));
        let p = shifted.atlas_pi(0, vec![s("0")]).unwrap();
        let q = shifted.atlas_pi(1, vec![s("sqrt(2)")]).unwrap();
        match p.compare(&q, 2).unwrap() {
            Verdict::Yes(path) => {
                assert_eq!(path.map, line("1", "sqrt(2)"));
                assert_eq!(path.map.apply(&[s("0")]).unwrap(), vec![s("sqrt(2)")]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(shifted.atlas_pi(3, vec![s("0")]), Err(ModelError::BadChart(3))));
    }

    #[test]
    fn atlas_rejects_bad_transitions() {
        let c1 = ModelQuasifold::new(iv("0", "1"), torus()).unwrap();
        let c2 = ModelQuasifold::new(iv("0", "1"), torus()).unwrap();
        let err = Atlas::new(
            vec![c1.clone(), c2.clone()],
            vec![Transition {
                from: 0,
                to: 1,
                map: line("1", "1/2"),
                domain: iv("0", "1"),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::BadTransition { index: 0, .. }));
        assert!(Atlas::new(
            vec![c1, c2],
            vec![Transition {
                from: 0,
                to: 1,
                map: line("1", "1/2"),
                domain: iv("0", "1/2"),
            }],
        )
        .is_ok());
    }

    #[test]
    fn cocycle_closure() {
        let glued = two_chart("0", torus());
        let samples: Vec<Point<Scalar>> = ["0", "1/3", "-5/2"].iter().map(|t| vec![s(t)]).collect();
        assert!(glued.check_cocycle(3, &samples).unwrap().is_yes());
        // a 1 → 2 → 1 loop through two declared transitions that differ by a
        // non-lattice translation fails closure
        let c = || ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        let bad = Atlas::new(
            vec![c(), c()],
            vec![
                Transition { from: 0, to: 1, map: line("1", "0"), domain: OpenBoxSet::full(1) },
                Transition { from: 0, to: 1, map: line("1", "1/3"), domain: OpenBoxSet::full(1) },
            ],
        )
        .unwrap();
        assert!(bad.check_cocycle(3, &samples).unwrap().is_no());
    }

    #[test]
    fn restricted_model_agrees_on_subbox() {
        let m = ModelQuasifold::new(OpenBoxSet::full(1), torus()).unwrap();
        let u = iv("0", "1");
        let r = m.restrict(&u).unwrap();
        let pts = ["1/10", "1/10+sqrt(2)-1", "1/2", "2-sqrt(2)", "1/3"];
        for a in pts {
            for b in pts {
                let full = m.quotient_point(vec![s(a)]).unwrap().compare(&m.quotient_point(vec![s(b)]).unwrap(), 4).unwrap();
                let sub = r.quotient_point(vec![s(a)]).unwrap().compare(&r.quotient_point(vec![s(b)]).unwrap(), 4).unwrap();
                assert_eq!(full.decided(), sub.decided(), "{a} vs {b}");
            }
        }
    }
}
