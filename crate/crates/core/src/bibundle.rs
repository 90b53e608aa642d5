//! Bibundles between affine étale groupoids, presented by affine local lifts.
//!
//! A [`LiftFamily`] from `G` to `H` is a finite list of affine maps `ψ`, each
//! defined on an open box set of `G`'s base, sending `G`-arrows to `H`-arrows
//! by conjugation. The family stands for the bibundle whose germs are the
//! `H`-translates of the lifts; in the effective affine class such a family
//! determines the bibundle up to isomorphism, and equality of induced orbit
//! maps is equivalent to isomorphism. All checks on infinite data (arrow
//! sets, orbit saturation) are bounded and three-valued.

use crate::affine::{AffineMap, Point};
use crate::groupoid::{EtaleGroupoid, GroupoidError};
use crate::model::{fmt_point, Endpoint, Interval, ModelError, OpenBox, OpenBoxSet};
use crate::sampling::{Sampler, DEFAULT_SAMPLES};
use crate::scalar::{Field, Sign};
use crate::search::SearchBudget;
use crate::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BibundleError {
    #[error("lift {index}: {reason}")]
    BadLift { index: usize, reason: String },
    #[error("groupoids do not match: {0}")]
    Mismatch(String),
    #[error("functor is not compatible with arrows: {0}")]
    Incompatible(String),
    #[error("operation needs monomial (axis-permuting) lifts")]
    NonMonomial,
    #[error("{0}")]
    ClassPrecondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

impl From<crate::affine::AffineError> for BibundleError {
    fn from(e: crate::affine::AffineError) -> Self {
        BibundleError::Model(e.into())
    }
}

/// Declared class of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BibundleClass {
    Plain,
    LocallyInvertible,
    Invertible,
}

impl BibundleClass {
    pub fn name(self) -> &'static str {
        match self {
            BibundleClass::Plain => "plain",
            BibundleClass::LocallyInvertible => "locally_invertible",
            BibundleClass::Invertible => "invertible",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "plain" => Some(BibundleClass::Plain),
            "locally_invertible" | "locallyinvertible" => Some(BibundleClass::LocallyInvertible),
            "invertible" => Some(BibundleClass::Invertible),
            _ => None,
        }
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Invertible,
    LocallyInvertible,
    Plain,
    Unknown,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Invertible => "invertible",
            Classification::LocallyInvertible => "locally_invertible",
            Classification::Plain => "plain",
            Classification::Unknown => "unknown",
        }
    }
}

/// Sampling and search limits shared by the checks in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub bound: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            bound: 6,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

impl CheckConfig {
    fn budget(&self) -> SearchBudget {
        SearchBudget::from_bound(self.bound)
    }
}

/// One affine local lift `ψ: dom → H_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift<S> {
    pub src_chart: usize,
    pub tgt_chart: usize,
    pub dom: OpenBoxSet<S>,
    pub map: AffineMap<S>,
}

impl<S: Field> Lift<S> {
    /// A lift on chart 0 of both groupoids.
    pub fn new(dom: OpenBoxSet<S>, map: AffineMap<S>) -> Self {
        Lift {
            src_chart: 0,
            tgt_chart: 0,
            dom,
            map,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftFamily<S> {
    source: EtaleGroupoid<S>,
    target: EtaleGroupoid<S>,
    lifts: Vec<Lift<S>>,
    class: BibundleClass,
}

impl<S: Field> LiftFamily<S> {
    /// Validates chart indices, dimensions, invertibility of every lift and
    /// that lift images stay in the target charts.
    pub fn new(
        source: EtaleGroupoid<S>,
        target: EtaleGroupoid<S>,
        lifts: Vec<Lift<S>>,
        class: BibundleClass,
    ) -> Result<Self, BibundleError> {
        if source.dim() != target.dim() {
            return Err(BibundleError::Mismatch(format!(
                "source dimension {} against target dimension {}",
                source.dim(),
                target.dim()
            )));
        }
        for (index, l) in lifts.iter().enumerate() {
            let bad = |reason: String| BibundleError::BadLift { index, reason };
            let from = source.chart_base(l.src_chart).map_err(|e| bad(e.to_string()))?;
            let to = target.chart_base(l.tgt_chart).map_err(|e| bad(e.to_string()))?;
            if l.map.dim() != source.dim() || l.dom.dim() != source.dim() {
                return Err(bad("dimension mismatch".into()));
            }
            if l.map.determinant()?.sign() == Sign::Zero {
                return Err(bad("singular linear part".into()));
            }
            if !from.contains_set(&l.dom)? {
                return Err(bad("domain is not inside the source base".into()));
            }
            if l.dom.maps_into(&l.map, to)?.is_no() {
                return Err(bad("image leaves the target base".into()));
            }
        }
        Ok(LiftFamily {
            source,
            target,
            lifts,
            class,
        })
    }

    pub fn source(&self) -> &EtaleGroupoid<S> {
        &self.source
    }

    pub fn target(&self) -> &EtaleGroupoid<S> {
        &self.target
    }

    pub fn lifts(&self) -> &[Lift<S>] {
        &self.lifts
    }

    pub fn class(&self) -> BibundleClass {
        self.class
    }

    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }

    pub fn with_class(mut self, class: BibundleClass) -> Self {
        self.class = class;
        self
    }

    pub fn orbit_map(&self) -> OrbitMap<'_, S> {
        OrbitMap { family: self }
    }

    /// The family of inverse lifts `ψ⁻¹: ψ(dom) → G_0`; needs monomial lifts.
    pub fn inverse(&self) -> Result<LiftFamily<S>, BibundleError> {
        let mut lifts = Vec::new();
        for l in &self.lifts {
            let dom = l.dom.image(&l.map)?.ok_or(BibundleError::NonMonomial)?;
            lifts.push(Lift {
                src_chart: l.tgt_chart,
                tgt_chart: l.src_chart,
                dom,
                map: l.map.invert()?,
            });
        }
        Ok(LiftFamily {
            source: self.target.clone(),
            target: self.source.clone(),
            lifts,
            class: self.class,
        })
    }

    /// The first lift defined at `(chart, x)`.
    pub fn lift_at(&self, chart: usize, x: &[S]) -> Result<Option<&Lift<S>>, BibundleError> {
        for l in &self.lifts {
            if l.src_chart == chart && l.dom.contains(x)? {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }
}

/// `[x] ↦ [ψ(x)]` for any lift `ψ` defined at some translate of `x`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitMap<'a, S> {
    family: &'a LiftFamily<S>,
}

/// A point `(chart, x)` of a groupoid base.
pub type BasePoint<S> = (usize, Point<S>);

impl<S: Field> OrbitMap<'_, S> {
    /// Image of the orbit of `(chart, x)`, as a representative in the
    /// target. `No` means the orbit provably misses every lift domain.
    pub fn evaluate(&self, chart: usize, x: &[S], bound: usize) -> Result<Verdict<BasePoint<S>>, BibundleError> {
        let fam = self.family;
        if !fam.source.chart_base(chart)?.contains(x)? {
            return Err(ModelError::NotInDomain(fmt_point(x)).into());
        }
        if let Some(l) = fam.lift_at(chart, x)? {
            return Ok(Verdict::Yes((l.tgt_chart, l.map.apply(x)?)));
        }
        let set = fam.source.arrows_at(chart, x, SearchBudget::from_bound(bound))?;
        for a in &set.arrows {
            let y = a.arrow.target()?;
            if let Some(l) = fam.lift_at(a.arrow.tgt_chart(), &y)? {
                return Ok(Verdict::Yes((l.tgt_chart, l.map.apply(&y)?)));
            }
        }
        Ok(if set.complete { Verdict::No } else { Verdict::Unknown })
    }

    /// Do the images of two source points agree? `Unknown` if either image
    /// or the comparison is undecided.
    pub fn same_image(&self, a: &BasePoint<S>, b: &BasePoint<S>, bound: usize) -> Result<Verdict<()>, BibundleError> {
        let (Verdict::Yes(fa), Verdict::Yes(fb)) = (self.evaluate(a.0, &a.1, bound)?, self.evaluate(b.0, &b.1, bound)?) else {
            return Ok(Verdict::Unknown);
        };
        Ok(self
            .family
            .target
            .orbit_equal((fa.0, &fa.1), (fb.0, &fb.1), SearchBudget::from_bound(bound))?
            .decided())
    }
}

/// Lifts `id` on every chart.
pub fn identity_bibundle<S: Field>(g: &EtaleGroupoid<S>) -> LiftFamily<S> {
    let lifts = (0..g.chart_count())
        .map(|i| Lift {
            src_chart: i,
            tgt_chart: i,
            dom: g.chart_base(i).expect("chart index in range").clone(),
            map: AffineMap::identity(g.dim()),
        })
        .collect();
    LiftFamily {
        source: g.clone(),
        target: g.clone(),
        lifts,
        class: BibundleClass::Invertible,
    }
}

/// Points of `set` used by the sampled checks: deterministic random points
/// plus the probe points (center, finite corners) that lie inside.
fn sample_set<S: Field>(set: &OpenBoxSet<S>, count: usize, sampler: &mut Sampler) -> Result<Vec<Point<S>>, ModelError> {
    let mut pts = Vec::new();
    for b in set.boxes() {
        for p in b.probe_points()? {
            if b.contains(&p)? {
                pts.push(p);
            }
        }
    }
    pts.extend(sampler.points_in_set(set, count)?);
    Ok(pts)
}

/// Source points of the lifts, as `(lift index, point)`.
fn lift_samples<S: Field>(fam: &LiftFamily<S>, cfg: &CheckConfig) -> Result<Vec<(usize, Point<S>)>, ModelError> {
    let mut sampler = Sampler::new(cfg.seed);
    let mut out = Vec::new();
    for (k, l) in fam.lifts.iter().enumerate() {
        for p in sample_set(&l.dom, cfg.samples, &mut sampler)? {
            out.push((k, p));
        }
    }
    Ok(out)
}

fn merge(acc: &mut Verdict<()>, v: Verdict<()>) {
    match (&*acc, v) {
        (Verdict::No, _) => {}
        (_, Verdict::No) => *acc = Verdict::No,
        (_, Verdict::Unknown) => *acc = Verdict::Unknown,
        _ => {}
    }
}

/// `ψ' ∘ g ∘ ψ⁻¹` is an `H`-arrow for every sampled `G`-arrow `g` at `x`
/// that lands where the family `into` has a lift `ψ'`. With `window`, only
/// arrows whose target stays in that set are checked.
fn conjugation_check<S: Field>(
    from: &EtaleGroupoid<S>,
    to: &EtaleGroupoid<S>,
    lift: &Lift<S>,
    into: &[Lift<S>],
    x: &[S],
    window: Option<&OpenBoxSet<S>>,
    budget: SearchBudget,
) -> Result<(Verdict<()>, Option<String>), BibundleError> {
    let inv = lift.map.invert()?;
    let y = lift.map.apply(x)?;
    let mut acc = Verdict::Yes(());
    for a in from.arrows_at(lift.src_chart, x, budget)?.arrows {
        let gx = a.arrow.target()?;
        if let Some(w) = window {
            if !w.contains(&gx)? {
                continue;
            }
        }
        for other in into {
            if other.src_chart != a.arrow.tgt_chart() || !other.dom.contains(&gx)? {
                continue;
            }
            let eta = other.map.compose(a.arrow.map())?.compose(&inv)?;
            let v = to.contains_germ((lift.tgt_chart, &y), other.tgt_chart, &eta, budget)?;
            if v.is_no() {
                let why = format!(
                    "arrow {} at {} maps to {}, which is not an arrow at {}",
                    a.arrow.map(),
                    fmt_point(x),
                    eta,
                    fmt_point(&y)
                );
                return Ok((Verdict::No, Some(why)));
            }
            merge(&mut acc, v);
            break;
        }
    }
    Ok((acc, None))
}

/// The bibundle `⟨F⟩` of a functor given by its base maps. Arrows act by
/// conjugation; compatibility is checked on sampled arrows.
pub fn from_functor<S: Field>(
    source: EtaleGroupoid<S>,
    target: EtaleGroupoid<S>,
    base_maps: Vec<Lift<S>>,
    cfg: &CheckConfig,
) -> Result<LiftFamily<S>, BibundleError> {
    let mut fam = LiftFamily::new(source, target, base_maps, BibundleClass::Plain)?;
    let budget = cfg.budget();
    let mut local = Verdict::Yes(());
    for (k, x) in lift_samples(&fam, cfg)? {
        let lift = &fam.lifts[k];
        if let (Verdict::No, Some(why)) = conjugation_check(&fam.source, &fam.target, lift, &fam.lifts, &x, None, budget)? {
            return Err(BibundleError::Incompatible(why));
        }
        // every H-arrow between points of ψ(dom) must come from a G-arrow
        let back = Lift {
            src_chart: lift.tgt_chart,
            tgt_chart: lift.src_chart,
            dom: OpenBoxSet::full(fam.source.dim()),
            map: lift.map.invert()?,
        };
        let y = lift.map.apply(&x)?;
        let (v, _) = pullback_check(&fam.target, &fam.source, &back, lift, &y, budget)?;
        merge(&mut local, v);
    }
    fam.class = if local.is_no() {
        BibundleClass::Plain
    } else {
        BibundleClass::LocallyInvertible
    };
    Ok(fam)
}

/// For `H`-arrows `η` at `y = ψ(x)` whose target is again `ψ` of a point of
/// `ψ`'s domain, is `ψ⁻¹ ∘ η ∘ ψ` a `G`-arrow?
fn pullback_check<S: Field>(
    h: &EtaleGroupoid<S>,
    g: &EtaleGroupoid<S>,
    back: &Lift<S>,
    lift: &Lift<S>,
    y: &[S],
    budget: SearchBudget,
) -> Result<(Verdict<()>, Option<String>), BibundleError> {
    let x = back.map.apply(y)?;
    let mut acc = Verdict::Yes(());
    for a in h.arrows_at(lift.tgt_chart, y, budget)?.arrows {
        if a.arrow.tgt_chart() != lift.tgt_chart {
            continue;
        }
        let z = back.map.apply(&a.arrow.target()?)?;
        if !lift.dom.contains(&z)? {
            continue;
        }
        let pulled = back.map.compose(a.arrow.map())?.compose(&lift.map)?;
        let v = g.contains_germ((lift.src_chart, &x), lift.src_chart, &pulled, budget)?;
        if v.is_no() {
            return Ok((Verdict::No, Some(format!("arrow {} at {} has no preimage", a.arrow.map(), fmt_point(y)))));
        }
        merge(&mut acc, v);
    }
    Ok((acc, None))
}

/// Candidate `H`-arrows `η` from chart `a` to chart `b`, as `(map, set of
/// points of chart a where η applies)`.
fn aligning_arrows<S: Field>(
    h: &EtaleGroupoid<S>,
    a: usize,
    b: usize,
    bound: usize,
) -> Result<Vec<(AffineMap<S>, OpenBoxSet<S>)>, BibundleError> {
    let mut out = Vec::new();
    let va = h.chart_base(a)?;
    if a == b {
        for e in h.chart_group(a)?.enumerate(bound) {
            let Some(back) = va.preimage(&e.map)? else {
                return Err(BibundleError::NonMonomial);
            };
            out.push((e.map, va.intersect(&back)?));
        }
    }
    if let EtaleGroupoid::Germ(p) = h {
        for t in p.transitions() {
            if t.from == a && t.to == b {
                out.push((t.map.clone(), t.domain.clone()));
            }
            if t.to == a && t.from == b {
                let img = t.domain.image(&t.map)?.ok_or(BibundleError::NonMonomial)?;
                out.push((t.map.invert()?, img));
            }
        }
    }
    Ok(out)
}

/// `Q ∘ P`: all composites `q ∘ η ∘ p` on the exact boxes where they are
/// defined, skipping composites whose domain is already covered by earlier
/// ones from the same `p`.
pub fn compose<S: Field>(p: &LiftFamily<S>, q: &LiftFamily<S>, bound: usize) -> Result<LiftFamily<S>, BibundleError> {
    if p.target != q.source {
        return Err(BibundleError::Mismatch("target of the first family is not the source of the second".into()));
    }
    let mut lifts = Vec::new();
    for pl in &p.lifts {
        let mut covered = OpenBoxSet::empty(pl.dom.dim());
        for ql in &q.lifts {
            for (eta, applies) in aligning_arrows(&p.target, pl.tgt_chart, ql.src_chart, bound)? {
                let reach = applies.intersect(&ql.dom.preimage(&eta)?.ok_or(BibundleError::NonMonomial)?)?;
                let back = reach.preimage(&pl.map)?.ok_or(BibundleError::NonMonomial)?;
                let dom = pl.dom.intersect(&back)?;
                if dom.is_empty() || covered.contains_set(&dom)? {
                    continue;
                }
                covered = covered.union(&dom);
                lifts.push(Lift {
                    src_chart: pl.src_chart,
                    tgt_chart: ql.tgt_chart,
                    dom,
                    map: ql.map.compose(&eta)?.compose(&pl.map)?,
                });
            }
        }
    }
    let class = p.class.min(q.class);
    Ok(LiftFamily {
        source: p.source.clone(),
        target: q.target.clone(),
        lifts,
        class,
    })
}

/// `P|_U^V` from `G|_U` to `H|_V`.
pub fn restrict<S: Field>(p: &LiftFamily<S>, u: &OpenBoxSet<S>, v: &OpenBoxSet<S>) -> Result<LiftFamily<S>, BibundleError> {
    let mut lifts = Vec::new();
    for l in &p.lifts {
        let back = v.preimage(&l.map)?.ok_or(BibundleError::NonMonomial)?;
        let dom = l.dom.intersect(u)?.intersect(&back)?;
        if !dom.is_empty() {
            lifts.push(Lift { dom, ..l.clone() });
        }
    }
    Ok(LiftFamily {
        source: p.source.restrict(u)?,
        target: p.target.restrict(v)?,
        lifts,
        class: p.class,
    })
}

/// The inclusion `G|_U → G` as a bibundle `⟨ι_U⟩`.
pub fn inclusion<S: Field>(g: &EtaleGroupoid<S>, u: &OpenBoxSet<S>) -> Result<LiftFamily<S>, BibundleError> {
    let small = g.restrict(u)?;
    let lifts = (0..small.chart_count())
        .filter_map(|i| {
            let dom = small.chart_base(i).ok()?.clone();
            (!dom.is_empty()).then(|| Lift {
                src_chart: i,
                tgt_chart: i,
                dom,
                map: AffineMap::identity(g.dim()),
            })
        })
        .collect();
    LiftFamily::new(small, g.clone(), lifts, BibundleClass::LocallyInvertible)
}

/// Counts from comparing two orbit maps on sampled source points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Agreement {
    pub sampled: usize,
    /// Points where both sides and their comparison were decided.
    pub decided: usize,
    pub disagreed: usize,
}

impl Agreement {
    /// `No` on any disagreement, `Unknown` if nothing was decided.
    pub fn verdict(&self) -> Verdict<()> {
        if self.disagreed > 0 {
            Verdict::No
        } else if self.decided == 0 {
            Verdict::Unknown
        } else {
            Verdict::Yes(())
        }
    }
}

fn tally<S: Field>(
    target: &EtaleGroupoid<S>,
    points: &[BasePoint<S>],
    bound: usize,
    lhs: impl Fn(usize, &[S]) -> Result<Verdict<BasePoint<S>>, BibundleError>,
    rhs: impl Fn(usize, &[S]) -> Result<Verdict<BasePoint<S>>, BibundleError>,
) -> Result<Agreement, BibundleError> {
    let mut t = Agreement::default();
    for (i, x) in points {
        t.sampled += 1;
        let same = match (lhs(*i, x)?, rhs(*i, x)?) {
            (Verdict::No, Verdict::No) => Verdict::Yes(()),
            (Verdict::Yes(_), Verdict::No) | (Verdict::No, Verdict::Yes(_)) => Verdict::No,
            (Verdict::Yes(a), Verdict::Yes(b)) => target
                .orbit_equal((a.0, &a.1), (b.0, &b.1), SearchBudget::from_bound(bound))?
                .decided(),
            _ => Verdict::Unknown,
        };
        match same {
            Verdict::Yes(()) => t.decided += 1,
            Verdict::No => {
                t.decided += 1;
                t.disagreed += 1;
            }
            Verdict::Unknown => {}
        }
    }
    Ok(t)
}

fn base_samples<S: Field>(g: &EtaleGroupoid<S>, cfg: &CheckConfig) -> Result<Vec<BasePoint<S>>, ModelError> {
    let mut sampler = Sampler::new(cfg.seed);
    let mut out = Vec::new();
    for i in 0..g.chart_count() {
        for x in sample_set(g.chart_base(i)?, cfg.samples, &mut sampler)? {
            out.push((i, x));
        }
    }
    Ok(out)
}

/// `|Q ∘ P| = |Q| ∘ |P|` on sampled source points, given the composite.
pub fn functoriality_check<S: Field>(
    p: &LiftFamily<S>,
    q: &LiftFamily<S>,
    qp: &LiftFamily<S>,
    cfg: &CheckConfig,
) -> Result<Agreement, BibundleError> {
    let points = base_samples(&p.source, cfg)?;
    let (fp, fq, fqp) = (p.orbit_map(), q.orbit_map(), qp.orbit_map());
    tally(
        &q.target,
        &points,
        cfg.bound,
        |i, x| fqp.evaluate(i, x, cfg.bound),
        |i, x| match fp.evaluate(i, x, cfg.bound)? {
            Verdict::Yes((j, y)) => fq.evaluate(j, &y, cfg.bound),
            other => Ok(other),
        },
    )
}

/// The square `|⟨ι_V⟩| ∘ |P|_U^V| = |P| ∘ |⟨ι_U⟩|` on sampled points of `U`.
pub fn restriction_square<S: Field>(
    p: &LiftFamily<S>,
    u: &OpenBoxSet<S>,
    v: &OpenBoxSet<S>,
    cfg: &CheckConfig,
) -> Result<Agreement, BibundleError> {
    let left = compose(&restrict(p, u, v)?, &inclusion(&p.target, v)?, cfg.bound)?;
    let right = compose(&inclusion(&p.source, u)?, p, cfg.bound)?;
    let points = base_samples(left.source(), cfg)?;
    let (fl, fr) = (left.orbit_map(), right.orbit_map());
    tally(
        &p.target,
        &points,
        cfg.bound,
        |i, x| fl.evaluate(i, x, cfg.bound),
        |i, x| fr.evaluate(i, x, cfg.bound),
    )
}

/// Result of [`classify`], with the two ingredients reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: Classification,
    /// Conjugation by each lift is a local isomorphism at every sample.
    pub local: Verdict<()>,
    /// Lift domains meet every sampled orbit, both ways.
    pub saturation: Verdict<()>,
    pub note: Option<String>,
}

/// Small box around `x` inside the box of `dom` that contains it.
fn local_window<S: Field>(dom: &OpenBoxSet<S>, x: &[S]) -> Result<OpenBoxSet<S>, ModelError> {
    let half = S::from_rational(&num_rational::BigRational::new(1.into(), 2.into()));
    let mut ivs = Vec::new();
    for c in x {
        ivs.push(Interval::new(
            Endpoint::Finite(c.try_sub(&half)?),
            Endpoint::Finite(c.try_add(&half)?),
        )?);
    }
    let cube = OpenBoxSet::from_box(OpenBox::new(ivs));
    for b in dom.boxes() {
        if b.contains(x)? {
            return OpenBoxSet::from_box(b.clone()).intersect(&cube);
        }
    }
    Err(ModelError::NotInDomain(fmt_point(x)))
}

fn saturation<S: Field>(fam: &LiftFamily<S>, cfg: &CheckConfig, sampler: &mut Sampler) -> Result<Verdict<()>, BibundleError> {
    let mut acc = Verdict::Yes(());
    let om = fam.orbit_map();
    for i in 0..fam.source.chart_count() {
        for x in sample_set(fam.source.chart_base(i)?, cfg.samples, sampler)? {
            merge(&mut acc, om.evaluate(i, &x, cfg.bound)?.decided());
            if acc.is_no() {
                return Ok(acc);
            }
        }
    }
    Ok(acc)
}

/// Local invertibility by conjugation on small windows, and invertibility by
/// bounded orbit saturation in both directions.
pub fn classify<S: Field>(p: &LiftFamily<S>, cfg: &CheckConfig) -> Result<ClassReport, BibundleError> {
    let budget = cfg.budget();
    let mut local = Verdict::Yes(());
    let mut note = None;
    for (k, x) in lift_samples(p, cfg)? {
        let lift = &p.lifts[k];
        let window = local_window(&lift.dom, &x)?;
        let (fwd, why) = conjugation_check(&p.source, &p.target, lift, std::slice::from_ref(lift), &x, Some(&window), budget)?;
        merge(&mut local, fwd);
        note = note.or(why);
        let back = Lift {
            src_chart: lift.tgt_chart,
            tgt_chart: lift.src_chart,
            dom: OpenBoxSet::full(p.source.dim()),
            map: lift.map.invert()?,
        };
        let windowed = Lift {
            dom: window,
            ..lift.clone()
        };
        let (bwd, why) = pullback_check(&p.target, &p.source, &back, &windowed, &lift.map.apply(&x)?, budget)?;
        merge(&mut local, bwd);
        note = note.or(why);
        if local.is_no() {
            break;
        }
    }
    let mut sat = Verdict::Yes(());
    if local.is_yes() {
        let mut sampler = Sampler::new(cfg.seed ^ 0x5a5a);
        merge(&mut sat, saturation(p, cfg, &mut sampler)?);
        match p.inverse() {
            Ok(inv) => merge(&mut sat, saturation(&inv, cfg, &mut sampler)?),
            Err(BibundleError::NonMonomial) => merge(&mut sat, Verdict::Unknown),
            Err(e) => return Err(e),
        }
    } else {
        sat = Verdict::Unknown;
    }
    let class = match (&local, &sat) {
        (Verdict::No, _) => Classification::Plain,
        (Verdict::Unknown, _) => Classification::Unknown,
        (Verdict::Yes(()), Verdict::Yes(())) => Classification::Invertible,
        (Verdict::Yes(()), Verdict::No) => Classification::LocallyInvertible,
        (Verdict::Yes(()), Verdict::Unknown) => Classification::Unknown,
    };
    Ok(ClassReport {
        class,
        local,
        saturation: sat,
        note,
    })
}

/// A source orbit on which two orbit maps provably differ.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitWitness<S> {
    pub point: BasePoint<S>,
    pub first: BasePoint<S>,
    pub second: BasePoint<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IsoOutcome<S> {
    Yes,
    No(OrbitWitness<S>),
    Unknown,
}

impl<S> IsoOutcome<S> {
    pub fn label(&self) -> &'static str {
        match self {
            IsoOutcome::Yes => "yes",
            IsoOutcome::No(_) => "no",
            IsoOutcome::Unknown => "unknown",
        }
    }
}

/// Sampled isomorphism test: orbit maps agree, and where both families have
/// a lift the two germs differ by an `H`-arrow.
pub fn isomorphic<S: Field>(p: &LiftFamily<S>, q: &LiftFamily<S>, cfg: &CheckConfig) -> Result<IsoOutcome<S>, BibundleError> {
    if p.source != q.source || p.target != q.target {
        return Err(BibundleError::Mismatch("families have different source or target".into()));
    }
    for f in [p, q] {
        if f.class == BibundleClass::Plain {
            return Err(BibundleError::ClassPrecondition(
                "isomorphism test needs locally invertible families".into(),
            ));
        }
    }
    let budget = cfg.budget();
    let mut points = lift_samples(p, cfg)?;
    let mut more = lift_samples(q, &CheckConfig { seed: cfg.seed.wrapping_add(1), ..*cfg })?;
    points.append(&mut more);
    let mut unknown = false;
    for (k, x) in points {
        let chart = if k < p.lifts.len() { p.lifts[k].src_chart } else { q.lifts[k - p.lifts.len()].src_chart };
        let (Verdict::Yes(a), Verdict::Yes(b)) = (
            p.orbit_map().evaluate(chart, &x, cfg.bound)?,
            q.orbit_map().evaluate(chart, &x, cfg.bound)?,
        ) else {
            unknown = true;
            continue;
        };
        let witness = |a: BasePoint<S>, b: BasePoint<S>| {
            IsoOutcome::No(OrbitWitness {
                point: (chart, x.clone()),
                first: a,
                second: b,
            })
        };
        match p.target.orbit_equal((a.0, &a.1), (b.0, &b.1), budget)? {
            Verdict::No => return Ok(witness(a, b)),
            Verdict::Unknown => {
                unknown = true;
                continue;
            }
            Verdict::Yes(_) => {}
        }
        if let (Some(pl), Some(ql)) = (p.lift_at(chart, &x)?, q.lift_at(chart, &x)?) {
            let eta = ql.map.compose(&pl.map.invert()?)?;
            match p.target.contains_germ((pl.tgt_chart, &a.1), ql.tgt_chart, &eta, budget)? {
                Verdict::No => return Ok(witness(a, b)),
                Verdict::Unknown => unknown = true,
                Verdict::Yes(()) => {}
            }
        }
    }
    Ok(if unknown { IsoOutcome::Unknown } else { IsoOutcome::Yes })
}

/// Sampled coherence: overlapping lifts differ by `H`-arrows, and each lift
/// sends `G`-arrows between lift domains to `H`-arrows.
pub fn coherence_check<S: Field>(p: &LiftFamily<S>, cfg: &CheckConfig) -> Result<Verdict<()>, BibundleError> {
    let budget = cfg.budget();
    let mut acc = Verdict::Yes(());
    for (k, x) in lift_samples(p, cfg)? {
        let lift = &p.lifts[k];
        let y = lift.map.apply(&x)?;
        for other in &p.lifts {
            if other.src_chart != lift.src_chart || !other.dom.contains(&x)? {
                continue;
            }
            let eta = other.map.compose(&lift.map.invert()?)?;
            merge(&mut acc, p.target.contains_germ((lift.tgt_chart, &y), other.tgt_chart, &eta, budget)?);
        }
        let (v, _) = conjugation_check(&p.source, &p.target, lift, &p.lifts, &x, None, budget)?;
        merge(&mut acc, v);
        if acc.is_no() {
            return Ok(acc);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineGroup;
    use crate::scalar::Scalar;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn torus() -> EtaleGroupoid<Scalar> {
        let g = AffineGroup::translations_1d(vec![Scalar::int(1), Scalar::sqrt(2)]).unwrap();
        EtaleGroupoid::action(g, OpenBoxSet::full(1)).unwrap()
    }

    fn shift(t: Scalar) -> LiftFamily<Scalar> {
        let g = torus();
        LiftFamily::new(
            g.clone(),
            g,
            vec![Lift::new(OpenBoxSet::full(1), AffineMap::translation(vec![t]))],
            BibundleClass::Invertible,
        )
        .unwrap()
    }

    fn cfg() -> CheckConfig {
        CheckConfig {
            bound: 4,
            samples: 10,
            seed: 7,
        }
    }

    #[test]
    fn singular_lift_is_rejected() {
        assert!(AffineMap::line(Scalar::int(0), Scalar::int(1)).is_err());
    }

    #[test]
    fn identity_orbit_map_is_identity() {
        let id = identity_bibundle(&torus());
        let v = id.orbit_map().evaluate(0, &[q(2, 9)], 3).unwrap();
        assert_eq!(v, Verdict::Yes((0, vec![q(2, 9)])));
        assert_eq!(classify(&id, &cfg()).unwrap().class, Classification::Invertible);
    }

    #[test]
    fn translations_compose_exactly() {
        let a = shift(q(1, 3));
        let b = shift(Scalar::sqrt(2) * q(1, 5));
        let c = compose(&a, &b, 2).unwrap();
        assert_eq!(c.lifts().len(), 1);
        assert_eq!(c.lifts()[0].map, AffineMap::translation(vec![q(1, 3) + Scalar::sqrt(2) * q(1, 5)]));
        let v = a.orbit_map().evaluate(0, &[q(0, 1)], 2).unwrap();
        assert_eq!(v, Verdict::Yes((0, vec![q(1, 3)])));
    }

    #[test]
    fn restriction_by_box_arithmetic() {
        let r = restrict(
            &shift(q(1, 3)),
            &OpenBoxSet::interval(q(0, 1), q(1, 4)).unwrap(),
            &OpenBoxSet::interval(q(1, 4), q(7, 12)).unwrap(),
        )
        .unwrap();
        assert_eq!(r.lifts().len(), 1);
        assert_eq!(r.lifts()[0].dom, OpenBoxSet::interval(q(0, 1), q(1, 4)).unwrap());
        let p = shift(q(1, 3));
        assert_eq!(restrict(&p, &OpenBoxSet::full(1), &OpenBoxSet::full(1)).unwrap(), p);
    }

    #[test]
    fn isomorphism_up_to_lattice() {
        let a = shift(q(1, 3));
        let b = shift(q(1, 3) + Scalar::int(1) + Scalar::sqrt(2));
        let c = shift(q(1, 4));
        assert_eq!(isomorphic(&a, &a, &cfg()).unwrap(), IsoOutcome::Yes);
        assert_eq!(isomorphic(&a, &b, &cfg()).unwrap(), IsoOutcome::Yes);
        match isomorphic(&a, &c, &cfg()).unwrap() {
            IsoOutcome::No(w) => {
                let g = torus();
                let v = g.orbit_equal((0, &w.first.1), (0, &w.second.1), SearchBudget::from_bound(2)).unwrap();
                assert!(v.is_no());
            }
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn functor_from_translation() {
        let g = torus();
        let f = from_functor(
            g.clone(),
            g.clone(),
            vec![Lift::new(OpenBoxSet::full(1), AffineMap::translation(vec![q(1, 3)]))],
            &cfg(),
        )
        .unwrap();
        assert_eq!(f.class(), BibundleClass::LocallyInvertible);
        // doubling is equivariant (2Λ ⊆ Λ) but not a local isomorphism
        let double = from_functor(
            g.clone(),
            g.clone(),
            vec![Lift::new(OpenBoxSet::full(1), AffineMap::line(Scalar::int(2), Scalar::int(0)).unwrap())],
            &cfg(),
        )
        .unwrap();
        assert_eq!(double.class(), BibundleClass::Plain);
        let bad = from_functor(
            g.clone(),
            g,
            vec![Lift::new(OpenBoxSet::full(1), AffineMap::line(q(1, 2), Scalar::int(0)).unwrap())],
            &cfg(),
        );
        assert!(matches!(bad, Err(BibundleError::Incompatible(_))));
    }

    #[test]
    fn inclusion_is_locally_invertible() {
        let g = torus();
        let u = OpenBoxSet::interval(q(0, 1), q(1, 1)).unwrap();
        let i = inclusion(&g, &u).unwrap();
        let r = classify(&i, &cfg()).unwrap();
        assert!(r.local.is_yes());
        assert_ne!(r.class, Classification::Plain);
    }
}
