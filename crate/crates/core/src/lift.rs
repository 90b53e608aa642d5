//! Recovering affine group elements from sampled maps, and lifting orbit
//! maps to affine transitions through prescribed points.
//!
//! An orbit-preserving `C¹` map on a connected open set agrees there with a
//! single element of a countable affine group. Rather than follow the
//! category argument behind that fact, [`recover_affine`] checks its
//! conclusion: fit one affine map through all samples, then look the fit up
//! in the group.

use crate::affine::{AffineError, AffineGroup, AffineMap, GroupElement, Point};
use crate::bibundle::LiftFamily;
use crate::linalg::{self, Matrix};
use crate::model::{fmt_point, Atlas, ModelError, OpenBox, OpenBoxSet};
use crate::scalar::{Field, ScalarError};
use crate::search::ChartPath;
use crate::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("sample points do not determine an affine map")]
    Degenerate,
    #[error("sample {0} lies outside the domain")]
    OutsideDomain(String),
    #[error("no lift is defined at {0}")]
    NoLiftCovers(String),
    #[error("the lifted point is not in the orbit of {0}")]
    NotRelated(String),
    #[error("orbit search exhausted its budget before reaching {0}")]
    SearchExhausted(String),
    #[error("fitted map is singular")]
    Singular,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<AffineError> for LiftError {
    fn from(e: AffineError) -> Self {
        LiftError::Model(e.into())
    }
}

impl From<ScalarError> for LiftError {
    fn from(e: ScalarError) -> Self {
        LiftError::Model(e.into())
    }
}

/// Samples `(x, h(x))` of a map on an open domain, with optional Jacobians.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMap<S> {
    domain: OpenBoxSet<S>,
    samples: Vec<(Point<S>, Point<S>)>,
    derivatives: Option<Vec<Matrix<S>>>,
}

impl<S: Field> SampledMap<S> {
    pub fn new(domain: OpenBoxSet<S>, samples: Vec<(Point<S>, Point<S>)>) -> Result<Self, LiftError> {
        for (x, hx) in &samples {
            if hx.len() != domain.dim() || !domain.contains(x)? {
                return Err(LiftError::OutsideDomain(fmt_point(x)));
            }
        }
        Ok(SampledMap {
            domain,
            samples,
            derivatives: None,
        })
    }

    /// Samples `h` at the given points.
    pub fn from_fn(domain: OpenBoxSet<S>, points: Vec<Point<S>>, h: impl Fn(&[S]) -> Point<S>) -> Result<Self, LiftError> {
        let samples = points.into_iter().map(|x| (h(&x), x)).map(|(hx, x)| (x, hx)).collect();
        SampledMap::new(domain, samples)
    }

    /// Jacobians at the sample points, one per sample.
    pub fn with_derivatives(mut self, jacobians: Vec<Matrix<S>>) -> Self {
        self.derivatives = Some(jacobians);
        self
    }

    pub fn domain(&self) -> &OpenBoxSet<S> {
        &self.domain
    }

    pub fn samples(&self) -> &[(Point<S>, Point<S>)] {
        &self.samples
    }

    pub fn is_exact(&self) -> bool {
        self.samples.iter().all(|(x, hx)| x.iter().chain(hx).all(|v| v.is_exact()))
    }

    /// The samples that fall in one box.
    pub fn restrict_to(&self, b: &OpenBox<S>) -> Result<SampledMap<S>, LiftError> {
        let mut samples = Vec::new();
        let mut derivatives = self.derivatives.as_ref().map(|_| Vec::new());
        for (k, s) in self.samples.iter().enumerate() {
            if b.contains(&s.0)? {
                samples.push(s.clone());
                if let (Some(out), Some(all)) = (derivatives.as_mut(), self.derivatives.as_ref()) {
                    out.push(all[k].clone());
                }
            }
        }
        Ok(SampledMap {
            domain: OpenBoxSet::from_box(b.clone()),
            samples,
            derivatives,
        })
    }
}

/// Outcome of [`recover_affine`].
#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryResult<S> {
    /// Every sample agrees with `element`; `residual` is the max-norm misfit.
    Match { element: GroupElement<S>, residual: f64 },
    /// No element agrees. `decided` is true when the fit is provably outside
    /// the group (not just outside the enumerated words).
    NoMatch { bound: usize, decided: bool },
    /// Several elements fit within tolerance (numeric samples only).
    Ambiguous(Vec<GroupElement<S>>),
}

impl<S> RecoveryResult<S> {
    pub fn is_match(&self) -> bool {
        matches!(self, RecoveryResult::Match { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            RecoveryResult::Match { .. } => "match",
            RecoveryResult::NoMatch { .. } => "no_match",
            RecoveryResult::Ambiguous(_) => "ambiguous",
        }
    }
}

/// `(A, b)` through the samples: exact solve of the normal equations, which is
/// least squares for float samples. Falls back to the first Jacobian.
pub fn fit_affine<S: Field>(h: &SampledMap<S>) -> Result<(Matrix<S>, Vec<S>), LiftError> {
    let n = h.domain.dim();
    let design: Matrix<S> = h
        .samples
        .iter()
        .map(|(x, _)| x.iter().cloned().chain(std::iter::once(S::one())).collect())
        .collect();
    let values: Matrix<S> = h.samples.iter().map(|(_, hx)| hx.clone()).collect();
    if !h.samples.is_empty() {
        let dt = linalg::transpose(&design);
        let normal = linalg::mat_mul(&dt, &design)?;
        let rhs = linalg::mat_mul(&dt, &values)?;
        if let Some(theta) = linalg::solve(&normal, &rhs)? {
            // theta is (n+1) × n: rows of Aᵀ, then b
            let a = linalg::transpose(&theta[..n].to_vec());
            return Ok((a, theta[n].clone()));
        }
    }
    match (&h.derivatives, h.samples.first()) {
        (Some(d), Some((x, hx))) if !d.is_empty() => {
            let a = d[0].clone();
            let b = linalg::vec_sub(hx, &linalg::mat_vec(&a, x)?)?;
            Ok((a, b))
        }
        _ => Err(LiftError::Degenerate),
    }
}

fn max_residual<S: Field>(h: &SampledMap<S>, apply: impl Fn(&[S]) -> Result<Point<S>, LiftError>) -> Result<f64, LiftError> {
    let mut worst = 0.0f64;
    for (x, hx) in &h.samples {
        let y = apply(x)?;
        for (a, b) in y.iter().zip(hx) {
            worst = worst.max(a.try_sub(b)?.to_f64().abs());
        }
    }
    Ok(worst)
}

fn coefficient_gap<S: Field>(m: &AffineMap<S>, a: &Matrix<S>, b: &[S]) -> Result<f64, LiftError> {
    let mut gap = 0.0f64;
    for (r, s) in m.linear().iter().zip(a) {
        for (x, y) in r.iter().zip(s) {
            gap = gap.max(x.try_sub(y)?.to_f64().abs());
        }
    }
    for (x, y) in m.offset().iter().zip(b) {
        gap = gap.max(x.try_sub(y)?.to_f64().abs());
    }
    Ok(gap)
}

/// Which element of `group` does the sampled map equal?
///
/// Exact samples are decided with zero tolerance. Numeric samples are matched
/// against the enumerated elements up to `bound`, within `tol` in max norm.
pub fn recover_affine<S: Field>(
    h: &SampledMap<S>,
    group: &AffineGroup<S>,
    bound: usize,
    tol: f64,
) -> Result<RecoveryResult<S>, LiftError> {
    let (a, b) = fit_affine(h)?;
    if h.is_exact() {
        let fit = match AffineMap::new(a, b) {
            Ok(m) => m,
            Err(AffineError::Singular) => return Ok(RecoveryResult::NoMatch { bound, decided: true }),
            Err(e) => return Err(e.into()),
        };
        for (x, hx) in &h.samples {
            if &fit.apply(x)? != hx {
                // not even affine on the domain
                return Ok(RecoveryResult::NoMatch { bound, decided: true });
            }
        }
        return Ok(match group.contains(&fit, bound)? {
            Verdict::Yes(element) => RecoveryResult::Match { element, residual: 0.0 },
            Verdict::No => RecoveryResult::NoMatch { bound, decided: true },
            Verdict::Unknown => RecoveryResult::NoMatch { bound, decided: false },
        });
    }
    let mut hits = Vec::new();
    let mut best = f64::INFINITY;
    for e in group.enumerate(bound) {
        if coefficient_gap(&e.map, &a, &b)? > tol {
            continue;
        }
        let r = max_residual(h, |x| Ok(e.map.apply(x)?))?;
        if r <= tol {
            best = best.min(r);
            hits.push((e, r));
        }
    }
    Ok(match hits.len() {
        0 => RecoveryResult::NoMatch { bound, decided: false },
        1 => {
            let (element, residual) = hits.pop().expect("one hit");
            RecoveryResult::Match { element, residual }
        }
        _ => RecoveryResult::Ambiguous(hits.into_iter().map(|(e, _)| e).collect()),
    })
}

/// [`recover_affine`] on each box of the domain separately.
pub fn recover_per_box<S: Field>(
    h: &SampledMap<S>,
    group: &AffineGroup<S>,
    bound: usize,
    tol: f64,
) -> Result<Vec<(OpenBox<S>, RecoveryResult<S>)>, LiftError> {
    h.domain
        .boxes()
        .iter()
        .map(|b| Ok((b.clone(), recover_affine(&h.restrict_to(b)?, group, bound, tol)?)))
        .collect()
}

/// How the orbit map to be lifted is given.
#[derive(Debug, Clone, Copy)]
pub enum OrbitData<'a, S> {
    /// A lift family whose chart indices are the atlases' chart indices.
    Family(&'a LiftFamily<S>),
    /// Matched representative pairs from chart `from` to chart `to`.
    Pairs { from: usize, to: usize, samples: &'a SampledMap<S> },
}

/// An affine transition through prescribed points.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLift<S> {
    pub src_chart: usize,
    pub tgt_chart: usize,
    pub map: AffineMap<S>,
    pub domain: OpenBoxSet<S>,
    /// The correction carrying `ψ₀(r)` to `r′` in the target atlas.
    pub correction: ChartPath<S>,
}

/// Lifts `f` near `r` to an affine transition `ψ` with `ψ(r) = r′`: take any
/// lift `ψ₀` at `r`, then post-compose with the target-atlas arrow carrying
/// `ψ₀(r)` to `r′`.
pub fn lift_local_diffeo<S: Field>(
    source: &Atlas<S>,
    target: &Atlas<S>,
    f: OrbitData<'_, S>,
    (i, r): (usize, &[S]),
    (j, r2): (usize, &[S]),
    bound: usize,
) -> Result<LocalLift<S>, LiftError> {
    if !source.chart(i)?.domain().contains(r)? {
        return Err(ModelError::NotInDomain(fmt_point(r)).into());
    }
    let (psi0, dom, k) = match f {
        OrbitData::Family(fam) => {
            let l = fam.lift_at(i, r).map_err(|e| LiftError::NoLiftCovers(e.to_string()))?;
            let l = l.ok_or_else(|| LiftError::NoLiftCovers(fmt_point(r)))?;
            (l.map.clone(), l.dom.clone(), l.tgt_chart)
        }
        OrbitData::Pairs { from, to, samples } => {
            if from != i || !samples.domain().contains(r)? {
                return Err(LiftError::NoLiftCovers(fmt_point(r)));
            }
            let (a, b) = fit_affine(samples)?;
            let m = AffineMap::new(a, b).map_err(|_| LiftError::Singular)?;
            (m, samples.domain().clone(), to)
        }
    };
    let q = psi0.apply(r)?;
    let start = target.atlas_pi(k, q.clone())?;
    let goal = target.atlas_pi(j, r2.to_vec())?;
    let path = match start.compare(&goal, bound)? {
        Verdict::Yes(p) => p,
        Verdict::No => return Err(LiftError::NotRelated(fmt_point(r2))),
        Verdict::Unknown => return Err(LiftError::SearchExhausted(fmt_point(r2))),
    };
    let map = path.map.compose(&psi0)?;
    let domain = match target.chart(j)?.domain().preimage(&map)? {
        Some(back) => dom.intersect(&back)?,
        None => dom,
    };
    Ok(LocalLift {
        src_chart: i,
        tgt_chart: j,
        map,
        domain,
        correction: path,
    })
}
