//! Irrational tori `ℝ/(ℤ + αℤ)` for quadratic irrationals `α`.
//!
//! Two tori are Morita equivalent exactly when `α` and `β` are related by an
//! integral fractional linear transformation with determinant ±1. For
//! quadratic irrationals this is decided by Serret's criterion: the periods
//! of the continued fractions are cyclic rotations of each other. The
//! witness matrix is read off the aligned convergent matrices and checked in
//! exact arithmetic.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::affine::{AffineGroup, AffineMap};
use crate::bibundle::{BibundleClass, BibundleError, Lift, LiftFamily};
use crate::groupoid::EtaleGroupoid;
use crate::model::{Atlas, ModelError, ModelQuasifold, OpenBoxSet, Transition};
use crate::scalar::{Field, Scalar, ScalarError};
use crate::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TorusError {
    #[error("{0} is not a quadratic irrational")]
    NotQuadratic(String),
    #[error("discriminant {0} is too large")]
    TooLarge(String),
    #[error("witness does not carry alpha to beta")]
    WitnessFailure,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bibundle(#[from] BibundleError),
}

/// `(P + √D)/Q` with `D` not a square and `Q | D − P²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

impl QuadraticIrrational {
    pub fn new(p: BigInt, q: BigInt, d: BigInt) -> Result<Self, TorusError> {
        if q.is_zero() || !d.is_positive() || is_square(&d) {
            return Err(TorusError::NotQuadratic(format!("({p}+sqrt({d}))/{q}")));
        }
        let mut x = QuadraticIrrational { p, q, d };
        if !(&x.d - &x.p * &x.p).is_multiple_of(&x.q) {
            let s = x.q.abs();
            x.p *= &s;
            x.d *= &s * &s;
            x.q *= &s;
        }
        Ok(x.reduced())
    }

    /// Smallest `|Q|` among the equivalent forms `(kP + √(k²D))/(kQ)`.
    fn reduced(self) -> Self {
        let g = self.p.gcd(&self.q);
        let mut k = g.clone();
        while k > BigInt::one() {
            if g.is_multiple_of(&k) && self.d.is_multiple_of(&(&k * &k)) {
                let (p, q, d) = (&self.p / &k, &self.q / &k, &self.d / (&k * &k));
                if (&d - &p * &p).is_multiple_of(&q) {
                    return QuadraticIrrational { p, q, d };
                }
            }
            k -= 1;
        }
        self
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// From an exact quadratic scalar `a + b√d`.
    pub fn from_scalar(x: &Scalar) -> Result<Self, TorusError> {
        let Scalar::Quadratic { a, b, d } = x else {
            return Err(TorusError::NotQuadratic(x.to_string()));
        };
        // (P + √D)/Q with Q = ±L, P = aQ, √D = bQ√d, where L clears denominators
        let l = a.denom().lcm(b.denom());
        let q = if b.is_negative() { -l } else { l };
        let qr = BigRational::from_integer(q.clone());
        let p = (a * &qr).to_integer();
        let bq = (b * &qr).to_integer();
        QuadraticIrrational::new(p, q, &bq * &bq * BigInt::from(*d))
    }

    pub fn parse(s: &str) -> Result<Self, TorusError> {
        let x: Scalar = s.parse()?;
        QuadraticIrrational::from_scalar(&x)
    }

    pub fn value(&self) -> Result<Scalar, TorusError> {
        let d = self.d.to_u64().ok_or_else(|| TorusError::TooLarge(self.d.to_string()))?;
        let inv_q = Scalar::rational(BigRational::new(BigInt::one(), self.q.clone()));
        let p = Scalar::rational(BigRational::new(self.p.clone(), self.q.clone()));
        Ok(p.try_add(&Scalar::sqrt(d).try_mul(&inv_q)?)?)
    }

    /// Square-free part of the discriminant: the field `ℚ(√k)`.
    pub fn field(&self) -> u64 {
        match self.value() {
            Ok(Scalar::Quadratic { d, .. }) => d,
            _ => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        (self.p.to_f64().unwrap_or(f64::NAN) + self.d.to_f64().unwrap_or(f64::NAN).sqrt()) / self.q.to_f64().unwrap_or(f64::NAN)
    }

    /// `floor(x)` and the complete quotient `1/(x − floor x)`.
    fn step(&self) -> (BigInt, QuadraticIrrational) {
        let s = self.d.sqrt();
        let a = if self.q.is_positive() {
            (&self.p + &s).div_floor(&self.q)
        } else {
            (-&self.p - &s - BigInt::one()).div_floor(&-&self.q)
        };
        let p = &a * &self.q - &self.p;
        let q = (&self.d - &p * &p) / &self.q;
        (
            a,
            QuadraticIrrational {
                p,
                q,
                d: self.d.clone(),
            },
        )
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + sqrt({}))/{}", self.p, self.d, self.q)
    }
}

/// Eventually periodic expansion `[pre; (period)…]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub preperiod: Vec<BigInt>,
    pub period: Vec<BigInt>,
}

impl ContinuedFraction {
    pub fn quotient(&self, i: usize) -> &BigInt {
        if i < self.preperiod.len() {
            &self.preperiod[i]
        } else {
            &self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// `(p_i, q_i)` for `i < count`.
    pub fn convergents(&self, count: usize) -> Vec<(BigInt, BigInt)> {
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let a = self.quotient(i);
            let p = a * &p0 + &p1;
            let q = a * &q0 + &q1;
            p1 = std::mem::replace(&mut p0, p.clone());
            q1 = std::mem::replace(&mut q0, q.clone());
            out.push((p, q));
        }
        out
    }

    pub fn to_i64(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|a| a.to_i64().unwrap_or(i64::MAX)).collect()
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigInt]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "[{}; ({})]", join(&self.preperiod), join(&self.period))
    }
}

/// Exact expansion with the complete quotients along the way. The first
/// repeated `(P, Q)` state closes the period.
fn expand(alpha: &QuadraticIrrational) -> (ContinuedFraction, Vec<QuadraticIrrational>) {
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut quotients = Vec::new();
    let mut x = alpha.clone();
    loop {
        if let Some(&start) = seen.get(&(x.p.clone(), x.q.clone())) {
            let period = quotients.split_off(start);
            return (
                ContinuedFraction {
                    preperiod: quotients,
                    period,
                },
                states,
            );
        }
        seen.insert((x.p.clone(), x.q.clone()), states.len());
        let (a, next) = x.step();
        states.push(x);
        quotients.push(a);
        x = next;
    }
}

pub fn continued_fraction(alpha: &QuadraticIrrational) -> ContinuedFraction {
    expand(alpha).0
}

/// Integral `(a b; c d)` with `ad − bc = ±1`, acting by `x ↦ (ax + b)/(cx + d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WitnessMatrix {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl WitnessMatrix {
    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        WitnessMatrix {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        WitnessMatrix::from_i64(1, 0, 0, 1)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn mul(&self, o: &WitnessMatrix) -> WitnessMatrix {
        WitnessMatrix {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    /// Inverse in `GL(2, ℤ)`; `None` unless the determinant is ±1.
    pub fn inverse(&self) -> Option<WitnessMatrix> {
        let det = self.det();
        if det.abs() != BigInt::one() {
            return None;
        }
        Some(WitnessMatrix {
            a: &self.d * &det,
            b: -&self.b * &det,
            c: -&self.c * &det,
            d: &self.a * &det,
        })
    }

    pub fn apply(&self, x: &Scalar) -> Result<Scalar, ScalarError> {
        let c = |n: &BigInt| Scalar::rational(BigRational::from_integer(n.clone()));
        let num = c(&self.a).try_mul(x)?.try_add(&c(&self.b))?;
        let den = c(&self.c).try_mul(x)?.try_add(&c(&self.d))?;
        num.try_div(&den)
    }

    pub fn rows(&self) -> [[BigInt; 2]; 2] {
        [[self.a.clone(), self.b.clone()], [self.c.clone(), self.d.clone()]]
    }

    fn negated(&self) -> WitnessMatrix {
        WitnessMatrix {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    /// `W` and `−W` act identically; pick the one whose first nonzero entry
    /// is positive.
    fn normalized(self) -> WitnessMatrix {
        let first = [&self.a, &self.b, &self.c, &self.d].into_iter().find(|e| !e.is_zero()).cloned();
        match first {
            Some(e) if e.is_negative() => self.negated(),
            _ => self,
        }
    }

    fn norm1(&self) -> BigInt {
        self.a.abs() + self.b.abs() + self.c.abs() + self.d.abs()
    }
}

impl fmt::Display for WitnessMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

/// `∏_{i<m} (a_i 1; 1 0)`, so that `α = M(m)·x_m`.
fn convergent_matrix(cf: &ContinuedFraction, m: usize) -> WitnessMatrix {
    let mut out = WitnessMatrix::identity();
    for i in 0..m {
        let step = WitnessMatrix {
            a: cf.quotient(i).clone(),
            b: BigInt::one(),
            c: BigInt::one(),
            d: BigInt::zero(),
        };
        out = out.mul(&step);
    }
    out
}

fn is_rotation(a: &[BigInt], b: &[BigInt]) -> bool {
    a.len() == b.len() && (0..a.len()).any(|r| a.iter().cycle().skip(r).take(a.len()).eq(b.iter()))
}

/// How far to scan the stabilizer of `α` for the smallest witness.
const STABILIZER_SCAN: i32 = 6;

/// Decides whether `T_α` and `T_β` are Morita equivalent. A `Yes` witness
/// has minimal entry sum among the witnesses scanned, preferring
/// determinant +1 on ties.
pub fn morita_equivalent(alpha: &QuadraticIrrational, beta: &QuadraticIrrational) -> Result<Verdict<WitnessMatrix>, TorusError> {
    if alpha.field() != beta.field() {
        return Ok(Verdict::No);
    }
    let (ca, xa) = expand(alpha);
    let (cb, xb) = expand(beta);
    if !is_rotation(&ca.period, &cb.period) {
        return Ok(Verdict::No);
    }
    let m = ca.preperiod.len();
    let target = xa[m].value()?;
    let mut n = None;
    for k in cb.preperiod.len()..xb.len() {
        if xb[k].value()? == target {
            n = Some(k);
            break;
        }
    }
    let n = n.expect("rotated periods share a complete quotient");
    let base = convergent_matrix(&cb, n).mul(&convergent_matrix(&ca, m).inverse().expect("unimodular"));
    let stab = convergent_matrix(&ca, m + ca.period.len()).mul(&convergent_matrix(&ca, m).inverse().expect("unimodular"));
    let stab_inv = stab.inverse().expect("unimodular");
    let mut candidates = vec![base.clone()];
    let (mut up, mut down) = (base.clone(), base);
    for _ in 0..STABILIZER_SCAN {
        up = up.mul(&stab);
        down = down.mul(&stab_inv);
        candidates.push(up.clone());
        candidates.push(down.clone());
    }
    let best = candidates
        .into_iter()
        .map(WitnessMatrix::normalized)
        .min_by_key(|w| (w.norm1(), w.det() != BigInt::one(), [w.a.clone(), w.b.clone(), w.c.clone(), w.d.clone()]))
        .expect("nonempty");
    if best.apply(&alpha.value()?)? != beta.value()? {
        return Err(TorusError::WitnessFailure);
    }
    Ok(Verdict::Yes(best))
}

/// `ℤ + αℤ` acting on `ℝ` by translations.
pub fn torus_group(alpha: &QuadraticIrrational) -> Result<AffineGroup<Scalar>, TorusError> {
    Ok(AffineGroup::translations_1d(vec![Scalar::int(1), alpha.value()?]).map_err(ModelError::from)?)
}

/// The action groupoid `(ℤ + αℤ) ⋉ ℝ`.
pub fn groupoids_for(alpha: &QuadraticIrrational) -> Result<EtaleGroupoid<Scalar>, TorusError> {
    Ok(EtaleGroupoid::action(torus_group(alpha)?, OpenBoxSet::full(1))?)
}

/// The invertible bibundle `T_α → T_β` induced by the witness: the single
/// lift `x ↦ x/(cα + d)` scales `ℤ + αℤ` onto `ℤ + βℤ`.
pub fn lift_witness_to_bibundle(
    alpha: &QuadraticIrrational,
    beta: &QuadraticIrrational,
    w: &WitnessMatrix,
) -> Result<LiftFamily<Scalar>, TorusError> {
    let a = alpha.value()?;
    let b = beta.value()?;
    if w.det().abs() != BigInt::one() || w.apply(&a)? != b {
        return Err(TorusError::WitnessFailure);
    }
    let c = Scalar::rational(BigRational::from_integer(w.c.clone()));
    let d = Scalar::rational(BigRational::from_integer(w.d.clone()));
    let scale = c.try_mul(&a)?.try_add(&d)?.try_inv()?;
    let lift = AffineMap::line(scale.clone(), Scalar::int(0)).map_err(ModelError::from)?;
    // the scaled lattice must be exactly ℤ + βℤ
    let (ga, gb) = (torus_group(alpha)?, torus_group(beta)?);
    for t in [Scalar::int(1), a.clone()] {
        let img = AffineMap::translation(vec![t.try_mul(&scale)?]);
        if !gb.contains(&img, 0).map_err(ModelError::from)?.is_yes() {
            return Err(TorusError::WitnessFailure);
        }
    }
    for t in [Scalar::int(1), b] {
        let pre = AffineMap::translation(vec![t.try_div(&scale)?]);
        if !ga.contains(&pre, 0).map_err(ModelError::from)?.is_yes() {
            return Err(TorusError::WitnessFailure);
        }
    }
    Ok(LiftFamily::new(
        groupoids_for(alpha)?,
        groupoids_for(beta)?,
        vec![Lift::new(OpenBoxSet::full(1), lift)],
        BibundleClass::Invertible,
    )?)
}

/// Two overlapping charts `(0, 2)` of `T_α`, glued by `x ↦ x − 1` on `(1, 2)`.
pub fn two_chart_atlas(alpha: &QuadraticIrrational) -> Result<Atlas<Scalar>, TorusError> {
    let g = torus_group(alpha)?;
    let v = OpenBoxSet::interval(Scalar::int(0), Scalar::int(2))?;
    let charts = vec![
        ModelQuasifold::new(v.clone(), g.clone())?,
        ModelQuasifold::new(v, g)?,
    ];
    let glue = Transition {
        from: 0,
        to: 1,
        map: AffineMap::translation(vec![Scalar::int(-1)]),
        domain: OpenBoxSet::interval(Scalar::int(1), Scalar::int(2))?,
    };
    Ok(Atlas::new(charts, vec![glue])?)
}
