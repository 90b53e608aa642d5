//! Invertible affine maps of ℝⁿ and finitely generated groups of them.
//!
//! Groups are stored through their affine action, so element equality is
//! matrix equality and the represented group always acts effectively.
//! Elements are reached by breadth-first word enumeration; orbit questions for
//! translation lattices over one exact field are decided by integer linear
//! algebra instead.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::scalar::{Field, QuadCoords, ScalarError, Sign};
use crate::Verdict;

pub type Point<S> = Vec<S>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AffineError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("linear part is singular")]
    Singular,
    #[error("linear part is not square")]
    NotSquare,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// `x ↦ A x + b` with `A` invertible.
#[derive(Clone, PartialEq)]
pub struct AffineMap<S> {
    linear: Matrix<S>,
    translation: Vec<S>,
}

impl<S: Field> AffineMap<S> {
    pub fn new(linear: Vec<Vec<S>>, translation: Vec<S>) -> Result<Self, AffineError> {
        let n = translation.len();
        if linear.len() != n {
            return Err(AffineError::Dimension {
                expected: n,
                found: linear.len(),
            });
        }
        if linear.iter().any(|r| r.len() != n) {
            return Err(AffineError::NotSquare);
        }
        if linalg::determinant(&linear)?.sign() == Sign::Zero {
            return Err(AffineError::Singular);
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            linear: linalg::identity(n),
            translation: vec![S::zero(); n],
        }
    }

    pub fn translation(b: Vec<S>) -> Self {
        AffineMap {
            linear: linalg::identity(b.len()),
            translation: b,
        }
    }

    /// One-dimensional `x ↦ a x + b`.
    pub fn line(a: S, b: S) -> Result<Self, AffineError> {
        AffineMap::new(vec![vec![a]], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear(&self) -> &[Vec<S>] {
        &self.linear
    }

    pub fn offset(&self) -> &[S] {
        &self.translation
    }

    pub fn determinant(&self) -> Result<S, AffineError> {
        Ok(linalg::determinant(&self.linear)?)
    }

    pub fn is_translation(&self) -> bool {
        self.linear == linalg::identity::<S>(self.dim())
    }

    pub fn is_identity(&self) -> bool {
        self.is_translation() && self.translation.iter().all(|x| x.sign() == Sign::Zero)
    }

    /// True when every row and column of `A` has exactly one nonzero entry,
    /// i.e. the map sends axis-aligned boxes to axis-aligned boxes.
    pub fn is_monomial(&self) -> bool {
        let n = self.dim();
        let nz = |i: usize, j: usize| self.linear[i][j].sign() != Sign::Zero;
        (0..n).all(|i| (0..n).filter(|&j| nz(i, j)).count() == 1)
            && (0..n).all(|j| (0..n).filter(|&i| nz(i, j)).count() == 1)
    }

    fn check_dim(&self, found: usize) -> Result<(), AffineError> {
        if found != self.dim() {
            return Err(AffineError::Dimension {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[S]) -> Result<Point<S>, AffineError> {
        self.check_dim(x.len())?;
        let ax = linalg::mat_vec(&self.linear, x)?;
        Ok(linalg::vec_add(&ax, &self.translation)?)
    }

    /// Linear part applied to a vector.
    pub fn apply_linear(&self, v: &[S]) -> Result<Vec<S>, AffineError> {
        self.check_dim(v.len())?;
        Ok(linalg::mat_vec(&self.linear, v)?)
    }

    /// `self ∘ g`: `(A_f A_g, A_f b_g + b_f)`.
    pub fn compose(&self, g: &AffineMap<S>) -> Result<AffineMap<S>, AffineError> {
        self.check_dim(g.dim())?;
        let linear = linalg::mat_mul(&self.linear, &g.linear)?;
        let translation = linalg::vec_add(&linalg::mat_vec(&self.linear, &g.translation)?, &self.translation)?;
        Ok(AffineMap { linear, translation })
    }

    /// `(A⁻¹, −A⁻¹ b)`.
    pub fn invert(&self) -> Result<AffineMap<S>, AffineError> {
        let inv = linalg::inverse(&self.linear)?.ok_or(AffineError::Singular)?;
        let t = linalg::mat_vec(&inv, &self.translation)?;
        Ok(AffineMap {
            linear: inv,
            translation: t.into_iter().map(|x| -x).collect(),
        })
    }

    /// Conjugate `self ∘ g ∘ self⁻¹`.
    pub fn conjugate(&self, g: &AffineMap<S>) -> Result<AffineMap<S>, AffineError> {
        self.compose(g)?.compose(&self.invert()?)
    }

    /// Hashable exact key, `None` if any entry is approximate.
    pub fn exact_key(&self) -> Option<Vec<QuadCoords>> {
        self.linear
            .iter()
            .flatten()
            .chain(self.translation.iter())
            .map(|x| x.coords())
            .collect()
    }
}

impl<S: fmt::Debug> fmt::Debug for AffineMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap({:?}, {:?})", self.linear, self.translation)
    }
}

impl<S: fmt::Display> fmt::Display for AffineMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.translation.len() == 1 {
            return write!(f, "x↦{}·x+{}", self.linear[0][0], self.translation[0]);
        }
        write!(f, "x↦[")?;
        for (i, row) in self.linear.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        let t: Vec<String> = self.translation.iter().map(|x| x.to_string()).collect();
        write!(f, "]x+[{}]", t.join(" "))
    }
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inverted(self) -> Letter {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    // generator index first, the generator before its inverse
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.generator, self.inverse).cmp(&(other.generator, other.inverse))
    }
}

/// Word `l₁ l₂ … l_k`, evaluated as `l₁ ∘ l₂ ∘ … ∘ l_k`.
pub type Word = Vec<Letter>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    TranslationLattice,
    General,
}

/// A group element together with a word witnessing it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<S> {
    pub map: AffineMap<S>,
    pub word: Word,
}

/// Result of a bounded enumeration.
#[derive(Debug, Clone)]
pub struct Enumeration<S> {
    pub elements: Vec<GroupElement<S>>,
    /// The last level added nothing new: `elements` is the whole group.
    pub saturated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineGroup<S> {
    n: usize,
    generators: Vec<AffineMap<S>>,
    inverses: Vec<AffineMap<S>>,
    kind: GroupKind,
}

impl<S: Field> AffineGroup<S> {
    pub fn new(n: usize, generators: Vec<AffineMap<S>>) -> Result<Self, AffineError> {
        for g in &generators {
            if g.dim() != n {
                return Err(AffineError::Dimension {
                    expected: n,
                    found: g.dim(),
                });
            }
        }
        let inverses = generators.iter().map(|g| g.invert()).collect::<Result<Vec<_>, _>>()?;
        let kind = if generators.iter().all(|g| g.is_translation()) {
            GroupKind::TranslationLattice
        } else {
            GroupKind::General
        };
        Ok(AffineGroup {
            n,
            generators,
            inverses,
            kind,
        })
    }

    pub fn trivial(n: usize) -> Self {
        AffineGroup {
            n,
            generators: Vec::new(),
            inverses: Vec::new(),
            kind: GroupKind::TranslationLattice,
        }
    }

    /// `ℤ t₁ + … + ℤ t_k` acting on ℝ by translation.
    pub fn translations_1d(steps: Vec<S>) -> Result<Self, AffineError> {
        AffineGroup::new(1, steps.into_iter().map(|t| AffineMap::translation(vec![t])).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[AffineMap<S>] {
        &self.generators
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(|g| g.is_identity())
    }

    /// Generators and inverses in canonical letter order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.generators.len())
            .flat_map(|g| {
                [
                    Letter { generator: g, inverse: false },
                    Letter { generator: g, inverse: true },
                ]
            })
            .collect()
    }

    pub fn letter_map(&self, l: Letter) -> &AffineMap<S> {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.generators[l.generator]
        }
    }

    pub fn evaluate(&self, word: &[Letter]) -> Result<AffineMap<S>, AffineError> {
        let mut m = AffineMap::identity(self.n);
        for &l in word {
            m = m.compose(self.letter_map(l))?;
        }
        Ok(m)
    }

    pub fn identity_element(&self) -> GroupElement<S> {
        GroupElement {
            map: AffineMap::identity(self.n),
            word: Vec::new(),
        }
    }

    /// All distinct elements expressible by words of length ≤ `max_word_length`.
    pub fn enumerate(&self, max_word_length: usize) -> Vec<GroupElement<S>> {
        self.enumerate_full(max_word_length).elements
    }

    /// Breadth-first enumeration, shortest then lexicographically least word
    /// per element.
    pub fn enumerate_full(&self, max_word_length: usize) -> Enumeration<S> {
        let mut seen = Dedup::default();
        let id = self.identity_element();
        seen.insert(&id.map);
        let mut elements = vec![id];
        let mut frontier = vec![0usize];
        let letters = self.letters();
        let mut saturated = false;
        for _ in 0..max_word_length {
            let mut next = Vec::new();
            for &idx in &frontier {
                for &l in &letters {
                    let base = &elements[idx];
                    if base.word.last() == Some(&l.inverted()) {
                        continue;
                    }
                    let Ok(map) = base.map.compose(self.letter_map(l)) else {
                        continue;
                    };
                    if seen.insert(&map) {
                        let mut word = base.word.clone();
                        word.push(l);
                        elements.push(GroupElement { map, word });
                        next.push(elements.len() - 1);
                    }
                }
            }
            if next.is_empty() {
                saturated = true;
                break;
            }
            frontier = next;
        }
        Enumeration { elements, saturated }
    }

    /// Is `y` in the orbit of `x`?
    ///
    /// Exact for translation lattices over one exact field. Otherwise a
    /// bounded search that answers `No` only when the enumeration saturates
    /// (the group is finite and was listed completely).
    pub fn orbit_equal(&self, x: &[S], y: &[S], bound: usize) -> Result<Verdict<GroupElement<S>>, AffineError> {
        for p in [x, y] {
            if p.len() != self.n {
                return Err(AffineError::Dimension {
                    expected: self.n,
                    found: p.len(),
                });
            }
        }
        if x == y {
            return Ok(Verdict::Yes(self.identity_element()));
        }
        if self.kind == GroupKind::TranslationLattice {
            let diff = linalg::vec_sub(y, x)?;
            if let Some(decided) = self.lattice_member(&diff)? {
                return Ok(decided);
            }
        }
        let en = self.enumerate_full(bound);
        for e in en.elements {
            if e.map.apply(x)? == y {
                return Ok(Verdict::Yes(e));
            }
        }
        Ok(if en.saturated { Verdict::No } else { Verdict::Unknown })
    }

    /// Is `map` an element of the group?
    pub fn contains(&self, map: &AffineMap<S>, bound: usize) -> Result<Verdict<GroupElement<S>>, AffineError> {
        if map.dim() != self.n {
            return Err(AffineError::Dimension {
                expected: self.n,
                found: map.dim(),
            });
        }
        if map.is_identity() {
            return Ok(Verdict::Yes(self.identity_element()));
        }
        if self.kind == GroupKind::TranslationLattice {
            if !map.is_translation() {
                return Ok(Verdict::No);
            }
            if let Some(decided) = self.lattice_member(map.offset())? {
                return Ok(decided);
            }
        }
        let en = self.enumerate_full(bound);
        for e in en.elements {
            if &e.map == map {
                return Ok(Verdict::Yes(e));
            }
        }
        Ok(if en.saturated { Verdict::No } else { Verdict::Unknown })
    }

    /// Exact decision of `v ∈ ℤ t₁ + … + ℤ t_k` for the translation parts.
    /// `None` when some coordinate is approximate or the fields differ.
    fn lattice_member(&self, v: &[S]) -> Result<Option<Verdict<GroupElement<S>>>, AffineError> {
        let mut field: Option<u64> = None;
        let mut coords = |x: &S| -> Option<QuadCoords> {
            let c = x.coords()?;
            match (field, c.d) {
                (Some(f), Some(d)) if f != d => None,
                (None, Some(d)) => {
                    field = Some(d);
                    Some(c)
                }
                _ => Some(c),
            }
        };
        let mut columns: Vec<Vec<QuadCoords>> = Vec::new();
        for g in &self.generators {
            match g.offset().iter().map(&mut coords).collect::<Option<Vec<_>>>() {
                Some(c) => columns.push(c),
                None => return Ok(None),
            }
        }
        let Some(target) = v.iter().map(&mut coords).collect::<Option<Vec<_>>>() else {
            return Ok(None);
        };
        let flatten = |cs: &[QuadCoords]| -> Vec<BigRational> {
            cs.iter().flat_map(|c| [c.a.clone(), c.b.clone()]).collect()
        };
        let cols: Vec<Vec<BigRational>> = columns.iter().map(|c| flatten(c)).collect();
        let rhs = flatten(&target);
        match solve_integer_combination(&cols, &rhs) {
            Some(z) => {
                let mut word = Vec::new();
                for (g, k) in z.iter().enumerate() {
                    let letter = Letter {
                        generator: g,
                        inverse: k.is_negative(),
                    };
                    let reps: usize = num_traits::ToPrimitive::to_usize(&k.abs()).unwrap_or(usize::MAX);
                    word.extend(std::iter::repeat(letter).take(reps));
                }
                let map = self.evaluate(&word)?;
                Ok(Some(Verdict::Yes(GroupElement { map, word })))
            }
            None => Ok(Some(Verdict::No)),
        }
    }
}

struct Dedup<S> {
    keys: HashMap<Vec<QuadCoords>, ()>,
    inexact: Vec<AffineMap<S>>,
}

impl<S> Default for Dedup<S> {
    fn default() -> Self {
        Dedup {
            keys: HashMap::new(),
            inexact: Vec::new(),
        }
    }
}

impl<S: Field> Dedup<S> {
    /// Returns true if `m` was not seen before.
    fn insert(&mut self, m: &AffineMap<S>) -> bool {
        match m.exact_key() {
            Some(k) if self.inexact.is_empty() => self.keys.insert(k, ()).is_none(),
            _ => {
                if self.inexact.iter().any(|x| x == m) {
                    return false;
                }
                self.inexact.push(m.clone());
                true
            }
        }
    }
}

/// Finds integers `z` with `Σ z_j cols[j] = rhs`, or `None` if none exist.
///
/// Clears denominators, column-reduces the integer matrix to echelon form
/// with a unimodular transform, then back-substitutes with divisibility
/// checks.
pub(crate) fn solve_integer_combination(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigInt>> {
    let rows = rhs.len();
    let m = cols.len();
    let mut lcm = BigInt::one();
    for q in cols.iter().flatten().chain(rhs.iter()) {
        lcm = lcm.lcm(q.denom());
    }
    let scale = |q: &BigRational| -> BigInt { (q * BigRational::from_integer(lcm.clone())).to_integer() };
    // h[i][j]: row i, column j
    let mut h: Vec<Vec<BigInt>> = (0..rows).map(|i| cols.iter().map(|c| scale(&c[i])).collect()).collect();
    let target: Vec<BigInt> = rhs.iter().map(scale).collect();
    let mut u: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    let swap_cols = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, a: usize, b: usize| {
        for row in h.iter_mut().chain(u.iter_mut()) {
            row.swap(a, b);
        }
    };
    let sub_col = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in h.iter_mut().chain(u.iter_mut()) {
            let t = &row[src] * q;
            row[dst] -= t;
        }
    };

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut pc = 0;
    for i in 0..rows {
        if pc == m {
            break;
        }
        loop {
            let best = (pc..m)
                .filter(|&j| !h[i][j].is_zero())
                .min_by(|&a, &b| h[i][a].abs().cmp(&h[i][b].abs()));
            let Some(b) = best else { break };
            swap_cols(&mut h, &mut u, pc, b);
            let mut done = true;
            for j in pc + 1..m {
                if h[i][j].is_zero() {
                    continue;
                }
                let q = h[i][j].div_floor(&h[i][pc]);
                sub_col(&mut h, &mut u, j, pc, &q);
                if !h[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !h[i][pc].is_zero() {
            pivots.push((i, pc));
            pc += 1;
        }
    }

    let mut residual = target;
    let mut w = vec![BigInt::zero(); m];
    let mut next = 0;
    for i in 0..rows {
        if next < pivots.len() && pivots[next].0 == i {
            let c = pivots[next].1;
            let (q, r) = residual[i].div_rem(&h[i][c]);
            if !r.is_zero() {
                return None;
            }
            for (k, row) in h.iter().enumerate() {
                let t = &row[c] * &q;
                residual[k] -= t;
            }
            w[c] = q;
            next += 1;
        } else if !residual[i].is_zero() {
            return None;
        }
    }
    Some(
        (0..m)
            .map(|i| (0..m).fold(BigInt::zero(), |acc, j| acc + &u[i][j] * &w[j]))
            .collect(),
    )
}
