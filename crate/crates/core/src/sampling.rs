//! Deterministic sample points in open boxes.
//!
//! Coordinates are rational, so samples of exact boxes stay exact. Unbounded
//! sides are sampled within a window of width [`UNBOUNDED_WINDOW`] next to the
//! finite endpoint (or around 0).

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::Point;
use crate::model::{Endpoint, ModelError, OpenBox, OpenBoxSet};
use crate::scalar::Field;

/// Default number of samples per box.
pub const DEFAULT_SAMPLES: usize = 100;
pub const UNBOUNDED_WINDOW: i64 = 10;

const GRID: i64 = 1 << 20;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A rational in `(0, 1)` on a fine dyadic-free grid.
    fn unit<S: Field>(&mut self) -> S {
        let k: i64 = self.rng.gen_range(1..GRID);
        S::from_rational(&BigRational::new(BigInt::from(k), BigInt::from(GRID)))
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn point_in_box<S: Field>(&mut self, b: &OpenBox<S>) -> Result<Point<S>, ModelError> {
        let w = S::from_i64(UNBOUNDED_WINDOW);
        let mut p = Vec::with_capacity(b.dim());
        for iv in b.intervals() {
            let u: S = self.unit();
            let x = match (iv.lo(), iv.hi()) {
                (Endpoint::Finite(a), Endpoint::Finite(c)) => a.try_add(&c.try_sub(a)?.try_mul(&u)?)?,
                (Endpoint::Finite(a), _) => a.try_add(&w.try_mul(&u)?)?,
                (_, Endpoint::Finite(c)) => c.try_sub(&w.try_mul(&u)?)?,
                _ => w.try_mul(&u)?.try_sub(&S::from_i64(UNBOUNDED_WINDOW / 2))?,
            };
            p.push(x);
        }
        Ok(p)
    }

    /// `count` points per box of `set`.
    pub fn points_in_set<S: Field>(&mut self, set: &OpenBoxSet<S>, count: usize) -> Result<Vec<Point<S>>, ModelError> {
        let mut out = Vec::new();
        for b in set.boxes() {
            for _ in 0..count {
                out.push(self.point_in_box(b)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn samples_are_inside_and_reproducible() {
        let set = OpenBoxSet::interval(Scalar::int(0), "sqrt(2)".parse().unwrap())
            .unwrap()
            .union(&OpenBoxSet::full(1));
        let a = Sampler::new(7).points_in_set(&set, 50).unwrap();
        let b = Sampler::new(7).points_in_set(&set, 50).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        for p in &a {
            assert!(set.contains(p).unwrap());
        }
        assert!(a[..50].iter().all(|p| set.boxes()[0].contains(p).unwrap()));
    }
}
