//! A flat flow on the line.
//!
//! `h(x) = exp(−1/x²)` (with `h(0) = 0`) is smooth, flat at 0 and positive
//! elsewhere. Its time-one flow `ψ` fixes 0 and preserves both half-lines, so
//! the hybrid map `ψ̂` (equal to `ψ` on `x ≥ 0` and to `ψ⁻¹` on `x < 0`)
//! generates a `ℤ`-action with the same orbits. Since `ψ − id` is flat at 0,
//! no finite jet tells `ψ̂` apart from a power of `ψ`, yet no single power
//! agrees with `ψ̂` on an interval around 0.
//!
//! Everything here is numerical evidence for that mechanism. Reports say so.

use num_traits::Float;
use serde::Serialize;
use std::fmt;

/// Relative accuracy used when a caller does not choose one.
pub const DEFAULT_ACCURACY: f64 = 1e-13;

const MAX_STEPS: usize = 200_000;
const MAX_NEWTON: usize = 200;
const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("accuracy must be positive and finite")]
    BadAccuracy,
    #[error("step budget exhausted integrating from {0}")]
    StepBudget(f64),
    #[error("time equation did not converge from {0}")]
    NoConvergence(f64),
    #[error("{0} must be positive")]
    BadParameter(&'static str),
}

/// The standard flat field `exp(−1/x²)`.
pub fn flat_field<F: Float>(x: F) -> F {
    if x == F::zero() {
        F::zero()
    } else {
        (-(x * x).recip()).exp()
    }
}

/// Time-`t` flows of `x′ = h(x)` for a field `h` that vanishes only at 0.
#[derive(Clone, Copy)]
pub struct FlatFlow<F> {
    field: fn(F) -> F,
    flat_radius: F,
    accuracy: F,
}

impl<F: Float + fmt::Debug> fmt::Debug for FlatFlow<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlatFlow")
            .field("flat_radius", &self.flat_radius)
            .field("accuracy", &self.accuracy)
            .finish()
    }
}

fn lit<F: Float>(v: f64) -> F {
    F::from(v).expect("float literal")
}

impl<F: Float> FlatFlow<F> {
    /// The flow of `exp(−1/x²) ∂/∂x`. Below `|x| < 1e−3` the field is below
    /// `e^{−10⁶}` and points are returned unmoved.
    pub fn standard() -> Self {
        FlatFlow {
            field: flat_field,
            flat_radius: lit(1e-3),
            accuracy: lit(DEFAULT_ACCURACY),
        }
    }

    /// Any other field. It must be positive off 0 for the hybrid map and the
    /// quadrature integrator to make sense.
    pub fn with_field(field: fn(F) -> F, flat_radius: F) -> Self {
        FlatFlow {
            field,
            flat_radius,
            accuracy: lit(DEFAULT_ACCURACY),
        }
    }

    /// Target relative accuracy of the displacement `ψ(x) − x`. Clamped
    /// from below by a few ulps of `F`.
    pub fn with_accuracy(mut self, accuracy: F) -> Result<Self, FlowError> {
        if !(accuracy > F::zero()) || !accuracy.is_finite() {
            return Err(FlowError::BadAccuracy);
        }
        self.accuracy = accuracy;
        Ok(self)
    }

    pub fn accuracy(&self) -> F {
        self.accuracy
    }

    fn rtol(&self) -> F {
        self.accuracy.max(lit::<F>(16.0) * F::epsilon())
    }

    pub fn h(&self, x: F) -> F {
        (self.field)(x)
    }

    /// Inside the flat radius, or where `h` is subnormal: there the error
    /// scale of the integrator underflows and the displacement is below any
    /// representable step of `x`.
    fn flat(&self, x: F) -> bool {
        x.abs() < self.flat_radius || self.h(x) < F::min_positive_value()
    }

    /// Upper bound on `|ψ_t(x) − x|` for points in the flat zone.
    pub fn flat_remainder(&self, x: F, t: F) -> F {
        t.abs() * self.h(x.abs().max(self.flat_radius))
    }

    /// `ψ_t(x) − x` by an adaptive Dormand–Prince 5(4) pair applied to the
    /// displacement `u′ = t·h(x + u)`, `s ∈ [0, 1]`.
    pub fn displacement(&self, x: F, t: F) -> Result<F, FlowError> {
        if x == F::zero() || t == F::zero() || self.flat(x) {
            return Ok(F::zero());
        }
        let rtol = self.rtol();
        let atol = rtol * t.abs() * self.h(x) * lit(1e-3);
        let f = |u: F| t * self.h(x + u);
        let (mut s, mut u) = (F::zero(), F::zero());
        let mut dt: F = lit(1.0 / 16.0);
        let one = F::one();
        for _ in 0..MAX_STEPS {
            if s >= one {
                return Ok(u);
            }
            dt = dt.min(one - s);
            let k1 = f(u);
            let k2 = f(u + dt * lit::<F>(1.0 / 5.0) * k1);
            let k3 = f(u + dt * (lit::<F>(3.0 / 40.0) * k1 + lit::<F>(9.0 / 40.0) * k2));
            let k4 = f(u + dt * (lit::<F>(44.0 / 45.0) * k1 - lit::<F>(56.0 / 15.0) * k2 + lit::<F>(32.0 / 9.0) * k3));
            let k5 = f(u + dt
                * (lit::<F>(19372.0 / 6561.0) * k1 - lit::<F>(25360.0 / 2187.0) * k2 + lit::<F>(64448.0 / 6561.0) * k3
                    - lit::<F>(212.0 / 729.0) * k4));
            let k6 = f(u + dt
                * (lit::<F>(9017.0 / 3168.0) * k1 - lit::<F>(355.0 / 33.0) * k2
                    + lit::<F>(46732.0 / 5247.0) * k3
                    + lit::<F>(49.0 / 176.0) * k4
                    - lit::<F>(5103.0 / 18656.0) * k5));
            let incr = lit::<F>(35.0 / 384.0) * k1 + lit::<F>(500.0 / 1113.0) * k3 + lit::<F>(125.0 / 192.0) * k4
                - lit::<F>(2187.0 / 6784.0) * k5
                + lit::<F>(11.0 / 84.0) * k6;
            let un = u + dt * incr;
            let k7 = f(un);
            let err = (dt
                * (lit::<F>(71.0 / 57600.0) * k1 - lit::<F>(71.0 / 16695.0) * k3 + lit::<F>(71.0 / 1920.0) * k4
                    - lit::<F>(17253.0 / 339200.0) * k5
                    + lit::<F>(22.0 / 525.0) * k6
                    - lit::<F>(1.0 / 40.0) * k7))
                .abs();
            let scale = atol + rtol * u.abs().max(un.abs());
            let ratio = err / scale;
            if !ratio.is_finite() {
                dt = dt * lit(0.2);
                continue;
            }
            if ratio <= one {
                s = s + dt;
                u = un;
            }
            let grow = if ratio == F::zero() {
                lit(5.0)
            } else {
                (lit::<F>(0.9) * ratio.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            dt = dt * grow;
        }
        Err(FlowError::StepBudget(x.to_f64().unwrap_or(f64::NAN)))
    }

    /// `ψ_t(x)`.
    pub fn flow_time(&self, x: F, t: F) -> Result<F, FlowError> {
        Ok(x + self.displacement(x, t)?)
    }

    /// The time-one map `ψ`.
    pub fn flow_psi(&self, x: F) -> Result<F, FlowError> {
        self.flow_time(x, F::one())
    }

    pub fn psi_inv(&self, x: F) -> Result<F, FlowError> {
        self.flow_time(x, -F::one())
    }

    /// `ψ̂`: `ψ` on `x ≥ 0`, `ψ⁻¹` on `x < 0`.
    pub fn psi_hat(&self, x: F) -> Result<F, FlowError> {
        if x >= F::zero() {
            self.flow_psi(x)
        } else {
            self.psi_inv(x)
        }
    }

    pub fn psi_hat_inv(&self, x: F) -> Result<F, FlowError> {
        if x >= F::zero() {
            self.psi_inv(x)
        } else {
            self.flow_psi(x)
        }
    }

    /// `ψ̂ᵏ(x)` by iteration.
    pub fn psi_hat_pow(&self, x: F, k: i64) -> Result<F, FlowError> {
        let mut y = x;
        for _ in 0..k.unsigned_abs() {
            y = if k > 0 { self.psi_hat(y)? } else { self.psi_hat_inv(y)? };
        }
        Ok(y)
    }

    /// `ψ_t(x) − x` by a second method: solve `∫ₓ^{x+δ} du/h(u) = t` for `δ`
    /// with safeguarded Newton steps over adaptive Simpson quadrature.
    pub fn displacement_by_quadrature(&self, x: F, t: F) -> Result<F, FlowError> {
        if x == F::zero() || t == F::zero() || self.flat(x) {
            return Ok(F::zero());
        }
        let fail = || FlowError::NoConvergence(x.to_f64().unwrap_or(f64::NAN));
        let rtol = self.rtol();
        let travel = |d: F| -> F {
            let g = |s: F| (self.h(x + s)).recip();
            simpson(&g, F::zero(), d, rtol * lit(0.01))
        };
        // bracket: travel(0) = 0, travel(hi) ≥ |t| in the direction of t
        let dir = t.signum();
        let want = t.abs();
        let mut lo = F::zero();
        let mut hi = t * self.h(x);
        let mut found = false;
        for _ in 0..MAX_NEWTON {
            if (x + hi).signum() != x.signum() {
                // a trajectory never crosses 0; approach it instead
                hi = -x * (F::one() - lit::<F>(0.5).powi(8));
                lo = F::zero();
            }
            let v = travel(hi).abs();
            if !(v < want) {
                found = true;
                break;
            }
            lo = hi;
            hi = hi + hi;
        }
        if !found {
            return Err(fail());
        }
        let mut d = lo + (hi - lo) * lit(0.5);
        for _ in 0..MAX_NEWTON {
            let r = travel(d).abs() - want;
            if r > F::zero() {
                hi = d;
            } else {
                lo = d;
            }
            let slope = self.h(x + d).recip();
            let mut next = d - dir * r / slope;
            let inside = (next - lo) * (next - hi) < F::zero();
            if !next.is_finite() || !inside {
                next = lo + (hi - lo) * lit(0.5);
            }
            let tol = rtol * next.abs() * lit(0.1);
            if (next - d).abs() <= tol || (hi - lo).abs() <= tol {
                return Ok(next);
            }
            d = next;
        }
        Err(fail())
    }
}

fn simpson<F: Float>(g: &impl Fn(F) -> F, a: F, b: F, rtol: F) -> F {
    let half: F = lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = (b - a) / lit(6.0) * (fa + lit::<F>(4.0) * fm + fb);
    simpson_step(g, a, b, fa, fm, fb, whole, rtol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Float>(g: &impl Fn(F) -> F, a: F, b: F, fa: F, fm: F, fb: F, whole: F, rtol: F, depth: usize) -> F {
    let half: F = lit(0.5);
    let m = (a + b) * half;
    let (lm, rm) = ((a + m) * half, (m + b) * half);
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / lit(6.0) * (fa + lit::<F>(4.0) * flm + fm);
    let right = (b - m) / lit(6.0) * (fm + lit::<F>(4.0) * frm + fb);
    let both = left + right;
    let delta = both - whole;
    if !both.is_finite() {
        return both;
    }
    if depth == 0 || delta.abs() <= lit::<F>(15.0) * rtol * both.abs() {
        return both + delta / lit(15.0);
    }
    simpson_step(g, a, m, fa, flm, fm, left, rtol, depth - 1) + simpson_step(g, m, b, fm, frm, fb, right, rtol, depth - 1)
}

/// One named numerical assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">"`: how `value` must relate to `bound`.
    pub relation: String,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=".into(),
            bound,
            pass: value <= bound,
        }
    }

    /// Passes when `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">".into(),
            bound,
            pass: value > bound,
        }
    }
}

/// A list of checks, plus a note on what they do and do not show.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    pub evidence: String,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: &str, evidence: &str) -> Self {
        Report {
            title: title.into(),
            evidence: evidence.into(),
            checks: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Central difference weights for the `k`-th derivative, offsets `−m..=m`.
fn stencil(order: usize) -> &'static [f64] {
    match order {
        1 => &[-0.5, 0.0, 0.5],
        2 => &[1.0, -2.0, 1.0],
        3 => &[-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => &[1.0, -4.0, 6.0, -4.0, 1.0],
        5 => &[-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5],
        6 => &[1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0],
        _ => &[],
    }
}

pub const MAX_JET_ORDER: usize = 6;

impl<F: Float> FlatFlow<F> {
    /// Central difference estimate of `dᵏ/dxᵏ (ψ_t − id)` at 0 with step
    /// `scale`, and the integrator noise carried into it.
    pub fn jet_estimate(&self, order: usize, scale: F, t: F) -> Result<(f64, f64), FlowError> {
        let w = stencil(order);
        if w.is_empty() {
            return Err(FlowError::BadParameter("order in 1..=6"));
        }
        let m = (w.len() / 2) as i64;
        let (mut sum, mut noise) = (0.0, 0.0);
        for (i, c) in w.iter().enumerate() {
            let x = scale * lit(((i as i64) - m) as f64);
            let g = self.displacement(x, t)?.to_f64().unwrap_or(f64::NAN);
            sum += c * g;
            noise += c.abs() * g.abs() * self.rtol().to_f64().unwrap_or(0.0);
        }
        let hk = scale.to_f64().unwrap_or(f64::NAN).powi(order as i32);
        Ok((sum / hk, noise / hk))
    }

    /// Jets of `ψ − id` at 0 of orders `1..=order` against `tol`, plus the
    /// displacement envelope at `±scale` and `±2·scale`.
    pub fn jet_flatness_check(&self, order: usize, scale: F, tol: f64) -> Result<Report, FlowError> {
        if order == 0 || order > MAX_JET_ORDER {
            return Err(FlowError::BadParameter("order in 1..=6"));
        }
        if !(scale > F::zero()) {
            return Err(FlowError::BadParameter("scale"));
        }
        let mut r = Report::new(
            "jet flatness at 0",
            "finite differences of psi - id at 0; consistent with a flat jet, not a proof of flatness",
        );
        for k in 1..=order {
            let (est, noise) = self.jet_estimate(k, scale, F::one())?;
            r.checks.push(Check::at_most(format!("jet_order_{k}"), est.abs(), tol + noise));
        }
        let two: F = lit(2.0);
        let pts = [-two * scale, -scale, scale, two * scale];
        r.checks.extend(self.envelope_checks(&pts)?);
        Ok(r)
    }

    /// `|ψ(x) − x| ≤ sup h` along the trajectory. For a field increasing in
    /// `|x|` the supremum sits at an endpoint.
    pub fn envelope_checks(&self, points: &[F]) -> Result<Vec<Check>, FlowError> {
        let mut out = Vec::new();
        for &x in points {
            // the displacement itself, not y − x, which rounds at |x|
            let u = self.displacement(x, F::one())?;
            let sup = self.h(x).max(self.h(x + u)).max(self.flat_remainder(x, F::one()));
            let d = u.abs().to_f64().unwrap_or(f64::NAN);
            let bound = sup.to_f64().unwrap_or(f64::NAN) * (1.0 + 1e-9);
            out.push(Check::at_most(format!("envelope_at_{}", fmt_f(x)), d, bound));
        }
        Ok(out)
    }

    /// `{ψ̂ᵏ(x)}` against `{ψᵏ(x)}` for `x ≥ 0` and `{ψ⁻ᵏ(x)}` for `x < 0`,
    /// `|k| ≤ k_range`, as sorted sets.
    pub fn orbit_coincidence(&self, samples: &[F], k_range: u32, tol: f64) -> Result<Report, FlowError> {
        let mut r = Report::new(
            "orbit coincidence of psi and psi-hat",
            "finite stretches of orbits agree numerically; the full orbits agree by construction",
        );
        let mut worst = 0.0f64;
        let k = k_range as i64;
        for &x in samples {
            let mut hat = Vec::new();
            let mut flow = Vec::new();
            for j in -k..=k {
                hat.push(self.psi_hat_pow(x, j)?);
                let t: F = lit(if x >= F::zero() { j as f64 } else { -(j as f64) });
                flow.push(self.flow_time(x, t)?);
            }
            let pointwise = hat
                .iter()
                .zip(&flow)
                .map(|(a, b)| (*a - *b).abs().to_f64().unwrap_or(f64::NAN))
                .fold(0.0, f64::max);
            hat.sort_by(|a, b| a.partial_cmp(b).expect("finite orbit"));
            flow.sort_by(|a, b| a.partial_cmp(b).expect("finite orbit"));
            let as_sets = hat
                .iter()
                .zip(&flow)
                .map(|(a, b)| (*a - *b).abs().to_f64().unwrap_or(f64::NAN))
                .fold(0.0, f64::max);
            worst = worst.max(pointwise).max(as_sets);
        }
        r.checks.push(Check::at_most("max_discrepancy", worst, tol));
        Ok(r)
    }

    /// Tries to match `ψ̂` on `(a, b)` with a single `ψᵏ`, `|k| ≤ k_bound`.
    pub fn recovery_failure_demo(&self, a: F, b: F, k_bound: u32, samples: usize, tol: f64) -> Result<RecoveryDemo, FlowError> {
        if !(a < F::zero() && F::zero() < b) {
            return Err(FlowError::BadParameter("interval around 0"));
        }
        let n = samples.max(2);
        let mut xs: Vec<F> = (1..=n).map(|i| a + (b - a) * lit((i as f64) / ((n + 1) as f64))).collect();
        let probe: F = lit(0.4);
        for p in [-probe, probe] {
            if a < p && p < b {
                xs.push(p);
            }
        }
        xs.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
        let hat: Vec<F> = xs.iter().map(|&x| self.psi_hat(x)).collect::<Result<_, _>>()?;
        let k = k_bound as i64;
        let mut candidates = Vec::new();
        for j in -k..=k {
            let t: F = lit(j as f64);
            let (mut neg, mut pos) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
            for (&x, &y) in xs.iter().zip(&hat) {
                let d = (self.flow_time(x, t)? - y).abs().to_f64().unwrap_or(f64::NAN);
                let side = if x < F::zero() { &mut neg } else { &mut pos };
                if d > side.0 {
                    *side = (d, x.to_f64().unwrap_or(f64::NAN));
                }
            }
            let (residual, witness) = if neg.0 >= pos.0 { neg } else { pos };
            let at_probe = |x: F| -> Result<f64, FlowError> {
                Ok((self.flow_time(x, t)? - self.psi_hat(x)?).abs().to_f64().unwrap_or(f64::NAN))
            };
            let probe_x = if j > 0 { -probe } else { probe };
            let probe_residual = if j == 0 { at_probe(-probe)?.max(at_probe(probe)?) } else { at_probe(probe_x)? };
            candidates.push(Candidate {
                k: j,
                residual,
                negative_side: neg.0,
                positive_side: pos.0,
                witness,
                probe: probe_x.to_f64().unwrap_or(f64::NAN),
                probe_residual,
            });
        }
        let best = candidates
            .iter()
            .min_by(|p, q| p.residual.partial_cmp(&q.residual).expect("finite residuals"))
            .cloned()
            .expect("at least one candidate");
        let matched = candidates.iter().any(|c| c.residual <= tol);

        let mut report = Report::new(
            "affine-germ style recovery of psi-hat",
            "no single power of psi matches psi-hat on the sampled interval; evidence for the mechanism, not a proof about all bibundles",
        );
        report.checks.push(Check::above("no_single_candidate_matches", best.residual, tol));
        report.checks.push(Check::above("best_candidate_residual", best.residual, 1e-3));
        report.checks.push(Check::above("best_candidate_probe_residual", best.probe_residual, 1e-3));
        let one = candidates.iter().find(|c| c.k == 1).expect("k=1 is a candidate when k_bound ≥ 1");
        let minus = candidates.iter().find(|c| c.k == -1).expect("k=-1 is a candidate");
        report.checks.push(Check::at_most("matches_psi_on_nonnegative_side", one.positive_side, tol));
        report.checks.push(Check::at_most("matches_psi_inverse_on_negative_side", minus.negative_side, tol));
        let far: F = lit(0.7);
        let id_far = (self.flow_psi(far)? - far).abs().to_f64().unwrap_or(f64::NAN);
        report.checks.push(Check::above("identity_residual_at_0.7", id_far, 1e-3));
        // every power of psi has the same numerical jet at 0 as the identity;
        // at stencil 0.05 the displacements are below e^{-100}
        let mut jet = 0.0f64;
        let mut noise = 0.0f64;
        for j in -k..=k {
            for order in 1..=4 {
                let (e, n) = self.jet_estimate(order, lit(0.05), lit(j as f64))?;
                jet = jet.max(e.abs());
                noise = noise.max(n);
            }
        }
        report.checks.push(Check::at_most("candidate_jets_indistinguishable", jet, 1e-6 + noise));
        Ok(RecoveryDemo {
            interval: (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)),
            outcome: if matched { "match" } else { "no_match" }.into(),
            best,
            candidates,
            report,
        })
    }
}

/// Residuals of one candidate `ψᵏ` against `ψ̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub k: i64,
    /// Max residual over all samples.
    pub residual: f64,
    pub negative_side: f64,
    pub positive_side: f64,
    /// Sample where `residual` is attained.
    pub witness: f64,
    /// Residual at the fixed probe `∓0.4` on the side where `ψᵏ` must fail.
    pub probe: f64,
    pub probe_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryDemo {
    pub interval: (f64, f64),
    pub outcome: String,
    pub best: Candidate,
    pub candidates: Vec<Candidate>,
    pub report: Report,
}

fn fmt_f<F: Float>(x: F) -> String {
    format!("{}", x.to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow() -> FlatFlow<f64> {
        FlatFlow::standard()
    }

    #[test]
    fn fixed_point_and_signs() {
        let f = flow();
        assert_eq!(f.flow_psi(0.0).unwrap(), 0.0);
        let y = f.flow_psi(-1.0).unwrap();
        assert!(-1.0 < y && y < 0.0);
        assert!(f.flow_psi(0.5).unwrap() > 0.5);
        let y1 = f.flow_psi(1.0).unwrap();
        assert!(1.0 < y1 && y1 < 1.0 + f.h(y1));
    }

    #[test]
    fn integrators_agree() {
        let f = flow();
        for &x in &[-2.0, -1.0, -0.4, -0.2, 0.2, 0.4, 0.7, 1.0, 3.0] {
            for &t in &[1.0, -1.0, 2.0] {
                let a = f.displacement(x, t).unwrap();
                let b = f.displacement_by_quadrature(x, t).unwrap();
                assert!((a - b).abs() <= 1e-10, "x={x} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn envelope_at_a_fifth() {
        let d = flow().displacement(0.2, 1.0).unwrap();
        assert!(d > 0.0 && d <= 1.4e-11, "{d}");
    }

    #[test]
    fn jets_flat_through_order_four() {
        let r = flow().jet_flatness_check(4, 0.1, 1e-6).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(flow().jet_flatness_check(7, 0.1, 1e-6).is_err());
    }

    #[test]
    fn hybrid_orbits_match() {
        let r = flow().orbit_coincidence(&[-1.0, 0.0, 0.3, 1.0], 3, 1e-9).unwrap();
        assert!(r.pass(), "{r:?}");
        let f = flow();
        assert_eq!(f.psi_hat_pow(-1.0, 2).unwrap(), f.psi_inv(f.psi_inv(-1.0).unwrap()).unwrap());
    }

    #[test]
    fn recovery_fails_on_both_sides() {
        let demo = flow().recovery_failure_demo(-0.5, 0.5, 3, 40, 1e-9).unwrap();
        assert_eq!(demo.outcome, "no_match");
        assert!(demo.report.pass(), "{:?}", demo.report);
    }

    #[test]
    fn single_precision_runs() {
        let f = FlatFlow::<f32>::standard();
        let y = f.flow_psi(1.0f32).unwrap();
        let z = FlatFlow::<f64>::standard().flow_psi(1.0).unwrap();
        assert!((y as f64 - z).abs() < 1e-5);
    }
}
