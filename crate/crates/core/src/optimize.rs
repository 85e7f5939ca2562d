//! Multi-start local ascent over the unit sphere of generator-pair
//! coefficients.
//!
//! The mixed-state measure maximizes a singular-value objective over complex
//! coefficient vectors `z` with `sum |z_ab|^2 = 1`. The objective is
//! non-concave, so a single ascent is not enough; each restart climbs from an
//! independent random point and the best value wins. Restart `k` draws its
//! start from `seed + k`, and ties resolve to the lowest restart index, so
//! results are reproducible and non-decreasing in the number of restarts.
//!
//! Two gradient schemes drive the climb: an exact one assembled from the
//! singular vectors of the current iterate (one decomposition per step), and
//! central differences in the ambient coordinates (`4m` objective calls per
//! step). They agree wherever the singular values are simple; the spectral
//! scheme is the default because it converges in far fewer objective
//! evaluations.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::state::C64;

/// How the ascent obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientScheme {
    /// Exact gradient from the singular vectors of the current iterate;
    /// falls back to central differences if the objective provides none.
    Spectral,
    /// Central differences with step [`OptimizerConfig::grad_step`].
    CentralDiff,
}

/// Knobs for the multi-start ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Independent ascent starts.
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iter: usize,
    /// An ascent counts as converged once the objective improves by less
    /// than this over `stall_window` consecutive iterations.
    pub tol: f64,
    pub stall_window: usize,
    /// Central-difference step for the numerical gradient.
    pub grad_step: f64,
    pub gradient: GradientScheme,
    /// Base seed; restart `k` uses `seed + k`.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 1000,
            tol: 1e-10,
            stall_window: 10,
            grad_step: 1e-6,
            gradient: GradientScheme::Spectral,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// A point on the complex unit sphere of generator-pair coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerPoint {
    coefficients: Vec<C64>,
}

impl OptimizerPoint {
    /// Normalizes the coefficients onto the unit sphere.
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Invalid("optimizer point cannot be empty".into()));
        }
        let norm = norm(&coefficients);
        if norm == 0.0 {
            return Err(Error::Invalid(
                "optimizer point cannot be the zero vector".into(),
            ));
        }
        let coefficients = coefficients
            .into_iter()
            .map(|z| z / C64::new(norm, 0.0))
            .collect();
        Ok(Self { coefficients })
    }

    /// The single admissible point (up to phase) when there is one
    /// generator pair.
    pub fn single() -> Self {
        Self {
            coefficients: vec![C64::ONE],
        }
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// An objective on the complex coefficient sphere. Values must be invariant
/// under a global phase of the argument (true of singular-value objectives).
pub trait SphereObjective {
    /// Number of complex coefficients.
    fn dim(&self) -> usize;

    /// Objective at a unit-norm point.
    fn value(&self, z: &[C64]) -> f64;

    /// Gradient in the ambient real coordinates `(Re z_0, Im z_0, ...)`,
    /// when the objective can supply one analytically.
    fn gradient(&self, _z: &[C64]) -> Option<Vec<f64>> {
        None
    }

    /// A problem-specific jump proposal (for instance a retraction onto a
    /// seam the maximum is known to favor). The optimizer evaluates it once
    /// per iteration and keeps it only if it improves the objective.
    fn refine(&self, _z: &[C64]) -> Option<Vec<C64>> {
        None
    }
}

/// Result of a multi-start maximization.
#[derive(Debug, Clone)]
pub struct OptimizerOutcome {
    /// Best objective value found (before any clamping by the caller).
    pub objective: f64,
    /// Whether the restart that produced `objective` stalled out before its
    /// iteration cap. Other restarts may keep crawling below the reported
    /// maximum without affecting it.
    pub converged: bool,
    /// The coefficients achieving `objective`.
    pub point: Vec<C64>,
}

fn norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(z: &[C64]) -> Vec<C64> {
    let n = norm(z);
    z.iter().map(|c| c / C64::new(n, 0.0)).collect()
}

/// Maximizes the objective over the complex unit sphere.
pub fn maximize_over_sphere<O: SphereObjective>(
    objective: &O,
    cfg: &OptimizerConfig,
) -> OptimizerOutcome {
    let m = objective.dim();
    assert!(m >= 1, "objective needs at least one coefficient");
    if m == 1 {
        // |z| = 1 and the objective ignores the phase.
        return OptimizerOutcome {
            objective: objective.value(&[C64::ONE]),
            converged: true,
            point: vec![C64::ONE],
        };
    }
    let restarts = cfg.restarts.max(1);
    let mut best = f64::NEG_INFINITY;
    let mut best_converged = false;
    let mut best_point = vec![C64::ONE; m];
    for k in 0..restarts {
        let mut rng = StdRng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        let start: Vec<C64> = (0..m)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        let (point, value, ok) = ascend(objective, normalized(&start), cfg);
        if value > best {
            best = value;
            best_converged = ok;
            best_point = point;
        }
    }
    OptimizerOutcome {
        objective: best,
        converged: best_converged,
        point: best_point,
    }
}

fn central_diff_gradient<O: SphereObjective>(objective: &O, z: &[C64], h: f64) -> Vec<f64> {
    let m = z.len();
    let mut grad = vec![0.0f64; 2 * m];
    let mut probe = z.to_vec();
    for j in 0..m {
        for part in 0..2 {
            let delta = if part == 0 {
                C64::new(h, 0.0)
            } else {
                C64::new(0.0, h)
            };
            probe.copy_from_slice(z);
            probe[j] += delta;
            let fp = objective.value(&normalized(&probe));
            probe[j] -= delta + delta;
            let fm = objective.value(&normalized(&probe));
            grad[2 * j + part] = (fp - fm) / (2.0 * h);
        }
    }
    grad
}

/// Removes the radial component so the direction lives in the sphere's
/// tangent space at the unit-norm point `z`.
fn project_tangent(grad: &mut [f64], z: &[C64]) {
    let mut radial = 0.0;
    for (j, c) in z.iter().enumerate() {
        radial += grad[2 * j] * c.re + grad[2 * j + 1] * c.im;
    }
    for (j, c) in z.iter().enumerate() {
        grad[2 * j] -= radial * c.re;
        grad[2 * j + 1] -= radial * c.im;
    }
}

/// Hill-climbs from `z` (unit norm); returns the best value and whether the
/// stall criterion fired before the iteration cap.
///
/// The climb is a BFGS quasi-Newton ascent in the ambient coordinates with
/// gradients projected onto the sphere tangent. Curvature accumulation is
/// what lets it traverse the nearly flat ridges these objectives develop
/// along their singular seams; plain gradient steps stall there with the
/// objective still 1e-4 short. The curvature model resets whenever a step
/// fails, so kinks degrade it back to steepest ascent instead of breaking it.
fn ascend<O: SphereObjective>(
    objective: &O,
    mut z: Vec<C64>,
    cfg: &OptimizerConfig,
) -> (Vec<C64>, f64, bool) {
    let dim = 2 * z.len();
    let mut best = objective.value(&z);
    let mut step = 0.25;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_iter);
    let mut inv_hessian = nalgebra::DMatrix::<f64>::identity(dim, dim);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (w, grad) at last accept

    for iter in 0..cfg.max_iter {
        if let Some(proposal) = objective.refine(&z) {
            let proposal = normalized(&proposal);
            let fp = objective.value(&proposal);
            if fp > best {
                z = proposal;
                best = fp;
                prev = None;
            }
        }

        let (mut grad, analytic) = match cfg.gradient {
            GradientScheme::Spectral => match objective.gradient(&z) {
                Some(g) => (g, true),
                None => (central_diff_gradient(objective, &z, cfg.grad_step), false),
            },
            GradientScheme::CentralDiff => {
                (central_diff_gradient(objective, &z, cfg.grad_step), false)
            }
        };
        project_tangent(&mut grad, &z);
        let w = flatten(&z);

        if let Some((pw, pg)) = &prev {
            // BFGS update for minimizing -f: s = w - pw, y = pg - g.
            let s: Vec<f64> = w.iter().zip(pw).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = pg.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let s_norm_sq: f64 = s.iter().map(|a| a * a).sum();
            if sy > 1e-12 * s_norm_sq.max(1e-300) {
                bfgs_update(&mut inv_hessian, &s, &y);
            }
        }

        let mut dir = apply(&inv_hessian, &grad);
        let along: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if along <= 0.0 {
            inv_hessian = nalgebra::DMatrix::identity(dim, dim);
            dir.copy_from_slice(&grad);
        }

        let mut improved = line_search(objective, &mut z, &dir, &mut best, &mut step);
        if !improved && analytic {
            // The analytic direction can be a poor subgradient on a kink;
            // difference quotients follow the kink, so give them one try.
            let mut retry = central_diff_gradient(objective, &z, cfg.grad_step);
            project_tangent(&mut retry, &z);
            improved = line_search(objective, &mut z, &retry, &mut best, &mut step);
        }
        if improved {
            prev = Some((w, grad));
        } else {
            step = (step * 0.25).max(1e-10);
            inv_hessian = nalgebra::DMatrix::identity(dim, dim);
            prev = None;
        }

        history.push(best);
        if iter + 1 >= cfg.stall_window {
            let before = history[iter + 1 - cfg.stall_window];
            if best - before < cfg.tol {
                return (z, best, true);
            }
        }
    }
    (z, best, false)
}

fn flatten(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn apply(m: &nalgebra::DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let x = nalgebra::DVector::from_column_slice(v);
    (m * x).iter().copied().collect()
}

/// Inverse-Hessian BFGS update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`
/// with `r = 1/(s^T y)`.
fn bfgs_update(h: &mut nalgebra::DMatrix<f64>, s: &[f64], y: &[f64]) {
    let n = s.len();
    let rho = 1.0 / s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let hy = apply(h, y);
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] +=
                -rho * (s[i] * hy[j] + hy[i] * s[j]) + rho * (1.0 + rho * yhy) * s[i] * s[j];
        }
    }
}

/// Probes along `grad` with geometric backtracking from the remembered step
/// size; accepts the first improvement and grows the step.
///
/// Candidates are passed through the objective's `refine` retraction before
/// being scored: a step along a seam pays a second-order penalty transverse
/// to it, and judging the raw point would reject tangent progress the
/// retraction recovers.
fn line_search<O: SphereObjective>(
    objective: &O,
    z: &mut Vec<C64>,
    grad: &[f64],
    best: &mut f64,
    step: &mut f64,
) -> bool {
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gnorm < 1e-12 {
        return false;
    }
    let dir: Vec<C64> = (0..z.len())
        .map(|j| C64::new(grad[2 * j] / gnorm, grad[2 * j + 1] / gnorm))
        .collect();
    let mut s = *step;
    for _ in 0..40 {
        let cand: Vec<C64> = z.iter().zip(&dir).map(|(a, d)| a + d * s).collect();
        let mut cand = normalized(&cand);
        if let Some(snapped) = objective.refine(&cand) {
            let snapped = normalized(&snapped);
            if objective.value(&snapped) > objective.value(&cand) {
                cand = snapped;
            }
        }
        let fc = objective.value(&cand);
        if fc > *best {
            *z = cand;
            *best = fc;
            *step = (s * 2.0).min(1.0);
            return true;
        }
        s *= 0.5;
        if s < 1e-13 {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    /// |<c, z>| with an optional analytic gradient; maximum over the unit
    /// sphere is |c|.
    struct Linear {
        c: Vec<C64>,
        analytic: bool,
    }

    impl SphereObjective for Linear {
        fn dim(&self) -> usize {
            self.c.len()
        }

        fn value(&self, z: &[C64]) -> f64 {
            z.iter()
                .zip(&self.c)
                .map(|(zi, ci)| zi * ci)
                .sum::<C64>()
                .norm()
        }

        fn gradient(&self, z: &[C64]) -> Option<Vec<f64>> {
            if !self.analytic {
                return None;
            }
            let s: C64 = z.iter().zip(&self.c).map(|(zi, ci)| zi * ci).sum();
            let n = s.norm();
            if n < 1e-300 {
                return Some(vec![0.0; 2 * self.c.len()]);
            }
            // d|s|/dz_j parts: Re and -Im of (conj(s)/|s|) c_j.
            let u = s.conj() / C64::new(n, 0.0);
            Some(
                self.c
                    .iter()
                    .flat_map(|cj| {
                        let t = u * cj;
                        [t.re, -t.im]
                    })
                    .collect(),
            )
        }
    }

    fn test_vector() -> Vec<C64> {
        vec![
            C64::new(0.3, -0.4),
            C64::new(-0.1, 0.9),
            C64::new(0.5, 0.2),
            C64::new(0.0, -0.7),
        ]
    }

    #[test]
    fn finds_linear_maximum() {
        let c = test_vector();
        let target = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let cfg = OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        };
        for analytic in [false, true] {
            let out = maximize_over_sphere(
                &Linear {
                    c: c.clone(),
                    analytic,
                },
                &cfg,
            );
            assert!(out.converged);
            assert!(
                (out.objective - target).abs() < 1e-8,
                "analytic={analytic}: found {} expected {target}",
                out.objective
            );
        }
    }

    #[test]
    fn gradient_schemes_agree() {
        let c = test_vector();
        let obj = Linear { c, analytic: true };
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let z = normalized(
                &(0..obj.dim())
                    .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect::<Vec<_>>(),
            );
            let mut a = obj.gradient(&z).unwrap();
            let mut n = central_diff_gradient(&obj, &z, 1e-6);
            project_tangent(&mut a, &z);
            project_tangent(&mut n, &z);
            for (x, y) in a.iter().zip(&n) {
                assert!((x - y).abs() < 1e-6, "gradient mismatch: {x} vs {y}");
            }
        }
    }

    #[test]
    fn single_coefficient_skips_search() {
        struct Fixed;
        impl SphereObjective for Fixed {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, z: &[C64]) -> f64 {
                z[0].norm() * 0.75
            }
        }
        let out = maximize_over_sphere(&Fixed, &OptimizerConfig::default());
        assert!(out.converged);
        assert!((out.objective - 0.75).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_monotone_in_restarts() {
        let c = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-0.5, 0.5)];
        let obj = Linear { c, analytic: false };
        let mk = |restarts| OptimizerConfig {
            restarts,
            ..OptimizerConfig::default()
        };
        let f1 = maximize_over_sphere(&obj, &mk(3));
        let f2 = maximize_over_sphere(&obj, &mk(3));
        assert_eq!(f1.objective, f2.objective);

        let mut prev = f64::NEG_INFINITY;
        for r in 1..=6 {
            let out = maximize_over_sphere(&obj, &mk(r));
            assert!(out.objective >= prev);
            prev = out.objective;
        }
    }

    #[test]
    fn point_normalizes() {
        let p = OptimizerPoint::new(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        let n: f64 = p.coefficients().iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(OptimizerPoint::new(vec![]).is_err());
        assert!(OptimizerPoint::new(vec![C64::ZERO]).is_err());
    }
}
