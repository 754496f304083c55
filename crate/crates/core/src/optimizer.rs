//! Numerical max-min search on Stiefel manifolds.
//!
//! The minimum squared distance is smoothed by the softmin
//! `f_β(X) = -(1/β) log Σ_{i<j} exp(-β ‖X_i - X_j‖²)` and ascended by projected
//! gradient steps with a QR retraction and Armijo backtracking, while `β`
//! grows geometrically. Each restart draws its own stream from the master
//! seed, so restarts are independent and order-insensitive.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{ratio_to, simplex_bound_sq};
use crate::error::{Error, Result};
use crate::numkernel::{FieldTag, Matrix, StiefelCode, StiefelPoint};
use crate::scalar::Real;
use crate::verifier::{certify_default, CodeReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Iteration budget per restart, shared across the β schedule.
    pub max_iters: usize,
    pub seed: u64,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Multiplicative growth of β per epoch.
    pub beta_growth: f64,
    /// Initial (and largest) step length.
    pub step_size: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Stop an epoch once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    pub distance_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 16,
            max_iters: 2000,
            seed: 0,
            beta_start: 4.0,
            beta_end: 4096.0,
            beta_growth: 2.0,
            step_size: 0.5,
            backtrack: 0.5,
            armijo: 1e-4,
            max_halvings: 30,
            grad_tol: 1e-10,
            distance_tol: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidParameter(format!("optimizer config: {s}")));
        if self.restarts == 0 || self.max_iters == 0 {
            return bad("restarts and max_iters must be positive");
        }
        if !(self.beta_start > 0.0 && self.beta_start <= self.beta_end) {
            return bad("need 0 < beta_start <= beta_end");
        }
        if !(self.beta_growth > 1.0) {
            return bad("beta_growth must exceed 1");
        }
        if !(self.step_size > 0.0 && self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("need step_size > 0 and 0 < backtrack < 1");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo constant must lie in (0, 1)");
        }
        if !(self.grad_tol > 0.0 && self.distance_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// The β values of successive epochs, ending exactly at `beta_end`.
    pub fn beta_schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut beta = self.beta_start;
        while beta < self.beta_end {
            out.push(beta);
            beta *= self.beta_growth;
        }
        out.push(self.beta_end);
        out
    }
}

/// Deterministic generator for restart `index` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Haar-distributed point: Gaussian entries, then QR with positive diagonal.
pub fn random_stiefel<T: Real, R: rand::Rng + ?Sized>(
    field: FieldTag,
    d: usize,
    r: usize,
    rng: &mut R,
) -> Result<StiefelPoint<T>>
where
    StandardNormal: Distribution<T>,
{
    if r < 1 || d < r {
        return Err(Error::InvalidParameter(format!("need d >= r >= 1, got d={d}, r={r}")));
    }
    loop {
        let g = Matrix::from_fn(d, r, |_, _| {
            let re: T = StandardNormal.sample(rng);
            let im = match field {
                FieldTag::R => T::zero(),
                FieldTag::C => StandardNormal.sample(rng),
            };
            Complex::new(re, im)
        });
        // a rank-deficient draw has probability zero; redraw if it happens
        if let Ok(q) = g.orthonormalize_columns() {
            return StiefelPoint::new_unchecked(field, q);
        }
    }
}

/// Softmin value and Riemannian gradient at a configuration.
struct Evaluation<T> {
    value: T,
    grads: Vec<Matrix<T>>,
    grad_norm_sq: T,
}

fn pair_sq<T: Real>(xs: &[Matrix<T>]) -> Vec<(usize, usize, T)> {
    let mut out = Vec::with_capacity(xs.len() * (xs.len() - 1) / 2);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            out.push((i, j, xs[i].sub(&xs[j]).expect("shared shape").fro_norm_sq()));
        }
    }
    out
}

/// `-(1/β) log Σ exp(-β D_ij)`, shifted by the minimum for stability.
pub fn softmin_objective<T: Real>(xs: &[Matrix<T>], beta: T) -> T {
    let pairs = pair_sq(xs);
    let m = pairs.iter().map(|p| p.2).fold(T::infinity(), T::min);
    let s: T = pairs.iter().map(|p| (-(beta) * (p.2 - m)).exp()).sum();
    m - s.ln() / beta
}

/// `G - X herm(X* G)`.
pub fn project_tangent<T: Real>(x: &Matrix<T>, g: &Matrix<T>) -> Matrix<T> {
    let a = x.adjoint_mul(g).expect("compatible");
    let half = T::of(0.5);
    let herm = a.add(&a.adjoint()).expect("square").scale_real(half);
    g.sub(&x.matmul(&herm).expect("compatible")).expect("same shape")
}

/// `qf(X + V)`.
pub fn retract<T: Real>(x: &Matrix<T>, v: &Matrix<T>) -> Result<Matrix<T>> {
    x.add(v)?.orthonormalize_columns()
}

fn evaluate<T: Real>(xs: &[Matrix<T>], beta: T) -> Evaluation<T> {
    let pairs = pair_sq(xs);
    let m = pairs.iter().map(|p| p.2).fold(T::infinity(), T::min);
    let weights: Vec<T> = pairs.iter().map(|p| (-(beta) * (p.2 - m)).exp()).collect();
    let s: T = weights.iter().copied().sum();
    let value = m - s.ln() / beta;
    let (d, r) = xs[0].shape();
    let mut egrad = vec![Matrix::zeros(d, r); xs.len()];
    let two = T::of(2.0);
    for (&(i, j, _), w) in pairs.iter().zip(&weights) {
        // ∂f/∂D_ij = w_ij / s and ∂D_ij/∂X_i = 2(X_i - X_j)
        let diff = xs[i].sub(&xs[j]).expect("shared shape").scale_real(two * *w / s);
        egrad[i] = egrad[i].add(&diff).expect("shape");
        egrad[j] = egrad[j].sub(&diff).expect("shape");
    }
    let grads: Vec<Matrix<T>> = xs.iter().zip(&egrad).map(|(x, g)| project_tangent(x, g)).collect();
    let grad_norm_sq = grads.iter().map(|g| g.fro_norm_sq()).sum();
    Evaluation {
        value,
        grads,
        grad_norm_sq,
    }
}

/// Largest Gram deviation tolerated for an iterate: `1e-8` in double precision.
fn manifold_tol<T: Real>() -> T {
    T::of(1e-8).max(T::epsilon() * T::of(100.0))
}

fn min_sq<T: Real>(xs: &[Matrix<T>]) -> T {
    pair_sq(xs).iter().map(|p| p.2).fold(T::infinity(), T::min)
}

/// Per-restart trace, recorded for diagnostics and tests.
#[derive(Clone, Debug, Default)]
pub struct RestartTrace {
    pub accepted_steps: usize,
    /// Largest `‖X*X - I‖_max` over all iterates.
    pub worst_stiefel_deviation: f64,
    /// Whether the surrogate never decreased across an accepted step.
    pub surrogate_monotone: bool,
    pub final_min_distance: f64,
}

struct RestartResult<T> {
    points: Vec<Matrix<T>>,
    min_sq: T,
    trace: RestartTrace,
}

fn run_restart<T: Real>(
    field: FieldTag,
    d: usize,
    r: usize,
    n: usize,
    config: &OptimizerConfig,
    index: usize,
) -> Result<RestartResult<T>>
where
    StandardNormal: Distribution<T>,
{
    let fail = |reason: String| Error::NumericalFailure { restart: index, reason };
    let mut rng = restart_rng(config.seed, index);
    let mut xs: Vec<Matrix<T>> = (0..n)
        .map(|_| random_stiefel::<T, _>(field, d, r, &mut rng).map(StiefelPoint::into_matrix))
        .collect::<Result<_>>()?;

    let schedule = config.beta_schedule();
    let per_epoch = (config.max_iters / schedule.len()).max(1);
    let (armijo, shrink) = (T::of(config.armijo), T::of(config.backtrack));
    let step_max = T::of(config.step_size);
    let grad_tol_sq = T::of(config.grad_tol * config.grad_tol);

    let mut best = xs.clone();
    let mut best_sq = min_sq(&xs);
    let mut trace = RestartTrace {
        surrogate_monotone: true,
        ..RestartTrace::default()
    };

    for &beta_f in &schedule {
        let beta = T::of(beta_f);
        let mut step = step_max;
        let mut eval = evaluate(&xs, beta);
        for _ in 0..per_epoch {
            if !eval.value.is_finite() {
                return Err(fail(format!("non-finite objective at β = {beta_f}")));
            }
            if eval.grad_norm_sq <= grad_tol_sq {
                break;
            }
            let mut accepted = None;
            for _ in 0..=config.max_halvings {
                let trial: Vec<Matrix<T>> = xs
                    .iter()
                    .zip(&eval.grads)
                    .map(|(x, g)| retract(x, &g.scale_real(step)))
                    .collect::<Result<_>>()
                    .map_err(|e| fail(e.to_string()))?;
                let value = softmin_objective(&trial, beta);
                if value >= eval.value + armijo * step * eval.grad_norm_sq {
                    accepted = Some(trial);
                    break;
                }
                step = step * shrink;
            }
            let Some(next) = accepted else { break };
            let next_eval = evaluate(&next, beta);
            if next_eval.value < eval.value {
                trace.surrogate_monotone = false;
            }
            let dev = next
                .iter()
                .map(|m| m.gram_deviation())
                .fold(T::zero(), T::max)
                .to_f64_lossy();
            trace.worst_stiefel_deviation = trace.worst_stiefel_deviation.max(dev);
            if !(dev <= manifold_tol::<T>().to_f64_lossy()) {
                return Err(fail(format!("iterate left the manifold (deviation {dev:e})")));
            }
            trace.accepted_steps += 1;
            xs = next;
            eval = next_eval;
            let sq = min_sq(&xs);
            if sq > best_sq {
                best_sq = sq;
                best.clone_from(&xs);
            }
            step = (step / shrink).min(step_max);
        }
    }
    trace.final_min_distance = best_sq.sqrt().to_f64_lossy();
    Ok(RestartResult {
        points: best,
        min_sq: best_sq,
        trace,
    })
}

/// Full optimizer output.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome<T> {
    pub code: StiefelCode<T>,
    pub report: CodeReport<T>,
    pub best_restart: usize,
    pub traces: Vec<RestartTrace>,
}

/// Best-of-restarts max-min search.
///
/// Restarts run in parallel; the winner is the largest minimum distance with
/// ties going to the lowest restart index, so the result does not depend on
/// the schedule.
pub fn optimize<T: Real>(
    field: FieldTag,
    d: usize,
    r: usize,
    n: usize,
    config: &OptimizerConfig,
) -> Result<(StiefelCode<T>, CodeReport<T>)>
where
    StandardNormal: Distribution<T>,
{
    let out = optimize_traced(field, d, r, n, config)?;
    Ok((out.code, out.report))
}

pub fn optimize_traced<T: Real>(
    field: FieldTag,
    d: usize,
    r: usize,
    n: usize,
    config: &OptimizerConfig,
) -> Result<OptimizeOutcome<T>>
where
    StandardNormal: Distribution<T>,
{
    if r < 1 || d < r || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need d >= r >= 1 and n >= 2, got d={d}, r={r}, n={n}"
        )));
    }
    config.validate()?;
    let results: Vec<RestartResult<T>> = (0..config.restarts)
        .into_par_iter()
        .map(|i| run_restart::<T>(field, d, r, n, config, i))
        .collect::<Result<_>>()?;
    let best_restart = results
        .iter()
        .enumerate()
        .fold(0, |best, (i, res)| if res.min_sq > results[best].min_sq { i } else { best });
    let traces = results.iter().map(|r| r.trace.clone()).collect();
    let winner = results.into_iter().nth(best_restart).expect("restarts > 0");

    let code = StiefelCode::from_matrices(field, winner.points, manifold_tol())
        .map_err(|e| Error::NumericalFailure {
            restart: best_restart,
            reason: e.to_string(),
        })?;
    let report = certify_default(&code);
    let bound_sq: T = ratio_to(simplex_bound_sq(r, n)?);
    if report.min_distance_sq > bound_sq + report.tol {
        return Err(Error::NumericalFailure {
            restart: best_restart,
            reason: format!("minimum distance {} exceeds the simplex bound", report.min_distance),
        });
    }
    Ok(OptimizeOutcome {
        code,
        report,
        best_restart,
        traces,
    })
}

/// Compares the Riemannian gradient of `f_β` with central finite differences
/// along 20 random unit tangent directions; returns the largest discrepancy
/// relative to `‖grad‖`.
pub fn gradient_check(field: FieldTag, d: usize, r: usize, n: usize, seed: u64) -> Result<f64> {
    const DIRECTIONS: usize = 20;
    const H: f64 = 1e-6;
    const BETA: f64 = 2.0;
    if r < 1 || d < r || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need d >= r >= 1 and n >= 2, got d={d}, r={r}, n={n}"
        )));
    }
    let mut rng = restart_rng(seed, 0);
    let xs: Vec<Matrix<f64>> = (0..n)
        .map(|_| random_stiefel::<f64, _>(field, d, r, &mut rng).map(StiefelPoint::into_matrix))
        .collect::<Result<_>>()?;
    let eval = evaluate(&xs, BETA);
    let grad_norm = eval.grad_norm_sq.sqrt();
    let mut worst: f64 = 0.0;
    let mut drawn = 0;
    while drawn < DIRECTIONS {
        let raw: Vec<Matrix<f64>> = xs
            .iter()
            .map(|x| {
                let g = random_gaussian(field, d, r, &mut rng);
                project_tangent(x, &g)
            })
            .collect();
        let norm = raw.iter().map(|v| v.fro_norm_sq()).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            continue;
        }
        drawn += 1;
        let dirs: Vec<Matrix<f64>> = raw.iter().map(|v| v.scale_real(1.0 / norm)).collect();
        let moved = |t: f64| -> Result<Vec<Matrix<f64>>> {
            xs.iter().zip(&dirs).map(|(x, v)| retract(x, &v.scale_real(t))).collect()
        };
        let fd = (softmin_objective(&moved(H)?, BETA) - softmin_objective(&moved(-H)?, BETA)) / (2.0 * H);
        let analytic: f64 = eval
            .grads
            .iter()
            .zip(&dirs)
            .map(|(g, v)| g.re_trace_inner(v).expect("shape"))
            .sum();
        worst = worst.max((fd - analytic).abs() / grad_norm.max(1e-12));
    }
    Ok(worst)
}

fn random_gaussian<R: rand::Rng + ?Sized>(field: FieldTag, d: usize, r: usize, rng: &mut R) -> Matrix<f64> {
    Matrix::from_fn(d, r, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = match field {
            FieldTag::R => 0.0,
            FieldTag::C => StandardNormal.sample(rng),
        };
        Complex::new(re, im)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::is_stiefel;

    #[test]
    fn random_points_are_stiefel_and_reproducible() {
        for field in [FieldTag::R, FieldTag::C] {
            let a = random_stiefel::<f64, _>(field, 5, 3, &mut restart_rng(9, 0)).unwrap();
            let b = random_stiefel::<f64, _>(field, 5, 3, &mut restart_rng(9, 0)).unwrap();
            assert!(is_stiefel(a.matrix(), field, 1e-10));
            assert_eq!(a, b);
            let c = random_stiefel::<f64, _>(field, 5, 3, &mut restart_rng(9, 1)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn haar_inner_products_average_to_zero() {
        // Var Re Tr(X*Y) = r/(md) for independent Haar points
        let (d, r, pairs) = (4usize, 2usize, 10_000usize);
        for field in [FieldTag::R, FieldTag::C] {
            let mut rng = restart_rng(123, 0);
            let mut sum = 0.0;
            for _ in 0..pairs {
                let x = random_stiefel::<f64, _>(field, d, r, &mut rng).unwrap();
                let y = random_stiefel::<f64, _>(field, d, r, &mut rng).unwrap();
                sum += x.matrix().re_trace_inner(y.matrix()).unwrap();
            }
            let mean = sum / pairs as f64;
            let se = (r as f64 / (field.m() * d) as f64 / pairs as f64).sqrt();
            assert!(mean.abs() <= 5.0 * se, "{field}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn tangent_projection_is_tangent() {
        let mut rng = restart_rng(1, 0);
        let x = random_stiefel::<f64, _>(FieldTag::C, 4, 2, &mut rng).unwrap().into_matrix();
        let g = random_gaussian(FieldTag::C, 4, 2, &mut rng);
        let v = project_tangent(&x, &g);
        let a = x.adjoint_mul(&v).unwrap();
        // X*V is skew-Hermitian
        assert!(a.add(&a.adjoint()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        assert!(gradient_check(FieldTag::R, 3, 2, 4, 7).unwrap() <= 1e-5);
        assert!(gradient_check(FieldTag::C, 2, 2, 3, 7).unwrap() <= 1e-5);
    }

    #[test]
    fn schedule_and_config() {
        let cfg = OptimizerConfig::default();
        cfg.validate().unwrap();
        let s = cfg.beta_schedule();
        assert_eq!(s.first(), Some(&4.0));
        assert_eq!(s.last(), Some(&4096.0));
        let bad = OptimizerConfig {
            beta_growth: 1.0,
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        assert!(optimize::<f64>(FieldTag::R, 1, 2, 2, &cfg).is_err());
    }

    #[test]
    fn two_point_manifold() {
        let (code, report) = optimize::<f64>(FieldTag::R, 1, 1, 2, &OptimizerConfig::default()).unwrap();
        assert_eq!(report.min_distance, 2.0);
        let vals: Vec<f64> = code.matrices().map(|m| m.get(0, 0).re).collect();
        assert_eq!(vals[0], -vals[1]);
    }

    #[test]
    fn iterates_stay_on_manifold_and_surrogate_ascends() {
        let cfg = OptimizerConfig {
            restarts: 2,
            max_iters: 300,
            ..OptimizerConfig::default()
        };
        let out = optimize_traced::<f64>(FieldTag::C, 3, 2, 6, &cfg).unwrap();
        for t in &out.traces {
            assert!(t.worst_stiefel_deviation <= 1e-8);
            assert!(t.surrogate_monotone);
            assert!(t.accepted_steps > 0);
        }
    }

    #[test]
    fn known_optima_are_recovered() {
        let cfg = OptimizerConfig::default();
        let (_, rep) = optimize::<f64>(FieldTag::R, 2, 1, 5, &cfg).unwrap();
        let pentagon = 2.0 * (std::f64::consts::PI / 5.0).sin();
        assert!((rep.min_distance - pentagon).abs() < 1e-3, "{}", rep.min_distance);
        let (_, rep) = optimize::<f64>(FieldTag::C, 1, 1, 4, &cfg).unwrap();
        assert!((rep.min_distance - 2f64.sqrt()).abs() < 1e-3, "{}", rep.min_distance);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let cfg = OptimizerConfig {
            restarts: 4,
            max_iters: 400,
            seed: 31,
            ..OptimizerConfig::default()
        };
        let (a, ra) = optimize::<f64>(FieldTag::C, 2, 1, 5, &cfg).unwrap();
        let (b, rb) = optimize::<f64>(FieldTag::C, 2, 1, 5, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.min_distance.to_bits(), rb.min_distance.to_bits());
    }

    #[test]
    fn single_precision_runs() {
        let cfg = OptimizerConfig {
            restarts: 2,
            max_iters: 200,
            ..OptimizerConfig::default()
        };
        let (code, _) = optimize::<f32>(FieldTag::R, 3, 1, 4, &cfg).unwrap();
        assert_eq!(code.n(), 4);
    }
}
