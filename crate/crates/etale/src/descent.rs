//! Energy descent on twisted loops and length spectra over conjugacy
//! classes of twists. Descent is plain gradient descent in the exponential
//! chart with Armijo backtracking; spectra aggregate the best run over a
//! deterministic family of seeded starts.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Geometry, Point};
use crate::isometry::{IsometryElement, IsometryGroup};
use crate::twisted::{LoopError, TwistedLoop};

#[derive(Debug, Error, PartialEq)]
pub enum DescentError {
    #[error("empty twist set")]
    EmptyTwistSet,
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Options for the descent loop.
#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Convergence threshold on the sup norm of the descent direction.
    pub grad_tol: f64,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iter: 300_000,
            grad_tol: 1e-5,
            armijo_c1: 1e-4,
            max_backtracks: 40,
        }
    }
}

/// Outcome of a descent run.
#[derive(Debug, Clone)]
pub struct DescentReport {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub energy: f64,
    pub length: f64,
}

/// Gradient descent with backtracking line search inside the chart ball.
/// Energy is non-increasing across accepted steps; the converged flag means
/// the sup norm of the descent direction fell below the tolerance.
pub fn minimize_energy(
    start: &TwistedLoop,
    opts: &DescentOptions,
) -> Result<(TwistedLoop, DescentReport), DescentError> {
    let mut current = start.clone();
    let mut energy = current.energy();
    let n = current.len() as f64;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        let grad = current.energy_gradient()?;
        grad_norm = grad.sup_norm();
        if grad_norm < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        // initial step scaled for the N-weighted energy, capped to the chart
        let mut step = 1.0 / (2.0 * n);
        let radius = current.chart_radius();
        if radius.is_finite() {
            while step * grad_norm >= radius {
                step *= 0.5;
            }
        }
        let decrease = grad.l2_sq();
        let mut accepted = false;
        for _ in 0..=opts.max_backtracks {
            let candidate = current.chart_apply(&grad.scaled(step))?;
            let e = candidate.energy();
            if e <= energy - opts.armijo_c1 * step * decrease {
                current = candidate;
                energy = e;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no productive step inside the ball; stop with the best iterate
            break;
        }
    }
    let (e, l) = current.measurements();
    Ok((
        current,
        DescentReport { iterations, final_grad_norm: grad_norm, converged, energy: e, length: l },
    ))
}

/// One row of a length spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumRow {
    pub class_word: String,
    pub min_length: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

/// Length below which a run is reported as degenerate (collapse toward a
/// fixed locus) rather than as a geodesic.
pub const DEGENERATE_LENGTH: f64 = 1e-6;

/// Deterministic seeded start: geodesic interpolation from a random base
/// point to its twisted image, with small tangent noise.
pub fn seeded_start(
    geometry: Geometry,
    twist: &IsometryElement,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TwistedLoop, LoopError> {
    let base: Point = match geometry {
        Geometry::Flat2 => Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0),
        Geometry::Flat3 => Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ),
        Geometry::Sphere => {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() < 1e-6 {
                Vector3::new(1.0, 0.0, 0.0)
            } else {
                v.normalize()
            }
        }
    };
    let target = twist.apply(&base);
    let mut pts = Vec::with_capacity(samples);
    match geometry {
        Geometry::Flat2 | Geometry::Flat3 => {
            for k in 0..samples {
                let t = k as f64 / samples as f64;
                let p = base * (1.0 - t) + target * t;
                let noise = Vector3::new(
                    rng.gen_range(-0.05..0.05),
                    rng.gen_range(-0.05..0.05),
                    if geometry == Geometry::Flat3 { rng.gen_range(-0.05..0.05) } else { 0.0 },
                );
                pts.push(p + noise);
            }
        }
        Geometry::Sphere => {
            // slerp from base toward the twisted image; if they coincide the
            // loop starts near a point and may collapse, which the spectrum
            // reports as degenerate
            let log = geometry.log(&base, &target).unwrap_or_else(|_| Vector3::zeros());
            for k in 0..samples {
                let t = k as f64 / samples as f64;
                let p = geometry.exp(&base, &(log * t));
                let raw = Vector3::new(
                    rng.gen_range(-0.02..0.02),
                    rng.gen_range(-0.02..0.02),
                    rng.gen_range(-0.02..0.02),
                );
                let noise = geometry.project_tangent(&p, &raw);
                pts.push(geometry.exp(&p, &noise));
            }
        }
    }
    TwistedLoop::new(geometry, pts, twist.clone())
}

/// As [`seeded_start`], driving the generator from a bare seed.
pub fn seeded_start_from(
    geometry: Geometry,
    twist: &IsometryElement,
    samples: usize,
    seed: u64,
) -> Result<TwistedLoop, LoopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    seeded_start(geometry, twist, samples, &mut rng)
}

/// Minimizes over the conjugacy classes of the given twists: one row per
/// class, the best run over `seeds` deterministic starts per class.
pub fn length_spectrum(
    group: &IsometryGroup,
    twists: &[IsometryElement],
    samples: usize,
    seeds: usize,
    base_seed: u64,
    opts: &DescentOptions,
) -> Result<Vec<SpectrumRow>, DescentError> {
    if twists.is_empty() {
        return Err(DescentError::EmptyTwistSet);
    }
    // conjugacy classes of the input twists within the enumerated ball
    let mut class_reps: Vec<IsometryElement> = Vec::new();
    let mut rows: Vec<SpectrumRow> = Vec::new();
    for twist in twists {
        let already = class_reps.iter().any(|rep| {
            group
                .elements
                .iter()
                .any(|g| g.compose(rep).compose(&g.inverse()).approx_eq(twist, 1e-9))
        });
        if already {
            continue;
        }
        class_reps.push(twist.clone());
        let mut best: Option<(f64, DescentReport)> = None;
        for seed_idx in 0..seeds.max(1) {
            let mut rng =
                ChaCha8Rng::seed_from_u64(base_seed ^ (class_reps.len() as u64) << 32 ^ seed_idx as u64);
            let start = seeded_start(group.geometry, twist, samples, &mut rng)?;
            let (mut current, mut report) = minimize_energy(&start, opts)?;
            // a run stalling at a tiny length is a collapse in progress:
            // tighten the tolerance until it either crosses the degenerate
            // threshold or stabilizes
            let mut rounds = 0;
            while report.converged
                && report.length >= DEGENERATE_LENGTH
                && report.length < 1e-3
                && rounds < 5
            {
                let tighter = DescentOptions {
                    grad_tol: (report.length * 1e-2).min(opts.grad_tol),
                    ..opts.clone()
                };
                let (next, next_report) = minimize_energy(&current, &tighter)?;
                if next_report.length >= report.length {
                    break;
                }
                current = next;
                report = DescentReport {
                    iterations: report.iterations + next_report.iterations,
                    ..next_report
                };
                rounds += 1;
            }
            let better = match &best {
                None => true,
                Some((len, _)) => report.length < *len,
            };
            if better {
                best = Some((report.length, report));
            }
        }
        let (len, report) = best.expect("at least one seed runs");
        rows.push(SpectrumRow {
            class_word: twist.word_string(),
            min_length: len,
            iterations: report.iterations,
            converged: report.converged,
            degenerate: len < DEGENERATE_LENGTH,
        });
    }
    Ok(rows)
}
