//! Twisted discrete loops: N sample points in a model geometry closed up by
//! an isometry, with the discrete Dirichlet energy, exponential charts of
//! tangent sections, and the energy gradient with the twisted boundary term.
//!
//! Working with one fundamental segment (samples 0..N-1, closure
//! `f[N] = twist . f[0]`) makes invariance structural: a section of tangent
//! vectors along the segment is automatically equivariant.

use nalgebra::Vector3;
use thiserror::Error;

use crate::geometry::{Geometry, GeometryError, Point, Tangent};
use crate::isometry::IsometryElement;

#[derive(Debug, Error, PartialEq)]
pub enum LoopError {
    #[error("a twisted loop needs at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {0} is not a point of the geometry")]
    BadSample(usize),
    #[error("gap {0} of length {1} reaches the convexity radius")]
    GapTooWide(usize, f64),
    #[error("section exceeds the chart ball: sup norm {sup} >= radius {radius}")]
    OutsideChart { sup: f64, radius: f64 },
    #[error("section vector {0} is not tangent")]
    BadSection(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A twisted loop: samples plus the closing isometry.
#[derive(Debug, Clone)]
pub struct TwistedLoop {
    pub geometry: Geometry,
    pub samples: Vec<Point>,
    pub twist: IsometryElement,
}

/// A field of tangent vectors along the samples of a loop.
#[derive(Debug, Clone)]
pub struct SectionField {
    pub vecs: Vec<Tangent>,
}

impl SectionField {
    pub fn zeros(n: usize) -> Self {
        SectionField { vecs: vec![Vector3::zeros(); n] }
    }

    pub fn sup_norm(&self) -> f64 {
        self.vecs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_sq(&self) -> f64 {
        self.vecs.iter().map(|v| v.norm_squared()).sum()
    }

    pub fn scaled(&self, t: f64) -> SectionField {
        SectionField { vecs: self.vecs.iter().map(|v| v * t).collect() }
    }
}

impl TwistedLoop {
    pub fn new(
        geometry: Geometry,
        samples: Vec<Point>,
        twist: IsometryElement,
    ) -> Result<Self, LoopError> {
        if samples.len() < 8 {
            return Err(LoopError::TooFewSamples(samples.len()));
        }
        for (k, p) in samples.iter().enumerate() {
            geometry.check_point(p).map_err(|_| LoopError::BadSample(k))?;
        }
        let lp = TwistedLoop { geometry, samples, twist };
        for (k, gap) in lp.gaps().iter().enumerate() {
            if *gap >= geometry.convexity_radius() {
                return Err(LoopError::GapTooWide(k, *gap));
            }
        }
        Ok(lp)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The twisted closure point `f[N] = twist . f[0]`.
    pub fn closure_point(&self) -> Point {
        self.twist.apply(&self.samples[0])
    }

    fn gaps(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n - 1 {
            out.push(self.geometry.dist(&self.samples[k], &self.samples[k + 1]));
        }
        out.push(self.geometry.dist(&self.samples[n - 1], &self.closure_point()));
        out
    }

    /// Discrete Dirichlet energy and length: `E = (N/2) sum d_k^2`,
    /// `L = sum d_k` over the twisted cycle.
    pub fn measurements(&self) -> (f64, f64) {
        let gaps = self.gaps();
        let n = self.len() as f64;
        let energy = 0.5 * n * gaps.iter().map(|d| d * d).sum::<f64>();
        let length = gaps.iter().sum();
        (energy, length)
    }

    pub fn energy(&self) -> f64 {
        self.measurements().0
    }

    pub fn length(&self) -> f64 {
        self.measurements().1
    }

    /// Chart radius: stays inside the convexity radius and keeps every gap
    /// below it after a chart move.
    pub fn chart_radius(&self) -> f64 {
        let conv = self.geometry.convexity_radius();
        if conv.is_infinite() {
            return f64::INFINITY;
        }
        let max_gap = self.gaps().into_iter().fold(0.0, f64::max);
        0.9 * conv.min(0.5 * (conv - max_gap))
    }

    /// Applies an exponential chart: `f'[k] = exp_{f[k]}(v[k])`, same twist.
    pub fn chart_apply(&self, nu: &SectionField) -> Result<TwistedLoop, LoopError> {
        let radius = self.chart_radius();
        let sup = nu.sup_norm();
        if sup >= radius {
            return Err(LoopError::OutsideChart { sup, radius });
        }
        for (k, v) in nu.vecs.iter().enumerate() {
            self.geometry
                .check_tangent(&self.samples[k], v)
                .map_err(|_| LoopError::BadSection(k))?;
        }
        let samples = self
            .samples
            .iter()
            .zip(&nu.vecs)
            .map(|(p, v)| self.geometry.exp(p, v))
            .collect();
        TwistedLoop::new(self.geometry, samples, self.twist.clone())
    }

    /// Recovers the section sending this loop to `other` under the chart.
    pub fn log_recover(&self, other: &TwistedLoop) -> Result<SectionField, LoopError> {
        let vecs = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(p, q)| self.geometry.log(p, q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SectionField { vecs })
    }

    /// Descent direction of the energy: `g[k] = N (log_{f[k]} f[k-1] +
    /// log_{f[k]} f[k+1])`, the twisted neighbors entering at the seam.
    /// Descending along `g` decreases the energy.
    pub fn energy_gradient(&self) -> Result<SectionField, LoopError> {
        let n = self.len();
        let geom = self.geometry;
        let mut vecs = Vec::with_capacity(n);
        for k in 0..n {
            let prev = if k == 0 {
                self.twist.inverse().apply(&self.samples[n - 1])
            } else {
                self.samples[k - 1]
            };
            let next = if k == n - 1 {
                self.closure_point()
            } else {
                self.samples[k + 1]
            };
            let v = geom.log(&self.samples[k], &prev)? + geom.log(&self.samples[k], &next)?;
            vecs.push(v * n as f64);
        }
        Ok(SectionField { vecs })
    }

    /// Moves the loop by an isometry: samples are translated and the twist
    /// is conjugated. Energy and length are preserved exactly.
    pub fn conjugate(&self, g: &IsometryElement) -> TwistedLoop {
        TwistedLoop {
            geometry: self.geometry,
            samples: self.samples.iter().map(|p| g.apply(p)).collect(),
            twist: g.compose(&self.twist).compose(&g.inverse()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::{rotation_z, translation2, IsometryElement};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn straight_lift(n: usize, dx: f64, dy: f64) -> TwistedLoop {
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 / n as f64;
                Vector3::new(t * dx, t * dy, 0.0)
            })
            .collect();
        TwistedLoop::new(Geometry::Flat2, samples, translation2("t", dx, dy)).unwrap()
    }

    fn equator(n: usize) -> TwistedLoop {
        let samples = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Vector3::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        TwistedLoop::new(Geometry::Sphere, samples, IsometryElement::identity()).unwrap()
    }

    #[test]
    fn constant_loop_measures_zero() {
        let samples = vec![Vector3::new(0.3, -0.2, 0.0); 16];
        let lp = TwistedLoop::new(Geometry::Flat2, samples, IsometryElement::identity()).unwrap();
        let (e, l) = lp.measurements();
        assert_eq!(e, 0.0);
        assert_eq!(l, 0.0);
    }

    #[test]
    fn straight_lift_has_exact_length() {
        let lp = straight_lift(64, 3.0, 4.0);
        let (e, l) = lp.measurements();
        assert!((l - 5.0).abs() < 1e-12);
        // equal spacing saturates Cauchy-Schwarz: L^2 = 2E
        assert!((l * l - 2.0 * e).abs() < 1e-9);
    }

    #[test]
    fn cauchy_schwarz_between_length_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let samples: Vec<Point> = (0..16)
                .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0))
                .collect();
            let lp =
                TwistedLoop::new(Geometry::Flat2, samples, IsometryElement::identity()).unwrap();
            let (e, l) = lp.measurements();
            assert!(l * l <= 2.0 * e + 1e-9);
        }
    }

    #[test]
    fn equator_length_is_two_pi() {
        let lp = equator(128);
        let (_, l) = lp.measurements();
        assert!((l - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip_flat_and_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let flat = straight_lift(32, 1.0, 0.0);
        for _ in 0..50 {
            let nu = SectionField {
                vecs: (0..32)
                    .map(|_| Vector3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), 0.0))
                    .collect(),
            };
            let moved = flat.chart_apply(&nu).unwrap();
            let back = flat.log_recover(&moved).unwrap();
            for (a, b) in nu.vecs.iter().zip(&back.vecs) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        let sph = equator(32);
        for _ in 0..50 {
            let nu = SectionField {
                vecs: sph
                    .samples
                    .iter()
                    .map(|p| {
                        let raw = Vector3::new(
                            rng.gen_range(-0.1..0.1),
                            rng.gen_range(-0.1..0.1),
                            rng.gen_range(-0.1..0.1),
                        );
                        sph.geometry.project_tangent(p, &raw)
                    })
                    .collect(),
            };
            let moved = sph.chart_apply(&nu).unwrap();
            let back = sph.log_recover(&moved).unwrap();
            for (a, b) in nu.vecs.iter().zip(&back.vecs) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn chart_rejects_oversized_sections_on_sphere() {
        let sph = equator(32);
        let nu = SectionField {
            vecs: sph
                .samples
                .iter()
                .map(|p| sph.geometry.project_tangent(p, &Vector3::new(0.0, 0.0, 2.0)))
                .collect(),
        };
        assert!(matches!(sph.chart_apply(&nu), Err(LoopError::OutsideChart { .. })));
    }

    #[test]
    fn straight_lift_is_critical() {
        let lp = straight_lift(32, 3.0, 4.0);
        let g = lp.energy_gradient().unwrap();
        assert!(g.sup_norm() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for geom_case in 0..2 {
            for _ in 0..10 {
                let lp = if geom_case == 0 {
                    let samples: Vec<Point> = (0..16)
                        .map(|k| {
                            let t = k as f64 / 16.0;
                            Vector3::new(
                                t + rng.gen_range(-0.02..0.02),
                                rng.gen_range(-0.02..0.02),
                                0.0,
                            )
                        })
                        .collect();
                    TwistedLoop::new(Geometry::Flat2, samples, translation2("t", 1.0, 0.0))
                        .unwrap()
                } else {
                    let base = equator(16);
                    let nu = SectionField {
                        vecs: base
                            .samples
                            .iter()
                            .map(|p| {
                                let raw = Vector3::new(
                                    rng.gen_range(-0.02..0.02),
                                    rng.gen_range(-0.02..0.02),
                                    rng.gen_range(-0.02..0.02),
                                );
                                base.geometry.project_tangent(p, &raw)
                            })
                            .collect(),
                    };
                    base.chart_apply(&nu).unwrap()
                };
                let g = lp.energy_gradient().unwrap();
                let h = 1e-6;
                for k in [0usize, 7, 15] {
                    for axis in 0..3 {
                        let mut dir = Vector3::zeros();
                        dir[axis] = 1.0;
                        let dir = lp.geometry.project_tangent(&lp.samples[k], &dir);
                        if dir.norm() < 1e-12 {
                            continue;
                        }
                        let mut plus = SectionField::zeros(lp.len());
                        plus.vecs[k] = dir * h;
                        let mut minus = SectionField::zeros(lp.len());
                        minus.vecs[k] = -dir * h;
                        let ep = lp.chart_apply(&plus).unwrap().energy();
                        let em = lp.chart_apply(&minus).unwrap().energy();
                        let fd = (ep - em) / (2.0 * h);
                        // g is the descent direction: directional derivative
                        // along dir is -<g[k], dir>
                        let an = -g.vecs[k].dot(&dir);
                        let scale = fd.abs().max(an.abs()).max(1.0);
                        assert!(
                            (fd - an).abs() / scale < 1e-5,
                            "fd {fd} vs analytic {an} at sample {k} axis {axis}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_preserves_measurements() {
        let lp = straight_lift(32, 2.0, 1.0);
        let g = rotation_z("q", 1.2345).compose(&translation2("s", 0.3, -0.7));
        let moved = lp.conjugate(&g);
        let (e1, l1) = lp.measurements();
        let (e2, l2) = moved.measurements();
        assert!((e1 - e2).abs() < 1e-12);
        assert!((l1 - l2).abs() < 1e-12);
    }

    #[test]
    fn conjugating_translation_twist_by_rotation() {
        let lp = straight_lift(16, 1.0, 0.0);
        let q = rotation2_for_test();
        let moved = lp.conjugate(&q);
        assert!((moved.twist.tr - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    fn rotation2_for_test() -> IsometryElement {
        crate::isometry::rotation2("q", std::f64::consts::FRAC_PI_2)
    }
}
