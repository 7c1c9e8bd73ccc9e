//! Model geometries for the loop machinery: flat Euclidean space in two or
//! three dimensions and the round unit 2-sphere. Points live in R^3
//! throughout (flat 2D uses the z = 0 plane); each geometry provides exact
//! distance, exponential and logarithm maps, and parallel transport along
//! minimizing geodesics.

use nalgebra::Vector3;
use thiserror::Error;

pub type Point = Vector3<f64>;
pub type Tangent = Vector3<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point {0:?} is not on the model geometry")]
    BadPoint(Point),
    #[error("tangent {0:?} is not tangent at the given point")]
    BadTangent(Tangent),
    #[error("log map undefined: points at or beyond the cut locus")]
    CutLocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Flat2,
    Flat3,
    Sphere,
}

const POINT_TOL: f64 = 1e-9;

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Flat2 => 2,
            Geometry::Flat3 => 3,
            Geometry::Sphere => 2,
        }
    }

    /// Radius within which exp and log are mutually inverse onto convex
    /// balls: unbounded in flat space, a quarter turn on the sphere.
    pub fn convexity_radius(&self) -> f64 {
        match self {
            Geometry::Flat2 | Geometry::Flat3 => f64::INFINITY,
            Geometry::Sphere => std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<(), GeometryError> {
        let ok = match self {
            Geometry::Flat2 => p.z.abs() <= POINT_TOL,
            Geometry::Flat3 => true,
            Geometry::Sphere => (p.norm() - 1.0).abs() <= 1e-7,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::BadPoint(*p))
        }
    }

    pub fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<(), GeometryError> {
        let ok = match self {
            Geometry::Flat2 => v.z.abs() <= POINT_TOL,
            Geometry::Flat3 => true,
            Geometry::Sphere => p.dot(v).abs() <= 1e-7,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::BadTangent(*v))
        }
    }

    /// Geodesic distance.
    pub fn dist(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Geometry::Flat2 | Geometry::Flat3 => (p - q).norm(),
            Geometry::Sphere => p.dot(q).clamp(-1.0, 1.0).acos(),
        }
    }

    /// Riemannian exponential at `p`.
    pub fn exp(&self, p: &Point, v: &Tangent) -> Point {
        match self {
            Geometry::Flat2 | Geometry::Flat3 => p + v,
            Geometry::Sphere => {
                let n = v.norm();
                if n < 1e-300 {
                    return *p;
                }
                p * n.cos() + v / n * n.sin()
            }
        }
    }

    /// Riemannian logarithm: the tangent at `p` whose exponential is `q`.
    /// Fails at the sphere's cut locus (antipodal points).
    pub fn log(&self, p: &Point, q: &Point) -> Result<Tangent, GeometryError> {
        match self {
            Geometry::Flat2 | Geometry::Flat3 => Ok(q - p),
            Geometry::Sphere => {
                let c = p.dot(q).clamp(-1.0, 1.0);
                let theta = c.acos();
                if theta < 1e-300 {
                    return Ok(Vector3::zeros());
                }
                let s = theta.sin();
                if s < 1e-12 {
                    return Err(GeometryError::CutLocus);
                }
                Ok((q - p * c) * (theta / s))
            }
        }
    }

    /// Parallel transport of `v` along the minimizing geodesic from `p` to
    /// `q`.
    pub fn transport(&self, p: &Point, q: &Point, v: &Tangent) -> Result<Tangent, GeometryError> {
        match self {
            Geometry::Flat2 | Geometry::Flat3 => Ok(*v),
            Geometry::Sphere => {
                let c = p.dot(q);
                if 1.0 + c < 1e-12 {
                    return Err(GeometryError::CutLocus);
                }
                Ok(v - (p + q) * (v.dot(q) / (1.0 + c)))
            }
        }
    }

    /// Orthogonal projection onto the tangent space at `p`.
    pub fn project_tangent(&self, p: &Point, v: &Tangent) -> Tangent {
        match self {
            Geometry::Flat2 => Vector3::new(v.x, v.y, 0.0),
            Geometry::Flat3 => *v,
            Geometry::Sphere => v - p * p.dot(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(geom: Geometry, rng: &mut ChaCha8Rng) -> Point {
        match geom {
            Geometry::Flat2 => Vector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0),
            Geometry::Flat3 => Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
            Geometry::Sphere => {
                let v = Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                v.normalize()
            }
        }
    }

    #[test]
    fn sphere_exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let geom = Geometry::Sphere;
        for _ in 0..200 {
            let p = random_point(geom, &mut rng);
            let raw = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let v = geom.project_tangent(&p, &raw) * 0.4;
            let q = geom.exp(&p, &v);
            assert!((q.norm() - 1.0).abs() < 1e-12);
            let w = geom.log(&p, &q).unwrap();
            assert!((w - v).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_ops_are_affine() {
        let geom = Geometry::Flat2;
        let p = Vector3::new(1.0, 2.0, 0.0);
        let v = Vector3::new(0.5, -1.0, 0.0);
        assert_eq!(geom.exp(&p, &v), p + v);
        assert_eq!(geom.log(&p, &(p + v)).unwrap(), v);
        assert_eq!(geom.dist(&p, &(p + v)), v.norm());
    }

    #[test]
    fn sphere_transport_preserves_norm_and_tangency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let geom = Geometry::Sphere;
        for _ in 0..100 {
            let p = random_point(geom, &mut rng);
            let q = random_point(geom, &mut rng);
            if 1.0 + p.dot(&q) < 1e-3 {
                continue;
            }
            let raw = random_point(Geometry::Flat3, &mut rng);
            let v = geom.project_tangent(&p, &raw);
            let w = geom.transport(&p, &q, &v).unwrap();
            assert!((w.norm() - v.norm()).abs() < 1e-10);
            assert!(q.dot(&w).abs() < 1e-10);
        }
    }

    #[test]
    fn triangle_inequality_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for geom in [Geometry::Flat2, Geometry::Sphere] {
            for _ in 0..100 {
                let a = random_point(geom, &mut rng);
                let b = random_point(geom, &mut rng);
                let c = random_point(geom, &mut rng);
                assert!(geom.dist(&a, &c) <= geom.dist(&a, &b) + geom.dist(&b, &c) + 1e-12);
                assert!((geom.dist(&a, &b) - geom.dist(&b, &a)).abs() < 1e-15);
            }
        }
    }
}
