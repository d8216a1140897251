//! Seeded synthetic correspondence scenes.
//!
//! A scene samples source points (a point-cloud file or a uniform cube),
//! applies a uniformly random rotation and an optional translation, adds
//! isotropic Gaussian noise, and then replaces a fixed fraction of the target
//! points with uniform samples from a ball centered at the origin.

mod ply;

use std::path::PathBuf;

use nalgebra::{Matrix3, UnitQuaternion, Vector3, Quaternion};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{PointCorrespondences, RigidTransform};
use crate::scalar::{lit, Real};

pub use ply::{parse_ply, read_ply_vertices};

#[derive(Debug, Clone, PartialEq)]
pub enum PointSource {
    /// Uniform samples in the axis-aligned cube `[-0.5, 0.5]³`.
    RandomCube,
    /// Random subset of the vertices of an ASCII PLY file.
    PlyFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub n_points: usize,
    /// Fraction of targets replaced by outliers, in `[0, 1)`.
    pub outlier_rate: f64,
    /// Standard deviation of the inlier noise, meters.
    pub noise_sigma: f64,
    /// Radius of the origin-centered ball outliers are drawn from, meters.
    pub outlier_radius: f64,
    pub with_translation: bool,
    pub max_translation_norm: f64,
    /// Noise bound `σ_i` attached to every correspondence.
    pub noise_bound: f64,
    pub seed: u64,
    pub source: PointSource,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_points: 100,
            outlier_rate: 0.0,
            noise_sigma: 0.01,
            outlier_radius: 2.0,
            with_translation: false,
            max_translation_norm: 1.0,
            noise_bound: 0.01,
            seed: 0,
            source: PointSource::RandomCube,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_points < 3 {
            return bad("n_points must be at least 3");
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return bad("outlier_rate must lie in [0, 1)");
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad("noise_sigma must be non-negative");
        }
        if !(self.outlier_radius > 0.0) || !self.outlier_radius.is_finite() {
            return bad("outlier_radius must be positive");
        }
        if !(self.max_translation_norm > 0.0) || !self.max_translation_norm.is_finite() {
            return bad("max_translation_norm must be positive");
        }
        if !(self.noise_bound > 0.0) || !self.noise_bound.is_finite() {
            return bad("noise_bound must be positive");
        }
        Ok(())
    }

    /// Number of outliers the scene will contain.
    pub fn outlier_count(&self) -> usize {
        (self.outlier_rate * self.n_points as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene<T: Real> {
    pub correspondences: PointCorrespondences<T>,
    pub ground_truth: RigidTransform<T>,
    pub outlier_mask: Vec<bool>,
    /// Center of the outlier ball (always the origin).
    pub outlier_center: Vector3<T>,
    pub config: SceneConfig,
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vector3<f64> {
    loop {
        let dir = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n: f64 = dir.norm();
        if n > 1e-12 {
            let r = radius * rng.random::<f64>().cbrt();
            return dir * (r / n);
        }
    }
}

/// Uniform rotation from a normalized 4-D Gaussian quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    loop {
        let q = Quaternion::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if q.norm() > 1e-12 {
            return UnitQuaternion::from_quaternion(q)
                .to_rotation_matrix()
                .into_inner();
        }
    }
}

fn source_points(config: &SceneConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Vector3<f64>>> {
    match &config.source {
        PointSource::RandomCube => Ok((0..config.n_points)
            .map(|_| {
                Vector3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                )
            })
            .collect()),
        PointSource::PlyFile(path) => {
            let cloud = read_ply_vertices(path)?;
            if cloud.len() < config.n_points {
                return Err(Error::InvalidArgument(format!(
                    "{} has {} vertices, fewer than the requested {}",
                    path.display(),
                    cloud.len(),
                    config.n_points
                )));
            }
            let mut picks = index::sample(rng, cloud.len(), config.n_points).into_vec();
            picks.sort_unstable();
            Ok(picks
                .into_iter()
                .map(|i| Vector3::from(cloud[i]))
                .collect())
        }
    }
}

/// Generates a scene; identical configs produce bit-identical scenes.
pub fn generate_scene<T: Real>(config: &SceneConfig) -> Result<SyntheticScene<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_points;

    let source = source_points(config, &mut rng)?;
    let rotation = random_rotation(&mut rng);
    let translation = if config.with_translation {
        uniform_in_ball(&mut rng, config.max_translation_norm)
    } else {
        Vector3::zeros()
    };

    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise_sigma: {e}")))?;
    let mut target: Vec<Vector3<f64>> = source
        .iter()
        .map(|a| {
            let eps = Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            rotation * a + translation + eps
        })
        .collect();

    let mut outlier_mask = vec![false; n];
    for i in index::sample(&mut rng, n, config.outlier_count()).into_iter() {
        outlier_mask[i] = true;
        target[i] = uniform_in_ball(&mut rng, config.outlier_radius);
    }

    let cast = |v: &Vector3<f64>| v.map(lit::<T>);
    let correspondences = PointCorrespondences::with_uniform_bound(
        source.iter().map(cast).collect(),
        target.iter().map(cast).collect(),
        lit(config.noise_bound),
    )?;
    Ok(SyntheticScene {
        correspondences,
        ground_truth: RigidTransform {
            rotation: rotation.map(lit::<T>),
            translation: cast(&translation),
        },
        outlier_mask,
        outlier_center: Vector3::zeros(),
        config: config.clone(),
    })
}
