//! Synthetic scenes and correspondences, error metrics, and parameter sweeps
//! comparing the rolling-shutter solver with the global-shutter 8-point
//! baseline.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::geom::{
    project_rs, rodrigues, CameraIntrinsics, FrameId, Mat3, MotionVelocity, PixelPoint, RotationModel, Side, StereoRigConfig, Vec3,
};
use crate::solver::{self, Correspondence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub seed: u64,
    pub point_count: usize,
    pub z_min: f64,
    pub z_max: f64,
    /// Half-extent of the sampled frustum as a tangent: `|X1/X3|` and
    /// `|X2/X3|` are bounded by this value.
    pub lateral_extent: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig { seed: 0, point_count: 100, z_min: 5.0, z_max: 15.0, lateral_extent: 0.4 }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_min > 0.0 && self.z_max >= self.z_min) {
            return Err(Error::InvalidParameter(format!("need 0 < z_min <= z_max, got [{}, {}]", self.z_min, self.z_max)));
        }
        if self.point_count < 2 * solver::MIN_PER_SIDE {
            return Err(Error::InvalidParameter(format!("point_count must be >= 18, got {}", self.point_count)));
        }
        if !(self.lateral_extent > 0.0) {
            return Err(Error::InvalidParameter(format!("lateral extent must be positive, got {}", self.lateral_extent)));
        }
        Ok(())
    }
}

/// Points uniform in depth and in the angular extent of a frustum slab.
pub fn generate_scene(cfg: &SceneConfig) -> Result<Vec<Vec3>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let e = cfg.lateral_extent;
    Ok((0..cfg.point_count)
        .map(|_| {
            let z = if cfg.z_max > cfg.z_min { rng.random_range(cfg.z_min..=cfg.z_max) } else { cfg.z_min };
            Vec3::new(rng.random_range(-e..=e) * z, rng.random_range(-e..=e) * z, z)
        })
        .collect())
}

/// Projects every scene point into all four images and keeps the points
/// visible everywhere, as temporal matches I1->I3 (left) and I2->I4 (right).
pub fn generate_correspondences(
    scene: &[Vec3],
    rig: &StereoRigConfig,
    k: &CameraIntrinsics,
    motion: &MotionVelocity,
    model: RotationModel,
) -> Result<(Vec<Correspondence>, Vec<Correspondence>)> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for x in scene {
        let project = |id: FrameId| -> Option<PixelPoint> {
            project_rs(k, rig, id, motion, x, model).ok().map(|(p, _)| p).filter(|p| k.contains(*p))
        };
        let (Some(p1), Some(p2), Some(p3), Some(p4)) =
            (project(FrameId::I1), project(FrameId::I2), project(FrameId::I3), project(FrameId::I4))
        else {
            continue;
        };
        left.push(Correspondence::new(Side::Left, p1, p3));
        right.push(Correspondence::new(Side::Right, p2, p4));
    }
    if left.len() < solver::MIN_PER_SIDE {
        return Err(Error::InsufficientData { needed: solver::MIN_PER_SIDE, left: left.len(), right: right.len() });
    }
    Ok((left, right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseUnits {
    /// Standard deviation in `K^-1`-normalized image coordinates.
    #[default]
    Normalized,
    Pixel,
}

/// i.i.d. Gaussian perturbation of both endpoints of every match.
pub fn add_noise(corrs: &[Correspondence], sigma: f64, units: NoiseUnits, k: &CameraIntrinsics, seed: u64) -> Result<Vec<Correspondence>> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(corrs.to_vec());
    }
    let (su, sv) = match units {
        NoiseUnits::Normalized => (sigma * k.fx, sigma * k.fy),
        NoiseUnits::Pixel => (sigma, sigma),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(corrs
        .iter()
        .map(|c| {
            let mut jitter = |p: PixelPoint| PixelPoint::new(p.u + su * n.sample(&mut rng), p.v + sv * n.sample(&mut rng));
            let a = jitter(c.a);
            let b = jitter(c.b);
            Correspondence::new(c.side, a, b)
        })
        .collect())
}

/// Angle between two translation directions.
pub fn translation_error(d_est: &Vec3, d_gt: &Vec3) -> Result<f64> {
    let (ne, ng) = (d_est.norm(), d_gt.norm());
    if !(ne > 0.0 && ng > 0.0) {
        return Err(Error::DirectionUndefined);
    }
    Ok(d_est.cross(d_gt).norm().atan2(d_est.dot(d_gt)))
}

const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// Geodesic angle between two rotation matrices.
pub fn rotation_error(r_est: &Mat3, r_gt: &Mat3) -> Result<f64> {
    for r in [r_est, r_gt] {
        let dev = (r.transpose() * r - Mat3::identity()).norm();
        if !(dev <= ORTHONORMAL_TOLERANCE) {
            return Err(Error::NotOrthonormal(dev));
        }
    }
    let rel = r_est * r_gt.transpose();
    let sin = Vec3::new(rel[(2, 1)] - rel[(1, 2)], rel[(0, 2)] - rel[(2, 0)], rel[(1, 0)] - rel[(0, 1)]).norm() / 2.0;
    let cos = (rel.trace() - 1.0) / 2.0;
    Ok(sin.atan2(cos))
}

/// Nearest rotation matrix in the Frobenius sense.
pub fn orthonormalize(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub e_t: f64,
    pub e_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Noise,
    TranslationSpeed,
    RotationSpeed,
    ReadoutRatio,
    Baseline,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::Noise,
        SweepVariable::TranslationSpeed,
        SweepVariable::RotationSpeed,
        SweepVariable::ReadoutRatio,
        SweepVariable::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Noise => "noise",
            SweepVariable::TranslationSpeed => "translation_speed",
            SweepVariable::RotationSpeed => "rotation_speed",
            SweepVariable::ReadoutRatio => "readout_ratio",
            SweepVariable::Baseline => "baseline",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    RollingShutter,
    GlobalShutter,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::RollingShutter => "rs",
            SolverKind::GlobalShutter => "gs",
        }
    }
}

/// Parameters held fixed while one variable is swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    pub k: CameraIntrinsics,
    pub half_baseline: f64,
    pub readout_ratio: f64,
    /// `|d|`, scene units per frame.
    pub translation_speed: f64,
    /// `|w|`, radians per frame.
    pub rotation_speed: f64,
    pub noise_sigma: f64,
    pub noise_units: NoiseUnits,
    pub point_count: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub lateral_extent: f64,
    pub rotation_model: RotationModel,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            k: CameraIntrinsics::centered(810.0, 900, 900).expect("valid default intrinsics"),
            half_baseline: 0.5,
            readout_ratio: 0.8,
            translation_speed: 0.3,
            rotation_speed: 0.4f64.to_radians(),
            noise_sigma: 1e-3,
            noise_units: NoiseUnits::Normalized,
            point_count: 100,
            z_min: 5.0,
            z_max: 15.0,
            lateral_extent: 0.4,
            rotation_model: RotationModel::Exact,
        }
    }
}

impl SimulationParams {
    pub fn with(&self, var: SweepVariable, value: f64) -> Self {
        let mut p = *self;
        match var {
            SweepVariable::Noise => p.noise_sigma = value,
            SweepVariable::TranslationSpeed => p.translation_speed = value,
            SweepVariable::RotationSpeed => p.rotation_speed = value,
            SweepVariable::ReadoutRatio => p.readout_ratio = value,
            SweepVariable::Baseline => p.half_baseline = value,
        }
        p
    }

    pub fn rig(&self) -> Result<StereoRigConfig> {
        StereoRigConfig::new(self.half_baseline, self.readout_ratio, self.k.n_rows)
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Outcome of one synthetic trial; `None` marks a solver failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub motion: MotionVelocity,
    pub rs: Option<ErrorMetrics>,
    pub gs: Option<ErrorMetrics>,
}

/// Translation of the left camera between the first rows of the two frames,
/// the quantity a global-shutter two-view solver estimates.
pub fn left_camera_translation(motion: &MotionVelocity, rig: &StereoRigConfig, model: RotationModel) -> Vec3 {
    let beta = rig.baseline_vector(Side::Left);
    motion.d + beta - model.matrix(&motion.w) * beta
}

/// Draws a random motion and scene, generates noisy matches, and scores both
/// solvers.
pub fn run_trial(params: &SimulationParams, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let rig = params.rig()?;
    let motion = MotionVelocity::new(random_unit(rng) * params.rotation_speed, random_unit(rng) * params.translation_speed);
    let scene_cfg = SceneConfig {
        seed: rng.random(),
        point_count: params.point_count,
        z_min: params.z_min,
        z_max: params.z_max,
        lateral_extent: params.lateral_extent,
    };
    let noise_seed: u64 = rng.random();
    let scene = generate_scene(&scene_cfg)?;
    let (left, right) = generate_correspondences(&scene, &rig, &params.k, &motion, params.rotation_model)?;
    let left = add_noise(&left, params.noise_sigma, params.noise_units, &params.k, noise_seed)?;
    let right = add_noise(&right, params.noise_sigma, params.noise_units, &params.k, noise_seed ^ 0x9e37_79b9_7f4a_7c15)?;

    let r_gt = rodrigues(&motion.w);
    // Noise lifts sigma_19 towards sigma_18, so only exact rank loss rejects a trial.
    let opts = solver::SolverOptions { degeneracy_ratio: 1.0, ..Default::default() };
    let rs = solver::solve_relative_pose_with(&left, &right, &rig, &params.k, &opts).ok().and_then(|est| {
        let e_t = translation_error(&est.d_direction, &motion.d).ok()?;
        let e_r = rotation_error(&rodrigues(&est.w), &r_gt).ok()?;
        Some(ErrorMetrics { e_t, e_r })
    });
    let gs = solver::solve_gs_8pt(&left, &params.k).ok().and_then(|est| {
        let t_gt = left_camera_translation(&motion, &rig, params.rotation_model);
        let e_t = translation_error(&est.translation, &t_gt).ok()?;
        let e_r = rotation_error(&est.rotation, &r_gt).ok()?;
        Some(ErrorMetrics { e_t, e_r })
    });
    Ok(TrialOutcome { motion, rs, gs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub params: SimulationParams,
}

impl SweepSpec {
    /// Default grid of each sweep.
    pub fn default_grid(var: SweepVariable) -> Vec<f64> {
        match var {
            SweepVariable::Noise => (0..=5).map(|i| i as f64 * 2e-4).collect(),
            SweepVariable::TranslationSpeed => (1..=6).map(|i| i as f64 * 0.1).collect(),
            SweepVariable::RotationSpeed => (1..=6).map(|i| (i as f64 * 0.2).to_radians()).collect(),
            SweepVariable::ReadoutRatio => (2..=10).map(|i| i as f64 / 10.0).collect(),
            SweepVariable::Baseline => (1..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        for &v in &self.grid {
            let p = self.params.with(self.variable, v);
            p.rig()?;
            if !(p.noise_sigma >= 0.0) || !(p.translation_speed >= 0.0) || !(p.rotation_speed >= 0.0) {
                return Err(Error::InvalidParameter(format!("invalid {} grid value {v}", self.variable.name())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub solver: SolverKind,
    pub mean_e_t: f64,
    pub mean_e_r: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Independent RNG for trial `trial` of grid point `grid_index`.
pub fn trial_rng(seed: u64, grid_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | trial as u64);
    rng
}

/// All trial outcomes of one grid point, in trial order. Trials whose data
/// generation fails count as failures of both solvers.
pub fn run_grid_point(spec: &SweepSpec, grid_index: usize) -> Vec<Option<TrialOutcome>> {
    let params = spec.params.with(spec.variable, spec.grid[grid_index]);
    let run = |t: usize| run_trial(&params, &mut trial_rng(spec.seed, grid_index, t)).ok();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..spec.trials).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..spec.trials).map(run).collect()
    }
}

fn summarize(var: SweepVariable, value: f64, solver: SolverKind, metrics: &[Option<ErrorMetrics>]) -> SweepRow {
    let ok: Vec<_> = metrics.iter().flatten().collect();
    let n = ok.len() as f64;
    let (mean_e_t, mean_e_r) = if ok.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (ok.iter().map(|m| m.e_t).sum::<f64>() / n, ok.iter().map(|m| m.e_r).sum::<f64>() / n)
    };
    SweepRow { variable: var, value, solver, mean_e_t, mean_e_r, trials: metrics.len(), failures: metrics.len() - ok.len() }
}

/// Mean errors of both solvers at every grid point. Deterministic for a
/// given spec regardless of thread scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(2 * spec.grid.len());
    for (gi, &value) in spec.grid.iter().enumerate() {
        let outcomes = run_grid_point(spec, gi);
        let rs: Vec<_> = outcomes.iter().map(|o| o.and_then(|o| o.rs)).collect();
        let gs: Vec<_> = outcomes.iter().map(|o| o.and_then(|o| o.gs)).collect();
        rows.push(summarize(spec.variable, value, SolverKind::RollingShutter, &rs));
        rows.push(summarize(spec.variable, value, SolverKind::GlobalShutter, &gs));
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "sweep_var,value,solver,mean_eT_rad,mean_eR_rad,trials,failures";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.variable.name(),
            r.value,
            r.solver.name(),
            r.mean_e_t,
            r.mean_e_r,
            r.trials,
            r.failures
        );
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{project_gs, row_pose};

    #[test]
    fn scene_is_deterministic() {
        let cfg = SceneConfig { seed: 7, ..Default::default() };
        assert_eq!(generate_scene(&cfg).unwrap(), generate_scene(&cfg).unwrap());
        let other = SceneConfig { seed: 8, ..cfg };
        assert_ne!(generate_scene(&cfg).unwrap(), generate_scene(&other).unwrap());
        let flat = SceneConfig { z_min: 5.0, z_max: 5.0, ..cfg };
        assert!(generate_scene(&flat).unwrap().iter().all(|p| p[2] == 5.0));
        assert!(generate_scene(&SceneConfig { point_count: 10, ..cfg }).is_err());
        assert!(generate_scene(&SceneConfig { z_min: 0.0, ..cfg }).is_err());
    }

    #[test]
    fn default_scene_is_mostly_visible() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let pose = row_pose(&rig, FrameId::I1, 0.0, &MotionVelocity::zero()).unwrap();
        let cfg = SceneConfig { seed: 3, point_count: 2000, ..Default::default() };
        let pts = generate_scene(&cfg).unwrap();
        let visible =
            pts.iter().filter(|x| project_gs(&k, &pose, x, RotationModel::Exact).map(|(p, _)| k.contains(p)).unwrap_or(false)).count();
        assert!(visible as f64 >= 0.95 * pts.len() as f64, "{visible} of {}", pts.len());
    }

    #[test]
    fn zero_motion_correspondences() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let pts = generate_scene(&SceneConfig::default()).unwrap();
        let (l, r) = generate_correspondences(&pts, &rig, &k, &MotionVelocity::zero(), RotationModel::Exact).unwrap();
        assert_eq!(l.len(), r.len());
        for (cl, cr) in l.iter().zip(&r) {
            assert_eq!(cl.a, cl.b);
            assert_eq!(cr.a, cr.b);
            // Stereo parallax: same row, left column larger.
            assert!((cl.a.u - cr.a.u).abs() < 1e-9);
            assert!(cl.a.v > cr.a.v);
        }
    }

    #[test]
    fn paper_settings_stay_in_image() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = MotionVelocity::new(random_unit(&mut rng) * 0.4f64.to_radians(), random_unit(&mut rng) * 0.3);
        let pts = generate_scene(&SceneConfig { point_count: 300, ..Default::default() }).unwrap();
        let (l, r) = generate_correspondences(&pts, &rig, &k, &m, RotationModel::Exact).unwrap();
        assert!(l.len() > 200);
        for c in l.iter().chain(&r) {
            for p in [c.a, c.b] {
                assert!((0.0..900.0).contains(&p.u) && (0.0..900.0).contains(&p.v));
            }
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let far_off = vec![Vec3::new(100.0, 0.0, 5.0); 20];
        assert!(matches!(
            generate_correspondences(&far_off, &rig, &k, &MotionVelocity::zero(), RotationModel::Exact),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn noise_properties() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let corrs: Vec<_> = (0..4000)
            .map(|i| {
                let p = PixelPoint::new(100.0 + (i % 700) as f64, 200.0 + (i / 700) as f64);
                Correspondence::new(Side::Left, p, p)
            })
            .collect();
        assert_eq!(add_noise(&corrs, 0.0, NoiseUnits::Normalized, &k, 1).unwrap(), corrs);
        let a = add_noise(&corrs, 1e-3, NoiseUnits::Normalized, &k, 1).unwrap();
        assert_eq!(a, add_noise(&corrs, 1e-3, NoiseUnits::Normalized, &k, 1).unwrap());
        assert_ne!(a, add_noise(&corrs, 1e-3, NoiseUnits::Normalized, &k, 2).unwrap());
        // Per endpoint, the 2-D perturbation has RMS sigma * sqrt(2) in normalized units.
        let ms: f64 = a.iter().zip(&corrs).map(|(n, c)| ((n.a.u - c.a.u) / k.fx).powi(2) + ((n.a.v - c.a.v) / k.fy).powi(2)).sum::<f64>()
            / corrs.len() as f64;
        let rms = ms.sqrt();
        assert!((rms - 1e-3 * 2f64.sqrt()).abs() < 0.05 * 1e-3 * 2f64.sqrt(), "rms {rms}");
        let px = add_noise(&corrs, 0.5, NoiseUnits::Pixel, &k, 1).unwrap();
        let ms: f64 = px.iter().zip(&corrs).map(|(n, c)| (n.b.u - c.b.u).powi(2)).sum::<f64>() / corrs.len() as f64;
        assert!((ms.sqrt() - 0.5).abs() < 0.03);
        assert!(add_noise(&corrs, -1.0, NoiseUnits::Pixel, &k, 1).is_err());
    }

    #[test]
    fn metric_identities() {
        let d = Vec3::new(0.3, -0.1, 0.7);
        assert_eq!(translation_error(&d, &d).unwrap(), 0.0);
        assert!((translation_error(&(2.0 * d), &d).unwrap()).abs() < 1e-12);
        assert!((translation_error(&-d, &d).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert!((translation_error(&Vec3::x(), &Vec3::y()).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(translation_error(&Vec3::zeros(), &d).is_err());

        let r = rodrigues(&Vec3::new(0.2, 0.5, -0.3));
        assert_eq!(rotation_error(&r, &r).unwrap(), 0.0);
        for axis in [Vec3::x(), Vec3::new(1.0, 2.0, -0.5).normalize()] {
            for theta in [0.01, 0.5, 2.0] {
                let rel = rodrigues(&(axis * theta));
                assert!((rotation_error(&(rel * r), &r).unwrap() - theta).abs() < 1e-12);
            }
        }
        assert!(matches!(rotation_error(&(2.0 * r), &r), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn linearization_gap_is_small() {
        let w = Vec3::new(0.006, -0.005, 0.0055);
        assert!((w.norm() - 0.01).abs() < 1e-3);
        let lin = orthonormalize(&crate::geom::small_rotation(&w));
        assert!(rotation_error(&lin, &rodrigues(&w)).unwrap() <= 1e-4);
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 100.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec {
            variable: SweepVariable::ReadoutRatio,
            grid: vec![0.4, 0.8],
            trials: 4,
            seed: 42,
            params: SimulationParams::default(),
        };
        let a = sweep_csv(&run_sweep(&spec).unwrap());
        let b = sweep_csv(&run_sweep(&spec).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 4);
        assert!(a.starts_with(SWEEP_CSV_HEADER));
        assert!(run_sweep(&SweepSpec { grid: vec![], ..spec.clone() }).is_err());
        assert!(run_sweep(&SweepSpec { trials: 0, ..spec }).is_err());
    }
}
