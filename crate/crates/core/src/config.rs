//! Flat `key = value` run configuration, motion files and plane-scene files.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown and repeated keys
//! are errors, missing keys take their defaults. Every error carries the line
//! of the offending key (line 0 when the key was left at its default).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::geom::{CameraIntrinsics, MotionVelocity, RotationModel, StereoRigConfig, Vec3};
use crate::rectify::{PlaneScene, Quad, Texture};
use crate::simgen::{NoiseUnits, SimulationParams, SweepSpec, SweepVariable};
use crate::solver::{RansacOptions, SolverOptions, DEFAULT_DEGENERACY_RATIO};
use crate::stereo::SgmParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fx: f64,
    pub fy: f64,
    pub cu: f64,
    pub cv: f64,
    pub width: usize,
    pub n_rows: usize,
    pub half_baseline: f64,
    pub readout_ratio: f64,
    /// Rotation rate, radians per frame.
    pub w: Vec3,
    /// Translation rate, scene units per frame.
    pub d: Vec3,
    pub noise_sigma: f64,
    pub noise_units: NoiseUnits,
    pub trials: usize,
    pub seed: u64,
    pub point_count: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub lateral_extent: f64,
    pub rotation_model: RotationModel,
    /// `|d|` of simulated trials.
    pub translation_speed: f64,
    /// `|w|` of simulated trials, radians per frame.
    pub rotation_speed: f64,
    pub grid_noise: Vec<f64>,
    pub grid_translation_speed: Vec<f64>,
    pub grid_rotation_speed: Vec<f64>,
    pub grid_readout_ratio: Vec<f64>,
    pub grid_baseline: Vec<f64>,
    pub p1: u16,
    pub p2: u16,
    pub d_max: usize,
    pub ransac_threshold: f64,
    pub ransac_iters: usize,
    pub degeneracy_ratio: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimulationParams::default();
        let sgm = SgmParams::default();
        let ransac = RansacOptions::default();
        RunConfig {
            fx: sim.k.fx,
            fy: sim.k.fy,
            cu: sim.k.cu,
            cv: sim.k.cv,
            width: sim.k.width,
            n_rows: sim.k.n_rows,
            half_baseline: sim.half_baseline,
            readout_ratio: sim.readout_ratio,
            w: Vec3::new(2.0, -2.0, 1.0).normalize() * 0.4f64.to_radians(),
            d: Vec3::new(0.1, 0.2, 0.2),
            noise_sigma: sim.noise_sigma,
            noise_units: sim.noise_units,
            trials: 300,
            seed: 0,
            point_count: sim.point_count,
            z_min: sim.z_min,
            z_max: sim.z_max,
            lateral_extent: sim.lateral_extent,
            rotation_model: sim.rotation_model,
            translation_speed: sim.translation_speed,
            rotation_speed: sim.rotation_speed,
            grid_noise: SweepSpec::default_grid(SweepVariable::Noise),
            grid_translation_speed: SweepSpec::default_grid(SweepVariable::TranslationSpeed),
            grid_rotation_speed: SweepSpec::default_grid(SweepVariable::RotationSpeed),
            grid_readout_ratio: SweepSpec::default_grid(SweepVariable::ReadoutRatio),
            grid_baseline: SweepSpec::default_grid(SweepVariable::Baseline),
            p1: sgm.p1,
            p2: sgm.p2,
            d_max: sgm.d_max,
            ransac_threshold: ransac.threshold,
            ransac_iters: ransac.max_iters,
            degeneracy_ratio: DEFAULT_DEGENERACY_RATIO,
        }
    }
}

const MOTION_KEYS: [&str; 6] = ["w1", "w2", "w3", "d1", "d2", "d3"];

fn num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("cannot parse `{s}`"))
}

fn real(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = num(s)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|t| real(t.trim())).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// `key = value` pairs with their 1-based line numbers; rejects repeats.
fn entries<'a>(text: &'a str, path: &Path) -> Result<Vec<(usize, &'a str, &'a str)>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.insert(key, i + 1) {
            if key != "quad" {
                return Err(err(format!("`{key}` repeated (first on line {first})")));
            }
        }
        out.push((i + 1, key, value));
    }
    Ok(out)
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "fx" => self.fx = real(value)?,
            "fy" => self.fy = real(value)?,
            "cu" => self.cu = real(value)?,
            "cv" => self.cv = real(value)?,
            "width" => self.width = num(value)?,
            "n_rows" => self.n_rows = num(value)?,
            "half_baseline" => self.half_baseline = real(value)?,
            "readout_ratio" => self.readout_ratio = real(value)?,
            "w1" => self.w[0] = real(value)?,
            "w2" => self.w[1] = real(value)?,
            "w3" => self.w[2] = real(value)?,
            "d1" => self.d[0] = real(value)?,
            "d2" => self.d[1] = real(value)?,
            "d3" => self.d[2] = real(value)?,
            "noise_sigma" => self.noise_sigma = real(value)?,
            "noise_units" => {
                self.noise_units = match value {
                    "normalized" => NoiseUnits::Normalized,
                    "pixel" => NoiseUnits::Pixel,
                    _ => return Err(format!("expected `normalized` or `pixel`, found `{value}`")),
                }
            }
            "trials" => self.trials = num(value)?,
            "seed" => self.seed = num(value)?,
            "point_count" => self.point_count = num(value)?,
            "z_min" => self.z_min = real(value)?,
            "z_max" => self.z_max = real(value)?,
            "lateral_extent" => self.lateral_extent = real(value)?,
            "rotation_model" => {
                self.rotation_model = match value {
                    "exact" => RotationModel::Exact,
                    "linearized" => RotationModel::Linearized,
                    _ => return Err(format!("expected `exact` or `linearized`, found `{value}`")),
                }
            }
            "translation_speed" => self.translation_speed = real(value)?,
            "rotation_speed" => self.rotation_speed = real(value)?,
            "grid_noise" => self.grid_noise = list(value)?,
            "grid_translation_speed" => self.grid_translation_speed = list(value)?,
            "grid_rotation_speed" => self.grid_rotation_speed = list(value)?,
            "grid_readout_ratio" => self.grid_readout_ratio = list(value)?,
            "grid_baseline" => self.grid_baseline = list(value)?,
            "p1" => self.p1 = num(value)?,
            "p2" => self.p2 = num(value)?,
            "d_max" => self.d_max = num(value)?,
            "ransac_threshold" => self.ransac_threshold = real(value)?,
            "ransac_iters" => self.ransac_iters = num(value)?,
            "degeneracy_ratio" => self.degeneracy_ratio = real(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// First violated constraint as `(key, message)`.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        let fail = |key, e: Error| Err((key, e.to_string()));
        let need = |ok: bool, key: &'static str, msg: String| if ok { Ok(()) } else { Err((key, msg)) };
        need(self.fx > 0.0, "fx", format!("fx must be positive, got {}", self.fx))?;
        need(self.fy > 0.0, "fy", format!("fy must be positive, got {}", self.fy))?;
        need(self.width >= 5, "width", format!("width must be >= 5, got {}", self.width))?;
        need(self.n_rows >= 5, "n_rows", format!("n_rows must be >= 5, got {}", self.n_rows))?;
        need((0.0..self.n_rows as f64).contains(&self.cu), "cu", format!("cu = {} outside [0, n_rows)", self.cu))?;
        need((0.0..self.width as f64).contains(&self.cv), "cv", format!("cv = {} outside [0, width)", self.cv))?;
        if let Err(e) = StereoRigConfig::new(self.half_baseline, 1.0, 2) {
            return fail("half_baseline", e);
        }
        if let Err(e) = StereoRigConfig::new(1.0, self.readout_ratio, 2) {
            return fail("readout_ratio", e);
        }
        need(self.noise_sigma >= 0.0, "noise_sigma", format!("noise_sigma must be >= 0, got {}", self.noise_sigma))?;
        need(self.trials >= 1, "trials", "trials must be >= 1".into())?;
        need(
            self.point_count >= crate::solver::MIN_PER_SIDE,
            "point_count",
            format!("point_count must be >= {}", crate::solver::MIN_PER_SIDE),
        )?;
        need(self.z_min > 0.0, "z_min", format!("z_min must be positive, got {}", self.z_min))?;
        need(self.z_max >= self.z_min, "z_max", format!("z_max = {} below z_min = {}", self.z_max, self.z_min))?;
        need(self.lateral_extent > 0.0, "lateral_extent", format!("lateral_extent must be positive, got {}", self.lateral_extent))?;
        need(self.translation_speed >= 0.0, "translation_speed", "translation_speed must be >= 0".into())?;
        need(self.rotation_speed >= 0.0, "rotation_speed", "rotation_speed must be >= 0".into())?;
        for var in SweepVariable::ALL {
            let key = grid_key(var);
            if let Err(e) = self.sweep_spec(var).validate() {
                return fail(key, e);
            }
        }
        if let Err(e) = self.sgm().validate() {
            return fail(
                if self.p1 > self.p2 {
                    "p1"
                } else if self.d_max < 2 {
                    "d_max"
                } else {
                    "p2"
                },
                e,
            );
        }
        need(self.d_max < self.width, "d_max", format!("d_max = {} must be below width = {}", self.d_max, self.width))?;
        need(self.ransac_threshold > 0.0, "ransac_threshold", "ransac_threshold must be positive".into())?;
        need(self.ransac_iters >= 1, "ransac_iters", "ransac_iters must be >= 1".into())?;
        need(self.degeneracy_ratio >= 1.0, "degeneracy_ratio", format!("degeneracy_ratio must be >= 1, got {}", self.degeneracy_ratio))?;
        Ok(())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut lines: HashMap<&str, usize> = HashMap::new();
        for (line, key, value) in entries(text, path)? {
            cfg.set(key, value).map_err(|message| Error::Parse { path: path.to_path_buf(), line, message: format!("{key}: {message}") })?;
            lines.insert(key, line);
        }
        cfg.check().map_err(|(key, message)| Error::Parse {
            path: path.to_path_buf(),
            line: lines.get(key).copied().unwrap_or(0),
            message: format!("{key}: {message}"),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&crate::io::read_text(path)?, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(key, message)| Error::InvalidParameter(format!("{key}: {message}")))
    }

    /// Every key, in a fixed order, with round-trip exact values.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("fx", self.fx.to_string());
        kv("fy", self.fy.to_string());
        kv("cu", self.cu.to_string());
        kv("cv", self.cv.to_string());
        kv("width", self.width.to_string());
        kv("n_rows", self.n_rows.to_string());
        kv("half_baseline", self.half_baseline.to_string());
        kv("readout_ratio", self.readout_ratio.to_string());
        for (i, k) in MOTION_KEYS.iter().enumerate() {
            kv(k, if i < 3 { self.w[i] } else { self.d[i - 3] }.to_string());
        }
        kv("noise_sigma", self.noise_sigma.to_string());
        kv(
            "noise_units",
            match self.noise_units {
                NoiseUnits::Normalized => "normalized",
                NoiseUnits::Pixel => "pixel",
            }
            .into(),
        );
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("point_count", self.point_count.to_string());
        kv("z_min", self.z_min.to_string());
        kv("z_max", self.z_max.to_string());
        kv("lateral_extent", self.lateral_extent.to_string());
        kv(
            "rotation_model",
            match self.rotation_model {
                RotationModel::Exact => "exact",
                RotationModel::Linearized => "linearized",
            }
            .into(),
        );
        kv("translation_speed", self.translation_speed.to_string());
        kv("rotation_speed", self.rotation_speed.to_string());
        kv("grid_noise", fmt_list(&self.grid_noise));
        kv("grid_translation_speed", fmt_list(&self.grid_translation_speed));
        kv("grid_rotation_speed", fmt_list(&self.grid_rotation_speed));
        kv("grid_readout_ratio", fmt_list(&self.grid_readout_ratio));
        kv("grid_baseline", fmt_list(&self.grid_baseline));
        kv("p1", self.p1.to_string());
        kv("p2", self.p2.to_string());
        kv("d_max", self.d_max.to_string());
        kv("ransac_threshold", self.ransac_threshold.to_string());
        kv("ransac_iters", self.ransac_iters.to_string());
        kv("degeneracy_ratio", self.degeneracy_ratio.to_string());
        s
    }

    /// Settings of the rectification experiment: 900x900 at f = 1384.6,
    /// 0.1 half baseline, 64 disparity levels.
    pub fn rectification_preset() -> Self {
        RunConfig { fx: 1384.6, fy: 1384.6, half_baseline: 0.1, d_max: 64, ..Self::default() }
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::new(self.fx, self.fy, self.cu, self.cv, self.width, self.n_rows)
    }

    pub fn rig(&self) -> Result<StereoRigConfig> {
        StereoRigConfig::new(self.half_baseline, self.readout_ratio, self.n_rows)
    }

    pub fn motion(&self) -> MotionVelocity {
        MotionVelocity::new(self.w, self.d)
    }

    pub fn sgm(&self) -> SgmParams {
        SgmParams { p1: self.p1, p2: self.p2, d_max: self.d_max, ..SgmParams::default() }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { degeneracy_ratio: self.degeneracy_ratio, ..SolverOptions::default() }
    }

    pub fn ransac_options(&self) -> RansacOptions {
        RansacOptions { threshold: self.ransac_threshold, max_iters: self.ransac_iters, seed: self.seed, solver: self.solver_options() }
    }

    pub fn simulation_params(&self) -> SimulationParams {
        SimulationParams {
            k: CameraIntrinsics { fx: self.fx, fy: self.fy, cu: self.cu, cv: self.cv, width: self.width, n_rows: self.n_rows },
            half_baseline: self.half_baseline,
            readout_ratio: self.readout_ratio,
            translation_speed: self.translation_speed,
            rotation_speed: self.rotation_speed,
            noise_sigma: self.noise_sigma,
            noise_units: self.noise_units,
            point_count: self.point_count,
            z_min: self.z_min,
            z_max: self.z_max,
            lateral_extent: self.lateral_extent,
            rotation_model: self.rotation_model,
        }
    }

    pub fn grid(&self, var: SweepVariable) -> &[f64] {
        match var {
            SweepVariable::Noise => &self.grid_noise,
            SweepVariable::TranslationSpeed => &self.grid_translation_speed,
            SweepVariable::RotationSpeed => &self.grid_rotation_speed,
            SweepVariable::ReadoutRatio => &self.grid_readout_ratio,
            SweepVariable::Baseline => &self.grid_baseline,
        }
    }

    pub fn sweep_spec(&self, var: SweepVariable) -> SweepSpec {
        SweepSpec { variable: var, grid: self.grid(var).to_vec(), trials: self.trials, seed: self.seed, params: self.simulation_params() }
    }
}

fn grid_key(var: SweepVariable) -> &'static str {
    match var {
        SweepVariable::Noise => "grid_noise",
        SweepVariable::TranslationSpeed => "grid_translation_speed",
        SweepVariable::RotationSpeed => "grid_rotation_speed",
        SweepVariable::ReadoutRatio => "grid_readout_ratio",
        SweepVariable::Baseline => "grid_baseline",
    }
}

/// A motion file holds only `w1..w3, d1..d3`; all six are required.
pub fn parse_motion(text: &str, path: &Path) -> Result<MotionVelocity> {
    let mut vals = [None; 6];
    for (line, key, value) in entries(text, path)? {
        let err = |message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let i = MOTION_KEYS.iter().position(|k| *k == key).ok_or_else(|| err(format!("unknown motion key `{key}`")))?;
        vals[i] = Some(real(value).map_err(|m| err(format!("{key}: {m}")))?);
    }
    let mut out = [0.0; 6];
    for (i, v) in vals.iter().enumerate() {
        out[i] = v.ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 0, message: format!("missing `{}`", MOTION_KEYS[i]) })?;
    }
    Ok(MotionVelocity::new(Vec3::new(out[0], out[1], out[2]), Vec3::new(out[3], out[4], out[5])))
}

pub fn format_motion(m: &MotionVelocity) -> String {
    let v = [m.w[0], m.w[1], m.w[2], m.d[0], m.d[1], m.d[2]];
    MOTION_KEYS.iter().zip(v).map(|(k, x)| format!("{k} = {x}\n")).collect()
}

pub fn load_motion(path: &Path) -> Result<MotionVelocity> {
    parse_motion(&crate::io::read_text(path)?, path)
}

/// Plane-scene file: `background = N` and any number of
/// `quad = ox oy oz  sx sy sz  tx ty tz  TEXTURE`, where `TEXTURE` is
/// `checker SIZE DARK LIGHT` or `noise SEED CELL OCTAVES LO HI`.
pub fn parse_scene(text: &str, path: &Path) -> Result<PlaneScene> {
    let mut scene = PlaneScene { quads: Vec::new(), background: 128 };
    for (line, key, value) in entries(text, path)? {
        let err = |message: String| Error::Parse { path: path.to_path_buf(), line, message };
        match key {
            "background" => scene.background = num(value).map_err(err)?,
            "quad" => scene.quads.push(parse_quad(value).map_err(err)?),
            _ => return Err(err(format!("unknown scene key `{key}`"))),
        }
    }
    if scene.quads.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 0, message: "scene has no quads".into() });
    }
    Ok(scene)
}

fn parse_quad(value: &str) -> std::result::Result<Quad, String> {
    let t: Vec<&str> = value.split_whitespace().collect();
    if t.len() < 10 {
        return Err(format!("quad needs 9 coordinates and a texture, found {} fields", t.len()));
    }
    let mut c = [0.0; 9];
    for (slot, s) in c.iter_mut().zip(&t[..9]) {
        *slot = real(s)?;
    }
    let args = &t[10..];
    let texture = match (t[9], args.len()) {
        ("checker", 3) => {
            let size = real(args[0])?;
            if !(size > 0.0) {
                return Err(format!("checker size must be positive, got {size}"));
            }
            Texture::Checker { size, dark: num(args[1])?, light: num(args[2])? }
        }
        ("noise", 5) => {
            let cell = real(args[1])?;
            if !(cell > 0.0) {
                return Err(format!("noise cell must be positive, got {cell}"));
            }
            Texture::Noise { seed: num(args[0])?, cell, octaves: num(args[2])?, lo: num(args[3])?, hi: num(args[4])? }
        }
        (kind, n) => return Err(format!("bad texture `{kind}` with {n} arguments")),
    };
    let edge_s = Vec3::new(c[3], c[4], c[5]);
    let edge_t = Vec3::new(c[6], c[7], c[8]);
    if edge_s.cross(&edge_t).norm() <= 1e-12 {
        return Err("quad edges are parallel".into());
    }
    Ok(Quad { origin: Vec3::new(c[0], c[1], c[2]), edge_s, edge_t, texture })
}

pub fn format_scene(scene: &PlaneScene) -> String {
    let mut s = format!("background = {}\n", scene.background);
    for q in &scene.quads {
        let v = |x: &Vec3| format!("{} {} {}", x[0], x[1], x[2]);
        let tex = match q.texture {
            Texture::Checker { size, dark, light } => format!("checker {size} {dark} {light}"),
            Texture::Noise { seed, cell, octaves, lo, hi } => format!("noise {seed} {cell} {octaves} {lo} {hi}"),
        };
        let _ = writeln!(s, "quad = {}  {}  {}  {}", v(&q.origin), v(&q.edge_s), v(&q.edge_t), tex);
    }
    s
}

pub fn load_scene(path: &Path) -> Result<PlaneScene> {
    parse_scene(&crate::io::read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KEYS: [&str; 36] = [
        "fx",
        "fy",
        "cu",
        "cv",
        "width",
        "n_rows",
        "half_baseline",
        "readout_ratio",
        "w1",
        "w2",
        "w3",
        "d1",
        "d2",
        "d3",
        "noise_sigma",
        "noise_units",
        "trials",
        "seed",
        "point_count",
        "z_min",
        "z_max",
        "lateral_extent",
        "rotation_model",
        "translation_speed",
        "rotation_speed",
        "grid_noise",
        "grid_translation_speed",
        "grid_rotation_speed",
        "grid_readout_ratio",
        "grid_baseline",
        "p1",
        "p2",
        "d_max",
        "ransac_threshold",
        "ransac_iters",
        "degeneracy_ratio",
    ];

    fn p() -> &'static Path {
        Path::new("run.cfg")
    }

    #[test]
    fn defaults_round_trip() {
        for cfg in [RunConfig::default(), RunConfig::rectification_preset()] {
            let text = cfg.serialize();
            assert_eq!(RunConfig::parse(&text, p()).unwrap(), cfg);
            assert_eq!(RunConfig::parse(&text, p()).unwrap().serialize(), text);
        }
        assert_eq!(RunConfig::parse("", p()).unwrap(), RunConfig::default());
    }

    #[test]
    fn serialized_keys_are_exactly_the_known_keys() {
        let text = RunConfig::default().serialize();
        let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        let known = KEYS;
        assert_eq!(keys.len(), known.len());
        for k in known {
            assert!(keys.contains(&k), "{k}");
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse("# header\n\nfx = 500 # trailing\n  seed=7\n", p()).unwrap();
        assert_eq!((cfg.fx, cfg.seed), (500.0, 7));
    }

    fn line_of(text: &str) -> usize {
        match RunConfig::parse(text, p()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_point_at_lines() {
        assert_eq!(line_of("fx = 800\nbogus = 1\n"), 2);
        assert_eq!(line_of("fx = 800\n\nfy = abc\n"), 3);
        assert_eq!(line_of("seed = 1\nseed = 2\n"), 2);
        assert_eq!(line_of("fx = 800\nno equals sign\n"), 2);
        assert_eq!(line_of("# c\nreadout_ratio = 1.5\n"), 2);
        assert_eq!(line_of("z_min = 10\nz_max = 5\n"), 2);
        assert_eq!(line_of("width = 100\ncv = 50\n"), 0);
        assert_eq!(line_of("d_max = 128\nwidth = 100\ncv = 50\n"), 1);
        assert_eq!(line_of("p1 = 200\n"), 1);
        assert_eq!(line_of("grid_readout_ratio = 0.5, 1.5\n"), 1);
        assert_eq!(line_of("noise_units = furlongs\n"), 1);
        assert_eq!(line_of("fx = inf\n"), 1);
    }

    #[test]
    fn motion_files() {
        let m = MotionVelocity::new(Vec3::new(1e-3, -2e-3, 0.1), Vec3::new(0.3, 0.0, -1.0 / 3.0));
        assert_eq!(parse_motion(&format_motion(&m), p()).unwrap(), m);
        assert!(parse_motion("w1 = 0\n", p()).is_err());
        assert!(parse_motion(&format!("{}fx = 1\n", format_motion(&m)), p()).is_err());
        let cfg = RunConfig::default();
        let block: String = cfg
            .serialize()
            .lines()
            .filter(|l| MOTION_KEYS.iter().any(|k| l.starts_with(&format!("{k} "))))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(parse_motion(&block, p()).unwrap(), cfg.motion());
    }

    #[test]
    fn scene_files() {
        let scene = PlaneScene::layered(9);
        assert_eq!(parse_scene(&format_scene(&scene), p()).unwrap(), scene);
        assert!(parse_scene("background = 3\n", p()).is_err());
        let bad = "quad = 0 0 5  1 0 0  2 0 0  checker 1 0 255\n";
        assert!(matches!(parse_scene(bad, p()), Err(Error::Parse { line: 1, .. })));
        assert!(parse_scene("quad = 0 0 5 1 0 0 0 1 0 stripes 1\n", p()).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_configs_round_trip(
            fx in 1.0f64..5000.0,
            ratio in 0.01f64..=1.0,
            b in 1e-3f64..10.0,
            w in prop::array::uniform3(-0.1f64..0.1),
            d in prop::array::uniform3(-2.0f64..2.0),
            seed in any::<u64>(),
            grid in prop::collection::vec(0.0f64..1e-2, 1..8),
            p2 in 10u16..1000,
        ) {
            let cfg = RunConfig {
                fx,
                readout_ratio: ratio,
                half_baseline: b,
                w: Vec3::from(w),
                d: Vec3::from(d),
                seed,
                grid_noise: grid,
                p2,
                ..RunConfig::default()
            };
            let text = cfg.serialize();
            let back = RunConfig::parse(&text, p()).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.serialize(), text);
        }
    }
}
