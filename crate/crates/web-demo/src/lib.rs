//! Browser bindings: render a rolling-shutter frame next to its
//! global-shutter counterpart, undo the skew, and run a small pose sweep.

use rspose::config::RunConfig;
use rspose::geom::{row_pose, CameraIntrinsics, FrameId, MotionVelocity, RotationModel, StereoRigConfig, Vec3};
use rspose::image::{masked_rmse, FloatImage, GrayImage, RgbImage};
use rspose::rectify::{correct_image, fill_holes, overlay_diff, render_gs, synthesize_rs, PlaneScene};
use rspose::simgen::{run_sweep, SweepVariable};
use rspose::svg::sweep_chart;
use rspose::{Error, Result};
use wasm_bindgen::prelude::*;

const SIDE: usize = 300;
const FOCAL: f64 = 1384.6 / 3.0;

fn gray_rgba(img: &GrayImage) -> Vec<u8> {
    img.data().iter().flat_map(|&g| [g, g, g, 255]).collect()
}

fn rgb_rgba(img: &RgbImage) -> Vec<u8> {
    img.data().iter().flat_map(|&[r, g, b]| [r, g, b, 255]).collect()
}

/// Motion for a camera moving sideways and slightly forward while it turns.
pub fn demo_motion(speed: f64, rotation_deg: f64) -> MotionVelocity {
    let d = Vec3::new(0.2, 0.95, 0.25).normalize() * speed;
    let w = Vec3::new(0.3, -1.0, 0.2).normalize() * rotation_deg.to_radians();
    MotionVelocity::new(w, d)
}

pub struct Scene {
    k: CameraIntrinsics,
    rig: StereoRigConfig,
    scene: PlaneScene,
    motion: MotionVelocity,
    rs: GrayImage,
    gs: GrayImage,
    depth: FloatImage,
}

pub struct Corrected {
    pub image: GrayImage,
    pub overlay_before: RgbImage,
    pub overlay_after: RgbImage,
    pub rmse_before: f64,
    pub rmse_after: f64,
}

impl Scene {
    pub fn render(seed: u64, speed: f64, rotation_deg: f64, readout_ratio: f64) -> Result<Self> {
        let k = CameraIntrinsics::new(FOCAL, FOCAL, SIDE as f64 / 2.0, SIDE as f64 / 2.0, SIDE, SIDE)?;
        let rig = StereoRigConfig::new(0.1, readout_ratio, SIDE)?;
        let scene = PlaneScene::layered(seed);
        let motion = demo_motion(speed, rotation_deg);
        let model = RotationModel::Exact;
        let (rs, depth) = synthesize_rs(&scene, &k, &rig, FrameId::I1, &motion, model)?;
        let (gs, _) = render_gs(&scene, &k, &row_pose(&rig, FrameId::I1, 0.0, &motion)?, model);
        Ok(Scene { k, rig, scene, motion, rs, gs, depth })
    }

    pub fn correct(&self, fill: bool) -> Result<Corrected> {
        let (mut image, mut mask) =
            correct_image(&self.rs, &self.depth, &self.k, &self.rig, FrameId::I1, &self.motion, RotationModel::Exact)?;
        if fill {
            (image, mask) = fill_holes(&image, &mask)?;
        }
        let rmse = |a: &GrayImage| masked_rmse(a, &self.gs, &mask).map(|r| r.unwrap_or(f64::NAN));
        Ok(Corrected {
            overlay_before: overlay_diff(&self.rs, &self.gs)?,
            overlay_after: overlay_diff(&image, &self.gs)?,
            rmse_before: rmse(&self.rs)?,
            rmse_after: rmse(&image)?,
            image,
        })
    }

    pub fn quad_count(&self) -> usize {
        self.scene.quads.len()
    }
}

/// Sweep over `variable` with the default grid, returned as an SVG chart.
pub fn sweep(variable: &str, trials: usize, seed: u64) -> Result<String> {
    let var = SweepVariable::parse(variable).ok_or_else(|| Error::InvalidParameter(format!("unknown sweep `{variable}`")))?;
    if trials == 0 || trials > 200 {
        return Err(Error::InvalidParameter("trials must be in 1..=200".into()));
    }
    let cfg = RunConfig { trials, seed, ..RunConfig::default() };
    let rows = run_sweep(&cfg.sweep_spec(var))?;
    Ok(sweep_chart(var.name(), &rows))
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
    corrected: Option<Corrected>,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, speed: f64, rotation_deg: f64, readout_ratio: f64) -> std::result::Result<Demo, JsError> {
        Ok(Demo { scene: Scene::render(seed.into(), speed, rotation_deg, readout_ratio).map_err(js)?, corrected: None })
    }

    pub fn size(&self) -> usize {
        SIDE
    }

    pub fn rolling_rgba(&self) -> Vec<u8> {
        gray_rgba(&self.scene.rs)
    }

    pub fn global_rgba(&self) -> Vec<u8> {
        gray_rgba(&self.scene.gs)
    }

    pub fn correct(&mut self, fill: bool) -> std::result::Result<(), JsError> {
        self.corrected = Some(self.scene.correct(fill).map_err(js)?);
        Ok(())
    }

    fn done(&self) -> std::result::Result<&Corrected, JsError> {
        self.corrected.as_ref().ok_or_else(|| JsError::new("call correct() first"))
    }

    pub fn corrected_rgba(&self) -> std::result::Result<Vec<u8>, JsError> {
        Ok(gray_rgba(&self.done()?.image))
    }

    pub fn overlay_before_rgba(&self) -> std::result::Result<Vec<u8>, JsError> {
        Ok(rgb_rgba(&self.done()?.overlay_before))
    }

    pub fn overlay_after_rgba(&self) -> std::result::Result<Vec<u8>, JsError> {
        Ok(rgb_rgba(&self.done()?.overlay_after))
    }

    pub fn rmse_before(&self) -> f64 {
        self.corrected.as_ref().map_or(f64::NAN, |c| c.rmse_before)
    }

    pub fn rmse_after(&self) -> f64 {
        self.corrected.as_ref().map_or(f64::NAN, |c| c.rmse_after)
    }
}

#[wasm_bindgen]
pub fn sweep_svg(variable: &str, trials: u32, seed: u32) -> std::result::Result<String, JsError> {
    sweep(variable, trials as usize, seed.into()).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn still_camera_needs_no_correction() {
        let s = Scene::render(1, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(s.rs, s.gs);
        let c = s.correct(false).unwrap();
        assert_eq!(c.rmse_before, 0.0);
        assert_eq!(c.rmse_after, 0.0);
        assert_eq!(s.quad_count(), 4);
    }

    #[test]
    fn correction_reduces_error() {
        let s = Scene::render(2, 0.3, 0.4, 0.9).unwrap();
        let c = s.correct(true).unwrap();
        assert!(c.rmse_before > 5.0);
        assert!(c.rmse_after < 0.5 * c.rmse_before, "{} -> {}", c.rmse_before, c.rmse_after);
        assert_eq!(gray_rgba(&c.image).len(), SIDE * SIDE * 4);
    }

    #[test]
    fn sweep_chart_and_bad_input() {
        let svg = sweep("readout_ratio", 2, 0).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("RS e_T"));
        assert!(sweep("sideways", 2, 0).is_err());
        assert!(sweep("noise", 0, 0).is_err());
    }
}
