use serde::{Deserialize, Serialize};

use crate::RenderError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    PathTraced,
    Preview,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tonemap {
    Reinhard,
    None,
}

pub const PATH_TRACED_SPP: u32 = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderProfile {
    pub mode: RenderMode,
    pub spp: u32,
    /// Maximum number of path vertices.
    pub max_depth: u32,
    /// Russian roulette starts at this depth.
    pub rr_start_depth: u32,
    pub exposure_ev: f64,
    pub white_balance_gains: [f64; 3],
    pub tonemap: Tonemap,
    pub gamma: f64,
}

impl RenderProfile {
    pub fn path_traced() -> Self {
        Self {
            mode: RenderMode::PathTraced,
            spp: PATH_TRACED_SPP,
            max_depth: 5,
            rr_start_depth: 3,
            exposure_ev: 0.0,
            white_balance_gains: [1.0; 3],
            tonemap: Tonemap::Reinhard,
            gamma: 2.2,
        }
    }

    pub fn preview() -> Self {
        Self {
            mode: RenderMode::Preview,
            spp: 1,
            ..Self::path_traced()
        }
    }

    pub fn for_mode(mode: RenderMode) -> Self {
        match mode {
            RenderMode::PathTraced => Self::path_traced(),
            RenderMode::Preview => Self::preview(),
        }
    }

    pub fn with_spp(mut self, spp: u32) -> Self {
        self.spp = spp;
        self
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let err = |m: &str| Err(RenderError::InvalidProfile(m.into()));
        if self.spp == 0 {
            return err("spp must be at least 1");
        }
        if self.max_depth == 0 {
            return err("max_depth must be at least 1");
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return err("gamma must be positive");
        }
        if !self.exposure_ev.is_finite() || self.white_balance_gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return err("exposure and white balance gains must be finite and non-negative");
        }
        Ok(())
    }
}

impl Default for RenderProfile {
    fn default() -> Self {
        Self::path_traced()
    }
}
