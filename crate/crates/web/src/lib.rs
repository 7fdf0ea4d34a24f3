//! WebAssembly bindings for the static demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

/// Test-case JSON for the `index`-th scenario of the default mission.
#[wasm_bindgen(js_name = generateCase)]
pub fn generate_case(seed: u64, index: u32) -> Result<String, JsError> {
    let tc = demo::generate_case(seed, index).map_err(js_err)?;
    Ok(serde_json::to_string_pretty(&tc).expect("serializable"))
}

/// Top-down SVG of a test case.
#[wasm_bindgen(js_name = scenarioSvg)]
pub fn scenario_svg(case_json: &str) -> Result<String, JsError> {
    let tc = demo::parse_case(case_json).map_err(js_err)?;
    Ok(demo::scenario_svg(&tc, None))
}

#[wasm_bindgen]
pub struct Flight(demo::Flight);

#[wasm_bindgen]
impl Flight {
    #[wasm_bindgen(constructor)]
    pub fn new(case_json: &str) -> Result<Flight, JsError> {
        let tc = demo::parse_case(case_json).map_err(js_err)?;
        demo::Flight::new(tc).map(Flight).map_err(js_err)
    }

    /// Runs up to `steps` planning cycles; true once the flight has ended.
    pub fn advance(&mut self, steps: u32) -> bool {
        self.0.advance(steps)
    }

    /// JSON: `t`, `steps`, `x`, `y`, `yaw`, `finished`, `outcome`,
    /// `verdict`, `min_distance`.
    pub fn status(&self) -> String {
        serde_json::to_string(&self.0.status()).expect("serializable")
    }

    pub fn svg(&self) -> String {
        self.0.svg()
    }

    /// RGBA pixels of the depth view from the current pose.
    #[wasm_bindgen(js_name = depthRgba)]
    pub fn depth_rgba(&self, width: usize, height: usize) -> Vec<u8> {
        self.0.depth_rgba(width, height)
    }
}
