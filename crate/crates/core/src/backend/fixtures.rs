//! Request/response test vectors for backend implementations, produced by
//! running the mock backend on a small synthetic grid.

use serde_json::{json, Value};

use super::mock::MockBackend;
use super::protocol::{
    encode_image, error_reply, serve, InpaintRequest, TrainRequest, WireTrainSample,
};
use super::{AdapterKind, Backend, BackendError};
use crate::analogy::{compose_grid, inference_mask, render_prompt, GridPanels};
use crate::imaging::RasterImage;

pub const FIXTURE_PANEL: u32 = 64;

fn panel(seed: u32) -> RasterImage {
    RasterImage::from_fn_gray(FIXTURE_PANEL, FIXTURE_PANEL, move |x, y| {
        let (cx, cy) = (x as i64 - 32, y as i64 - 32);
        let r = 10 + 6 * seed as i64;
        if cx * cx + cy * cy <= r * r {
            0
        } else {
            255
        }
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("wire types serialize")
}

/// `(file name, JSON)` pairs. Deterministic for a given PNG encoder.
pub fn generate() -> Result<Vec<(&'static str, Value)>, BackendError> {
    let prompt =
        render_prompt("fixturestyle").map_err(|e| BackendError::permanent(e.to_string()))?;
    let full = compose_grid(
        &GridPanels::complete(panel(0), panel(0).inverted(), panel(1), panel(1).inverted()),
        FIXTURE_PANEL,
    )
    .map_err(|e| BackendError::permanent(e.to_string()))?;
    let masked = compose_grid(
        &GridPanels::new(panel(0), panel(0).inverted(), panel(2)),
        FIXTURE_PANEL,
    )
    .map_err(|e| BackendError::permanent(e.to_string()))?;

    let mock = MockBackend::default();
    let mut options = serde_json::Map::new();
    options.insert("transform".into(), "invert".into());
    let train = TrainRequest {
        kind: AdapterKind::Svat,
        rank: 16,
        steps: 1000,
        samples: vec![WireTrainSample {
            image_png_b64: encode_image(full.canvas())?,
            prompt: prompt.clone(),
        }],
        options,
    };
    let trained = serve::train(&mock, train.clone())?;

    let mut defaults = to_value(&train);
    let obj = defaults.as_object_mut().expect("object");
    obj.remove("rank");
    obj.remove("steps");
    obj.insert("kind".into(), json!("avat"));
    let defaults_reply = serve::train(
        &mock,
        serde_json::from_value(defaults.clone()).expect("valid"),
    )?;

    let inpaint = InpaintRequest::from_job(&super::InpaintJob {
        grid: masked.canvas().clone(),
        mask: inference_mask(&masked).map_err(|e| BackendError::permanent(e.to_string()))?,
        prompt,
        adapter_id: trained.adapter_id.clone(),
        seed: 7,
        samples: 1,
    })?;
    let inpainted = serve::inpaint(&mock, inpaint.clone())?;
    let adapter = serve::adapter(&mock, &trained.adapter_id)?;
    let unknown = mock
        .adapter("mock-svat-0000000000000000")
        .expect_err("not registered");
    let (status, body) = error_reply(&unknown);

    Ok(vec![
        ("health_response.json", to_value(&mock.health()?)),
        ("train_request.json", to_value(&train)),
        ("train_response.json", to_value(&trained)),
        ("train_request_defaults.json", defaults),
        ("train_response_defaults.json", to_value(&defaults_reply)),
        ("adapter_response.json", to_value(&adapter)),
        ("inpaint_request.json", to_value(&inpaint)),
        ("inpaint_response.json", to_value(&inpainted)),
        (
            "error_unknown_adapter.json",
            json!({ "status": status, "body": body }),
        ),
    ])
}
