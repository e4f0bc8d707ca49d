//! Reproducibility manifest embedded in every result file.
//!
//! CSV outputs carry the manifest as a leading `# manifest: {...}` comment;
//! JSON outputs embed it as a `manifest` field. Together with the tool
//! version it pins everything needed to re-run a computation: code spec,
//! noise spec, grids, sample counts, seed, and worker count.

use ci_lab_core::analysis::{CiCurve, CiPoint};
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize, Clone)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erasure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<&'static str>,
    pub workers: usize,
    pub wall_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "ci-lab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            argv: std::env::args().collect(),
            code: None,
            noise: None,
            erasure: None,
            grid: None,
            samples: None,
            seed: None,
            method: None,
            workers: rayon::current_num_threads(),
            wall_ms: 0,
        }
    }

    pub fn code(mut self, v: &str) -> Self {
        self.code = Some(v.to_string());
        self
    }

    pub fn noise(mut self, v: &str) -> Self {
        self.noise = Some(v.to_string());
        self
    }

    pub fn erasure(mut self, v: f64) -> Self {
        self.erasure = Some(v);
        self
    }

    pub fn grid(mut self, v: &str) -> Self {
        self.grid = Some(v.to_string());
        self
    }

    pub fn samples(mut self, v: usize) -> Self {
        self.samples = Some(v);
        self
    }

    pub fn seed(mut self, v: u64) -> Self {
        self.seed = Some(v);
        self
    }

    pub fn method(mut self, v: &'static str) -> Self {
        self.method = Some(v);
        self
    }

    pub fn wall_ms(mut self, v: u128) -> Self {
        self.wall_ms = v;
        self
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// Manifest JSON for a curve CSV, including the curve identity needed to
    /// reconstruct it (label, distance, k).
    pub fn to_json(&self, curve: &CiCurve) -> String {
        let mut v = self.to_value();
        v["label"] = Value::String(curve.label.clone());
        v["distance"] = Value::from(curve.distance);
        v["k"] = Value::from(curve.k);
        serde_json::to_string(&v).expect("manifest serializes")
    }
}

/// Parses a curve CSV produced by [`RunManifest::to_json`] + point rows.
pub fn parse_curve_csv(text: &str) -> Option<CiCurve> {
    let mut label = String::from("curve");
    let mut distance = 0usize;
    let mut k = 1usize;
    let mut points = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(json) = rest.trim().strip_prefix("manifest:") {
                if let Ok(v) = serde_json::from_str::<Value>(json.trim()) {
                    if let Some(s) = v["label"].as_str() {
                        label = s.to_string();
                    }
                    distance = v["distance"].as_u64().unwrap_or(0) as usize;
                    k = v["k"].as_u64().unwrap_or(1) as usize;
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            continue;
        }
        let (Ok(x), Ok(ci), Ok(stderr)) = (cols[0].parse(), cols[1].parse(), cols[2].parse())
        else {
            continue; // header row
        };
        points.push(CiPoint { x, ci, stderr });
    }
    if points.is_empty() {
        return None;
    }
    Some(CiCurve {
        label,
        distance,
        k,
        points,
    })
}
