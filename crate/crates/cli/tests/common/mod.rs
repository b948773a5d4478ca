#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ais_core::analogy::{Exemplar, StyleManifest};
use ais_core::imaging::io::write_png;
use ais_core::synthetic::{scene, scene_names};

/// The `ais` binary with a clean environment.
pub fn ais() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ais"));
    c.env_remove("AIS_BACKEND_URL");
    c
}

pub fn run(args: &[&str]) -> Output {
    ais().args(args).output().expect("spawn ais")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

pub fn stdout_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text
        .lines()
        .last()
        .unwrap_or_else(|| panic!("no stdout; stderr: {}", String::from_utf8_lossy(&o.stderr)));
    serde_json::from_str(line).unwrap()
}

pub fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
}

/// Writes `n` scenes at `side` px and a manifest with matching panel size.
pub fn style(dir: &Path, n: usize, side: u32) -> PathBuf {
    let mut exemplars = Vec::new();
    for name in scene_names().take(n) {
        let file = format!("{name}.png");
        write_png(dir.join(&file), &scene(name, side).unwrap()).unwrap();
        exemplars.push(Exemplar {
            id: name.to_owned(),
            image: file.into(),
            proxy: None,
            backbone: None,
        });
    }
    let mut m = StyleManifest {
        name: "synth".into(),
        styvec: "flat shapes".into(),
        params: Default::default(),
        exemplars,
        adapters: Default::default(),
    };
    m.params.panel_size = side;
    let path = dir.join("synth.json");
    std::fs::write(&path, m.to_json_pretty()).unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Trains a mock adapter through the CLI and returns its id.
pub fn train(manifest: &Path, state: &Path, url: &str, kind: &str, transform: &str) -> String {
    let o = run(&[
        "train",
        "--manifest",
        s(manifest),
        "--backend-url",
        url,
        "--state-dir",
        s(state),
        "--kind",
        kind,
        "--mock-transform",
        transform,
    ]);
    ok(&o);
    stdout_json(&o)["adapter_id"].as_str().unwrap().to_owned()
}
