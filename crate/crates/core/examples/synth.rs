//! Writes the synthetic scenes and a style manifest referencing them.
//!
//!     cargo run -p ais-core --example synth -- demo/ 512

use std::path::PathBuf;

use ais_core::analogy::{Exemplar, StyleManifest};
use ais_core::imaging::io::write_png;
use ais_core::synthetic::{scene, scene_names};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "demo".into()));
    let side: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(512);
    std::fs::create_dir_all(&out)?;

    let mut exemplars = Vec::new();
    for name in scene_names() {
        let file = format!("{name}.png");
        write_png(out.join(&file), &scene(name, side).expect("listed scene"))?;
        exemplars.push(Exemplar {
            id: name.to_owned(),
            image: file.into(),
            proxy: None,
            backbone: None,
        });
    }
    let mut manifest = StyleManifest {
        name: "synth".into(),
        styvec: "flat shapes".into(),
        params: Default::default(),
        exemplars,
        adapters: Default::default(),
    };
    manifest.params.panel_size = side;
    manifest.validate()?;
    let path = out.join("synth.json");
    std::fs::write(&path, manifest.to_json_pretty())?;
    println!("{}", path.display());
    Ok(())
}
