//! Write a synthetic frame sequence as PGM files, ready for
//! `ukf-track detect` or `ukf-track track`.
//!
//! ```text
//! cargo run --example render_scene -- crossing frames/
//! ukf-track track --input frames/ --out tracks/
//! ```

use std::path::PathBuf;

use ukf_tracker::scene::Scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "square".into());
    let dir = PathBuf::from(args.next().unwrap_or_else(|| format!("frames_{name}")));

    let (scene, frames) = match name.as_str() {
        "square" => (Scene::moving_square(), 40),
        "leaves" => (Scene::square_with_leaves(), 40),
        "crossing" => (Scene::crossing_pair(), 240),
        other => return Err(format!("unknown scene {other:?} (square, leaves, crossing)").into()),
    };

    std::fs::create_dir_all(&dir)?;
    for k in 0..frames {
        scene
            .render(k)
            .write_pgm(&dir.join(format!("frame_{k:04}.pgm")))?;
    }
    println!(
        "wrote {frames} {}x{} frames to {}",
        scene.width,
        scene.height,
        dir.display()
    );
    Ok(())
}
