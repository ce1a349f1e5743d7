//! Three-step search against exhaustive search on a globally shifted
//! texture, and the motion field it produces.

use ukf_tracker::detector::{compute_motion_field, full_search, tss_search, TssParams};
use ukf_tracker::scene::{shifted_pair, Texture};

fn main() -> ukf_tracker::Result<()> {
    let params = TssParams::default();
    let texture = Texture::smooth(4);
    let (current, reference) = shifted_pair(&texture, 128, 96, (5, -3));

    let origin = (48, 32);
    let tss = tss_search(&current, &reference, origin, &params)?;
    let full = full_search(&current, &reference, origin, params.block_size, 7)?;
    println!(
        "block {origin:?}: tss {:?} sad {} in {} evaluations; full search {:?} in {}",
        tss.vector, tss.sad, tss.evaluations, full.vector, full.evaluations
    );

    let field = compute_motion_field(&current, &reference, &params)?;
    println!(
        "motion field ({} x {} blocks):",
        field.blocks_x, field.blocks_y
    );
    for by in 0..field.blocks_y {
        let row: Vec<String> = (0..field.blocks_x)
            .map(|bx| {
                let v = field.get(bx, by);
                format!("{:>3},{:<3}", v.p, v.q)
            })
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
