//! Discretizing a domain: grids, seeded random points, slices, and the fill
//! and separation distances of a point selection.

use gkl::geometry::{fill_distance, separation_distance};
use gkl::CandidateSet;

fn main() -> gkl::Result<()> {
    let grid = CandidateSet::uniform_grid(11, 2)?;
    let random = CandidateSet::sample_random(0, 2000, 3)?;
    println!(
        "grid: {} points, provenance {:?}",
        grid.len(),
        grid.provenance()
    );
    println!(
        "random: {} points, seed {:?}",
        random.len(),
        random.provenance().seed()
    );

    let slice = random.project_to_slice(2, 0.5)?;
    let both = random.union(&slice)?;
    println!(
        "slice x_3 = 0.5: {} points; union: {}",
        slice.len(),
        both.len()
    );

    let picked: Vec<Vec<f64>> = (0..random.len())
        .step_by(100)
        .map(|i| random.point(i).to_vec())
        .collect();
    println!(
        "{} picked points: fill distance {:.4}, separation distance {:.4}",
        picked.len(),
        fill_distance(&picked, &random)?,
        separation_distance(&picked)?
    );
    Ok(())
}
