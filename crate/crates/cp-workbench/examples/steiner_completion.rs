//! Free completion of three points in a (2,3)-Steiner system, stage by stage,
//! and the free product of two generator sets.

use cp_workbench::steiner::{self, PartialSteiner, SteinerError, SteinerParams};

fn main() -> Result<(), SteinerError> {
    let params = SteinerParams::new(2, 3)?;
    let base = PartialSteiner::free_on(params, &["a1", "a2", "a3"])?;
    for stages in 0..=2 {
        let c = steiner::free_completion(&base, stages)?;
        println!(
            "stages {stages}: {} points, {} blocks",
            c.points().len(),
            c.blocks().len()
        );
    }

    let left = PartialSteiner::free_on(params, &["a1"])?;
    let right = PartialSteiner::free_on(params, &["b1", "b2"])?;
    let p = steiner::free_product(&left, &right, 1)?;
    println!("F(a1) * F(b1,b2) at one stage: {} elements", p.structure.len());
    for name in p.structure.names_sorted() {
        println!("  {name}");
    }
    Ok(())
}
