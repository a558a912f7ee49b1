//! Free completions of Hall's configurations: a line with k - 2 points and
//! two points off it.

use cp_workbench::plane::{self, PlaneError};

fn main() -> Result<(), PlaneError> {
    for k in 4..=7 {
        let h = plane::hall_config(k)?;
        println!("k={k}: stage sizes {:?}", plane::stage_counts(&h, 2)?);
    }
    println!("k=3: {}", plane::hall_config(3).unwrap_err());
    Ok(())
}
