//! Seeded random partial n-gons keep girth at least 2n through free
//! completion.

use cp_workbench::incidence::Dist;
use cp_workbench::ngon::{self, NGonError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), NGonError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for run in 0..12 {
        let n = [3, 4, 5][run % 3];
        let size = rng.gen_range(2..=12);
        let a = ngon::random_partial_ngon(n, size, &mut rng)?;
        let c = ngon::free_completion(&a, 2)?;
        let g = c.structure.girth();
        let ok = match g {
            Dist::Infinity => true,
            Dist::Finite(d) => d >= 2 * n,
        };
        println!("n={n} start={size:2} completed={:4} girth={g:?} ok={ok}", c.structure.len());
    }
    Ok(())
}
