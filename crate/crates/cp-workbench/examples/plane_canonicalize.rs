//! Canonical bases for seeded free-completion truncations.

use cp_workbench::plane::{self, PlaneError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), PlaneError> {
    let budget = 8;
    let (mut passed, mut exhausted, mut failed) = (0, 0, 0);
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = rng.gen_range(1..=3);
        let g = plane::random_generators(extra, &mut rng)?;
        let t = plane::truncation(&g)?.structure;
        let order = plane::derive_order(&g)?;
        let outcome = plane::canonicalize(&g, &order, budget)
            .and_then(|c| plane::verify_recompletion(&c, &t, budget + 8).map(|r| (c, r)));
        match outcome {
            Ok((c, r)) => {
                let b = c.basis();
                println!("seed {seed:2}: {} elements, {} points on L, passed={}", t.len(), b.on_line.len(), r.passed());
                if r.passed() { passed += 1 } else { failed += 1 }
            }
            Err(PlaneError::BudgetExhausted(_)) => {
                println!("seed {seed:2}: budget exhausted");
                exhausted += 1;
            }
            Err(e) => return Err(e),
        }
    }
    println!("passed {passed}, failed {failed}, budget exhausted {exhausted}");
    Ok(())
}
