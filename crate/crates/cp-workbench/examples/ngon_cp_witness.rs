//! The n-gon chain for n = 3 and 5: both orderings of each D configuration,
//! the factor witnesses, and the obstruction.

use cp_workbench::ngon::{self, NGonError};

fn main() -> Result<(), NGonError> {
    for n in [3, 5] {
        let lmax = 1;
        let w = ngon::build_ngon_cp_witness(n, lmax, ngon::CP_STAGES)?;
        println!("n = {n}: ambient has {} elements", w.s().len());
        for l in 0..=lmax {
            let c = w.clause_checks(l)?;
            println!(
                "  l={l} forward={} reverse={} factor_of_B={} chain_step={:?}",
                c.forward_order_valid,
                c.reverse_order_valid,
                c.factor_of_b.found(),
                c.chain_step.as_ref().map(|v| v.found())
            );
        }
        let obs = w.verify_obstruction(lmax)?;
        println!("  stuck set: {} elements", obs.stuck_set.len());
    }
    match ngon::build_ngon_cp_witness(4, 1, ngon::CP_STAGES) {
        Err(e) => println!("n = 4: {e}"),
        Ok(_) => println!("n = 4: unexpectedly built"),
    }
    Ok(())
}
