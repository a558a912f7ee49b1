//! The Steiner chain A_0 ⩽∗ A_1 ⩽∗ A_2 inside B, with the stuck set that
//! keeps the union from being a strong factor.

use cp_workbench::steiner::{self, SteinerError, SteinerParams};

fn main() -> Result<(), SteinerError> {
    for (k, n) in [(2, 3), (2, 4), (3, 4), (3, 5)] {
        let params = SteinerParams::new(k, n)?;
        let lmax = 2;
        let w = steiner::build_steiner_cp_witness(params, lmax, steiner::CP_STAGES)?;
        println!("(k,n) = ({k},{n}): ambient has {} elements", w.s().len());
        for l in 0..=lmax {
            let c = w.clause_checks(l)?;
            println!(
                "  l={l} order={} factor_of_B={} chain_step={:?}",
                c.order_valid,
                c.factor_of_b.found(),
                c.chain_step.as_ref().map(|v| v.found())
            );
        }
        let obs = w.verify_obstruction(lmax)?;
        println!("  stuck set of {} over a context of {}", obs.stuck_set.len(), obs.context.len());
        let (_, order) = w.table_order(0)?;
        println!("  table order at l=0: {}", order.render());
    }
    Ok(())
}
