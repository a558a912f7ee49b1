//! HF-order search: the free completion of two points is hyperfree over
//! them, while the Fano plane is stuck over any small base.

use std::collections::BTreeSet;

use cp_workbench::hf::{self, Criterion, SearchOutcome};
use cp_workbench::incidence::fano_plane;
use cp_workbench::steiner::{self, PartialSteiner, SteinerParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SteinerParams::new(2, 3)?;
    let c = steiner::free_completion(&PartialSteiner::free_on(params, &["a1", "a2", "a3"])?, 2)?;
    match hf::search_hf_order(&c.structure, &c.basis, params.criterion(), steiner::SEARCH_BUDGET)? {
        SearchOutcome::Order(o) => {
            println!("completion: {}", o.render());
            println!("verified: {:?}", hf::verify_hf_order(&c.structure, &o, params.criterion())?);
        }
        SearchOutcome::Obstruction(o) => println!("unexpected obstruction: {o:?}"),
    }

    let fano = fano_plane();
    let crit = Criterion::Steiner { k: 2, n: 3 };
    let base: BTreeSet<String> = BTreeSet::new();
    match hf::search_hf_order(&fano, &base, crit, 100_000)? {
        SearchOutcome::Order(o) => println!("fano: unexpected order {}", o.render()),
        SearchOutcome::Obstruction(o) => {
            println!("fano: {} elements stuck", o.stuck_set.len());
            println!("certificate re-verifies: {}", hf::verify_obstruction(&fano, &o, crit)?);
        }
    }
    Ok(())
}
