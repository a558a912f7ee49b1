//! Unified witness reports for the four domains, and one with a seeded
//! chain fault.

use cp_workbench::cyclic::Order;
use cp_workbench::harness::{self, ChainFault, HarnessError};

fn main() -> Result<(), HarnessError> {
    let chi = "3:inf;default:0".parse().expect("characteristic parses");
    let reports = [
        harness::steiner_cp_report(2, 3, 2, 4, 0, None)?,
        harness::ngon_cp_report(3, 1, 11, 0, None)?,
        harness::cyclic_cp_report(Order::Finite(2), 3, 12, 0, None)?,
        harness::cyclic_cp_report(Order::Infinite, 3, 12, 0, None)?,
        harness::tfab_cp_report(&chi, 2, 6, 64, 0, None)?,
    ];
    for r in &reports {
        let kind = r.check(harness::Clause::Obstruction).next().map(|c| c.evidence["kind"].clone());
        println!("{:<28} {} ({} checks, obstruction {})", r.adapter, r.verdict, r.checks.len(), kind.unwrap_or_default());
    }

    let bad = harness::cyclic_cp_report(Order::Finite(2), 3, 12, 0, Some(ChainFault { index: 1 }))?;
    let first = bad.first_failing_check().expect("fault is caught");
    println!("seeded fault: {} at {:?}", first.clause, first.index);
    println!("{}", bad.to_json(false).lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
