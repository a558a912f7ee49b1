//! Randomized law checks for every shipped adapter, plus the two seeded faults.

use std::time::Instant;

use cp_workbench::cyclic::Order;
use cp_workbench::harness::{
    verify_amalgamation_laws, ClassAdapter, CyclicAdapter, Fault, Faulty, LawReport, NGonAdapter, SteinerAdapter, TfabAdapter,
    VarietyAdapter,
};
use cp_workbench::tfab::Characteristic;

fn show<A: ClassAdapter>(a: &A, samples: usize) {
    let t = Instant::now();
    let r: LawReport = verify_amalgamation_laws(a, samples, 7).expect("adapter operations succeed");
    let verdicts: Vec<String> = r.checks.iter().map(|c| format!("{}={}", c.clause, c.verdict)).collect();
    println!("{:<40} {}  ({:.2?})", r.adapter, verdicts.join(" "), t.elapsed());
}

fn main() {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    show(&SteinerAdapter::new(2, 3).unwrap(), samples);
    show(&NGonAdapter::new(3).unwrap(), samples);
    show(&CyclicAdapter::new(Order::Finite(2)).unwrap(), samples);
    show(&TfabAdapter::new(Characteristic::integers(), 2).unwrap(), samples);
    show(&VarietyAdapter::parse("op f/2; eq f(f(x,y),z) = f(x,f(y,z))", 2).unwrap(), samples);
    show(&Faulty { inner: CyclicAdapter::new(Order::Infinite).unwrap(), fault: Fault::OrderDependentNaming }, samples);
    show(&Faulty { inner: SteinerAdapter::new(2, 3).unwrap(), fault: Fault::NonAssociative }, samples);
}
