//! Towers base ∗ M ∗ M ∗ ... with every prefix a strong factor of every
//! later one.

use cp_workbench::harness::{build_tower, ClassAdapter, HarnessError, SteinerAdapter, TfabAdapter};
use cp_workbench::tfab::Characteristic;

fn main() -> Result<(), HarnessError> {
    let s = SteinerAdapter::new(2, 3)?;
    let base = s.build_free_on(&["p0".to_string(), "p1".to_string()])?;
    let t = build_tower(&s, &base, 1, 2)?;
    let sizes: Vec<usize> = t.prefixes.iter().map(|p| s.size(p)).collect();
    println!("steiner: prefix sizes {sizes:?}, checked pairs {:?}", t.factor_checks);

    let a = TfabAdapter::new(Characteristic::integers(), 2)?;
    let base = a.build_free_on(&["x".to_string()])?;
    for m in 1..=3 {
        let t = build_tower(&a, &base, m, 3)?;
        println!("tfab: m={m}, rank {} = 1 + 3·{m}", a.size(t.result()));
    }
    Ok(())
}
