//! Depth-truncated free algebras of a variety given as text, and their free
//! products.

use cp_workbench::variety::{self, TermAlgebra, Variety, VarietyError};

fn main() -> Result<(), VarietyError> {
    let semigroups = Variety::parse("op f/2; eq f(f(x,y),z) = f(x,f(y,z))")?;
    let g = TermAlgebra::free_on(&semigroups, &["g".to_string()], 2)?;
    println!("free semigroup on g, depth 2: {g}");

    let magmas = Variety::parse("op f/2")?;
    let m = TermAlgebra::free_on(&magmas, &["a".to_string(), "b".to_string()], 1)?;
    println!("free magma on a, b, depth 1: {m}");

    let a = TermAlgebra::free_on(&semigroups, &["a".to_string()], 2)?;
    let b = TermAlgebra::free_on(&semigroups, &["b".to_string()], 2)?;
    let p = variety::free_product(&a, &b, 2)?;
    println!("F(a) * F(b) at depth 2: {} classes", p.class_count());
    Ok(())
}
