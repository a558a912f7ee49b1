//! Free products of cyclic groups: the reflection obstruction for order 2
//! and the 2-divisibility certificates for order 5 and infinite order.

use cp_workbench::cyclic::{self, GroupParams, GroupWord};

fn main() -> Result<(), cyclic::CyclicError> {
    let p2 = GroupParams::finite(2);
    let w = cyclic::build_cyclic_cp_witness(&p2, 3, 12);
    for (i, y) in w.y.iter().enumerate() {
        println!(
            "order 2: y{i} = {y}, order {:?}, reflection {}",
            cyclic::element_order(y, &p2, 64),
            cyclic::is_reflection_conjugate(y, &p2)?
        );
    }
    println!("order 2 obstruction: {} passed={}", w.obstruction.kind(), w.obstruction.passed());

    for p in [GroupParams::finite(5), GroupParams::infinite()] {
        for k in 1..=4 {
            let c = cyclic::quotient_congruence(0, k, &p)?;
            println!("order {}: k={k} {} verifies={}", p.order, c.conclusion(), c.verify(&p));
        }
    }

    let pinf = GroupParams::infinite();
    let a = GroupWord::parse("x0^2*x1^-1", &pinf)?;
    let b = a.inverse(&pinf);
    println!("({a}) * ({b}) = {}", a.multiply(&b, &pinf));
    Ok(())
}
