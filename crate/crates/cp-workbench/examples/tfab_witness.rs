//! Rank-one torsion-free abelian groups: characteristics, p-heights, and
//! the chain witness for χ = ℤ and χ = "3:inf;default:0".

use cp_workbench::tfab::{self, Characteristic, RankedGroup, TfabError};

fn main() -> Result<(), TfabError> {
    let c: Characteristic = "2:0;3:inf;default:0".parse()?;
    println!("χ = {c}, χ(3) = {}, Q-type: {}", c.at(3), c.is_q_type());
    println!("1/9 in R_χ: {}", tfab::membership_rchi(&tfab::rational(1, 9), &c));
    println!("1/2 in R_χ: {}", tfab::membership_rchi(&tfab::rational(1, 2), &c));

    let g = RankedGroup::new(Characteristic::integers(), 2)?;
    let v = vec![tfab::rational(12, 1), tfab::rational(8, 1)];
    println!("2-height of (12, 8) in ℤ²: {}", g.p_height(&v, 2)?);

    for chi in [Characteristic::integers(), "3:inf;default:0".parse()?] {
        let w = tfab::build_tfab_cp_witness(&chi, 2, 6, 64)?;
        println!(
            "χ = {chi}: determinants {:?}, telescoping exact {}, fresh height {}, passed {}",
            w.determinants,
            w.telescoping.iter().all(|t| t.exact),
            w.fresh_height,
            w.passed()
        );
    }
    Ok(())
}
