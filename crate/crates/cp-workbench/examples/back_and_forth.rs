//! Back-and-forth equivalence on small incidence structures.

use cp_workbench::incidence::{fano_plane, IncidenceStructure, Sort};
use cp_workbench::iso::back_and_forth_equivalent;

fn main() {
    let fano = fano_plane();
    let relabeled = fano.renamed(|x| format!("{x}'"));
    let r = back_and_forth_equivalent(&fano, &relabeled);
    println!("fano vs relabeled copy: {:?} after {} pairs", r.verdict, r.pairs_explored);

    // Move one incidence to a line the point was not on.
    let mut j = fano.to_json_value();
    let [p, _] = j.incidences[0].clone();
    let pi = fano.id(&p).unwrap();
    let other = fano
        .indices()
        .find(|&l| fano.sort(l) == Sort::BlockLike && !fano.incident(pi, l))
        .map(|l| fano.name(l).to_string())
        .unwrap();
    j.incidences[0] = [p, other];
    let moved = IncidenceStructure::from_json_value(&j).expect("still bipartite");
    let r = back_and_forth_equivalent(&fano, &moved);
    println!("fano vs one moved incidence: {:?} at round {:?}", r.verdict, r.distinguishing_round);
}
