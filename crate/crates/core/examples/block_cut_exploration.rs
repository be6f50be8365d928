//! Block-cut tree of an increasing subgraph and the flux-maximising exploration on it.

use perclab::blockcut::{block_cut_tree, constant_potential_instance, explore_all};

fn main() -> perclab::Result<()> {
    let inst = constant_potential_instance(5, 0.8, 3)?;
    let tree = block_cut_tree(&inst.graph, inst.graph.site(0))?;
    println!("{} tree nodes", tree.node_count());

    let reps = explore_all(&inst)?;
    let best = reps.iter().max_by_key(|r| r.path.len()).expect("at least one start");
    println!("{} explorations; longest walk has {} nodes", reps.len(), best.path.len());
    println!(
        "inequalities checked {} / failed {}; telescoping {} ≥ {}",
        best.ineq_component_checked + best.ineq_cut_checked,
        best.ineq_component_failures + best.ineq_cut_failures,
        best.telescoping_lhs,
        best.telescoping_rhs
    );
    print!("{}", best.tree.to_text());
    Ok(())
}
