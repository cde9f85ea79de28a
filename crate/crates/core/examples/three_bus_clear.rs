//! Clear the three-bus market with every bid in one place.

use maskdispatch::ed::{fixtures::three_bus, solve_clear};

fn main() {
    let sys = three_bus();
    let m = solve_clear(&sys).expect("three-bus case clears");
    for (g, gen) in sys.generators.iter().enumerate() {
        println!("{} ({}) segments {:?} total {:.1} MW", gen.id, gen.owner, m.dispatch.generators[g], m.dispatch.generator_total(g, 0));
    }
    for (d, load) in sys.loads.iter().enumerate() {
        println!("{} ({}) segments {:?} total {:.1} MW", load.id, load.owner, m.dispatch.loads[d], m.dispatch.load_total(d, 0));
    }
    println!("angles {:?}", m.angles);
    println!("flows  {:?} MW", m.flows);
    println!("LMP    {:?} $/MWh", m.lmp);
    println!("welfare {:.2}", m.objective);
}
