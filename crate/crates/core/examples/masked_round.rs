//! One masked market round: submissions, agent solve, local recovery.
//!
//! Run with a seed: `cargo run --example masked_round -- 7`.

use maskdispatch::ed::{fixtures::three_bus, solve_clear};
use maskdispatch::protocol::{comm_cost, run_market_round, Mode};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let sys = three_bus();
    let (masked, log) = run_market_round(&sys, seed, Mode::Masked).expect("masked round clears");
    let clear = solve_clear(&sys).unwrap();

    for m in &log.messages {
        println!("{:>6} -> {:<6} {:?} {} scalars", m.sender, m.receiver, m.kind, m.scalar_count);
    }
    let cost = comm_cost(&log);
    println!("up {} scalars ({} bytes), down {} scalars", cost.up_scalars, cost.up_bytes, cost.down_scalars);
    println!("LMP masked {:?}", masked.lmp);
    println!("LMP clear  {:?}", clear.lmp);
    println!("max dispatch difference {:.2e}", clear.dispatch.max_abs_diff(&masked.dispatch));
}
