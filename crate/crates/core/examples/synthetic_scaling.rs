//! Communication counts and timing as entities grow.
//!
//! Counts are projected for the 118-bus, 24-hour recipe; timing is measured
//! on the same network for one hour, which the dense solver can hold.

use maskdispatch::ed::{gen_synthetic_with, full_scale, SyntheticConfig};
use maskdispatch::protocol::{projected_counts, runtime_trial, Mode};

fn main() {
    println!("entity_size  up_scalars  up_MB    down_scalars");
    for k in [1, 2, 5, 10] {
        let sys = gen_synthetic_with(&full_scale(k, 7)).unwrap();
        let p = projected_counts(&sys, Mode::Masked);
        println!("{k:>11}  {:>10}  {:>7.2}  {:>12}", p.up_scalars, p.up_bytes() as f64 / 1e6, p.down_scalars);
    }

    let hours = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let sys = gen_synthetic_with(&SyntheticConfig { horizon: hours, ..full_scale(2, 7) }).unwrap();
    match runtime_trial(&sys, &[1, 2]) {
        Ok(r) => println!(
            "118 buses, T={hours}: clear {:.0} ms, masked mean {:.0} ms (sd {:.0}), ratio {:.1}",
            r.clear_ms,
            r.mean_ms,
            r.std_ms,
            r.mean_ratio()
        ),
        Err(e) => println!("118 buses, T={hours}: {e}"),
    }
}
