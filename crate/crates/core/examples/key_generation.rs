//! Per-party keys drawn from one seed, with their condition numbers.

use maskdispatch::ed::{build_ed_blocks, fixtures::three_bus};
use maskdispatch::privacy::{condition_number, gen_keys, MaskConfig};

fn main() {
    let blocks = build_ed_blocks(&three_bus()).unwrap();
    let cfg = MaskConfig::default();
    let keys = gen_keys(&blocks, 42, &cfg).unwrap();
    for (name, m) in keys.matrices() {
        println!("{name:<8} {}x{}  cond {:>10.2}", m.nrows(), m.ncols(), condition_number(m));
    }
    println!("limit {:.0e}", cfg.cond_max);
    for (i, r) in keys.gencos.iter().enumerate() {
        println!("GENCO{} slack coefficients {:?}", i + 1, r.r);
    }
}
