//! Write a synthetic case file, read it back, and clear it.

use maskdispatch::cli::{parse_case, to_case_string};
use maskdispatch::ed::{gen_synthetic, solve_clear};

fn main() {
    let sys = gen_synthetic(5, 2, 2, 2, 2, 11).unwrap();
    let text = to_case_string(&sys);
    println!("{text}");
    let back = parse_case(&text, "memory").unwrap();
    assert_eq!(back, sys);
    let m = solve_clear(&back).unwrap();
    println!("# welfare {:.3}, LMPs {:?}", m.objective, m.lmp);
}
