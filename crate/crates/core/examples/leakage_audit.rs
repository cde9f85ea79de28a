//! What each party's observers could solve for after a masked round.

use maskdispatch::ed::fixtures::three_bus;
use maskdispatch::protocol::{audit_round, run_market_round, Mode};

fn main() {
    let (_, log) = run_market_round(&three_bus(), 42, Mode::Masked).unwrap();
    for r in audit_round(&log) {
        println!("{:<7} {}", r.owner, r.linear_line());
        println!("{:<7} {}", "", r.bilinear_line());
    }
}
