//! Solve a small LP and print the primal, the duals and the certificate.

use maskdispatch::lp::{solve_lp, LpProblem, Sense, SignClass, SolverConfig};
use nalgebra::DMatrix;

fn main() {
    // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3,  x, y >= 0
    let lp = LpProblem::new(Sense::Maximize, vec![3.0, 2.0])
        .with_inequalities(
            DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 3.0, 1.0, 0.0]),
            vec![4.0, 6.0, 3.0],
        )
        .with_signs(vec![SignClass::NonNegative; 2]);
    let sol = solve_lp(&lp, &SolverConfig::default()).expect("small LP solves");
    println!("status     {:?}", sol.status);
    println!("objective  {:.6}", sol.objective);
    println!("x          {:?}", sol.x);
    println!("row duals  {:?}", sol.dual_in);
    println!("certificate {:?}", sol.certificate);
}
