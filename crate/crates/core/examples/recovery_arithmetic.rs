//! Unmasking by hand: a dispatch slice, the angles, and the prices.

use maskdispatch::privacy::{recover_lmp, unmask_slice};
use nalgebra::{DMatrix, DVector};

fn main() {
    // Two-decimal keys and masked values from the three-bus run; the
    // products land within 0.01 of the clear values.
    let yg1 = DMatrix::from_row_slice(3, 3, &[0.38, 0.05, 0.93, 0.56, 0.53, 0.13, 0.07, 0.77, 0.57]);
    println!("P1    = {:?}", unmask_slice(&yg1, &[74.65, -58.16, 69.40]).unwrap());
    let yt = DMatrix::from_row_slice(2, 2, &[0.94, 0.67, 0.32, 0.43]);
    println!("theta = {:?}", unmask_slice(&yt, &[33.03, -47.84]).unwrap());
    let xb = DMatrix::from_row_slice(3, 3, &[0.58, 0.06, 0.92, 0.44, 0.87, 0.22, 0.26, 0.63, 0.37]);
    println!("LMP   = {:?}", recover_lmp(&xb, &[-13.13, -16.22, -0.95]).unwrap());

    // Exact round trip through a full-precision key.
    let known = DVector::from_vec(vec![15.0, 15.5, 16.0]);
    let lam = -(xb.transpose().lu().solve(&known).unwrap());
    println!("exact = {:?}", recover_lmp(&xb, lam.as_slice()).unwrap());
}
