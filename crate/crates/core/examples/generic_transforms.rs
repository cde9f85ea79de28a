//! Column and row masking of a generic partitioned LP.

use maskdispatch::lp::{solve_lp, LpProblem, Sense, SignClass, SolverConfig};
use maskdispatch::privacy::{horizontal_mask_generic, vertical_mask_generic, RowGroup};
use nalgebra::DMatrix;

fn main() {
    // Two owners of two columns each; rows 0-1 are private to owner 1,
    // row 2 to owner 2, row 3 is shared.
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    );
    let lp = LpProblem::new(Sense::Minimize, vec![-1.0, -2.0, -1.5, -0.5])
        .with_inequalities(a, vec![8.0, 9.0, 5.0, 7.0])
        .with_signs(vec![SignClass::NonNegative; 4]);
    let cfg = SolverConfig::default();
    let direct = solve_lp(&lp, &cfg).unwrap();

    let y1 = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.1, 0.9]);
    let y2 = DMatrix::from_row_slice(2, 2, &[0.4, 0.8, 0.6, 0.3]);
    let v = vertical_mask_generic(&lp, &[0..2, 2..4], &[y1, y2]).unwrap();
    let vs = solve_lp(&v.lp, &cfg).unwrap();
    println!("direct {:.6}  column-masked {:.6}", direct.objective, vs.objective);
    println!("recovered x {:?}", v.recover(&vs.x));

    let groups = [
        RowGroup { rows: vec![0, 1], x: DMatrix::from_row_slice(2, 2, &[0.5, -0.4, 0.3, 0.9]), r: vec![1.3, 0.7] },
        RowGroup { rows: vec![2, 3], x: DMatrix::from_row_slice(2, 2, &[-0.6, 0.2, 0.8, 0.5]), r: vec![0.9, 1.8] },
    ];
    let h = horizontal_mask_generic(&lp, &groups).unwrap();
    let hs = solve_lp(&h.lp, &cfg).unwrap();
    println!("direct {:.6}  row-masked    {:.6}", direct.objective, hs.objective);
    let (_, duals) = h.recover_duals(&hs);
    println!("recovered row duals {duals:?} (direct {:?})", direct.dual_in);
}
