//! Fixtures shared by the benchmarks.

use sodatlas::equivariant::reflection;
use sodatlas::{DivisorClass, GroupAction, SurfaceModel};

/// The Weyl group S5 acting on the degree-5 del Pezzo lattice, generated by
/// the reflections in E1-E2, E2-E3, E3-E4 and H-E1-E2-E3.
pub fn s5_on_dp5() -> GroupAction {
    let s = SurfaceModel::p2_blown_up(4);
    let roots = [[0, 1, -1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, -1], [1, -1, -1, -1, 0]];
    let gens = roots
        .iter()
        .map(|r| reflection(&s, &DivisorClass(r.to_vec())).expect("(-2)-class"))
        .collect();
    GroupAction::new(s, gens).expect("S5 preserves the form and K")
}

/// Cyclic rotation of the three exceptional curves of the degree-6 surface.
pub fn rotation_on_dp6() -> GroupAction {
    GroupAction::permuting_exceptionals(SurfaceModel::p2_blown_up(3), &[vec![1, 2, 0]]).expect("valid permutation")
}
