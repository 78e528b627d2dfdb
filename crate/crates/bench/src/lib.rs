//! Fixtures shared by the benchmarks.

use privstate_core::states;
use privstate_core::{family_construct, Family, Operator, StateFamilyParams};

/// A family member and its key-attacked state.
pub fn pair(family: Family, d: usize) -> (Operator, Operator) {
    let g = family_construct(&StateFamilyParams::new(family, d)).expect("family builds").state;
    let hat = states::key_attack(&g).expect("key attack");
    (g, hat)
}
