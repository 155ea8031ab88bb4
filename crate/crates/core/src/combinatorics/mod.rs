//! Composition identities and the `B/B̂/D/E/F` coefficient tower.

mod checks;
mod identities;
mod tower;

use thiserror::Error;

pub use checks::{
    d_degree_check, f_degree_check, first_order_vanishing, run_identity_sweep, DegreeCheck, ExponentGrid,
    IdentitySweep, SweepOutcome, TowerCheck,
};
pub use identities::{
    factorial_expand, factorial_expand_multi, factorial_expand_multi_sides, factorial_expand_sides, identity_da,
    identity_da_brute, identity_ea, identity_ea_brute, identity_ec, identity_ec_brute, identity_harmonic,
    identity_harmonic_brute,
};
pub use tower::{
    bergman_potential_combinatorial, bergman_potential_combinatorial_symbolic, coeff_b, coeff_b_hat, coeff_d, coeff_e,
    coeff_f, multi_factorial, Tower, TowerInput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("index lengths do not match")]
    LengthMismatch,
    #[error("the composed index must be nonzero")]
    EmptyIndex,
    #[error("every selector A_k must be nonzero")]
    ZeroSelector,
    #[error("at least one selector is required")]
    NoSelectors,
    #[error("the X-degree bound must be at least 1")]
    DegreeBound,
}
