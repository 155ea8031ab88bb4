//! Density expansion, Gram matrices and the Bergman potential.

mod density;
mod gram;
mod potential;
mod spec;

pub use density::{density_expansion, det_minor_expansion, gaussian_moment, hessian_determinant};
pub use gram::{gram_inverse, gram_inverse_closed_form, gram_matrix, GramError, GramFlavor, GramMatrix};
pub(crate) use gram::minor_choices;
pub use potential::{
    bergman_potential, bergman_potential_from_inverse, bergman_potential_symbolic, convergence_report,
    convergence_report_from, corner_decay, corner_exponents, corrupt_entry, stability_check, ConvergenceReport,
    KeyVerdict, PotentialError,
};
pub use spec::{CoefficientValue, Perturbation, PotentialSpec, SpecError};
