//! Special functions used by the test-function machinery: the Gamma
//! function, the second-kind modified Bessel function K_nu evaluated from
//! its integral representation, and the Gauss hypergeometric function from
//! the Euler integral.

mod bessel;
mod gamma;
mod hyp2f1;

pub(crate) use bessel::bessel_k_scaled;
pub use bessel::{
    bessel_k, bessel_k_dt, bessel_k_large_t, bessel_k_small_t, bessel_ode_residual, BesselEval,
};
pub use gamma::gamma_fn;
pub use hyp2f1::{gauss_2f1, Hyp2f1Eval};
