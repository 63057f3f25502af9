//! Special functions used by the series representation.

pub mod bessel;
pub mod gamma;
pub mod legendre;

pub use bessel::{b_l, b_l_prime, normalized_bessel_pair, spherical_j_into, spherical_j_sequence};
pub use gamma::{c_kl, gamma_ratio_bn, gamma_ratio_cn, ln_gamma, recip_gamma};
pub use legendre::{legendre_coeffs, legendre_even_coeffs, LegendreCoeffRow};
