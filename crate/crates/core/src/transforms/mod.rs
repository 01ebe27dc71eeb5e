//! Numerical inversion: fixed Talbot contours in any number of time
//! dimensions, radix-2 and fractional FFT, adaptive Gauss–Kronrod
//! quadrature and the damped Fourier call pricer built on them.

mod carr_madan;
mod fft;
mod interp;
mod quadrature;
mod talbot;

pub use carr_madan::{
    black_scholes_call, carr_madan_call, damped_call_transform, european_call_quadrature, european_calls_quadrature,
    CallGrid,
};
pub use fft::{fft_in_place, frfft, FrfftPlan};
pub use interp::{pchip, GridLookup};
pub use quadrature::{integrate, integrate_scalar, QuadratureOptions};
pub use talbot::{talbot_invert, NodeLabel, TalbotGrid};
