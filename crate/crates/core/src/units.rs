//! SI conversion factors. Everything inside the crate is in s, m and s²/m.

pub const PS: f64 = 1e-12;
pub const KM: f64 = 1e3;
/// fs²/m → s²/m
pub const FS2_PER_M: f64 = 1e-30;
/// ps²/km → s²/m
pub const PS2_PER_KM: f64 = 1e-27;
pub const GBD: f64 = 1e9;
