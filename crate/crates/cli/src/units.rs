//! Conversion between peak field strength in atomic units and laser
//! intensity in W/cm².

/// Intensity of a linearly polarized field with amplitude 1 a.u.
pub const ATOMIC_INTENSITY_W_CM2: f64 = 3.509_447_58e16;

pub fn intensity_from_field(f_au: f64) -> f64 {
    ATOMIC_INTENSITY_W_CM2 * f_au * f_au
}

pub fn field_from_intensity(i_w_cm2: f64) -> f64 {
    (i_w_cm2 / ATOMIC_INTENSITY_W_CM2).sqrt()
}
