//! Decibel conversions. Everything inside the crate works in linear watts.

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbw(watts: f64) -> f64 {
    10.0 * watts.log10()
}

/// Linear ratio to decibels. Zero maps to negative infinity.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert_eq!(dbw_to_watts(10.0), 10.0);
        assert_eq!(dbw_to_watts(0.0), 1.0);
        assert!((dbm_to_watts(-50.0) - 1e-8).abs() < 1e-22);
        assert!((watts_to_dbw(100.0) - 20.0).abs() < 1e-12);
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
    }
}
