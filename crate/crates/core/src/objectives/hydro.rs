//! Pressure recovery and shaft power relations.

use super::ObjError;

/// Flow state at the three reference stations: upstream of the runner (0),
/// the diffuser inlet (1), and the diffuser outlet (2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroState {
    /// Pressures in Pa.
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    /// Fluid density, kg/m^3.
    pub rho: f64,
    /// Characteristic velocities at stations 0 and 1, m/s.
    pub v0: f64,
    pub v1: f64,
    /// Cross-sectional area at station 0, m^2.
    pub a0: f64,
}

impl HydroState {
    pub fn validate(&self) -> Result<(), ObjError> {
        if !(self.rho > 0.0) {
            return Err(ObjError::InvalidHydro(format!("rho = {}", self.rho)));
        }
        if !(self.a0 > 0.0) {
            return Err(ObjError::InvalidHydro(format!("a0 = {}", self.a0)));
        }
        if !(self.v1 > 0.0) {
            return Err(ObjError::InvalidHydro(format!("v1 = {}", self.v1)));
        }
        Ok(())
    }
}

/// Dimensionless mean pressure recovery coefficient:
/// `(P2 - P1) / (rho v1^2 / 2)`.
pub fn cprm(state: &HydroState) -> f64 {
    (state.p2 - state.p1) / (0.5 * state.rho * state.v1 * state.v1)
}

/// Available shaft power for a given recovery coefficient:
/// `A0 v0 (P0 - P2 + cprm * rho v1^2 / 2)`, in watts. Affine in `cprm`
/// with slope `A0 v0 rho v1^2 / 2`, so maximizing either is equivalent.
pub fn power_from_cprm(state: &HydroState, cprm: f64) -> f64 {
    state.a0 * state.v0 * (state.p0 - state.p2 + cprm * state.rho * state.v1 * state.v1 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> HydroState {
        HydroState {
            p0: 0.0,
            p1: 0.0,
            p2: 0.0,
            rho: 1000.0,
            v0: 2.0,
            v1: 2.0,
            a0: 1.0,
        }
    }

    #[test]
    fn cprm_zero_when_no_recovery() {
        let s = state();
        assert_eq!(cprm(&s), 0.0);
    }

    #[test]
    fn cprm_one_at_full_dynamic_head() {
        let mut s = state();
        s.p2 = 0.5 * s.rho * s.v1 * s.v1;
        assert_eq!(cprm(&s), 1.0);
    }

    #[test]
    fn cprm_forced_arithmetic() {
        let mut s = state();
        s.p2 = 1000.0;
        // (1000) / (0.5 * 1000 * 4) = 0.5
        assert_eq!(cprm(&s), 0.5);
    }

    #[test]
    fn power_zero_without_recovery_or_head() {
        let s = state();
        assert_eq!(power_from_cprm(&s, 0.0), 0.0);
    }

    #[test]
    fn power_forced_arithmetic() {
        let s = state();
        // 1 * 2 * (0 + 1 * 1000 * 4 / 2) = 4000 W
        assert_eq!(power_from_cprm(&s, 1.0), 4000.0);
    }

    #[test]
    fn power_is_affine_in_cprm_with_exact_slope() {
        let mut s = state();
        s.p0 = 2.0e4;
        s.p2 = 1.5e4;
        let slope = s.a0 * s.v0 * s.rho * s.v1 * s.v1 / 2.0;
        let at = |c: f64| power_from_cprm(&s, c);
        for c in [-1.0, 0.0, 0.3, 0.9, 2.0] {
            assert!((at(c + 1.0) - at(c) - slope).abs() < 1e-9 * slope.abs());
        }
        assert!(at(0.9) > at(0.8));
    }

    #[test]
    fn validation_rejects_nonphysical_states() {
        let mut s = state();
        s.rho = 0.0;
        assert!(s.validate().is_err());
        let mut s = state();
        s.v1 = -1.0;
        assert!(s.validate().is_err());
        assert!(state().validate().is_ok());
    }
}
