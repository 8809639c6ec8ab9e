use crate::error::{ModelError, Result};
use crate::glyc::{GlycCurve, Vla};

/// One dietary kilocalorie in kilojoules.
pub const KJ_PER_KCAL: f64 = 4.184;

/// Physiological constants and unit conversions for one runner.
///
/// Units: minutes, metres, kilograms, kilojoules. Forces are per unit mass
/// (m/min²), energies in the two stores are per unit mass (kJ/kg), the
/// nutrition compartment holds absolute energy (kJ).
#[derive(Debug, Clone, PartialEq)]
pub struct RunnerParams {
    /// Body mass, kg.
    pub mass: f64,
    /// Resistive time constant, min.
    pub tau: f64,
    /// Velocity at 100% VO2max, m/min.
    pub vvo2max: f64,
    /// Basal loss rate of the nutrition compartment, 1/min.
    pub d: f64,
    /// Uptake rate from the nutrition compartment into glycogen, 1/min.
    pub c4: f64,
    /// kJ per J.
    pub a: f64,
    /// Seconds-to-minutes factor applied to the work terms.
    pub sm: f64,
    /// Upper bound on propulsive force, m/min².
    pub f_max: f64,
    /// Initial glycogen store, kJ/kg.
    pub eg0: f64,
    /// Initial fat store, kJ/kg.
    pub ef0: f64,
    pub vla: Vla,
}

impl Default for RunnerParams {
    fn default() -> Self {
        Self::world_record()
    }
}

impl RunnerParams {
    /// Parameters of the sub-two-hour world-record runner.
    pub fn world_record() -> Self {
        Self {
            mass: 55.0,
            tau: 1.0 / 60.0,
            vvo2max: 402.0,
            d: 0.005,
            c4: 1.0 / 6.0,
            a: 1.0 / 1000.0,
            sm: 1.0 / 3600.0,
            f_max: 36000.0,
            eg0: 144.0,
            ef0: 3439.0,
            vla: Vla::Good,
        }
    }

    /// Mass conversion kJ → kJ/kg.
    pub fn c3(&self) -> f64 {
        1.0 / self.mass
    }

    pub fn inv_tau(&self) -> f64 {
        1.0 / self.tau
    }

    /// Factor in front of `f·V·glyc` in the work terms.
    pub fn work_scale(&self) -> f64 {
        self.a * self.sm
    }

    /// Physical velocity ceiling `f_max·τ`.
    pub fn v_max(&self) -> f64 {
        self.f_max * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("tau", self.tau),
            ("vvo2max", self.vvo2max),
            ("f_max", self.f_max),
            ("c4", self.c4),
            ("a", self.a),
            ("sm", self.sm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        let nonneg = [("eg0", self.eg0), ("ef0", self.ef0), ("d", self.d)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParam {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Runner parameters bundled with the fuel-allocation curve they use.
#[derive(Debug, Clone, PartialEq)]
pub struct Runner {
    pub params: RunnerParams,
    pub glyc: GlycCurve,
}

impl Runner {
    /// Uses the shipped curve for `params.vla`.
    pub fn new(params: RunnerParams) -> Result<Self> {
        params.validate()?;
        let glyc = GlycCurve::for_vla(params.vla);
        Ok(Self { params, glyc })
    }

    pub fn with_curve(params: RunnerParams, glyc: GlycCurve) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, glyc })
    }

    pub fn world_record() -> Self {
        Self::new(RunnerParams::world_record()).expect("world-record parameters are valid")
    }

    /// Glycogen share and its derivative with respect to V (not the ratio).
    pub(crate) fn glyc_v(&self, v: f64) -> (f64, f64, f64) {
        let inv = 1.0 / self.params.vvo2max;
        let p = self.glyc.point(v * inv);
        (p.value, p.d1 * inv, p.d2 * inv * inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c3_inverts_mass() {
        for m in [55.0, 73.0, 80.0, 61.3] {
            let p = RunnerParams {
                mass: m,
                ..RunnerParams::world_record()
            };
            assert!((p.c3() * p.mass - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn inverse_tau_is_exact_for_world_record() {
        assert_eq!(RunnerParams::world_record().inv_tau(), 60.0);
        assert_eq!(RunnerParams::world_record().v_max(), 600.0);
    }

    #[test]
    fn validation_catches_bad_values() {
        let bad = RunnerParams {
            tau: 0.0,
            ..RunnerParams::world_record()
        };
        assert!(matches!(
            bad.validate(),
            Err(ModelError::InvalidParam { name: "tau", .. })
        ));
        let bad = RunnerParams {
            eg0: -1.0,
            ..RunnerParams::world_record()
        };
        assert!(bad.validate().is_err());
        let bad = RunnerParams {
            mass: f64::NAN,
            ..RunnerParams::world_record()
        };
        assert!(bad.validate().is_err());
    }
}
