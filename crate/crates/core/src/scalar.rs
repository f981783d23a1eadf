//! The delayed system `p' = c1 p + c2 p(t - Π(t)) - diag(sgn p)(c3 1 + c4 |p|)`
//! under static or adaptive gains.

use crate::control::{AdaptiveRates, ScalarAdaptiveHook, StaticScalarGains};
use crate::delay::{DelayProfile, RateFunction};
use crate::error::{Error, Result};
use crate::history::HistoryTrajectory;
use crate::integrator::{integrate, DelayedSystem, IntegratorConfig};
use crate::Norm;

/// Where `c3`, `c4` come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GainSource {
    Static {
        c3: f64,
        c4: f64,
    },
    /// Read from the gain vector `[c3, c4]` advanced by the integrator.
    Adaptive,
}

#[derive(Clone, Debug)]
pub struct ScalarSystem {
    pub c1: f64,
    pub c2: f64,
    pub gains: GainSource,
    pub delays: DelayProfile,
}

impl ScalarSystem {
    pub fn with_static(gains: StaticScalarGains, delays: DelayProfile) -> Result<Self> {
        gains.validate()?;
        Ok(Self { c1: gains.c1, c2: gains.c2, gains: GainSource::Static { c3: gains.c3, c4: gains.c4 }, delays })
    }

    pub fn with_adaptive(c1: f64, c2: f64, delays: DelayProfile) -> Self {
        Self { c1, c2, gains: GainSource::Adaptive, delays }
    }

    fn c3_c4(&self, gains: &[f64]) -> (f64, f64) {
        match self.gains {
            GainSource::Static { c3, c4 } => (c3, c4),
            GainSource::Adaptive => (gains[0], gains[1]),
        }
    }
}

impl DelayedSystem for ScalarSystem {
    fn dim(&self) -> usize {
        self.delays.components()
    }

    fn drift(
        &self,
        _t: f64,
        td: f64,
        x: &[f64],
        hist: &HistoryTrajectory,
        gains: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let (_, c4) = self.c3_c4(gains);
        for (i, o) in out.iter_mut().enumerate() {
            let lag = self.delays.eval_unchecked(i, td);
            let delayed = hist.query_component(td - lag, i)?;
            *o = (self.c1 - c4) * x[i] + self.c2 * delayed;
        }
        Ok(())
    }

    fn sign_gain(&self, _component: usize, gains: &[f64]) -> f64 {
        self.c3_c4(gains).0
    }
}

/// A scalar experiment: system, initial state and integrator settings.
#[derive(Clone, Debug)]
pub struct ScalarExperiment {
    pub system: ScalarSystem,
    pub initial: Vec<f64>,
    pub integrator: IntegratorConfig,
    /// Adaptive rule, when the gains are adapted.
    pub adaptive: Option<(AdaptiveRates, Norm, RateFunction)>,
}

impl ScalarExperiment {
    pub fn run(&self) -> Result<HistoryTrajectory> {
        if self.initial.len() != self.system.dim() {
            return Err(Error::DimensionMismatch { expected: self.system.dim(), got: self.initial.len() });
        }
        match (&self.adaptive, self.system.gains) {
            (Some((rates, norm, rate)), GainSource::Adaptive) => {
                rates.validate()?;
                rate.validate()?;
                let mut hook =
                    ScalarAdaptiveHook::new(*rates, *norm, *rate, self.system.delays.clone(), self.integrator.zero_tol);
                integrate(&self.system, &self.initial, &self.integrator, Some(&mut hook))
            }
            (None, GainSource::Static { .. }) => integrate(&self.system, &self.initial, &self.integrator, None),
            _ => Err(crate::error::invalid("adaptive", "adaptive rule and gain source disagree")),
        }
    }
}

/// `p' = p + 2 p(0.5 t) - c3 sgn(p) - c4 p`, `p(0) = 2`, `h = 1e-3`, horizon 30.
pub fn example1_static(c3: f64, c4: f64) -> Result<ScalarExperiment> {
    let gains = StaticScalarGains::new(1.0, 2.0, c3, c4)?;
    Ok(ScalarExperiment {
        system: ScalarSystem::with_static(gains, DelayProfile::proportional(0.5, 1)?)?,
        initial: vec![2.0],
        integrator: IntegratorConfig::new(1e-3, 30.0),
        adaptive: None,
    })
}

/// The scalar example under the adaptive rules with `μ(t) = t^0.1` and `c3(0) = c4(0) = 0`.
pub fn example1_adaptive(rates: AdaptiveRates, norm: Norm) -> Result<ScalarExperiment> {
    Ok(ScalarExperiment {
        system: ScalarSystem::with_adaptive(1.0, 2.0, DelayProfile::proportional(0.5, 1)?),
        initial: vec![2.0],
        integrator: IntegratorConfig::new(1e-3, 30.0),
        adaptive: Some((rates, norm, RateFunction::Power { rho: 0.1 })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::settling_time;

    #[test]
    fn example1_static_settles() {
        let tr = example1_static(2.1, 3.5).unwrap().run().unwrap();
        let ts = settling_time(&tr, 1e-9);
        assert!(ts.is_finite() && ts < 30.0, "settling {ts}");
    }

    #[test]
    fn subthreshold_gain_does_not_settle() {
        let mut exp = example1_static(2.1, 1.0).unwrap();
        exp.integrator.horizon = 50.0;
        let tr = exp.run().unwrap();
        assert!(settling_time(&tr, 1e-9).is_infinite());
        assert!(tr.last_state()[0].abs() > 1e-2);
    }

    #[test]
    fn mismatched_adaptive_setup_rejected() {
        let mut exp = example1_static(2.1, 3.5).unwrap();
        exp.adaptive = Some((AdaptiveRates::new(0.1, 0.1, 0.1).unwrap(), Norm::Two, RateFunction::Power { rho: 0.1 }));
        assert!(exp.run().is_err());
    }
}
