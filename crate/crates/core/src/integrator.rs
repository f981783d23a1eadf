//! Fixed-step integration of delayed systems with sign feedback.
//!
//! A system splits its vector field into a smooth `drift` (everything but
//! the sign term) and per-component sign gains `k_i`, so that
//! `x_i' = drift_i - k_i sgn(x_i)`. The stepper handles the discontinuity:
//!
//! * a component sitting exactly at 0 stays there while `|drift_i| <= k_i`
//!   (the equivalent-control sliding regime); otherwise it leaves in the
//!   direction of the drift;
//! * a component whose sign flips during a step is projected to exactly 0
//!   when the overshoot is within the zero band (default `k_i h`) or when the
//!   drift at the start of the step admits sliding.
//!
//! Delayed arguments are read from the stored history by linear
//! interpolation, and from the constant initial history before `t0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::history::HistoryTrajectory;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Euler,
    /// Classical RK4 with delayed arguments and sign pattern frozen at the
    /// start of the step.
    Rk4FrozenDelay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub h: f64,
    pub horizon: f64,
    pub method: Method,
    /// Sliding projection band; `None` uses `k_i h` per component.
    pub zero_band: Option<f64>,
    /// Norm below which the origin counts as reached.
    pub zero_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { t0: 0.0, h: 1e-3, horizon: 30.0, method: Method::Euler, zero_band: None, zero_tol: 1e-9 }
    }
}

impl IntegratorConfig {
    pub fn new(h: f64, horizon: f64) -> Self {
        Self { h, horizon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", format!("step must be positive, got {}", self.h)));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0", format!("start time must be finite and >= 0, got {}", self.t0)));
        }
        if !(self.horizon > self.t0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must exceed t0, got {}", self.horizon)));
        }
        if let Some(b) = self.zero_band {
            if !(b >= 0.0) {
                return Err(invalid("zero_band", format!("must be >= 0, got {b}")));
            }
        }
        if !(self.zero_tol > 0.0) {
            return Err(invalid("zero_tol", format!("must be positive, got {}", self.zero_tol)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.horizon - self.t0) / self.h + 1e-9).floor() as usize
    }
}

/// A delayed vector field `x' = drift(t, x, history) - diag(k) sgn(x)`.
pub trait DelayedSystem {
    fn dim(&self) -> usize;

    /// Smooth part of the vector field at `(t, x)`. Delayed arguments must
    /// be evaluated with the delay clock `delay_time`, i.e. at
    /// `delay_time - π(delay_time)`, from `history`.
    fn drift(
        &self,
        t: f64,
        delay_time: f64,
        x: &[f64],
        history: &HistoryTrajectory,
        gains: &[f64],
        out: &mut [f64],
    ) -> Result<()>;

    /// Coefficient `k_i >= 0` of `-k_i sgn(x_i)`.
    fn sign_gain(&self, _component: usize, _gains: &[f64]) -> f64 {
        0.0
    }
}

/// Adaptive gain law advanced alongside the state.
pub trait GainHook {
    fn names(&self) -> Vec<String>;
    fn initial(&self) -> Vec<f64>;
    /// Gain derivatives at the latest grid time of `history`.
    fn rates(&mut self, history: &HistoryTrajectory, gains: &[f64], out: &mut [f64]) -> Result<()>;
}

#[inline]
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-component treatment of the sign term during one step.
#[derive(Clone, Copy, PartialEq)]
enum SignMode {
    /// Held at zero by equivalent control.
    Sliding,
    /// Sign term frozen at `-k * s`.
    Signed(f64),
}

fn sign_mode(x: f64, drift: f64, k: f64) -> SignMode {
    if x != 0.0 {
        SignMode::Signed(sgn(x))
    } else if drift.abs() <= k {
        SignMode::Sliding
    } else {
        SignMode::Signed(sgn(drift))
    }
}

fn apply_modes(drift: &[f64], modes: &[SignMode], gains_k: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = match modes[i] {
            SignMode::Sliding => 0.0,
            SignMode::Signed(s) => drift[i] - gains_k[i] * s,
        };
    }
}

/// Integrate `system` from `initial_state` over `[t0, horizon]`.
pub fn integrate(
    system: &dyn DelayedSystem,
    initial_state: &[f64],
    config: &IntegratorConfig,
    mut hook: Option<&mut dyn GainHook>,
) -> Result<HistoryTrajectory> {
    config.validate()?;
    let dim = system.dim();
    if initial_state.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: initial_state.len() });
    }
    let (names, mut gains) = match hook.as_deref() {
        Some(hk) => (hk.names(), hk.initial()),
        None => (Vec::new(), Vec::new()),
    };
    let mut traj = HistoryTrajectory::with_gains(config.t0, config.h, initial_state, names, &gains);
    let h = config.h;
    let steps = config.steps();

    let mut x = initial_state.to_vec();
    let mut drift = vec![0.0; dim];
    let mut ks = vec![0.0; dim];
    let mut modes = vec![SignMode::Signed(0.0); dim];
    let mut rate = vec![0.0; dim];
    let mut gain_rates = vec![0.0; gains.len()];
    let mut next = vec![0.0; dim];
    let (mut k2, mut k3, mut k4, mut stage) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);

    for step in 0..steps {
        let t = traj.time(step);
        if let Some(hk) = hook.as_deref_mut() {
            hk.rates(&traj, &gains, &mut gain_rates)?;
        }
        for (i, k) in ks.iter_mut().enumerate() {
            *k = system.sign_gain(i, &gains);
        }
        system.drift(t, t, &x, &traj, &gains, &mut drift)?;
        for i in 0..dim {
            modes[i] = sign_mode(x[i], drift[i], ks[i]);
        }
        apply_modes(&drift, &modes, &ks, &mut rate);

        match config.method {
            Method::Euler => {
                for i in 0..dim {
                    next[i] = x[i] + h * rate[i];
                }
            }
            Method::Rk4FrozenDelay => {
                let mut eval = |tt: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
                    system.drift(tt, t, y, &traj, &gains, &mut stage)?;
                    apply_modes(&stage, &modes, &ks, out);
                    Ok(())
                };
                let y: Vec<f64> = (0..dim).map(|i| x[i] + 0.5 * h * rate[i]).collect();
                eval(t + 0.5 * h, &y, &mut k2)?;
                let y: Vec<f64> = (0..dim).map(|i| x[i] + 0.5 * h * k2[i]).collect();
                eval(t + 0.5 * h, &y, &mut k3)?;
                let y: Vec<f64> = (0..dim).map(|i| x[i] + h * k3[i]).collect();
                eval(t + h, &y, &mut k4)?;
                for i in 0..dim {
                    next[i] = x[i] + h / 6.0 * (rate[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }

        for i in 0..dim {
            if let SignMode::Sliding = modes[i] {
                next[i] = 0.0;
                continue;
            }
            let crossed = x[i] != 0.0 && (next[i] == 0.0 || sgn(next[i]) != sgn(x[i]));
            if crossed {
                let band = config.zero_band.unwrap_or(ks[i] * h);
                if next[i].abs() <= band || drift[i].abs() <= ks[i] {
                    next[i] = 0.0;
                }
            }
        }

        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t + h });
        }
        for (g, r) in gains.iter_mut().zip(&gain_rates) {
            *g += h * r;
        }
        x.copy_from_slice(&next);
        traj.push(&x, &gains);
    }
    Ok(traj)
}

/// First grid time after which the state norm stays below `zero_tol`
/// through the end of the trajectory; `f64::INFINITY` if never.
pub fn settling_time(traj: &HistoryTrajectory, zero_tol: f64) -> f64 {
    let norm = |k: usize| traj.state(k).iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut first = None;
    for k in (0..traj.len()).rev() {
        if norm(k) <= zero_tol {
            first = Some(k);
        } else {
            break;
        }
    }
    first.map_or(f64::INFINITY, |k| traj.time(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `p' = -c sgn(p)`
    struct PureSign(f64);

    impl DelayedSystem for PureSign {
        fn dim(&self) -> usize {
            1
        }
        fn drift(&self, _: f64, _: f64, _: &[f64], _: &HistoryTrajectory, _: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = 0.0;
            Ok(())
        }
        fn sign_gain(&self, _: usize, _: &[f64]) -> f64 {
            self.0
        }
    }

    /// `p' = a p(t - q t) - c sgn(p)`
    struct Pantograph {
        a: f64,
        q: f64,
        c: f64,
    }

    impl DelayedSystem for Pantograph {
        fn dim(&self) -> usize {
            1
        }
        fn drift(
            &self,
            _: f64,
            td: f64,
            _: &[f64],
            hist: &HistoryTrajectory,
            _: &[f64],
            out: &mut [f64],
        ) -> Result<()> {
            out[0] = self.a * hist.query_component(td - self.q * td, 0)?;
            Ok(())
        }
        fn sign_gain(&self, _: usize, _: &[f64]) -> f64 {
            self.c
        }
    }

    #[test]
    fn pure_sign_exact_linear_decay() {
        let cfg = IntegratorConfig::new(1e-3, 4.0);
        let tr = integrate(&PureSign(1.0), &[2.0], &cfg, None).unwrap();
        for k in (0..2000).step_by(97) {
            assert!((tr.state(k)[0] - (2.0 - tr.time(k))).abs() < 1e-12);
        }
        let ts = settling_time(&tr, cfg.zero_tol);
        assert!((ts - 2.0).abs() <= 1e-3 + 1e-12, "settling {ts}");
        assert!(tr.state(tr.len() - 1)[0] == 0.0);
    }

    #[test]
    fn rk4_pure_sign_matches() {
        let cfg = IntegratorConfig { method: Method::Rk4FrozenDelay, ..IntegratorConfig::new(1e-3, 4.0) };
        let tr = integrate(&PureSign(1.5), &[-3.0], &cfg, None).unwrap();
        assert!((settling_time(&tr, 1e-9) - 2.0).abs() <= 1e-3 + 1e-12);
    }

    #[test]
    fn zero_absorption_holds_while_drift_dominated() {
        // delayed drift 0.5 * p(t/2) stays below the sign gain 1.2 once settled
        let sys = Pantograph { a: 0.5, q: 0.5, c: 1.2 };
        let cfg = IntegratorConfig::new(1e-3, 10.0);
        let tr = integrate(&sys, &[1.0], &cfg, None).unwrap();
        let ts = settling_time(&tr, 1e-12);
        assert!(ts < 3.0);
        let k0 = ((ts - tr.t0()) / tr.step()).round() as usize;
        assert!((k0..tr.len()).all(|k| tr.state(k)[0] == 0.0));
    }

    #[test]
    fn leaves_origin_when_drift_exceeds_gain() {
        let sys = Pantograph { a: 3.0, q: 0.5, c: 1.0 };
        let cfg = IntegratorConfig::new(1e-3, 1.0);
        let tr = integrate(&sys, &[1.0], &cfg, None).unwrap();
        assert!(tr.last_state()[0] > 1.0);
    }

    #[test]
    fn divergence_reported() {
        struct Blow;
        impl DelayedSystem for Blow {
            fn dim(&self) -> usize {
                1
            }
            fn drift(
                &self,
                _: f64,
                _: f64,
                x: &[f64],
                _: &HistoryTrajectory,
                _: &[f64],
                out: &mut [f64],
            ) -> Result<()> {
                out[0] = x[0] * x[0] * 1e300;
                Ok(())
            }
        }
        let err = integrate(&Blow, &[10.0], &IntegratorConfig::new(0.1, 5.0), None).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn invalid_config_and_dimension() {
        let bad = IntegratorConfig { h: 0.0, ..IntegratorConfig::default() };
        assert!(integrate(&PureSign(1.0), &[1.0], &bad, None).is_err());
        assert!(matches!(
            integrate(&PureSign(1.0), &[1.0, 2.0], &IntegratorConfig::default(), None),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
