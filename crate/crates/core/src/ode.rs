//! Gaussian-ansatz reduction of the Wigner-Fokker-Planck equation with a harmonic trap and
//! Caldeira-Leggett friction.
//!
//! Substituting `w = exp(−(A p² + B p x + C x² + D))` into
//! `∂w/∂t + (p/m)∂w/∂x − κx∂w/∂p = (Λ₀/τ)∂²w/∂p² + η∂(pw)/∂p` gives
//!
//! ```text
//! A' = −B/m − 4Λ₀A²/τ + 2ηA
//! B' = −2C/m − 4Λ₀AB/τ + 2κA + ηB
//! C' = −Λ₀B²/τ + κB
//! D' = 2Λ₀A/τ − η
//! ```

use crate::error::{invalid, Error, Result};
use crate::state::GaussianParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    pub mass: f64,
    pub tau: f64,
    /// Λ₀ = ħ²Λ₂.
    pub lambda0: f64,
    pub kappa: f64,
    pub eta: f64,
    pub hbar: f64,
}

impl OdeParams {
    pub fn new(mass: f64, tau: f64, lambda0: f64, kappa: f64, eta: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            mass,
            tau,
            lambda0,
            kappa,
            eta,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with the diffusion tied to the bath temperature, `Λ₀ = τ m η k_B T`.
    pub fn thermal(mass: f64, tau: f64, eta: f64, kbt: f64, kappa: f64, hbar: f64) -> Result<Self> {
        if !(kbt > 0.0) {
            return Err(invalid("kbt", format!("must be positive, got {kbt}")));
        }
        Self::new(mass, tau, tau * mass * eta * kbt, kappa, eta, hbar)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(self.lambda0 >= 0.0) {
            return Err(invalid("lambda0", format!("must be >= 0, got {}", self.lambda0)));
        }
        if !(self.kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if !(self.eta >= 0.0) {
            return Err(invalid("eta", format!("must be >= 0, got {}", self.eta)));
        }
        if !(self.hbar > 0.0) {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl OdeState {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn params(&self) -> GaussianParams {
        GaussianParams::new(self.a, self.b, self.c, self.d)
    }

    pub fn is_normalizable(&self) -> bool {
        self.params().is_normalizable()
    }

    fn axpy(&self, h: f64, k: &OdeState) -> OdeState {
        OdeState::new(self.a + h * k.a, self.b + h * k.b, self.c + h * k.c, self.d + h * k.d)
    }
}

impl From<GaussianParams> for OdeState {
    fn from(g: GaussianParams) -> Self {
        Self::new(g.a, g.b, g.c, g.d)
    }
}

pub fn ode_rhs(p: &OdeParams, s: &OdeState) -> OdeState {
    let l = p.lambda0 / p.tau;
    OdeState {
        a: -s.b / p.mass - 4.0 * l * s.a * s.a + 2.0 * p.eta * s.a,
        b: -2.0 * s.c / p.mass - 4.0 * l * s.a * s.b + 2.0 * p.kappa * s.a + p.eta * s.b,
        c: -l * s.b * s.b + p.kappa * s.b,
        d: 2.0 * l * s.a - p.eta,
    }
}

fn rk4_step(p: &OdeParams, s: &OdeState, h: f64) -> OdeState {
    let k1 = ode_rhs(p, s);
    let k2 = ode_rhs(p, &s.axpy(0.5 * h, &k1));
    let k3 = ode_rhs(p, &s.axpy(0.5 * h, &k2));
    let k4 = ode_rhs(p, &s.axpy(h, &k3));
    OdeState {
        a: s.a + h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
        b: s.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
        c: s.c + h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
        d: s.d + h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: OdeState,
}

impl TrajectoryPoint {
    pub fn params(&self) -> GaussianParams {
        self.state.params()
    }

    /// Overall normalisation coefficient exp(−D); tends to 0 when D diverges.
    pub fn exp_minus_d(&self) -> f64 {
        (-self.state.d).exp()
    }

    /// ħ√(2A), or `None` when A ≤ 0.
    pub fn coherence_length(&self, hbar: f64) -> Option<f64> {
        (self.state.a > 0.0).then(|| hbar * (2.0 * self.state.a).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub hbar: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory always holds the initial point")
    }

    /// State at time `t` (nearest sample).
    pub fn at(&self, t: f64) -> &TrajectoryPoint {
        self.points
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
            .expect("trajectory always holds the initial point")
    }
}

/// Classic fixed-step RK4 from `t = 0` to `t_end`, recording every `sample_every` steps
/// plus the final state.
pub fn integrate(params: &OdeParams, init: OdeState, t_end: f64, dt: f64, sample_every: usize) -> Result<Trajectory> {
    params.validate()?;
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) {
        return Err(invalid("t_end", format!("must be >= 0, got {t_end}")));
    }
    let sample_every = sample_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let mut points = vec![TrajectoryPoint { t: 0.0, state: init }];
    let mut s = init;
    for n in 1..=steps {
        s = rk4_step(params, &s, dt);
        if !(s.a.is_finite() && s.b.is_finite() && s.c.is_finite()) {
            return Err(Error::NonFinite { time: n as f64 * dt });
        }
        if n % sample_every == 0 || n == steps {
            points.push(TrajectoryPoint { t: n as f64 * dt, state: s });
        }
    }
    Ok(Trajectory {
        points,
        hbar: params.hbar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `(τη/(2Λ₀), 0, mτκη/(2Λ₀))` for η > 0; `(0, 0, 0)` without friction.
pub fn equilibrium(params: &OdeParams) -> Result<Equilibrium> {
    params.validate()?;
    if params.eta == 0.0 {
        return Ok(Equilibrium { a: 0.0, b: 0.0, c: 0.0 });
    }
    if params.lambda0 == 0.0 {
        return Err(Error::NoEquilibrium(
            "friction without diffusion (lambda0 = 0) contracts the momentum spread indefinitely".into(),
        ));
    }
    let a = params.tau * params.eta / (2.0 * params.lambda0);
    Ok(Equilibrium {
        a,
        b: 0.0,
        c: params.mass * params.kappa * a,
    })
}

/// Long-time physical scales at the friction equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    /// ħ√(2A₀) = ħ√(τη/Λ₀).
    pub coherence_length: f64,
    /// 1/√(2C₀) = √(Λ₀/(mτκη)); infinite without a trap.
    pub position_spread: f64,
    /// k_B T implied by Λ₀ = τmηk_BT.
    pub kbt: f64,
    /// ħ/√(m k_B T), equal to `coherence_length`.
    pub thermal_coherence_length: f64,
    /// √(k_B T/κ), equal to `position_spread`.
    pub thermal_position_spread: f64,
    /// Thermal de Broglie wavelength ħ/√(2m k_B T).
    pub de_broglie_wavelength: f64,
}

pub fn asymptotics(params: &OdeParams) -> Result<Asymptotics> {
    params.validate()?;
    if !(params.eta > 0.0) {
        return Err(invalid("eta", "asymptotic scales need friction (eta > 0)"));
    }
    if !(params.lambda0 > 0.0) {
        return Err(invalid("lambda0", "asymptotic scales need diffusion (lambda0 > 0)"));
    }
    let (m, tau, eta, l0, kappa, hbar) = (params.mass, params.tau, params.eta, params.lambda0, params.kappa, params.hbar);
    let kbt = l0 / (tau * m * eta);
    let position_spread = if kappa > 0.0 {
        (l0 / (m * tau * kappa * eta)).sqrt()
    } else {
        f64::INFINITY
    };
    let thermal_position_spread = if kappa > 0.0 { (kbt / kappa).sqrt() } else { f64::INFINITY };
    Ok(Asymptotics {
        coherence_length: hbar * (tau * eta / l0).sqrt(),
        position_spread,
        kbt,
        thermal_coherence_length: hbar / (m * kbt).sqrt(),
        thermal_position_spread,
        de_broglie_wavelength: hbar / (2.0 * m * kbt).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig(kappa: f64, eta: f64) -> OdeParams {
        OdeParams::new(0.4, 1.0, 1.0, kappa, eta, 1.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let p = fig(1.0, 0.0);
        let r = ode_rhs(&p, &OdeState::new(0.0, 0.0, 0.0, 3.0));
        assert_eq!((r.a, r.b, r.c, r.d), (0.0, 0.0, 0.0, 0.0));

        let r = ode_rhs(&fig(1.0, 0.5), &OdeState::new(0.25, 0.0, 0.1, 0.0));
        for v in [r.a, r.b, r.c, r.d] {
            assert!(v.abs() < 1e-15);
        }

        let p = OdeParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let r = ode_rhs(&p, &OdeState::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!((r.a, r.b, r.c, r.d), (-4.0, 0.0, 0.0, 2.0));
    }

    #[test]
    fn equilibrium_examples() {
        let e = equilibrium(&fig(1.0, 0.5)).unwrap();
        assert!((e.a - 0.25).abs() < 1e-15 && e.b == 0.0 && (e.c - 0.1).abs() < 1e-15);
        assert_eq!(equilibrium(&fig(1.0, 0.0)).unwrap(), Equilibrium { a: 0.0, b: 0.0, c: 0.0 });
        let e = equilibrium(&fig(0.0, 0.5)).unwrap();
        assert_eq!((e.a, e.b, e.c), (0.25, 0.0, 0.0));
        let no_diffusion = OdeParams::new(0.4, 1.0, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert!(matches!(equilibrium(&no_diffusion), Err(Error::NoEquilibrium(_))));
    }

    #[test]
    fn asymptotics_examples() {
        let a = asymptotics(&fig(1.0, 0.5)).unwrap();
        assert!((a.coherence_length - 0.5f64.sqrt()).abs() < 1e-15);
        // equals 1/√(2C₀) with C₀ = 0.1
        assert!((a.position_spread - 5f64.sqrt()).abs() < 1e-14);

        let t = OdeParams::thermal(1.0, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let a = asymptotics(&t).unwrap();
        assert!((a.coherence_length - 1.0).abs() < 1e-15);
        assert!((a.thermal_coherence_length - 1.0).abs() < 1e-15);

        let p = OdeParams::new(2.0, 1.0, 1.0, 1.0, 0.5, 1.0).unwrap();
        let a = asymptotics(&p).unwrap();
        assert!((a.kbt - 1.0).abs() < 1e-15);
        assert!((a.position_spread - 1.0).abs() < 1e-15);
        assert!((a.thermal_position_spread - 1.0).abs() < 1e-15);

        assert!(asymptotics(&fig(0.0, 0.5)).unwrap().position_spread.is_infinite());
        assert!(asymptotics(&fig(1.0, 0.0)).is_err());
    }

    #[test]
    fn figure_two_reaches_equilibrium() {
        let traj = integrate(&fig(1.0, 0.5), OdeState::new(1.0, 0.0, 1.0, 0.0), 50.0, 1e-3, 1000).unwrap();
        let s = traj.last().state;
        assert!((s.a - 0.25).abs() < 1e-5 && s.b.abs() < 1e-5 && (s.c - 0.1).abs() < 1e-5);
        assert!(traj.last().exp_minus_d() > 0.0);
        assert_eq!(traj.points.len(), 51);
    }

    #[test]
    fn rk4_error_drops_sixteenfold() {
        let p = fig(1.0, 0.5);
        let init = OdeState::new(1.0, 0.0, 1.0, 0.0);
        let reference = integrate(&p, init, 5.0, 1e-4, usize::MAX).unwrap().last().state;
        let err = |dt: f64| {
            let s = integrate(&p, init, 5.0, dt, usize::MAX).unwrap().last().state;
            [(s.a - reference.a).abs(), (s.b - reference.b).abs(), (s.c - reference.c).abs(), (s.d - reference.d).abs()]
                .into_iter()
                .fold(0.0, f64::max)
        };
        let ratio = err(0.04) / err(0.02);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn frictionless_c_decreases_when_predicted() {
        let p = fig(1.0, 0.0);
        let traj = integrate(&p, OdeState::new(1.0, 0.0, 1.0, 0.0), 50.0, 1e-3, 1).unwrap();
        for pair in traj.points.windows(2) {
            let s = pair[0].state;
            let l = p.lambda0 / p.tau;
            if s.b * (p.kappa - l * s.b) <= 0.0 {
                assert!(ode_rhs(&p, &s).c <= 0.0);
            }
        }
        // with a trap A oscillates at the trap frequency while its envelope decays like 1/t
        let a_at = |t: f64| traj.at(t).state.a;
        assert!(a_at(40.0) < a_at(20.0) && a_at(20.0) < a_at(10.0) && a_at(10.0) < a_at(5.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn converges_to_equilibrium(
            m in 0.2f64..2.0, tau in 0.5f64..2.0, l0 in 0.2f64..2.0, kappa in 0.2f64..2.0, eta in 0.3f64..1.5,
            a in 0.1f64..2.0, c in 0.1f64..2.0, corr in -0.9f64..0.9,
        ) {
            let p = OdeParams::new(m, tau, l0, kappa, eta, 1.0).unwrap();
            let e = equilibrium(&p).unwrap();
            let zero = ode_rhs(&p, &OdeState::new(e.a, e.b, e.c, 0.0));
            prop_assert!(zero.a.abs() < 1e-14 && zero.b.abs() < 1e-14 && zero.c.abs() < 1e-14);
            let init = OdeState::new(a, corr * 2.0 * (a * c).sqrt(), c, 0.0);
            let traj = integrate(&p, init, 400.0, 1e-2, usize::MAX).unwrap();
            let s = traj.last().state;
            prop_assert!((s.a - e.a).abs() < 1e-6, "A {} vs {}", s.a, e.a);
            prop_assert!(s.b.abs() < 1e-6, "B {}", s.b);
            prop_assert!((s.c - e.c).abs() < 1e-6, "C {} vs {}", s.c, e.c);
        }
    }
}
