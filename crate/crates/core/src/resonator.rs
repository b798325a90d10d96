//! Multi-pass propagation: iterates the per-pass operator on the beam
//! state and records the intensity trace behind every figure-style output.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::optics::{
    aperture_matrix, attenuation_factor, crystal_two_beam_matrix, fork_hologram_matrix,
    sinusoidal_grating_matrix, ApertureSpec, GratingKind, GratingSpec, OrderIndex,
    ScatteringOperator,
};
use crate::scalar::Real;

/// Complex amplitude per diffraction order.
///
/// Length 2M+1 with order k at position k+M, or length 2 for the two-beam
/// crystal case (direct beam first).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> BeamState<T> {
    /// Unit-norm state concentrated in the direct beam of a
    /// (2M+1)-dimensional truncation.
    pub fn initial_state(half_width: usize) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::InvalidArgument(
                "truncation half-width must be >= 1".into(),
            ));
        }
        let dim = 2 * half_width + 1;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[half_width] = Complex::new(T::one(), T::zero());
        Ok(Self { amplitudes })
    }

    /// Two-beam input [1, 0]: everything in the direct beam.
    pub fn two_beam_input() -> Self {
        Self {
            amplitudes: vec![
                Complex::new(T::one(), T::zero()),
                Complex::new(T::zero(), T::zero()),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn squared_norm(&self) -> T {
        let mut acc = T::zero();
        for a in &self.amplitudes {
            acc += a.norm_sqr();
        }
        acc
    }

    pub fn intensity_at(&self, position: usize) -> T {
        self.amplitudes[position].norm_sqr()
    }
}

/// One recorded pass: tracked-order intensities, their sum, and the loss
/// (1 - squared norm of the surviving state).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub pass: usize,
    pub intensities: Vec<T>,
    pub total_in_ports: T,
    pub loss: T,
}

/// Per-pass intensities of the tracked orders for N = 0 ... N_max.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace<T> {
    pub tracked_orders: Vec<i32>,
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Real> IntensityTrace<T> {
    pub fn intensity(&self, pass: usize, order: i32) -> Option<T> {
        let col = self.tracked_orders.iter().position(|&k| k == order)?;
        Some(self.rows.get(pass)?.intensities[col])
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub grating: GratingSpec<T>,
    pub aperture: Option<ApertureSpec>,
    pub truncation: usize,
    pub n_max: usize,
    pub attenuation_enabled: bool,
    pub tracked_orders: Vec<i32>,
}

impl<T: Real> ScenarioConfig<T> {
    /// Config with the defaults the headline scenarios use: M = 100,
    /// tracked orders {0, +1}, attenuation off.
    pub fn new(grating: GratingSpec<T>, n_max: usize) -> Self {
        Self {
            grating,
            aperture: None,
            truncation: 100,
            n_max,
            attenuation_enabled: false,
            tracked_orders: vec![0, 1],
        }
    }

    pub fn with_aperture(mut self, aperture: ApertureSpec) -> Self {
        self.aperture = Some(aperture);
        self
    }

    pub fn with_truncation(mut self, half_width: usize) -> Self {
        self.truncation = half_width;
        self
    }

    pub fn with_tracked_orders(mut self, orders: Vec<i32>) -> Self {
        self.tracked_orders = orders;
        self
    }

    pub fn with_attenuation(mut self, enabled: bool) -> Self {
        self.attenuation_enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grating.validate()?;
        if self.n_max < 1 {
            return Err(Error::InvalidArgument("N_max must be >= 1".into()));
        }
        if self.tracked_orders.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one tracked order is required".into(),
            ));
        }
        match self.grating.kind {
            GratingKind::CrystalTwoBeam => {
                if self.aperture.is_some() {
                    return Err(Error::InvalidArgument(
                        "the two-beam crystal model has no aperture plane".into(),
                    ));
                }
                if self.tracked_orders.iter().any(|&k| k != 0 && k != 1) {
                    return Err(Error::InvalidArgument(
                        "two-beam tracked orders must lie in {0, 1}".into(),
                    ));
                }
            }
            _ => {
                if self.truncation < 1 {
                    return Err(Error::InvalidArgument(
                        "truncation half-width must be >= 1".into(),
                    ));
                }
                for &k in &self.tracked_orders {
                    OrderIndex(k).position(self.truncation)?;
                }
                if let Some(aperture) = &self.aperture {
                    for k in aperture.passed_orders() {
                        OrderIndex(k).position(self.truncation)?;
                    }
                    if !aperture.contains_all(&self.tracked_orders) {
                        return Err(Error::InvalidArgument(
                            "tracked orders must be a subset of the aperture's passed orders"
                                .into(),
                        ));
                    }
                }
            }
        }
        if self.attenuation_enabled {
            if self.grating.thickness_nm.is_none() || self.grating.mfp_nm.is_none() {
                return Err(Error::InvalidArgument(
                    "attenuation requires thickness_nm and mfp_nm on the grating".into(),
                ));
            }
        }
        Ok(())
    }

    /// Per-pass intensity transmission T = exp(-t/lambda), or 1 when
    /// attenuation is disabled.
    pub fn transmission(&self) -> Result<T> {
        if !self.attenuation_enabled {
            return Ok(T::one());
        }
        let t = self.grating.thickness_nm.ok_or_else(|| {
            Error::InvalidArgument("attenuation requires thickness_nm".into())
        })?;
        let mfp = self
            .grating
            .mfp_nm
            .ok_or_else(|| Error::InvalidArgument("attenuation requires mfp_nm".into()))?;
        attenuation_factor(t, mfp)
    }
}

/// `amplitude_scale * S * S_aper`: the aperture acts first within each
/// pass; without an aperture this is just the scaled grating operator.
pub fn compose_pass<T: Real>(
    grating_op: &ScatteringOperator<T>,
    aperture_op: Option<&ScatteringOperator<T>>,
    amplitude_scale: T,
) -> Result<ScatteringOperator<T>> {
    if !amplitude_scale.is_finite()
        || amplitude_scale <= T::zero()
        || amplitude_scale > T::one()
    {
        return Err(Error::InvalidArgument(format!(
            "amplitude scale must lie in (0, 1], got {amplitude_scale}"
        )));
    }
    let composed = match aperture_op {
        Some(ap) => grating_op.matmul(ap)?,
        None => grating_op.clone(),
    };
    Ok(composed.scaled(amplitude_scale))
}

fn tracked_positions<T: Real>(config: &ScenarioConfig<T>) -> Vec<usize> {
    match config.grating.kind {
        GratingKind::CrystalTwoBeam => {
            config.tracked_orders.iter().map(|&k| k as usize).collect()
        }
        _ => config
            .tracked_orders
            .iter()
            .map(|&k| (k as i64 + config.truncation as i64) as usize)
            .collect(),
    }
}

/// Builds the per-pass operator for `config` (grating, optional aperture,
/// optional attenuation scale).
pub fn pass_operator<T: Real>(config: &ScenarioConfig<T>) -> Result<ScatteringOperator<T>> {
    config.validate()?;
    let grating_op = match config.grating.kind {
        GratingKind::CrystalTwoBeam => {
            crystal_two_beam_matrix(config.grating.t_over_xi.expect("validated"))?
        }
        GratingKind::Sinusoidal => sinusoidal_grating_matrix(
            config.grating.phase_amplitude.expect("validated"),
            config.truncation,
        )?,
        GratingKind::ForkHologram => {
            fork_hologram_matrix(
                config.grating.phase_amplitude.expect("validated"),
                config.truncation,
            )?
            .0
        }
    };
    let aperture_op = match &config.aperture {
        Some(spec) => Some(aperture_matrix(spec, config.truncation)?),
        None => None,
    };
    let scale = config.transmission()?.sqrt();
    compose_pass(&grating_op, aperture_op.as_ref(), scale)
}

/// Applies the composed per-pass operator `N_max` times by state-vector
/// iteration, recording the tracked intensities after every pass.
pub fn propagate<T: Real>(config: &ScenarioConfig<T>) -> Result<IntensityTrace<T>> {
    let op = pass_operator(config)?;
    let positions = tracked_positions(config);
    let lossless = config.aperture.is_none() && !config.attenuation_enabled;

    let mut state = match config.grating.kind {
        GratingKind::CrystalTwoBeam => BeamState::two_beam_input(),
        _ => BeamState::initial_state(config.truncation)?,
    };

    let mut rows = Vec::with_capacity(config.n_max + 1);
    for pass in 0..=config.n_max {
        let intensities: Vec<T> = positions.iter().map(|&p| state.intensity_at(p)).collect();
        let mut total = T::zero();
        for &v in &intensities {
            total += v;
        }
        let loss = if lossless {
            T::zero()
        } else {
            (T::one() - state.squared_norm()).max(T::zero())
        };
        rows.push(TraceRow {
            pass,
            intensities,
            total_in_ports: total,
            loss,
        });
        if pass < config.n_max {
            state = BeamState {
                amplitudes: op.apply(state.amplitudes())?,
            };
        }
    }

    Ok(IntensityTrace {
        tracked_orders: config.tracked_orders.clone(),
        rows,
    })
}
