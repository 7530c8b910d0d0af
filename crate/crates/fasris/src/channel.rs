//! Scenario geometry and correlated Rician channel synthesis.
//!
//! The link is BS -> RIS -> UE with no direct path. Both terminals carry a
//! fluid antenna: N selectable ports on a line at `spacing_wavelengths`
//! pitch, correlated by the Jakes model
//!
//!   R[i, j] = J0(2 pi |i - j| d / lambda),
//!
//! while the RIS is an M-element planar grid whose elements fade
//! independently. Each hop is Rician with factor K:
//!
//!   H1 = sqrt(K/(K+1)) A1 + sqrt(1/(K+1)) G1 S_bs^T      (M x N)
//!   H2 = sqrt(K/(K+1)) A2 + sqrt(1/(K+1)) S_ue G2        (N x M)
//!
//! where A1, A2 are rank-1 outer products of array responses along the
//! geometric directions, G1, G2 are i.i.d. CN(0, 1), and S_* is the PSD
//! square root of the port correlation matrix, so port marginals stay unit
//! power and the correlation acts only across FAS ports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    draw_complex_gaussian, hermitian_sqrt, j0_raw, ComplexMatrix, NumericsError, RngStream,
};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("{what} must be positive and finite, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be nonzero")]
    Zero { what: &'static str },
    #[error("direction must be a unit vector, got norm {norm}")]
    NotUnitDirection { norm: f64 },
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("Rician K-factor must be finite and >= 0, got {0}")]
    InvalidKFactor(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

// ── scenario description ───────────────────────────────────────────────────

/// Node positions in meters; the BS and RIS are elevated, the UE is at
/// ground level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Geometry {
    pub bs_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub ue_position: [f64; 3],
}

impl Geometry {
    pub fn bs_ris_distance(&self) -> f64 {
        distance(self.bs_position, self.ris_position)
    }

    pub fn ris_ue_distance(&self) -> f64 {
        distance(self.ris_position, self.ue_position)
    }

    /// Unit vector from the RIS toward the BS.
    pub fn ris_to_bs(&self) -> [f64; 3] {
        unit_direction(self.ris_position, self.bs_position)
    }

    /// Unit vector from the RIS toward the UE.
    pub fn ris_to_ue(&self) -> [f64; 3] {
        unit_direction(self.ris_position, self.ue_position)
    }

    /// Unit vector from the BS toward the RIS.
    pub fn bs_to_ris(&self) -> [f64; 3] {
        unit_direction(self.bs_position, self.ris_position)
    }

    /// Unit vector from the UE toward the RIS.
    pub fn ue_to_ris(&self) -> [f64; 3] {
        unit_direction(self.ue_position, self.ris_position)
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn unit_direction(from: [f64; 3], to: [f64; 3]) -> [f64; 3] {
    let d = distance(from, to);
    [
        (to[0] - from[0]) / d,
        (to[1] - from[1]) / d,
        (to[2] - from[2]) / d,
    ]
}

/// Power budget and large-scale propagation constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub pathloss_exponent: f64,
    /// Reference power gain G0 in dB at 1 m, fitted by calibration.
    pub reference_gain_db: f64,
    pub noise_dbm: f64,
    pub tx_dbm: f64,
}

impl LinkBudget {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_hz
    }

    pub fn tx_mw(&self) -> f64 {
        10f64.powf(self.tx_dbm / 10.0)
    }

    pub fn noise_mw(&self) -> f64 {
        10f64.powf(self.noise_dbm / 10.0)
    }
}

/// Linear fluid-antenna port array: `num_ports` ports spaced
/// `spacing_wavelengths` apart along `axis`, anchored at the node position.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub num_ports: usize,
    pub spacing_wavelengths: f64,
    pub axis: [f64; 3],
}

impl ArrayConfig {
    /// Port offsets from the node position, in meters.
    pub fn element_offsets(&self, wavelength_m: f64) -> Vec<[f64; 3]> {
        let step = self.spacing_wavelengths * wavelength_m;
        (0..self.num_ports)
            .map(|i| {
                let d = i as f64 * step;
                [self.axis[0] * d, self.axis[1] * d, self.axis[2] * d]
            })
            .collect()
    }
}

/// Planar RIS: `rows x cols` elements on a square grid in the x-z plane,
/// indexed row-major (element m sits at row m / cols, column m % cols).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RisConfig {
    pub rows: usize,
    pub cols: usize,
    pub element_spacing_wavelengths: f64,
}

impl RisConfig {
    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Element offsets from the RIS center position, in meters.
    pub fn element_offsets(&self, wavelength_m: f64) -> Vec<[f64; 3]> {
        let step = self.element_spacing_wavelengths * wavelength_m;
        let mut out = Vec::with_capacity(self.num_elements());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push([c as f64 * step, 0.0, r as f64 * step]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RicianParams {
    pub k_factor: f64,
}

impl RicianParams {
    /// Amplitude weight of the deterministic component, sqrt(K / (K+1)).
    pub fn los_weight(&self) -> f64 {
        (self.k_factor / (self.k_factor + 1.0)).sqrt()
    }

    /// Amplitude weight of the diffuse component, sqrt(1 / (K+1)).
    pub fn nlos_weight(&self) -> f64 {
        (1.0 / (self.k_factor + 1.0)).sqrt()
    }
}

/// Everything needed to synthesize one link realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: Geometry,
    pub budget: LinkBudget,
    pub bs_array: ArrayConfig,
    pub ue_array: ArrayConfig,
    pub ris: RisConfig,
    pub rician: RicianParams,
}

impl Scenario {
    /// Ports available to the FAS-embedded relay on each side, `floor(N/4)`
    /// of the BS-side port count.
    pub fn relay_port_count(&self) -> usize {
        self.bs_array.num_ports / 4
    }

    /// Element spacings a fluid RIS may assume, `floor(N/3)` values evenly
    /// covering [0.4, 1.2] wavelengths.
    pub fn fris_spacing_candidates(&self) -> Vec<f64> {
        let count = self.bs_array.num_ports / 3;
        if count == 0 {
            return Vec::new();
        }
        if count == 1 {
            return vec![0.4];
        }
        (0..count)
            .map(|i| 0.4 + i as f64 * (1.2 - 0.4) / (count - 1) as f64)
            .collect()
    }

    /// Clone with both FAS arrays resized to `num_ports`.
    pub fn with_ports(&self, num_ports: usize) -> Scenario {
        let mut s = self.clone();
        s.bs_array.num_ports = num_ports;
        s.ue_array.num_ports = num_ports;
        s
    }

    /// Clone with a different transmit power.
    pub fn with_tx_dbm(&self, tx_dbm: f64) -> Scenario {
        let mut s = self.clone();
        s.budget.tx_dbm = tx_dbm;
        s
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        check_positive("carrier frequency", self.budget.carrier_hz)?;
        check_positive("pathloss exponent", self.budget.pathloss_exponent)?;
        check_finite("reference gain", self.budget.reference_gain_db)?;
        check_finite("noise power", self.budget.noise_dbm)?;
        check_finite("transmit power", self.budget.tx_dbm)?;
        check_positive("BS-RIS distance", self.geometry.bs_ris_distance())?;
        check_positive("RIS-UE distance", self.geometry.ris_ue_distance())?;
        for (what, arr) in [("BS array", &self.bs_array), ("UE array", &self.ue_array)] {
            if arr.num_ports == 0 {
                return Err(ChannelError::Zero { what: "port count" });
            }
            check_positive("port spacing", arr.spacing_wavelengths)?;
            let norm =
                (arr.axis[0] * arr.axis[0] + arr.axis[1] * arr.axis[1] + arr.axis[2] * arr.axis[2])
                    .sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                let _ = what;
                return Err(ChannelError::NotUnitDirection { norm });
            }
        }
        if self.ris.num_elements() == 0 {
            return Err(ChannelError::Zero {
                what: "RIS element count",
            });
        }
        let ris_spacing = self.ris.element_spacing_wavelengths;
        if !(ris_spacing > 0.0 && ris_spacing <= 2.0) {
            return Err(ChannelError::NotPositive {
                what: "RIS element spacing (wavelengths, at most 2)",
                value: ris_spacing,
            });
        }
        if !(self.rician.k_factor >= 0.0 && self.rician.k_factor.is_finite()) {
            return Err(ChannelError::InvalidKFactor(self.rician.k_factor));
        }
        Ok(())
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<(), ChannelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::NotPositive { what, value })
    }
}

fn check_finite(what: &'static str, value: f64) -> Result<(), ChannelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::NonFinite { what, value })
    }
}

// ── large-scale terms ──────────────────────────────────────────────────────

/// Amplitude path gain sqrt(G0 d^-alpha) of one hop at distance `d` meters.
/// The squared value is the per-hop power attenuation.
pub fn path_gain(distance_m: f64, budget: &LinkBudget) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(ChannelError::NotPositive {
            what: "path distance",
            value: distance_m,
        });
    }
    let g0 = 10f64.powf(budget.reference_gain_db / 10.0);
    Ok((g0 * distance_m.powf(-budget.pathloss_exponent)).sqrt())
}

// ── small-scale structure ──────────────────────────────────────────────────

/// Jakes port correlation matrix, `R[i, j] = J0(2 pi |i - j| spacing)`.
/// Real symmetric with unit diagonal; built from one J0 evaluation per lag
/// so symmetry is exact.
pub fn jakes_correlation(
    num_ports: usize,
    spacing_wavelengths: f64,
) -> Result<ComplexMatrix, ChannelError> {
    if num_ports == 0 {
        return Err(ChannelError::Zero { what: "port count" });
    }
    if !(spacing_wavelengths > 0.0 && spacing_wavelengths.is_finite()) {
        return Err(ChannelError::NotPositive {
            what: "port spacing",
            value: spacing_wavelengths,
        });
    }
    let lags: Vec<f64> = (0..num_ports)
        .map(|lag| j0_raw(2.0 * std::f64::consts::PI * lag as f64 * spacing_wavelengths))
        .collect();
    Ok(ComplexMatrix::from_fn(num_ports, num_ports, |r, c| {
        Complex64::new(lags[r.abs_diff(c)], 0.0)
    }))
}

/// Narrowband array response `exp(j 2 pi <p, u> / lambda)` for elements at
/// `offsets` (meters) seen along unit direction `u`.
pub fn array_response(
    offsets: &[[f64; 3]],
    unit_dir: [f64; 3],
    wavelength_m: f64,
) -> Result<Vec<Complex64>, ChannelError> {
    let norm =
        (unit_dir[0] * unit_dir[0] + unit_dir[1] * unit_dir[1] + unit_dir[2] * unit_dir[2]).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(ChannelError::NotUnitDirection { norm });
    }
    if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
        return Err(ChannelError::NotPositive {
            what: "wavelength",
            value: wavelength_m,
        });
    }
    let k = 2.0 * std::f64::consts::PI / wavelength_m;
    Ok(offsets
        .iter()
        .map(|p| {
            let phase = k * (p[0] * unit_dir[0] + p[1] * unit_dir[1] + p[2] * unit_dir[2]);
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// Correlated Rician vector `h = sqrt(K/(K+1)) los + sqrt(1/(K+1)) S g` with
/// `S = sqrt(correlation)` and `g ~ CN(0, I)` drawn from `stream`.
pub fn rician_vector(
    stream: &RngStream,
    correlation: &ComplexMatrix,
    los: &[Complex64],
    k_factor: f64,
) -> Result<Vec<Complex64>, ChannelError> {
    if !(k_factor >= 0.0 && k_factor.is_finite()) {
        return Err(ChannelError::InvalidKFactor(k_factor));
    }
    if correlation.rows() != los.len() {
        return Err(ChannelError::DimensionMismatch {
            what: "LoS vector length vs correlation order",
            expected: correlation.rows(),
            got: los.len(),
        });
    }
    let s = hermitian_sqrt(correlation, None)?;
    let mut rng = stream.sampler();
    let g = draw_complex_gaussian(&mut rng, los.len());
    let params = RicianParams { k_factor };
    Ok(mix_rician(&s, &g, los, &params))
}

fn mix_rician(
    s: &ComplexMatrix,
    g: &[Complex64],
    los: &[Complex64],
    params: &RicianParams,
) -> Vec<Complex64> {
    let n = los.len();
    let cl = params.los_weight();
    let cn = params.nlos_weight();
    (0..n)
        .map(|i| {
            let mut colored = Complex64::new(0.0, 0.0);
            for (j, &gj) in g.iter().enumerate() {
                colored += s[(i, j)] * gj;
            }
            cl * los[i] + cn * colored
        })
        .collect()
}

// ── full realization ───────────────────────────────────────────────────────

/// One small-scale realization of both hops, plus the hop path gains.
/// `h_bs_ris` is M x N (RIS element by BS port), `h_ris_ue` is N x M (UE
/// port by RIS element).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h_bs_ris: ComplexMatrix,
    pub h_ris_ue: ComplexMatrix,
    pub path_gain_bs_ris: f64,
    pub path_gain_ris_ue: f64,
}

/// Deterministic per-scenario tables shared by every trial: correlation
/// square roots, LoS outer products, steering vectors and path gains.
/// Building these once keeps the per-trial cost at two matrix products.
#[derive(Debug, Clone)]
pub struct ChannelTables {
    pub(crate) s_bs: ComplexMatrix,
    pub(crate) s_ue: ComplexMatrix,
    pub(crate) s_relay: Option<ComplexMatrix>,
    pub(crate) los_bs_ris: ComplexMatrix,
    pub(crate) los_ris_ue: ComplexMatrix,
    pub(crate) relay_los_rx: Vec<Complex64>,
    pub(crate) relay_los_tx: Vec<Complex64>,
    pub(crate) path_gain_bs_ris: f64,
    pub(crate) path_gain_ris_ue: f64,
}

impl ChannelTables {
    pub fn new(scenario: &Scenario) -> Result<Self, ChannelError> {
        scenario.validate()?;
        let lambda = scenario.budget.wavelength_m();
        let geo = &scenario.geometry;

        let r_bs = jakes_correlation(
            scenario.bs_array.num_ports,
            scenario.bs_array.spacing_wavelengths,
        )?;
        let s_bs = hermitian_sqrt(&r_bs, None)?;
        let r_ue = jakes_correlation(
            scenario.ue_array.num_ports,
            scenario.ue_array.spacing_wavelengths,
        )?;
        let s_ue = hermitian_sqrt(&r_ue, None)?;

        let ris_offsets = scenario.ris.element_offsets(lambda);
        let a_ris_rx = array_response(&ris_offsets, geo.ris_to_bs(), lambda)?;
        let a_ris_tx = array_response(&ris_offsets, geo.ris_to_ue(), lambda)?;
        let a_bs = array_response(
            &scenario.bs_array.element_offsets(lambda),
            geo.bs_to_ris(),
            lambda,
        )?;
        let a_ue = array_response(
            &scenario.ue_array.element_offsets(lambda),
            geo.ue_to_ris(),
            lambda,
        )?;

        let m = scenario.ris.num_elements();
        let n_bs = scenario.bs_array.num_ports;
        let n_ue = scenario.ue_array.num_ports;
        let los_bs_ris = ComplexMatrix::from_fn(m, n_bs, |e, p| a_ris_rx[e] * a_bs[p]);
        let los_ris_ue = ComplexMatrix::from_fn(n_ue, m, |p, e| a_ue[p] * a_ris_tx[e]);

        let relay_ports = scenario.relay_port_count();
        let (s_relay, relay_los_rx, relay_los_tx) = if relay_ports > 0 {
            let relay_array = ArrayConfig {
                num_ports: relay_ports,
                spacing_wavelengths: scenario.bs_array.spacing_wavelengths,
                axis: [1.0, 0.0, 0.0],
            };
            let r_relay = jakes_correlation(relay_ports, relay_array.spacing_wavelengths)?;
            let offsets = relay_array.element_offsets(lambda);
            (
                Some(hermitian_sqrt(&r_relay, None)?),
                array_response(&offsets, geo.ris_to_bs(), lambda)?,
                array_response(&offsets, geo.ris_to_ue(), lambda)?,
            )
        } else {
            (None, Vec::new(), Vec::new())
        };

        Ok(Self {
            s_bs,
            s_ue,
            s_relay,
            los_bs_ris,
            los_ris_ue,
            relay_los_rx,
            relay_los_tx,
            path_gain_bs_ris: path_gain(geo.bs_ris_distance(), &scenario.budget)?,
            path_gain_ris_ue: path_gain(geo.ris_ue_distance(), &scenario.budget)?,
        })
    }
}

/// Reflect-path realization plus the port-0 diffuse vectors that a fluid
/// RIS reuses when re-spacing its elements.
pub(crate) struct ReflectParts {
    pub realization: ChannelRealization,
    pub fris_nlos_in: Vec<Complex64>,
    pub fris_nlos_out: Vec<Complex64>,
}

/// Draw order per trial stream: G1 row-major (M x N), then G2 row-major
/// (N x M). Relay draws, when present, follow in `TrialChannels`.
pub(crate) fn assemble_reflect_parts(
    rng: &mut rand_chacha::ChaCha8Rng,
    scenario: &Scenario,
    tables: &ChannelTables,
) -> ReflectParts {
    let m = scenario.ris.num_elements();
    let n_bs = scenario.bs_array.num_ports;
    let n_ue = scenario.ue_array.num_ports;
    let cl = scenario.rician.los_weight();
    let cn = scenario.rician.nlos_weight();

    let g1 = draw_complex_gaussian(rng, m * n_bs);
    let g1 = ComplexMatrix::from_fn(m, n_bs, |r, c| g1[r * n_bs + c]);
    let g2 = draw_complex_gaussian(rng, n_ue * m);
    let g2 = ComplexMatrix::from_fn(n_ue, m, |r, c| g2[r * m + c]);

    // Correlation acts on the port dimension of each hop.
    let nlos1 = g1.mul(&tables.s_bs.transpose()).expect("M x N times N x N");
    let nlos2 = tables.s_ue.mul(&g2).expect("N x N times N x M");

    let fris_nlos_in: Vec<Complex64> = (0..m).map(|e| nlos1[(e, 0)]).collect();
    let fris_nlos_out: Vec<Complex64> = nlos2.row(0).to_vec();

    let h_bs_ris = ComplexMatrix::from_fn(m, n_bs, |r, c| {
        cl * tables.los_bs_ris[(r, c)] + cn * nlos1[(r, c)]
    });
    let h_ris_ue = ComplexMatrix::from_fn(n_ue, m, |r, c| {
        cl * tables.los_ris_ue[(r, c)] + cn * nlos2[(r, c)]
    });

    ReflectParts {
        realization: ChannelRealization {
            h_bs_ris,
            h_ris_ue,
            path_gain_bs_ris: tables.path_gain_bs_ris,
            path_gain_ris_ue: tables.path_gain_ris_ue,
        },
        fris_nlos_in,
        fris_nlos_out,
    }
}

/// Synthesize the reflect-path realization for one trial stream.
pub fn assemble_realization(
    stream: &RngStream,
    scenario: &Scenario,
) -> Result<ChannelRealization, ChannelError> {
    let tables = ChannelTables::new(scenario)?;
    let mut rng = stream.sampler();
    Ok(assemble_reflect_parts(&mut rng, scenario, &tables).realization)
}

// ── tests ──────────────────────────────────────────────────────────────────
