//! User geometry and random channel realizations.
//!
//! Each user channel is `G_k = sqrt(beta_k) * H_k` where `H_k` has i.i.d.
//! CN(0, 1) entries and `beta_k` is the large-scale gain
//! `c * d^-alpha * 10^(shadow/10)`. Users are spatially uniform over the
//! annulus between `min_distance_m` and `cell_radius_m`.
//!
//! All randomness flows from explicit 64-bit seeds; see [`derive_seed`] for
//! how per-trial streams are split off a base seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PdmaError, Result};
use crate::linalg::CMat;

/// Antenna and resource counts of one antenna cluster / user group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDims {
    /// Transmit antennas per cluster (`N_T`).
    pub n_tx: usize,
    /// Receive antennas per user (`N_R`).
    pub n_rx: usize,
    /// Beams per cluster (`N`).
    pub n_beams: usize,
    /// Users per group (`K`).
    pub n_users: usize,
}

impl SystemDims {
    pub fn new(n_tx: usize, n_rx: usize, n_beams: usize, n_users: usize) -> Self {
        SystemDims {
            n_tx,
            n_rx,
            n_beams,
            n_users,
        }
    }

    /// Checks that are needed by every scenario, baselines included:
    /// nonzero counts and `N <= N_T`.
    pub fn check_shape(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.n_beams == 0 || self.n_users == 0 {
            return Err(PdmaError::Dimension(format!(
                "all dimensions must be positive, got {self:?}"
            )));
        }
        if self.n_beams > self.n_tx {
            return Err(PdmaError::Dimension(format!(
                "N = {} beams exceeds N_T = {} antennas",
                self.n_beams, self.n_tx
            )));
        }
        Ok(())
    }

    /// Full PDMA operating regime: `N <= K <= 2^N - 1` and `N_T <= K N_R`.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        self.check_user_range()?;
        if self.n_tx > self.n_users * self.n_rx {
            return Err(PdmaError::Dimension(format!(
                "N_T = {} exceeds K N_R = {}",
                self.n_tx,
                self.n_users * self.n_rx
            )));
        }
        Ok(())
    }

    /// `N <= K <= 2^N - 1`.
    pub fn check_user_range(&self) -> Result<()> {
        let max_k = max_users(self.n_beams);
        if self.n_users < self.n_beams || self.n_users > max_k {
            return Err(PdmaError::Dimension(format!(
                "K = {} outside N <= K <= 2^N - 1 = {} for N = {}",
                self.n_users, max_k, self.n_beams
            )));
        }
        Ok(())
    }

    pub fn with_users(&self, n_users: usize) -> Self {
        SystemDims { n_users, ..*self }
    }
}

impl Default for SystemDims {
    fn default() -> Self {
        SystemDims::new(16, 4, 3, 5)
    }
}

/// `2^N - 1`, saturating for large `N`.
pub fn max_users(n_beams: usize) -> usize {
    if n_beams >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << n_beams) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LargeScaleParams {
    pub cell_radius_m: f64,
    pub path_loss_factor: f64,
    pub path_loss_exponent: f64,
    /// Standard deviation of the Gaussian shadowing in dB.
    pub shadow_std_db: f64,
    /// Exclusion radius around the base station.
    pub min_distance_m: f64,
}

impl Default for LargeScaleParams {
    fn default() -> Self {
        LargeScaleParams {
            cell_radius_m: 800.0,
            path_loss_factor: 1.0,
            path_loss_exponent: 3.7,
            shadow_std_db: 10.0,
            min_distance_m: 35.0,
        }
    }
}

impl LargeScaleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_radius_m", self.cell_radius_m),
            ("path_loss_factor", self.path_loss_factor),
            ("path_loss_exponent", self.path_loss_exponent),
            ("shadow_std_db", self.shadow_std_db),
            ("min_distance_m", self.min_distance_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PdmaError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.path_loss_exponent < 2.0 {
            return Err(PdmaError::Config(format!(
                "path_loss_exponent must be >= 2, got {}",
                self.path_loss_exponent
            )));
        }
        if self.min_distance_m > self.cell_radius_m {
            return Err(PdmaError::Config(format!(
                "min_distance_m {} exceeds cell_radius_m {}",
                self.min_distance_m, self.cell_radius_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub distance_m: f64,
    pub shadow_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    pub users: Vec<UserDrop>,
}

impl UserGeometry {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Per-user channel matrices (`N_R x N_T` each) and noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub g: Vec<CMat>,
    pub noise_var: Vec<f64>,
}

impl ChannelSet {
    pub fn new(g: Vec<CMat>, noise_var: Vec<f64>) -> Result<Self> {
        let set = ChannelSet { g, noise_var };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g.len() != self.noise_var.len() {
            return Err(PdmaError::Dimension(format!(
                "{} channel matrices but {} noise variances",
                self.g.len(),
                self.noise_var.len()
            )));
        }
        if let Some(first) = self.g.first() {
            let shape = first.shape();
            if self.g.iter().any(|m| m.shape() != shape) {
                return Err(PdmaError::Dimension("channel matrices differ in shape".into()));
            }
        }
        if self
            .g
            .iter()
            .any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
        {
            return Err(PdmaError::Domain("non-finite channel entry".into()));
        }
        if let Some(v) = self.noise_var.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(PdmaError::Domain(format!("noise variance must be positive, got {v}")));
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.g.len()
    }

    pub fn n_rx(&self) -> usize {
        self.g.first().map_or(0, |m| m.nrows())
    }

    pub fn n_tx(&self) -> usize {
        self.g.first().map_or(0, |m| m.ncols())
    }
}

/// Independent random streams inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    Geometry,
    SmallScale,
    Noise,
    Pairing,
}

impl SeedStream {
    fn tag(self) -> u64 {
        match self {
            SeedStream::Geometry => 0x6765_6f6d,
            SeedStream::SmallScale => 0x736d_616c,
            SeedStream::Noise => 0x6e6f_6973,
            SeedStream::Pairing => 0x7061_6972,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `stream` of trial `index` under `base`. Depends only on
/// the triple, so trial `i` sees the same numbers regardless of how many
/// trials run or in which order.
pub fn derive_seed(base: u64, index: u64, stream: SeedStream) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ index) ^ stream.tag())
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Drops `K` users uniformly over the annulus `[min_distance_m, cell_radius_m]`
/// with Gaussian shadowing in dB.
pub fn drop_users(dims: SystemDims, params: &LargeScaleParams, seed: u64) -> Result<UserGeometry> {
    dims.check_shape()?;
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let r0sq = params.min_distance_m * params.min_distance_m;
    let rsq = params.cell_radius_m * params.cell_radius_m;
    let shadow = Normal::new(0.0, params.shadow_std_db).map_err(|e| PdmaError::Config(format!("shadowing: {e}")))?;
    let users = (0..dims.n_users)
        .map(|_| {
            let u: f64 = rng.random();
            // inverse CDF of density 2r / (R^2 - r0^2)
            let d = (r0sq + u * (rsq - r0sq)).sqrt();
            UserDrop {
                distance_m: d.clamp(params.min_distance_m, params.cell_radius_m),
                shadow_db: shadow.sample(&mut rng),
            }
        })
        .collect();
    Ok(UserGeometry { users })
}

/// Path loss times shadowing, linear.
pub fn large_scale_gain(distance_m: f64, shadow_db: f64, params: &LargeScaleParams) -> Result<f64> {
    if !(distance_m >= params.min_distance_m) {
        return Err(PdmaError::Domain(format!(
            "distance {distance_m} m below minimum {} m",
            params.min_distance_m
        )));
    }
    Ok(params.path_loss_factor * distance_m.powf(-params.path_loss_exponent) * 10f64.powf(shadow_db / 10.0))
}

/// One CN(0, 1) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `G_k` for every user in `geometry`. `noise_power` is linear (mW).
pub fn generate_channels(
    dims: SystemDims,
    geometry: &UserGeometry,
    params: &LargeScaleParams,
    noise_power: f64,
    seed: u64,
) -> Result<ChannelSet> {
    dims.check_shape()?;
    if geometry.len() != dims.n_users {
        return Err(PdmaError::Dimension(format!(
            "geometry has {} users, dims expect {}",
            geometry.len(),
            dims.n_users
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut g = Vec::with_capacity(dims.n_users);
    for user in &geometry.users {
        let amp = large_scale_gain(user.distance_m, user.shadow_db, params)?.sqrt();
        let m = DMatrix::from_fn(dims.n_rx, dims.n_tx, |_, _| complex_gaussian(&mut rng) * amp);
        g.push(m);
    }
    ChannelSet::new(g, vec![noise_power; dims.n_users])
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}
