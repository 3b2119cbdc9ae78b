//! Signal chain: beamforming, pattern mapping, spatial filtering,
//! equivalent-gain normalization, SIC ordering, SINR and sum rate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{PdmaError, Result};
use crate::linalg::{self, CMat, CVec, RANK_TOL};
use crate::pattern::Pattern;
use crate::power::PowerAlloc;

/// Gains below this fraction of the user's strongest beam are zeroed.
pub const GAIN_CLAMP_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Zf,
    Mmse,
}

/// How the target user of each beam is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelection {
    /// Beam `n` targets the strongest user whose column is exactly `e_n`,
    /// or, if nobody holds `e_n`, the strongest covered user not yet taken.
    StrongestIdentity,
    /// Beam `n` targets the weakest covered user, keeping targets distinct.
    WeakestCovered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    /// `N_T x N`, unit-norm columns.
    pub f: CMat,
    /// Target user of each beam.
    pub targets: Vec<usize>,
    /// The stacked target channel was numerically rank deficient and a
    /// pseudo-inverse was used.
    pub rank_deficient: bool,
}

impl Beamformer {
    pub fn n_beams(&self) -> usize {
        self.f.ncols()
    }
}

fn composite_channel(channels: &ChannelSet, targets: &[usize]) -> Result<CMat> {
    if targets.is_empty() {
        return Err(PdmaError::Dimension("no target users".into()));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= channels.n_users()) {
        return Err(PdmaError::Dimension(format!("target user {t} out of range")));
    }
    let (nr, nt) = (channels.n_rx(), channels.n_tx());
    let mut gc = CMat::zeros(nr * targets.len(), nt);
    for (n, &t) in targets.iter().enumerate() {
        gc.rows_mut(n * nr, nr).copy_from(&channels.g[t]);
    }
    Ok(gc)
}

/// `F = F_C (I_N kron 1_{N_R})`, then unit-norm columns.
fn combine_and_normalize(fc: &CMat, n_beams: usize, n_rx: usize) -> CMat {
    let nt = fc.nrows();
    let mut f = CMat::zeros(nt, n_beams);
    for n in 0..n_beams {
        let mut col = f.column_mut(n);
        for r in 0..n_rx {
            col += fc.column(n * n_rx + r);
        }
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    f
}

/// Composite zero-forcing beamformer on the target users' stacked channel.
pub fn zf_beamformer(channels: &ChannelSet, targets: &[usize]) -> Result<Beamformer> {
    let gc = composite_channel(channels, targets)?;
    let rows = gc.nrows();
    let gram = &gc * gc.adjoint();
    let inv = linalg::inverse_or_pinv(&gram, RANK_TOL);
    let (fc, rank_deficient) = if inv.pseudo {
        (linalg::pinv(&gc, RANK_TOL).0, true)
    } else {
        (gc.adjoint() * inv.matrix, false)
    };
    debug_assert_eq!(fc.ncols(), rows);
    Ok(Beamformer {
        f: combine_and_normalize(&fc, targets.len(), channels.n_rx()),
        targets: targets.to_vec(),
        rank_deficient,
    })
}

/// Regularized (MMSE) beamformer `G_C^H (G_C G_C^H + reg I)^-1`. With
/// `regularization == 0` this is exactly [`zf_beamformer`].
pub fn mmse_beamformer(channels: &ChannelSet, targets: &[usize], regularization: f64) -> Result<Beamformer> {
    if !(regularization >= 0.0 && regularization.is_finite()) {
        return Err(PdmaError::Domain(format!(
            "regularization must be finite and non-negative, got {regularization}"
        )));
    }
    if regularization == 0.0 {
        return zf_beamformer(channels, targets);
    }
    let gc = composite_channel(channels, targets)?;
    let rows = gc.nrows();
    let mut gram = &gc * gc.adjoint();
    for i in 0..rows {
        gram[(i, i)] += Complex64::new(regularization, 0.0);
    }
    let inv = linalg::inverse_or_pinv(&gram, RANK_TOL);
    let fc = gc.adjoint() * inv.matrix;
    Ok(Beamformer {
        f: combine_and_normalize(&fc, targets.len(), channels.n_rx()),
        targets: targets.to_vec(),
        rank_deficient: inv.pseudo,
    })
}

pub fn beamformer(
    criterion: Criterion,
    channels: &ChannelSet,
    targets: &[usize],
    regularization: f64,
) -> Result<Beamformer> {
    match criterion {
        Criterion::Zf => zf_beamformer(channels, targets),
        Criterion::Mmse => mmse_beamformer(channels, targets, regularization),
    }
}

fn rank_of(order: &[usize], k: usize) -> Vec<usize> {
    let mut rank = vec![0; k];
    for (r, &u) in order.iter().enumerate() {
        rank[u] = r;
    }
    rank
}

/// One distinct target per beam. `order` ranks users weakest first.
pub fn select_targets(pattern: &Pattern, order: &SicOrder, rule: TargetSelection) -> Result<Vec<usize>> {
    let n = pattern.n_beams();
    let k = pattern.n_users();
    if order.perm.len() != k {
        return Err(PdmaError::Dimension("order length differs from pattern".into()));
    }
    let rank = rank_of(&order.perm, k);
    match rule {
        TargetSelection::StrongestIdentity => {
            let mut taken = vec![false; k];
            let mut targets = vec![usize::MAX; n];
            for (beam, t) in targets.iter_mut().enumerate() {
                let holder = (0..k)
                    .filter(|&u| pattern.column(u) == 1 << beam && !taken[u])
                    .max_by_key(|&u| rank[u]);
                if let Some(u) = holder {
                    *t = u;
                    taken[u] = true;
                }
            }
            for beam in 0..n {
                if targets[beam] == usize::MAX {
                    let u = pattern
                        .users_on_beam(beam)
                        .filter(|&u| !taken[u])
                        .max_by_key(|&u| rank[u])
                        .ok_or_else(|| PdmaError::Domain(format!("beam {beam} has no available target user")))?;
                    targets[beam] = u;
                    taken[u] = true;
                }
            }
            Ok(targets)
        }
        TargetSelection::WeakestCovered => {
            // candidates per beam, weakest first; depth-first gives the
            // lexicographically weakest system of distinct representatives
            let cands: Vec<Vec<usize>> = (0..n)
                .map(|beam| {
                    let mut c: Vec<usize> = pattern.users_on_beam(beam).collect();
                    c.sort_by_key(|&u| rank[u]);
                    c
                })
                .collect();
            let mut targets = Vec::with_capacity(n);
            let mut taken = vec![false; k];
            if assign_distinct(&cands, 0, &mut taken, &mut targets) {
                Ok(targets)
            } else {
                Err(PdmaError::Domain("pattern admits no distinct target per beam".into()))
            }
        }
    }
}

fn assign_distinct(cands: &[Vec<usize>], beam: usize, taken: &mut [bool], out: &mut Vec<usize>) -> bool {
    if beam == cands.len() {
        return true;
    }
    for &u in &cands[beam] {
        if !taken[u] {
            taken[u] = true;
            out.push(u);
            if assign_distinct(cands, beam + 1, taken, out) {
                return true;
            }
            out.pop();
            taken[u] = false;
        }
    }
    false
}

/// `t_n = sum_k b_nk sqrt(p_nk) s_k`.
pub fn pattern_map(pattern: &Pattern, power: &PowerAlloc, symbols: &CVec) -> Result<CVec> {
    let (n, k) = (pattern.n_beams(), pattern.n_users());
    if power.p.shape() != (n, k) || symbols.len() != k {
        return Err(PdmaError::Dimension(format!(
            "pattern {n}x{k}, power {:?}, symbols {}",
            power.p.shape(),
            symbols.len()
        )));
    }
    if power.p.iter().any(|&x| x < 0.0) {
        return Err(PdmaError::Domain("negative power".into()));
    }
    Ok(CVec::from_fn(n, |beam, _| {
        pattern
            .users_on_beam(beam)
            .map(|u| symbols[u] * power.p[(beam, u)].sqrt())
            .sum()
    }))
}

/// `y_k = G_k F t + w_k`.
pub fn transmit_receive(bf: &Beamformer, t: &CVec, g_k: &CMat, w_k: &CVec) -> Result<CVec> {
    if t.len() != bf.f.ncols() || g_k.ncols() != bf.f.nrows() || w_k.len() != g_k.nrows() {
        return Err(PdmaError::Dimension("transmit/receive shapes disagree".into()));
    }
    Ok(g_k * (&bf.f * t) + w_k)
}

/// `A = E[t t^H]`, i.e. `[A]_ij = sum_k b_ik b_jk sqrt(p_ik p_jk)`.
pub fn correlation_matrix(pattern: &Pattern, power: &PowerAlloc) -> DMatrix<f64> {
    let n = pattern.n_beams();
    DMatrix::from_fn(n, n, |i, j| {
        (0..pattern.n_users())
            .filter(|&k| pattern.get(i, k) && pattern.get(j, k))
            .map(|k| (power.p[(i, k)].max(0.0) * power.p[(j, k)].max(0.0)).sqrt())
            .sum()
    })
}

/// Linear MMSE estimate of `t` from `y_k`:
/// `V_k = (G_k F A F^H G_k^H + s2 I)^-1 G_k F A`.
pub fn mmse_filter(g_k: &CMat, bf: &Beamformer, a: &DMatrix<f64>, noise_var: f64) -> Result<CMat> {
    if !(noise_var > 0.0) {
        return Err(PdmaError::Domain(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    let n = bf.n_beams();
    if a.shape() != (n, n) {
        return Err(PdmaError::Dimension("correlation matrix shape".into()));
    }
    let heff = g_k * &bf.f;
    let ha = &heff * linalg::to_complex(a);
    let mut cov = &ha * heff.adjoint();
    for i in 0..cov.nrows() {
        cov[(i, i)] += Complex64::new(noise_var, 0.0);
    }
    let lu = cov.lu();
    lu.solve(&ha)
        .ok_or_else(|| PdmaError::Domain("MMSE covariance is singular".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfFilter {
    pub v: CMat,
    /// Numerical rank of `T_k = F^H G_k^H G_k F`.
    pub rank: usize,
    /// Beams outside the range of `T_k` (zero filter columns).
    pub degenerate_beams: Vec<usize>,
}

/// `V_k = G_k F T_k^-1`, or `G_k F T_k^+` when `T_k` is rank deficient.
pub fn zf_filter(g_k: &CMat, bf: &Beamformer) -> ZfFilter {
    let heff = g_k * &bf.f;
    let t = heff.adjoint() * &heff;
    let n = t.nrows();
    let inv = linalg::inverse_or_pinv(&t, RANK_TOL);
    let mut degenerate_beams = Vec::new();
    if inv.pseudo {
        let proj = &inv.matrix * &t;
        for b in 0..n {
            if (proj[(b, b)].re - 1.0).abs() > 1e-6 {
                degenerate_beams.push(b);
            }
        }
    }
    ZfFilter {
        v: heff * inv.matrix,
        rank: inv.rank,
        degenerate_beams,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFilterSet {
    /// `V_k`, `N_R x N` per user.
    pub v: Vec<CMat>,
    pub criterion: Criterion,
    /// ZF only: beams with no usable filter, per user.
    pub degenerate: Vec<Vec<usize>>,
}

pub fn spatial_filters(
    criterion: Criterion,
    channels: &ChannelSet,
    bf: &Beamformer,
    a: &DMatrix<f64>,
) -> Result<SpatialFilterSet> {
    let k = channels.n_users();
    let mut v = Vec::with_capacity(k);
    let mut degenerate = Vec::with_capacity(k);
    for (g, &s2) in channels.g.iter().zip(&channels.noise_var) {
        match criterion {
            Criterion::Zf => {
                let z = zf_filter(g, bf);
                v.push(z.v);
                degenerate.push(z.degenerate_beams);
            }
            Criterion::Mmse => {
                v.push(mmse_filter(g, bf, a, s2)?);
                degenerate.push(Vec::new());
            }
        }
    }
    Ok(SpatialFilterSet {
        v,
        criterion,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGains {
    /// Complex `h_nk`, `N x K`.
    pub h: DMatrix<Complex64>,
    /// `|h_nk|`, after clamping.
    pub magnitude: DMatrix<f64>,
    pub p_beam: f64,
}

impl NormalizedGains {
    pub fn from_magnitudes(magnitude: DMatrix<f64>, p_beam: f64) -> Self {
        NormalizedGains {
            h: magnitude.map(|x| Complex64::new(x, 0.0)),
            magnitude,
            p_beam,
        }
    }

    pub fn n_beams(&self) -> usize {
        self.magnitude.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.magnitude.ncols()
    }

    /// `|h_nk|^2`.
    pub fn power_gain(&self, beam: usize, user: usize) -> f64 {
        let m = self.magnitude[(beam, user)];
        m * m
    }
}

/// Equivalent normalized gains
/// `h_nk = v^H G_k f_n / sqrt(sum_{n' != n} |v^H G_k f_n'|^2 P_b + s2 |v|^2)`
/// with `v = v_nk`. A zero filter column yields `h_nk = 0`.
pub fn normalized_gains(
    filters: &SpatialFilterSet,
    channels: &ChannelSet,
    bf: &Beamformer,
    p_beam: f64,
) -> Result<NormalizedGains> {
    if !(p_beam > 0.0) {
        return Err(PdmaError::Domain(format!(
            "per-beam power must be positive, got {p_beam}"
        )));
    }
    let k = channels.n_users();
    let n = bf.n_beams();
    if filters.v.len() != k {
        return Err(PdmaError::Dimension("one filter per user required".into()));
    }
    let mut h = DMatrix::<Complex64>::zeros(n, k);
    for user in 0..k {
        let v = &filters.v[user];
        if v.shape() != (channels.n_rx(), n) {
            return Err(PdmaError::Dimension(format!(
                "filter of user {user} has shape {:?}",
                v.shape()
            )));
        }
        // c[(n, n')] = v_n^H G_k f_n'
        let c = v.adjoint() * &channels.g[user] * &bf.f;
        for beam in 0..n {
            let inter: f64 = (0..n)
                .filter(|&m| m != beam)
                .map(|m| c[(beam, m)].norm_sqr())
                .sum::<f64>()
                * p_beam;
            let noise = channels.noise_var[user] * v.column(beam).norm_squared();
            let den = inter + noise;
            h[(beam, user)] = if den > 0.0 {
                c[(beam, beam)] / den.sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let peak = (0..n).map(|b| h[(b, user)].norm()).fold(0.0, f64::max);
        for beam in 0..n {
            if h[(beam, user)].norm() < GAIN_CLAMP_REL * peak {
                h[(beam, user)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let magnitude = h.map(|z| z.norm());
    Ok(NormalizedGains { h, magnitude, p_beam })
}

/// Users listed weakest to strongest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SicOrder {
    pub perm: Vec<usize>,
}

impl SicOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        let mut seen = vec![false; k];
        for &u in &perm {
            if u >= k || std::mem::replace(&mut seen[u], true) {
                return Err(PdmaError::Dimension("SIC order is not a permutation".into()));
            }
        }
        Ok(SicOrder { perm })
    }

    pub fn identity(k: usize) -> Self {
        SicOrder { perm: (0..k).collect() }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Position of each user in the order (0 = weakest).
    pub fn ranks(&self) -> Vec<usize> {
        rank_of(&self.perm, self.perm.len())
    }
}

/// Mean of `|h_nk|^2` over beams.
pub fn aggregate_gain(gains: &NormalizedGains, user: usize) -> f64 {
    let n = gains.n_beams();
    (0..n).map(|b| gains.power_gain(b, user)).sum::<f64>() / n as f64
}

/// Ascending aggregate gain, ties by user index.
pub fn sic_order(gains: &NormalizedGains) -> SicOrder {
    let agg: Vec<f64> = (0..gains.n_users()).map(|k| aggregate_gain(gains, k)).collect();
    order_by_metric(&agg)
}

/// Ascending `metric`, ties by index.
pub fn order_by_metric(metric: &[f64]) -> SicOrder {
    let mut perm: Vec<usize> = (0..metric.len()).collect();
    perm.sort_by(|&a, &b| metric[a].total_cmp(&metric[b]).then(a.cmp(&b)));
    SicOrder { perm }
}

/// Per-beam SINR after SIC; `N x K` in original user indexing.
pub fn sinr(gains: &NormalizedGains, pattern: &Pattern, power: &PowerAlloc, order: &SicOrder) -> Result<DMatrix<f64>> {
    let (n, k) = (pattern.n_beams(), pattern.n_users());
    if gains.magnitude.shape() != (n, k) || power.p.shape() != (n, k) || order.len() != k {
        return Err(PdmaError::Dimension("sinr inputs disagree in shape".into()));
    }
    let mut gamma = DMatrix::zeros(n, k);
    for beam in 0..n {
        // walk strongest to weakest accumulating stronger users' power
        let mut stronger = 0.0;
        for &u in order.perm.iter().rev() {
            if pattern.get(beam, u) {
                let g = gains.power_gain(beam, u);
                let p = power.p[(beam, u)];
                gamma[(beam, u)] = g * p / (1.0 + g * stronger);
                stronger += p;
            }
        }
    }
    Ok(gamma)
}

/// `sum_n sum_k log2(1 + gamma_nk)`, bits/s/Hz.
pub fn sum_rate(gamma: &DMatrix<f64>) -> f64 {
    gamma.iter().map(|&g| (1.0 + g).log2()).sum()
}

/// Rate of each user summed over beams.
pub fn per_user_rates(gamma: &DMatrix<f64>) -> Vec<f64> {
    gamma
        .column_iter()
        .map(|c| c.iter().map(|&g| (1.0 + g).log2()).sum())
        .collect()
}
