//! Power allocation.
//!
//! Two policies: the geometric split used as the simple baseline, and the
//! sum-rate maximal allocation computed by a log-barrier interior-point
//! method.
//!
//! For a fixed gain matrix the negated sum rate is a sum of per-beam terms.
//! Within a beam, with covered users ordered weakest first and
//! `S_j = sum_{l >= j} p_l`, the rate of user `j` is
//! `log2(1 + h_j^2 S_j) - log2(1 + h_j^2 S_{j+1})`. The Hessian of the
//! negated beam rate is the nested-constant matrix built from
//! `alpha_0` and the running sums `beta_k` (see [`hessian_per_beam`]); it is
//! positive semidefinite whenever the beam gains ascend in SIC order.
//!
//! Constraints are all affine: the per-entry floors `p_nk >= delta_nk`, the
//! total budget, an optional per-beam budget, and minimum rates written as
//! `h^2 p_nk >= (2^R - 1)(1 + h^2 w_nk)`, which describes the same set as
//! `log2(1 + gamma_nk) >= R`.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PdmaError, Result};
use crate::pattern::Pattern;
use crate::transceiver::{NormalizedGains, SicOrder};

/// Non-negative `N x K` power matrix in linear units (mW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAlloc {
    pub p: DMatrix<f64>,
}

impl PowerAlloc {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(PdmaError::Domain(format!(
                "power entries must be finite and >= 0, got {x}"
            )));
        }
        Ok(PowerAlloc { p })
    }

    pub fn zeros(n_beams: usize, n_users: usize) -> Self {
        PowerAlloc {
            p: DMatrix::zeros(n_beams, n_users),
        }
    }

    pub fn total(&self) -> f64 {
        self.p.sum()
    }

    pub fn beam_total(&self, beam: usize) -> f64 {
        self.p.row(beam).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConstraints {
    pub p_sum: f64,
    /// Per-entry lower bounds (`epsilon` on target entries, else 0).
    pub delta: DMatrix<f64>,
    /// Per-entry minimum rate in bits.
    pub r_min: DMatrix<f64>,
    /// Optional `sum_k p_nk <= P_b` for every beam.
    pub per_beam_budget: Option<f64>,
}

impl PowerConstraints {
    pub fn new(p_sum: f64, delta: DMatrix<f64>, r_min: DMatrix<f64>) -> Result<Self> {
        let c = PowerConstraints {
            p_sum,
            delta,
            r_min,
            per_beam_budget: None,
        };
        c.validate()?;
        Ok(c)
    }

    /// `delta = epsilon` on `(n, targets[n])`, zero floors and rates elsewhere.
    pub fn for_targets(n_users: usize, targets: &[usize], p_sum: f64, epsilon: f64) -> Result<Self> {
        let n = targets.len();
        let mut delta = DMatrix::zeros(n, n_users);
        for (beam, &t) in targets.iter().enumerate() {
            if t >= n_users {
                return Err(PdmaError::Dimension(format!("target {t} out of range")));
            }
            delta[(beam, t)] = epsilon;
        }
        PowerConstraints::new(p_sum, delta, DMatrix::zeros(n, n_users))
    }

    pub fn with_r_min(mut self, r_min: DMatrix<f64>) -> Result<Self> {
        self.r_min = r_min;
        self.validate()?;
        Ok(self)
    }

    pub fn with_per_beam_budget(mut self, budget: Option<f64>) -> Result<Self> {
        self.per_beam_budget = budget;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_sum.is_finite() && self.p_sum > 0.0) {
            return Err(PdmaError::Domain(format!("p_sum must be positive, got {}", self.p_sum)));
        }
        if self.delta.shape() != self.r_min.shape() {
            return Err(PdmaError::Dimension("delta and r_min differ in shape".into()));
        }
        if self
            .delta
            .iter()
            .chain(self.r_min.iter())
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(PdmaError::Domain("delta and r_min must be finite and >= 0".into()));
        }
        if let Some(b) = self.per_beam_budget {
            if !(b.is_finite() && b > 0.0) {
                return Err(PdmaError::Domain(format!("per-beam budget must be positive, got {b}")));
            }
        }
        Ok(())
    }
}

/// Default target-entry floor: `1e-2 * P_b / K`.
pub fn default_epsilon(p_beam: f64, n_users: usize) -> f64 {
    1e-2 * p_beam / n_users as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimpleAllocation {
    pub power: PowerAlloc,
    /// Beams with no covered user; their power is zero.
    pub empty_beams: Vec<usize>,
}

/// Geometric split: on each beam the `r`-th weakest covered user (r = 1, 2,
/// ...) gets `mu^(r-1) p0` with `p0` chosen so the beam sums to `p_beam`.
pub fn simple_power_allocation(pattern: &Pattern, p_beam: f64, mu: f64, order: &SicOrder) -> Result<SimpleAllocation> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(PdmaError::Domain(format!(
            "power gain factor must be positive, got {mu}"
        )));
    }
    if !(p_beam > 0.0 && p_beam.is_finite()) {
        return Err(PdmaError::Domain(format!(
            "per-beam power must be positive, got {p_beam}"
        )));
    }
    let (n, k) = (pattern.n_beams(), pattern.n_users());
    if order.len() != k {
        return Err(PdmaError::Dimension("order length differs from pattern".into()));
    }
    let mut p = DMatrix::zeros(n, k);
    let mut empty_beams = Vec::new();
    for beam in 0..n {
        let users: Vec<usize> = order.perm.iter().copied().filter(|&u| pattern.get(beam, u)).collect();
        if users.is_empty() {
            empty_beams.push(beam);
            continue;
        }
        let weights: Vec<f64> = (0..users.len()).map(|r| mu.powi(r as i32)).collect();
        let total: f64 = weights.iter().sum();
        for (&u, w) in users.iter().zip(&weights) {
            p[(beam, u)] = p_beam * w / total;
        }
    }
    Ok(SimpleAllocation {
        power: PowerAlloc { p },
        empty_beams,
    })
}

/// `h^2 / (1 + h^2 s)`, i.e. `1 / (1/h^2 + s)` without dividing by zero.
#[inline]
fn q(h2: f64, s: f64) -> f64 {
    h2 / (1.0 + h2 * s)
}

/// Negated sum rate (bits) for `power` under `gains`, `pattern`, `order`.
pub fn objective(power: &PowerAlloc, gains: &NormalizedGains, pattern: &Pattern, order: &SicOrder) -> Result<f64> {
    let problem = BeamLayout::new(gains, pattern, order)?;
    let x = problem.compress(&power.p);
    Ok(problem.value(&x))
}

/// Gradient of [`objective`] w.r.t. every `p_nk` (zero where `b_nk = 0`).
pub fn objective_gradient(
    power: &PowerAlloc,
    gains: &NormalizedGains,
    pattern: &Pattern,
    order: &SicOrder,
) -> Result<DMatrix<f64>> {
    let problem = BeamLayout::new(gains, pattern, order)?;
    let x = problem.compress(&power.p);
    let g = problem.gradient(&x);
    Ok(problem.expand(&g))
}

/// Closed-form Hessian of the negated rate of one beam.
///
/// Users must be listed weakest first; `p_n`, `h_n` (magnitudes) and `b_n`
/// are the beam's row. With `w_k = sum_{l > k} b_l p_l`,
///
/// ```text
/// alpha_0 = 1 / ((1/|h_1|^2 + sum_l b_l p_l)^2 ln 2)
/// beta_k  = (1/ln 2) sum_{k'=1..k} [ 1/(1/|h_{k'+1}|^2 + w_k')^2 - 1/(1/|h_k'|^2 + w_k')^2 ]
/// H_ij    = b_i b_j (alpha_0 + beta_{min(i,j)-1}),  beta_0 = 0
/// ```
pub fn hessian_per_beam(p_n: &[f64], h_n: &[f64], b_n: &[bool]) -> DMatrix<f64> {
    let k = p_n.len();
    assert!(h_n.len() == k && b_n.len() == k, "hessian_per_beam: length mismatch");
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let h2: Vec<f64> = h_n.iter().map(|h| h * h).collect();
    // w[j] = sum_{l > j} b_l p_l
    let mut w = vec![0.0; k];
    for j in (0..k - 1).rev() {
        w[j] = w[j + 1] + if b_n[j + 1] { p_n[j + 1] } else { 0.0 };
    }
    let total = w[0] + if b_n[0] { p_n[0] } else { 0.0 };
    let alpha0 = q(h2[0], total).powi(2) / LN_2;
    let mut beta = vec![0.0; k];
    for kk in 1..k {
        let kp = kk - 1;
        beta[kk] = beta[kk - 1] + (q(h2[kp + 1], w[kp]).powi(2) - q(h2[kp], w[kp]).powi(2)) / LN_2;
    }
    DMatrix::from_fn(
        k,
        k,
        |i, j| {
            if b_n[i] && b_n[j] {
                alpha0 + beta[i.min(j)]
            } else {
                0.0
            }
        },
    )
}

/// `a . x <= rhs`, sparse.
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
}

impl Affine {
    fn slack(&self, x: &DVector<f64>) -> f64 {
        self.rhs - self.coeffs.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
struct BeamVars {
    beam: usize,
    /// Covered users, weakest first.
    users: Vec<usize>,
    h2: Vec<f64>,
    offset: usize,
}

/// Variables `p_nk` with `b_nk = 1`, grouped per beam in SIC order.
#[derive(Debug, Clone)]
struct BeamLayout {
    n_beams: usize,
    n_users: usize,
    beams: Vec<BeamVars>,
    dim: usize,
}

impl BeamLayout {
    fn new(gains: &NormalizedGains, pattern: &Pattern, order: &SicOrder) -> Result<Self> {
        let (n, k) = (pattern.n_beams(), pattern.n_users());
        if gains.magnitude.shape() != (n, k) || order.len() != k {
            return Err(PdmaError::Dimension(format!(
                "gains {:?}, pattern {n}x{k}, order {}",
                gains.magnitude.shape(),
                order.len()
            )));
        }
        let mut beams = Vec::with_capacity(n);
        let mut offset = 0;
        for beam in 0..n {
            let users: Vec<usize> = order.perm.iter().copied().filter(|&u| pattern.get(beam, u)).collect();
            let h2 = users.iter().map(|&u| gains.power_gain(beam, u)).collect();
            let len = users.len();
            beams.push(BeamVars {
                beam,
                users,
                h2,
                offset,
            });
            offset += len;
        }
        Ok(BeamLayout {
            n_beams: n,
            n_users: k,
            beams,
            dim: offset,
        })
    }

    /// Every beam's gains ascend in SIC order, so the objective is convex.
    fn is_convex(&self) -> bool {
        self.beams.iter().all(|b| b.h2.windows(2).all(|w| w[0] <= w[1]))
    }

    fn compress(&self, p: &DMatrix<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim);
        for b in &self.beams {
            for (j, &u) in b.users.iter().enumerate() {
                x[b.offset + j] = p[(b.beam, u)];
            }
        }
        x
    }

    fn expand(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.n_beams, self.n_users);
        for b in &self.beams {
            for (j, &u) in b.users.iter().enumerate() {
                p[(b.beam, u)] = x[b.offset + j];
            }
        }
        p
    }

    fn tails(x: &[f64]) -> Vec<f64> {
        // s[j] = sum_{l >= j} x_l, with s[len] = 0
        let mut s = vec![0.0; x.len() + 1];
        for j in (0..x.len()).rev() {
            s[j] = s[j + 1] + x[j];
        }
        s
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut rate = 0.0;
        for b in &self.beams {
            let xs = &x.as_slice()[b.offset..b.offset + b.users.len()];
            let s = Self::tails(xs);
            for (j, &h2) in b.h2.iter().enumerate() {
                rate += (h2 * s[j]).ln_1p() - (h2 * s[j + 1]).ln_1p();
            }
        }
        -rate / LN_2
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for b in &self.beams {
            let len = b.users.len();
            let xs = &x.as_slice()[b.offset..b.offset + len];
            let s = Self::tails(xs);
            let mut acc = if len > 0 { q(b.h2[0], s[0]) } else { 0.0 };
            for j in 0..len {
                if j > 0 {
                    let i = j - 1;
                    acc += q(b.h2[i + 1], s[i + 1]) - q(b.h2[i], s[i + 1]);
                }
                g[b.offset + j] = -acc / LN_2;
            }
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for b in &self.beams {
            let len = b.users.len();
            if len == 0 {
                continue;
            }
            let xs = &x.as_slice()[b.offset..b.offset + len];
            let mags: Vec<f64> = b.h2.iter().map(|v| v.sqrt()).collect();
            let block = hessian_per_beam(xs, &mags, &vec![true; len]);
            h.view_mut((b.offset, b.offset), (len, len)).copy_from(&block);
        }
        h
    }

    fn constraints(&self, c: &PowerConstraints) -> std::result::Result<Vec<Affine>, f64> {
        let mut out = Vec::new();
        // an uncovered entry cannot carry a floor or a rate
        for beam in 0..self.n_beams {
            for user in 0..self.n_users {
                let covered = self.beams[beam].users.contains(&user);
                if !covered && (c.delta[(beam, user)] > 0.0 || c.r_min[(beam, user)] > 0.0) {
                    return Err(c.delta[(beam, user)].max(1.0));
                }
            }
        }
        for b in &self.beams {
            for (j, &u) in b.users.iter().enumerate() {
                out.push(Affine {
                    coeffs: vec![(b.offset + j, -1.0)],
                    rhs: -c.delta[(b.beam, u)],
                });
            }
        }
        out.push(Affine {
            coeffs: (0..self.dim).map(|i| (i, 1.0)).collect(),
            rhs: c.p_sum,
        });
        if let Some(pb) = c.per_beam_budget {
            for b in &self.beams {
                if !b.users.is_empty() {
                    out.push(Affine {
                        coeffs: (0..b.users.len()).map(|j| (b.offset + j, 1.0)).collect(),
                        rhs: pb,
                    });
                }
            }
        }
        for b in &self.beams {
            for (j, &u) in b.users.iter().enumerate() {
                let r = c.r_min[(b.beam, u)];
                if r > 0.0 {
                    let gap = r.exp2() - 1.0;
                    let h2 = b.h2[j];
                    let mut coeffs = vec![(b.offset + j, -h2)];
                    coeffs.extend((j + 1..b.users.len()).map(|l| (b.offset + l, gap * h2)));
                    out.push(Affine { coeffs, rhs: -gap });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSettings {
    pub t0: f64,
    /// Factor applied to `t` after each centering.
    pub t_growth: f64,
    /// Stop once `m / t` falls below this.
    pub gap_tol: f64,
    pub ls_alpha: f64,
    pub ls_beta: f64,
    /// Half squared Newton decrement at which centering stops.
    pub newton_tol: f64,
    pub max_newton_steps: usize,
    pub max_outer: usize,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        BarrierSettings {
            t0: 1.0,
            t_growth: 10.0,
            gap_tol: 1e-8,
            ls_alpha: 0.25,
            ls_beta: 0.5,
            newton_tol: 1e-9,
            max_newton_steps: 50,
            max_outer: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct KktResiduals {
    /// `|grad f + sum_i lambda_i a_i|_inf` with `lambda_i = 1 / (t s_i)`.
    pub stationarity: f64,
    /// `max_i lambda_i s_i` (equals `1/t`).
    pub complementarity: f64,
    /// Largest constraint violation (0 for an interior point).
    pub primal_infeasibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SolverReport {
    pub variables: usize,
    pub constraints: usize,
    pub outer_iterations: usize,
    pub newton_iterations: usize,
    pub phase1_newton_iterations: usize,
    /// Line searches that hit the floating-point floor before the
    /// decrement tolerance.
    pub stalled_centerings: usize,
    /// False when some beam's gains do not ascend in SIC order; the
    /// objective is then not convex and the gap bound is not a certificate.
    pub convex: bool,
    /// Centerings that hit the Newton step cap (non-convex instances only).
    pub uncentered: usize,
    /// `m / t` at exit; bounds the suboptimality in bits.
    pub duality_gap_bound: f64,
    /// Negated sum rate at the returned point.
    pub objective: f64,
    pub sum_rate: f64,
    pub kkt: KktResiduals,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase1 {
    Feasible {
        power: PowerAlloc,
        newton_iterations: usize,
    },
    /// `certificate` is the phase-I optimum `s >= 0`.
    Infeasible { certificate: f64 },
}

struct Centered {
    x: DVector<f64>,
    steps: usize,
    stalled: bool,
}

/// Damped Newton on `t f(x) - sum log(slack_i(x))` from a strictly feasible
/// `x`. `early` is checked after every step and ends centering when true.
fn center<F>(
    fgh: &F,
    cons: &[Affine],
    mut x: DVector<f64>,
    t: f64,
    s: &BarrierSettings,
    early: &dyn Fn(&DVector<f64>) -> bool,
) -> Result<Centered>
where
    F: Fn(&DVector<f64>, bool) -> (f64, DVector<f64>, DMatrix<f64>),
{
    let dim = x.len();
    let phi = |x: &DVector<f64>| -> Option<f64> {
        let (f, _, _) = fgh(x, false);
        let mut v = t * f;
        for c in cons {
            let sl = c.slack(x);
            if !(sl > 0.0) {
                return None;
            }
            v -= sl.ln();
        }
        Some(v)
    };
    let mut steps = 0;
    loop {
        let (_, gf, hf) = fgh(&x, true);
        let mut g = gf * t;
        let mut h = hf * t;
        for c in cons {
            let sl = c.slack(&x);
            for &(i, a) in &c.coeffs {
                g[i] += a / sl;
            }
            let sl2 = sl * sl;
            for &(i, a) in &c.coeffs {
                for &(j, b) in &c.coeffs {
                    h[(i, j)] += a * b / sl2;
                }
            }
        }
        let (dx, convex_step) = newton_direction(&h, &g);
        let dec2 = -g.dot(&dx);
        if dec2 / 2.0 <= s.newton_tol || early(&x) {
            return Ok(Centered {
                x,
                steps,
                stalled: false,
            });
        }
        if steps >= s.max_newton_steps {
            return Err(PdmaError::NotConverged {
                iterations: steps,
                t,
                decrement: dec2 / 2.0,
                iterate: x.iter().copied().collect(),
            });
        }
        // inside the quadratic-convergence region of a self-concordant
        // barrier the pure Newton step needs no line search, and comparing
        // barrier values there only measures round-off
        if convex_step && dec2 < 0.1 {
            let cand = &x + &dx;
            if cons.iter().all(|c| c.slack(&cand) > 0.0) {
                x = cand;
                steps += 1;
                continue;
            }
        }
        let f0 = phi(&x).expect("iterate is strictly feasible");
        let mut step = 1.0;
        let accepted = loop {
            let cand = &x + &dx * step;
            if let Some(v) = phi(&cand) {
                if v <= f0 - s.ls_alpha * step * dec2 {
                    break Some(cand);
                }
            }
            step *= s.ls_beta;
            if step < 1e-18 {
                break None;
            }
        };
        steps += 1;
        match accepted {
            Some(cand) => {
                let f1 = phi(&cand).expect("accepted point is strictly feasible");
                x = cand;
                // further progress is below the resolution of the barrier value
                if f0 - f1 <= 16.0 * f64::EPSILON * f0.abs().max(1.0) {
                    return Ok(Centered {
                        x,
                        steps,
                        stalled: true,
                    });
                }
            }
            None => {
                return Ok(Centered {
                    x,
                    steps,
                    stalled: true,
                })
            }
        }
        debug_assert_eq!(x.len(), dim);
    }
}

/// Solves `H dx = -g`. When `H` is not positive definite (possible only
/// when some beam's gains do not ascend in SIC order), it is shifted by
/// `1.5 |lambda_min|` along the identity.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, bool) {
    if let Some(ch) = h.clone().cholesky() {
        return (ch.solve(&(-g)), true);
    }
    let eig = h.clone().symmetric_eigen();
    let shift = -1.5 * eig.eigenvalues.min();
    let floor = 1e-12 * eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let coeffs = eig.eigenvectors.transpose() * g;
    let scaled = DVector::from_fn(coeffs.len(), |i, _| {
        -coeffs[i] / (eig.eigenvalues[i] + shift).max(floor)
    });
    (&eig.eigenvectors * scaled, false)
}

fn uniform_start(layout: &BeamLayout, c: &PowerConstraints) -> DVector<f64> {
    let mut x = DVector::from_element(layout.dim, c.p_sum / (layout.dim as f64 + 1.0));
    if let Some(pb) = c.per_beam_budget {
        for b in &layout.beams {
            let cap = pb / (b.users.len() as f64 + 1.0);
            for j in 0..b.users.len() {
                x[b.offset + j] = x[b.offset + j].min(cap);
            }
        }
    }
    x
}

fn strictly_feasible(cons: &[Affine], x: &DVector<f64>) -> bool {
    cons.iter().all(|c| c.slack(x) > 0.0)
}

/// Finds a strictly feasible allocation or certifies that none exists.
///
/// The uniform split `P_sum / (m + 1)` per variable is tried first; failing
/// that, `min s  s.t.  g_i(P) <= s` is solved by the barrier method,
/// stopping as soon as `s < 0`.
pub fn phase1_feasible(
    constraints: &PowerConstraints,
    gains: &NormalizedGains,
    pattern: &Pattern,
    order: &SicOrder,
) -> Result<Phase1> {
    phase1_with(constraints, gains, pattern, order, &BarrierSettings::default())
}

fn phase1_with(
    constraints: &PowerConstraints,
    gains: &NormalizedGains,
    pattern: &Pattern,
    order: &SicOrder,
    settings: &BarrierSettings,
) -> Result<Phase1> {
    constraints.validate()?;
    let layout = BeamLayout::new(gains, pattern, order)?;
    if constraints.delta.shape() != (layout.n_beams, layout.n_users) {
        return Err(PdmaError::Dimension("constraint matrices do not match pattern".into()));
    }
    let cons = match layout.constraints(constraints) {
        Ok(c) => c,
        Err(cert) => return Ok(Phase1::Infeasible { certificate: cert }),
    };
    let (x, iters) = phase1_point(&layout, &cons, constraints, settings)?;
    Ok(match x {
        Ok(x) => Phase1::Feasible {
            power: PowerAlloc { p: layout.expand(&x) },
            newton_iterations: iters,
        },
        Err(cert) => Phase1::Infeasible { certificate: cert },
    })
}

type Phase1Point = (std::result::Result<DVector<f64>, f64>, usize);

fn phase1_point(
    layout: &BeamLayout,
    cons: &[Affine],
    c: &PowerConstraints,
    settings: &BarrierSettings,
) -> Result<Phase1Point> {
    let x0 = uniform_start(layout, c);
    if strictly_feasible(cons, &x0) {
        return Ok((Ok(x0), 0));
    }
    let dim = layout.dim;
    let s_idx = dim;
    let lifted: Vec<Affine> = cons
        .iter()
        .map(|a| {
            let mut coeffs = a.coeffs.clone();
            coeffs.push((s_idx, -1.0));
            Affine { coeffs, rhs: a.rhs }
        })
        .collect();
    let worst = cons.iter().map(|a| -a.slack(&x0)).fold(f64::NEG_INFINITY, f64::max);
    let mut z = x0.clone().insert_row(dim, worst.max(0.0) + 1.0);
    let fgh = |z: &DVector<f64>, _: bool| {
        let mut g = DVector::zeros(dim + 1);
        g[s_idx] = 1.0;
        (z[s_idx], g, DMatrix::zeros(dim + 1, dim + 1))
    };
    let early = |z: &DVector<f64>| z[s_idx] < 0.0;
    let m = lifted.len() as f64;
    let mut t = settings.t0;
    let mut iters = 0;
    for _ in 0..settings.max_outer {
        let r = center(&fgh, &lifted, z, t, settings, &early)?;
        iters += r.steps;
        z = r.x;
        if z[s_idx] < 0.0 {
            let x = z.rows(0, dim).into_owned();
            debug_assert!(strictly_feasible(cons, &x));
            return Ok((Ok(x), iters));
        }
        // z[s] - m/t bounds the phase-I optimum from below
        let lower = z[s_idx] - m / t;
        if lower > 0.0 {
            return Ok((Err(lower), iters));
        }
        if m / t < settings.gap_tol {
            break;
        }
        t *= settings.t_growth;
    }
    Ok((Err(z[s_idx].max(0.0)), iters))
}

/// Sum-rate maximal power allocation for fixed gains, pattern and order.
pub fn optimize_power_barrier(
    gains: &NormalizedGains,
    pattern: &Pattern,
    constraints: &PowerConstraints,
    order: &SicOrder,
) -> Result<(PowerAlloc, SolverReport)> {
    optimize_power_barrier_with(gains, pattern, constraints, order, &BarrierSettings::default())
}

pub fn optimize_power_barrier_with(
    gains: &NormalizedGains,
    pattern: &Pattern,
    constraints: &PowerConstraints,
    order: &SicOrder,
    settings: &BarrierSettings,
) -> Result<(PowerAlloc, SolverReport)> {
    constraints.validate()?;
    let layout = BeamLayout::new(gains, pattern, order)?;
    if constraints.delta.shape() != (layout.n_beams, layout.n_users) {
        return Err(PdmaError::Dimension("constraint matrices do not match pattern".into()));
    }
    let cons = layout
        .constraints(constraints)
        .map_err(|certificate| PdmaError::Infeasible { certificate })?;
    let (start, phase1_iters) = phase1_point(&layout, &cons, constraints, settings)?;
    let mut x = start.map_err(|certificate| PdmaError::Infeasible { certificate })?;

    let fgh = |x: &DVector<f64>, derivs: bool| {
        let f = layout.value(x);
        if derivs {
            (f, layout.gradient(x), layout.hessian(x))
        } else {
            (f, DVector::zeros(0), DMatrix::zeros(0, 0))
        }
    };
    let never = |_: &DVector<f64>| false;
    let m = cons.len() as f64;
    let mut report = SolverReport {
        variables: layout.dim,
        constraints: cons.len(),
        phase1_newton_iterations: phase1_iters,
        ..SolverReport::default()
    };
    let convex = layout.is_convex();
    report.convex = convex;
    let mut t = settings.t0;
    for _ in 0..settings.max_outer {
        let r = match center(&fgh, &cons, x.clone(), t, settings, &never) {
            Ok(r) => r,
            // without convexity the step cap is not a failure of the
            // method; keep the (feasible, improved) iterate and move on
            Err(PdmaError::NotConverged {
                iterations, iterate, ..
            }) if !convex => {
                report.uncentered += 1;
                Centered {
                    x: DVector::from_vec(iterate),
                    steps: iterations,
                    stalled: false,
                }
            }
            Err(e) => return Err(e),
        };
        x = r.x;
        report.outer_iterations += 1;
        report.newton_iterations += r.steps;
        report.stalled_centerings += r.stalled as usize;
        if m / t < settings.gap_tol {
            break;
        }
        t *= settings.t_growth;
    }

    let grad = layout.gradient(&x);
    let mut resid = grad.clone();
    let mut infeas: f64 = 0.0;
    for c in &cons {
        let sl = c.slack(&x);
        infeas = infeas.max(-sl);
        let lambda = 1.0 / (t * sl);
        for &(i, a) in &c.coeffs {
            resid[i] += lambda * a;
        }
    }
    report.objective = layout.value(&x);
    report.sum_rate = -report.objective;
    report.duality_gap_bound = m / t;
    report.kkt = KktResiduals {
        stationarity: resid.amax(),
        complementarity: 1.0 / t,
        primal_infeasibility: infeas.max(0.0),
    };
    Ok((PowerAlloc { p: layout.expand(&x) }, report))
}
