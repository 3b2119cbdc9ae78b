//! OMA and power-domain NOMA expressed as PDMA configurations, and the
//! scenario catalogue used by the harness.
//!
//! OMA is PDMA with every diversity and overlap order equal to one; PD-NOMA
//! keeps diversity one but lets two users share each beam.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::channel::{rng_from_seed, SystemDims};
use crate::error::{PdmaError, Result};
use crate::pattern::Pattern;
use crate::transceiver::TargetSelection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Oma,
    PdNoma,
    PdmaSimple,
    PdmaOptPower,
    PdmaOptBeam,
    PdmaOptBoth,
}

/// How the pattern of a trial is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamPolicy {
    /// One user per beam.
    Identity,
    /// Two users per beam, paired by [`PairingRule`].
    Paired,
    /// [`crate::pattern::simple_beam_allocation`].
    Simple,
    /// [`crate::pattern::optimize_beam_allocation`] then column assignment.
    Optimized,
}

/// How powers are set once the pattern is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerPolicy {
    /// Geometric split with factor `mu` per beam.
    Geometric,
    /// Log-barrier sum-rate maximization.
    Optimized,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Oma,
        BaselineKind::PdNoma,
        BaselineKind::PdmaSimple,
        BaselineKind::PdmaOptPower,
        BaselineKind::PdmaOptBeam,
        BaselineKind::PdmaOptBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Oma => "oma",
            BaselineKind::PdNoma => "pd_noma",
            BaselineKind::PdmaSimple => "pdma_simple",
            BaselineKind::PdmaOptPower => "pdma_opt_power",
            BaselineKind::PdmaOptBeam => "pdma_opt_beam",
            BaselineKind::PdmaOptBoth => "pdma_opt_both",
        }
    }

    pub fn beam_policy(self) -> BeamPolicy {
        match self {
            BaselineKind::Oma => BeamPolicy::Identity,
            BaselineKind::PdNoma => BeamPolicy::Paired,
            BaselineKind::PdmaSimple | BaselineKind::PdmaOptPower => BeamPolicy::Simple,
            BaselineKind::PdmaOptBeam | BaselineKind::PdmaOptBoth => BeamPolicy::Optimized,
        }
    }

    pub fn power_policy(self) -> PowerPolicy {
        match self {
            BaselineKind::PdmaOptPower | BaselineKind::PdmaOptBoth => PowerPolicy::Optimized,
            _ => PowerPolicy::Geometric,
        }
    }

    /// Target rule used when the configuration does not override it.
    pub fn default_target_selection(self) -> TargetSelection {
        match self.beam_policy() {
            BeamPolicy::Simple => TargetSelection::WeakestCovered,
            _ => TargetSelection::StrongestIdentity,
        }
    }

    /// Number of users the scenario requires, if it fixes one.
    pub fn required_users(self, n_beams: usize) -> Option<usize> {
        match self {
            BaselineKind::Oma => Some(n_beams),
            BaselineKind::PdNoma => Some(2 * n_beams),
            _ => None,
        }
    }
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = PdmaError;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PdmaError::Config(format!("unknown scenario '{s}'")))
    }
}

/// Which two users share a PD-NOMA beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairingRule {
    /// Beam 1 gets the strongest and weakest user, beam 2 the next pair
    /// inward, and so on.
    #[default]
    StrongestWeakest,
    /// Uniformly random pairs from the trial's pairing stream.
    Random,
}

/// Identity pattern; every user owns one beam and gets its full power.
pub fn oma_scenario(dims: SystemDims) -> Result<(Pattern, PowerPolicy)> {
    if dims.n_users != dims.n_beams {
        return Err(PdmaError::Config(format!(
            "OMA needs K = N, got K = {} and N = {}",
            dims.n_users, dims.n_beams
        )));
    }
    Ok((Pattern::identity(dims.n_beams)?, PowerPolicy::Geometric))
}

/// Pairs for PD-NOMA. `user_order` runs weakest to strongest; the result
/// lists `(stronger, weaker)` per beam.
pub fn pd_noma_pairs(user_order: &[usize], rule: PairingRule, seed: u64) -> Vec<(usize, usize)> {
    let k = user_order.len();
    match rule {
        PairingRule::StrongestWeakest => (0..k / 2).map(|i| (user_order[k - 1 - i], user_order[i])).collect(),
        PairingRule::Random => {
            let mut shuffled = user_order.to_vec();
            shuffled.shuffle(&mut rng_from_seed(seed));
            let rank: Vec<usize> = {
                let mut r = vec![0; k];
                for (pos, &u) in user_order.iter().enumerate() {
                    r[u] = pos;
                }
                r
            };
            shuffled
                .chunks(2)
                .map(|c| {
                    if rank[c[0]] > rank[c[1]] {
                        (c[0], c[1])
                    } else {
                        (c[1], c[0])
                    }
                })
                .collect()
        }
    }
}

/// Two users per beam, one beam per user; powers follow the geometric
/// split within each beam.
pub fn pd_noma_scenario(
    dims: SystemDims,
    user_order: &[usize],
    rule: PairingRule,
    seed: u64,
) -> Result<(Pattern, PowerPolicy)> {
    let (n, k) = (dims.n_beams, dims.n_users);
    if k != 2 * n {
        return Err(PdmaError::Config(format!(
            "PD-NOMA needs K = 2N, got K = {k} and N = {n}"
        )));
    }
    if user_order.len() != k {
        return Err(PdmaError::Dimension("user order length differs from K".into()));
    }
    let mut columns = vec![0u64; k];
    for (beam, (a, b)) in pd_noma_pairs(user_order, rule, seed).into_iter().enumerate() {
        columns[a] = 1 << beam;
        columns[b] = 1 << beam;
    }
    Ok((Pattern::from_columns(n, columns)?, PowerPolicy::Geometric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::OverloadRatio;

    #[test]
    fn oma_is_identity() {
        let (b, policy) = oma_scenario(SystemDims::new(16, 4, 3, 3)).unwrap();
        assert_eq!(b, Pattern::identity(3).unwrap());
        assert_eq!(policy, PowerPolicy::Geometric);
        let m = b.metrics();
        assert_eq!(m.diversity, vec![1, 1, 1]);
        assert_eq!(m.max_inner, 0);
        assert!(oma_scenario(SystemDims::new(16, 4, 3, 4)).is_err());
    }

    #[test]
    fn pd_noma_structure() {
        let order = [5, 0, 3, 1, 4, 2];
        let (b, _) = pd_noma_scenario(SystemDims::new(16, 4, 3, 6), &order, PairingRule::StrongestWeakest, 0).unwrap();
        let m = b.metrics();
        assert_eq!(m.diversity, vec![1; 6]);
        assert_eq!(m.overlap, vec![2, 2, 2]);
        assert_eq!(m.max_inner, 1);
        assert_eq!(m.overload_ratio, OverloadRatio { users: 6, beams: 3 });
        // beam 0 holds the strongest (2) and the weakest (5)
        assert!(b.get(0, 2) && b.get(0, 5));
        assert!(b.get(1, 4) && b.get(1, 0));
        assert!(b.get(2, 1) && b.get(2, 3));
        assert_eq!(b.inner(2, 5), 1);
        assert_eq!(b.inner(2, 4), 0);
        assert!(pd_noma_scenario(
            SystemDims::new(16, 4, 3, 5),
            &order[..5],
            PairingRule::StrongestWeakest,
            0
        )
        .is_err());
    }

    #[test]
    fn random_pairing_is_seeded_and_valid() {
        let order: Vec<usize> = (0..6).collect();
        let a = pd_noma_pairs(&order, PairingRule::Random, 7);
        assert_eq!(a, pd_noma_pairs(&order, PairingRule::Random, 7));
        let mut seen: Vec<usize> = a.iter().flat_map(|&(x, y)| [x, y]).collect();
        seen.sort();
        assert_eq!(seen, order);
        assert!(a.iter().all(|&(s, w)| s > w));
    }

    #[test]
    fn names_round_trip() {
        for k in BaselineKind::ALL {
            assert_eq!(k.name().parse::<BaselineKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("noma".parse::<BaselineKind>().is_err());
    }
}
