//! Small normal-form games: coalition values under correlated play, the
//! coalition-sampling joint policy, and exhaustive unilateral-deviation checks.

use rand::Rng;

use crate::coalition::{lattice_size, CharacteristicFunction, Coalition};
use crate::error::{Error, Result};
use crate::gibbs::{check_beta, gibbs_distribution};
use crate::scalar::{from_usize, Real};

/// Largest game accepted by [`verify_eps_nash`].
pub const MAX_NASH_PLAYERS: usize = 4;
pub const MAX_NASH_ACTIONS: usize = 4;

/// Finite game with per-player utilities on every pure profile.
///
/// Profiles are flattened in mixed radix with player 0 as the fastest digit.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame<T> {
    actions_per_player: Vec<usize>,
    utilities: Vec<Vec<T>>,
    default_actions: Vec<usize>,
}

impl<T: Real> NormalFormGame<T> {
    pub fn new(actions_per_player: Vec<usize>, utilities: Vec<Vec<T>>, default_actions: Vec<usize>) -> Result<Self> {
        let n = actions_per_player.len();
        if n == 0 || utilities.is_empty() {
            return Err(Error::EmptyGame);
        }
        if n > 20 || actions_per_player.contains(&0) {
            return Err(Error::InvalidArgument("every player needs at least one action".into()));
        }
        let profiles: usize = actions_per_player.iter().product();
        if utilities.len() != profiles {
            return Err(Error::InvalidArgument(format!(
                "expected {profiles} utility rows, got {}",
                utilities.len()
            )));
        }
        if let Some(row) = utilities.iter().position(|u| u.len() != n) {
            return Err(Error::InvalidArgument(format!("profile {row} does not carry {n} utilities")));
        }
        if default_actions.len() != n || default_actions.iter().zip(&actions_per_player).any(|(&d, &k)| d >= k) {
            return Err(Error::InvalidArgument("default action out of range".into()));
        }
        Ok(Self { actions_per_player, utilities, default_actions })
    }

    /// Random utilities, default action 0 for everyone.
    pub fn random<R: Rng + ?Sized>(actions_per_player: Vec<usize>, family: GameFamily, rng: &mut R) -> Result<Self> {
        let n = actions_per_player.len();
        let profiles: usize = actions_per_player.iter().product();
        let utilities = (0..profiles)
            .map(|_| match family {
                GameFamily::GeneralSum => (0..n).map(|_| T::lit(rng.random::<f64>())).collect(),
                GameFamily::IdenticalInterest => vec![T::lit(rng.random::<f64>()); n],
            })
            .collect();
        Self::new(actions_per_player, utilities, vec![0; n])
    }

    pub fn n_players(&self) -> usize {
        self.actions_per_player.len()
    }

    pub fn actions_per_player(&self) -> &[usize] {
        &self.actions_per_player
    }

    pub fn default_actions(&self) -> &[usize] {
        &self.default_actions
    }

    pub fn n_profiles(&self) -> usize {
        self.utilities.len()
    }

    pub fn profile_index(&self, actions: &[usize]) -> usize {
        let mut idx = 0;
        for (p, (&a, &k)) in actions.iter().zip(&self.actions_per_player).enumerate().rev() {
            debug_assert!(a < k, "player {p} action {a} out of range");
            idx = idx * k + a;
        }
        idx
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        self.actions_per_player
            .iter()
            .map(|&k| {
                let a = index % k;
                index /= k;
                a
            })
            .collect()
    }

    pub fn utility(&self, profile: usize, player: usize) -> T {
        self.utilities[profile][player]
    }

    /// Replaces `player`'s action in a flattened profile.
    fn with_action(&self, profile: usize, player: usize, action: usize) -> usize {
        let mut acts = self.decode(profile);
        acts[player] = action;
        self.profile_index(&acts)
    }
}

/// Utility distribution for [`NormalFormGame::random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameFamily {
    /// Independent `U[0,1)` utility for every player on every profile.
    GeneralSum,
    /// One shared `U[0,1)` payoff per profile.
    IdenticalInterest,
}

/// Best profile for a coalition: members choose jointly, everyone else plays
/// their default action. Returns `(v(C), profile)`; the lowest profile index wins ties.
pub fn coalition_optimum<T: Real>(g: &NormalFormGame<T>, c: Coalition) -> (T, usize) {
    let defaults = g.profile_index(g.default_actions());
    if c.is_empty() {
        return (T::zero(), defaults);
    }
    let mut best: Option<(T, usize)> = None;
    for profile in 0..g.n_profiles() {
        let acts = g.decode(profile);
        let fixed = (0..g.n_players()).all(|i| c.contains(i) || acts[i] == g.default_actions()[i]);
        if !fixed {
            continue;
        }
        let total = c.members().fold(T::zero(), |s, i| s + g.utility(profile, i));
        if best.is_none_or(|(b, _)| total > b) {
            best = Some((total, profile));
        }
    }
    best.expect("the default profile is always admissible")
}

/// `v(C)`: the best total utility the coalition secures by correlated play.
///
/// The objective is linear in the correlated distribution, so the maximum is
/// attained at a pure profile.
pub fn coalition_value_from_game<T: Real>(g: &NormalFormGame<T>, c: Coalition) -> Result<T> {
    if g.n_profiles() == 0 {
        return Err(Error::EmptyGame);
    }
    if c.n_agents() != g.n_players() {
        return Err(Error::InvalidArgument("coalition and game disagree on player count".into()));
    }
    Ok(coalition_optimum(g, c).0)
}

/// Characteristic function of the game together with each coalition's optimal profile.
pub fn game_characteristic_function<T: Real>(g: &NormalFormGame<T>) -> Result<(CharacteristicFunction<T>, Vec<usize>)> {
    let n = g.n_players();
    let mut profiles = vec![0; lattice_size(n)];
    let v = CharacteristicFunction::from_fn(n, |c| {
        let (val, prof) = coalition_optimum(g, c);
        profiles[c.mask() as usize] = prof;
        val
    })?;
    profiles[0] = g.profile_index(g.default_actions());
    Ok((v, profiles))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NashCheckReport<T> {
    /// Largest gain any player gets from switching to a fixed pure action.
    pub max_deviation_gain: T,
    /// Per-player best deviation gain.
    pub player_gains: Vec<T>,
    /// `N ln 2 / β`
    pub bound: T,
    pub beta: T,
}

impl<T: Real> NashCheckReport<T> {
    pub fn within_bound(&self) -> bool {
        self.max_deviation_gain <= self.bound
    }
}

/// `N ln 2 / β`
pub fn nash_bound<T: Real>(n_players: usize, beta: T) -> T {
    from_usize::<T>(n_players) * T::lit(std::f64::consts::LN_2) / beta
}

/// Builds the joint policy that samples a coalition from the Gibbs posterior
/// over `E = -v`, lets it play its optimal profile with everyone else at their
/// default action, and measures every player's best unilateral pure deviation.
pub fn verify_eps_nash<T: Real>(g: &NormalFormGame<T>, beta: T) -> Result<NashCheckReport<T>> {
    check_beta(beta)?;
    let n = g.n_players();
    if n > MAX_NASH_PLAYERS || g.actions_per_player().iter().any(|&k| k > MAX_NASH_ACTIONS) {
        return Err(Error::InvalidArgument(format!(
            "exhaustive deviation search supports at most {MAX_NASH_PLAYERS} players with {MAX_NASH_ACTIONS} actions"
        )));
    }
    let (v, profiles) = game_characteristic_function(g)?;
    let posterior = gibbs_distribution(&v.to_energy_table(beta))?;

    let mut player_gains = Vec::with_capacity(n);
    for i in 0..n {
        let on_path = posterior
            .probs
            .iter()
            .zip(&profiles)
            .fold(T::zero(), |s, (&p, &prof)| s + p * g.utility(prof, i));
        let best_dev = (0..g.actions_per_player()[i])
            .map(|b| {
                posterior
                    .probs
                    .iter()
                    .zip(&profiles)
                    .fold(T::zero(), |s, (&p, &prof)| s + p * g.utility(g.with_action(prof, i, b), i))
            })
            .fold(T::neg_infinity(), T::max);
        player_gains.push(best_dev - on_path);
    }
    let max_deviation_gain = player_gains.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(NashCheckReport { max_deviation_gain, player_gains, bound: nash_bound(n, beta), beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coordination() -> NormalFormGame<f64> {
        // both players get 1 at (0,0), 0 elsewhere; defaults (1,1)
        let mut utilities = vec![vec![0.0, 0.0]; 4];
        utilities[0] = vec![1.0, 1.0];
        NormalFormGame::new(vec![2, 2], utilities, vec![1, 1]).unwrap()
    }

    #[test]
    fn profile_indexing_round_trips() {
        let g = NormalFormGame::<f64>::new(vec![2, 3, 2], vec![vec![0.0; 3]; 12], vec![0, 0, 0]).unwrap();
        for idx in 0..12 {
            assert_eq!(g.profile_index(&g.decode(idx)), idx);
        }
        assert_eq!(g.profile_index(&[1, 0, 0]), 1);
        assert_eq!(g.profile_index(&[0, 1, 0]), 2);
    }

    #[test]
    fn hand_computed_coalition_values() {
        let g = coordination();
        let val = |m: u32| coalition_value_from_game(&g, Coalition::new(m, 2).unwrap()).unwrap();
        assert_eq!(val(0), 0.0);
        assert_eq!(val(0b11), 2.0);
        assert_eq!(val(0b01), 0.0);
        assert_eq!(val(0b10), 0.0);
    }

    #[test]
    fn values_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let g = NormalFormGame::<f64>::random(vec![2, 2, 2], GameFamily::GeneralSum, &mut rng).unwrap();
            for m in 1..8u32 {
                let c = Coalition::new(m, 3).unwrap();
                // enumerate the members' joint actions directly
                let members: Vec<usize> = c.members().collect();
                let mut best = f64::NEG_INFINITY;
                for code in 0..(1usize << members.len()) {
                    let mut acts = vec![0usize; 3];
                    for (k, &p) in members.iter().enumerate() {
                        acts[p] = code >> k & 1;
                    }
                    let idx = g.profile_index(&acts);
                    best = best.max(members.iter().map(|&p| g.utility(idx, p)).sum());
                }
                assert_eq!(coalition_value_from_game(&g, c).unwrap(), best);
            }
        }
    }

    #[test]
    fn bound_arithmetic() {
        assert!((nash_bound(2, 1.0f64) - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((nash_bound(3, 10.0f64) - 0.207_944_154_167_983_6).abs() < 1e-15);
    }

    #[test]
    fn identical_interest_games_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let g = NormalFormGame::<f64>::random(vec![2, 2, 2], GameFamily::IdenticalInterest, &mut rng).unwrap();
            for beta in [1.0, 2.0, 5.0, 10.0] {
                assert!(verify_eps_nash(&g, beta).unwrap().within_bound());
            }
            assert!(verify_eps_nash(&g, 1e6).unwrap().max_deviation_gain <= 1e-3);
        }
    }

    #[test]
    fn prisoners_dilemma_breaks_the_bound() {
        // action 0 = cooperate, 1 = defect; welfare is maximal at mutual cooperation,
        // from which defection pays 2 regardless of β
        let utilities: Vec<Vec<f64>> = vec![vec![3.0, 3.0], vec![5.0, 0.0], vec![0.0, 5.0], vec![1.0, 1.0]];
        let g = NormalFormGame::new(vec![2, 2], utilities, vec![0, 0]).unwrap();
        let r = verify_eps_nash(&g, 1e6).unwrap();
        assert!((r.max_deviation_gain - 2.0).abs() < 1e-9);
        assert!(!r.within_bound());
    }

    #[test]
    fn rejects_oversized_and_malformed_games() {
        let g = NormalFormGame::<f64>::new(vec![5, 2], vec![vec![0.0; 2]; 10], vec![0, 0]).unwrap();
        assert!(verify_eps_nash(&g, 1.0).is_err());
        assert!(NormalFormGame::<f64>::new(vec![2], vec![], vec![0]).is_err());
        assert!(NormalFormGame::<f64>::new(vec![2], vec![vec![1.0], vec![1.0, 2.0]], vec![0]).is_err());
    }
}
