/// Visit and transition counts over a finite state-action space.
///
/// Counts gathered during an episode are kept apart and folded into the
/// cumulative tables by [`MdpModel::start_episode`], so estimates only ever
/// reflect completed episodes.
#[derive(Debug, Clone)]
pub struct MdpModel {
    states: usize,
    actions: usize,
    visits: Vec<u64>,
    transitions: Vec<Vec<(u32, u64)>>,
    episode_visits: Vec<u64>,
    episode_transitions: Vec<Vec<(u32, u64)>>,
    episode_start: u64,
    episode: u64,
}

fn bump(row: &mut Vec<(u32, u64)>, next: u32, by: u64) {
    match row.binary_search_by_key(&next, |&(s, _)| s) {
        Ok(pos) => row[pos].1 += by,
        Err(pos) => row.insert(pos, (next, by)),
    }
}

impl MdpModel {
    pub fn new(states: usize, actions: usize) -> Self {
        MdpModel {
            states,
            actions,
            visits: vec![0; states * actions],
            transitions: vec![Vec::new(); states * actions],
            episode_visits: vec![0; states * actions],
            episode_transitions: vec![Vec::new(); states * actions],
            episode_start: 0,
            episode: 0,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    fn pair(&self, s: usize, a: usize) -> usize {
        debug_assert!(s < self.states && a < self.actions);
        s * self.actions + a
    }

    /// Records `s --a--> next` in the current episode.
    pub fn record(&mut self, s: usize, a: usize, next: usize) {
        let p = self.pair(s, a);
        self.episode_visits[p] += 1;
        bump(&mut self.episode_transitions[p], next as u32, 1);
    }

    /// Folds the current episode into the cumulative counts and opens a new
    /// episode at `slot`.
    pub fn start_episode(&mut self, slot: u64) {
        for p in 0..self.visits.len() {
            let v = std::mem::take(&mut self.episode_visits[p]);
            if v == 0 {
                continue;
            }
            self.visits[p] += v;
            for (next, c) in std::mem::take(&mut self.episode_transitions[p]) {
                bump(&mut self.transitions[p], next, c);
            }
        }
        self.episode_start = slot;
        self.episode += 1;
    }

    /// Visits before the current episode.
    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visits[self.pair(s, a)]
    }

    /// Visits within the current episode.
    pub fn episode_visits(&self, s: usize, a: usize) -> u64 {
        self.episode_visits[self.pair(s, a)]
    }

    /// Observed successors of `(s, a)` before the current episode, by state.
    pub fn transition_counts(&self, s: usize, a: usize) -> &[(u32, u64)] {
        &self.transitions[self.pair(s, a)]
    }

    pub fn episode_start(&self) -> u64 {
        self.episode_start
    }

    /// Number of episodes started so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Pairs visited at least once before the current episode.
    pub fn visited_pairs(&self) -> usize {
        self.visits.iter().filter(|&&n| n > 0).count()
    }

    /// Empirical successor distribution as `(state, probability)` pairs;
    /// empty for an unvisited pair.
    pub fn estimate_sparse(&self, s: usize, a: usize) -> Vec<(u32, f64)> {
        let n = self.visits(s, a);
        if n == 0 {
            return Vec::new();
        }
        self.transition_counts(s, a)
            .iter()
            .map(|&(next, c)| (next, c as f64 / n as f64))
            .collect()
    }

    /// `true` once every cumulative visit count equals the sum of its
    /// transition counts, in both the cumulative and the episode tables.
    pub fn is_consistent(&self) -> bool {
        let check = |visits: &[u64], rows: &[Vec<(u32, u64)>]| {
            visits
                .iter()
                .zip(rows)
                .all(|(&n, row)| row.iter().map(|&(_, c)| c).sum::<u64>() == n)
        };
        check(&self.visits, &self.transitions) && check(&self.episode_visits, &self.episode_transitions)
    }
}

/// `P̂(·|s, a)` as a dense vector over all states; all zeros when `(s, a)` has
/// not been visited.
pub fn estimate_transitions(model: &MdpModel, s: usize, a: usize) -> Vec<f64> {
    let mut p = vec![0.0; model.states()];
    for (next, prob) in model.estimate_sparse(s, a) {
        p[next as usize] = prob;
    }
    p
}

/// The episode ends once the visits to `(s, a)` in this episode reach
/// `max(1, visits before it)`.
pub fn episode_should_stop(model: &MdpModel, s: usize, a: usize) -> bool {
    model.episode_visits(s, a) >= model.visits(s, a).max(1)
}
