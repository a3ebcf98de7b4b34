//! Log-space dynamic programs over a linear chain.
//!
//! Potentials are given as per-position emission scores `emit[t][y]` and a
//! row-major `T x T` transition matrix `trans[a * T + b]` scoring the move
//! from tag `a` at `t - 1` to tag `b` at `t`.

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Forward and backward tables plus the log partition function.
pub struct Lattice {
    pub n_tags: usize,
    pub log_alpha: Vec<Vec<f64>>,
    pub log_beta: Vec<Vec<f64>>,
    pub log_z: f64,
}

impl Lattice {
    pub fn new(emit: &[Vec<f64>], trans: &[f64]) -> Self {
        let n = emit.len();
        let nt = emit.first().map_or(0, Vec::len);
        let mut log_alpha = vec![vec![0.0; nt]; n];
        let mut log_beta = vec![vec![0.0; nt]; n];
        if n == 0 {
            return Self {
                n_tags: nt,
                log_alpha,
                log_beta,
                log_z: 0.0,
            };
        }
        log_alpha[0].copy_from_slice(&emit[0]);
        for t in 1..n {
            for b in 0..nt {
                let prev = &log_alpha[t - 1];
                log_alpha[t][b] =
                    emit[t][b] + log_sum_exp((0..nt).map(|a| prev[a] + trans[a * nt + b]));
            }
        }
        for t in (0..n - 1).rev() {
            for a in 0..nt {
                let next = &log_beta[t + 1];
                log_beta[t][a] =
                    log_sum_exp((0..nt).map(|b| trans[a * nt + b] + emit[t + 1][b] + next[b]));
            }
        }
        let log_z = log_sum_exp(log_alpha[n - 1].iter().copied());
        Self {
            n_tags: nt,
            log_alpha,
            log_beta,
            log_z,
        }
    }

    pub fn len(&self) -> usize {
        self.log_alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_alpha.is_empty()
    }

    pub fn log_marginal(&self, t: usize, y: usize) -> f64 {
        self.log_alpha[t][y] + self.log_beta[t][y] - self.log_z
    }

    /// Posterior tag distribution at every position, rows renormalized.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|t| {
                let mut row: Vec<f64> = (0..self.n_tags)
                    .map(|y| self.log_marginal(t, y).exp())
                    .collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= s);
                row
            })
            .collect()
    }

    /// `P(y_{t-1} = a, y_t = b)` for `t >= 1`.
    pub fn pair_marginal(
        &self,
        emit: &[Vec<f64>],
        trans: &[f64],
        t: usize,
        a: usize,
        b: usize,
    ) -> f64 {
        let nt = self.n_tags;
        (self.log_alpha[t - 1][a] + trans[a * nt + b] + emit[t][b] + self.log_beta[t][b]
            - self.log_z)
            .exp()
    }
}

/// Joint score of a tag sequence.
pub fn sequence_score(emit: &[Vec<f64>], trans: &[f64], tags: &[usize]) -> f64 {
    let nt = emit.first().map_or(0, Vec::len);
    let mut s = 0.0;
    for (t, &y) in tags.iter().enumerate() {
        s += emit[t][y];
        if t > 0 {
            s += trans[tags[t - 1] * nt + y];
        }
    }
    s
}

/// Highest-scoring tag sequence; ties go to the lower tag index.
pub fn viterbi(emit: &[Vec<f64>], trans: &[f64]) -> Vec<usize> {
    let n = emit.len();
    if n == 0 {
        return Vec::new();
    }
    let nt = emit[0].len();
    let mut delta = emit[0].clone();
    let mut back = vec![vec![0usize; nt]; n];
    for t in 1..n {
        let mut next = vec![0.0; nt];
        for b in 0..nt {
            let mut best = 0;
            let mut best_score = delta[0] + trans[b];
            for a in 1..nt {
                let s = delta[a] + trans[a * nt + b];
                if s > best_score {
                    best = a;
                    best_score = s;
                }
            }
            back[t][b] = best;
            next[b] = best_score + emit[t][b];
        }
        delta = next;
    }
    let mut last = 0;
    for y in 1..nt {
        if delta[y] > delta[last] {
            last = y;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    path
}
