//! Monte Carlo user sessions under a frequency policy: geometric
//! session lengths, per-request batch draws, click-or-restart
//! transitions, and the cost / quality / cache-hit metrics.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::Policy;
use crate::sampler::BatchDistribution;
use crate::user::UserModel;

/// Hard ceiling on a single session, defensive against lambda ~ 1.
const MAX_SESSION_LENGTH: usize = 10_000_000;

/// One simulated session. The start state S_0 comes from the catalog
/// popularity p0 and its cost is not charged; the L requested states
/// carry the costs. Each request scores the batch that was on display
/// when it was made, whether or not the user clicked it.
#[derive(Debug, Clone)]
pub struct SessionTrace {
    /// S_0 .. S_L; length L+1.
    pub states: Vec<usize>,
    /// c(S_1) .. c(S_L); length L.
    pub costs: Vec<f64>,
    /// Normalized quality of the batch shown before each request; length L.
    pub qualities: Vec<f64>,
    /// Whether each request followed the recommendation batch; length L.
    pub followed: Vec<bool>,
}

impl SessionTrace {
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// One line per request, for eyeballing dynamics.
    pub fn to_debug_lines(&self) -> String {
        let mut out = String::new();
        for t in 0..self.len() {
            out.push_str(&format!(
                "{} {} -> {} cost {} quality {:.4} {}\n",
                t + 1,
                self.states[t],
                self.states[t + 1],
                self.costs[t],
                self.qualities[t],
                if self.followed[t] { "followed" } else { "restart" },
            ));
        }
        out
    }
}

/// Session-averaged metrics with normal-approximation confidence
/// half-widths (95%). Per-session means are computed first, then
/// averaged across sessions, so long sessions do not dominate.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub mean_cost: f64,
    pub mean_quality: f64,
    pub hit_probability: f64,
    pub mean_length: f64,
    pub sessions: usize,
    pub cost_half_width: f64,
    pub quality_half_width: f64,
    pub hit_half_width: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "experiment,lambda,q,alpha,n,mean_cost,\
mean_quality,hit_probability,mean_length,sessions,cost_ci,quality_ci,hit_ci";

    pub fn to_csv_row(&self, experiment: &str, user: &UserModel) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            experiment,
            user.lambda,
            user.q,
            user.alpha,
            user.n,
            self.mean_cost,
            self.mean_quality,
            self.hit_probability,
            self.mean_length,
            self.sessions,
            self.cost_half_width,
            self.quality_half_width,
            self.hit_half_width
        )
    }

    pub fn to_kv_text(&self) -> String {
        format!(
            "mean-cost: {}\nmean-quality: {}\nhit-probability: {}\n\
             mean-length: {}\nsessions: {}\ncost-ci: {}\nquality-ci: {}\nhit-ci: {}\n",
            self.mean_cost,
            self.mean_quality,
            self.hit_probability,
            self.mean_length,
            self.sessions,
            self.cost_half_width,
            self.quality_half_width,
            self.hit_half_width
        )
    }
}

/// Cache-hit gain of `a` over `reference`, in percent.
pub fn relative_gain(a: &Metrics, reference: &Metrics) -> Result<f64> {
    if reference.hit_probability <= 0.0 {
        return Err(Error::InvalidArgument(
            "reference hit probability is zero; relative gain is undefined".into(),
        ));
    }
    Ok((a.hit_probability - reference.hit_probability) / reference.hit_probability * 100.0)
}

/// Everything sessions share: per-state batch distributions and the
/// start-state cumulative distribution.
struct SessionSetup<'a> {
    instance: &'a Instance,
    user: &'a UserModel,
    batches: Vec<BatchDistribution>,
    p0_cum: Vec<f64>,
    /// q_max per state at the policy batch size, for quality scoring.
    q_max: Vec<f64>,
}

impl<'a> SessionSetup<'a> {
    fn new(instance: &'a Instance, policy: &'a Policy, user: &'a UserModel) -> Result<Self> {
        if policy.k() != instance.k() {
            return Err(Error::InvalidArgument(format!(
                "policy is over {} items, instance has {}",
                policy.k(),
                instance.k()
            )));
        }
        if policy.n() != user.n {
            return Err(Error::InvalidArgument(format!(
                "policy batch size {} differs from user model batch size {}",
                policy.n(),
                user.n
            )));
        }
        let k = instance.k();
        let batches = (0..k)
            .map(|i| BatchDistribution::from_policy_row(policy, i))
            .collect::<Result<_>>()?;
        let mut p0_cum = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &p in instance.p0() {
            acc += p;
            p0_cum.push(acc);
        }
        *p0_cum.last_mut().expect("K >= 2") = 1.0;
        let q_max = (0..k)
            .map(|i| instance.q_max(i, user.n))
            .collect::<Result<_>>()?;
        Ok(SessionSetup {
            instance,
            user,
            batches,
            p0_cum,
            q_max,
        })
    }

    fn draw_p0<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.random();
        self.p0_cum.partition_point(|&c| c <= x)
    }

    fn draw_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let lambda = self.user.lambda;
        if lambda == 0.0 {
            return 1;
        }
        // Inversion of P(L = l) = (1 - lambda) lambda^(l-1), l >= 1.
        let u: f64 = 1.0 - rng.random::<f64>();
        let l = 1.0 + (u.ln() / lambda.ln()).floor();
        (l as usize).clamp(1, MAX_SESSION_LENGTH)
    }

    /// Quality of batch `w` at state `i`, against the cached q_max.
    fn quality(&self, i: usize, w: &[usize]) -> f64 {
        if self.q_max[i] == 0.0 {
            return 1.0;
        }
        let u_row = self.instance.u_row(i);
        w.iter().map(|&j| u_row[j]).sum::<f64>() / self.q_max[i]
    }

    fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> SessionTrace {
        let length = self.draw_length(rng);
        let alpha = self.user.alpha;
        let mut states = Vec::with_capacity(length + 1);
        let mut costs = Vec::with_capacity(length);
        let mut qualities = Vec::with_capacity(length);
        let mut followed = Vec::with_capacity(length);

        let mut s = self.draw_p0(rng);
        states.push(s);
        for _ in 0..length {
            let batch = self.batches[s].sample(rng);
            qualities.push(self.quality(s, &batch));
            let follow = rng.random::<f64>() < alpha;
            let next = if follow {
                batch[rng.random_range(0..batch.len())]
            } else {
                self.draw_p0(rng)
            };
            costs.push(self.instance.cost(next));
            followed.push(follow);
            states.push(next);
            s = next;
        }
        SessionTrace {
            states,
            costs,
            qualities,
            followed,
        }
    }
}

/// Simulates one session with the caller's random stream.
pub fn simulate_session<R: Rng + ?Sized>(
    instance: &Instance,
    policy: &Policy,
    user: &UserModel,
    rng: &mut R,
) -> Result<SessionTrace> {
    Ok(SessionSetup::new(instance, policy, user)?.run(rng))
}

/// Runs `n_sessions` independent sessions and aggregates metrics.
/// Session i uses stream i of a counter-based generator seeded with
/// `seed`, so results are reproducible regardless of thread count.
pub fn run_monte_carlo(
    instance: &Instance,
    policy: &Policy,
    user: &UserModel,
    n_sessions: usize,
    seed: u64,
) -> Result<Metrics> {
    if n_sessions == 0 {
        return Err(Error::InvalidArgument(
            "need at least one session".into(),
        ));
    }
    let setup = SessionSetup::new(instance, policy, user)?;
    // (cost mean, quality mean, hit share, length) per session.
    let stats: Vec<(f64, f64, f64, f64)> = (0..n_sessions)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let trace = setup.run(&mut rng);
            let l = trace.len() as f64;
            let c = trace.costs.iter().sum::<f64>() / l;
            let q = trace.qualities.iter().sum::<f64>() / l;
            let h = trace.states[1..]
                .iter()
                .filter(|&&s| setup.instance.is_cached(s))
                .count() as f64
                / l;
            (c, q, h, l)
        })
        .collect();

    let n = n_sessions as f64;
    let mean = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| {
        stats.iter().map(f).sum::<f64>() / n
    };
    let half_width = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64, m: f64| {
        if n_sessions < 2 {
            return f64::NAN;
        }
        let var = stats.iter().map(|s| (f(s) - m).powi(2)).sum::<f64>() / (n - 1.0);
        1.96 * (var / n).sqrt()
    };
    let mc = mean(&|s| s.0);
    let mq = mean(&|s| s.1);
    let mh = mean(&|s| s.2);
    Ok(Metrics {
        mean_cost: mc,
        mean_quality: mq,
        hit_probability: mh,
        mean_length: mean(&|s| s.3),
        sessions: n_sessions,
        cost_half_width: half_width(&|s| s.0, mc),
        quality_half_width: half_width(&|s| s.1, mq),
        hit_half_width: half_width(&|s| s.2, mh),
    })
}

/// Discounted cost sum from a fixed start state over a fixed horizon:
/// sum over t = 1..=horizon of lambda^(t-1) c(S_t), the start cost
/// excluded. Averaged over many runs this converges to
/// (v(start) - c(start)) / lambda up to the horizon truncation tail.
pub fn discounted_return<R: Rng + ?Sized>(
    instance: &Instance,
    policy: &Policy,
    user: &UserModel,
    start: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<f64> {
    if start >= instance.k() {
        return Err(Error::InvalidArgument(format!(
            "start state {start} out of range for K={}",
            instance.k()
        )));
    }
    let setup = SessionSetup::new(instance, policy, user)?;
    let mut s = start;
    let mut total = 0.0;
    let mut weight = 1.0;
    for _ in 0..horizon {
        let batch = setup.batches[s].sample(rng);
        s = if rng.random::<f64>() < user.alpha {
            batch[rng.random_range(0..batch.len())]
        } else {
            setup.draw_p0(rng)
        };
        total += weight * instance.cost(s);
        weight *= user.lambda;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{q_mixed_policy, top_n_policy};
    use crate::instance::uniform_p0;
    use crate::matrix::DenseMatrix;
    use crate::solver::evaluate_policy;
    use approx::assert_abs_diff_eq;

    fn instance(k: usize, cached: usize, seed: u64) -> Instance {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let mut row: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            row[i] = 0.0;
            rows.push(row);
        }
        let mut costs = vec![10.0; k];
        for c in costs.iter_mut().take(cached) {
            *c = 0.0;
        }
        Instance::new(
            DenseMatrix::from_rows(rows),
            costs,
            uniform_p0(k),
            (0..cached).collect(),
        )
        .unwrap()
    }

    #[test]
    fn lambda_zero_sessions_have_one_request() {
        let inst = instance(10, 2, 201);
        let user = UserModel::new(0.8, 0.5, 0.0, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = simulate_session(&inst, &policy, &user, &mut rng).unwrap();
            assert_eq!(t.len(), 1);
            assert_eq!(t.states.len(), 2);
        }
    }

    #[test]
    fn mean_length_matches_geometric() {
        let inst = instance(8, 1, 202);
        let user = UserModel::from_mean_length(0.8, 0.5, 3.0, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let m = run_monte_carlo(&inst, &policy, &user, 20_000, 11).unwrap();
        // Geometric sd is sqrt(lambda)/(1-lambda) ~ 2.45; three standard
        // errors around the mean of 3.
        let se = 2.449 / (20_000f64).sqrt();
        assert!((m.mean_length - 3.0).abs() < 3.0 * se + 0.05);
    }

    #[test]
    fn alpha_zero_visits_follow_p0() {
        // With no clicks the chain is iid p0 after the start.
        let k = 20;
        let inst = instance(k, 2, 203);
        let user = UserModel::new(0.0, 0.5, 0.99, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let setup = SessionSetup::new(&inst, &policy, &user).unwrap();
        let mut counts = vec![0usize; k];
        let mut total = 0usize;
        while total < 100_000 {
            let t = setup.run(&mut rng);
            for &s in &t.states[1..] {
                counts[s] += 1;
            }
            total += t.len();
        }
        let tv: f64 = counts
            .iter()
            .zip(inst.p0())
            .map(|(&c, &p)| (c as f64 / total as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.02, "total variation {tv} too large");
    }

    #[test]
    fn no_recommender_costs_match_popularity() {
        // alpha = 0, 1 of 100 items cached, binary costs {0,10}:
        // expected cost per request is 10 * 99/100.
        let inst = instance(100, 1, 204);
        let user = UserModel::from_mean_length(0.0, 0.5, 10.0, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let m = run_monte_carlo(&inst, &policy, &user, 4_000, 13).unwrap();
        assert_abs_diff_eq!(m.mean_cost, 9.9, epsilon = 0.1);
    }

    #[test]
    fn top_n_quality_is_exactly_one() {
        let inst = instance(15, 2, 205);
        let user = UserModel::new(0.7, 0.8, 0.8, 3).unwrap();
        let policy = top_n_policy(&inst, 3).unwrap();
        let m = run_monte_carlo(&inst, &policy, &user, 500, 14).unwrap();
        assert_eq!(m.mean_quality, 1.0);
        assert_eq!(m.quality_half_width, 0.0);
    }

    #[test]
    fn binary_costs_tie_cost_to_hit_rate() {
        let inst = instance(30, 6, 206);
        let user = UserModel::new(0.8, 0.3, 0.9, 2).unwrap();
        let policy = q_mixed_policy(&inst, 2, 0.3).unwrap();
        let m = run_monte_carlo(&inst, &policy, &user, 3_000, 15).unwrap();
        // Per-session means share the same weights, so the identity
        // holds exactly, not just in expectation.
        assert_abs_diff_eq!(m.mean_cost, 10.0 * (1.0 - m.hit_probability), epsilon = 1e-9);
    }

    #[test]
    fn quality_meets_constraint_under_sampling() {
        let inst = instance(25, 3, 207);
        let q = 0.7;
        let user = UserModel::new(0.8, q, 0.9, 3).unwrap();
        let policy = q_mixed_policy(&inst, 3, q).unwrap();
        assert!(policy.validate(&inst, q).unwrap().pass());
        let m = run_monte_carlo(&inst, &policy, &user, 3_000, 16).unwrap();
        assert!(
            m.mean_quality >= q - 0.02,
            "quality {} below constraint {q}",
            m.mean_quality
        );
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let inst = instance(12, 2, 208);
        let user = UserModel::new(0.8, 0.5, 0.9, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let a = run_monte_carlo(&inst, &policy, &user, 300, 17).unwrap();
        let b = run_monte_carlo(&inst, &policy, &user, 300, 17).unwrap();
        assert_eq!(a.mean_cost, b.mean_cost);
        assert_eq!(a.mean_quality, b.mean_quality);
        assert_eq!(a.hit_probability, b.hit_probability);
        let c = run_monte_carlo(&inst, &policy, &user, 300, 18).unwrap();
        assert!(a.mean_cost != c.mean_cost);
    }

    #[test]
    fn discounted_return_estimates_value() {
        let inst = instance(10, 2, 209);
        let user = UserModel::new(0.8, 0.5, 0.9, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let v = evaluate_policy(&inst, &policy, &user, 1e-10).unwrap();
        let start = 3;
        let horizon = 200; // lambda^200 ~ 7e-10, tail negligible
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let runs = 60_000;
        let mut acc = 0.0;
        for _ in 0..runs {
            acc +=
                discounted_return(&inst, &policy, &user, start, horizon, &mut rng).unwrap();
        }
        let estimate = inst.cost(start) + user.lambda * acc / runs as f64;
        let rel = (estimate - v.get(start)).abs() / v.get(start);
        assert!(rel <= 0.02, "relative error {rel}");
    }

    #[test]
    fn relative_gain_arithmetic() {
        let m = |hit: f64| Metrics {
            mean_cost: 0.0,
            mean_quality: 0.0,
            hit_probability: hit,
            mean_length: 0.0,
            sessions: 1,
            cost_half_width: 0.0,
            quality_half_width: 0.0,
            hit_half_width: 0.0,
        };
        assert_abs_diff_eq!(relative_gain(&m(0.3), &m(0.2)).unwrap(), 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(relative_gain(&m(0.2), &m(0.2)).unwrap(), 0.0, epsilon = 1e-9);
        assert!(relative_gain(&m(0.3), &m(0.0)).is_err());
    }

    #[test]
    fn trace_shape_is_consistent() {
        let inst = instance(10, 2, 210);
        let user = UserModel::new(0.7, 0.5, 0.8, 2).unwrap();
        let policy = top_n_policy(&inst, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        let t = simulate_session(&inst, &policy, &user, &mut rng).unwrap();
        assert_eq!(t.states.len(), t.len() + 1);
        assert_eq!(t.qualities.len(), t.len());
        assert_eq!(t.followed.len(), t.len());
        assert_eq!(t.to_debug_lines().lines().count(), t.len());
    }
}
