//! One-round protocols: every player sends the referee its edges inside a
//! public random vertex sample, and the referee looks for a triangle in the
//! union.

use rand::seq::index;
use rand::Rng;

use crate::comm::{Content, Message, RandomTape, SimultaneousProtocol};
use crate::graph::{Edge, PlayerId, PlayerInput};
use crate::params::{check_epsilon_delta, check_positive, log2n, ParamError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Scale of the vertex sample for dense inputs.
    pub c_high: f64,
    /// Scale of the sampling probabilities for sparse inputs.
    pub c_low: f64,
    /// Constant of the per-instance caps in the degree-oblivious protocol.
    pub oblivious_cap: f64,
}

impl SimConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, ParamError> {
        check_epsilon_delta(epsilon, delta)?;
        Ok(SimConfig { epsilon, delta, c_high: 4.0, c_low: 8.0 / (9.0 * delta), oblivious_cap: 8.0 })
    }

    pub fn with_c_high(mut self, c: f64) -> Result<Self, ParamError> {
        check_positive("c_high", c)?;
        self.c_high = c;
        Ok(self)
    }

    pub fn with_oblivious_cap(mut self, c: f64) -> Result<Self, ParamError> {
        check_positive("oblivious cap", c)?;
        self.oblivious_cap = c;
        Ok(self)
    }

    /// `c (n^2 / (eps d))^(1/3)`, the dense-regime sample size.
    pub fn high_sample_size(&self, n: usize, d: f64) -> f64 {
        self.c_high * (n as f64 * n as f64 / (self.epsilon * d)).cbrt()
    }

    /// `p_1 = min(c/d, 1)` and `p_2 = min(c/sqrt n, 1)`.
    pub fn low_probabilities(&self, n: usize, d: f64) -> (f64, f64) {
        ((self.c_low / d).min(1.0), (self.c_low / (n as f64).sqrt()).min(1.0))
    }

    /// Per-player edge cap of the dense protocol: `(|S|^2/n^2)(4/delta) n d`.
    pub fn high_cap(&self, n: usize, s: usize, d: f64) -> f64 {
        let frac = s as f64 / n as f64;
        frac * frac * (4.0 / self.delta) * n as f64 * d
    }

    /// Per-player edge cap of the sparse protocol: `2c^2 (sqrt n + d)(2/delta)`.
    pub fn low_cap(&self, n: usize, d: f64) -> f64 {
        2.0 * self.c_low * self.c_low * ((n as f64).sqrt() + d) * (2.0 / self.delta)
    }
}

/// Edges of `input` with both endpoints in `s`.
pub fn alg_high_edges(input: &PlayerInput, s: &[bool]) -> Vec<Edge> {
    input.edges().iter().filter(|e| s[e.lo() as usize] && s[e.hi() as usize]).copied().collect()
}

/// Edges of `input` with one endpoint in `r` and the other in `r` or `s`.
pub fn alg_low_edges(input: &PlayerInput, s: &[bool], r: &[bool]) -> Vec<Edge> {
    input
        .edges()
        .iter()
        .filter(|e| {
            let (a, b) = (e.lo() as usize, e.hi() as usize);
            (r[a] && (r[b] || s[b])) || (r[b] && s[a])
        })
        .copied()
        .collect()
}

/// Keeps the lexicographically first `cap` edges. Returns whether the cap
/// was exceeded.
fn truncate(edges: &mut Vec<Edge>, cap: f64) -> bool {
    let cap = cap.floor().max(0.0) as usize;
    let hit = edges.len() > cap;
    edges.truncate(cap);
    hit
}

fn bernoulli_set(rng: &mut impl Rng, n: usize, p: f64) -> Vec<bool> {
    (0..n).map(|_| rng.random::<f64>() < p).collect()
}

/// Dense regime with known average degree: a uniform vertex subset of fixed
/// size.
#[derive(Clone, Copy, Debug)]
pub struct SimHigh {
    pub config: SimConfig,
    pub d: f64,
}

pub struct HighCoins {
    s: Vec<bool>,
    size: usize,
}

impl SimultaneousProtocol for SimHigh {
    type Public = HighCoins;

    fn name(&self) -> String {
        "sim_high".into()
    }

    fn public_coins(&self, n: usize, _k: usize, tape: &mut RandomTape) -> HighCoins {
        let size = (self.config.high_sample_size(n, self.d).ceil() as usize).min(n);
        let mut s = vec![false; n];
        for v in index::sample(&mut tape.step(), n, size) {
            s[v] = true;
        }
        HighCoins { s, size }
    }

    fn player_message(&self, public: &HighCoins, n: usize, _k: usize, _player: PlayerId, input: &PlayerInput) -> Message {
        let mut edges = alg_high_edges(input, &public.s);
        let hit = truncate(&mut edges, self.config.high_cap(n, public.size, self.d));
        let mut m = Message::default();
        m.push("simhigh", Content::Edges(edges), Some(hit));
        m
    }
}

/// Sparse regime with known average degree: a per-vertex sample `S` and a
/// sparser sample `R`.
#[derive(Clone, Copy, Debug)]
pub struct SimLow {
    pub config: SimConfig,
    pub d: f64,
}

pub struct LowCoins {
    s: Vec<bool>,
    r: Vec<bool>,
}

impl SimultaneousProtocol for SimLow {
    type Public = LowCoins;

    fn name(&self) -> String {
        "sim_low".into()
    }

    fn public_coins(&self, n: usize, _k: usize, tape: &mut RandomTape) -> LowCoins {
        let (p1, p2) = self.config.low_probabilities(n, self.d);
        let s = bernoulli_set(&mut tape.step(), n, p1);
        let r = bernoulli_set(&mut tape.step(), n, p2);
        LowCoins { s, r }
    }

    fn player_message(&self, public: &LowCoins, n: usize, _k: usize, _player: PlayerId, input: &PlayerInput) -> Message {
        let mut edges = alg_low_edges(input, &public.s, &public.r);
        let hit = truncate(&mut edges, self.config.low_cap(n, self.d));
        let mut m = Message::default();
        m.push("simlow", Content::Edges(edges), Some(hit));
        m
    }
}

/// The degrees a player considers for the graph's average degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessRange {
    pub player: PlayerId,
    /// `2|E_j|/n`.
    pub d_bar: f64,
    /// Exponents `g` of the guesses `2^g`, increasing.
    pub exponents: Vec<i32>,
}

impl GuessRange {
    /// Powers of two from the smallest at least `d_bar` to the smallest at
    /// least `(4k/eps) d_bar`. Empty for an empty part.
    pub fn new(player: PlayerId, input: &PlayerInput, n: usize, k: usize, epsilon: f64) -> Self {
        let d_bar = 2.0 * input.edges().len() as f64 / n as f64;
        let exponents = if d_bar > 0.0 {
            let lo = d_bar.log2().ceil() as i32;
            let hi = (4.0 * k as f64 / epsilon * d_bar).log2().ceil() as i32;
            (lo..=hi).collect()
        } else {
            Vec::new()
        };
        GuessRange { player, d_bar, exponents }
    }

    pub fn guesses(&self) -> impl Iterator<Item = f64> + '_ {
        self.exponents.iter().map(|&g| 2f64.powi(g))
    }
}

/// Runs an instance of the dense or sparse protocol for every degree guess
/// a player finds plausible, without knowing the average degree.
#[derive(Clone, Copy, Debug)]
pub struct SimOblivious {
    pub config: SimConfig,
}

pub struct ObliviousCoins {
    /// Smallest exponent with a drawn sample.
    g_min: i32,
    /// Per exponent: the instance's `S`.
    s: Vec<Vec<bool>>,
    /// One `R` shared by every sparse instance.
    r: Vec<bool>,
}

impl ObliviousCoins {
    fn s(&self, g: i32) -> &[bool] {
        &self.s[(g - self.g_min) as usize]
    }
}

impl SimOblivious {
    fn exponent_bounds(&self, n: usize, k: usize) -> (i32, i32) {
        // d_bar lies in [2/n, n - 1]
        let lo = (2.0 / n as f64).log2().ceil() as i32;
        let hi = (4.0 * k as f64 / self.config.epsilon * n as f64).log2().ceil() as i32;
        (lo, hi)
    }

    fn high_cap(&self, n: usize, k: usize, d_bar: f64) -> f64 {
        let l = log2n(n);
        (self.config.oblivious_cap * (n as f64 * d_bar).cbrt() * l * (k as f64 * l).log2().max(1.0)).ceil()
    }

    fn low_cap(&self, n: usize, k: usize) -> f64 {
        let l = log2n(n);
        (self.config.oblivious_cap * (n as f64).sqrt() * l * (k as f64 * l).log2().max(1.0)).ceil()
    }
}

impl SimultaneousProtocol for SimOblivious {
    type Public = ObliviousCoins;

    fn name(&self) -> String {
        "sim_oblivious".into()
    }

    fn public_coins(&self, n: usize, k: usize, tape: &mut RandomTape) -> ObliviousCoins {
        let (g_min, g_max) = self.exponent_bounds(n, k);
        let sqrt_n = (n as f64).sqrt();
        let mut rng = tape.step();
        let s = (g_min..=g_max)
            .map(|g| {
                let d = 2f64.powi(g);
                let p = if d >= sqrt_n {
                    (self.config.high_sample_size(n, d) / n as f64).min(1.0)
                } else {
                    (self.config.c_low / d).min(1.0)
                };
                bernoulli_set(&mut rng, n, p)
            })
            .collect();
        let r = bernoulli_set(&mut tape.step(), n, (self.config.c_low / sqrt_n).min(1.0));
        ObliviousCoins { g_min, s, r }
    }

    fn player_message(&self, public: &ObliviousCoins, n: usize, k: usize, player: PlayerId, input: &PlayerInput) -> Message {
        let mut m = Message::default();
        let range = GuessRange::new(player, input, n, k, self.config.epsilon);
        if range.exponents.is_empty() {
            m.push("simobliv-empty", Content::Empty, None);
            return m;
        }
        let sqrt_n = (n as f64).sqrt();
        for &g in &range.exponents {
            let d = 2f64.powi(g);
            let (mut edges, cap) = if d >= sqrt_n {
                (alg_high_edges(input, public.s(g)), self.high_cap(n, k, range.d_bar))
            } else {
                (alg_low_edges(input, public.s(g), &public.r), self.low_cap(n, k))
            };
            let hit = truncate(&mut edges, cap);
            m.push(format!("simobliv-guess-{g}"), Content::Edges(edges), Some(hit));
        }
        m
    }
}
