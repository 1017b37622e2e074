//! Matrix-free simulation of the coined walk in the full arc space.
//!
//! The state is a complex vector over all `N·d` arcs in tail-major, slot-minor
//! order, so the `d` outgoing arcs of a vertex form one contiguous block. The
//! Grover coin and the oracle act block-locally; the flip-flop shift is a
//! precomputed permutation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WalkError};
use crate::johnson::{one_based, GraphParams, JohnsonGraph, VertexId};
use crate::reports::{Engine, RunReport, RunRow};
use crate::spectral::run_time;

/// Default ceiling on the number of arc amplitudes (128 MiB per state buffer).
pub const DEFAULT_ARC_CAPACITY: u128 = 1 << 23;

/// Hard ceiling imposed by the 32-bit shift permutation.
const MAX_ARCS: u128 = 1 << 32;

/// Blocks below this many arcs are processed serially.
const PAR_THRESHOLD: usize = 1 << 15;

/// Complex amplitudes over all arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcState {
    pub amplitudes: Vec<Complex64>,
}

impl ArcState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Search instance for the full engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub params: GraphParams,
    pub marked: VertexId,
    pub steps: u64,
    pub stride: u64,
}

/// Coin, shift, and oracle for one `J(n,k)` instance.
#[derive(Debug, Clone)]
pub struct ArcWalk {
    graph: JohnsonGraph,
    opposite: Vec<u32>,
    scratch: Vec<Complex64>,
}

impl ArcWalk {
    pub fn new(params: GraphParams) -> Result<Self> {
        Self::with_capacity(params, DEFAULT_ARC_CAPACITY)
    }

    /// Refuses instances with more than `capacity` arcs.
    pub fn with_capacity(params: GraphParams, capacity: u128) -> Result<Self> {
        let limit = capacity.min(MAX_ARCS);
        let required = params.arc_count().unwrap_or(u128::MAX);
        if required > limit {
            return Err(WalkError::Capacity {
                what: "full arc-space state",
                required,
                limit,
            });
        }
        let graph = JohnsonGraph::new(params)?;
        let opposite = graph.opposite_table();
        Ok(Self {
            scratch: vec![Complex64::default(); graph.arc_count()],
            graph,
            opposite,
        })
    }

    pub fn graph(&self) -> &JohnsonGraph {
        &self.graph
    }

    pub fn params(&self) -> &GraphParams {
        self.graph.params()
    }

    fn degree(&self) -> usize {
        self.params().degree
    }

    /// `1/sqrt(dN)` on every arc.
    pub fn uniform_state(&self) -> ArcState {
        let m = self.graph.arc_count();
        ArcState {
            amplitudes: vec![Complex64::new(1.0 / (m as f64).sqrt(), 0.0); m],
        }
    }

    /// `|w'⟩`: uniform over the arcs leaving `w`.
    pub fn target_state(&self, w: VertexId) -> ArcState {
        let d = self.degree();
        let mut amplitudes = vec![Complex64::default(); self.graph.arc_count()];
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        amplitudes[w * d..(w + 1) * d].fill(amp);
        ArcState { amplitudes }
    }

    /// State concentrated on a single arc.
    pub fn basis_state(&self, arc: usize) -> ArcState {
        let mut amplitudes = vec![Complex64::default(); self.graph.arc_count()];
        amplitudes[arc] = Complex64::new(1.0, 0.0);
        ArcState { amplitudes }
    }

    /// Grover coin `2|u⟩⟨u| - I` on every vertex block.
    pub fn apply_coin(&self, state: &mut ArcState) {
        let d = self.degree();
        let scale = 2.0 / d as f64;
        let coin = |block: &mut [Complex64]| {
            let mean: Complex64 = block.iter().sum::<Complex64>() * scale;
            for a in block.iter_mut() {
                *a = mean - *a;
            }
        };
        if state.len() >= PAR_THRESHOLD {
            state.amplitudes.par_chunks_mut(d).for_each(coin);
        } else {
            state.amplitudes.chunks_mut(d).for_each(coin);
        }
    }

    /// Flip-flop shift: the amplitude on `a` moves to its opposite.
    pub fn apply_shift(&mut self, state: &mut ArcState) {
        let src = &state.amplitudes;
        let opp = &self.opposite;
        if src.len() >= PAR_THRESHOLD {
            self.scratch
                .par_iter_mut()
                .zip(opp.par_iter())
                .for_each(|(out, &o)| *out = src[o as usize]);
        } else {
            for (out, &o) in self.scratch.iter_mut().zip(opp) {
                *out = src[o as usize];
            }
        }
        std::mem::swap(&mut self.scratch, &mut state.amplitudes);
    }

    /// Reflection `I - 2|w'⟩⟨w'|`; only the block of `w` changes.
    pub fn apply_oracle(&self, state: &mut ArcState, marked: VertexId) {
        let d = self.degree();
        let block = &mut state.amplitudes[marked * d..(marked + 1) * d];
        let twice_mean: Complex64 = block.iter().sum::<Complex64>() * (2.0 / d as f64);
        for a in block.iter_mut() {
            *a -= twice_mean;
        }
    }

    /// One step of `U' = S C R` (with the oracle) or `U = S C` (without).
    pub fn step(&mut self, state: &mut ArcState, marked: VertexId, with_oracle: bool) {
        if with_oracle {
            self.apply_oracle(state, marked);
        }
        self.apply_coin(state);
        self.apply_shift(state);
    }

    /// Probability mass on the arcs whose tail is `v`.
    pub fn vertex_probability(&self, state: &ArcState, v: VertexId) -> f64 {
        let d = self.degree();
        state.amplitudes[v * d..(v + 1) * d]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Mass on arcs whose tail or head is `v`. Counts each arc at both ends,
    /// so it sums to 2 over all vertices and is not a measurement probability.
    pub fn alt_vertex_probability(&self, state: &ArcState, v: VertexId) -> f64 {
        let d = self.degree();
        let heads: f64 = self.opposite[v * d..(v + 1) * d]
            .iter()
            .map(|&o| state.amplitudes[o as usize].norm_sqr())
            .sum();
        self.vertex_probability(state, v) + heads
    }

    /// Evolves the uniform state under `U'` and records the marked-vertex
    /// probabilities every `stride` steps and at the final step.
    pub fn evolve_and_record(&mut self, config: &SearchConfig) -> Result<RunReport> {
        if config.stride == 0 {
            return Err(WalkError::Domain("stride must be positive".into()));
        }
        let marked = config.marked;
        let subset = self.graph.unrank(marked)?;
        let mut state = self.uniform_state();
        let mut rows = Vec::new();
        for t in 0..=config.steps {
            if t % config.stride == 0 || t == config.steps {
                rows.push(RunRow {
                    t,
                    p_succ: self.vertex_probability(&state, marked),
                    p_alt: Some(self.alt_vertex_probability(&state, marked)),
                    norm: state.norm(),
                });
            }
            if t < config.steps {
                self.step(&mut state, marked, true);
            }
        }
        Ok(RunReport::new(
            *self.params(),
            one_based(&subset),
            Engine::Full,
            run_time(self.params()).t_run,
            config.stride,
            rows,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(n: usize, k: usize) -> ArcWalk {
        ArcWalk::new(GraphParams::new(n, k).unwrap()).unwrap()
    }

    /// Deterministic pseudo-random normalized state (splitmix64).
    fn random_state(len: usize, seed: u64) -> ArcState {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut st = ArcState {
            amplitudes: (0..len).map(|_| Complex64::new(next(), next())).collect(),
        };
        let nrm = st.norm();
        st.amplitudes.iter_mut().for_each(|a| *a /= nrm);
        st
    }

    fn max_diff(a: &ArcState, b: &ArcState) -> f64 {
        a.amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_state_amplitudes() {
        let w = walk(4, 2);
        let s = w.uniform_state();
        assert_eq!(s.len(), 24);
        let amp = 1.0 / 24f64.sqrt();
        assert!(s.amplitudes.iter().all(|a| (a.re - amp).abs() < 1e-16 && a.im == 0.0));
        let s = walk(10, 3).uniform_state();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coin_on_single_slot() {
        let w = walk(4, 2);
        let mut s = w.basis_state(0);
        w.apply_coin(&mut s);
        let block: Vec<f64> = s.amplitudes[..4].iter().map(|a| a.re).collect();
        assert_eq!(block, vec![-0.5, 0.5, 0.5, 0.5]);
        assert!(s.amplitudes[4..].iter().all(|a| a.norm() == 0.0));

        let mut u = w.uniform_state();
        let before = u.clone();
        w.apply_coin(&mut u);
        assert!(max_diff(&u, &before) < 1e-16);
    }

    #[test]
    fn coin_oracle_involutions() {
        let w = walk(6, 2);
        for seed in 0..100 {
            let s = random_state(120, seed);
            let mut c = s.clone();
            w.apply_coin(&mut c);
            w.apply_coin(&mut c);
            assert!(max_diff(&c, &s) < 1e-12);
            let mut r = s.clone();
            w.apply_oracle(&mut r, 3);
            w.apply_oracle(&mut r, 3);
            assert!(max_diff(&r, &s) < 1e-12);
        }
    }

    #[test]
    fn shift_is_exact_involution() {
        let mut w = walk(6, 2);
        let s = random_state(120, 7);
        let mut t = s.clone();
        w.apply_shift(&mut t);
        w.apply_shift(&mut t);
        assert_eq!(t, s);

        let mut u = w.uniform_state();
        let before = u.clone();
        w.apply_shift(&mut u);
        assert_eq!(u, before);

        let mut w = walk(4, 2);
        let g = w.graph().clone();
        let mut single = w.basis_state(5);
        w.apply_shift(&mut single);
        let o = g.arc_opposite(crate::johnson::ArcId::from_index(g.params(), 5));
        assert_eq!(single.amplitudes[o.index(g.params())], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn oracle_reflects_target() {
        let w = walk(6, 2);
        let mut t = w.target_state(4);
        w.apply_oracle(&mut t, 4);
        let neg = ArcState {
            amplitudes: w.target_state(4).amplitudes.iter().map(|a| -a).collect(),
        };
        assert!(max_diff(&t, &neg) < 1e-15);

        // Zero mean on the marked block: fixed, bitwise.
        let mut s = random_state(120, 3);
        let d = 8;
        let mean: Complex64 = s.amplitudes[4 * d..5 * d].iter().sum::<Complex64>() / d as f64;
        s.amplitudes[4 * d..5 * d].iter_mut().for_each(|a| *a -= mean);
        let mut r = s.clone();
        w.apply_oracle(&mut r, 4);
        assert!(max_diff(&r, &s) < 1e-16);
        let mut r = random_state(120, 4);
        let before = r.clone();
        w.apply_oracle(&mut r, 4);
        for (i, (a, b)) in r.amplitudes.iter().zip(&before.amplitudes).enumerate() {
            if i / d != 4 {
                assert_eq!(a, b);
            }
        }
    }

    /// `U|a⟩ = Σ_{head(b)=tail(a)} (2/d - δ_{ā,b}) |b⟩`.
    #[test]
    fn single_arc_step_closed_form() {
        let mut w = walk(4, 2);
        let g = w.graph().clone();
        let p = *g.params();
        let heads = g.head_table();
        let d = p.degree as f64;
        for a in 0..g.arc_count() {
            let mut s = w.basis_state(a);
            w.step(&mut s, 0, false);
            let abar = g.arc_opposite(crate::johnson::ArcId::from_index(&p, a)).index(&p);
            let tail = a / p.degree;
            for b in 0..g.arc_count() {
                let expect = if heads[b] as usize == tail {
                    2.0 / d - if b == abar { 1.0 } else { 0.0 }
                } else {
                    0.0
                };
                assert!((s.amplitudes[b] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn uniform_is_fixed_by_unmarked_walk() {
        let mut w = walk(7, 3);
        let mut s = w.uniform_state();
        let before = s.clone();
        w.step(&mut s, 0, false);
        assert!(max_diff(&s, &before) < 1e-14);
    }

    /// `S C R` equals `S C'` with `C' = -I` on the marked block.
    #[test]
    fn oracle_matches_negated_coin_at_marked_vertex() {
        let mut w = walk(6, 2);
        let d = 8;
        for seed in 0..20 {
            let s = random_state(120, 100 + seed);
            let mut a = s.clone();
            w.step(&mut a, 5, true);
            let mut b = s.clone();
            let saved: Vec<_> = b.amplitudes[5 * d..6 * d].to_vec();
            w.apply_coin(&mut b);
            for (x, y) in b.amplitudes[5 * d..6 * d].iter_mut().zip(saved) {
                *x = -y;
            }
            w.apply_shift(&mut b);
            assert!(max_diff(&a, &b) < 1e-14);
        }
    }

    #[test]
    fn probabilities() {
        let mut w = walk(6, 2);
        let u = w.uniform_state();
        for v in 0..15 {
            assert!((w.vertex_probability(&u, v) - 1.0 / 15.0).abs() < 1e-15);
            assert!((w.alt_vertex_probability(&u, v) - 2.0 / 15.0).abs() < 1e-15);
        }
        let mut s = u.clone();
        for _ in 0..17 {
            w.step(&mut s, 2, true);
        }
        let total: f64 = (0..15).map(|v| w.vertex_probability(&s, v)).sum();
        let alt: f64 = (0..15).map(|v| w.alt_vertex_probability(&s, v)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((alt - 2.0).abs() < 1e-12);
        for v in 0..15 {
            assert!(w.alt_vertex_probability(&s, v) >= w.vertex_probability(&s, v));
        }
    }

    #[test]
    fn record_starts_uniform_and_is_deterministic() {
        let p = GraphParams::new(8, 2).unwrap();
        let cfg = SearchConfig {
            params: p,
            marked: 0,
            steps: 12,
            stride: 5,
        };
        let r1 = ArcWalk::new(p).unwrap().evolve_and_record(&cfg).unwrap();
        let r2 = ArcWalk::new(p).unwrap().evolve_and_record(&cfg).unwrap();
        assert_eq!(r1, r2);
        let ts: Vec<u64> = r1.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 5, 10, 12]);
        assert!((r1.rows[0].p_succ - 1.0 / 28.0).abs() < 1e-15);
        assert_eq!(r1.marked, vec![1, 2]);
    }

    #[test]
    fn capacity_refusal() {
        let p = GraphParams::new(40, 4).unwrap();
        assert!(matches!(ArcWalk::new(p), Err(WalkError::Capacity { .. })));
        let p = GraphParams::new(8, 2).unwrap();
        assert!(ArcWalk::with_capacity(p, 100).is_err());
    }
}
