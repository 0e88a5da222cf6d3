//! Metropolis-Hastings kernel `K_p` on perfect and near-perfect matchings.
//!
//! A proposal draws a pair `(u, v)` uniformly from `U x V` and then
//!
//! * removes `(u, v)` if the matching is perfect and contains it,
//! * adds `(u, v)` if it is exactly the hole pair,
//! * slides if `(u, v)` shares one endpoint with the hole: with hole `(u, z)`
//!   and `v` matched to `w`, `(w, v)` is swapped for `(u, v)` (new hole
//!   `(w, z)`); symmetrically with hole `(y, v)` and `u` matched to `z`,
//!   `(u, z)` is swapped for `(u, v)` (new hole `(y, z)`),
//! * otherwise stays put.
//!
//! Every move is its own reverse under a single draw, so the proposal is
//! symmetric and acceptance `min(1, Phi_p(M') / Phi_p(M))` leaves `eta_p`
//! invariant.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matching::Matching;
use crate::oracle::enumerate_matchings;
use crate::schedule::ActivitySchedule;
use crate::target::eta_exact;
use crate::weights::WeightTable;

pub const TRANSITION_MATRIX_MAX_N: usize = 4;

/// The outcome of a proposal draw, before acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Stay,
    Remove { u: usize, v: usize },
    Add { u: usize, v: usize },
    SlideColumn { u: usize, v: usize },
    SlideRow { u: usize, v: usize },
}

/// Classifies the draw `(u, v)` for matching `m`.
pub fn classify_move(m: &Matching, u: usize, v: usize) -> Move {
    match m.hole() {
        None if m.contains(u, v) => Move::Remove { u, v },
        None => Move::Stay,
        Some((hu, hv)) if hu == u && hv == v => Move::Add { u, v },
        Some((hu, _)) if hu == u => Move::SlideColumn { u, v },
        Some((_, hv)) if hv == v => Move::SlideRow { u, v },
        Some(_) => Move::Stay,
    }
}

pub fn apply_move(m: &mut Matching, mv: Move) {
    match mv {
        Move::Stay => {}
        Move::Remove { u, v } => m.remove(u, v),
        Move::Add { u, v } => m.add(u, v),
        Move::SlideColumn { u, v } => m.slide_column(u, v),
        Move::SlideRow { u, v } => m.slide_row(u, v),
    }
}

/// Symmetric proposal: one uniform draw of `(u, v)` and the move it selects.
pub fn propose<R: Rng + ?Sized>(m: &Matching, rng: &mut R) -> Matching {
    let n = m.n();
    let k = rng.gen_range(0..n * n);
    let mut next = m.clone();
    apply_move(&mut next, classify_move(m, k / n, k % n));
    next
}

/// Kernel parameters for one step of the schedule.
#[derive(Debug, Clone)]
pub struct KernelContext<'a> {
    schedule: &'a ActivitySchedule,
    p: usize,
    weights: &'a WeightTable,
    sweeps: usize,
    lazy: bool,
    activities: Vec<f64>,
}

impl<'a> KernelContext<'a> {
    pub fn new(
        schedule: &'a ActivitySchedule,
        p: usize,
        weights: &'a WeightTable,
        sweeps: usize,
    ) -> Result<Self> {
        if p > schedule.r() {
            return Err(Error::invalid("step index beyond the schedule"));
        }
        if weights.p != p {
            return Err(Error::invalid("weight table belongs to a different step"));
        }
        if weights.n() != schedule.n() {
            return Err(Error::invalid("weight table dimension mismatch"));
        }
        if sweeps == 0 {
            return Err(Error::invalid("sweeps must be at least 1"));
        }
        Ok(Self {
            schedule,
            p,
            weights,
            sweeps,
            lazy: false,
            activities: schedule.activities(p),
        })
    }

    /// Stay put with probability 1/2 before every proposal.
    pub fn lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn schedule(&self) -> &ActivitySchedule {
        self.schedule
    }

    pub fn weights(&self) -> &WeightTable {
        self.weights
    }

    #[inline]
    fn act(&self, u: usize, v: usize) -> f64 {
        self.activities[u * self.schedule.n() + v]
    }

    /// `Phi_p(M') / Phi_p(M)` where `M'` is `m` after `mv`.
    pub fn ratio(&self, m: &Matching, mv: Move) -> f64 {
        let w = self.weights;
        match mv {
            Move::Stay => 1.0,
            Move::Remove { u, v } => w.get(u, v) / self.act(u, v),
            Move::Add { u, v } => self.act(u, v) / w.get(u, v),
            Move::SlideColumn { u, v } => {
                let (_, z) = m.hole().expect("slide from a near-perfect matching");
                let x = m.row_of(v).expect("column matched");
                self.act(u, v) / self.act(x, v) * w.get(x, z) / w.get(u, z)
            }
            Move::SlideRow { u, v } => {
                let (y, _) = m.hole().expect("slide from a near-perfect matching");
                let z = m.col_of(u).expect("row matched");
                self.act(u, v) / self.act(u, z) * w.get(y, z) / w.get(y, v)
            }
        }
    }

    /// `sweeps` Metropolis-Hastings updates of `m` in place. Returns the
    /// number of accepted non-trivial moves.
    pub fn step_in_place<R: Rng + ?Sized>(&self, m: &mut Matching, rng: &mut R) -> usize {
        let n = m.n();
        let mut accepted = 0;
        for _ in 0..self.sweeps {
            if self.lazy && rng.gen_bool(0.5) {
                continue;
            }
            let k = rng.gen_range(0..n * n);
            let mv = classify_move(m, k / n, k % n);
            if mv == Move::Stay {
                continue;
            }
            let ratio = self.ratio(m, mv);
            if ratio >= 1.0 || rng.gen::<f64>() < ratio {
                apply_move(m, mv);
                accepted += 1;
            }
        }
        accepted
    }
}

/// One application of the kernel (all `sweeps` proposals).
pub fn mh_step<R: Rng + ?Sized>(ctx: &KernelContext<'_>, mut m: Matching, rng: &mut R) -> Matching {
    ctx.step_in_place(&mut m, rng);
    m
}

/// Dense transition matrix over the completed state space.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub states: Vec<Matching>,
    data: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[(from, to)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn index_of(&self, m: &Matching) -> Option<usize> {
        self.states.iter().position(|s| s == m)
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.data
            .row_iter()
            .map(|row| libm::fabs(row.sum() - 1.0))
            .fold(0.0, f64::max)
    }

    /// Stationary law from `pi (P - I) = 0`, `sum pi = 1`, solved by LU.
    /// Does not use the target, so it can be checked against it.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let k = self.len();
        let mut a = self.data.transpose() - DMatrix::<f64>::identity(k, k);
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(k);
        b[k - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::invalid("singular system: chain is not irreducible"))?;
        Ok(pi.iter().copied().collect())
    }

    /// Every state reaches every other state through positive entries.
    pub fn is_irreducible(&self) -> bool {
        let k = self.len();
        let reach = |forward: bool| {
            let mut seen = vec![false; k];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(i) = queue.pop_front() {
                for j in 0..k {
                    let x = if forward { self.get(i, j) } else { self.get(j, i) };
                    if x > 0.0 && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        k > 0 && reach(true) && reach(false)
    }
}

/// Exact `K_p` (with `sweeps` and laziness applied) for `n <= 4`.
pub fn transition_matrix(ctx: &KernelContext<'_>) -> Result<TransitionMatrix> {
    let n = ctx.schedule.n();
    Error::guard("transition_matrix", n, TRANSITION_MATRIX_MAX_N)?;
    let states = enumerate_matchings(ctx.schedule.matrix(), true)?.items;
    let index: BTreeMap<&Matching, usize> = states.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let k = states.len();
    let draw = 1.0 / (n * n) as f64;
    let mut one = DMatrix::<f64>::zeros(k, k);
    for (i, m) in states.iter().enumerate() {
        for u in 0..n {
            for v in 0..n {
                let mv = classify_move(m, u, v);
                if mv == Move::Stay {
                    one[(i, i)] += draw;
                    continue;
                }
                let acc = ctx.ratio(m, mv).min(1.0);
                let mut next = m.clone();
                apply_move(&mut next, mv);
                let j = index[&next];
                one[(i, j)] += draw * acc;
                one[(i, i)] += draw * (1.0 - acc);
            }
        }
    }
    if ctx.lazy {
        one = (one + DMatrix::<f64>::identity(k, k)) * 0.5;
    }
    let mut data = one.clone();
    for _ in 1..ctx.sweeps {
        data = &data * &one;
    }
    Ok(TransitionMatrix { states, data })
}

/// Spectral gap of a reversible kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGap {
    /// `1 - lambda_2`, the Dirichlet-form gap (second largest signed eigenvalue).
    pub dirichlet: f64,
    /// `1 - max(|lambda_2|, |lambda_min|)`.
    pub absolute: f64,
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

/// Largest `|pi_i P_ij - pi_j P_ji|`.
pub fn detailed_balance_defect(tm: &TransitionMatrix, pi: &[f64]) -> f64 {
    let k = tm.len();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            worst = worst.max(libm::fabs(pi[i] * tm.get(i, j) - pi[j] * tm.get(j, i)));
        }
    }
    worst
}

/// Checks reversibility against `eta_p`, then diagonalises
/// `D^(1/2) P D^(-1/2)` with `D = diag(eta_p)`.
pub fn spectral_gap(ctx: &KernelContext<'_>) -> Result<SpectralGap> {
    let tm = transition_matrix(ctx)?;
    let eta = eta_exact(ctx.schedule, ctx.p, ctx.weights)?;
    let defect = detailed_balance_defect(&tm, &eta.probs);
    if defect > 1e-12 {
        return Err(Error::NotReversible { defect });
    }
    let k = tm.len();
    let sq: Vec<f64> = eta.probs.iter().map(|&q| libm::sqrt(q)).collect();
    let sym = DMatrix::from_fn(k, k, |i, j| {
        let a = sq[i] * tm.get(i, j) / sq[j];
        let b = sq[j] * tm.get(j, i) / sq[i];
        0.5 * (a + b)
    });
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let (dirichlet, absolute) = if k < 2 {
        (1.0, 1.0)
    } else {
        let second = eigenvalues[1];
        let slem = libm::fabs(second).max(libm::fabs(eigenvalues[k - 1]));
        (1.0 - second, 1.0 - slem)
    };
    Ok(SpectralGap {
        dirichlet,
        absolute,
        eigenvalues,
    })
}
