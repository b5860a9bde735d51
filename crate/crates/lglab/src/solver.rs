//! Equilibrium computation for continuum games with finitely many types,
//! and the symmetrization that realizes an auxiliary mapping for a given
//! equilibrium aggregate.
//!
//! The driver is damped fictitious play on the aggregate,
//! τ_{k+1} = (1−α_k)·τ_k + α_k·Σ_t w_t·BR_t(τ_k) with α_k = 1/(k+2),
//! tracked per type so exploitability is available at every iterate.
//! Fictitious play alone converges like 1/k, far short of the 1e-8 target,
//! so the solver periodically freezes the active best-response supports
//! and solves the resulting square system (type masses + equal-payoff
//! conditions) by damped Newton, adjusting supports until the candidate is
//! a genuine equilibrium. On affine payoff families the refinement lands
//! in one step.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::error::{Error, Result};
use crate::game::{GameType, LargeGameSpec, Population, MAX_TYPES};
use crate::model::{ActionSpace, MixedStrategy};
use crate::transport;

/// Numeric definition of "best response": payoff within this of the max.
pub const DEFAULT_TOL_BR: f64 = 1e-8;

/// Absolute slack for transportation feasibility comparisons.
const TRANSPORT_TOL: f64 = 1e-10;

/// Supports larger than this skip the Newton refinement (system too big);
/// fictitious play keeps running.
const MAX_REFINE_VARS: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Fictitious-play iteration budget.
    pub max_iters: usize,
    /// Best-response tolerance; also the exploitability target.
    pub tol_br: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 200_000,
            tol_br: DEFAULT_TOL_BR,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("solver.max_iters must be at least 1".into()));
        }
        if !(self.tol_br > 0.0 && self.tol_br.is_finite()) {
            return Err(Error::Config(format!(
                "solver.tol_br must be a positive real, got {}",
                self.tol_br
            )));
        }
        Ok(())
    }
}

/// One type's strategy in an equilibrium table.
#[derive(Debug, Clone, Serialize)]
pub struct TypeStrategy {
    pub characteristic: Characteristic,
    pub strategy: MixedStrategy,
}

/// An equilibrium of the continuum game: the aggregate τ*, the auxiliary
/// mapping restricted to the game's support, and the residual
/// exploitability of the per-type strategies against τ*.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuumEquilibrium {
    pub tau_star: MixedStrategy,
    pub per_type_strategy: Vec<TypeStrategy>,
    pub exploitability: f64,
}

impl ContinuumEquilibrium {
    /// The auxiliary-mapping table keyed by characteristic.
    pub fn table(&self) -> BTreeMap<Characteristic, MixedStrategy> {
        self.per_type_strategy
            .iter()
            .map(|ts| (ts.characteristic.clone(), ts.strategy.clone()))
            .collect()
    }
}

/// Collapses duplicate characteristics into one type each (weights summed),
/// preserving first-occurrence order. Players with equal characteristics
/// are interchangeable, so the solver works on the merged list.
fn merged_types(types: &[GameType]) -> (Vec<Characteristic>, Vec<f64>) {
    let mut chars: Vec<Characteristic> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for t in types {
        match chars.iter().position(|c| c == &t.characteristic) {
            Some(i) => weights[i] += t.weight,
            None => {
                chars.push(t.characteristic.clone());
                weights.push(t.weight);
            }
        }
    }
    (chars, weights)
}

fn payoffs_at(chars: &[Characteristic], tau: &MixedStrategy) -> Vec<Vec<f64>> {
    chars
        .iter()
        .map(|c| (0..tau.len()).map(|a| c.eval(a, tau)).collect())
        .collect()
}

fn exploitability(u: &[Vec<f64>], strategies: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (ut, gt) in u.iter().zip(strategies) {
        let best = ut.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let played: f64 = ut.iter().zip(gt).map(|(u, g)| u * g).sum();
        worst = worst.max(best - played);
    }
    worst
}

/// Exploitability of a full per-type assignment against its own aggregate.
pub fn profile_exploitability(
    game: &LargeGameSpec,
    gbar: &BTreeMap<Characteristic, MixedStrategy>,
) -> Result<f64> {
    let types = game.finite_types()?;
    let (chars, weights) = merged_types(types);
    let na = game.action_space.len();
    let mut agg = vec![0.0; na];
    let mut strategies = Vec::with_capacity(chars.len());
    for (c, w) in chars.iter().zip(&weights) {
        let g = gbar
            .get(c)
            .ok_or_else(|| Error::InvalidInput("profile is missing a game type".into()))?;
        for a in 0..na {
            agg[a] += w * g.get(a);
        }
        strategies.push(g.probs().to_vec());
    }
    let tau = MixedStrategy::renormalized(agg);
    let u = payoffs_at(&chars, &tau);
    Ok(exploitability(&u, &strategies))
}

/// Computes a Nash-equilibrium action distribution of the continuum game
/// together with a supporting auxiliary mapping.
pub fn solve_equilibrium(game: &LargeGameSpec, cfg: &SolverConfig) -> Result<ContinuumEquilibrium> {
    cfg.validate()?;
    let types = game.finite_types()?;
    if types.len() > MAX_TYPES {
        return Err(Error::Capability(format!(
            "{} types exceed the solver limit of {MAX_TYPES}",
            types.len()
        )));
    }
    let (chars, weights) = merged_types(types);
    let space = &game.action_space;
    let na = space.len();
    let nt = chars.len();

    // per-type fictitious-play state, uniform start
    let mut strategies: Vec<Vec<f64>> = vec![vec![1.0 / na as f64; na]; nt];
    let mut tau = aggregate(&weights, &strategies, na);

    let mut best_exploit = f64::INFINITY;
    let mut best_tau = tau.clone();
    let mut stall = 0usize;
    let mut grid_used = false;

    for k in 0..cfg.max_iters {
        let tau_ms = MixedStrategy::renormalized(tau.clone());
        let u = payoffs_at(&chars, &tau_ms);
        let exploit = exploitability(&u, &strategies);
        if exploit < best_exploit - 1e-15 {
            best_exploit = exploit;
            best_tau = tau.clone();
            stall = 0;
        } else {
            stall += 1;
        }

        if k % 64 == 0 || exploit <= cfg.tol_br {
            if let Some(eq) = refine(&chars, &weights, space, &tau_ms, cfg.tol_br) {
                return Ok(eq);
            }
        }

        if stall > 4_000 && !grid_used {
            // grid fallback: local simplex refinement around the best
            // aggregate seen, scored by transportation deficit
            let warm = grid_refine(&chars, &weights, space, &best_tau);
            if let Some(eq) = refine(
                &chars,
                &weights,
                space,
                &MixedStrategy::renormalized(warm.clone()),
                cfg.tol_br,
            ) {
                return Ok(eq);
            }
            reset_from_aggregate(&chars, &weights, space, &warm, &mut strategies);
            tau = aggregate(&weights, &strategies, na);
            grid_used = true;
            stall = 0;
            continue;
        }

        // damped best-response step, lowest-index tie break
        let alpha = 1.0 / (k as f64 + 2.0);
        for (t, ut) in u.iter().enumerate() {
            let mut br = 0usize;
            for a in 1..na {
                if ut[a] > ut[br] {
                    br = a;
                }
            }
            for a in 0..na {
                let target = if a == br { 1.0 } else { 0.0 };
                strategies[t][a] += alpha * (target - strategies[t][a]);
            }
        }
        tau = aggregate(&weights, &strategies, na);
    }

    // budget exhausted: one last refinement pass from the best aggregate
    if let Some(eq) = refine(
        &chars,
        &weights,
        space,
        &MixedStrategy::renormalized(best_tau.clone()),
        cfg.tol_br,
    ) {
        return Ok(eq);
    }
    Err(Error::Solver {
        exploitability: best_exploit,
        iters: cfg.max_iters,
    })
}

fn aggregate(weights: &[f64], strategies: &[Vec<f64>], na: usize) -> Vec<f64> {
    let mut tau = vec![0.0; na];
    for (w, g) in weights.iter().zip(strategies) {
        for a in 0..na {
            tau[a] += w * g[a];
        }
    }
    tau
}

/// Replaces the fictitious-play state with a decomposition of `target`
/// over tolerant best-response arcs, falling back to pure best responses
/// for types the transportation flow leaves empty.
fn reset_from_aggregate(
    chars: &[Characteristic],
    weights: &[f64],
    space: &ActionSpace,
    target: &[f64],
    strategies: &mut [Vec<f64>],
) {
    let na = space.len();
    let tau_ms = MixedStrategy::renormalized(target.to_vec());
    let u = payoffs_at(chars, &tau_ms);
    let arcs = br_arcs(&u, 1e-6);
    let result = transport::max_flow_bipartite(weights, tau_ms.probs(), &arcs);
    for t in 0..chars.len() {
        let row_sum: f64 = result.arc_flow[t].iter().sum();
        if row_sum > 1e-12 {
            for a in 0..na {
                strategies[t][a] = result.arc_flow[t][a] / row_sum;
            }
        } else {
            let br = argmax(&u[t]);
            for a in 0..na {
                strategies[t][a] = if a == br { 1.0 } else { 0.0 };
            }
        }
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn br_arcs(u: &[Vec<f64>], tol: f64) -> Vec<Vec<bool>> {
    u.iter()
        .map(|ut| {
            let best = ut.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ut.iter().map(|&v| v >= best - tol).collect()
        })
        .collect()
}

/// Transportation deficit of an aggregate: how much of the unit mass
/// cannot be routed from types to actions along tolerant best-response
/// arcs. Zero iff the aggregate decomposes into per-type best responses.
fn transport_deficit(
    chars: &[Characteristic],
    weights: &[f64],
    tau: &MixedStrategy,
    br_tol: f64,
) -> f64 {
    let u = payoffs_at(chars, tau);
    let arcs = br_arcs(&u, br_tol);
    let result = transport::max_flow_bipartite(weights, tau.probs(), &arcs);
    (1.0 - result.flow).max(0.0)
}

/// Local simplex-grid search around `start`, halving the step from 1/8
/// down to 1/1024 and keeping the point of minimal transportation deficit.
fn grid_refine(
    chars: &[Characteristic],
    weights: &[f64],
    space: &ActionSpace,
    start: &[f64],
) -> Vec<f64> {
    let na = space.len();
    let score = |tau: &[f64]| -> f64 {
        let ms = MixedStrategy::renormalized(tau.to_vec());
        transport_deficit(chars, weights, &ms, 1e-6)
    };
    let mut best = start.to_vec();
    let mut best_score = score(&best);
    let mut step = 1.0 / 8.0;
    while step >= 1.0 / 1024.0 {
        loop {
            let mut improved = false;
            for i in 0..na {
                for j in 0..na {
                    if i == j || best[j] < step {
                        continue;
                    }
                    let mut cand = best.clone();
                    cand[i] += step;
                    cand[j] -= step;
                    let s = score(&cand);
                    if s < best_score - 1e-15 {
                        best_score = s;
                        best = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    best
}

/// Support-based exact refinement: freeze candidate best-response supports,
/// solve the square system (per-type mass + equal payoffs on the support)
/// by damped Newton, and adjust supports until the solution is feasible
/// and unexploitable.
fn refine(
    chars: &[Characteristic],
    weights: &[f64],
    space: &ActionSpace,
    tau_hint: &MixedStrategy,
    tol_br: f64,
) -> Option<ContinuumEquilibrium> {
    let u_hint = payoffs_at(chars, tau_hint);
    for &support_tol in &[1e-9, 1e-6, 1e-3, 1e-1] {
        let mut supports: Vec<Vec<usize>> = u_hint
            .iter()
            .map(|ut| {
                let best = ut.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (0..ut.len()).filter(|&a| ut[a] >= best - support_tol).collect()
            })
            .collect();
        if supports.iter().map(Vec::len).sum::<usize>() > MAX_REFINE_VARS {
            return None;
        }
        let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
        for _round in 0..64 {
            if !seen.insert(supports.clone()) {
                break; // support cycle; try a looser starting tolerance
            }
            let Some(z) = newton_on_support(chars, weights, space, &supports) else {
                break;
            };
            // negative transport mass: drop the most negative arc
            let mut worst: Option<(usize, usize, f64)> = None;
            for (t, st) in supports.iter().enumerate() {
                for (j, &a) in st.iter().enumerate() {
                    let v = z[offset(&supports, t) + j];
                    if v < -1e-9 && worst.map_or(true, |(_, _, w)| v < w) {
                        worst = Some((t, a, v));
                    }
                }
            }
            if let Some((t, a, _)) = worst {
                if supports[t].len() <= 1 {
                    break;
                }
                supports[t].retain(|&b| b != a);
                continue;
            }
            // assemble the candidate equilibrium
            let na = space.len();
            let nt = chars.len();
            let mut gbar: Vec<Vec<f64>> = vec![vec![0.0; na]; nt];
            for (t, st) in supports.iter().enumerate() {
                for (j, &a) in st.iter().enumerate() {
                    gbar[t][a] = z[offset(&supports, t) + j].max(0.0);
                }
                let sum: f64 = gbar[t].iter().sum();
                if sum <= 0.0 {
                    return None;
                }
                for v in gbar[t].iter_mut() {
                    *v /= sum;
                }
            }
            let tau = MixedStrategy::renormalized(aggregate(weights, &gbar, na));
            let u = payoffs_at(chars, &tau);
            // a non-support action strictly better than the support: add it
            let mut addition: Option<(usize, usize)> = None;
            'types: for (t, st) in supports.iter().enumerate() {
                let smax = st.iter().map(|&a| u[t][a]).fold(f64::NEG_INFINITY, f64::max);
                for a in 0..na {
                    if !st.contains(&a) && u[t][a] > smax + 1e-11 {
                        addition = Some((t, a));
                        break 'types;
                    }
                }
            }
            if let Some((t, a)) = addition {
                supports[t].push(a);
                supports[t].sort_unstable();
                continue;
            }
            let exploit = exploitability(&u, &gbar);
            if exploit <= tol_br {
                let per_type_strategy = chars
                    .iter()
                    .zip(&gbar)
                    .map(|(c, g)| TypeStrategy {
                        characteristic: c.clone(),
                        strategy: MixedStrategy::renormalized(g.clone()),
                    })
                    .collect();
                return Some(ContinuumEquilibrium {
                    tau_star: tau,
                    per_type_strategy,
                    exploitability: exploit,
                });
            }
            break;
        }
    }
    None
}

fn offset(supports: &[Vec<usize>], t: usize) -> usize {
    supports[..t].iter().map(Vec::len).sum()
}

/// Damped Newton on F(z) = 0 where F stacks the per-type mass constraints
/// and the equal-payoff conditions across each support. Returns the final
/// iterate when the residual reaches ~1e-12, else None.
fn newton_on_support(
    chars: &[Characteristic],
    weights: &[f64],
    space: &ActionSpace,
    supports: &[Vec<usize>],
) -> Option<Vec<f64>> {
    let na = space.len();
    let nz: usize = supports.iter().map(Vec::len).sum();

    // start from the uniform decomposition of each type over its support
    let mut z = Vec::with_capacity(nz);
    for (t, st) in supports.iter().enumerate() {
        for _ in st {
            z.push(weights[t] / st.len() as f64);
        }
    }

    let tau_of = |z: &[f64]| -> MixedStrategy {
        let mut tau = vec![0.0; na];
        for (t, st) in supports.iter().enumerate() {
            for (j, &a) in st.iter().enumerate() {
                tau[a] += z[offset(supports, t) + j];
            }
        }
        // mass equations keep the total near 1; tiny drift is fine here
        let total: f64 = tau.iter().sum();
        if total <= 0.0 {
            return MixedStrategy::uniform(na);
        }
        MixedStrategy::renormalized(tau.iter().map(|v| v.max(0.0)).collect())
    };

    let residual = |z: &[f64]| -> Vec<f64> {
        let tau = tau_of(z);
        let mut f = Vec::with_capacity(nz);
        for (t, st) in supports.iter().enumerate() {
            let sum: f64 = (0..st.len()).map(|j| z[offset(supports, t) + j]).sum();
            f.push(sum - weights[t]);
        }
        for (t, st) in supports.iter().enumerate() {
            if st.len() >= 2 {
                let u0 = chars[t].eval(st[0], &tau);
                for &a in &st[1..] {
                    f.push(chars[t].eval(a, &tau) - u0);
                }
            }
        }
        f
    };

    let norm_inf = |f: &[f64]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut f = residual(&z);
    for _iter in 0..60 {
        if norm_inf(&f) <= 1e-12 {
            return Some(z);
        }
        let tau = tau_of(&z);
        // Jacobian
        let mut jac = vec![vec![0.0f64; nz]; nz];
        for (t, st) in supports.iter().enumerate() {
            for j in 0..st.len() {
                jac[t][offset(supports, t) + j] = 1.0;
            }
        }
        let mut row = chars.len();
        for (t, st) in supports.iter().enumerate() {
            if st.len() < 2 {
                continue;
            }
            let g0 = chars[t].grad_tau(st[0], &tau);
            for &a in &st[1..] {
                let ga = chars[t].grad_tau(a, &tau);
                for (s, ss) in supports.iter().enumerate() {
                    for (j, &b) in ss.iter().enumerate() {
                        jac[row][offset(supports, s) + j] = ga[b] - g0[b];
                    }
                }
                row += 1;
            }
        }
        let minus_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = solve_linear(jac, minus_f)?;
        // line search on the residual norm
        let base = norm_inf(&f);
        let mut eta = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = z.iter().zip(&delta).map(|(zi, di)| zi + eta * di).collect();
            let ft = residual(&trial);
            if norm_inf(&ft) < base * (1.0 - 0.25 * eta) + 1e-15 {
                z = trial;
                f = ft;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if norm_inf(&f) <= 1e-12 {
        Some(z)
    } else {
        None
    }
}

/// Gaussian elimination with partial pivoting; on rank deficiency falls
/// back to ridge-regularized normal equations (minimum-norm-ish step for
/// duplicated equal-payoff rows).
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let a0 = a.clone();
    let b0 = b.clone();
    let mut singular = false;
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-11 {
            singular = true;
            break;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        perm.swap(col, piv);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    if !singular {
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= a[i][j] * x[j];
            }
            x[i] = acc / a[i][i];
        }
        return Some(x);
    }
    // ridge: (AᵀA + λI) x = Aᵀ b
    let lambda = 1e-12;
    let mut ata = vec![vec![0.0f64; n]; n];
    let mut atb = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a0[k][i] * a0[k][j];
            }
            ata[i][j] = acc;
        }
        ata[i][i] += lambda;
        atb[i] = (0..n).map(|k| a0[k][i] * b0[k]).sum();
    }
    // the ridge system is positive definite; plain elimination suffices
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| ata[x][col].abs().total_cmp(&ata[y][col].abs()))
            .unwrap();
        if ata[piv][col].abs() < 1e-300 {
            return None;
        }
        ata.swap(col, piv);
        atb.swap(col, piv);
        for r in col + 1..n {
            let factor = ata[r][col] / ata[col][col];
            if factor != 0.0 {
                for c in col..n {
                    ata[r][c] -= factor * ata[col][c];
                }
                atb[r] -= factor * atb[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = atb[i];
        for j in i + 1..n {
            acc -= ata[i][j] * x[j];
        }
        x[i] = acc / ata[i][i];
    }
    Some(x)
}

/// Builds the auxiliary mapping for a given equilibrium aggregate by
/// solving the transportation-feasibility problem over best-response arcs.
/// Doubles as the equilibrium-distribution validator: an infeasible system
/// means `tau_star` is not an equilibrium aggregate of this game.
pub fn symmetrize(
    game: &LargeGameSpec,
    tau_star: &MixedStrategy,
) -> Result<BTreeMap<Characteristic, MixedStrategy>> {
    symmetrize_with(game, tau_star, DEFAULT_TOL_BR)
}

/// [`symmetrize`] with an explicit best-response tolerance.
pub fn symmetrize_with(
    game: &LargeGameSpec,
    tau_star: &MixedStrategy,
    tol_br: f64,
) -> Result<BTreeMap<Characteristic, MixedStrategy>> {
    let types = game.finite_types()?;
    let na = game.action_space.len();
    if tau_star.len() != na {
        return Err(Error::Domain(format!(
            "tau_star has {} entries for a {}-action space",
            tau_star.len(),
            na
        )));
    }
    let (chars, weights) = merged_types(types);
    let u = payoffs_at(&chars, tau_star);
    let arcs = br_arcs(&u, tol_br);
    let result = transport::max_flow_bipartite(&weights, tau_star.probs(), &arcs);
    if result.flow < 1.0 - TRANSPORT_TOL {
        return Err(Error::InvalidInput(
            "tau_star is not an equilibrium distribution of this game".into(),
        ));
    }
    let mut table = BTreeMap::new();
    for (t, c) in chars.iter().enumerate() {
        let mut row = result.arc_flow[t].clone();
        let routed: f64 = row.iter().sum();
        let deficit = weights[t] - routed;
        if deficit > 0.0 {
            // park float dust on the lowest-index best response
            let first_br = (0..na).find(|&a| arcs[t][a]).unwrap_or(0);
            row[first_br] += deficit;
        }
        table.insert(c.clone(), MixedStrategy::renormalized(row));
    }
    Ok(table)
}

/// Midpoint quantization of a parametric continuum: `m` types at
/// θ_j = (2j−1)/(2m), each with weight 1/m.
pub fn discretize_population(game: &LargeGameSpec, m: usize) -> Result<LargeGameSpec> {
    if m == 0 {
        return Err(Error::Config("discretization size m must be at least 1".into()));
    }
    let family = match &game.population {
        Population::ParamContinuum { family } => *family,
        Population::FiniteTypes { .. } => {
            return Err(Error::Config(
                "discretize_population requires a parametric-continuum population".into(),
            ))
        }
    };
    let types = (1..=m)
        .map(|j| GameType {
            characteristic: family.characteristic((2 * j - 1) as f64 / (2 * m) as f64),
            weight: 1.0 / m as f64,
        })
        .collect();
    LargeGameSpec::new(
        game.action_space.clone(),
        Population::FiniteTypes { types },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::game::ContinuumFamily;

    fn aggregate_of(
        game: &LargeGameSpec,
        table: &BTreeMap<Characteristic, MixedStrategy>,
    ) -> Vec<f64> {
        let na = game.action_space.len();
        let mut agg = vec![0.0; na];
        for t in game.finite_types().unwrap() {
            let g = &table[&t.characteristic];
            for a in 0..na {
                agg[a] += t.weight * g.get(a);
            }
        }
        agg
    }

    #[test]
    fn routing_equilibrium_is_one_third_two_thirds() {
        let game = builtins::routing();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        assert!((eq.tau_star.get(0) - 1.0 / 3.0).abs() < 1e-8, "{:?}", eq.tau_star);
        assert!((eq.tau_star.get(1) - 2.0 / 3.0).abs() < 1e-8);
        assert!(eq.exploitability <= 1e-8);
        let g = &eq.per_type_strategy[0].strategy;
        assert!((g.get(0) - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn dominant_action_yields_point_mass() {
        // constant-in-tau affine payoff with a unique argmax
        let space = ActionSpace::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let game = LargeGameSpec::new(
            space,
            Population::FiniteTypes {
                types: vec![GameType {
                    characteristic: Characteristic::affine(
                        vec![0.3, 2.0, -1.0],
                        vec![vec![0.0; 3]; 3],
                    ),
                    weight: 1.0,
                }],
            },
        )
        .unwrap();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        assert!((eq.tau_star.get(1) - 1.0).abs() < 1e-10);
        assert!(eq.exploitability <= 1e-10);
    }

    #[test]
    fn opposed_dominant_types_split_the_mass() {
        let space = ActionSpace::two_point(1.0).unwrap();
        let game = LargeGameSpec::new(
            space,
            Population::FiniteTypes {
                types: vec![
                    GameType {
                        characteristic: Characteristic::affine(vec![1.0, 0.0], vec![vec![0.0; 2]; 2]),
                        weight: 0.3,
                    },
                    GameType {
                        characteristic: Characteristic::affine(vec![0.0, 1.0], vec![vec![0.0; 2]; 2]),
                        weight: 0.7,
                    },
                ],
            },
        )
        .unwrap();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        assert!((eq.tau_star.get(0) - 0.3).abs() < 1e-10);
        assert!((eq.tau_star.get(1) - 0.7).abs() < 1e-10);
    }

    #[test]
    fn two_type_congestion_builtin_solves() {
        let game = builtins::two_type_congestion();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        assert!((eq.tau_star.get(0) - 0.5).abs() < 1e-9, "{:?}", eq.tau_star);
        let table = eq.table();
        let types = game.finite_types().unwrap();
        assert!(table[&types[0].characteristic].get(1) > 1.0 - 1e-9);
        assert!(table[&types[1].characteristic].get(0) > 1.0 - 1e-9);
    }

    #[test]
    fn symmetrize_routing_spreads_the_single_type() {
        let game = builtins::routing();
        let tau = MixedStrategy::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let table = symmetrize(&game, &tau).unwrap();
        let g = table.values().next().unwrap();
        assert!((g.get(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((g.get(1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrize_hand_transportation_system() {
        // weights (1/2, 1/2); type 1 indifferent, type 2 strictly prefers 1;
        // tau* = (1/4, 3/4) forces g(t1) = (1/2, 1/2), g(t2) = (0, 1)
        let space = ActionSpace::two_point(1.0).unwrap();
        let t1 = Characteristic::affine(vec![0.0, 0.0], vec![vec![0.0; 2]; 2]);
        let t2 = Characteristic::affine(vec![0.0, 1.0], vec![vec![0.0; 2]; 2]);
        let game = LargeGameSpec::new(
            space,
            Population::FiniteTypes {
                types: vec![
                    GameType { characteristic: t1.clone(), weight: 0.5 },
                    GameType { characteristic: t2.clone(), weight: 0.5 },
                ],
            },
        )
        .unwrap();
        let tau = MixedStrategy::new(vec![0.25, 0.75]).unwrap();
        let table = symmetrize(&game, &tau).unwrap();
        assert!((table[&t1].get(0) - 0.5).abs() < 1e-12);
        assert!((table[&t1].get(1) - 0.5).abs() < 1e-12);
        assert!(table[&t2].get(0).abs() < 1e-12);
    }

    #[test]
    fn symmetrize_rejects_non_equilibrium_aggregates() {
        let game = builtins::routing();
        let tau = MixedStrategy::new(vec![0.9, 0.1]).unwrap();
        let err = symmetrize(&game, &tau).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(err.to_string().contains("not an equilibrium distribution"));
    }

    #[test]
    fn symmetrize_single_type_point_mass() {
        let space = ActionSpace::two_point(1.0).unwrap();
        let ch = Characteristic::affine(vec![0.0, 1.0], vec![vec![0.0; 2]; 2]);
        let game = LargeGameSpec::new(
            space,
            Population::FiniteTypes {
                types: vec![GameType { characteristic: ch.clone(), weight: 1.0 }],
            },
        )
        .unwrap();
        let tau = MixedStrategy::point_mass(1, 2);
        let table = symmetrize(&game, &tau).unwrap();
        assert_eq!(table[&ch].probs(), &[0.0, 1.0]);
    }

    #[test]
    fn solver_round_trips_through_symmetrize() {
        let game = builtins::two_type_congestion();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        let table = symmetrize(&game, &eq.tau_star).unwrap();
        let agg = aggregate_of(&game, &table);
        for a in 0..2 {
            assert!((agg[a] - eq.tau_star.get(a)).abs() < 1e-8);
        }
    }

    #[test]
    fn best_response_step_is_stationary_at_the_routing_equilibrium() {
        let game = builtins::routing();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        // the tie-respecting best-response step: redistribute through the
        // transportation problem and re-aggregate
        let table = symmetrize(&game, &eq.tau_star).unwrap();
        let agg = aggregate_of(&game, &table);
        for a in 0..2 {
            assert!((agg[a] - eq.tau_star.get(a)).abs() < 1e-6);
        }
        // payoffs are equalized, so no pure deviation moves the aggregate value
        let ch = &game.finite_types().unwrap()[0].characteristic;
        let u0 = ch.eval(0, &eq.tau_star);
        let u1 = ch.eval(1, &eq.tau_star);
        assert!((u0 - u1).abs() < 1e-8);
    }

    #[test]
    fn discretize_example1_midpoints() {
        let game = builtins::example1();
        let d2 = discretize_population(&game, 2).unwrap();
        let types = d2.finite_types().unwrap();
        assert_eq!(types.len(), 2);
        assert_eq!(types[0].characteristic.params[0], 0.25);
        assert_eq!(types[1].characteristic.params[0], 0.75);
        assert_eq!(types[0].weight, 0.5);

        let d1 = discretize_population(&game, 1).unwrap();
        assert_eq!(d1.finite_types().unwrap()[0].characteristic.params[0], 0.5);

        let d4 = discretize_population(&game, 4).unwrap();
        let thetas: Vec<f64> = d4
            .finite_types()
            .unwrap()
            .iter()
            .map(|t| t.characteristic.params[0])
            .collect();
        assert_eq!(thetas, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn discretize_rejects_zero_and_finite_types() {
        let game = builtins::example1();
        assert!(matches!(
            discretize_population(&game, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            discretize_population(&builtins::routing(), 4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn example1_mixing_to_half_has_zero_exploitability() {
        // every type mixing so the aggregate is (1/2, 1/2) equalizes payoffs
        let game = discretize_population(&builtins::example1(), 8).unwrap();
        let mut table = BTreeMap::new();
        for t in game.finite_types().unwrap() {
            table.insert(
                t.characteristic.clone(),
                MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
            );
        }
        let exploit = profile_exploitability(&game, &table).unwrap();
        assert!(exploit.abs() < 1e-12, "exploitability {exploit}");
    }

    #[test]
    fn example1_discretized_solves_to_half() {
        let game = discretize_population(&builtins::example1(), 4).unwrap();
        let eq = solve_equilibrium(&game, &SolverConfig::default()).unwrap();
        assert!((eq.tau_star.get(1) - 0.5).abs() < 1e-8);
        assert!(eq.exploitability <= 1e-8);
        assert!(matches!(
            game.population,
            Population::FiniteTypes { .. }
        ));
        assert_eq!(
            ContinuumFamily::Example1.theta_of(&eq.per_type_strategy[0].characteristic),
            Some(0.125)
        );
    }

    #[test]
    fn parametric_games_must_be_discretized_first() {
        let err = solve_equilibrium(&builtins::example1(), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("discretize"));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SolverConfig { max_iters: 0, tol_br: 1e-8 };
        assert!(matches!(
            solve_equilibrium(&builtins::routing(), &cfg),
            Err(Error::Config(_))
        ));
    }
}
