//! Distances between probability measures on a finite metric space: the
//! Prohorov metric ρ and the dual-bounded-Lipschitz metric β.
//!
//! ρ is computed by bisection on ε, checking the two one-sided conditions
//! τ(B) ≤ ε + τ̃(B^ε) over every subset B by bitmask enumeration, with the
//! strict enlargement B^ε = {a : d(a,b) < ε for some b ∈ B}.
//!
//! β is the optimum of a small linear program over witness functions h
//! with ‖h‖∞ + ‖h‖Lip ≤ 1, solved by the dense simplex in [`crate::simplex`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ActionSpace, MixedStrategy, MAX_ACTIONS};
use crate::simplex;

/// Bisection bracket width for the Prohorov metric. Tighter than the
/// 1e-9 reporting accuracy so that triangle-inequality checks at 1e-9
/// slack stay clear of bracket error.
const PROHOROV_BRACKET: f64 = 1e-10;

/// Both distances for a pair of measures.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub prohorov: f64,
    pub bl: f64,
}

/// Computes both metrics at once.
pub fn metric_report(
    tau: &MixedStrategy,
    tau2: &MixedStrategy,
    space: &ActionSpace,
) -> Result<MetricReport> {
    Ok(MetricReport {
        prohorov: prohorov(tau, tau2, space)?,
        bl: bl_distance(tau, tau2, space)?,
    })
}

fn check_dims(tau: &MixedStrategy, tau2: &MixedStrategy, space: &ActionSpace) -> Result<usize> {
    let n = space.len();
    if tau.len() != n || tau2.len() != n {
        return Err(Error::Domain(format!(
            "measures of length {} and {} do not match the {}-action space",
            tau.len(),
            tau2.len(),
            n
        )));
    }
    if n > MAX_ACTIONS {
        return Err(Error::Capability(format!(
            "prohorov enumerates 2^|A| subsets and supports at most {MAX_ACTIONS} actions, got {n}"
        )));
    }
    Ok(n)
}

/// Prohorov metric ρ(τ, τ̃): the infimum of ε > 0 such that
/// τ(B) ≤ ε + τ̃(B^ε) and τ̃(B) ≤ ε + τ(B^ε) for every subset B.
pub fn prohorov(tau: &MixedStrategy, tau2: &MixedStrategy, space: &ActionSpace) -> Result<f64> {
    let n = check_dims(tau, tau2, space)?;
    let masks = 1usize << n;

    // subset sums, shared across all bisection steps
    let mut sum_tau = vec![0.0f64; masks];
    let mut sum_tau2 = vec![0.0f64; masks];
    for mask in 1..masks {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        sum_tau[mask] = sum_tau[rest] + tau.get(low);
        sum_tau2[mask] = sum_tau2[rest] + tau2.get(low);
    }

    let feasible = |eps: f64| -> bool {
        // per-action enlargement masks under the strict inequality d < eps
        let mut nb = vec![0usize; n];
        for b in 0..n {
            for a in 0..n {
                if space.d(a, b) < eps {
                    nb[b] |= 1 << a;
                }
            }
        }
        // enlargement of each subset via the same lowest-bit recursion
        let mut enlarged = vec![0usize; masks];
        for mask in 1..masks {
            let low = mask.trailing_zeros() as usize;
            enlarged[mask] = enlarged[mask & (mask - 1)] | nb[low];
        }
        for mask in 1..masks {
            let be = enlarged[mask];
            if sum_tau[mask] > eps + sum_tau2[be] || sum_tau2[mask] > eps + sum_tau[be] {
                return false;
            }
        }
        true
    };

    // eps = 1 always satisfies both conditions since every measure has mass <= 1
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > PROHOROV_BRACKET {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dual-bounded-Lipschitz metric β(τ, τ̃): the supremum of |∫ h d(τ − τ̃)|
/// over functions with ‖h‖∞ + ‖h‖Lip ≤ 1.
///
/// With the substitution y_a = h_a + m the program becomes a standard-form
/// LP: maximize Σ c_a·y_a over y, m, ℓ ≥ 0 subject to y_a ≤ 2m,
/// |y_a − y_b| ≤ ℓ·d(a,b), m + ℓ ≤ 1 (the objective is unchanged because
/// Σ c_a = 0).
pub fn bl_distance(tau: &MixedStrategy, tau2: &MixedStrategy, space: &ActionSpace) -> Result<f64> {
    let n = check_dims(tau, tau2, space)?;
    // variables: y_0..y_{n-1}, m, l
    let nv = n + 2;
    let (im, il) = (n, n + 1);
    let c: Vec<f64> = (0..nv)
        .map(|j| if j < n { tau.get(j) - tau2.get(j) } else { 0.0 })
        .collect();

    let mut a_rows: Vec<Vec<f64>> = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; nv];
        row[i] = 1.0;
        row[im] = -2.0;
        a_rows.push(row);
        b.push(0.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut row = vec![0.0; nv];
                row[i] = 1.0;
                row[j] = -1.0;
                row[il] = -space.d(i, j);
                a_rows.push(row);
                b.push(0.0);
            }
        }
    }
    let mut row = vec![0.0; nv];
    row[im] = 1.0;
    row[il] = 1.0;
    a_rows.push(row);
    b.push(1.0);

    let sol = simplex::maximize(&c, &a_rows, &b)?;
    // h = 0 is feasible, so tiny negative objectives are simplex dust
    Ok(sol.objective.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_point(d: f64) -> ActionSpace {
        ActionSpace::two_point(d).unwrap()
    }

    fn ms(v: Vec<f64>) -> MixedStrategy {
        MixedStrategy::new(v).unwrap()
    }

    /// Independent ρ oracle: scan a dense ε grid for the smallest feasible
    /// point, evaluating the defining subset conditions directly.
    fn prohorov_grid_oracle(
        tau: &MixedStrategy,
        tau2: &MixedStrategy,
        space: &ActionSpace,
        step: f64,
    ) -> f64 {
        let n = space.len();
        let masks = 1usize << n;
        let feasible = |eps: f64| {
            for mask in 1..masks {
                let mut be = 0usize;
                for b in 0..n {
                    if mask >> b & 1 == 1 {
                        for a in 0..n {
                            if space.d(a, b) < eps {
                                be |= 1 << a;
                            }
                        }
                    }
                }
                let sum = |m: &MixedStrategy, set: usize| -> f64 {
                    (0..n).filter(|a| set >> a & 1 == 1).map(|a| m.get(a)).sum()
                };
                if sum(tau, mask) > eps + sum(tau2, be) || sum(tau2, mask) > eps + sum(tau, be) {
                    return false;
                }
            }
            true
        };
        let mut eps = step;
        while eps < 1.0 {
            if feasible(eps) {
                return eps;
            }
            eps += step;
        }
        1.0
    }

    /// Independent β oracle: grid over the split m + ℓ = 1 (optimal splits
    /// exhaust the budget), with the inner maximization over h solved
    /// exactly by enumerating active-constraint intersections of the
    /// witness polytope. Three grid refinements bring the m-resolution to
    /// ~4e-9.
    pub(super) fn bl_grid_oracle(
        tau: &MixedStrategy,
        tau2: &MixedStrategy,
        space: &ActionSpace,
    ) -> f64 {
        let n = space.len();
        assert!(n <= 3, "oracle enumerates constraint triples; keep |A| <= 3");
        let c: Vec<f64> = (0..n).map(|a| tau.get(a) - tau2.get(a)).collect();

        // constraints rows: g.h <= rhs(m, l) with rhs = rm*m + rl*l
        let mut rows: Vec<(Vec<f64>, f64, f64)> = Vec::new();
        for i in 0..n {
            let mut g = vec![0.0; n];
            g[i] = 1.0;
            rows.push((g.clone(), 1.0, 0.0));
            let mut gneg = vec![0.0; n];
            gneg[i] = -1.0;
            rows.push((gneg, 1.0, 0.0));
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut g = vec![0.0; n];
                    g[i] = 1.0;
                    g[j] = -1.0;
                    rows.push((g, 0.0, space.d(i, j)));
                }
            }
        }

        let value_at = |m: f64| -> f64 {
            let l = 1.0 - m;
            let rhs: Vec<f64> = rows.iter().map(|(_, rm, rl)| rm * m + rl * l).collect();
            let feasible = |h: &[f64]| {
                rows.iter().zip(&rhs).all(|((g, _, _), &r)| {
                    g.iter().zip(h).map(|(gi, hi)| gi * hi).sum::<f64>() <= r + 1e-9
                })
            };
            let mut best = 0.0f64; // h = 0 is always feasible
            let k = rows.len();
            let mut idx = vec![0usize; n];
            // enumerate all n-subsets of constraints, solve for their intersection
            fn combos(k: usize, n: usize, idx: &mut Vec<usize>, start: usize, depth: usize, f: &mut dyn FnMut(&[usize])) {
                if depth == n {
                    f(idx);
                    return;
                }
                for i in start..k {
                    idx[depth] = i;
                    combos(k, n, idx, i + 1, depth + 1, f);
                }
            }
            let mut visit = |chosen: &[usize]| {
                // solve the n x n system g_i . h = rhs_i by Gaussian elimination
                let mut a: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].0.clone()).collect();
                let mut r: Vec<f64> = chosen.iter().map(|&i| rhs[i]).collect();
                let dim = n;
                for col in 0..dim {
                    let piv = (col..dim).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
                    if a[piv][col].abs() < 1e-12 {
                        return; // singular choice
                    }
                    a.swap(col, piv);
                    r.swap(col, piv);
                    for rr in 0..dim {
                        if rr != col {
                            let f = a[rr][col] / a[col][col];
                            for cc in 0..dim {
                                a[rr][cc] -= f * a[col][cc];
                            }
                            r[rr] -= f * r[col];
                        }
                    }
                }
                let h: Vec<f64> = (0..dim).map(|i| r[i] / a[i][i]).collect();
                if feasible(&h) {
                    let v: f64 = c.iter().zip(&h).map(|(ci, hi)| ci * hi).sum();
                    if v > best {
                        best = v;
                    }
                }
            };
            combos(k, n, &mut idx, 0, 0, &mut visit);
            best
        };

        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut best = 0.0f64;
        for _ in 0..3 {
            let steps = 1000;
            let mut arg = lo;
            for s in 0..=steps {
                let m = lo + (hi - lo) * s as f64 / steps as f64;
                let v = value_at(m);
                if v > best {
                    best = v;
                    arg = m;
                }
            }
            let w = (hi - lo) / steps as f64;
            lo = (arg - w).max(0.0);
            hi = (arg + w).min(1.0);
        }
        best
    }

    #[test]
    fn prohorov_identity() {
        let space = two_point(1.0);
        let t = ms(vec![0.3, 0.7]);
        assert!(prohorov(&t, &t, &space).unwrap() < 1e-9);
    }

    #[test]
    fn prohorov_point_masses_at_unit_distance() {
        let space = two_point(1.0);
        let d0 = MixedStrategy::point_mass(0, 2);
        let d1 = MixedStrategy::point_mass(1, 2);
        let rho = prohorov(&d0, &d1, &space).unwrap();
        assert!((rho - 1.0).abs() < 1e-6, "rho = {rho}");
        let oracle = prohorov_grid_oracle(&d0, &d1, &space, 1e-3);
        assert!((rho - oracle).abs() <= 1e-3 + 1e-6);
    }

    #[test]
    fn prohorov_mass_gap() {
        let space = two_point(1.0);
        let rho = prohorov(&ms(vec![0.6, 0.4]), &ms(vec![0.4, 0.6]), &space).unwrap();
        assert!((rho - 0.2).abs() < 1e-6, "rho = {rho}");
        let oracle = prohorov_grid_oracle(&ms(vec![0.6, 0.4]), &ms(vec![0.4, 0.6]), &space, 1e-4);
        assert!((rho - oracle).abs() <= 1e-4 + 1e-6);
    }

    #[test]
    fn bl_identity() {
        let space = two_point(1.0);
        let t = ms(vec![0.3, 0.7]);
        assert!(bl_distance(&t, &t, &space).unwrap() < 1e-12);
    }

    #[test]
    fn bl_point_masses() {
        let space = two_point(1.0);
        let d0 = MixedStrategy::point_mass(0, 2);
        let d1 = MixedStrategy::point_mass(1, 2);
        let bl = bl_distance(&d0, &d1, &space).unwrap();
        assert!((bl - 2.0 / 3.0).abs() < 1e-9, "bl = {bl}");
    }

    #[test]
    fn bl_scales_with_mass_gap() {
        let space = two_point(1.0);
        let bl = bl_distance(&ms(vec![0.6, 0.4]), &ms(vec![0.4, 0.6]), &space).unwrap();
        assert!((bl - 0.2 * 2.0 / 3.0).abs() < 1e-9, "bl = {bl}");
    }

    // closed form on a two-point space: beta = |mass gap| * 2d/(2+d)
    #[test]
    fn bl_two_point_closed_form() {
        for &d in &[0.25, 0.5, 1.0, 2.0, 5.0] {
            let space = two_point(d);
            for &p in &[0.0, 0.2, 0.5, 0.9] {
                let t1 = ms(vec![p, 1.0 - p]);
                let t2 = ms(vec![1.0 - p, p]);
                let expect = (1.0 - 2.0 * p).abs() * 2.0 * d / (2.0 + d);
                let bl = bl_distance(&t1, &t2, &space).unwrap();
                assert!(
                    (bl - expect).abs() < 1e-9,
                    "d={d} p={p}: bl={bl} expect={expect}"
                );
            }
        }
    }

    #[test]
    fn bl_matches_grid_oracle_on_three_point_spaces() {
        let space = ActionSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.5],
                vec![2.0, 1.5, 0.0],
            ],
        )
        .unwrap();
        let pairs = [
            (vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]),
            (vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5]),
            (vec![0.9, 0.05, 0.05], vec![0.1, 0.8, 0.1]),
        ];
        for (p, q) in pairs {
            let t1 = ms(p);
            let t2 = ms(q);
            let lp = bl_distance(&t1, &t2, &space).unwrap();
            let oracle = bl_grid_oracle(&t1, &t2, &space);
            assert!(
                (lp - oracle).abs() < 1e-6,
                "lp={lp} oracle={oracle}"
            );
        }
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let space = two_point(1.0);
        let t1 = ms(vec![0.5, 0.5]);
        let t3 = ms(vec![0.2, 0.3, 0.5]);
        assert!(matches!(
            prohorov(&t1, &t3, &space),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            bl_distance(&t3, &t1, &space),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn topological_equivalence_probe() {
        // shrinking sequence tau_k -> tau: both metrics vanish together and
        // order the sequence the same way
        let space = two_point(1.0);
        let target = ms(vec![0.5, 0.5]);
        let mut rhos = Vec::new();
        let mut bls = Vec::new();
        for k in 1..=12 {
            let gap = 0.4f64.powi(k) * 0.5;
            let t = ms(vec![0.5 + gap, 0.5 - gap]);
            rhos.push(prohorov(&t, &target, &space).unwrap());
            bls.push(bl_distance(&t, &target, &space).unwrap());
        }
        for k in 1..rhos.len() {
            assert!(rhos[k] < rhos[k - 1] + 1e-12);
            assert!(bls[k] < bls[k - 1] + 1e-12);
        }
        assert!(rhos.last().unwrap() < &1e-6);
        assert!(bls.last().unwrap() < &1e-6);
        // positive association between the two distances
        let mean_r: f64 = rhos.iter().sum::<f64>() / rhos.len() as f64;
        let mean_b: f64 = bls.iter().sum::<f64>() / bls.len() as f64;
        let cov: f64 = rhos
            .iter()
            .zip(&bls)
            .map(|(r, b)| (r - mean_r) * (b - mean_b))
            .sum();
        assert!(cov > 0.0);
    }

    fn arb_three_simplex() -> impl Strategy<Value = MixedStrategy> {
        proptest::array::uniform3(1e-3f64..1.0).prop_map(|raw| {
            let sum: f64 = raw.iter().sum();
            MixedStrategy::new(raw.iter().map(|x| x / sum).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn metric_axioms_hold(
            t1 in arb_three_simplex(),
            t2 in arb_three_simplex(),
            t3 in arb_three_simplex(),
        ) {
            let space = ActionSpace::new(
                vec!["a".into(), "b".into(), "c".into()],
                vec![
                    vec![0.0, 0.7, 1.0],
                    vec![0.7, 0.0, 0.9],
                    vec![1.0, 0.9, 0.0],
                ],
            ).unwrap();
            let r12 = prohorov(&t1, &t2, &space).unwrap();
            let r21 = prohorov(&t2, &t1, &space).unwrap();
            let b12 = bl_distance(&t1, &t2, &space).unwrap();
            let b21 = bl_distance(&t2, &t1, &space).unwrap();
            prop_assert!((r12 - r21).abs() < 1e-9);
            prop_assert!((b12 - b21).abs() < 1e-9);
            let r13 = prohorov(&t1, &t3, &space).unwrap();
            let r23 = prohorov(&t2, &t3, &space).unwrap();
            prop_assert!(r13 <= r12 + r23 + 1e-9);
            let b13 = bl_distance(&t1, &t3, &space).unwrap();
            let b23 = bl_distance(&t2, &t3, &space).unwrap();
            prop_assert!(b13 <= b12 + b23 + 1e-9);
            // identity of indiscernibles at numeric precision
            let self_r = prohorov(&t1, &t1, &space).unwrap();
            let self_b = bl_distance(&t1, &t1, &space).unwrap();
            prop_assert!(self_r < 1e-9);
            prop_assert!(self_b < 1e-9);
        }
    }
}
