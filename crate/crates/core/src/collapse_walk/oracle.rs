//! Exact absorption probabilities for the pair-transfer walk.
//!
//! Enumerates every lattice state reachable from the query (all count
//! vectors over its active coordinates with the same total), assembles the
//! first-step equations `h(s) = mean of h over successors`, and solves them
//! directly: dense LU for small systems, matrix-free Gauss-Seidel sweeps for
//! larger ones. No martingale shortcut is used anywhere, which is the point:
//! the solve independently checks that absorption probabilities equal the
//! initial coordinates over `M`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::{LatticeWalkState, ORACLE_STATE_LIMIT};

/// Above this many states the dense solve gives way to Gauss-Seidel.
const DENSE_LIMIT: usize = 2_000;

const GS_DISPLACEMENT_TOL: f64 = 1e-15;
const GS_RESIDUAL_TOL: f64 = 1e-10;
const GS_MAX_SWEEPS: u64 = 400_000;

/// Probability that the walk started at `state` is absorbed at each vertex,
/// solved from the exact linear system.
///
/// The state space is every composition of `M` over the active coordinates,
/// `C(M + a - 1, a - 1)` states; calls above [`ORACLE_STATE_LIMIT`] are
/// rejected as a capacity error.
pub fn absorption_oracle(state: &LatticeWalkState) -> Result<Vec<f64>> {
    let active = state.active().to_vec();
    let a = active.len();
    let d = state.dim();
    let m = state.resolution();

    if a == 1 {
        let mut out = vec![0.0; d];
        out[active[0]] = 1.0;
        return Ok(out);
    }

    let n_states_big = compositions_count(m, a);
    if n_states_big > ORACLE_STATE_LIMIT as u128 {
        return Err(Error::StateSpaceTooLarge {
            states: n_states_big,
            limit: ORACLE_STATE_LIMIT,
        });
    }
    let n = n_states_big as usize;

    let lattice = Lattice::enumerate(m as u32, a, n);
    let query: Vec<u32> = active.iter().map(|&i| state.counts()[i] as u32).collect();
    let query_idx = lattice
        .index_of(&query)
        .expect("query state is a composition of its own total");

    let solution = if n <= DENSE_LIMIT {
        solve_dense(&lattice)?
    } else {
        solve_gauss_seidel(&lattice)?
    };

    let mut out = vec![0.0; d];
    for (k, &coord) in active.iter().enumerate() {
        out[coord] = solution[query_idx * a + k];
    }
    Ok(out)
}

/// Number of compositions of `m` into `parts` non-negative parts.
fn compositions_count(m: u64, parts: usize) -> u128 {
    // C(m + parts - 1, parts - 1)
    let k = (parts - 1) as u128;
    let n = m as u128 + k;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

/// The enumerated composition lattice, flat `n x parts`, lex ascending.
struct Lattice {
    parts: usize,
    flat: Vec<u32>,
    n: usize,
}

impl Lattice {
    fn enumerate(total: u32, parts: usize, expected: usize) -> Self {
        let mut flat = Vec::with_capacity(expected * parts);
        let mut c = vec![0u32; parts];
        c[parts - 1] = total;
        loop {
            flat.extend_from_slice(&c);
            // lex successor: bump the slot left of the rightmost positive,
            // dump everything to its right into the final slot
            let r = match (0..parts).rev().find(|&i| c[i] > 0) {
                Some(0) | None => break,
                Some(r) => r,
            };
            let rest: u32 = c[r..].iter().sum::<u32>() - 1;
            c[r - 1] += 1;
            for v in &mut c[r..] {
                *v = 0;
            }
            c[parts - 1] = rest;
        }
        let n = flat.len() / parts;
        debug_assert_eq!(n, expected);
        Lattice { parts, flat, n }
    }

    fn state(&self, idx: usize) -> &[u32] {
        &self.flat[idx * self.parts..(idx + 1) * self.parts]
    }

    fn index_of(&self, target: &[u32]) -> Option<usize> {
        let mut lo = 0usize;
        let mut hi = self.n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(target) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Local vertex index if the state is absorbing (single positive part).
    fn absorbing_vertex(&self, idx: usize) -> Option<usize> {
        let s = self.state(idx);
        let mut vertex = None;
        for (k, &c) in s.iter().enumerate() {
            if c > 0 {
                if vertex.is_some() {
                    return None;
                }
                vertex = Some(k);
            }
        }
        vertex
    }

    /// Successor indices of a non-absorbing state; uniform over directed
    /// single-quantum transfers between positive parts.
    fn successors(&self, idx: usize, buf: &mut Vec<usize>) {
        buf.clear();
        let s = self.state(idx);
        let support: Vec<usize> = (0..self.parts).filter(|&k| s[k] > 0).collect();
        let mut neighbor = s.to_vec();
        for &give in &support {
            for &take in &support {
                if give == take {
                    continue;
                }
                neighbor.copy_from_slice(s);
                neighbor[give] -= 1;
                neighbor[take] += 1;
                let t = self
                    .index_of(&neighbor)
                    .expect("transfers stay on the lattice");
                buf.push(t);
            }
        }
    }
}

/// Dense route: LU-factor `(I - Q)` and solve for all vertices at once.
fn solve_dense(lattice: &Lattice) -> Result<Vec<f64>> {
    let n = lattice.n;
    let a = lattice.parts;
    let mut system = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, a);
    let mut buf = Vec::new();
    for s in 0..n {
        system[(s, s)] = 1.0;
        if let Some(vertex) = lattice.absorbing_vertex(s) {
            rhs[(s, vertex)] = 1.0;
        } else {
            lattice.successors(s, &mut buf);
            let w = 1.0 / buf.len() as f64;
            for &t in &buf {
                system[(s, t)] -= w;
            }
        }
    }
    let solved = system.lu().solve(&rhs).ok_or(Error::SolveStalled {
        residual: f64::NAN,
        sweeps: 0,
    })?;
    let mut out = vec![0.0; n * a];
    for s in 0..n {
        for k in 0..a {
            out[s * a + k] = solved[(s, k)];
        }
    }
    Ok(out)
}

/// Iterative route: Gauss-Seidel sweeps over the first-step equations,
/// matrix-free. Converges for absorbing chains; stalling is reported rather
/// than tolerated.
fn solve_gauss_seidel(lattice: &Lattice) -> Result<Vec<f64>> {
    let n = lattice.n;
    let a = lattice.parts;
    let mut h = vec![0.0f64; n * a];
    let mut absorbing = vec![false; n];
    // precompute successor lists once; the sweep is the hot loop
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets: Vec<u32> = Vec::new();
    let mut buf = Vec::new();
    offsets.push(0u32);
    for s in 0..n {
        if let Some(vertex) = lattice.absorbing_vertex(s) {
            absorbing[s] = true;
            h[s * a + vertex] = 1.0;
        } else {
            lattice.successors(s, &mut buf);
            targets.extend(buf.iter().map(|&t| t as u32));
        }
        offsets.push(targets.len() as u32);
    }

    let mut sweeps = 0u64;
    loop {
        sweeps += 1;
        let mut displacement = 0.0f64;
        for s in 0..n {
            if absorbing[s] {
                continue;
            }
            let lo = offsets[s] as usize;
            let hi = offsets[s + 1] as usize;
            let w = 1.0 / (hi - lo) as f64;
            for k in 0..a {
                let mut acc = 0.0;
                for &t in &targets[lo..hi] {
                    acc += h[t as usize * a + k];
                }
                let new = acc * w;
                let delta = (new - h[s * a + k]).abs();
                if delta > displacement {
                    displacement = delta;
                }
                h[s * a + k] = new;
            }
        }
        if displacement < GS_DISPLACEMENT_TOL {
            break;
        }
        if sweeps >= GS_MAX_SWEEPS {
            return Err(Error::SolveStalled {
                residual: displacement,
                sweeps,
            });
        }
    }

    // confirm the fixed point actually satisfies the first-step equations
    let mut residual = 0.0f64;
    for s in 0..n {
        if absorbing[s] {
            continue;
        }
        let lo = offsets[s] as usize;
        let hi = offsets[s + 1] as usize;
        let w = 1.0 / (hi - lo) as f64;
        for k in 0..a {
            let mut acc = 0.0;
            for &t in &targets[lo..hi] {
                acc += h[t as usize * a + k];
            }
            let r = (acc * w - h[s * a + k]).abs();
            if r > residual {
                residual = r;
            }
        }
    }
    if residual > GS_RESIDUAL_TOL {
        return Err(Error::SolveStalled { residual, sweeps });
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_for(counts: Vec<u64>) -> Vec<f64> {
        let state = LatticeWalkState::from_counts(counts).unwrap();
        absorption_oracle(&state).unwrap()
    }

    #[test]
    fn two_coordinate_case_matches_ruin_closed_form() {
        // unbiased ruin: absorption at the top from n of M is n / M
        let probs = oracle_for(vec![36, 64]);
        assert!((probs[0] - 0.36).abs() < 1e-9, "{probs:?}");
        assert!((probs[1] - 0.64).abs() < 1e-9, "{probs:?}");
    }

    #[test]
    fn three_coordinate_case_matches_initial_fractions() {
        let probs = oracle_for(vec![5, 3, 2]);
        assert!((probs[0] - 0.5).abs() < 1e-9, "{probs:?}");
        assert!((probs[1] - 0.3).abs() < 1e-9, "{probs:?}");
        assert!((probs[2] - 0.2).abs() < 1e-9, "{probs:?}");
    }

    #[test]
    fn absorbed_state_is_its_own_answer() {
        let probs = oracle_for(vec![10, 0, 0]);
        assert_eq!(probs, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn inactive_coordinates_get_zero_probability() {
        let probs = oracle_for(vec![4, 0, 6]);
        assert_eq!(probs[1], 0.0);
        assert!((probs[0] - 0.4).abs() < 1e-9);
        assert!((probs[2] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn gauss_seidel_route_agrees_with_fractions() {
        // C(72, 2) = 2556 states, above the dense limit
        let probs = oracle_for(vec![30, 25, 15]);
        assert!((probs[0] - 30.0 / 70.0).abs() < 1e-9, "{probs:?}");
        assert!((probs[1] - 25.0 / 70.0).abs() < 1e-9, "{probs:?}");
        assert!((probs[2] - 15.0 / 70.0).abs() < 1e-9, "{probs:?}");
    }

    #[test]
    fn four_coordinate_dense_case() {
        let probs = oracle_for(vec![4, 3, 2, 1]);
        let expected = [0.4, 0.3, 0.2, 0.1];
        for (p, e) in probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-9, "{probs:?}");
        }
    }

    #[test]
    fn oversized_state_space_is_rejected() {
        let state = LatticeWalkState::from_counts(vec![1000, 1000, 1000]).unwrap();
        assert!(matches!(
            absorption_oracle(&state),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn composition_counts_are_exact() {
        assert_eq!(compositions_count(10, 2), 11);
        assert_eq!(compositions_count(10, 3), 66);
        assert_eq!(compositions_count(30, 4), 5456);
    }
}
