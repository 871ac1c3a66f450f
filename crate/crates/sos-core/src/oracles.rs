//! Slow, independent reference computations used to check certificate
//! soundness: exact max clique by branch and bound, exhaustive XOR optimum.
//! These share no code with the certificate implementations they audit.

use crate::tensors::{GraphInstance, XorInstance};

/// Exact maximum clique size by bitset branch-and-bound with greedy coloring
/// bounds. Intended for n ≤ ~32; cost grows exponentially beyond desk scale.
pub fn max_clique_exact(g: &GraphInstance) -> usize {
    let n = g.n;
    assert!(n <= 64, "brute-force clique oracle capped at n = 64");
    let mut adj = vec![0u64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if g.has_edge(i, j) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    let mut best = 0usize;
    let all: u64 = if n == 64 { !0 } else { (1u64 << n) - 1 };
    expand(&adj, all, 0, &mut best);
    best
}

fn expand(adj: &[u64], mut cand: u64, size: usize, best: &mut usize) {
    if size > *best {
        *best = size;
    }
    while cand != 0 {
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        cand &= !(1u64 << v);
        expand(adj, cand & adj[v], size + 1, best);
    }
}

/// Exact maximum satisfiable fraction over all 2ⁿ assignments.
pub fn xor_optimum_exact(inst: &XorInstance) -> f64 {
    let n = inst.n;
    assert!(n <= 24, "exhaustive xor oracle capped at n = 24");
    let m = inst.constraints.len() as f64;
    let mut best_gap = i64::MIN;
    for bits in 0u64..(1 << n) {
        let mut gap = 0i64;
        for c in &inst.constraints {
            let mut parity = 0u32;
            for &v in &c.vars {
                parity ^= ((bits >> v) & 1) as u32;
            }
            // x_v = +1 for bit 0; product sign = (-1)^parity
            let prod: i64 = if parity == 0 { 1 } else { -1 };
            gap += prod * c.sign as i64;
        }
        if gap > best_gap {
            best_gap = gap;
        }
    }
    0.5 + best_gap as f64 / (2.0 * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::{gen_instance, Instance, InstanceKind, XorConstraint};

    fn complete_graph(n: usize) -> GraphInstance {
        GraphInstance { n, y: vec![1.0; GraphInstance::num_pairs(n)] }
    }

    #[test]
    fn clique_of_complete_graph() {
        assert_eq!(max_clique_exact(&complete_graph(7)), 7);
    }

    #[test]
    fn clique_of_empty_graph() {
        let g = GraphInstance { n: 6, y: vec![-1.0; GraphInstance::num_pairs(6)] };
        assert_eq!(max_clique_exact(&g), 1);
    }

    #[test]
    fn planted_clique_found() {
        let Instance::PlantedGraph { graph, clique } =
            gen_instance(&InstanceKind::PlantedClique { n: 22, k: 9 }, 5)
        else {
            panic!()
        };
        assert!(max_clique_exact(&graph) >= clique.len());
    }

    #[test]
    fn xor_single_constraint_satisfiable() {
        let inst = XorInstance {
            n: 5,
            constraints: vec![XorConstraint { vars: [0, 1, 2, 3], sign: -1 }],
        };
        assert_eq!(xor_optimum_exact(&inst), 1.0);
    }

    #[test]
    fn xor_contradictory_pair() {
        let inst = XorInstance {
            n: 4,
            constraints: vec![
                XorConstraint { vars: [0, 1, 2, 3], sign: 1 },
                XorConstraint { vars: [0, 1, 2, 3], sign: -1 },
            ],
        };
        assert_eq!(xor_optimum_exact(&inst), 0.5);
    }
}
