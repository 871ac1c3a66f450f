//! Clique-size certificate: `k ≤ 2·λmax(A − J/2) + 2`, where A is the 0/1
//! adjacency matrix (zero diagonal) and J the all-ones matrix, so the
//! certificate matrix carries −1/2 on the diagonal. Sound for every graph.

use nalgebra::{DMatrix, DVector};

use super::{digest_f64s, CertError, CertificateReport, Witness};
use crate::sdpsolve::sym_eigen_sorted;
use crate::tensors::GraphInstance;

fn centered_adjacency(g: &GraphInstance) -> DMatrix<f64> {
    let n = g.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = -0.5;
        for j in (i + 1)..n {
            let v = if g.has_edge(i, j) { 0.5 } else { -0.5 };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn clique_upper_bound(g: &GraphInstance) -> Result<CertificateReport, CertError> {
    let m = centered_adjacency(g);
    let (vals, vecs) = sym_eigen_sorted(m.clone())?;
    let top = vals.len() - 1;
    let lambda = vals[top];
    let v = vecs.column(top).into_owned();
    let residual = (&m * &v - lambda * &v).norm();
    Ok(CertificateReport {
        certified_bound: 2.0 * lambda + 2.0,
        method: "clique",
        witness: Witness { eigenvalue: lambda, eigenvector: v.iter().copied().collect(), residual },
        margins: vec![("lambda_max".into(), lambda), ("n".into(), g.n as f64)],
        instance_digest: digest_f64s(g.y.iter().copied()),
    })
}

/// Residuals of the degree-2 certificate identity on a clique-supported 0/1
/// vector: `(Σx)² = xᵀ(2A + 2Id − J)x` exactly, and the chained bound
/// `(Σx)² ≤ (Σx)·(2λmax + 2)` with nonnegative slack.
#[derive(Debug, Clone)]
pub struct CliqueIdentityReport {
    pub identity_residual: f64,
    pub bound_slack: f64,
    pub support_size: usize,
}

pub fn sos_identity_check_clique(
    g: &GraphInstance,
    x: &[f64],
) -> Result<CliqueIdentityReport, CertError> {
    let n = g.n;
    if x.len() != n {
        return Err(CertError::NotCliqueSupported { msg: format!("length {} != n = {n}", x.len()) });
    }
    let mut support = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        if v != 0.0 && v != 1.0 {
            return Err(CertError::NotCliqueSupported { msg: format!("x[{i}] = {v} not in {{0,1}}") });
        }
        if v == 1.0 {
            support.push(i);
        }
    }
    for (a, &i) in support.iter().enumerate() {
        for &j in support.iter().skip(a + 1) {
            if !g.has_edge(i, j) {
                return Err(CertError::NotCliqueSupported { msg: format!("pair ({i},{j}) is a non-edge") });
            }
        }
    }
    let s = support.len() as f64;
    let xv = DVector::from_column_slice(x);
    let a = g.adjacency();
    let quad = {
        let j_quad = xv.sum() * xv.sum();
        let a_quad = (xv.transpose() * &a * &xv)[(0, 0)];
        2.0 * a_quad + 2.0 * xv.norm_squared() - j_quad
    };
    let identity_residual = (s * s - quad).abs();
    let lambda = {
        let (vals, _) = sym_eigen_sorted(centered_adjacency(g))?;
        vals[vals.len() - 1]
    };
    let bound_slack = s * (2.0 * lambda + 2.0) - s * s;
    Ok(CliqueIdentityReport { identity_residual, bound_slack, support_size: support.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::max_clique_exact;
    use crate::tensors::{gen_instance, Instance, InstanceKind};

    fn complete_graph(n: usize) -> GraphInstance {
        GraphInstance { n, y: vec![1.0; GraphInstance::num_pairs(n)] }
    }

    fn empty_graph(n: usize) -> GraphInstance {
        GraphInstance { n, y: vec![-1.0; GraphInstance::num_pairs(n)] }
    }

    #[test]
    fn complete_graph_bound_is_tight() {
        for n in [3usize, 6, 11] {
            let rep = clique_upper_bound(&complete_graph(n)).unwrap();
            // λmax(J/2 − Id) = n/2 − 1, bound = n exactly
            assert!((rep.certified_bound - n as f64).abs() < 1e-9, "n={n}: {}", rep.certified_bound);
        }
    }

    #[test]
    fn empty_graph_bound_is_two() {
        let rep = clique_upper_bound(&empty_graph(9)).unwrap();
        // λmax(−J/2) = 0 (eigenvalues are −n/2 and 0), so the bound is 2 ≥ 1
        assert!((rep.certified_bound - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bound_sound_against_brute_force() {
        for seed in 0..10u64 {
            let Instance::Graph(g) = gen_instance(&InstanceKind::ErdosRenyiHalf { n: 18 }, seed) else { panic!() };
            let rep = clique_upper_bound(&g).unwrap();
            let exact = max_clique_exact(&g);
            assert!(
                rep.certified_bound >= exact as f64 - 1e-9,
                "seed {seed}: bound {} < clique {exact}",
                rep.certified_bound
            );
        }
    }

    #[test]
    fn random_graph_bound_scales_like_sqrt_n() {
        let n = 200;
        for seed in 0..20u64 {
            let Instance::Graph(g) = gen_instance(&InstanceKind::ErdosRenyiHalf { n }, seed) else { panic!() };
            let rep = clique_upper_bound(&g).unwrap();
            assert!(rep.certified_bound <= 4.0 * (n as f64).sqrt(), "seed {seed}: {}", rep.certified_bound);
        }
    }

    #[test]
    fn identity_on_triangle() {
        let g = complete_graph(3);
        let rep = sos_identity_check_clique(&g, &[1.0, 1.0, 1.0]).unwrap();
        assert!(rep.identity_residual <= 1e-9);
        assert!(rep.bound_slack >= -1e-9);
    }

    #[test]
    fn identity_on_planted_clique_indicator() {
        let Instance::PlantedGraph { graph, clique } =
            gen_instance(&InstanceKind::PlantedClique { n: 20, k: 6 }, 8)
        else {
            panic!()
        };
        let mut x = vec![0.0; 20];
        for &i in &clique {
            x[i] = 1.0;
        }
        let rep = sos_identity_check_clique(&graph, &x).unwrap();
        assert!(rep.identity_residual <= 1e-9, "residual {}", rep.identity_residual);
        assert!(rep.bound_slack >= -1e-9, "slack {}", rep.bound_slack);
        assert_eq!(rep.support_size, 6);
    }

    #[test]
    fn identity_single_vertex() {
        let Instance::Graph(g) = gen_instance(&InstanceKind::ErdosRenyiHalf { n: 12 }, 2) else { panic!() };
        let mut x = vec![0.0; 12];
        x[3] = 1.0;
        let rep = sos_identity_check_clique(&g, &x).unwrap();
        assert!(rep.identity_residual <= 1e-9);
        let lambda = clique_upper_bound(&g).unwrap().witness.eigenvalue;
        assert!((rep.bound_slack - (2.0 * lambda + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn identity_rejects_non_clique_support() {
        let g = empty_graph(5);
        let err = sos_identity_check_clique(&g, &[1.0, 1.0, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, CertError::NotCliqueSupported { .. }));
        let g2 = complete_graph(3);
        assert!(sos_identity_check_clique(&g2, &[0.5, 0.0, 0.0]).is_err());
    }
}
