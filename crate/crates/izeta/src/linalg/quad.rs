use crate::{Error, Result};
use std::f64::consts::PI;

/// Nodes and weights of the Gauss quadrature rule for the weight
/// sqrt(1 - x^2) on [-1, 1] (Chebyshev polynomials of the second kind).
///
/// Both are closed-form: node j is cos(j pi / (count+1)) and its weight is
/// (pi / (count+1)) sin^2(j pi / (count+1)), j = 1..=count. The rule
/// integrates polynomials up to degree 2*count - 1 exactly. Nodes come out
/// in descending order.
pub fn gauss_chebyshev2_nodes(count: usize) -> Result<Vec<(f64, f64)>> {
    if count == 0 {
        return Err(Error::InvalidParam("quadrature needs at least one node".into()));
    }
    let h = PI / (count as f64 + 1.0);
    Ok((1..=count)
        .map(|j| {
            let theta = j as f64 * h;
            let s = theta.sin();
            (theta.cos(), h * s * s)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_empty_rule() {
        assert!(gauss_chebyshev2_nodes(0).is_err());
    }

    #[test]
    fn single_node_rule() {
        let nodes = gauss_chebyshev2_nodes(1).unwrap();
        assert_eq!(nodes.len(), 1);
        assert!(nodes[0].0.abs() < 1e-16);
        assert_relative_eq!(nodes[0].1, PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn weights_sum_to_half_circle_area() {
        for count in [1, 2, 5, 16, 33, 128] {
            let total: f64 = gauss_chebyshev2_nodes(count)
                .unwrap()
                .iter()
                .map(|&(_, w)| w)
                .sum();
            assert_relative_eq!(total, PI / 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn nodes_descend_and_pair_symmetrically() {
        let nodes = gauss_chebyshev2_nodes(17).unwrap();
        for pair in nodes.windows(2) {
            assert!(pair[0].0 > pair[1].0);
        }
        for j in 0..nodes.len() {
            let k = nodes.len() - 1 - j;
            assert_relative_eq!(nodes[j].0, -nodes[k].0, epsilon = 1e-15);
            assert_relative_eq!(nodes[j].1, nodes[k].1, max_relative = 1e-13);
        }
    }

    // integral of x^{2m} sqrt(1-x^2) over [-1,1] = pi/2 * C(2m,m) / (4^m (m+1));
    // odd powers vanish
    fn monomial_integral(deg: u32) -> f64 {
        if deg % 2 == 1 {
            return 0.0;
        }
        let m = (deg / 2) as i32;
        let mut binom = 1.0f64;
        for i in 0..m {
            binom = binom * (2 * m - i) as f64 / (i + 1) as f64;
        }
        PI / 2.0 * binom / (4f64.powi(m) * (m + 1) as f64)
    }

    #[test]
    fn exact_on_monomials_up_to_degree_bound() {
        for count in [1usize, 2, 3, 5, 9] {
            let nodes = gauss_chebyshev2_nodes(count).unwrap();
            for deg in 0..=(2 * count - 1) as u32 {
                let quad: f64 = nodes.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                let exact = monomial_integral(deg);
                assert!(
                    (quad - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                    "degree {deg} at {count} nodes: {quad} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn first_nonexact_degree_errs() {
        // degree 2*count is the first the rule misses
        let count = 4;
        let nodes = gauss_chebyshev2_nodes(count).unwrap();
        let deg = 2 * count as u32;
        let quad: f64 = nodes.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
        assert!((quad - monomial_integral(deg)).abs() > 1e-6);
    }
}
