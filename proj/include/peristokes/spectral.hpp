#pragma once

#include <Eigen/Dense>

namespace peristokes {

/// Spectral differentiation matrix for 2*pi-periodic data on the uniform
/// grid t_j = 2*pi*j/M (M even): (D f)_j approximates f'(t_j).
Eigen::MatrixXd trig_diff_matrix(int M);

/// Circulant weights R_k for the Kress quadrature of log-singular periodic
/// integrals: int_0^{2pi} f(tau) log(4 sin^2((t_i-tau)/2)) dtau
/// ~= sum_j R_{|i-j| mod M} f(t_j). M must be even.
Eigen::VectorXd kress_log_weights(int M);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b,
                    Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace peristokes
