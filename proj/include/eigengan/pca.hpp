#pragma once

#include "eigengan/matrix.hpp"

#include <stdexcept>
#include <vector>

namespace eigengan {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // column j pairs with eigenvalues[j]
    std::size_t sweeps = 0;
};

/// Raised by ppca_mle when the q-th eigenvalue does not exceed the noise variance.
class DegenerateSpectrum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-wise sample mean, 1×d.
Matrix column_means(const Matrix& data);

/// (1/n)·Σ (x_i − x̄)(x_i − x̄)ᵀ over rows; n ≥ 2.
Matrix covariance(const Matrix& data);

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below
/// 1e-12 or 100 sweeps have run. Eigenpairs sorted descending; each
/// eigenvector's largest-magnitude entry is made positive.
EigenDecomposition sym_eig(const Matrix& s);

/// Top-q eigenvectors of covariance(data), d×q.
Matrix pca_basis(const Matrix& data, std::size_t q);

struct PpcaSolution {
    Matrix basis;       // d×q
    Matrix importance;  // 1×q
    Matrix mean;        // 1×d
    double sigma = 0.0;
};

/// Closed-form maximum-likelihood linear model: U = top-q eigenvectors,
/// sigma² = mean of the trailing eigenvalues, L_j = sqrt(λ_j − sigma²).
PpcaSolution ppca_mle(const Matrix& data, std::size_t q);
PpcaSolution ppca_from_moments(const Matrix& mean, const Matrix& covariance, std::size_t q);

/// U·diag(L²)·Uᵀ + sigma²·I.
Matrix model_covariance(const Matrix& basis, const Matrix& importance, double sigma);

}  // namespace eigengan
