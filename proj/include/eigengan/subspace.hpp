#pragma once

#include "eigengan/autodiff.hpp"
#include "eigengan/matrix.hpp"
#include "eigengan/rng.hpp"

#include <span>
#include <vector>

namespace eigengan {

/// One layer's linear subspace: orthonormal basis U (d×q), importance
/// values L (1×q, the diagonal of the scaling matrix) and origin mu (1×d).
struct SubspaceModel {
    Matrix basis;
    Matrix importance;
    Matrix origin;

    /// Basis from an orthonormalized Gaussian draw, unit importances, zero origin.
    static SubspaceModel initialize(std::size_t ambient, std::size_t q, Rng& rng);

    std::size_t ambient() const { return basis.rows(); }
    std::size_t dim() const { return basis.cols(); }
    /// Throws ShapeError if the three parts disagree.
    void validate() const;
};

/// Differentiable handles to a bound SubspaceModel.
struct SubspaceVars {
    ad::Var basis;
    ad::Var importance;
    ad::Var origin;
};

/// U·diag(L)·z + mu for a single coordinate vector z of length q.
std::vector<double> sample_point(const SubspaceModel& s, std::span<const double> z);

/// Batched form: rows of z (B×q) map to rows of the result (B×d).
ad::Var sample_points(const SubspaceVars& s, ad::Var z);

/// ||UᵀU − I||²_F.
double ortho_penalty(const Matrix& basis);
ad::Var ortho_penalty(ad::Var basis);

/// Indices 0..q-1 ordered by |l_j| descending, ties by lower index.
std::vector<std::size_t> importance_order(const SubspaceModel& s);

/// Modified Gram-Schmidt on the columns of `m` (rows ≥ cols, full column rank).
Matrix orthonormalize_columns(const Matrix& m);

}  // namespace eigengan
