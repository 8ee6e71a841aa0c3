#include "eigengan/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eigengan {

SubspaceModel SubspaceModel::initialize(std::size_t ambient, std::size_t q, Rng& rng) {
    if (q == 0 || q > ambient)
        throw ContractError("SubspaceModel: need 0 < q <= d, got q=" + std::to_string(q) +
                            " d=" + std::to_string(ambient));
    SubspaceModel s;
    s.basis = orthonormalize_columns(rng.normal_matrix(ambient, q));
    s.importance = Matrix::ones(1, q);
    s.origin = Matrix::zeros(1, ambient);
    return s;
}

void SubspaceModel::validate() const {
    if (basis.cols() > basis.rows()) throw ShapeError("SubspaceModel: q exceeds d");
    if (importance.rows() != 1 || importance.cols() != basis.cols())
        throw ShapeError("SubspaceModel: importance must be 1x" + std::to_string(basis.cols()));
    if (origin.rows() != 1 || origin.cols() != basis.rows())
        throw ShapeError("SubspaceModel: origin must be 1x" + std::to_string(basis.rows()));
}

std::vector<double> sample_point(const SubspaceModel& s, std::span<const double> z) {
    s.validate();
    if (z.size() != s.dim())
        throw ShapeError("sample_point: z has length " + std::to_string(z.size()) + ", expected " +
                         std::to_string(s.dim()));
    Matrix coords(s.dim(), 1);
    for (std::size_t j = 0; j < s.dim(); ++j) coords[j] = z[j] * s.importance[j];
    const Matrix phi = matmul(s.basis, coords);
    std::vector<double> out(s.ambient());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = phi[i] + s.origin[i];
    return out;
}

ad::Var sample_points(const SubspaceVars& s, ad::Var z) {
    if (z.cols() != s.basis.cols())
        throw ShapeError("sample_points: z is " + z.value().shape_string() + ", basis is " +
                         s.basis.value().shape_string());
    return ad::add(ad::matmul(ad::hadamard(z, s.importance), ad::transpose(s.basis)), s.origin);
}

double ortho_penalty(const Matrix& basis) {
    Matrix gram = matmul(basis.transposed(), basis);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
    return frobenius_squared(gram);
}

ad::Var ortho_penalty(ad::Var basis) {
    ad::Graph& g = basis.graph();
    const ad::Var eye = g.constant(Matrix::identity(basis.cols()));
    return ad::frobenius_squared(ad::sub(ad::matmul(ad::transpose(basis), basis), eye));
}

std::vector<std::size_t> importance_order(const SubspaceModel& s) {
    std::vector<std::size_t> order(s.importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(s.importance[a]) > std::abs(s.importance[b]);
    });
    return order;
}

Matrix orthonormalize_columns(const Matrix& m) {
    if (m.cols() > m.rows()) throw ShapeError("orthonormalize_columns: more columns than rows");
    Matrix q = m;
    for (std::size_t j = 0; j < q.cols(); ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < q.rows(); ++i) proj += q(i, k) * q(i, j);
            for (std::size_t i = 0; i < q.rows(); ++i) q(i, j) -= proj * q(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < q.rows(); ++i) norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw ContractError("orthonormalize_columns: rank-deficient input");
        for (std::size_t i = 0; i < q.rows(); ++i) q(i, j) /= norm;
    }
    return q;
}

}  // namespace eigengan
