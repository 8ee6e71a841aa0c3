#include "eigengan/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eigengan {

namespace {

constexpr double kOffDiagonalTolerance = 1e-12;
constexpr std::size_t kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
}

void require_symmetric(const Matrix& s) {
    if (s.rows() != s.cols()) throw ShapeError("sym_eig: matrix is " + s.shape_string());
    double scale = 1.0;
    for (double v : s.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale)
                throw ContractError("sym_eig: input is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
}

}  // namespace

Matrix column_means(const Matrix& data) {
    if (data.rows() == 0) throw ContractError("column_means: no rows");
    Matrix mean(1, data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r)
        for (std::size_t c = 0; c < data.cols(); ++c) mean[c] += data(r, c);
    for (double& v : mean.data()) v /= static_cast<double>(data.rows());
    return mean;
}

Matrix covariance(const Matrix& data) {
    if (data.rows() < 2) throw ContractError("covariance: need at least 2 samples");
    // Shift by the first row before centring; identical rows then give exact zeros.
    Matrix centered = data;
    for (std::size_t r = 0; r < centered.rows(); ++r)
        for (std::size_t c = 0; c < centered.cols(); ++c) centered(r, c) -= data(0, c);
    const Matrix mean = column_means(centered);
    for (std::size_t r = 0; r < centered.rows(); ++r)
        for (std::size_t c = 0; c < centered.cols(); ++c) centered(r, c) -= mean[c];
    Matrix cov = matmul(centered.transposed(), centered);
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (double& v : cov.data()) v *= inv_n;
    // Exact symmetry; the product is symmetric up to summation order only.
    for (std::size_t i = 0; i < cov.rows(); ++i)
        for (std::size_t j = i + 1; j < cov.cols(); ++j) cov(j, i) = cov(i, j);
    return cov;
}

EigenDecomposition sym_eig(const Matrix& s) {
    require_symmetric(s);
    const std::size_t n = s.rows();
    Matrix a = s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j) = 0.5 * (s(i, j) + s(j, i));
    Matrix v = Matrix::identity(n);

    std::size_t sweep = 0;
    while (sweep < kMaxSweeps && off_diagonal_norm(a) > kOffDiagonalTolerance) {
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a(p, q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.sweeps = sweep;
    out.eigenvectors = Matrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        out.eigenvalues.push_back(a(src, src));
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(v(k, src)) > std::abs(v(arg, src))) arg = k;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, col) = sign * v(k, src);
    }
    return out;
}

Matrix pca_basis(const Matrix& data, std::size_t q) {
    if (q > data.cols())
        throw ContractError("pca_basis: q=" + std::to_string(q) + " exceeds d=" + std::to_string(data.cols()));
    const EigenDecomposition eig = sym_eig(covariance(data));
    Matrix basis(data.cols(), q);
    for (std::size_t r = 0; r < data.cols(); ++r)
        for (std::size_t c = 0; c < q; ++c) basis(r, c) = eig.eigenvectors(r, c);
    return basis;
}

PpcaSolution ppca_from_moments(const Matrix& mean, const Matrix& cov, std::size_t q) {
    const std::size_t d = cov.rows();
    if (q == 0 || q >= d) throw ContractError("ppca_mle: need 0 < q < d");
    if (mean.size() != d) throw ShapeError("ppca_mle: mean does not match covariance");
    const EigenDecomposition eig = sym_eig(cov);
    double tail = 0.0;
    for (std::size_t j = q; j < d; ++j) tail += eig.eigenvalues[j];
    const double noise_var = tail / static_cast<double>(d - q);
    if (!(eig.eigenvalues[q - 1] > noise_var))
        throw DegenerateSpectrum("ppca_mle: eigenvalue " + std::to_string(q) + " does not exceed noise variance");

    PpcaSolution out;
    out.basis = Matrix(d, q);
    out.importance = Matrix(1, q);
    for (std::size_t c = 0; c < q; ++c) {
        out.importance[c] = std::sqrt(eig.eigenvalues[c] - noise_var);
        for (std::size_t r = 0; r < d; ++r) out.basis(r, c) = eig.eigenvectors(r, c);
    }
    out.mean = Matrix(1, d, std::vector<double>(mean.data().begin(), mean.data().end()));
    out.sigma = std::sqrt(noise_var);
    return out;
}

PpcaSolution ppca_mle(const Matrix& data, std::size_t q) {
    return ppca_from_moments(column_means(data), covariance(data), q);
}

Matrix model_covariance(const Matrix& basis, const Matrix& importance, double sigma) {
    Matrix scaled = basis;
    for (std::size_t r = 0; r < scaled.rows(); ++r)
        for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= importance[c];
    Matrix cov = matmul(scaled, scaled.transposed());
    for (std::size_t i = 0; i < cov.rows(); ++i) cov(i, i) += sigma * sigma;
    return cov;
}

}  // namespace eigengan
