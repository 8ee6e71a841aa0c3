#include "eigengan/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace eigengan;

namespace {

double brute_force_mean(const Matrix& w) {
    std::vector<std::size_t> perm(w.rows());
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += w(i, perm[i]);
        best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(w.rows());
}

Matrix permute_columns(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t c = 0; c < perm.size(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, perm[c]);
    return out;
}

// A linear model along one axis with negligible noise.
LinearEigenModel axis_model(std::size_t d, std::size_t q, double importance) {
    Rng rng(0);
    LinearEigenModel m = LinearEigenModel::create(d, q, rng);
    m.subspace.basis = Matrix(d, q);
    for (std::size_t j = 0; j < q; ++j) m.subspace.basis(j, j) = 1.0;
    m.subspace.importance = Matrix(1, q, importance);
    m.subspace.origin = Matrix(1, d);
    m.log_sigma = Matrix::scalar(-50.0);
    return m;
}

AttributePredictor axis_predictor(std::size_t d, double sharpness) {
    AttributePredictor p{Matrix(1, d), 0.0, sharpness};
    p.weight[0] = 1.0;
    return p;
}

}  // namespace

TEST(Hungarian, MatchesBruteForce) {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + t % 6;
        const Matrix w = rng.uniform_matrix(n, n);
        const auto match = hungarian_max(w);
        std::vector<std::size_t> sorted = match;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(sorted[i], i);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w(i, match[i]);
        EXPECT_NEAR(s / static_cast<double>(n), brute_force_mean(w), 1e-12);
    }
    EXPECT_THROW(hungarian_max(Matrix(2, 3)), ShapeError);
}

TEST(Similarity, IdentityAndNegation) {
    const Matrix ref{{1, 0}, {0, 1}, {0, 0}};
    const Matrix l{{2.0, 1.0}};
    EXPECT_DOUBLE_EQ(basis_similarity(ref, l, ref).mean, 1.0);
    EXPECT_DOUBLE_EQ(basis_similarity(-1.0 * ref, l, ref).mean, 1.0);
}

TEST(Similarity, PermutedAndRotatedColumns) {
    const Matrix ref = Matrix::identity(3);
    const double c = std::cos(M_PI / 3), s = std::sin(M_PI / 3);
    const Matrix learned{{0, 0, c}, {1, 0, s}, {0, 1, 0}};
    const Matrix l{{3.0, 2.0, 1.0}};
    const SimilarityResult r = basis_similarity(learned, l, ref);
    EXPECT_NEAR(r.mean, brute_force_mean(abs_cosine_matrix(learned, ref)), 1e-12);
    EXPECT_NEAR(r.mean, (1.0 + 1.0 + 0.5) / 3.0, 1e-12);
    EXPECT_EQ(r.matching, (std::vector<std::size_t>{1, 2, 0}));
    EXPECT_NEAR(r.pair_cos[2], 0.5, 1e-12);
}

TEST(Similarity, ColumnsAreOrderedByImportanceMagnitude) {
    const Matrix ref = Matrix::identity(2);
    const Matrix learned{{0, 1}, {1, 0}};
    const SimilarityResult r = basis_similarity(learned, Matrix{{0.5, -2.0}}, ref);
    EXPECT_EQ(r.matching, (std::vector<std::size_t>{0, 1}));
    const SimilarityResult d = importance_order_similarity(learned, Matrix{{0.5, -2.0}}, ref);
    EXPECT_DOUBLE_EQ(d.mean, 1.0);
    EXPECT_DOUBLE_EQ(importance_order_similarity(learned, Matrix{{2.0, 0.5}}, ref).mean, 0.0);
}

TEST(Similarity, InvariantToPermutationAndSign) {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const Matrix learned = rng.normal_matrix(6, 3);
        const Matrix ref = rng.normal_matrix(6, 3);
        const Matrix l = rng.uniform_matrix(1, 3);
        const double base = basis_similarity(learned, l, ref).mean;

        std::vector<std::size_t> perm{0, 1, 2};
        for (int k = 0; k < t % 6; ++k) std::next_permutation(perm.begin(), perm.end());
        const Matrix lp = permute_columns(l, perm);
        Matrix flipped = permute_columns(learned, perm);
        for (std::size_t r = 0; r < 6; ++r) flipped(r, t % 3) = -flipped(r, t % 3);
        EXPECT_EQ(basis_similarity(flipped, lp, ref).mean, base);
        EXPECT_EQ(basis_similarity(learned, l, permute_columns(-1.0 * ref, perm)).mean, base);
    }
}

TEST(Similarity, Errors) {
    EXPECT_THROW(basis_similarity(Matrix(3, 2), Matrix{{1, 1}}, Matrix::identity(3)), ShapeError);
    Matrix zero_col{{1, 0}, {0, 0}, {0, 0}};
    const Matrix ref{{1, 0}, {0, 1}, {0, 0}};
    EXPECT_THROW(basis_similarity(zero_col, Matrix{{1, 1}}, ref), ContractError);
    EXPECT_THROW(basis_similarity(ref, Matrix{{1, 1, 1}}, ref), ShapeError);
}

TEST(Entropy, FourBinsMatchDirectFormula) {
    const std::vector<double> p{0.1, 0.4, 0.6, 0.9};
    const auto h = [](double x) { return -x * std::log(x) - (1 - x) * std::log(1 - x); };
    double py = 0.0, cond = 0.0;
    for (double v : p) {
        py += v / 4;
        cond += h(v) / 4;
    }
    const double expected = (h(py) - cond) / h(py);
    EXPECT_NEAR(entropy_coefficient_from_bins(p), expected, 1e-10);
}

TEST(Entropy, IndependenceAndPerfectDependence) {
    EXPECT_EQ(entropy_coefficient_from_bins(std::vector<double>(10, 0.5)), 0.0);
    EXPECT_EQ(entropy_coefficient_from_bins(std::vector<double>(6, 0.3)), 0.0);
    EXPECT_NEAR(entropy_coefficient_from_bins(std::vector<double>{0, 0, 1, 1}), 1.0, 1e-10);
    EXPECT_EQ(entropy_coefficient_from_bins(std::vector<double>{1, 1, 1}), 0.0);

    const LinearEigenModel m = axis_model(3, 2, 1.0);
    EntropyOptions opts;
    opts.bins = 20;
    opts.samples_per_bin = 50;
    EXPECT_EQ(entropy_coefficient(m, 0, 0, AttributePredictor{Matrix(1, 3), 0.0, 1.0}, opts), 0.0);
    EXPECT_NEAR(entropy_coefficient(m, 0, 0, axis_predictor(3, 1e4), opts), 1.0, 1e-10);
}

TEST(Entropy, BinaryEntropyAndCenters) {
    EXPECT_EQ(binary_entropy(0.0), 0.0);
    EXPECT_EQ(binary_entropy(1.0), 0.0);
    EXPECT_NEAR(binary_entropy(0.5), std::log(2.0), 1e-15);
    EXPECT_EQ(bin_centers(1, 4.5), (std::vector<double>{0.0}));
    const auto c = bin_centers(4, 4.0);
    EXPECT_EQ(c, (std::vector<double>{-3.0, -1.0, 1.0, 3.0}));
}

TEST(Entropy, StaysInUnitIntervalAndGrowsWithSharpness) {
    LinearEigenModel m = axis_model(3, 2, 1.0);
    m.log_sigma = Matrix::scalar(std::log(0.5));
    EntropyOptions opts;
    opts.bins = 30;
    opts.samples_per_bin = 200;
    opts.seed = 3;
    double previous = -1.0;
    for (double k : {0.5, 2.0, 8.0}) {
        const double v = entropy_coefficient(m, 0, 0, axis_predictor(3, k), opts);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_GE(v, previous) << k;
        previous = v;
    }
    // An attribute along the other latent carries almost nothing about dim 0.
    AttributePredictor other = axis_predictor(3, 2.0);
    other.weight = Matrix{{0.0, 1.0, 0.0}};
    EXPECT_LT(entropy_coefficient(m, 0, 0, other, opts), 0.05);

    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const Matrix p = rng.uniform_matrix(1, 2 + t % 7);
        const double v = entropy_coefficient_from_bins(p.data());
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Entropy, SeedSpreadIsSmall) {
    LinearEigenModel m = axis_model(3, 2, 1.0);
    m.log_sigma = Matrix::scalar(std::log(0.5));
    const AttributePredictor pred = axis_predictor(3, 2.0);
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        EntropyOptions opts;
        opts.seed = seed;
        values.push_back(entropy_coefficient(m, 0, 0, pred, opts));
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / 10.0;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    EXPECT_LT(std::sqrt(var / 9.0), 0.02);
    EntropyOptions fixed;
    fixed.seed = 7;
    EXPECT_EQ(entropy_coefficient(m, 0, 0, pred, fixed), entropy_coefficient(m, 0, 0, pred, fixed));
}

TEST(Entropy, Errors) {
    const LinearEigenModel m = axis_model(3, 2, 1.0);
    EntropyOptions opts;
    opts.bins = 1;
    EXPECT_THROW(entropy_coefficient(m, 0, 0, axis_predictor(3, 1.0), opts), ContractError);
    opts.bins = 4;
    EXPECT_THROW(entropy_coefficient(m, 0, 2, axis_predictor(3, 1.0), opts), std::out_of_range);
    EXPECT_THROW(entropy_coefficient(m, 0, 0, axis_predictor(3, 0.0), opts), ContractError);
    EXPECT_THROW(entropy_coefficient(m, 0, 0, axis_predictor(4, 1.0), opts), ShapeError);
}

TEST(Variance, IgnoredNoiseContributesNothing) {
    Rng rng(5);
    LayeredConfig cfg;
    cfg.data_dim = 20;
    LayeredEigenModel m = LayeredEigenModel::create(cfg, rng);
    m.bottom_weight = Matrix(m.bottom_weight.rows(), m.bottom_weight.cols());
    const VarianceAttribution v = variance_attribution(m, 500, 6);
    EXPECT_EQ(v.var_eps, 0.0);
    EXPECT_GT(v.var_z, 0.0);
}

TEST(Variance, LinearModelWithoutNoiseMatchesImportanceSum) {
    Rng rng(7);
    LinearEigenModel m = LinearEigenModel::create(6, 3, rng);
    m.subspace.importance = Matrix{{2.0, 1.0, 0.5}};
    m.log_sigma = Matrix::scalar(-60.0);
    const VarianceAttribution v = variance_attribution(m, 20000, 8);
    const double expected = 4.0 + 1.0 + 0.25;
    // U is orthonormal at creation, so trace(U·diag(L²)·Uᵀ) = ΣL².
    EXPECT_NEAR(v.var_z, expected, 0.05 * expected);
    EXPECT_EQ(v.var_eps, 0.0);
    EXPECT_EQ(v.var_z, variance_attribution(m, 20000, 8).var_z);
    EXPECT_THROW(variance_attribution(m, 99, 0), ContractError);
}

TEST(Variance, TraceOfSquare) {
    EXPECT_EQ(trace(Matrix{{1, 2}, {3, 4}}), 5.0);
    EXPECT_THROW(trace(Matrix(2, 3)), ShapeError);
}
