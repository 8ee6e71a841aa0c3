#pragma once

#include "eigengan/generators.hpp"
#include "eigengan/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace eigengan {

struct SimilarityResult {
    /// |cos| of each learned column (in the order given) with its matched reference column.
    std::vector<double> pair_cos;
    /// matching[a] = reference column paired with learned column a.
    std::vector<std::size_t> matching;
    double mean = 0.0;
};

/// Maximum-weight perfect matching on a square weight matrix; result[row] = column.
std::vector<std::size_t> hungarian_max(const Matrix& weights);

/// q×q matrix of |cos(learned_a, ref_b)|; zero-norm columns are a contract error.
Matrix abs_cosine_matrix(const Matrix& learned, const Matrix& ref);

/// Learned columns are ordered by |L| descending, then paired with the
/// reference by maximum-weight matching on |cos|.
SimilarityResult basis_similarity(const Matrix& learned_basis, const Matrix& learned_importance,
                                  const Matrix& ref_basis);

/// Diagnostic pairing: k-th most important learned column with reference column k.
SimilarityResult importance_order_similarity(const Matrix& learned_basis, const Matrix& learned_importance,
                                             const Matrix& ref_basis);

/// p(y=1|x) = logistic(k·(wᵀx + c)).
struct AttributePredictor {
    Matrix weight;  // 1×d
    double offset = 0.0;
    double sharpness = 1.0;

    void validate() const;
    /// One probability per row of x.
    std::vector<double> probability(const Matrix& x) const;
};

/// Natural-log binary entropy with 0·ln 0 = 0.
double binary_entropy(double p);

/// Fraction of H(Y) explained by a uniformly distributed discrete Z whose
/// bins have the given p(y=1|z). Exactly 0 when every bin agrees.
double entropy_coefficient_from_bins(std::span<const double> p_given_bin);

/// Bin centres of `bins` equal bins over [-range, range].
std::vector<double> bin_centers(std::size_t bins, double range = 4.5);

struct EntropyOptions {
    std::size_t bins = 100;
    std::size_t samples_per_bin = 1000;
    double range = 4.5;
    std::uint64_t seed = 0;
};

/// For every bin centre, fixes z_{layer,dim} and averages the predictor over
/// fresh draws of every other latent. Bin b draws from its own stream of `seed`.
template <GeneratorModel G>
double entropy_coefficient(const G& model, std::size_t layer, std::size_t dim, const AttributePredictor& pred,
                           const EntropyOptions& opts);

/// Per-bin probabilities behind entropy_coefficient.
template <GeneratorModel G>
std::vector<double> conditional_probabilities(const G& model, std::size_t layer, std::size_t dim,
                                              const AttributePredictor& pred, const EntropyOptions& opts);

struct VarianceAttribution {
    double var_z = 0.0;
    double var_eps = 0.0;
};

/// Output variance (trace of covariance over n draws) from varying every z
/// with eps held at a reference draw, and from varying eps with z held.
template <GeneratorModel G>
VarianceAttribution variance_attribution(const G& model, std::size_t n, std::uint64_t seed);

double trace(const Matrix& square);

}  // namespace eigengan
