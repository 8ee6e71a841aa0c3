#include "eigengan/metrics.hpp"

#include "eigengan/pca.hpp"
#include "eigengan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eigengan {

std::vector<std::size_t> hungarian_max(const Matrix& weights) {
    const std::size_t n = weights.rows();
    if (weights.cols() != n) throw ShapeError("hungarian_max: weight matrix must be square");
    if (n == 0) return {};
    // Shortest augmenting path on cost = −weight, 1-based potentials.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
    return assignment;
}

Matrix abs_cosine_matrix(const Matrix& learned, const Matrix& ref) {
    if (!learned.same_shape(ref))
        throw ShapeError("basis_similarity: learned " + learned.shape_string() + " vs reference " +
                         ref.shape_string());
    const std::size_t d = learned.rows(), q = learned.cols();
    auto norms = [&](const Matrix& m, const char* which) {
        std::vector<double> out(q);
        for (std::size_t c = 0; c < q; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += m(r, c) * m(r, c);
            if (!(acc > 0.0)) throw ContractError(std::string("basis_similarity: zero-norm ") + which + " column");
            out[c] = std::sqrt(acc);
        }
        return out;
    };
    const auto nl = norms(learned, "learned");
    const auto nr = norms(ref, "reference");
    Matrix cos(q, q);
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += learned(r, a) * ref(r, b);
            cos(a, b) = std::min(1.0, std::abs(acc) / (nl[a] * nr[b]));
        }
    return cos;
}

namespace {

Matrix by_importance(const Matrix& basis, const Matrix& importance) {
    if (importance.size() != basis.cols())
        throw ShapeError("basis_similarity: importance has " + std::to_string(importance.size()) +
                         " entries for " + std::to_string(basis.cols()) + " columns");
    std::vector<std::size_t> order(basis.cols());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(importance[i]) > std::abs(importance[j]); });
    Matrix out(basis.rows(), basis.cols());
    for (std::size_t c = 0; c < order.size(); ++c)
        for (std::size_t r = 0; r < basis.rows(); ++r) out(r, c) = basis(r, order[c]);
    return out;
}

SimilarityResult summarize(const Matrix& cos, std::vector<std::size_t> matching) {
    SimilarityResult out;
    out.matching = std::move(matching);
    for (std::size_t a = 0; a < out.matching.size(); ++a) out.pair_cos.push_back(cos(a, out.matching[a]));
    if (!out.pair_cos.empty())
        out.mean = std::accumulate(out.pair_cos.begin(), out.pair_cos.end(), 0.0) /
                   static_cast<double>(out.pair_cos.size());
    return out;
}

}  // namespace

SimilarityResult basis_similarity(const Matrix& learned_basis, const Matrix& learned_importance,
                                  const Matrix& ref_basis) {
    const Matrix cos = abs_cosine_matrix(by_importance(learned_basis, learned_importance), ref_basis);
    return summarize(cos, hungarian_max(cos));
}

SimilarityResult importance_order_similarity(const Matrix& learned_basis, const Matrix& learned_importance,
                                             const Matrix& ref_basis) {
    const Matrix cos = abs_cosine_matrix(by_importance(learned_basis, learned_importance), ref_basis);
    std::vector<std::size_t> identity(cos.rows());
    std::iota(identity.begin(), identity.end(), 0);
    return summarize(cos, std::move(identity));
}

void AttributePredictor::validate() const {
    if (!(sharpness > 0.0)) throw ContractError("AttributePredictor: sharpness must be positive");
    if (weight.rows() != 1) throw ShapeError("AttributePredictor: weight must be a row vector");
}

std::vector<double> AttributePredictor::probability(const Matrix& x) const {
    validate();
    if (x.cols() != weight.cols())
        throw ShapeError("AttributePredictor: input has " + std::to_string(x.cols()) + " columns, weight has " +
                         std::to_string(weight.cols()));
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double a = offset;
        for (std::size_t c = 0; c < x.cols(); ++c) a += weight[c] * x(r, c);
        const double t = sharpness * a;
        out[r] = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    }
    return out;
}

double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

double entropy_coefficient_from_bins(std::span<const double> p_given_bin) {
    if (p_given_bin.empty()) throw ContractError("entropy_coefficient: no bins");
    const auto [lo, hi] = std::minmax_element(p_given_bin.begin(), p_given_bin.end());
    if (*lo == *hi) return 0.0;
    const double n = static_cast<double>(p_given_bin.size());
    double p_y = 0.0, h_cond = 0.0;
    for (double p : p_given_bin) {
        p_y += p;
        h_cond += binary_entropy(p);
    }
    p_y /= n;
    h_cond /= n;
    const double h_y = binary_entropy(p_y);
    if (h_y < 1e-12) return 0.0;
    return std::clamp((h_y - h_cond) / h_y, 0.0, 1.0);
}

std::vector<double> bin_centers(std::size_t bins, double range) {
    if (bins < 1) throw ContractError("bin_centers: need at least one bin");
    const double width = 2.0 * range / static_cast<double>(bins);
    std::vector<double> out(bins);
    for (std::size_t b = 0; b < bins; ++b) out[b] = -range + (static_cast<double>(b) + 0.5) * width;
    return out;
}

template <GeneratorModel G>
std::vector<double> conditional_probabilities(const G& model, std::size_t layer, std::size_t dim,
                                              const AttributePredictor& pred, const EntropyOptions& opts) {
    if (opts.bins < 2) throw ContractError("entropy_coefficient: bins must be >= 2");
    if (opts.samples_per_bin < 1) throw ContractError("entropy_coefficient: samples_per_bin must be >= 1");
    pred.validate();
    const LatentShape shape = model.latent_shape();
    if (layer >= shape.z_dims.size() || dim >= shape.z_dims[layer])
        throw std::out_of_range("entropy_coefficient: no latent dimension (" + std::to_string(layer) + ", " +
                                std::to_string(dim) + ")");
    const auto centers = bin_centers(opts.bins, opts.range);
    std::vector<double> probs(opts.bins);
    for (std::size_t b = 0; b < opts.bins; ++b) {
        Rng z_rng = Rng::stream(opts.seed, {b, 0});
        Rng eps_rng = Rng::stream(opts.seed, {b, 1});
        LatentBatch latents = shape.sample(opts.samples_per_bin, z_rng, eps_rng);
        for (std::size_t r = 0; r < opts.samples_per_bin; ++r) latents.z[layer](r, dim) = centers[b];
        const auto p = pred.probability(model.forward(latents));
        probs[b] = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    }
    return probs;
}

template <GeneratorModel G>
double entropy_coefficient(const G& model, std::size_t layer, std::size_t dim, const AttributePredictor& pred,
                           const EntropyOptions& opts) {
    return entropy_coefficient_from_bins(conditional_probabilities(model, layer, dim, pred, opts));
}

double trace(const Matrix& square) {
    if (square.rows() != square.cols()) throw ShapeError("trace: matrix is " + square.shape_string());
    double t = 0.0;
    for (std::size_t i = 0; i < square.rows(); ++i) t += square(i, i);
    return t;
}

template <GeneratorModel G>
VarianceAttribution variance_attribution(const G& model, std::size_t n, std::uint64_t seed) {
    if (n < 100) throw ContractError("variance_attribution: need n >= 100");
    const LatentShape shape = model.latent_shape();
    Rng ref_z = Rng::stream(seed, {0, 0});
    Rng ref_eps = Rng::stream(seed, {0, 1});
    const LatentBatch reference = shape.sample(1, ref_z, ref_eps).tiled(n);

    Rng z_rng = Rng::stream(seed, {1, 0});
    Rng eps_rng = Rng::stream(seed, {1, 1});
    const LatentBatch fresh = shape.sample(n, z_rng, eps_rng);

    LatentBatch vary_z = reference;
    vary_z.z = fresh.z;
    LatentBatch vary_eps = reference;
    vary_eps.eps = fresh.eps;

    return {trace(covariance(model.forward(vary_z))), trace(covariance(model.forward(vary_eps)))};
}

template double entropy_coefficient(const LinearEigenModel&, std::size_t, std::size_t, const AttributePredictor&,
                                    const EntropyOptions&);
template double entropy_coefficient(const LayeredEigenModel&, std::size_t, std::size_t, const AttributePredictor&,
                                    const EntropyOptions&);
template std::vector<double> conditional_probabilities(const LinearEigenModel&, std::size_t, std::size_t,
                                                       const AttributePredictor&, const EntropyOptions&);
template std::vector<double> conditional_probabilities(const LayeredEigenModel&, std::size_t, std::size_t,
                                                       const AttributePredictor&, const EntropyOptions&);
template VarianceAttribution variance_attribution(const LinearEigenModel&, std::size_t, std::uint64_t);
template VarianceAttribution variance_attribution(const LayeredEigenModel&, std::size_t, std::uint64_t);

}  // namespace eigengan
