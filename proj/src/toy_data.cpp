#include "eigengan/toy_data.hpp"

#include "eigengan/pca.hpp"
#include "eigengan/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace eigengan {

std::string to_string(LatentDist d) { return d == LatentDist::Normal ? "normal" : "uniform"; }

LatentDist parse_latent_dist(std::string_view name) {
    if (name == "normal") return LatentDist::Normal;
    if (name == "uniform") return LatentDist::Uniform;
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "' (expected normal|uniform)");
}

ToyDataset make_dataset(std::size_t ambient, std::size_t rank, std::size_t n, LatentDist dist, std::uint64_t seed) {
    if (rank == 0 || rank > ambient)
        throw ContractError("make_dataset: need 0 < rank <= ambient, got rank=" + std::to_string(rank) +
                            " ambient=" + std::to_string(ambient));
    if (n < 2 || n < 10 * rank)
        throw ContractError("make_dataset: need n >= max(2, 10*rank), got n=" + std::to_string(n));

    Rng rng(seed);
    ToyDataset ds;
    ds.dist = dist;
    ds.rank = rank;
    ds.ambient = ambient;
    for (;;) {
        ds.transform = rng.normal_matrix(ambient, rank);
        const EigenDecomposition gram = sym_eig(matmul(ds.transform.transposed(), ds.transform));
        if (std::sqrt(std::max(0.0, gram.eigenvalues.back())) >= 1e-6) break;
    }
    ds.translation = rng.normal_matrix(1, ambient);
    const Matrix latent = dist == LatentDist::Normal ? rng.normal_matrix(n, rank) : rng.uniform_matrix(n, rank);
    ds.samples = matmul(latent, ds.transform.transposed());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < ambient; ++c) ds.samples(r, c) += ds.translation[c];
    return ds;
}

}  // namespace eigengan
