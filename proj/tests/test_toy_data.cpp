#include "eigengan/toy_data.hpp"

#include "eigengan/pca.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace eigengan;

TEST(ToyData, NormalMeanApproachesTranslation) {
    const ToyDataset ds = make_dataset(8, 3, 100000, LatentDist::Normal, 1);
    const Matrix diff = column_means(ds.samples) - ds.translation;
    EXPECT_LT(frobenius_norm(diff), 0.1 * frobenius_norm(ds.translation) + 0.1);
    EXPECT_EQ(ds.dist, LatentDist::Normal);
    EXPECT_EQ(ds.rank, 3u);
    EXPECT_EQ(ds.ambient, 8u);
}

TEST(ToyData, UniformMeanApproachesHalfShift) {
    const ToyDataset ds = make_dataset(8, 3, 100000, LatentDist::Uniform, 2);
    Matrix expected = ds.translation;
    for (std::size_t d = 0; d < 8; ++d)
        for (std::size_t r = 0; r < 3; ++r) expected[d] += 0.5 * ds.transform(d, r);
    EXPECT_LT(frobenius_norm(column_means(ds.samples) - expected), 0.1 * frobenius_norm(expected) + 0.1);
}

TEST(ToyData, CovarianceHasTheRequestedRank) {
    const ToyDataset ds = make_dataset(32, 5, 10000, LatentDist::Normal, 3);
    const auto eig = sym_eig(covariance(ds.samples)).eigenvalues;
    EXPECT_LT(eig[5] / eig[0], 1e-6);
    EXPECT_GT(eig[4] / eig[0], 1e-3);
}

TEST(ToyData, CenteredSamplesLieInTheColumnSpace) {
    for (LatentDist dist : {LatentDist::Normal, LatentDist::Uniform}) {
        const ToyDataset ds = make_dataset(12, 4, 200, dist, 4);
        // Projector onto col(A) via an orthonormal basis of AᵀA's eigenvectors mapped through A.
        const Matrix a = ds.transform;
        const EigenDecomposition e = sym_eig(matmul(a.transposed(), a));
        Matrix q = matmul(a, e.eigenvectors);
        for (std::size_t c = 0; c < q.cols(); ++c) {
            const double s = 1.0 / std::sqrt(e.eigenvalues[c]);
            for (std::size_t r = 0; r < q.rows(); ++r) q(r, c) *= s;
        }
        for (std::size_t n = 0; n < ds.samples.rows(); ++n) {
            Matrix y(12, 1);
            for (std::size_t d = 0; d < 12; ++d) y[d] = ds.samples(n, d) - ds.translation[d];
            const Matrix residual = y - matmul(q, matmul(q.transposed(), y));
            EXPECT_LT(frobenius_norm(residual), 1e-8);
        }
    }
}

TEST(ToyData, SameSeedSameBytes) {
    const ToyDataset a = make_dataset(10, 4, 100, LatentDist::Uniform, 5);
    const ToyDataset b = make_dataset(10, 4, 100, LatentDist::Uniform, 5);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.transform, b.transform);
    EXPECT_NE(a.samples, make_dataset(10, 4, 100, LatentDist::Uniform, 6).samples);
}

TEST(ToyData, Errors) {
    EXPECT_THROW(make_dataset(3, 4, 100, LatentDist::Normal, 0), ContractError);
    EXPECT_THROW(make_dataset(3, 0, 100, LatentDist::Normal, 0), ContractError);
    EXPECT_THROW(make_dataset(8, 5, 49, LatentDist::Normal, 0), ContractError);
    EXPECT_NO_THROW(make_dataset(8, 5, 50, LatentDist::Normal, 0));
}

TEST(ToyData, DistributionNames) {
    EXPECT_EQ(parse_latent_dist("normal"), LatentDist::Normal);
    EXPECT_EQ(parse_latent_dist(to_string(LatentDist::Uniform)), LatentDist::Uniform);
    EXPECT_THROW(parse_latent_dist("gamma"), std::invalid_argument);
}
