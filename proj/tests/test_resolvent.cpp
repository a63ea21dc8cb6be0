#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <random>

#include "wignerlab/error.hpp"
#include "wignerlab/resolvent.hpp"

using namespace wignerlab;

namespace {

HermitianMatrix gue(std::size_t n, std::uint64_t seed) { return normalize(sampleWigner(gueEnsemble(), n, SeedStream{seed, 0})); }

HermitianMatrix normalizedFrom(const ComplexMatrix& m) { return HermitianMatrix(m, MatrixScale::Normalized); }

// Spectral-decomposition oracle, independent of the LU route.
ComplexMatrix resolventOracle(const HermitianMatrix& W, std::complex<double> z) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(W.entries());
    const Eigen::VectorXcd d = (es.eigenvalues().cast<Complex>().array() - z).inverse();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// Dense Neumann-series oracle: tr(R0 (V R0)^j) with explicit matrix products.
Complex neumannTrace(const ComplexMatrix& R0, const ComplexMatrix& V, int j) {
    ComplexMatrix prod = R0;
    for (int k = 0; k < j; ++k) prod = prod * V * R0;
    return prod.trace();
}

}  // namespace

TEST_CASE("resolvent of simple matrices") {
    const auto zero = normalizedFrom(ComplexMatrix::Zero(2, 2));
    const auto R = resolvent(zero, ComplexEnergy(0.0, 1.0));
    CHECK(std::abs(R(0, 0) - Complex(0, 1)) < 1e-15);
    CHECK(std::abs(R(0, 1)) == 0.0);
    CHECK(coeffNorm(R) == doctest::Approx(1.0));

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    const auto Rd = resolvent(normalizedFrom(d), ComplexEnergy(0.0, 2.0));
    CHECK(std::abs(Rd(0, 0) - 1.0 / Complex(1, -2)) < 1e-15);
    CHECK(std::abs(Rd(1, 1) - 1.0 / Complex(-1, -2)) < 1e-15);
}

TEST_CASE("resolvent agrees with the spectral oracle") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto W = gue(16, seed);
        const ComplexEnergy z(0.3 * static_cast<double>(seed) - 0.5, 0.1);
        const auto R = resolvent(W, z);
        CHECK((R.entries() - resolventOracle(W, z.z())).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(R.trace() / 16.0 - stieltjesEmpirical(eigenvalues(W), z)) < 1e-10);
        CHECK(R.definingResidual() < 1e-12);
        CHECK(coeffNorm(R) >= std::abs(R.trace()) / 16.0);
        CHECK(conjugateSymmetryResidual(W, z) < 1e-12);

        const ResolventFactor F(W, z);
        CHECK(std::abs(F.trace() - R.trace()) < 1e-12);
        CHECK(std::abs(F.entry(3, 7) - R(3, 7)) < 1e-13);
    }
    const auto W = gue(200, 77);
    CHECK(coeffNorm(resolvent(W, ComplexEnergy(0.0, 0.1))) <= 10.0);
}

TEST_CASE("minors and interlacing") {
    const auto W = gue(5, 2);
    const std::size_t allButOne[] = {0, 1, 3, 4};
    const auto one = minor(W, allButOne);
    REQUIRE(one.dim() == 1);
    CHECK(one(0, 0) == W(2, 2));
    CHECK_THROWS_AS(minor(W, std::span<const std::size_t>{}), Error);
    const std::size_t everything[] = {0, 1, 2, 3, 4};
    CHECK_THROWS_AS(minor(W, everything), Error);
    const std::size_t outside[] = {5};
    CHECK_THROWS_AS(minor(W, outside), Error);

    CHECK(checkInterlacing(Spectrum::fromValues({0.0, 1.0}), Spectrum::fromValues({0.5})).holds);
    const auto bad = checkInterlacing(Spectrum::fromValues({0.0, 1.0}), Spectrum::fromValues({2.0}));
    CHECK_FALSE(bad.holds);
    CHECK(bad.maxViolation == doctest::Approx(1.0));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto big = gue(50, 100 + seed);
        const std::size_t last[] = {49};
        CHECK(checkInterlacing(eigenvalues(big), eigenvalues(minor(big, last))).holds);
    }
}

TEST_CASE("Schur complement identities") {
    ComplexMatrix one(1, 1);
    one(0, 0) = 0.7;
    CHECK(schurDiagonal(normalizedFrom(one), ComplexEnergy(0.1, 0.2), 0) == 0.0);

    ComplexMatrix diag = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) diag(i, i) = 0.3 * i - 0.5;
    const auto D = normalizedFrom(diag);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(schurDiagonal(D, ComplexEnergy(0.2, 0.1), i) < 1e-12);
        CHECK(schurOffDiagonal(D, ComplexEnergy(0.2, 0.1), i, (i + 1) % 4) == 0.0);
    }

    const auto W = gue(30, 12);
    const ComplexEnergy z(0.3, 0.05);
    for (std::size_t i = 0; i < 30; i += 7) {
        CHECK(schurDiagonal(W, z, i) <= 1e-9);
        CHECK(schurOffDiagonal(W, z, i, (i + 11) % 30) <= 1e-9);
    }
    CHECK_THROWS_AS(schurOffDiagonal(W, z, 3, 3), Error);

    // 2x2 closed form: R12 = w / (|w|^2 - z^2) for W = [[0, w], [conj w, 0]].
    const Complex w(0.4, -0.3);
    ComplexMatrix two(2, 2);
    two << 0.0, w, std::conj(w), 0.0;
    const ComplexEnergy zi(0.0, 1.0);
    const auto R2 = resolvent(normalizedFrom(two), zi);
    CHECK(std::abs(R2(0, 1) - w / (std::norm(w) - zi.z() * zi.z())) < 1e-14);
    CHECK(schurOffDiagonal(normalizedFrom(two), zi, 0, 1) < 1e-14);
}

TEST_CASE("elementary matrices") {
    for (const auto& V : {ElementaryMatrix::diagonal(1), ElementaryMatrix::symmetricPair(0, 2),
                          ElementaryMatrix::antisymmetricPair(2, 0)}) {
        const ComplexMatrix d = V.dense(4);
        CHECK(d == d.adjoint());
        const double tr2 = (d * d).trace().real();
        CHECK(tr2 == (V.form() == ElementaryMatrix::Form::Diagonal ? 1.0 : 2.0));
        CHECK(d.cwiseAbs().maxCoeff() == 1.0);
    }
    CHECK_THROWS_AS(ElementaryMatrix::symmetricPair(1, 1), Error);
}

TEST_CASE("perturbation series") {
    const auto M0 = gue(20, 5);
    const ComplexEnergy z(0.3, 0.5);
    const auto V = ElementaryMatrix::symmetricPair(1, 2);

    const auto zeroT = perturbSeries(M0, V, 0.0, z, 3);
    CHECK(zeroT.error < 1e-15);
    const auto zeroM = perturbSeries(M0, V, 0.2, z, 0);
    CHECK(zeroM.error == doctest::Approx(std::abs(zeroM.exact - resolvent(M0, z).trace() / 20.0)).epsilon(1e-12));

    const auto coarse = perturbSeries(M0, V, 0.1, z, 3);
    const auto fine = perturbSeries(M0, V, 0.05, z, 3);
    CHECK(coarse.error / fine.error >= 11.0);

    // Coefficients against a dense Neumann oracle for every form.
    const ComplexMatrix R0 = resolventOracle(M0, z.z());
    for (const auto& E : {ElementaryMatrix::diagonal(4), V, ElementaryMatrix::antisymmetricPair(7, 3)}) {
        const auto s = perturbSeries(M0, E, 0.1, z, 5);
        REQUIRE(s.coefficients.size() == 5);
        for (int j = 1; j <= 5; ++j) {
            const Complex oracle = std::pow(-1.0, j) * std::pow(20.0, 0.5 * j - 1.0) * neumannTrace(R0, E.dense(20), j);
            CHECK(std::abs(s.coefficients[j - 1] - oracle) < 1e-10 * (1.0 + std::abs(oracle)));
        }
    }
    CHECK_THROWS_AS(perturbSeries(M0, V, 0.1, z, 7), Error);
}

TEST_CASE("perturbation coefficients obey the resolvent-norm bound") {
    // Applied to the t-Taylor coefficients n^{-j/2} c_j of s_t.
    const double n = 20.0;
    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        Rng rng(SeedStream{31, inst});
        const auto M0 = normalize(sampleWigner(gueEnsemble(), 20, rng));
        const auto a = static_cast<std::size_t>(rng.bits() % 20);
        const auto b = (a + 1 + static_cast<std::size_t>(rng.bits() % 19)) % 20;
        const ComplexEnergy z(-1.5 + 3.0 * rng.uniform(), 0.05 + 0.45 * rng.uniform());
        const double norm = coeffNorm(resolvent(M0, z));
        const auto series = perturbSeries(M0, ElementaryMatrix::symmetricPair(a, b), 0.1, z, 3);
        for (int j = 1; j <= 3; ++j) {
            const double taylor = std::pow(n, -0.5 * j) * std::abs(series.coefficients[j - 1]);
            CHECK(taylor <= 2.0 * std::pow(norm, j) * std::min(norm, 1.0 / (n * z.eta())));
        }
    }
}

TEST_CASE("quadratic form statistic") {
    ComplexVector X(4);
    X << Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1);
    const auto s = quadraticFormStat(X, ComplexMatrix::Identity(4, 4), 1.0);
    CHECK(s.modulus == 0.0);
    CHECK_THROWS_AS(quadraticFormStat(X, ComplexMatrix::Zero(4, 4), 1.0), Error);
    CHECK_THROWS_AS(quadraticFormStat(X, ComplexMatrix::Identity(3, 3), 1.0), Error);

    Rng rng(SeedStream{8, 0});
    const std::size_t n = 200;
    int exceed = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        ComplexVector g(n);
        for (std::size_t i = 0; i < n; ++i) g(i) = Complex(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
        exceed += quadraticFormStat(g, ComplexMatrix::Identity(n, n), 1.0).modulus >= 5.0;
    }
    CHECK(exceed <= 10);
}

TEST_CASE("subspace projection norm") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    ComplexMatrix g(10, 3);
    for (Eigen::Index r = 0; r < 10; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) g(r, c) = Complex(nd(gen), nd(gen));
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    const ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(10, 10);
    const ComplexMatrix basis = Q.leftCols(3);

    const ComplexVector inside = basis * Eigen::Vector3cd(Complex(1, 2), Complex(-0.5, 0), Complex(0, 3));
    CHECK(std::abs(subspaceProjectionNorm(inside, basis) - inside.squaredNorm()) < 1e-10);
    const ComplexVector orthogonal = Q.col(5) * Complex(2, -1);
    CHECK(subspaceProjectionNorm(orthogonal, basis) < 1e-10);
    CHECK_THROWS_AS(subspaceProjectionNorm(inside, 2.0 * basis), Error);
}

TEST_CASE("local law residual") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto W = gue(60, seed);
        const ComplexEnergy z(0.5, 0.2);
        const auto r = localLawResidual(W, z);
        const auto a = statA(eigenvalues(W), z);
        CHECK(std::abs(r.stieltjesGap - a.modulus / (60.0 * 0.2)) < 1e-12);
        CHECK(r.stieltjesGap <= r.diagonalGap + 1e-12);
    }
    int within = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        within += localLawResidual(gue(400, 500 + seed), ComplexEnergy(0.0, 20.0 / 400.0)).stieltjesGap <= 0.2;
    CHECK(within >= 9);
}

TEST_CASE("crude count ratio") {
    const auto s = Spectrum::fromValues({-1.5, -0.5, 0.5, 1.5});
    CHECK(crudeCountRatio(s, Interval::closed(-2.0, 2.0)) == 0.25);
    CHECK(crudeCountRatio(s, Interval::closed(-0.4, 0.4)) == 0.0);
    CHECK_THROWS_AS(crudeCountRatio(s, Interval::below(0.0)), Error);
    CHECK_THROWS_AS(crudeCountRatio(s, Interval::closed(1.0, 1.0)), Error);

    const std::size_t n = 500;
    const auto g = eigenvalues(gue(n, 9), {false, ResidualKind::TraceMoments});
    const double width = 20.0 / static_cast<double>(n);
    double worst = 0.0;
    for (double lo = -1.8; lo + width <= 1.8; lo += width / 2.0)
        worst = std::max(worst, crudeCountRatio(g, Interval::halfOpen(lo, lo + width)));
    CHECK(worst <= 2.0);
}
