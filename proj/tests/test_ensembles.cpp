#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/error.hpp"

using namespace wignerlab;

namespace {

template <class F>
ErrorCode codeOf(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

// Moments by enumeration of a symmetric two-point law or by Isserlis.
double gaussianMomentOracle(double var, int k) {
    if (k % 2) return 0.0;
    double r = 1.0;
    for (int j = k - 1; j > 0; j -= 2) r *= j;
    return r * std::pow(var, k / 2);
}

}  // namespace

TEST_CASE("atom moments") {
    CHECK(AtomDistribution::gaussian(0.5).moment(4) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(AtomDistribution::rademacher(1.0 / std::sqrt(2.0)).moment(3) == 0.0);
    CHECK(AtomDistribution::rademacher(1.0 / std::sqrt(2.0)).moment(2) == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 0; k <= kMaxMomentOrder; ++k)
        CHECK(AtomDistribution::gaussian(1.7).moment(k) == doctest::Approx(gaussianMomentOracle(1.7, k)));
    CHECK(AtomDistribution::zero().moment(0) == 1.0);
    CHECK(AtomDistribution::zero().moment(2) == 0.0);
    CHECK(codeOf([] { AtomDistribution::gaussian(1).moment(kMaxMomentOrder + 1); }) == ErrorCode::UnsupportedOrder);
    CHECK(momentOf(AtomDistribution::rademacher(2.0), 4) == doctest::Approx(16.0));

    const auto d = AtomDistribution::discrete({-2.0, 1.0}, {1.0 / 3.0, 2.0 / 3.0});
    CHECK(d.moment(1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d.moment(2) == doctest::Approx(4.0 / 3.0 + 2.0 / 3.0));
    CHECK(codeOf([] { AtomDistribution::discrete({0.0, 1.0}, {0.5, 0.5}); }) == ErrorCode::InvalidArguments);
    CHECK(codeOf([] { AtomDistribution::discrete({-1.0, 1.0}, {0.4, 0.4}); }) == ErrorCode::InvalidArguments);
}

TEST_CASE("matchOrder against a direct moment table") {
    const auto rad = AtomDistribution::rademacher(1.0 / std::sqrt(2.0));
    const auto gau = AtomDistribution::gaussian(0.5);
    CHECK(matchOrder(rad, gau, 6) == 3);
    CHECK(matchOrder(AtomDistribution::gaussian(1), AtomDistribution::gaussian(1), 8) == 8);
    CHECK(matchOrder(AtomDistribution::rademacher(1), AtomDistribution::gaussian(1), 6) == 3);
    CHECK(matchOrder(AtomDistribution::rademacher(1), AtomDistribution::gaussian(0.5), 6) == 1);

    // Oracle: first k where tabulated moments differ.
    auto oracle = [](double scale, double var) {
        for (int k = 1; k <= 6; ++k) {
            const double r = k % 2 ? 0.0 : std::pow(scale, k);
            if (std::abs(r - gaussianMomentOracle(var, k)) > 1e-12) return k - 1;
        }
        return 6;
    };
    CHECK(matchOrder(rad, gau, 6) == oracle(1.0 / std::sqrt(2.0), 0.5));
}

TEST_CASE("ensemble match orders versus GUE") {
    const auto cb = ensembleMatchOrderVsGUE(complexBernoulliEnsemble());
    CHECK(cb.offDiagonal == 3);
    CHECK(cb.diagonal == 3);
    const auto gue = ensembleMatchOrderVsGUE(gueEnsemble());
    CHECK(gue.offDiagonal == 6);
    CHECK(gue.diagonal == 6);
    const auto sb = ensembleMatchOrderVsGUE(symmetricBernoulliEnsemble());
    CHECK(sb.offDiagonal == 1);
    CHECK(sb.diagonal == 3);
}

TEST_CASE("builtin ensembles validate and round-trip through JSON") {
    for (const auto& name : builtinEnsembleNames()) {
        const auto spec = builtinEnsemble(name);
        CHECK_NOTHROW(spec.validate());
        const nlohmann::json j = spec;
        CHECK(j.get<EnsembleSpec>() == spec);
        CHECK(ensembleFromJson(nlohmann::json(name)) == spec);
    }
    CHECK(complexBernoulliEnsemble(true).offDiagReal.variance() == doctest::Approx(1.0));
    CHECK_FALSE(complexBernoulliEnsemble(true).unitOffDiagVariance);
    CHECK(codeOf([] { builtinEnsemble("wishart"); }) == ErrorCode::Config);

    EnsembleSpec bad = gueEnsemble();
    bad.offDiagReal = AtomDistribution::gaussian(2.0);
    CHECK(codeOf([&] { bad.validate(); }) == ErrorCode::Config);
}

TEST_CASE("sampling") {
    const auto one = sampleWigner(gueEnsemble(), 1, SeedStream{5, 0});
    CHECK(one.dim() == 1);
    CHECK(one(0, 0).imag() == 0.0);
    CHECK(one(0, 0).real() != 0.0);

    const auto sb = sampleWigner(symmetricBernoulliEnsemble(), 3, SeedStream{9, 1});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(sb(i, j).real()) == 1.0);
            CHECK(sb(i, j).imag() == 0.0);
        }

    const auto big = sampleWigner(gueEnsemble(), 200, SeedStream{11, 0});
    CHECK(big.isHermitian());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 200; ++j)
            if (i != j) {
                sum += std::norm(big(i, j));
                ++count;
            }
    CHECK(std::abs(sum / count - 1.0) < 0.1);

    const auto again = sampleWigner(gueEnsemble(), 200, SeedStream{11, 0});
    CHECK(again.entries() == big.entries());
    CHECK(codeOf([] { sampleWigner(gueEnsemble(), 0, SeedStream{}); }) == ErrorCode::InvalidDimension);

    const auto cb = sampleWigner(complexBernoulliEnsemble(), 6, SeedStream{3, 3});
    std::set<double> parts;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) {
            parts.insert(std::abs(cb(i, j).real()));
            parts.insert(std::abs(cb(i, j).imag()));
        }
    CHECK(parts.size() == 1);
    CHECK(*parts.begin() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("normalization") {
    ComplexMatrix m(1, 1);
    m(0, 0) = 3.0;
    CHECK(normalize(HermitianMatrix(m, MatrixScale::Raw))(0, 0) == Complex(3.0));

    ComplexMatrix four = ComplexMatrix::Constant(4, 4, Complex(2.0));
    const auto w = normalize(HermitianMatrix(four, MatrixScale::Raw));
    CHECK(w(1, 2) == Complex(1.0));
    CHECK(w.scale() == MatrixScale::Normalized);
    CHECK(codeOf([&] { normalize(w); }) == ErrorCode::InvalidState);
}

TEST_CASE("Hermitian storage is checked bitwise") {
    ComplexMatrix m(2, 2);
    m << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
    CHECK_NOTHROW(HermitianMatrix(m, MatrixScale::Raw));
    m(1, 0) = Complex(0, -1.0000000001);
    CHECK(codeOf([&] { HermitianMatrix(m, MatrixScale::Raw); }) == ErrorCode::NotHermitian);
    CHECK_FALSE(HermitianMatrix::adoptUnchecked(m, MatrixScale::Raw).isHermitian());
    m(1, 0) = Complex(0, -1);
    m(0, 0) = Complex(1, 1e-300);
    CHECK(codeOf([&] { HermitianMatrix(m, MatrixScale::Raw); }) == ErrorCode::NotHermitian);
}

TEST_CASE("condition C0 tail check") {
    const auto zero = checkConditionC0(AtomDistribution::zero(), 1.0, 2.0, 2000, SeedStream{1, 0});
    CHECK_FALSE(zero.anyFlagged);
    for (const auto& p : zero.points) CHECK(p.frequency == 0.0);

    const auto rad = checkConditionC0(AtomDistribution::rademacher(1), 1.0, 2.0, 2000, SeedStream{1, 1});
    for (const auto& p : rad.points) CHECK(p.frequency == 0.0);
    CHECK(rad.points.front().t == 2.0);
    CHECK(rad.points.size() == 41);

    const auto g = checkConditionC0(AtomDistribution::gaussian(1), 2.0, 2.0, 100000, SeedStream{1, 2});
    CHECK_FALSE(g.anyFlagged);
    CHECK(g.points[0].threshold == doctest::Approx(4.0));

    // A heavy atom breaks the bound at t = 2 with C = 1: P(|xi| >= 2) = 0.5 > e^-2.
    const auto heavy = AtomDistribution::discrete({-3.0, 0.0, 3.0}, {0.25, 0.5, 0.25});
    CHECK(checkConditionC0(heavy, 1.0, 2.0, 20000, SeedStream{1, 3}).anyFlagged);
    CHECK(codeOf([] { checkConditionC0(AtomDistribution::zero(), 1.0, 2.0, 10, SeedStream{}); }) ==
          ErrorCode::InvalidArguments);
}

TEST_CASE("atom quantiles invert the distribution") {
    const auto g = AtomDistribution::gaussian(0.5);
    CHECK(g.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    // Phi^{-1}(0.975) = 1.959963984540054
    CHECK(g.quantile(0.975) == doctest::Approx(1.959963984540054 * std::sqrt(0.5)).epsilon(1e-12));
    const auto r = AtomDistribution::rademacher(0.7);
    CHECK(r.quantile(0.3) == -0.7);
    CHECK(r.quantile(0.7) == 0.7);
}

TEST_CASE("matrix CSV holds re,im pairs") {
    ComplexMatrix m(2, 2);
    m << Complex(1, 0), Complex(0.5, 0.25), Complex(0.5, -0.25), Complex(-1, 0);
    std::ostringstream os;
    writeMatrixCsv(os, HermitianMatrix(m, MatrixScale::Raw));
    CHECK(os.str() == "1,0,0.5,0.25\n0.5,-0.25,-1,0\n");
}
