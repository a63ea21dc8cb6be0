#include "wignerlab/ensembles.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"

namespace wignerlab {

namespace {

constexpr double kMomentTolerance = 1e-12;

void checkOrder(int k) {
    if (k < 0) fail(ErrorCode::InvalidArguments, "moment order must be nonnegative");
    if (k > kMaxMomentOrder)
        fail(ErrorCode::UnsupportedOrder,
             "moment order " + std::to_string(k) + " exceeds " + std::to_string(kMaxMomentOrder));
}

double doubleFactorial(int k) {
    double r = 1.0;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
}

}  // namespace

AtomDistribution AtomDistribution::gaussian(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        fail(ErrorCode::InvalidArguments, "gaussian variance must be finite and positive");
    AtomDistribution a;
    a.kind_ = Kind::Gaussian;
    a.parameter_ = variance;
    return a;
}

AtomDistribution AtomDistribution::rademacher(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        fail(ErrorCode::InvalidArguments, "rademacher scale must be finite and positive");
    AtomDistribution a;
    a.kind_ = Kind::Rademacher;
    a.parameter_ = scale;
    return a;
}

AtomDistribution AtomDistribution::discrete(std::vector<double> points,
                                            std::vector<double> probabilities) {
    if (points.empty() || points.size() != probabilities.size())
        fail(ErrorCode::InvalidArguments, "discrete atom needs matching nonempty points/probabilities");
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(probabilities[i] >= 0.0) || !std::isfinite(points[i]))
            fail(ErrorCode::InvalidArguments, "discrete atom has a negative probability or bad point");
        total += probabilities[i];
        mean += probabilities[i] * points[i];
        second += probabilities[i] * points[i] * points[i];
    }
    if (std::abs(total - 1.0) > kMomentTolerance)
        fail(ErrorCode::InvalidArguments, "discrete probabilities must sum to one");
    if (std::abs(mean) > kMomentTolerance)
        fail(ErrorCode::InvalidArguments, "discrete atom must have mean zero");
    if (!(second > 0.0))
        fail(ErrorCode::InvalidArguments, "discrete atom must have positive variance");

    // Sorted support keeps quantile() monotone.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return points[l] < points[r]; });
    AtomDistribution a;
    a.kind_ = Kind::Discrete;
    for (auto i : order) {
        a.points_.push_back(points[i]);
        a.probabilities_.push_back(probabilities[i]);
    }
    return a;
}

AtomDistribution AtomDistribution::zero() { return AtomDistribution{}; }

double AtomDistribution::moment(int k) const {
    checkOrder(k);
    if (k == 0) return 1.0;
    switch (kind_) {
        case Kind::Gaussian:
            return (k % 2) ? 0.0 : std::pow(parameter_, k / 2) * doubleFactorial(k - 1);
        case Kind::Rademacher:
            return (k % 2) ? 0.0 : std::pow(parameter_, k);
        case Kind::Discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < points_.size(); ++i)
                m += probabilities_[i] * std::pow(points_[i], k);
            return m;
        }
        case Kind::Zero:
            return 0.0;
    }
    return 0.0;
}

double AtomDistribution::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::Gaussian:
            return std::sqrt(parameter_) * rng.gaussian();
        case Kind::Rademacher:
            return (rng.bits() >> 63) ? parameter_ : -parameter_;
        case Kind::Discrete:
            return quantile(rng.uniform());
        case Kind::Zero:
            return 0.0;
    }
    return 0.0;
}

double AtomDistribution::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::InvalidArguments, "quantile level outside [0,1]");
    switch (kind_) {
        case Kind::Gaussian:
            if (u <= 0.0 || u >= 1.0) fail(ErrorCode::InvalidArguments, "gaussian quantile needs 0<u<1");
            return -std::sqrt(2.0 * parameter_) * boost::math::erfc_inv(2.0 * u);
        case Kind::Rademacher:
            return u < 0.5 ? -parameter_ : parameter_;
        case Kind::Discrete: {
            double cumulative = 0.0;
            for (std::size_t i = 0; i < points_.size(); ++i) {
                cumulative += probabilities_[i];
                if (u < cumulative) return points_[i];
            }
            return points_.back();
        }
        case Kind::Zero:
            return 0.0;
    }
    return 0.0;
}

double momentOf(const AtomDistribution& atom, int k) { return atom.moment(k); }

int matchOrder(const AtomDistribution& a, const AtomDistribution& b, int maxCheck) {
    checkOrder(maxCheck);
    for (int k = 1; k <= maxCheck; ++k)
        if (std::abs(a.moment(k) - b.moment(k)) > kMomentTolerance) return k - 1;
    return maxCheck;
}

void EnsembleSpec::validate() const {
    const double offVar = offDiagReal.variance() + offDiagImag.variance();
    if (!(offVar > 0.0)) fail(ErrorCode::Config, "ensemble '" + name + "' has zero off-diagonal variance");
    if (unitOffDiagVariance && std::abs(offVar - 1.0) > kMomentTolerance)
        fail(ErrorCode::Config, "ensemble '" + name + "' off-diagonal variance is " +
                                    formatDouble(offVar) + ", expected 1");
    if (std::abs(diag.variance() - sigmaSq) > kMomentTolerance)
        fail(ErrorCode::Config, "ensemble '" + name + "' diagonal variance does not equal sigmaSq");
}

EnsembleSpec gueEnsemble() {
    return {"gue", AtomDistribution::gaussian(0.5), AtomDistribution::gaussian(0.5),
            AtomDistribution::gaussian(1.0), 1.0, true};
}

EnsembleSpec goeEnsemble() {
    return {"goe", AtomDistribution::gaussian(1.0), AtomDistribution::zero(),
            AtomDistribution::gaussian(2.0), 2.0, true};
}

EnsembleSpec symmetricBernoulliEnsemble() {
    return {"symmetric-bernoulli", AtomDistribution::rademacher(1.0), AtomDistribution::zero(),
            AtomDistribution::rademacher(1.0), 1.0, true};
}

EnsembleSpec complexBernoulliEnsemble(bool unscaledParts) {
    if (unscaledParts)
        return {"complex-bernoulli-literal", AtomDistribution::rademacher(1.0),
                AtomDistribution::rademacher(1.0), AtomDistribution::rademacher(1.0), 1.0, false};
    const double s = 1.0 / std::sqrt(2.0);
    return {"complex-bernoulli", AtomDistribution::rademacher(s), AtomDistribution::rademacher(s),
            AtomDistribution::rademacher(1.0), 1.0, true};
}

std::vector<std::string> builtinEnsembleNames() {
    return {"gue", "goe", "symmetric-bernoulli", "complex-bernoulli", "complex-bernoulli-literal"};
}

EnsembleSpec builtinEnsemble(const std::string& name) {
    if (name == "gue") return gueEnsemble();
    if (name == "goe") return goeEnsemble();
    if (name == "symmetric-bernoulli") return symmetricBernoulliEnsemble();
    if (name == "complex-bernoulli") return complexBernoulliEnsemble(false);
    if (name == "complex-bernoulli-literal") return complexBernoulliEnsemble(true);
    fail(ErrorCode::Config, "unknown ensemble '" + name + "'");
}

MatchOrders ensembleMatchOrderVsGUE(const EnsembleSpec& spec) {
    const auto half = AtomDistribution::gaussian(0.5);
    const auto unit = AtomDistribution::gaussian(1.0);
    constexpr int kCheck = 6;
    return {std::min(matchOrder(spec.offDiagReal, half, kCheck), matchOrder(spec.offDiagImag, half, kCheck)),
            matchOrder(spec.diag, unit, kCheck)};
}

HermitianMatrix::HermitianMatrix(ComplexMatrix entries, MatrixScale scale)
    : entries_(std::move(entries)), scale_(scale) {
    if (entries_.rows() != entries_.cols()) fail(ErrorCode::DimensionMismatch, "matrix is not square");
    if (!isHermitian()) fail(ErrorCode::NotHermitian, "matrix storage is not Hermitian");
}

HermitianMatrix HermitianMatrix::adoptUnchecked(ComplexMatrix entries, MatrixScale scale) {
    if (entries.rows() != entries.cols()) fail(ErrorCode::DimensionMismatch, "matrix is not square");
    return HermitianMatrix(std::move(entries), scale, Unchecked{});
}

bool HermitianMatrix::isHermitian() const {
    const auto n = entries_.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            if (entries_(i, j) != std::conj(entries_(j, i))) return false;
    return true;
}

HermitianMatrix sampleWigner(const EnsembleSpec& spec, std::size_t n, Rng& rng) {
    if (n == 0) fail(ErrorCode::InvalidDimension, "matrix dimension must be at least 1");
    spec.validate();
    const auto N = static_cast<Eigen::Index>(n);
    ComplexMatrix m(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        m(i, i) = Complex(spec.diag.sample(rng), 0.0);
        for (Eigen::Index j = i + 1; j < N; ++j) {
            const double re = spec.offDiagReal.sample(rng);
            const double im = spec.offDiagImag.sample(rng);
            m(i, j) = Complex(re, im);
            m(j, i) = Complex(re, -im);
        }
    }
    return HermitianMatrix(std::move(m), MatrixScale::Raw);
}

HermitianMatrix sampleWigner(const EnsembleSpec& spec, std::size_t n, SeedStream stream) {
    Rng rng(stream);
    return sampleWigner(spec, n, rng);
}

HermitianMatrix normalize(const HermitianMatrix& raw) {
    if (raw.scale() != MatrixScale::Raw) fail(ErrorCode::InvalidState, "matrix is already normalized");
    const double root = std::sqrt(static_cast<double>(raw.dim()));
    return HermitianMatrix(raw.entries() / root, MatrixScale::Normalized);
}

ConditionC0Report checkConditionC0(const AtomDistribution& atom, double C, double Cprime,
                                   std::size_t samples, SeedStream stream, std::size_t gridPoints) {
    if (samples < 1000) fail(ErrorCode::InvalidArguments, "condition C0 check needs at least 1000 samples");
    if (!(C > 0.0)) fail(ErrorCode::InvalidArguments, "C must be positive");
    Rng rng(stream);
    std::vector<double> magnitudes(samples);
    for (auto& v : magnitudes) v = std::abs(atom.sample(rng));
    std::sort(magnitudes.begin(), magnitudes.end());

    ConditionC0Report report;
    report.samples = samples;
    const double count = static_cast<double>(samples);
    for (std::size_t k = 0; k < gridPoints; ++k) {
        TailPointC0 p;
        p.t = Cprime + 0.5 * static_cast<double>(k);
        p.threshold = std::pow(p.t, C);
        const auto firstAbove = std::lower_bound(magnitudes.begin(), magnitudes.end(), p.threshold);
        p.frequency = static_cast<double>(magnitudes.end() - firstAbove) / count;
        p.bound = std::exp(-p.t);
        const double se = std::sqrt(p.bound * (1.0 - p.bound) / count);
        p.flagged = p.frequency > p.bound + 3.0 * se;
        report.anyFlagged = report.anyFlagged || p.flagged;
        report.points.push_back(p);
    }
    return report;
}

void to_json(nlohmann::json& j, const AtomDistribution& atom) {
    switch (atom.kind()) {
        case AtomDistribution::Kind::Gaussian:
            j = {{"kind", "gaussian"}, {"variance", atom.parameter()}};
            break;
        case AtomDistribution::Kind::Rademacher:
            j = {{"kind", "rademacher"}, {"scale", atom.parameter()}};
            break;
        case AtomDistribution::Kind::Discrete:
            j = {{"kind", "discrete"}, {"points", atom.points()}, {"probabilities", atom.probabilities()}};
            break;
        case AtomDistribution::Kind::Zero:
            j = {{"kind", "zero"}};
            break;
    }
}

void from_json(const nlohmann::json& j, AtomDistribution& atom) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "gaussian")
            atom = AtomDistribution::gaussian(j.at("variance").get<double>());
        else if (kind == "rademacher")
            atom = AtomDistribution::rademacher(j.at("scale").get<double>());
        else if (kind == "discrete")
            atom = AtomDistribution::discrete(j.at("points").get<std::vector<double>>(),
                                              j.at("probabilities").get<std::vector<double>>());
        else if (kind == "zero")
            atom = AtomDistribution::zero();
        else
            fail(ErrorCode::Config, "unknown atom kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Config, std::string("bad atom description: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const EnsembleSpec& spec) {
    j = {{"name", spec.name},
         {"offDiagReal", spec.offDiagReal},
         {"offDiagImag", spec.offDiagImag},
         {"diag", spec.diag},
         {"sigmaSq", spec.sigmaSq},
         {"unitOffDiagVariance", spec.unitOffDiagVariance}};
}

void from_json(const nlohmann::json& j, EnsembleSpec& spec) {
    try {
        spec.name = j.value("name", std::string("custom"));
        spec.offDiagReal = j.at("offDiagReal").get<AtomDistribution>();
        spec.offDiagImag = j.at("offDiagImag").get<AtomDistribution>();
        spec.diag = j.at("diag").get<AtomDistribution>();
        spec.sigmaSq = j.at("sigmaSq").get<double>();
        spec.unitOffDiagVariance = j.value("unitOffDiagVariance", true);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Config, std::string("bad ensemble description: ") + e.what());
    }
    spec.validate();
}

EnsembleSpec ensembleFromJson(const nlohmann::json& j) {
    if (j.is_string()) return builtinEnsemble(j.get<std::string>());
    if (!j.is_object()) fail(ErrorCode::Config, "ensemble must be a name or an object");
    return j.get<EnsembleSpec>();
}

void writeMatrixCsv(std::ostream& os, const HermitianMatrix& m) {
    const auto n = m.dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) os << ',';
            os << formatDouble(m(i, j).real()) << ',' << formatDouble(m(i, j).imag());
        }
        os << '\n';
    }
}

}  // namespace wignerlab
