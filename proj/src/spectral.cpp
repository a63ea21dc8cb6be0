#include "wignerlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"

namespace wignerlab {

Spectrum Spectrum::fromValues(std::vector<double> values) {
    if (values.empty()) fail(ErrorCode::InvalidDimension, "spectrum must be nonempty");
    for (double v : values)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArguments, "spectrum values must be finite");
    std::sort(values.begin(), values.end());
    Spectrum s;
    s.lambda_ = std::move(values);
    return s;
}

Spectrum eigenvalues(const HermitianMatrix& W, const EigenOptions& options) {
    if (W.dim() == 0) fail(ErrorCode::InvalidDimension, "empty matrix");
    if (!W.isHermitian()) fail(ErrorCode::NotHermitian, "eigensolve requires Hermitian storage");
    if (W.scale() == MatrixScale::Raw && !options.allowRaw)
        fail(ErrorCode::InvalidState, "eigensolve expects a normalized matrix");

    const auto& A = W.entries();
    const double n = static_cast<double>(W.dim());
    Spectrum s;
    s.residualKind_ = options.residual;

    if (options.residual == ResidualKind::Eigenpairs) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(A, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "eigensolver did not converge");
        const Eigen::VectorXd& values = solver.eigenvalues();
        const ComplexMatrix& vectors = solver.eigenvectors();
        const ComplexMatrix defect = A * vectors - vectors * values.asDiagonal();
        s.residual_ = defect.colwise().norm().maxCoeff();
        s.lambda_.assign(values.data(), values.data() + values.size());
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(A, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "eigensolver did not converge");
        const Eigen::VectorXd& values = solver.eigenvalues();
        s.lambda_.assign(values.data(), values.data() + values.size());
        if (options.residual == ResidualKind::TraceMoments) {
            const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
            const double traceGap = std::abs(values.sum() - A.trace().real());
            const double squareGap = std::abs(values.squaredNorm() - A.squaredNorm()) / scale;
            s.residual_ = std::max(traceGap, squareGap) / n;
        }
    }
    std::sort(s.lambda_.begin(), s.lambda_.end());

    const double bound = 1e-8 * std::max({1.0, std::abs(s.lambda_.front()), std::abs(s.lambda_.back())});
    if (!(s.residual_ <= bound))
        fail(ErrorCode::NumericalFailure, "eigen residual " + formatDouble(s.residual_) + " exceeds " +
                                              formatDouble(bound));
    return s;
}

Interval Interval::make(double lo, double hi, bool loClosed, bool hiClosed) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) fail(ErrorCode::InvalidArguments, "interval needs lo <= hi");
    if (std::isinf(lo)) {
        if (lo > 0) fail(ErrorCode::InvalidArguments, "interval lower end is +inf");
        loClosed = false;
    }
    if (std::isinf(hi)) {
        if (hi < 0) fail(ErrorCode::InvalidArguments, "interval upper end is -inf");
        hiClosed = false;
    }
    return {lo, hi, loClosed, hiClosed};
}

bool Interval::contains(double x) const {
    const bool aboveLo = loClosed ? x >= lo : x > lo;
    const bool belowHi = hiClosed ? x <= hi : x < hi;
    return aboveLo && belowHi;
}

std::size_t countInInterval(const Spectrum& spec, const Interval& I) {
    const auto v = spec.values();
    const auto first = I.loClosed ? std::lower_bound(v.begin(), v.end(), I.lo)
                                  : std::upper_bound(v.begin(), v.end(), I.lo);
    const auto last = I.hiClosed ? std::upper_bound(v.begin(), v.end(), I.hi)
                                 : std::lower_bound(v.begin(), v.end(), I.hi);
    return last > first ? static_cast<std::size_t>(last - first) : 0;
}

double semicircleDeviation(const Spectrum& spec, const Interval& I) {
    const double mass = semicircleCdf(I.hi) - semicircleCdf(I.lo);
    return static_cast<double>(countInInterval(spec, I)) - static_cast<double>(spec.size()) * mass;
}

std::complex<double> stieltjesEmpirical(const Spectrum& spec, const ComplexEnergy& z) {
    std::complex<double> sum = 0.0;
    const auto zz = z.z();
    for (double l : spec.values()) sum += 1.0 / (l - zz);
    return sum / static_cast<double>(spec.size());
}

StatA statA(const Spectrum& spec, const ComplexEnergy& z) {
    const double scale = static_cast<double>(spec.size()) * z.eta();
    const auto a = scale * (stieltjesEmpirical(spec, z) - sSc(z));
    return {a, std::abs(a)};
}

double statB(const Spectrum& spec, const ComplexEnergy& z) {
    return static_cast<double>(spec.size()) * z.eta() * stieltjesEmpirical(spec, z).imag();
}

double statBLorentzianSum(const Spectrum& spec, const ComplexEnergy& z) {
    const double eta2 = z.eta() * z.eta();
    double sum = 0.0;
    for (double l : spec.values()) {
        const double d = l - z.E();
        sum += eta2 / (d * d + eta2);
    }
    return sum;
}

namespace {

// Re of the integral of 1/(lambda - E - i eta) over eta in [a, b]:
// -[arg(E + i eta - lambda)]_a^b.
double arcIntegral(double d, double a, double b) {
    return std::atan2(a, -d) - std::atan2(b, -d);
}

}  // namespace

StieltjesCount countFromStieltjes(const Spectrum& spec, double E, const StieltjesCountOptions& options) {
    const double n = static_cast<double>(spec.size());
    const double etaMin = options.etaMin > 0.0 ? options.etaMin : 1e-6 / n;
    const double etaMax = options.etaMax;
    if (!(etaMin < etaMax) || !std::isfinite(etaMax))
        fail(ErrorCode::InvalidArguments, "countFromStieltjes needs 0 < etaMin < etaMax < inf");
    if (options.gridPointsPerDecade < 1) fail(ErrorCode::InvalidArguments, "gridPointsPerDecade must be >= 1");
    for (double l : spec.values())
        if (std::abs(l - E) < 1e-9)
            fail(ErrorCode::IllConditionedEnergy, "energy " + formatDouble(E) + " is too close to an eigenvalue");

    // Composite Simpson in u = log(eta); d eta = eta du.
    const double a = std::log(etaMin), b = std::log(etaMax);
    auto intervals = static_cast<long>(std::ceil((b - a) / std::numbers::ln10 * options.gridPointsPerDecade));
    intervals = std::max(2L, intervals + (intervals % 2));
    const double h = (b - a) / static_cast<double>(intervals);
    auto integrand = [&](double u) {
        const double eta = std::exp(u);
        return eta * stieltjesEmpirical(spec, ComplexEnergy(E, eta)).real();
    };
    double simpson = integrand(a) + integrand(b);
    for (long k = 1; k < intervals; ++k) simpson += (k % 2 ? 4.0 : 2.0) * integrand(a + h * static_cast<double>(k));
    const double quadrature = simpson * h / 3.0;

    double exactWindow = 0.0, tail = 0.0;
    for (double l : spec.values()) {
        const double d = l - E;
        exactWindow += arcIntegral(d, etaMin, etaMax);
        tail += arcIntegral(d, 0.0, etaMin) + (std::atan2(etaMax, -d) - std::numbers::pi / 2.0);
    }
    exactWindow /= n;
    tail /= n;

    StieltjesCount out;
    out.truncatedIntegral = quadrature;
    out.tailCorrection = tail;
    out.quadratureError = std::abs(quadrature - exactWindow);
    out.estimate = n / std::numbers::pi * (std::numbers::pi / 2.0 - quadrature - tail);
    return out;
}

double edgeStatistic(const Spectrum& spec) {
    return std::cbrt(std::pow(static_cast<double>(spec.size()), 2)) * (spec.largest() - 2.0);
}

double edgeStatisticLower(const Spectrum& spec) {
    return std::cbrt(std::pow(static_cast<double>(spec.size()), 2)) * (-spec.smallest() - 2.0);
}

std::vector<double> rigidityProfile(const Spectrum& spec, const ClassicalLocationTable& gamma) {
    const std::size_t n = spec.size();
    if (gamma.n != n || gamma.gamma.size() != n)
        fail(ErrorCode::DimensionMismatch, "classical location table has the wrong size");
    const double scale = std::cbrt(static_cast<double>(n) * static_cast<double>(n));
    std::vector<double> out(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double depth = static_cast<double>(std::min(i, n - i + 1));
        out[i - 1] = scale * std::cbrt(depth) * std::abs(spec[i - 1] - gamma[i - 1]);
    }
    return out;
}

std::string spectrumCsv(const Spectrum& spec, const std::string& sourceHash) {
    std::ostringstream body;
    body << "index,lambda\n";
    for (std::size_t i = 0; i < spec.size(); ++i) body << (i + 1) << ',' << formatDouble(spec[i]) << '\n';
    const std::string text = body.str();
    return "# n=" + std::to_string(spec.size()) + " source=" + sourceHash + " checksum=" + hex64(fnv1a64(text)) +
           "\n" + text;
}

SpectrumFile parseSpectrumCsv(const std::string& text) {
    const auto eol = text.find('\n');
    if (eol == std::string::npos || text.rfind("# ", 0) != 0) fail(ErrorCode::Corrupt, "missing spectrum header");
    std::istringstream header(text.substr(2, eol - 2));
    std::string token, source, checksum;
    long long n = -1;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) fail(ErrorCode::Corrupt, "bad header token '" + token + "'");
        const auto key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "n")
            n = std::atoll(value.c_str());
        else if (key == "source")
            source = value;
        else if (key == "checksum")
            checksum = value;
    }
    const std::string body = text.substr(eol + 1);
    if (n < 1 || source.empty() || checksum.empty()) fail(ErrorCode::Corrupt, "incomplete spectrum header");
    if (hex64(fnv1a64(body)) != checksum) fail(ErrorCode::Corrupt, "spectrum checksum mismatch");

    std::istringstream lines(body);
    std::string line;
    if (!std::getline(lines, line) || line != "index,lambda") fail(ErrorCode::Corrupt, "missing column header");
    std::vector<double> values;
    while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(ErrorCode::Corrupt, "bad spectrum row");
        if (std::atoll(line.substr(0, comma).c_str()) != static_cast<long long>(values.size()) + 1)
            fail(ErrorCode::Corrupt, "spectrum rows out of order");
        char* end = nullptr;
        const std::string num = line.substr(comma + 1);
        const double v = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || *end != '\0') fail(ErrorCode::Corrupt, "bad spectrum value");
        values.push_back(v);
    }
    if (static_cast<long long>(values.size()) != n) fail(ErrorCode::Corrupt, "spectrum row count mismatch");
    return {Spectrum::fromValues(std::move(values)), source};
}

}  // namespace wignerlab
