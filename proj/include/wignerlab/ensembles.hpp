#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wignerlab/rng.hpp"

namespace wignerlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Closed-form moments are tabulated up to this order.
inline constexpr int kMaxMomentOrder = 8;

/// Law of one real entry component. Every kind has mean exactly zero.
class AtomDistribution {
public:
    enum class Kind { Gaussian, Rademacher, Discrete, Zero };

    // The constant-zero atom.
    AtomDistribution() = default;

    static AtomDistribution gaussian(double variance);
    static AtomDistribution rademacher(double scale);
    static AtomDistribution discrete(std::vector<double> points, std::vector<double> probabilities);
    static AtomDistribution zero();

    Kind kind() const { return kind_; }
    // Variance for Gaussian, scale for Rademacher, unused otherwise.
    double parameter() const { return parameter_; }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

    double moment(int k) const;
    double variance() const { return moment(2); }

    double sample(Rng& rng) const;

    // Inverse CDF; drives comonotone coupling of two atoms from one uniform.
    double quantile(double u) const;

    friend bool operator==(const AtomDistribution&, const AtomDistribution&) = default;

private:
    Kind kind_ = Kind::Zero;
    double parameter_ = 0.0;
    std::vector<double> points_;
    std::vector<double> probabilities_;
};

double momentOf(const AtomDistribution& atom, int k);

// Largest m <= maxCheck with E a^k == E b^k for all k <= m.
int matchOrder(const AtomDistribution& a, const AtomDistribution& b, int maxCheck);

struct EnsembleSpec {
    std::string name;
    AtomDistribution offDiagReal = AtomDistribution::zero();
    AtomDistribution offDiagImag = AtomDistribution::zero();
    AtomDistribution diag = AtomDistribution::zero();
    double sigmaSq = 0.0;
    // Only the literal complex Bernoulli reading turns this off.
    bool unitOffDiagVariance = true;

    void validate() const;

    friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

EnsembleSpec gueEnsemble();
EnsembleSpec goeEnsemble();
EnsembleSpec symmetricBernoulliEnsemble();
// Parts are +-1/sqrt(2) by default so off-diagonal variance is one;
// unscaledParts selects parts of +-1 (variance two).
EnsembleSpec complexBernoulliEnsemble(bool unscaledParts = false);

// "gue", "goe", "symmetric-bernoulli", "complex-bernoulli",
// "complex-bernoulli-literal".
EnsembleSpec builtinEnsemble(const std::string& name);
std::vector<std::string> builtinEnsembleNames();

struct MatchOrders {
    int offDiagonal = 0;
    int diagonal = 0;
};

MatchOrders ensembleMatchOrderVsGUE(const EnsembleSpec& spec);

enum class MatrixScale { Raw, Normalized };

/// Dense Hermitian matrix, either the raw M_n or the normalized W_n.
class HermitianMatrix {
public:
    // Throws not-hermitian unless entries(i,j) == conj(entries(j,i)) bitwise.
    HermitianMatrix(ComplexMatrix entries, MatrixScale scale);

    // Skips the symmetry check; for importing storage that is verified later.
    static HermitianMatrix adoptUnchecked(ComplexMatrix entries, MatrixScale scale);

    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }
    MatrixScale scale() const { return scale_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    bool isHermitian() const;

private:
    struct Unchecked {};
    HermitianMatrix(ComplexMatrix entries, MatrixScale scale, Unchecked)
        : entries_(std::move(entries)), scale_(scale) {}

    ComplexMatrix entries_;
    MatrixScale scale_;
};

// Draws the diagonal and the upper triangle in row-major order; the lower
// triangle is the conjugate mirror.
HermitianMatrix sampleWigner(const EnsembleSpec& spec, std::size_t n, Rng& rng);
HermitianMatrix sampleWigner(const EnsembleSpec& spec, std::size_t n, SeedStream stream);

// W_n = M_n / sqrt(n). Rejects an already normalized matrix.
HermitianMatrix normalize(const HermitianMatrix& raw);

struct TailPointC0 {
    double t = 0.0;
    double threshold = 0.0;  // t^C
    double frequency = 0.0;  // fraction of |xi| >= t^C
    double bound = 0.0;      // e^{-t}
    bool flagged = false;
};

struct ConditionC0Report {
    std::size_t samples = 0;
    std::vector<TailPointC0> points;
    bool anyFlagged = false;
};

// Empirical check of P(|xi| >= t^C) <= e^{-t} on t = C' + 0.5 k, k < gridPoints.
ConditionC0Report checkConditionC0(const AtomDistribution& atom, double C, double Cprime,
                                   std::size_t samples, SeedStream stream,
                                   std::size_t gridPoints = 41);

void to_json(nlohmann::json& j, const AtomDistribution& atom);
void from_json(const nlohmann::json& j, AtomDistribution& atom);
void to_json(nlohmann::json& j, const EnsembleSpec& spec);
void from_json(const nlohmann::json& j, EnsembleSpec& spec);

// Accepts either a builtin name (JSON string) or a full ensemble object.
EnsembleSpec ensembleFromJson(const nlohmann::json& j);

// Row-major; each line holds "re,im" pairs for one row.
void writeMatrixCsv(std::ostream& os, const HermitianMatrix& m);

}  // namespace wignerlab
