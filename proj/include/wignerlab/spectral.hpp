#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/semicircle.hpp"

namespace wignerlab {

enum class ResidualKind {
    None,          // values supplied directly, no source matrix
    Eigenpairs,    // max |W v - lambda v| over computed eigenpairs
    TraceMoments,  // |sum lambda - tr W| and |sum lambda^2 - |W|_F^2|, per eigenvalue
};

struct EigenOptions {
    // Accept a raw (unnormalized) matrix.
    bool allowRaw = false;
    ResidualKind residual = ResidualKind::Eigenpairs;
};

/// Sorted real spectrum lambda_1 <= ... <= lambda_n of a Hermitian matrix.
class Spectrum {
public:
    // Sorts the values; used for synthetic spectra and cache imports.
    static Spectrum fromValues(std::vector<double> values);

    std::size_t size() const { return lambda_.size(); }
    std::span<const double> values() const { return lambda_; }
    double operator[](std::size_t i) const { return lambda_[i]; }
    double smallest() const { return lambda_.front(); }
    double largest() const { return lambda_.back(); }

    double sourceResidual() const { return residual_; }
    ResidualKind residualKind() const { return residualKind_; }

private:
    friend Spectrum eigenvalues(const HermitianMatrix&, const EigenOptions&);
    std::vector<double> lambda_;
    double residual_ = 0.0;
    ResidualKind residualKind_ = ResidualKind::None;
};

// Dense Hermitian eigensolve. Rejects non-Hermitian storage, raw matrices
// unless allowRaw, and spectra whose residual exceeds 1e-8 max(1, max|lambda|).
Spectrum eigenvalues(const HermitianMatrix& W, const EigenOptions& options = {});

/// Real interval with optional infinite ends; infinite ends are open.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool loClosed = false;
    bool hiClosed = false;

    static Interval make(double lo, double hi, bool loClosed, bool hiClosed);
    static Interval closed(double lo, double hi) { return make(lo, hi, true, true); }
    static Interval halfOpen(double lo, double hi) { return make(lo, hi, true, false); }
    static Interval open(double lo, double hi) { return make(lo, hi, false, false); }
    static Interval below(double x) { return make(-std::numeric_limits<double>::infinity(), x, false, false); }
    static Interval atMost(double x) { return make(-std::numeric_limits<double>::infinity(), x, false, true); }
    static Interval whole() { return {}; }

    bool contains(double x) const;
    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
    double length() const { return hi - lo; }
};

// N_I: number of eigenvalues in I.
std::size_t countInInterval(const Spectrum& spec, const Interval& I);

// N_I - n * (F(hi) - F(lo)) with F the semicircle distribution function.
double semicircleDeviation(const Spectrum& spec, const Interval& I);

// (1/n) sum 1/(lambda_i - z).
std::complex<double> stieltjesEmpirical(const Spectrum& spec, const ComplexEnergy& z);

struct StatA {
    std::complex<double> value;
    double modulus = 0.0;
};

// A = n eta (s_W(z) - s_sc(z)).
StatA statA(const Spectrum& spec, const ComplexEnergy& z);

// B = n eta Im s_W(z).
double statB(const Spectrum& spec, const ComplexEnergy& z);
// sum eta^2 / ((lambda_i - E)^2 + eta^2); equals statB.
double statBLorentzianSum(const Spectrum& spec, const ComplexEnergy& z);

struct StieltjesCountOptions {
    double etaMin = 0.0;  // 0 selects 1e-6 / n
    double etaMax = 1e6;
    int gridPointsPerDecade = 64;
};

struct StieltjesCount {
    double estimate = 0.0;        // N_{(-inf, E)}
    double truncatedIntegral = 0.0;  // Re int_{etaMin}^{etaMax} s_W(E + i eta) d eta by quadrature
    double tailCorrection = 0.0;     // closed-form integral over (0, etaMin) and (etaMax, inf)
    double quadratureError = 0.0;    // |quadrature - closed form| on [etaMin, etaMax]
};

// Recovers N_{(-inf,E)} from the Stieltjes transform along the vertical line
// through E. Throws ill-conditioned-energy if E is within 1e-9 of an eigenvalue.
StieltjesCount countFromStieltjes(const Spectrum& spec, double E, const StieltjesCountOptions& options = {});

// n^{2/3} (lambda_max - 2) and n^{2/3} (-lambda_min - 2).
double edgeStatistic(const Spectrum& spec);
double edgeStatisticLower(const Spectrum& spec);

// n^{2/3} min(i, n-i+1)^{1/3} |lambda_i - gamma_i|, ascending index order.
std::vector<double> rigidityProfile(const Spectrum& spec, const ClassicalLocationTable& gamma);

// Single-column spectrum CSV:
//   # n=<n> source=<hash> checksum=<hash of the remaining lines>
//   index,lambda
//   1,<lambda_1>
std::string spectrumCsv(const Spectrum& spec, const std::string& sourceHash);

struct SpectrumFile {
    Spectrum spectrum;
    std::string sourceHash;
};

// Throws corrupt when the header, row count or checksum do not agree.
SpectrumFile parseSpectrumCsv(const std::string& text);

}  // namespace wignerlab
