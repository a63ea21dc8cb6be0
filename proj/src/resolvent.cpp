#include "wignerlab/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"

namespace wignerlab {

namespace {

using Index = Eigen::Index;

ComplexMatrix shifted(const ComplexMatrix& W, Complex z) {
    ComplexMatrix A = W;
    A.diagonal().array() -= z;
    return A;
}

std::vector<Index> keptIndices(std::size_t n, std::initializer_list<std::size_t> removed) {
    std::vector<Index> kept;
    kept.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        if (std::find(removed.begin(), removed.end(), k) == removed.end()) kept.push_back(static_cast<Index>(k));
    return kept;
}

Complex resolventEntry(const Eigen::PartialPivLU<ComplexMatrix>& lu, Index n, Index i, Index j) {
    ComplexVector e = ComplexVector::Zero(n);
    e(j) = 1.0;
    return lu.solve(e)(i);
}

void checkIndex(std::size_t i, std::size_t n) {
    if (i >= n) fail(ErrorCode::OutOfRange, "index " + std::to_string(i) + " outside dimension " + std::to_string(n));
}

}  // namespace

Resolvent resolvent(const HermitianMatrix& W, const ComplexEnergy& z) {
    const auto n = W.dim();
    if (n == 0) fail(ErrorCode::InvalidDimension, "empty matrix");
    if (n > kDenseResolventLimit)
        fail(ErrorCode::InvalidArguments, "dense resolvent limited to n <= 2000; use ResolventFactor");
    const ComplexMatrix A = shifted(W.entries(), z.z());
    Eigen::PartialPivLU<ComplexMatrix> lu(A);
    ComplexMatrix R = lu.inverse();
    ComplexMatrix defect = A * R;
    defect.diagonal().array() -= 1.0;
    const double residual = defect.cwiseAbs().maxCoeff();
    const double bound = 1e-8 * (1.0 + 1.0 / z.eta());
    if (!(residual <= bound))
        fail(ErrorCode::NumericalFailure, "resolvent residual " + formatDouble(residual) + " exceeds " +
                                              formatDouble(bound));
    return Resolvent(z, std::move(R), residual);
}

ResolventFactor::ResolventFactor(const HermitianMatrix& W, const ComplexEnergy& z)
    : n_(W.dim()), lu_(shifted(W.entries(), z.z())) {
    if (n_ == 0) fail(ErrorCode::InvalidDimension, "empty matrix");
}

ComplexVector ResolventFactor::column(std::size_t j) const {
    checkIndex(j, n_);
    ComplexVector e = ComplexVector::Zero(static_cast<Index>(n_));
    e(static_cast<Index>(j)) = 1.0;
    return lu_.solve(e);
}

Complex ResolventFactor::entry(std::size_t i, std::size_t j) const {
    checkIndex(i, n_);
    return column(j)(static_cast<Index>(i));
}

Complex ResolventFactor::trace() const {
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sum += column(j)(static_cast<Index>(j));
    return sum;
}

double coeffNorm(const ComplexMatrix& R) { return R.cwiseAbs().maxCoeff(); }
double coeffNorm(const Resolvent& R) { return coeffNorm(R.entries()); }

double conjugateSymmetryResidual(const HermitianMatrix& W, const ComplexEnergy& z) {
    const ComplexMatrix up = Eigen::PartialPivLU<ComplexMatrix>(shifted(W.entries(), z.z())).inverse();
    const ComplexMatrix down =
        Eigen::PartialPivLU<ComplexMatrix>(shifted(W.entries(), std::conj(z.z()))).inverse();
    return (up.adjoint() - down).cwiseAbs().maxCoeff();
}

HermitianMatrix minor(const HermitianMatrix& W, std::span<const std::size_t> removedIndices) {
    const auto n = W.dim();
    if (removedIndices.empty()) fail(ErrorCode::InvalidArguments, "minor needs at least one removed index");
    std::vector<bool> removed(n, false);
    for (auto r : removedIndices) {
        checkIndex(r, n);
        removed[r] = true;
    }
    std::vector<Index> kept;
    for (std::size_t k = 0; k < n; ++k)
        if (!removed[k]) kept.push_back(static_cast<Index>(k));
    if (kept.empty()) fail(ErrorCode::InvalidDimension, "minor would be empty");
    return HermitianMatrix(W.entries()(kept, kept), W.scale());
}

InterlacingReport checkInterlacing(const Spectrum& full, const Spectrum& minorSpectrum, double tolerance) {
    if (minorSpectrum.size() + 1 != full.size())
        fail(ErrorCode::DimensionMismatch, "interlacing needs a minor of dimension n - 1");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < minorSpectrum.size(); ++i) {
        worst = std::max(worst, full[i] - minorSpectrum[i]);
        worst = std::max(worst, minorSpectrum[i] - full[i + 1]);
    }
    return {worst <= tolerance, worst};
}

double schurDiagonal(const HermitianMatrix& W, const ComplexEnergy& z, std::size_t i) {
    const auto n = W.dim();
    checkIndex(i, n);
    const auto& M = W.entries();
    const Index N = static_cast<Index>(n), I = static_cast<Index>(i);
    const Complex direct = resolventEntry(Eigen::PartialPivLU<ComplexMatrix>(shifted(M, z.z())), N, I, I);

    Complex selfEnergy = 0.0;
    if (n > 1) {
        const auto kept = keptIndices(n, {i});
        const ComplexVector X = M(kept, I);
        const Eigen::PartialPivLU<ComplexMatrix> minorLu(shifted(M(kept, kept), z.z()));
        selfEnergy = X.dot(minorLu.solve(X));
    }
    const Complex viaSchur = 1.0 / (M(I, I) - z.z() - selfEnergy);
    return std::abs(direct - viaSchur);
}

double schurOffDiagonal(const HermitianMatrix& W, const ComplexEnergy& z, std::size_t i, std::size_t j) {
    const auto n = W.dim();
    checkIndex(i, n);
    checkIndex(j, n);
    if (i == j) fail(ErrorCode::InvalidArguments, "off-diagonal Schur identity needs i != j");
    const auto& M = W.entries();
    const Index N = static_cast<Index>(n), I = static_cast<Index>(i), J = static_cast<Index>(j);

    const Eigen::PartialPivLU<ComplexMatrix> fullLu(shifted(M, z.z()));
    const Complex rij = resolventEntry(fullLu, N, I, J);
    const Complex rii = resolventEntry(fullLu, N, I, I);

    const auto withoutI = keptIndices(n, {i});
    const Index jInMinor = J - (J > I ? 1 : 0);
    const Complex minorJJ = resolventEntry(Eigen::PartialPivLU<ComplexMatrix>(shifted(M(withoutI, withoutI), z.z())),
                                           N - 1, jInMinor, jInMinor);

    Complex K = M(I, J);
    const auto withoutIJ = keptIndices(n, {i, j});
    if (!withoutIJ.empty()) {
        const ComplexVector Xi = M(withoutIJ, I);
        const ComplexVector Xj = M(withoutIJ, J);
        const Eigen::PartialPivLU<ComplexMatrix> lu(shifted(M(withoutIJ, withoutIJ), z.z()));
        K -= Xi.dot(lu.solve(Xj));
    }
    return std::abs(rij + rii * minorJJ * K);
}

ElementaryMatrix ElementaryMatrix::diagonal(std::size_t a) { return {Form::Diagonal, a, a}; }

ElementaryMatrix ElementaryMatrix::symmetricPair(std::size_t a, std::size_t b) {
    if (a == b) fail(ErrorCode::InvalidArguments, "pair elementary matrix needs distinct indices");
    return {Form::SymmetricPair, a, b};
}

ElementaryMatrix ElementaryMatrix::antisymmetricPair(std::size_t a, std::size_t b) {
    if (a == b) fail(ErrorCode::InvalidArguments, "pair elementary matrix needs distinct indices");
    return {Form::AntisymmetricPair, a, b};
}

Eigen::Matrix2cd ElementaryMatrix::coupling() const {
    Eigen::Matrix2cd S = Eigen::Matrix2cd::Zero();
    switch (form_) {
        case Form::Diagonal:
            S(0, 0) = 1.0;
            break;
        case Form::SymmetricPair:
            S(0, 1) = S(1, 0) = 1.0;
            break;
        case Form::AntisymmetricPair:
            S(0, 1) = Complex(0.0, 1.0);
            S(1, 0) = Complex(0.0, -1.0);
            break;
    }
    return S;
}

ComplexMatrix ElementaryMatrix::dense(std::size_t n) const {
    checkIndex(a_, n);
    checkIndex(b_, n);
    ComplexMatrix V = ComplexMatrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
    const auto S = coupling();
    const Index A = static_cast<Index>(a_), B = static_cast<Index>(b_);
    if (form_ == Form::Diagonal) {
        V(A, A) = 1.0;
    } else {
        V(A, B) = S(0, 1);
        V(B, A) = S(1, 0);
    }
    return V;
}

PerturbationSeries perturbSeries(const HermitianMatrix& M0, const ElementaryMatrix& V, double t,
                                 const ComplexEnergy& z, int m) {
    if (m < 0 || m > 6) fail(ErrorCode::InvalidArguments, "series order must be in [0, 6]");
    if (!std::isfinite(t)) fail(ErrorCode::InvalidArguments, "perturbation size must be finite");
    const auto n = M0.dim();
    checkIndex(V.a(), n);
    checkIndex(V.b(), n);
    const double dn = static_cast<double>(n);

    const ComplexMatrix R0 = Eigen::PartialPivLU<ComplexMatrix>(shifted(M0.entries(), z.z())).inverse();
    const ComplexMatrix perturbed = shifted(M0.entries() + t * V.dense(n), z.z());
    const Eigen::PartialPivLU<ComplexMatrix> lu(perturbed);
    if (!(lu.rcond() > std::numeric_limits<double>::epsilon()))
        fail(ErrorCode::SingularInput, "perturbed matrix is singular");

    PerturbationSeries out;
    out.exact = lu.inverse().trace() / dn;
    const Complex s0 = R0.trace() / dn;

    // V = U S U^*, so tr(R0 (V R0)^j) = tr(S (P S)^{j-1} Q) with
    // P = U^* R0 U and Q = U^* R0^2 U, both rank x rank.
    const Index r = static_cast<Index>(V.rank());
    const Index idx[2] = {static_cast<Index>(V.a()), static_cast<Index>(V.b())};
    const Eigen::Matrix2cd Sfull = V.coupling();
    ComplexMatrix S = Sfull.topLeftCorner(r, r);
    ComplexMatrix P(r, r), Q(r, r);
    for (Index p = 0; p < r; ++p)
        for (Index q = 0; q < r; ++q) {
            P(p, q) = R0(idx[p], idx[q]);
            Q(p, q) = R0.row(idx[p]).transpose().cwiseProduct(R0.col(idx[q])).sum();
        }

    out.seriesEstimate = s0;
    ComplexMatrix chain = S;  // S (P S)^{j-1}
    for (int j = 1; j <= m; ++j) {
        const Complex traceTerm = (chain * Q).trace();
        const double sign = (j % 2) ? -1.0 : 1.0;
        const Complex cj = sign * std::pow(dn, 0.5 * j - 1.0) * traceTerm;
        out.coefficients.push_back(cj);
        out.seriesEstimate += std::pow(dn, -0.5 * j) * cj * std::pow(t, j);
        chain = chain * P * S;
    }
    out.error = std::abs(out.exact - out.seriesEstimate);
    return out;
}

QuadraticFormStat quadraticFormStat(const ComplexVector& X, const ComplexMatrix& A, double sigmaSq) {
    if (A.rows() != A.cols() || A.rows() != X.size())
        fail(ErrorCode::DimensionMismatch, "quadratic form dimensions do not match");
    if (!(sigmaSq > 0.0)) fail(ErrorCode::InvalidArguments, "sigma^2 must be positive");
    const double frob2 = A.squaredNorm();
    if (!(frob2 > 0.0)) fail(ErrorCode::InvalidArguments, "quadratic form matrix has zero Frobenius norm");
    const Complex form = X.dot(A * X);
    const Complex value = (form - sigmaSq * A.trace()) / (sigmaSq * std::sqrt(frob2));
    return {value, std::abs(value)};
}

double subspaceProjectionNorm(const ComplexVector& X, const ComplexMatrix& basis) {
    if (basis.rows() != X.size()) fail(ErrorCode::DimensionMismatch, "basis and vector dimensions differ");
    ComplexMatrix gram = basis.adjoint() * basis;
    gram.diagonal().array() -= 1.0;
    if (gram.size() > 0 && gram.cwiseAbs().maxCoeff() > 1e-10)
        fail(ErrorCode::InvalidArguments, "basis columns are not orthonormal");
    return (basis.adjoint() * X).squaredNorm();
}

LocalLawResidual localLawResidual(const HermitianMatrix& W, const ComplexEnergy& z) {
    const Resolvent R = resolvent(W, z);
    const Complex reference = sSc(z);
    const double n = static_cast<double>(R.dim());
    LocalLawResidual out;
    out.stieltjesGap = std::abs(R.trace() / n - reference);
    out.diagonalGap = (R.entries().diagonal().array() - reference).abs().maxCoeff();
    return out;
}

double crudeCountRatio(const Spectrum& spec, const Interval& I) {
    if (!I.bounded() || !(I.length() > 0.0))
        fail(ErrorCode::InvalidArguments, "crude count ratio needs a bounded interval of positive length");
    return static_cast<double>(countInInterval(spec, I)) / (static_cast<double>(spec.size()) * I.length());
}

}  // namespace wignerlab
