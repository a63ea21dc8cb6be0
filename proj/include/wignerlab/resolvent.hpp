#pragma once

#include <Eigen/LU>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/semicircle.hpp"
#include "wignerlab/spectral.hpp"

namespace wignerlab {

// Largest dimension for which resolvent() materializes R(z) densely.
inline constexpr std::size_t kDenseResolventLimit = 2000;

/// R(z) = (W - z)^{-1}, materialized, with its defining residual.
class Resolvent {
public:
    const ComplexEnergy& energy() const { return z_; }
    const ComplexMatrix& entries() const { return entries_; }
    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    Complex operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    // max-norm of (W - z) R - I
    double definingResidual() const { return residual_; }
    Complex trace() const { return entries_.trace(); }

private:
    friend Resolvent resolvent(const HermitianMatrix&, const ComplexEnergy&);
    Resolvent(ComplexEnergy z, ComplexMatrix entries, double residual)
        : z_(z), entries_(std::move(entries)), residual_(residual) {}

    ComplexEnergy z_;
    ComplexMatrix entries_;
    double residual_;
};

// Throws numerical-failure when the residual exceeds 1e-8 (1 + 1/eta), and
// invalid-arguments above kDenseResolventLimit (use ResolventFactor there).
Resolvent resolvent(const HermitianMatrix& W, const ComplexEnergy& z);

/// LU factorization of W - z; yields resolvent columns one solve at a time.
class ResolventFactor {
public:
    ResolventFactor(const HermitianMatrix& W, const ComplexEnergy& z);

    std::size_t dim() const { return n_; }
    ComplexVector column(std::size_t j) const;
    ComplexVector solve(const ComplexVector& rhs) const { return lu_.solve(rhs); }
    Complex entry(std::size_t i, std::size_t j) const;
    Complex trace() const;

private:
    std::size_t n_;
    Eigen::PartialPivLU<ComplexMatrix> lu_;
};

// max_{i,j} |R_ij|
double coeffNorm(const Resolvent& R);
double coeffNorm(const ComplexMatrix& R);

// max-norm of R(z)^* - R(conj z), both from direct solves.
double conjugateSymmetryResidual(const HermitianMatrix& W, const ComplexEnergy& z);

// Principal submatrix with the given (0-based) rows and columns removed.
HermitianMatrix minor(const HermitianMatrix& W, std::span<const std::size_t> removedIndices);

struct InterlacingReport {
    bool holds = false;
    // max over i of lambda_i(full) - lambda_i(minor) and
    // lambda_i(minor) - lambda_{i+1}(full); positive means violated.
    double maxViolation = 0.0;
};

InterlacingReport checkInterlacing(const Spectrum& full, const Spectrum& minorSpectrum, double tolerance = 1e-9);

// |R_ii - 1/(W_ii - z - X^* R^{(i)} X)| with X the i-th column of W minus
// its diagonal entry and R^{(i)} the resolvent of the minor without i.
double schurDiagonal(const HermitianMatrix& W, const ComplexEnergy& z, std::size_t i);

// |R_ij + R_ii R^{(i)}_jj K| with K = W_ij - X_i^* (W^{(ij)} - z)^{-1} X_j.
double schurOffDiagonal(const HermitianMatrix& W, const ComplexEnergy& z, std::size_t i, std::size_t j);

/// Hermitian rank <= 2 matrix with unit-modulus entries:
/// e_a e_a^*, e_a e_b^* + e_b e_a^*, or i e_a e_b^* - i e_b e_a^*.
class ElementaryMatrix {
public:
    enum class Form { Diagonal, SymmetricPair, AntisymmetricPair };

    static ElementaryMatrix diagonal(std::size_t a);
    static ElementaryMatrix symmetricPair(std::size_t a, std::size_t b);
    static ElementaryMatrix antisymmetricPair(std::size_t a, std::size_t b);

    Form form() const { return form_; }
    std::size_t a() const { return a_; }
    std::size_t b() const { return b_; }
    std::size_t rank() const { return form_ == Form::Diagonal ? 1 : 2; }

    // V = U S U^* with U the selected basis columns.
    Eigen::Matrix2cd coupling() const;
    ComplexMatrix dense(std::size_t n) const;

private:
    ElementaryMatrix(Form form, std::size_t a, std::size_t b) : form_(form), a_(a), b_(b) {}
    Form form_;
    std::size_t a_;
    std::size_t b_;
};

struct PerturbationSeries {
    Complex seriesEstimate;
    Complex exact;
    // c_1 .. c_m
    std::vector<Complex> coefficients;
    double error = 0.0;
};

// s_t = (1/n) tr (M0 + tV - z)^{-1} against s_0 + sum_{j<=m} n^{-j/2} c_j t^j,
// c_j = (-1)^j n^{j/2-1} tr(R_0 (V R_0)^j).
PerturbationSeries perturbSeries(const HermitianMatrix& M0, const ElementaryMatrix& V, double t,
                                 const ComplexEnergy& z, int m);

struct QuadraticFormStat {
    Complex value;
    double modulus = 0.0;
};

// (X^* A X - sigma^2 tr A) / (sigma^2 sqrt(tr A^* A)).
QuadraticFormStat quadraticFormStat(const ComplexVector& X, const ComplexMatrix& A, double sigmaSq);

// |pi_V X|^2 for V spanned by orthonormal columns of basis.
double subspaceProjectionNorm(const ComplexVector& X, const ComplexMatrix& basis);

struct LocalLawResidual {
    double stieltjesGap = 0.0;  // |s_W(z) - s_sc(z)|
    double diagonalGap = 0.0;   // max_i |R_ii - s_sc(z)|
};

LocalLawResidual localLawResidual(const HermitianMatrix& W, const ComplexEnergy& z);

// N_I / (n |I|) for bounded I of positive length.
double crudeCountRatio(const Spectrum& spec, const Interval& I);

}  // namespace wignerlab
