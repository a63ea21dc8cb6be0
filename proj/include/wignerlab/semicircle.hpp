#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace wignerlab {

/// Spectral parameter z = E + i eta in the upper half-plane.
class ComplexEnergy {
public:
    // Throws invalid-arguments unless eta > 0.
    ComplexEnergy(double E, double eta);

    double E() const { return E_; }
    double eta() const { return eta_; }
    std::complex<double> z() const { return {E_, eta_}; }

private:
    double E_;
    double eta_;
};

// Semicircle density (1/2pi) sqrt((4 - x^2)_+).
double rhoSc(double x);

// Closed-form distribution function of rhoSc.
double semicircleCdf(double x);

/// gamma[i-1] solves semicircleCdf(gamma) = i/n; gamma[n-1] == 2.
struct ClassicalLocationTable {
    std::size_t n = 0;
    std::vector<double> gamma;

    double operator[](std::size_t i) const { return gamma[i]; }
};

ClassicalLocationTable classicalLocations(std::size_t n);

// Semicircle quantile by 60-step bisection on [-2, 2].
double semicircleQuantile(double p);

// Two-column CSV "index,gamma" with 1-based indices.
void writeClassicalLocationsCsv(std::ostream& os, const ClassicalLocationTable& table);

// Stieltjes transform of the semicircle law, (-z + sqrt(z^2 - 4)) / 2 on the
// branch asymptotic to z at infinity.
std::complex<double> sSc(const ComplexEnergy& z);

// |s + 1/(s + z)|; throws singular-input when s + z == 0.
double selfConsistentResidual(std::complex<double> s, const ComplexEnergy& z);

}  // namespace wignerlab
