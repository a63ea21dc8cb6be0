#include "wignerlab/semicircle.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"

namespace wignerlab {

ComplexEnergy::ComplexEnergy(double E, double eta) : E_(E), eta_(eta) {
    if (!(eta > 0.0) || !std::isfinite(eta) || !std::isfinite(E))
        fail(ErrorCode::InvalidArguments, "spectral parameter needs finite E and eta > 0");
}

double rhoSc(double x) {
    const double r = 4.0 - x * x;
    return r > 0.0 ? std::sqrt(r) / (2.0 * std::numbers::pi) : 0.0;
}

double semicircleCdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) +
           std::asin(x / 2.0) / std::numbers::pi;
}

double semicircleQuantile(double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArguments, "quantile level outside [0,1]");
    if (p == 1.0) return 2.0;
    if (p == 0.0) return -2.0;
    double lo = -2.0, hi = 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (semicircleCdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ClassicalLocationTable classicalLocations(std::size_t n) {
    if (n == 0) fail(ErrorCode::InvalidDimension, "classical locations need n >= 1");
    ClassicalLocationTable table;
    table.n = n;
    table.gamma.resize(n);
    const double count = static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) table.gamma[i - 1] = semicircleQuantile(static_cast<double>(i) / count);
    table.gamma[n - 1] = 2.0;
    return table;
}

void writeClassicalLocationsCsv(std::ostream& os, const ClassicalLocationTable& table) {
    os << "index,gamma\n";
    for (std::size_t i = 0; i < table.n; ++i) os << (i + 1) << ',' << formatDouble(table.gamma[i]) << '\n';
}

std::complex<double> sSc(const ComplexEnergy& energy) {
    const std::complex<double> z = energy.z();
    std::complex<double> root;
    if (std::abs(z) > 2.5)
        root = z * std::sqrt(1.0 - 4.0 / (z * z));
    else
        root = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
    return 0.5 * (-z + root);
}

double selfConsistentResidual(std::complex<double> s, const ComplexEnergy& z) {
    const auto denom = s + z.z();
    if (denom == std::complex<double>(0.0, 0.0))
        fail(ErrorCode::SingularInput, "s + z vanishes");
    return std::abs(s + 1.0 / denom);
}

}  // namespace wignerlab
