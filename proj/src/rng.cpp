#include "wignerlab/rng.hpp"

#include <cmath>

namespace wignerlab {

double Rng::gaussian() {
    if (spare_) {
        double v = *spare_;
        spare_.reset();
        return v;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
}

}  // namespace wignerlab
