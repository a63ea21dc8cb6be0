#include "wignerlab/wignerlab.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "wignerlab/cache.hpp"
#include "wignerlab/emission.hpp"
#include "wignerlab/ensembles.hpp"
#include "wignerlab/error.hpp"
#include "wignerlab/experiments.hpp"
#include "wignerlab/semicircle.hpp"
#include "wignerlab/spectral.hpp"

struct wl_ensemble {
    wignerlab::EnsembleSpec spec;
};

struct wl_matrix {
    wignerlab::HermitianMatrix m;
};

struct wl_spectrum {
    wignerlab::Spectrum s;
};

struct wl_result {
    wignerlab::ExperimentResult r;
};

namespace {

thread_local std::string lastError;

wl_status toStatus(wignerlab::ErrorCode code) {
    using wignerlab::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidDimension: return WL_INVALID_DIMENSION;
        case ErrorCode::InvalidState: return WL_INVALID_STATE;
        case ErrorCode::UnsupportedOrder: return WL_UNSUPPORTED_ORDER;
        case ErrorCode::InvalidArguments: return WL_INVALID_ARGUMENTS;
        case ErrorCode::OutOfRange: return WL_OUT_OF_RANGE;
        case ErrorCode::DimensionMismatch: return WL_DIMENSION_MISMATCH;
        case ErrorCode::NotHermitian: return WL_NOT_HERMITIAN;
        case ErrorCode::SingularInput: return WL_SINGULAR_INPUT;
        case ErrorCode::IllConditionedEnergy: return WL_ILL_CONDITIONED_ENERGY;
        case ErrorCode::NumericalFailure: return WL_NUMERICAL_FAILURE;
        case ErrorCode::Config: return WL_CONFIG;
        case ErrorCode::NotFound: return WL_NOT_FOUND;
        case ErrorCode::Io: return WL_IO;
        case ErrorCode::Corrupt: return WL_CORRUPT;
    }
    return WL_INTERNAL;
}

template <class F>
wl_status guarded(F&& body) {
    try {
        body();
        lastError.clear();
        return WL_OK;
    } catch (const wignerlab::Error& e) {
        lastError = e.message();
        return toStatus(e.code());
    } catch (const nlohmann::json::exception& e) {
        lastError = e.what();
        return WL_CONFIG;
    } catch (const std::bad_alloc&) {
        lastError = "out of memory";
        return WL_INTERNAL;
    } catch (const std::exception& e) {
        lastError = e.what();
        return WL_INTERNAL;
    } catch (...) {
        lastError = "unknown failure";
        return WL_INTERNAL;
    }
}

wl_status nullArgument(const char* what) {
    lastError = std::string("null argument: ") + what;
    return WL_INVALID_ARGUMENTS;
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::filesystem::path cacheRootOf(const char* dir) {
    return dir && *dir ? std::filesystem::path(dir) : wignerlab::defaultCacheRoot();
}

}  // namespace

extern "C" {

const char* wl_status_name(wl_status status) {
    switch (status) {
        case WL_OK: return "ok";
        case WL_INVALID_DIMENSION: return "invalid-dimension";
        case WL_INVALID_STATE: return "invalid-state";
        case WL_UNSUPPORTED_ORDER: return "unsupported-order";
        case WL_INVALID_ARGUMENTS: return "invalid-arguments";
        case WL_OUT_OF_RANGE: return "out-of-range";
        case WL_DIMENSION_MISMATCH: return "dimension-mismatch";
        case WL_NOT_HERMITIAN: return "not-hermitian";
        case WL_SINGULAR_INPUT: return "singular-input";
        case WL_ILL_CONDITIONED_ENERGY: return "ill-conditioned-energy";
        case WL_NUMERICAL_FAILURE: return "numerical-failure";
        case WL_CONFIG: return "config";
        case WL_NOT_FOUND: return "not-found";
        case WL_IO: return "io";
        case WL_CORRUPT: return "corrupt";
        case WL_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* wl_last_error(void) { return lastError.c_str(); }

void wl_string_free(char* s) { std::free(s); }

wl_status wl_ensemble_builtin(const char* name, wl_ensemble** out) {
    if (!name) return nullArgument("name");
    if (!out) return nullArgument("out");
    return guarded([&] { *out = new wl_ensemble{wignerlab::builtinEnsemble(name)}; });
}

wl_status wl_ensemble_from_json(const char* json, wl_ensemble** out) {
    if (!json) return nullArgument("json");
    if (!out) return nullArgument("out");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json);
        } catch (const nlohmann::json::parse_error& e) {
            wignerlab::fail(wignerlab::ErrorCode::Config, std::string("ensemble JSON: ") + e.what());
        }
        *out = new wl_ensemble{wignerlab::ensembleFromJson(j)};
    });
}

wl_status wl_ensemble_to_json(const wl_ensemble* e, char** out) {
    if (!e) return nullArgument("ensemble");
    if (!out) return nullArgument("out");
    return guarded([&] { *out = duplicate(nlohmann::json(e->spec).dump()); });
}

void wl_ensemble_free(wl_ensemble* e) { delete e; }

wl_status wl_sample(const wl_ensemble* e, size_t n, uint64_t master_seed, uint64_t stream_index, wl_matrix** out) {
    if (!e) return nullArgument("ensemble");
    if (!out) return nullArgument("out");
    return guarded([&] {
        *out = new wl_matrix{wignerlab::sampleWigner(e->spec, n, wignerlab::SeedStream{master_seed, stream_index})};
    });
}

wl_status wl_normalize(const wl_matrix* raw, wl_matrix** out) {
    if (!raw) return nullArgument("matrix");
    if (!out) return nullArgument("out");
    return guarded([&] { *out = new wl_matrix{wignerlab::normalize(raw->m)}; });
}

size_t wl_matrix_dim(const wl_matrix* m) { return m ? m->m.dim() : 0; }

int wl_matrix_is_normalized(const wl_matrix* m) {
    return m && m->m.scale() == wignerlab::MatrixScale::Normalized ? 1 : 0;
}

wl_status wl_matrix_entry(const wl_matrix* m, size_t i, size_t j, double* re, double* im) {
    if (!m) return nullArgument("matrix");
    if (i >= m->m.dim() || j >= m->m.dim()) {
        lastError = "matrix index out of range";
        return WL_OUT_OF_RANGE;
    }
    const auto v = m->m(i, j);
    if (re) *re = v.real();
    if (im) *im = v.imag();
    lastError.clear();
    return WL_OK;
}

void wl_matrix_free(wl_matrix* m) { delete m; }

wl_status wl_eigenvalues(const wl_matrix* m, wl_spectrum** out) {
    if (!m) return nullArgument("matrix");
    if (!out) return nullArgument("out");
    return guarded([&] { *out = new wl_spectrum{wignerlab::eigenvalues(m->m)}; });
}

size_t wl_spectrum_size(const wl_spectrum* s) { return s ? s->s.size() : 0; }

size_t wl_spectrum_values(const wl_spectrum* s, double* values, size_t capacity) {
    if (!s || !values) return 0;
    const auto v = s->s.values();
    const size_t count = std::min(capacity, v.size());
    std::copy_n(v.begin(), count, values);
    return count;
}

size_t wl_spectrum_count(const wl_spectrum* s, double lo, double hi) {
    if (!s || !(lo <= hi)) return 0;
    return wignerlab::countInInterval(s->s, wignerlab::Interval::halfOpen(lo, hi));
}

void wl_spectrum_free(wl_spectrum* s) { delete s; }

double wl_semicircle_density(double x) { return wignerlab::rhoSc(x); }

double wl_semicircle_cdf(double x) { return wignerlab::semicircleCdf(x); }

wl_status wl_classical_location(size_t n, size_t i, double* out) {
    if (!out) return nullArgument("out");
    return guarded([&] {
        if (n == 0) wignerlab::fail(wignerlab::ErrorCode::InvalidDimension, "n must be at least 1");
        if (i < 1 || i > n) wignerlab::fail(wignerlab::ErrorCode::OutOfRange, "index must be in [1, n]");
        *out = i == n ? 2.0 : wignerlab::semicircleQuantile(static_cast<double>(i) / static_cast<double>(n));
    });
}

wl_status wl_semicircle_stieltjes(double energy, double eta, double* re, double* im) {
    return guarded([&] {
        const auto s = wignerlab::sSc(wignerlab::ComplexEnergy(energy, eta));
        if (re) *re = s.real();
        if (im) *im = s.imag();
    });
}

wl_status wl_experiment_run(const char* config_json, unsigned workers, const char* cache_dir, wl_result** out) {
    if (!config_json) return nullArgument("config");
    if (!out) return nullArgument("out");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
            wignerlab::fail(wignerlab::ErrorCode::Config, std::string("config JSON: ") + e.what());
        }
        auto config = wignerlab::configFromJson(j);
        config.workers = workers;
        if (cache_dir) config.cacheDir = cache_dir;
        *out = new wl_result{wignerlab::runExperiment(config)};
    });
}

wl_status wl_result_summary(const wl_result* r, char** out) {
    if (!r) return nullArgument("result");
    if (!out) return nullArgument("out");
    return guarded([&] { *out = duplicate(r->r.summary.dump(2)); });
}

int wl_result_passed(const wl_result* r) { return r && r->r.passed ? 1 : 0; }

wl_status wl_result_write(const wl_result* r, const char* out_dir, int plots) {
    if (!r) return nullArgument("result");
    if (!out_dir) return nullArgument("out_dir");
    return guarded([&] { wignerlab::writeExperimentOutputs(r->r, out_dir, plots != 0); });
}

void wl_result_free(wl_result* r) { delete r; }

wl_status wl_sample_to_dir(const wl_ensemble* e, size_t n, uint64_t master_seed, const char* out_dir,
                           const char* cache_dir) {
    if (!e) return nullArgument("ensemble");
    if (!out_dir) return nullArgument("out_dir");
    return guarded([&] {
        wignerlab::runSample(e->spec, n, wignerlab::SeedStream{master_seed, 0}, out_dir, cacheRootOf(cache_dir));
    });
}

wl_status wl_cache_default_root(char** out) {
    if (!out) return nullArgument("out");
    return guarded([&] { *out = duplicate(wignerlab::defaultCacheRoot().string()); });
}

wl_status wl_cache_list(const char* cache_dir, int verify, char** out) {
    if (!out) return nullArgument("out");
    return guarded([&] {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : wignerlab::SpectrumCache(cacheRootOf(cache_dir)).list(verify != 0))
            entries.push_back({{"key", e.key}, {"file", e.file.string()}, {"status", e.status}, {"detail", e.detail}});
        *out = duplicate(entries.dump());
    });
}

wl_status wl_cache_prune(const char* cache_dir, size_t* removed) {
    return guarded([&] {
        const auto count = wignerlab::SpectrumCache(cacheRootOf(cache_dir)).prune();
        if (removed) *removed = count;
    });
}

}  // extern "C"
