#include "wignerlab/emission.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "wignerlab/cache.hpp"
#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"
#include "wignerlab/spectral.hpp"

namespace wignerlab {

namespace fs = std::filesystem;

namespace {

std::string withSuffix(const std::string& stem, std::size_t k) {
    return k == 0 ? stem : stem + "-" + std::to_string(k);
}

void ensureDirectory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create output directory " + dir.string());
}

std::string escapeXml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tickLabel(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// (column xCol, column yCol) pairs of a CSV table with a header line.
std::vector<std::pair<double, double>> columns(const std::string& csv, std::size_t xCol, std::size_t yCol) {
    std::vector<std::pair<double, double>> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (cells.size() <= std::max(xCol, yCol)) continue;
        out.emplace_back(std::stod(cells[xCol]), std::stod(cells[yCol]));
    }
    return out;
}

}  // namespace

std::size_t freeSuffix(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& stemsAndExtensions) {
    for (std::size_t k = 0;; ++k) {
        bool taken = false;
        for (const auto& [stem, ext] : stemsAndExtensions) {
            std::error_code ec;
            if (fs::exists(dir / (withSuffix(stem, k) + ext), ec)) {
                taken = true;
                break;
            }
        }
        if (!taken) return k;
    }
}

std::string renderLineChart(const std::vector<std::pair<double, double>>& points, const ChartOptions& o) {
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double plotW = o.width - left - right, plotH = o.height - top - bottom;

    double xMin = std::numeric_limits<double>::infinity(), xMax = -xMin;
    double yMin = xMin, yMax = -xMin;
    for (const auto& [x, y] : points) {
        if (o.logY && !(y > 0.0)) continue;
        const double yy = o.logY ? std::log10(y) : y;
        xMin = std::min(xMin, x);
        xMax = std::max(xMax, x);
        yMin = std::min(yMin, yy);
        yMax = std::max(yMax, yy);
    }
    const bool empty = !std::isfinite(xMin);
    if (empty) xMin = 0, xMax = 1, yMin = 0, yMax = 1;
    if (o.logY) {
        yMin = std::floor(yMin);
        yMax = std::max(std::ceil(yMax), yMin + 1);
    } else if (yMax == yMin) {
        yMin -= 0.5;
        yMax += 0.5;
    }
    if (xMax == xMin) xMax = xMin + 1;

    auto px = [&](double x) { return left + (x - xMin) / (xMax - xMin) * plotW; };
    auto py = [&](double yy) { return top + (yMax - yy) / (yMax - yMin) * plotH; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
       << "\" viewBox=\"0 0 " << o.width << ' ' << o.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << o.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << escapeXml(o.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plotW << "\" height=\"" << plotH
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    const int xTicks = 5;
    for (int i = 0; i <= xTicks; ++i) {
        const double x = xMin + (xMax - xMin) * i / xTicks;
        os << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(top + plotH) << "\" x2=\"" << fmt(px(x)) << "\" y2=\""
           << fmt(top + plotH + 5) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(top + plotH + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tickLabel(x) << "</text>\n";
    }
    const int yTicks = o.logY ? static_cast<int>(yMax - yMin) : 5;
    for (int i = 0; i <= yTicks; ++i) {
        const double yy = yMin + (yMax - yMin) * i / yTicks;
        const std::string label = o.logY ? "1e" + tickLabel(yy) : tickLabel(yy);
        os << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(py(yy)) << "\" x2=\"" << fmt(left) << "\" y2=\""
           << fmt(py(yy)) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(yy) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    }
    os << "<text x=\"" << fmt(left + plotW / 2) << "\" y=\"" << o.height - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escapeXml(o.xLabel) << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt(top + plotH / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"12\" transform=\"rotate(-90 16 " << fmt(top + plotH / 2) << ")\">" << escapeXml(o.yLabel)
       << "</text>\n";

    std::vector<std::string> segments;
    std::string current;
    for (const auto& [x, y] : points) {
        if (o.logY && !(y > 0.0)) {
            if (!current.empty()) segments.push_back(std::move(current));
            current.clear();
            continue;
        }
        const double yy = o.logY ? std::log10(y) : y;
        if (!current.empty()) current += ' ';
        current += fmt(px(x)) + "," + fmt(py(yy));
    }
    if (!current.empty()) segments.push_back(std::move(current));
    for (const auto& s : segments)
        os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"" << s << "\"/>\n";
    os << "</svg>\n";
    return os.str();
}

std::string renderTailSvg(const std::vector<TailPoint>& curve, const std::string& title) {
    std::vector<std::pair<double, double>> points;
    for (const auto& p : curve) points.emplace_back(p.threshold, p.frequency);
    return renderLineChart(points, {title, "T", "frequency", true});
}

std::vector<fs::path> writeExperimentOutputs(const ExperimentResult& result, const fs::path& outDir, bool plots) {
    ensureDirectory(outDir);
    const std::string kind(kindName(result.config.kind));

    std::vector<std::pair<std::string, std::string>> planned{{kind, ".json"}};
    for (const auto& t : result.tables) {
        const std::string stem = kind + "_" + t.name;
        planned.emplace_back(stem, ".csv");
        if (plots && (t.isTailCurve || t.name == "profile")) planned.emplace_back(stem, ".svg");
    }
    const std::size_t k = freeSuffix(outDir, planned);

    std::vector<fs::path> written;
    const auto jsonPath = outDir / (withSuffix(kind, k) + ".json");
    writeFileAtomic(jsonPath, result.summary.dump(2) + "\n");
    written.push_back(jsonPath);
    for (const auto& t : result.tables) {
        const std::string stem = withSuffix(kind + "_" + t.name, k);
        const auto csvPath = outDir / (stem + ".csv");
        writeFileAtomic(csvPath, t.csv);
        written.push_back(csvPath);
        if (!plots) continue;
        std::string svg;
        if (t.isTailCurve) {
            svg = renderLineChart(columns(t.csv, 0, 1), {kind + " " + t.name, "T", "frequency", true});
        } else if (t.name == "profile") {
            svg = renderLineChart(columns(t.csv, 0, 2), {kind + " mean rescaled deviation", "index", "mean", false});
        } else {
            continue;
        }
        const auto svgPath = outDir / (stem + ".svg");
        writeFileAtomic(svgPath, svg);
        written.push_back(svgPath);
    }
    return written;
}

SampleOutput runSample(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream, const fs::path& outDir,
                       const fs::path& cacheRoot) {
    ensemble.validate();
    const HermitianMatrix raw = sampleWigner(ensemble, n, stream);
    const Spectrum spectrum = eigenvalues(normalize(raw), {false, ResidualKind::TraceMoments});
    ensureDirectory(outDir);

    const std::size_t k = freeSuffix(outDir, {{"matrix", ".csv"}, {"spectrum", ".csv"}});
    SampleOutput out;
    out.cacheKey = spectrumCacheKey(ensemble, n, stream);
    out.matrixFile = outDir / (withSuffix("matrix", k) + ".csv");
    out.spectrumFile = outDir / (withSuffix("spectrum", k) + ".csv");
    std::ostringstream matrix;
    writeMatrixCsv(matrix, raw);
    writeFileAtomic(out.matrixFile, matrix.str());
    writeFileAtomic(out.spectrumFile, spectrumCsv(spectrum, out.cacheKey));
    SpectrumCache(cacheRoot).store(out.cacheKey, spectrum);
    return out;
}

}  // namespace wignerlab
