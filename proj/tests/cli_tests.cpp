#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

struct Sandbox {
    fs::path root;
    Sandbox() {
        std::random_device rd;
        root = fs::temp_directory_path() / ("wl-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(root);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }

    // Runs the CLI with the cache rooted inside the sandbox.
    Run cli(const std::string& args) const {
        const std::string cmd = "cd '" + root.string() + "' && WIGNERLAB_CACHE_DIR='" + (root / "cache").string() +
                                "' '" WIGNERLAB_CLI_PATH "' " + args + " 2>&1";
        Run r;
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        char buf[4096];
        std::size_t got;
        while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
        const int status = pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return r;
    }

    std::string read(const fs::path& rel) const {
        std::ifstream in(root / rel, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    void write(const fs::path& rel, const std::string& text) const { std::ofstream(root / rel, std::ios::binary) << text; }
};

std::size_t dataRows(const std::string& csv) {
    const auto header = csv.find("index,lambda\n");
    if (header == std::string::npos) return 0;
    std::size_t rows = 0;
    for (auto pos = csv.find('\n', header) + 1; pos < csv.size(); pos = csv.find('\n', pos) + 1) {
        if (pos == 0) break;
        ++rows;
    }
    return rows;
}

}  // namespace

TEST_CASE("sample writes a sorted spectrum and reruns identically") {
    Sandbox box;
    const auto a = box.cli("sample -n 4 --seed 11 --out a");
    REQUIRE(a.code == 0);
    const auto spectrum = box.read("a/spectrum.csv");
    CHECK(dataRows(spectrum) == 4);
    CHECK(box.cli("sample -n 4 --seed 11 --out b").code == 0);
    CHECK(box.read("b/spectrum.csv") == spectrum);
    CHECK(box.read("b/matrix.csv") == box.read("a/matrix.csv"));
    CHECK(box.cli("sample -n 4 --seed 12 --out c").code == 0);
    CHECK(box.read("c/spectrum.csv") != spectrum);

    CHECK(box.cli("sample -n 4 --seed 11 --out a").code == 0);
    CHECK(fs::exists(box.root / "a" / "spectrum-1.csv"));
}

TEST_CASE("exit codes") {
    Sandbox box;
    const auto zero = box.cli("sample -n 0");
    CHECK(zero.code == 2);
    CHECK(zero.output.find("error: invalid-dimension") != std::string::npos);

    const auto missing = box.cli("experiment --config nowhere.json");
    CHECK(missing.code == 1);
    CHECK(missing.output.find("config-not-found") != std::string::npos);

    CHECK(box.cli("experiment --kind bogus").code == 2);
    CHECK(box.cli("frobnicate").code == 2);
    CHECK(box.cli("").code == 2);

    box.write("bad.json", "{\"kind\": ");
    CHECK(box.cli("experiment --config bad.json").code == 2);
    box.write("neg.json", "{\"kind\": \"swap\", \"k\": 3}");
    const auto odd = box.cli("experiment --config neg.json");
    CHECK(odd.code == 2);
    CHECK(odd.output.find("error: invalid-arguments") != std::string::npos);

    CHECK(box.cli("sample -n 3 --ensemble wishart").code == 2);
    CHECK(box.cli("sample -n 3 --out /proc/forbidden").code == 1);
}

TEST_CASE("identities suite passes") {
    Sandbox box;
    const auto r = box.cli("experiment --kind identities -n 30 --out out");
    CHECK(r.code == 0);
    const auto summary = nlohmann::json::parse(box.read("out/identities.json"));
    CHECK(summary["results"]["passed"] == true);
    CHECK(summary["config"]["dims"] == nlohmann::json::array({30}));
}

TEST_CASE("summary reruns reproduce the CSV bytes") {
    Sandbox box;
    box.write("tail.json", R"({"kind": "tail", "n": 40, "trials": 20, "masterSeed": 3})");
    REQUIRE(box.cli("experiment --config tail.json --out first --plots --workers 1").code == 0);
    CHECK(fs::exists(box.root / "first" / "tail_tail.svg"));
    REQUIRE(box.cli("experiment --config first/tail.json --out second --workers 2").code == 0);
    CHECK(box.read("second/tail_tail.csv") == box.read("first/tail_tail.csv"));
    const auto a = nlohmann::json::parse(box.read("first/tail.json"));
    const auto b = nlohmann::json::parse(box.read("second/tail.json"));
    CHECK(a == b);
    CHECK(a["config"]["n"] == 40);
    CHECK(a["config"]["interval"] == nlohmann::json::array({-1.0, 1.0}));
}

TEST_CASE("variance summary schema") {
    Sandbox box;
    REQUIRE(box.cli("experiment --kind variance -n 50 --out v --workers 1 --seed 5").code == 0);
    box.write("small.json", R"({"kind": "variance", "n": 50, "trials": 30})");
    REQUIRE(box.cli("experiment --config small.json --out w").code == 0);
    const auto j = nlohmann::json::parse(box.read("w/variance.json"));
    for (const char* key : {"varianceEstimate", "referenceValue", "ratio"}) CHECK(j["results"].contains(key));
    CHECK(j["config"]["trials"] == 30);
}

TEST_CASE("cache listing") {
    Sandbox box;
    const auto empty = box.cli("cache");
    CHECK(empty.code == 0);
    CHECK(empty.output == "0 entries\n");

    REQUIRE(box.cli("sample -n 5 --out s").code == 0);
    const auto one = box.cli("cache --verify");
    CHECK(one.code == 0);
    CHECK(one.output.find("1 entry, verified\n") != std::string::npos);

    fs::path entry;
    for (const auto& f : fs::directory_iterator(box.root / "cache")) entry = f.path();
    REQUIRE_FALSE(entry.empty());
    std::string text = box.read(entry);
    text[text.size() - 3] ^= 0x01;
    box.write(entry, text);

    const auto bad = box.cli("cache");
    CHECK(bad.code == 0);
    CHECK(bad.output.find(" corrupt") != std::string::npos);
    CHECK(fs::exists(entry));
    CHECK(box.cli("cache --verify").code == 1);
    const auto pruned = box.cli("cache --prune");
    CHECK(pruned.output.find("pruned 1 entry") != std::string::npos);
    CHECK(pruned.output.find("0 entries") != std::string::npos);
    CHECK_FALSE(fs::exists(entry));
}
