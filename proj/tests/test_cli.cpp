#include <doctest.h>

#include "elsaa/cli.hpp"
#include "elsaa/error.hpp"
#include "elsaa/random.hpp"
#include "testing.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace elsaa;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "elsaa");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// key=value lines of a successful interval printout.
std::map<std::string, std::string> fields(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("elsaa_cli_test_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string normal_csv(std::uint64_t seed, std::size_t n, bool header = true) {
    RandomSource src(seed);
    std::ostringstream s;
    s.precision(17);
    if (header) s << "xi\n";
    for (std::size_t i = 0; i < n; ++i) s << src.standard_normal() << '\n';
    return s.str();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("sample CSV parsing") {
    const auto with_header = parse_samples_csv("a,b\n1,2\n3, 4\n\n5,6e-1\n");
    CHECK(with_header.rows() == 3);
    CHECK(with_header.cols() == 2);
    CHECK(with_header(2, 1) == 0.6);
    CHECK(parse_samples_csv("1\n2\n").rows() == 2);
    CHECK_THROWS_AS(parse_samples_csv("1,2\n3\n"), DataError);
    CHECK_THROWS_AS(parse_samples_csv("x\n1\ny\n"), DataError);
    CHECK_THROWS_AS(parse_samples_csv("x\n"), DataError);
    CHECK_THROWS_AS(parse_samples_csv("2,3\n1,\n"), DataError);
    CHECK_THROWS_AS(parse_samples_csv("1\nnan\n"), DataError);
}

TEST_CASE("ci-value prints an ordered, reproducible interval") {
    TempDir dir;
    const auto data = dir.write("s.csv", normal_csv(1, 60));
    const auto a = run({"ci-value", "--problem", "quadratic", "--data", data, "--beta", "0.05", "--method", "el"});
    REQUIRE(a.code == kExitOk);
    CHECK(a.err.empty());
    const auto kv = fields(a.out);
    REQUIRE(kv.count("lower"));
    REQUIRE(kv.count("upper"));
    CHECK(std::stod(kv.at("lower")) <= std::stod(kv.at("upper")));
    CHECK(kv.at("method") == "EL");
    CHECK(kv.at("df") == "2");
    CHECK(kv.count("max_side_iterations") == 1);
    // Four decimals by default.
    CHECK(kv.at("lower").size() - kv.at("lower").find('.') == 5);
    const auto b = run({"ci-value", "--problem", "quadratic", "--data", data, "--beta", "0.05", "--method", "el"});
    CHECK(a.out == b.out);

    const auto clt = run({"ci-value", "--data", data, "--method", "CLT", "--precision", "6"});
    REQUIRE(clt.code == kExitOk);
    CHECK(fields(clt.out).at("lower").size() - fields(clt.out).at("lower").find('.') == 7);
}

TEST_CASE("CLT2 on three rows is a data error") {
    TempDir dir;
    const auto data = dir.write("three.csv", "0.1\n0.5\n-0.3\n");
    const auto r = run({"ci-value", "--data", data, "--method", "clt2"});
    CHECK(r.code == kExitData);
    CHECK(r.out.empty());
    CHECK(r.err.find("at least 4") != std::string::npos);
}

TEST_CASE("ci-gap") {
    TempDir dir;
    const auto data = dir.write("g.csv", "-1\n0.25\n2\n0.75\n");
    // The SAA optimum of these four points is their mean 0.5.
    const auto srp = run({"ci-gap", "--data", data, "--method", "srp", "--solution", "0.5"});
    REQUIRE(srp.code == kExitOk);
    const auto kv = fields(srp.out);
    CHECK(std::stod(kv.at("lower")) == 0.0);
    CHECK(std::stod(kv.at("upper")) >= 0.0);

    const auto wrong = run({"ci-gap", "--data", data, "--method", "srp", "--solution", "0.5,0.5"});
    CHECK(wrong.code == kExitUsage);
    CHECK(wrong.err.find("decision dimension") != std::string::npos);

    const auto not_number = run({"ci-gap", "--data", data, "--solution", "half"});
    CHECK(not_number.code == kExitUsage);
    CHECK(not_number.err.find("not a number") != std::string::npos);

    const auto clt = run({"ci-gap", "--data", data, "--method", "clt", "--solution", "0.5"});
    CHECK(clt.code == kExitUsage);

    const auto missing = run({"ci-gap", "--data", data});
    CHECK(missing.code == kExitUsage);
}

TEST_CASE("EL gap interval at 0.62 brackets the true gap on most datasets") {
    TempDir dir;
    int bracketed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = dir.write("d" + std::to_string(seed) + ".csv", normal_csv(100 + seed, 100));
        const auto r = run({"ci-gap", "--data", data, "--method", "el", "--solution", "0.62"});
        REQUIRE(r.code == kExitOk);
        const auto kv = fields(r.out);
        const double lo = std::stod(kv.at("lower")), hi = std::stod(kv.at("upper"));
        CHECK(lo <= hi);
        bracketed += lo <= 0.3844 && 0.3844 <= hi ? 1 : 0;
    }
    CHECK(bracketed >= 7);
}

TEST_CASE("data errors have distinct messages") {
    TempDir dir;
    const auto missing = run({"ci-value", "--data", dir.file("absent.csv")});
    CHECK(missing.code == kExitData);
    CHECK(missing.err.find("cannot open") != std::string::npos);

    const auto malformed = run({"ci-value", "--data", dir.write("bad.csv", "1\n2\nthree\n")});
    CHECK(malformed.code == kExitData);
    CHECK(malformed.err.find("malformed") != std::string::npos);

    const auto shape = run({"ci-value", "--problem", "portfolio", "--data", dir.write("one.csv", "1\n2\n3\n")});
    CHECK(shape.code == kExitData);
    CHECK(shape.err.find("columns") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"ci-value"}).code == kExitUsage);
    CHECK(run({"ci-value", "--data", "x.csv", "--bogus"}).code == kExitUsage);
    CHECK(run({"ci-value", "--data", "x.csv", "--beta", "abc"}).code == kExitUsage);
    TempDir dir;
    const auto data = dir.write("s.csv", normal_csv(2, 10));
    CHECK(run({"ci-value", "--data", data, "--method", "bootstrap"}).code == kExitUsage);
    CHECK(run({"ci-value", "--data", data, "--method", "srp"}).code == kExitUsage);
    CHECK(run({"ci-value", "--data", data, "--beta", "1.5"}).code == kExitUsage);
    CHECK(run({"ci-value", "--data", data, "--problem", "newsvendor"}).code == kExitUsage);
    const auto help = run({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("ci-value") != std::string::npos);
}

TEST_CASE("infeasible sample problem is a solver failure") {
    TempDir dir;
    // Both assets return less than the floor r_b = 1 in every observation.
    const auto data = dir.write("low.csv", "0.1,0.2\n0.3,0.1\n0.2,0.4\n0.0,0.3\n0.5,0.2\n");
    const auto r = run({"ci-value", "--problem", "portfolio", "--data", data, "--method", "clt"});
    CHECK(r.code == kExitSolver);
    CHECK(r.err.find("solver failure") != std::string::npos);
    const auto el = run({"ci-value", "--problem", "portfolio", "--data", data});
    CHECK(el.code == kExitSolver);
}

TEST_CASE("problem overrides and spec files") {
    TempDir dir;
    const auto data = dir.write("s.csv", normal_csv(3, 40));
    const auto a = run({"ci-value", "--problem", "cvar", "--data", data, "--method", "clt"});
    const auto b = run({"ci-value", "--problem", "cvar", "--alpha", "0.5", "--data", data, "--method", "clt"});
    REQUIRE(a.code == kExitOk);
    REQUIRE(b.code == kExitOk);
    CHECK(a.out != b.out);
    const auto spec = dir.write("spec.json", R"({"problem": "cvar", "alpha": 0.5})");
    const auto c = run({"ci-value", "--config", spec, "--data", data, "--method", "clt"});
    CHECK(c.out == b.out);
    const auto bad = dir.write("bad.json", R"({"problem": "cvar", "alpha": 2, "colour": 1})");
    const auto d = run({"ci-value", "--config", bad, "--data", data});
    CHECK(d.code == kExitUsage);
    CHECK(d.err.find("colour") != std::string::npos);
}

TEST_CASE("problems-list") {
    const auto r = run({"problems-list"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("quadratic") != std::string::npos);
    CHECK(r.out.find("cvar") != std::string::npos);
    CHECK(r.out.find("portfolio") != std::string::npos);
}

TEST_CASE("bench") {
    TempDir dir;
    const auto cfg = dir.write("t1.json", R"({"problem": "quadratic", "experiment": "value",
        "sample_sizes": [10, 50, 100], "replications": 4, "methods": ["el", "clt", "clt2"], "seed": 3})");
    const auto prefix = dir.file("t1");
    const auto a = run({"bench", "--config", cfg, "--output", prefix});
    REQUIRE(a.code == kExitOk);
    CHECK(a.out.find("truth=1") == 0);
    const std::string csv = slurp(prefix + ".csv");
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 10);
    CHECK(csv.rfind("method,n,coverage,mean_lower,mean_upper,mean_width,sd_width,failures\n", 0) == 0);
    CHECK(fs::exists(prefix + ".md"));
    const std::string records = slurp(prefix + "_records.csv");

    const auto again = run({"bench", "--config", cfg, "--output", prefix, "--jobs", "3"});
    REQUIRE(again.code == kExitOk);
    CHECK(slurp(prefix + ".csv") == csv);
    CHECK(slurp(prefix + "_records.csv") == records);

    const auto reseeded = run({"bench", "--config", cfg, "--output", prefix, "--seed", "4"});
    REQUIRE(reseeded.code == kExitOk);
    const std::string other = slurp(prefix + "_records.csv");
    CHECK(other != records);
    CHECK(other.substr(0, other.find('\n')) == records.substr(0, records.find('\n')));
    CHECK(std::count(other.begin(), other.end(), '\n') == std::count(records.begin(), records.end(), '\n'));

    const auto bad = dir.write("bad.json", R"({"problem": "quadratic", "replications": 0, "sample_size": [5]})");
    const auto b = run({"bench", "--config", bad, "--output", prefix});
    CHECK(b.code == kExitUsage);
    CHECK(b.err.find("sample_size") != std::string::npos);
    CHECK(b.err.find("replications") != std::string::npos);
}

} // TEST_SUITE
