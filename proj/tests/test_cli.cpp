#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "../tools/cli_commands.hpp"

namespace fs = std::filesystem;
using namespace todalab;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("spectrum command") {
    TempDir tmp("todalab_cli_spectrum");
    auto cfg = write_config(tmp.path, "cfg.json", R"({
        "limits": [1.0],
        "scans": [{"beta": 1.0, "r_values": [100, 200, 400, 800, 1600, 3200, 5000]},
                  {"beta": -1.0, "r_values": [256, 512, 1024, 2048]}],
        "sandwich": [{"r": 10, "beta": -0.5}],
        "divergence_fits": [{"beta": -1.0, "r_values": [64, 128, 256, 512]}]
    })");
    CHECK(cli::cmd_spectrum(cfg, tmp.path / "out") == 0);
    CHECK(fs::exists(tmp.path / "out" / "spectrum_scan.csv"));
    CHECK(fs::exists(tmp.path / "out" / "spectrum_report.json"));
    std::string csv = slurp(tmp.path / "out" / "spectrum_scan.csv");
    CHECK(csv.rfind("r,beta,S,gap\n", 0) == 0);
    std::string rep = slurp(tmp.path / "out" / "spectrum_report.json");
    CHECK(rep.find("\"verdict\": \"converges\"") != std::string::npos);
    CHECK(rep.find("\"verdict\": \"diverges\"") != std::string::npos);
    {
        auto pos = rep.find("\"final_gap\": ");
        REQUIRE(pos != std::string::npos);
        CHECK(std::abs(std::stod(rep.substr(pos + 13))) <= 0.01);
    }

    SUBCASE("empty r list is a usage error") {
        auto bad = write_config(tmp.path, "bad.json",
                                R"({"scans": [{"beta": 1.0, "r_values": []}]})");
        CHECK_THROWS_AS(cli::cmd_spectrum(bad, tmp.path / "out2"), std::invalid_argument);
    }

    SUBCASE("invalid beta domain produces an error cell and nonzero exit") {
        auto bad = write_config(tmp.path, "bad2.json", R"({"limits": [-2.0]})");
        CHECK(cli::cmd_spectrum(bad, tmp.path / "out3") != 0);
        std::string rep = slurp(tmp.path / "out3" / "spectrum_report.json");
        CHECK(rep.find("error") != std::string::npos);
    }
}

TEST_CASE("solve, verify and entropy commands") {
    TempDir tmp("todalab_cli_solve");
    auto cfg = write_config(tmp.path, "solve.json", R"({
        "rank": 3,
        "differential": {"leading": [1.0, 0.0], "zeros": [[0.0, 0.0, 1]]},
        "grid": {"kind": "disc", "radius": 0.9, "h": 0.0416666666666666644},
        "boundary": "flat_like"
    })");
    fs::path sol = tmp.path / "sol";
    REQUIRE(cli::cmd_solve(cfg, sol) == 0);
    CHECK(fs::exists(sol / "meta.json"));
    CHECK(fs::exists(sol / "u_1.csv"));
    CHECK(fs::exists(sol / "u_2.csv"));

    // regression: the frozen baseline residual for this instance is 7.9e-13
    {
        std::string meta = slurp(sol / "meta.json");
        auto pos = meta.find("\"final_residual\": ");
        REQUIRE(pos != std::string::npos);
        double res = std::stod(meta.substr(pos + 18));
        CHECK(res <= 10.0 * 7.9e-13);
    }

    SUBCASE("verify on the solved instance passes for beta = 1") {
        auto vcfg = write_config(tmp.path, "verify.json",
                                 "{\"solution\": \"" + sol.string() +
                                     "\", \"betas\": [1.0], \"heatmaps\": true}");
        CHECK(cli::cmd_verify(vcfg, tmp.path / "ver") == 0);
        CHECK(fs::exists(tmp.path / "ver" / "verify_report.json"));
        CHECK(fs::exists(tmp.path / "ver" / "entropy_beta_1.svg"));
        CHECK(fs::exists(tmp.path / "ver" / "down_ratio_1.svg"));

        // same inputs, same bytes
        CHECK(cli::cmd_verify(vcfg, tmp.path / "ver2") == 0);
        CHECK(slurp(tmp.path / "ver" / "verify_report.json") ==
              slurp(tmp.path / "ver2" / "verify_report.json"));
        CHECK(slurp(tmp.path / "ver" / "entropy_beta_1.svg") ==
              slurp(tmp.path / "ver2" / "entropy_beta_1.svg"));
    }

    SUBCASE("entropy command summarizes bounds") {
        auto ecfg = write_config(tmp.path, "entropy.json",
                                 "{\"solution\": \"" + sol.string() +
                                     "\", \"betas\": [1.0, 2.0], \"write_fields\": true}");
        CHECK(cli::cmd_entropy(ecfg, tmp.path / "ent") == 0);
        CHECK(fs::exists(tmp.path / "ent" / "entropy_report.json"));
        CHECK(fs::exists(tmp.path / "ent" / "entropy_beta_1.csv"));
    }

    SUBCASE("missing solution directory fails") {
        auto vcfg = write_config(tmp.path, "missing.json",
                                 R"({"solution": "/nonexistent/sol", "betas": [1.0]})");
        CHECK_THROWS(cli::cmd_verify(vcfg, tmp.path / "ver3"));
    }

    SUBCASE("corrupted field file is an integrity error") {
        fs::copy(sol, tmp.path / "corrupt", fs::copy_options::recursive);
        std::ofstream(tmp.path / "corrupt" / "u_1.csv") << "nx,ny,h,x0,y0\ngarbage\n";
        auto vcfg = write_config(tmp.path, "corrupt.json",
                                 "{\"solution\": \"" + (tmp.path / "corrupt").string() +
                                     "\", \"betas\": [1.0]}");
        CHECK_THROWS(cli::cmd_verify(vcfg, tmp.path / "ver4"));
    }

    SUBCASE("silently edited field values fail the residual replay") {
        fs::copy(sol, tmp.path / "tampered", fs::copy_options::recursive);
        // bump one interior value; the file still parses
        std::string body = slurp(tmp.path / "tampered" / "u_1.csv");
        std::istringstream in(body);
        std::ostringstream rewritten;
        std::string line;
        int lineno = 0, target = 24;
        while (std::getline(in, line)) {
            if (++lineno == target) {
                auto comma = line.find(',', line.size() / 2);
                line.insert(comma + 1, "0.5"); // prefix digits of a mid-row value
            }
            rewritten << line << '\n';
        }
        std::ofstream(tmp.path / "tampered" / "u_1.csv") << rewritten.str();
        auto vcfg = write_config(tmp.path, "tampered.json",
                                 "{\"solution\": \"" + (tmp.path / "tampered").string() +
                                     "\", \"betas\": [1.0]}");
        CHECK_THROWS_WITH_AS(cli::cmd_verify(vcfg, tmp.path / "ver5"),
                             doctest::Contains("residual"), std::runtime_error);
    }

    SUBCASE("flat instance verifies with extremal flags and no failures") {
        auto fcfg = write_config(tmp.path, "flat.json", R"({
            "rank": 4,
            "differential": {"leading": [1.0, 0.0], "zeros": []},
            "grid": {"kind": "rectangle", "bounds": [-1, 1, -1, 1], "h": 0.0625},
            "boundary": "flat_like"
        })");
        fs::path fsol = tmp.path / "flat_sol";
        REQUIRE(cli::cmd_solve(fcfg, fsol) == 0);
        auto vcfg = write_config(tmp.path, "flat_verify.json",
                                 "{\"solution\": \"" + fsol.string() + "\", \"betas\": [1.0, -0.5]}");
        CHECK(cli::cmd_verify(vcfg, tmp.path / "flat_ver") == 0);
        std::string rep = slurp(tmp.path / "flat_ver" / "verify_report.json");
        CHECK(rep.find("\"extremal_flat\": true") != std::string::npos);
    }

    SUBCASE("bad boundary kind is a usage error") {
        auto bad = write_config(tmp.path, "badb.json", R"({
            "rank": 2,
            "differential": {"leading": [1.0, 0.0], "zeros": []},
            "grid": {"kind": "rectangle", "bounds": [-1, 1, -1, 1], "h": 0.0625},
            "boundary": "sideways"
        })");
        CHECK_THROWS_AS(cli::cmd_solve(bad, tmp.path / "solb"), std::invalid_argument);
    }
}

TEST_CASE("lemma-pq command") {
    TempDir tmp("todalab_cli_lpq");
    auto cfg = write_config(tmp.path, "cfg.json", R"({"r_min": 3, "r_max": 5, "count": 100})");
    CHECK(cli::cmd_lemma_pq(cfg, tmp.path / "a", 42) == 0);
    CHECK(cli::cmd_lemma_pq(cfg, tmp.path / "b", 42) == 0);
    CHECK(slurp(tmp.path / "a" / "lemma_pq_report.json") ==
          slurp(tmp.path / "b" / "lemma_pq_report.json"));
    // different seed, different draws
    CHECK(cli::cmd_lemma_pq(cfg, tmp.path / "c", 43) == 0);
    CHECK(slurp(tmp.path / "a" / "lemma_pq_report.json") !=
          slurp(tmp.path / "c" / "lemma_pq_report.json"));

    SUBCASE("count zero is a vacuous pass with a warning") {
        auto zero = write_config(tmp.path, "zero.json", R"({"r_min": 3, "r_max": 4, "count": 0})");
        CHECK(cli::cmd_lemma_pq(zero, tmp.path / "z", 1) == 0);
        CHECK(slurp(tmp.path / "z" / "lemma_pq_report.json").find("warning") != std::string::npos);
    }
}
