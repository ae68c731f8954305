#include <doctest.h>
#include <stdexcept>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "zrp/harness.hpp"

using namespace zrp;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("zrp-harness-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> records(const fs::path& dir) {
    std::vector<json> out;
    std::ifstream in(dir / "metrics.jsonl");
    for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
    return out;
}

}  // namespace

TEST_SUITE("harness") {
    TEST_CASE("config round trip and hash") {
        ExperimentConfig c;
        c.kind = ExperimentKind::HydroCompare;
        c.profile = "1 + 0.5*sin(2*pi*x)";
        c.eps = {0.05, 0.1};
        auto back = ExperimentConfig::from_json(c.to_json());
        CHECK(back.to_json() == c.to_json());
        CHECK(back.hash() == c.hash());
        CHECK(c.hash().size() == 16);
        auto moved = c;
        moved.output_dir = "elsewhere";
        moved.workers = 7;
        CHECK(moved.hash() == c.hash());
        moved.seed = 2;
        CHECK(moved.hash() != c.hash());
        for (const auto& kind : {"simulate", "hydro-compare", "exact-checks", "orlicz-audit", "multiscale-report", "pme-solve"})
            CHECK(to_string(parse_kind(kind)) == kind);
        CHECK_THROWS(parse_kind("bogus"));
    }

    TEST_CASE("unknown keys and bad values") {
        json j{{"kind", "simulate"}, {"level", 1.0}, {"Nn", 4}};
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
        json bad{{"kind", "simulate"}, {"N", 1}, {"chi", -1.0}, {"t_fin", 0.0}, {"observables", json::array({"mass", "nope"})}};
        auto c = ExperimentConfig::from_json(bad);
        auto v = c.validate();
        CHECK(v.size() >= 5);  // N, chi, t_fin, observable, missing level
        auto has = [&](const std::string& s) {
            return std::any_of(v.begin(), v.end(), [&](const std::string& m) { return m.find(s) != std::string::npos; });
        };
        CHECK(has("N must"));
        CHECK(has("chi"));
        CHECK(has("t_fin"));
        CHECK(has("nope"));
        CHECK(has("level or profile"));
        json wrong_type{{"kind", "simulate"}, {"N", "many"}};
        CHECK_THROWS_AS(ExperimentConfig::from_json(wrong_type), ConfigError);
    }

    TEST_CASE("overrides and environment") {
        json j{{"kind", "pme-solve"}};
        apply_override(j, "N=64");
        apply_override(j, "profile=1+x");
        apply_override(j, "eps=[0.1,0.2]");
        CHECK(j["N"] == 64);
        CHECK(j["profile"] == "1+x");
        CHECK(j["eps"].size() == 2);
        CHECK_THROWS(apply_override(j, "novalue"));
        auto c = ExperimentConfig::from_json(j);
        ::setenv("ZRP_WORKERS", "3", 1);
        ::setenv("ZRP_OUTPUT_DIR", "/tmp/zrp-env-out", 1);
        apply_environment(c);
        ::unsetenv("ZRP_WORKERS");
        ::unsetenv("ZRP_OUTPUT_DIR");
        CHECK(c.workers == 3);
        CHECK(c.output_dir == "/tmp/zrp-env-out");
        CHECK(config_schema().contains("N"));
    }

    TEST_CASE("parallel_for covers every index and rethrows") {
        std::vector<int> hit(100, 0);
        parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
        for (int h : hit) CHECK(h == 1);
        CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
            if (i == 7) throw std::runtime_error("boom");
        }));
    }

    TEST_CASE("exact checks pass on a small sector") {
        ExperimentConfig c;
        c.kind = ExperimentKind::ExactChecks;
        c.d = 1;
        c.N = 3;
        c.particles = 3;
        c.alpha = 2.0;
        c.chi = 0.5;
        c.densities = 20;
        c.potentials = 5;
        c.output_dir = scratch("exact").string();
        auto m = run(c);
        REQUIRE(m.checks_passed.has_value());
        CHECK(*m.checks_passed);
        CHECK(m.failed_checks.empty());
        auto summary = json::parse(slurp(fs::path(c.output_dir) / "summary.json"));
        CHECK(summary["config_hash"] == c.hash());
        for (const auto& r : records(c.output_dir)) CHECK(r["config_hash"] == c.hash());
    }

    TEST_CASE("tiny final time gives zero events") {
        ExperimentConfig c;
        c.kind = ExperimentKind::Simulate;
        c.N = 8;
        c.level = 1.0;
        c.t_fin = 1e-300;
        c.ensemble = 1;
        c.observables = {"mass", "max_eta"};
        c.output_dir = scratch("tiny").string();
        auto m = run(c);
        CHECK(m.events == 0);
        CHECK(m.streams == std::vector<std::uint64_t>{0});
        std::map<std::string, std::vector<double>> seen;
        for (const auto& r : records(c.output_dir))
            if (r["record"] == "observation") seen[r["name"].get<std::string>()].push_back(r["value"].get<double>());
        REQUIRE(seen.count("mass"));
        for (const auto& [name, values] : seen)
            for (double v : values) CHECK(v == values.front());
        // files in the manifest exist with the recorded sizes
        for (const auto& f : m.files) CHECK(fs::file_size(fs::path(c.output_dir) / f.path) == f.bytes);
    }

    TEST_CASE("identical configs give byte-identical metrics") {
        ExperimentConfig c;
        c.kind = ExperimentKind::Simulate;
        c.N = 16;
        c.chi = 0.25;
        c.level = 1.0;
        c.t_fin = 0.02;
        c.ensemble = 4;
        c.observables = {"mass", "entropy", "vna"};
        c.eps = {0.125, 0.25};
        c.keep_snapshots = true;
        auto a = c, b = c;
        a.output_dir = scratch("det-a").string();
        a.workers = 1;
        b.output_dir = scratch("det-b").string();
        b.workers = 3;
        run(a);
        run(b);
        CHECK(slurp(fs::path(a.output_dir) / "metrics.jsonl") == slurp(fs::path(b.output_dir) / "metrics.jsonl"));
        // the summary echoes the full config, placement keys included
        auto sa = json::parse(slurp(fs::path(a.output_dir) / "summary.json"));
        auto sb = json::parse(slurp(fs::path(b.output_dir) / "summary.json"));
        sa.erase("config");
        sb.erase("config");
        CHECK(sa == sb);
    }

    TEST_CASE("event cap gives a partial manifest") {
        ExperimentConfig c;
        c.kind = ExperimentKind::Simulate;
        c.N = 16;
        c.chi = 0.25;
        c.level = 2.0;
        c.t_fin = 1.0;
        c.max_events = 50;
        c.output_dir = scratch("partial").string();
        auto m = run(c);
        CHECK(m.partial);
    }

    TEST_CASE("Young function serialization") {
        auto c = construct_phi({{2, 0.5}}, 1.0, 1.5, 1);
        double p = 0;
        auto back = deserialize_young(serialize_young(c.corrected, c.p), &p);
        CHECK(p == c.p);
        for (double u : {0.01, 1.0, 37.0, 1e5}) CHECK(back(u) == doctest::Approx(c.corrected(u)).epsilon(1e-12));
    }

    TEST_CASE("plots") {
        RunManifest empty;
        empty.output_dir = scratch("empty").string();
        fs::create_directories(empty.output_dir);
        std::ofstream(fs::path(empty.output_dir) / "metrics.jsonl").close();
        auto none = emit_plots(empty);
        CHECK(none.files.empty());
        CHECK_FALSE(none.notices.empty());

        ExperimentConfig c;
        c.kind = ExperimentKind::HydroCompare;
        c.N = 32;
        c.chi = 0.25;
        c.alpha = 1.0;
        c.profile = "1 + 0.5*sin(2*pi*x)";
        c.t_fin = 0.01;
        c.samples = 3;
        c.ensemble = 2;
        c.grid = 32;
        c.hydro_tolerance = 10.0;
        c.output_dir = scratch("hydro").string();
        auto m = run(c);
        auto plots = emit_plots(m);
        CHECK_FALSE(plots.files.empty());
        bool distance = false;
        for (const auto& f : plots.files) {
            distance |= f.find("hydro_distance") != std::string::npos;
            CHECK(slurp(f).find("<svg") != std::string::npos);
        }
        CHECK(distance);

        ExperimentConfig o;
        o.kind = ExperimentKind::OrliczAudit;
        o.young_n_max = 8;
        o.cases = 20;
        o.output_dir = scratch("orlicz").string();
        auto mo = run(o);
        CHECK(mo.checks_passed.value_or(false));
        auto po = emit_plots(mo);
        bool young = false;
        for (const auto& f : po.files) young |= f.find("young") != std::string::npos;
        CHECK(young);
    }
}
