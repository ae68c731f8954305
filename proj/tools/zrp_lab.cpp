// Command-line front end: one subcommand per experiment kind, plus `plot` and `schema`.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zrp/harness.hpp"

using json = nlohmann::json;

namespace {

struct KindOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    bool check_only = false;
    bool plots = false;
    std::optional<int> N, d, ensemble;
    std::optional<double> alpha, chi, level, t_fin;
    std::optional<std::string> profile, output;
    std::optional<std::uint64_t> seed;
    std::vector<double> eps;
};

int execute(const std::string& kind, const KindOptions& o) {
    json j = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) {
            std::cerr << "cannot read config " << o.config_path << '\n';
            return 2;
        }
        j = json::parse(in, nullptr, true, true);
    }
    j["kind"] = kind;
    if (o.N) j["N"] = *o.N;
    if (o.d) j["d"] = *o.d;
    if (o.ensemble) j["ensemble"] = *o.ensemble;
    if (o.alpha) j["alpha"] = *o.alpha;
    if (o.chi) j["chi"] = *o.chi;
    if (o.level) j["level"] = *o.level, j.erase("profile");
    if (o.profile) j["profile"] = *o.profile, j.erase("level");
    if (o.t_fin) j["t_fin"] = *o.t_fin;
    if (o.output) j["output_dir"] = *o.output;
    if (o.seed) j["seed"] = *o.seed;
    if (!o.eps.empty()) j["eps"] = o.eps;
    try {
        for (const auto& a : o.overrides) zrp::apply_override(j, a);
        auto config = zrp::ExperimentConfig::from_json(j);
        zrp::apply_environment(config);
        auto violations = config.validate();
        if (!violations.empty()) throw zrp::ConfigError(violations);
        if (o.check_only) {
            std::cout << "config ok, hash " << config.hash() << '\n';
            return 0;
        }
        auto manifest = zrp::run(config);
        std::cout << manifest.to_json().dump(2) << '\n';
        if (o.plots) {
            auto plots = zrp::emit_plots(manifest);
            for (const auto& f : plots.files) std::cout << "plot " << f << '\n';
            for (const auto& n : plots.notices) std::cerr << "notice: " << n << '\n';
        }
        if (manifest.checks_passed && !*manifest.checks_passed) return 1;
        if (manifest.partial) return 3;
        return 0;
    } catch (const zrp::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zrp-lab: rescaled zero-range process experiments"};
    app.require_subcommand(1);
    std::vector<std::pair<std::string, std::string>> kinds{
        {"simulate", "run kinetic Monte Carlo trajectories and record observables"},
        {"hydro-compare", "compare particle density profiles with the PDE solution"},
        {"exact-checks", "brute-force checks on an enumerated particle sector"},
        {"orlicz-audit", "construct the Young function and run the Orlicz inequality campaigns"},
        {"multiscale-report", "partition family, lambda schedule and telescoping report"},
        {"pme-solve", "solve the porous medium equation on a grid"}};
    std::vector<KindOptions> options(kinds.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        auto* sub = app.add_subcommand(kinds[i].first, kinds[i].second);
        auto& o = options[i];
        sub->add_option("-c,--config", o.config_path, "JSON config file");
        sub->add_option("--set", o.overrides, "override a config key, key=value (JSON value)");
        sub->add_flag("--check", o.check_only, "validate the configuration only");
        sub->add_flag("--plots", o.plots, "emit SVG plots after the run");
        sub->add_option("--N", o.N, "lattice side");
        sub->add_option("--d", o.d, "dimension");
        sub->add_option("--alpha", o.alpha, "rate exponent");
        sub->add_option("--chi", o.chi, "particle mass");
        sub->add_option("--level", o.level, "constant density");
        sub->add_option("--profile", o.profile, "density profile expression");
        sub->add_option("--t-fin", o.t_fin, "final time");
        sub->add_option("--ensemble", o.ensemble, "trajectory count");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--eps", o.eps, "window radii");
        sub->add_option("-o,--output", o.output, "output directory");
        subs.push_back(sub);
    }
    std::string manifest_path;
    auto* plot = app.add_subcommand("plot", "emit SVG plots from a finished run");
    plot->add_option("manifest", manifest_path, "manifest.json of the run")->required();
    auto* schema = app.add_subcommand("schema", "print the config schema");

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) return execute(kinds[i].first, options[i]);
    if (schema->parsed()) {
        std::cout << zrp::config_schema().dump(2) << '\n';
        return 0;
    }
    if (plot->parsed()) {
        std::ifstream in(manifest_path);
        if (!in) {
            std::cerr << "cannot read " << manifest_path << '\n';
            return 2;
        }
        auto manifest = zrp::RunManifest::from_json(json::parse(in));
        auto out = zrp::emit_plots(manifest);
        for (const auto& f : out.files) std::cout << "plot " << f << '\n';
        for (const auto& n : out.notices) std::cerr << "notice: " << n << '\n';
        return out.files.empty() ? 1 : 0;
    }
    return 0;
}
