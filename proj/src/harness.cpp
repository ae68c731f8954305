#include "zrp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "zrp/configuration.hpp"
#include "zrp/equilibrium.hpp"
#include "zrp/exact.hpp"
#include "zrp/expression.hpp"
#include "zrp/kmc.hpp"
#include "zrp/multiscale.hpp"
#include "zrp/pme.hpp"
#include "zrp/svg.hpp"

#ifndef ZRP_VERSION
#define ZRP_VERSION "0.0.0"
#endif

namespace zrp {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string code_version() { return ZRP_VERSION; }

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds{
    {ExperimentKind::Simulate, "simulate"},         {ExperimentKind::HydroCompare, "hydro-compare"},
    {ExperimentKind::ExactChecks, "exact-checks"},  {ExperimentKind::OrliczAudit, "orlicz-audit"},
    {ExperimentKind::MultiscaleReport, "multiscale-report"}, {ExperimentKind::PmeSolve, "pme-solve"}};

const std::set<std::string> kObservables{"mass", "particles", "entropy", "max_eta", "entropy_dissipation", "vna"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKinds)
        if (k == kind) return name;
    return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
    for (const auto& [k, n] : kKinds)
        if (n == name) return k;
    throw ConfigError({"unknown experiment kind '" + name + "'"});
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  - " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

json config_schema() {
    return json{{"kind", "string: simulate | hydro-compare | exact-checks | orlicz-audit | multiscale-report | pme-solve"},
                {"d", "integer in [1, 3]"},
                {"N", "integer >= 2"},
                {"alpha", "number > 0 (>= 1 for pme-solve and hydro-compare)"},
                {"chi", "number > 0, particle mass"},
                {"level", "number > 0, constant density (exclusive with profile)"},
                {"profile", "string, density expression in x, y, z on [0,1)^d"},
                {"b", "number > 0, mass bound for the interpolation campaign"},
                {"t_fin", "number > 0"},
                {"rate_scale", "number > 0, 1 = generator convention"},
                {"samples", "integer >= 2, grid points on [0, t_fin]"},
                {"observables", "array of: mass particles entropy max_eta entropy_dissipation vna"},
                {"eps", "array of numbers > 0, window radii"},
                {"truncation", "number > 0, Lipschitz truncation level M"},
                {"family_delta", "number > 0"},
                {"young_delta", "number > 0"},
                {"young_p", "number > 1, default 1 + 1/(2d)"},
                {"young_n_min", "integer >= 2"},
                {"young_n_max", "integer >= young_n_min"},
                {"young_chi_power", "number > 0, chi_N = N^-power"},
                {"particles", "integer >= 0"},
                {"densities", "integer >= 1"},
                {"potentials", "integer >= 1"},
                {"cases", "integer >= 1"},
                {"grid", "integer >= 2, solver cells per axis"},
                {"hydro_tolerance", "number > 0"},
                {"ensemble", "integer >= 1"},
                {"seed", "unsigned integer"},
                {"keep_snapshots", "boolean"},
                {"max_events", "unsigned integer >= 1, per trajectory"},
                {"output_dir", "string"},
                {"workers", "integer >= 1"}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
    std::vector<std::string> errors;
    const json schema = config_schema();
    for (const auto& [key, value] : j.items())
        if (!schema.contains(key)) errors.push_back("unknown key '" + key + "'");
    ExperimentConfig c;
    auto get = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(target);
        } catch (const std::exception&) {
            errors.push_back(std::string("key '") + key + "' has the wrong type (" + schema.at(key).get<std::string>() + ")");
        }
    };
    if (j.contains("kind")) {
        if (!j["kind"].is_string()) errors.push_back("key 'kind' must be a string");
        else {
            try {
                c.kind = parse_kind(j["kind"].get<std::string>());
            } catch (const ConfigError& e) {
                errors.insert(errors.end(), e.violations().begin(), e.violations().end());
            }
        }
    }
    get("d", c.d);
    get("N", c.N);
    get("alpha", c.alpha);
    get("chi", c.chi);
    if (j.contains("level")) {
        double v = 0;
        get("level", v);
        c.level = v;
    }
    if (j.contains("profile")) {
        std::string v;
        get("profile", v);
        c.profile = v;
    }
    get("b", c.b);
    get("t_fin", c.t_fin);
    get("rate_scale", c.rate_scale);
    get("samples", c.samples);
    get("observables", c.observables);
    get("eps", c.eps);
    if (j.contains("truncation")) {
        double v = 0;
        get("truncation", v);
        c.truncation = v;
    }
    get("family_delta", c.family_delta);
    get("young_delta", c.young_delta);
    if (j.contains("young_p")) {
        double v = 0;
        get("young_p", v);
        c.young_p = v;
    }
    get("young_n_min", c.young_n_min);
    get("young_n_max", c.young_n_max);
    get("young_chi_power", c.young_chi_power);
    get("particles", c.particles);
    get("densities", c.densities);
    get("potentials", c.potentials);
    get("cases", c.cases);
    get("grid", c.grid);
    get("hydro_tolerance", c.hydro_tolerance);
    get("ensemble", c.ensemble);
    get("seed", c.seed);
    get("keep_snapshots", c.keep_snapshots);
    get("max_events", c.max_events);
    get("output_dir", c.output_dir);
    get("workers", c.workers);
    if (!errors.empty()) throw ConfigError(errors);
    return c;
}

json ExperimentConfig::to_json() const {
    json j{{"kind", to_string(kind)},
           {"d", d},
           {"N", N},
           {"alpha", alpha},
           {"chi", chi},
           {"b", b},
           {"t_fin", t_fin},
           {"rate_scale", rate_scale},
           {"samples", samples},
           {"observables", observables},
           {"eps", eps},
           {"family_delta", family_delta},
           {"young_delta", young_delta},
           {"young_n_min", young_n_min},
           {"young_n_max", young_n_max},
           {"young_chi_power", young_chi_power},
           {"particles", particles},
           {"densities", densities},
           {"potentials", potentials},
           {"cases", cases},
           {"grid", grid},
           {"hydro_tolerance", hydro_tolerance},
           {"ensemble", ensemble},
           {"seed", seed},
           {"keep_snapshots", keep_snapshots},
           {"max_events", max_events},
           {"output_dir", output_dir},
           {"workers", workers}};
    if (level) j["level"] = *level;
    if (profile) j["profile"] = *profile;
    if (truncation) j["truncation"] = *truncation;
    if (young_p) j["young_p"] = *young_p;
    return j;
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> e;
    const bool dynamic = kind == ExperimentKind::Simulate || kind == ExperimentKind::HydroCompare;
    if (d < 1 || d > kMaxDimension) e.push_back("d must lie in [1, 3]");
    if (N < 2) e.push_back("N must be >= 2");
    if (d >= 1 && d <= kMaxDimension && N >= 2 && std::pow(static_cast<double>(N), d) > static_cast<double>(kMaxSites))
        e.push_back("N^d exceeds the site cap " + std::to_string(kMaxSites));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) e.push_back("alpha must be finite and > 0");
    if ((kind == ExperimentKind::PmeSolve || kind == ExperimentKind::HydroCompare) && !(alpha >= 1.0))
        e.push_back("the PDE solver needs alpha >= 1");
    if (!(chi > 0.0) || !std::isfinite(chi)) e.push_back("chi must be finite and > 0");
    if (kind == ExperimentKind::MultiscaleReport && !(chi < 1.0)) e.push_back("multiscale-report needs chi < 1");
    if (level && profile) e.push_back("give either level or profile, not both");
    if (level && !(*level > 0.0)) e.push_back("level must be > 0");
    if (profile) {
        try {
            auto ex = Expression::parse(*profile);
            std::vector<double> p(std::max(d, 1), 0.25);
            double v = ex(p);
            if (!std::isfinite(v) || v < 0.0) e.push_back("profile must be finite and nonnegative (checked at x = 0.25)");
        } catch (const std::exception& ex) {
            e.push_back(std::string("profile does not parse: ") + ex.what());
        }
    }
    if ((dynamic || kind == ExperimentKind::PmeSolve || kind == ExperimentKind::MultiscaleReport) && !level && !profile)
        e.push_back("this experiment needs level or profile");
    if (!(b > 0.0)) e.push_back("b must be > 0");
    if (!(t_fin > 0.0) || !std::isfinite(t_fin)) e.push_back("t_fin must be finite and > 0");
    if (!(rate_scale > 0.0)) e.push_back("rate_scale must be > 0");
    if (samples < 2) e.push_back("samples must be >= 2");
    for (const auto& o : observables)
        if (!kObservables.count(o)) e.push_back("unknown observable '" + o + "'");
    if (eps.empty()) e.push_back("eps must list at least one window radius");
    for (double v : eps)
        if (!(v > 0.0)) e.push_back("every eps must be > 0");
    if (truncation && !(*truncation > 0.0)) e.push_back("truncation must be > 0");
    if (!(family_delta > 0.0)) e.push_back("family_delta must be > 0");
    if (!(young_delta > 0.0)) e.push_back("young_delta must be > 0");
    if (young_p && !(*young_p > 1.0)) e.push_back("young_p must be > 1");
    if (young_n_min < 2) e.push_back("young_n_min must be >= 2");
    if (young_n_max < young_n_min) e.push_back("young_n_max must be >= young_n_min");
    if (!(young_chi_power > 0.0)) e.push_back("young_chi_power must be > 0");
    if (particles < 0) e.push_back("particles must be >= 0");
    if (kind == ExperimentKind::ExactChecks && particles >= 0 && N >= 2 && d >= 1 && d <= kMaxDimension) {
        double sites = std::pow(static_cast<double>(N), d);
        double states = std::exp(std::lgamma(particles + sites) - std::lgamma(particles + 1.0) - std::lgamma(sites));
        if (states > static_cast<double>(kMaxSectorStates)) e.push_back("sector has more than " + std::to_string(kMaxSectorStates) + " states");
    }
    if (densities < 1) e.push_back("densities must be >= 1");
    if (potentials < 1) e.push_back("potentials must be >= 1");
    if (cases < 1) e.push_back("cases must be >= 1");
    if (grid < 2) e.push_back("grid must be >= 2");
    if (!(hydro_tolerance > 0.0)) e.push_back("hydro_tolerance must be > 0");
    if (ensemble < 1) e.push_back("ensemble must be >= 1");
    if (max_events < 1) e.push_back("max_events must be >= 1");
    if (workers < 1) e.push_back("workers must be >= 1");
    if (output_dir.empty()) e.push_back("output_dir must be nonempty");
    return e;
}

std::string ExperimentConfig::hash() const {
    json j = to_json();
    j.erase("output_dir");
    j.erase("workers");
    std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_override(json& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError({"override '" + assignment + "' is not key=value"});
    std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    config[key] = parsed.is_discarded() ? json(value) : parsed;
}

void apply_environment(ExperimentConfig& config) {
    if (const char* dir = std::getenv("ZRP_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
    if (const char* w = std::getenv("ZRP_WORKERS"); w && *w) {
        char* end = nullptr;
        long v = std::strtol(w, &end, 10);
        if (*end != '\0' || v < 1) throw ConfigError({"ZRP_WORKERS must be a positive integer"});
        config.workers = static_cast<int>(v);
    }
}

json RunManifest::to_json() const {
    json files_j = json::array();
    for (const auto& f : files) files_j.push_back({{"path", f.path}, {"bytes", f.bytes}});
    json j{{"config_hash", config_hash}, {"code_version", code_version}, {"kind", kind},
           {"output_dir", output_dir},   {"streams", streams},           {"files", files_j},
           {"wall_seconds", wall_seconds}, {"events", events},           {"partial", partial},
           {"failed_checks", failed_checks}};
    j["checks_passed"] = checks_passed ? json(*checks_passed) : json(nullptr);
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.kind = j.at("kind").get<std::string>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.streams = j.at("streams").get<std::vector<std::uint64_t>>();
    for (const auto& f : j.at("files")) m.files.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uint64_t>()});
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.events = j.at("events").get<std::uint64_t>();
    m.partial = j.at("partial").get<bool>();
    if (!j.at("checks_passed").is_null()) m.checks_passed = j.at("checks_passed").get<bool>();
    m.failed_checks = j.value("failed_checks", std::vector<std::string>{});
    return m;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (pool <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < pool; ++w)
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                {
                    std::lock_guard lock(guard);
                    if (failure) return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

json serialize_young(const YoungFunction& phi, double p) {
    json nodes = json::array();
    for (const auto& n : phi.nodes()) nodes.push_back({n.u, n.value, n.dleft, n.dright});
    return json{{"format", "zrp-young-function"}, {"version", 1}, {"name", phi.name()}, {"p", p}, {"nodes", nodes}};
}

YoungFunction deserialize_young(const json& j, double* p) {
    if (j.value("format", "") != "zrp-young-function") throw std::invalid_argument("not a serialized Young function");
    std::vector<YoungFunction::Node> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back({n[0].get<double>(), n[1].get<double>(), n[2].get<double>(), n[3].get<double>()});
    if (p) *p = j.at("p").get<double>();
    return YoungFunction::from_nodes(std::move(nodes), j.at("name").get<std::string>());
}

namespace {

/// Single owner of the metrics stream; every record carries the config hash.
class MetricsWriter {
public:
    MetricsWriter(const fs::path& path, const std::string& hash, const std::string& kind) : out_(path), hash_(hash) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        write({{"record", "header"}, {"kind", kind}, {"code_version", code_version()}});
    }
    void write(json j) {
        j["config_hash"] = hash_;
        out_ << j.dump() << '\n';
    }
    void observation(int trajectory, double t, const std::string& name, double value) {
        write({{"record", "observation"}, {"trajectory", trajectory}, {"t", t}, {"name", name}, {"value", value}});
    }
    void series(const std::string& plot, const std::string& label, const std::vector<double>& x, const std::vector<double>& y,
                const std::vector<double>& err = {}) {
        json j{{"record", "series"}, {"plot", plot}, {"label", label}, {"x", x}, {"y", y}};
        if (!err.empty()) j["err"] = err;
        write(j);
    }
    void check(const std::string& name, bool pass, double value, double bound) {
        write({{"record", "check"}, {"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}});
    }

private:
    std::ofstream out_;
    std::string hash_;
};

struct Checks {
    json list = json::array();
    std::vector<std::string> failed;
    void add(MetricsWriter& m, const std::string& name, bool pass, double value, double bound) {
        list.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}});
        m.check(name, pass, value, bound);
        if (!pass) failed.push_back(name);
    }
};

std::vector<double> time_grid(const ExperimentConfig& c) {
    std::vector<double> g(static_cast<std::size_t>(c.samples));
    for (int i = 0; i < c.samples; ++i) g[i] = c.t_fin * i / (c.samples - 1);
    g.back() = c.t_fin;
    return g;
}

std::function<double(const std::vector<double>&)> density_function(const ExperimentConfig& c) {
    if (c.profile) {
        auto ex = std::make_shared<Expression>(Expression::parse(*c.profile));
        return [ex](const std::vector<double>& p) { return (*ex)(p); };
    }
    double a = *c.level;
    return [a](const std::vector<double>&) { return a; };
}

ProductMeasure initial_measure(const ExperimentConfig& c) {
    TorusLattice L(c.d, c.N);
    if (c.profile) return ProductMeasure::profile(L, c.alpha, c.chi, density_function(c));
    return ProductMeasure::constant(L, c.alpha, c.chi, *c.level);
}

std::vector<YoungEntry> young_entries(const ExperimentConfig& c) {
    std::vector<YoungEntry> e;
    for (int n = c.young_n_min; n <= c.young_n_max; ++n) e.push_back({n, std::pow(static_cast<double>(n), -c.young_chi_power)});
    return e;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct Context {
    const ExperimentConfig& config;
    fs::path dir;
    MetricsWriter& metrics;
    json& summary;
    Checks& checks;
    RunManifest& manifest;
};

struct MeanError {
    double mean = 0, error = 0;
};

MeanError mean_error(const std::vector<double>& v) {
    MeanError r;
    if (v.empty()) return r;
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double s = 0;
        for (double x : v) s += (x - r.mean) * (x - r.mean);
        r.error = std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

/// Observables for simulate; vna expands to one entry per window radius.
std::vector<Observable> build_observables(const ExperimentConfig& c) {
    std::vector<Observable> obs;
    const double alpha = c.alpha;
    for (const auto& name : c.observables) {
        if (name == "mass") obs.push_back({"mass", [](const Configuration& e) { return total_mass(e); }});
        else if (name == "particles")
            obs.push_back({"particles", [](const Configuration& e) { return static_cast<double>(e.particle_count()); }});
        else if (name == "entropy") obs.push_back({"entropy", [](const Configuration& e) { return entropy(e); }});
        else if (name == "max_eta")
            obs.push_back({"max_eta", [](const Configuration& e) {
                               return e.chi * static_cast<double>(*std::max_element(e.counts.begin(), e.counts.end()));
                           }});
        else if (name == "entropy_dissipation")
            obs.push_back({"entropy_dissipation", [alpha](const Configuration& e) { return entropy_dissipation_statistic(e, alpha); }});
        else if (name == "vna") {
            for (double eps : c.eps) {
                obs.push_back({"vna[" + num(eps) + "]", [alpha, eps](const Configuration& e) { return vna_snapshot(e, eps, alpha); }});
                if (c.truncation) {
                    double M = *c.truncation;
                    obs.push_back({"vna_truncated[" + num(eps) + "]",
                                   [alpha, eps, M](const Configuration& e) { return vna_snapshot(e, eps, alpha, M); }});
                    obs.push_back({"vna_tail[" + num(eps) + "]",
                                   [alpha, eps, M](const Configuration& e) { return truncation_tail(e, eps, alpha, M); }});
                }
            }
        }
    }
    return obs;
}

std::vector<TrajectoryRecord> run_ensemble(Context& ctx, const std::vector<Observable>& obs, bool keep) {
    const auto& c = ctx.config;
    const auto grid = time_grid(c);
    const ProductMeasure measure = initial_measure(c);
    const RateModel model{c.alpha, c.rate_scale};
    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(c.ensemble));
    std::set<std::uint64_t> streams;
    for (int i = 0; i < c.ensemble; ++i)
        if (!streams.insert(static_cast<std::uint64_t>(i)).second) throw std::logic_error("duplicate RNG stream");
    parallel_for(records.size(), c.workers, [&](std::size_t i) {
        CounterRng rng(c.seed, i);
        Configuration init = measure.sample(rng);
        SimulationOptions opts;
        opts.event_cap = c.max_events;
        opts.keep_snapshots = keep;
        records[i] = simulate(init, model, c.t_fin, obs, grid, rng, opts);
        records[i].stream = i;
    });
    for (std::size_t i = 0; i < records.size(); ++i) {
        ctx.manifest.streams.push_back(records[i].stream);
        ctx.manifest.events += records[i].events;
        if (records[i].truncated) ctx.manifest.partial = true;
        for (std::size_t o = 0; o < records[i].names.size(); ++o)
            for (std::size_t t = 0; t < records[i].times.size(); ++t)
                ctx.metrics.observation(static_cast<int>(i), records[i].times[t], records[i].names[o], records[i].values[o][t]);
        if (c.keep_snapshots && keep) {
            fs::create_directories(ctx.dir / "snapshots");
            for (std::size_t t = 0; t < records[i].snapshots.size(); ++t) {
                json side{{"config_hash", c.hash()}, {"trajectory", i}, {"t", records[i].times[t]}, {"stream", records[i].stream}};
                std::string stem = "traj" + std::to_string(i) + "_t" + std::to_string(t) + ".zrps";
                write_snapshot((ctx.dir / "snapshots" / stem).string(), records[i].snapshots[t], side.dump());
            }
        }
    }
    json traj = json::array();
    for (const auto& r : records)
        traj.push_back({{"stream", r.stream}, {"events", r.events}, {"truncated", r.truncated}, {"absorbed", r.absorbed},
                        {"max_total_rate", r.max_total_rate}});
    ctx.summary["trajectories"] = traj;
    return records;
}

/// Right-endpoint rule on the sample grid.
double right_endpoint_integral(const std::vector<double>& t, const std::vector<double>& v) {
    double s = 0;
    for (std::size_t i = 1; i < t.size(); ++i) s += (t[i] - t[i - 1]) * v[i];
    return s;
}

void run_simulate(Context& ctx) {
    const auto& c = ctx.config;
    auto obs = build_observables(c);
    auto records = run_ensemble(ctx, obs, c.keep_snapshots);
    const auto& times = records.front().times;
    json means = json::object();
    for (std::size_t o = 0; o < obs.size(); ++o) {
        std::vector<double> m, e;
        for (std::size_t t = 0; t < times.size(); ++t) {
            std::vector<double> col;
            for (const auto& r : records) col.push_back(r.values[o][t]);
            auto me = mean_error(col);
            m.push_back(me.mean);
            e.push_back(me.error);
        }
        means[obs[o].name] = {{"mean", m}, {"standard_error", e}};
        ctx.metrics.series("observable_" + obs[o].name, obs[o].name, times, m, e);
    }
    ctx.summary["times"] = times;
    ctx.summary["observables"] = means;
    if (std::find(c.observables.begin(), c.observables.end(), "vna") != c.observables.end()) {
        json integrated = json::array();
        std::vector<double> xs, ys, es;
        for (double eps : c.eps) {
            std::string name = "vna[" + num(eps) + "]";
            std::size_t o = 0;
            while (obs[o].name != name) ++o;
            std::vector<double> per;
            for (const auto& r : records) per.push_back(right_endpoint_integral(r.times, r.values[o]));
            auto me = mean_error(per);
            json entry{{"eps", eps}, {"mean", me.mean}, {"standard_error", me.error}, {"per_trajectory", per}};
            if (c.truncation) {
                std::size_t ot = o + 1, ol = o + 2;
                std::vector<double> tr, tail;
                bool bound_ok = true;
                for (const auto& r : records) {
                    tr.push_back(right_endpoint_integral(r.times, r.values[ot]));
                    tail.push_back(right_endpoint_integral(r.times, r.values[ol]));
                    for (std::size_t t = 0; t < r.times.size(); ++t)
                        if (std::abs(r.values[o][t] - r.values[ot][t]) > r.values[ol][t] + 1e-12 * (1 + r.values[o][t])) bound_ok = false;
                }
                entry["truncated_mean"] = mean_error(tr).mean;
                entry["tail_mean"] = mean_error(tail).mean;
                ctx.checks.add(ctx.metrics, "truncation_tail_bound[" + num(eps) + "]", bound_ok, 0, 0);
            }
            integrated.push_back(entry);
            xs.push_back(eps);
            ys.push_back(me.mean);
            es.push_back(me.error);
        }
        ctx.summary["vna_integrated"] = integrated;
        ctx.metrics.series("vna_vs_eps", "time-integrated V", xs, ys, es);
    }
}

void run_hydro(Context& ctx) {
    const auto& c = ctx.config;
    auto records = run_ensemble(ctx, {}, true);
    const auto times = records.front().times;
    GridField u0 = GridField::sample(c.d, c.grid, density_function(c));
    auto pde = solve_pme(u0, c.t_fin, c.alpha, times);
    std::vector<std::vector<Configuration>> snaps;
    for (auto& r : records) snaps.push_back(std::move(r.snapshots));
    const double eps = c.eps.front();
    auto series = compare_hydrodynamic(snaps, times, pde.frames, eps);
    ctx.metrics.series("hydro_distance", "ensemble mean L1 distance", times, series.mean, series.standard_error);
    for (std::size_t i = 0; i < series.per_trajectory.size(); ++i)
        for (std::size_t t = 0; t < times.size(); ++t) ctx.metrics.observation(static_cast<int>(i), times[t], "hydro_distance", series.per_trajectory[i][t]);
    // final-time density profile along the first axis (other coordinates 0)
    const TorusLattice L(c.d, c.N);
    std::vector<double> xs, emp(static_cast<std::size_t>(c.N), 0.0), ref;
    for (int x = 0; x < c.N; ++x) {
        xs.push_back(static_cast<double>(x) / c.N);
        std::vector<double> p(c.d, 0.0);
        p[0] = xs.back();
        ref.push_back(pde.frames.back().interpolate(p));
    }
    for (const auto& traj : snaps) {
        auto avg = local_average_field(traj.back(), eps);
        for (int x = 0; x < c.N; ++x) {
            std::vector<int> co(c.d, 0);
            co[0] = x;
            emp[x] += avg[static_cast<std::size_t>(L.index(co))] / static_cast<double>(snaps.size());
        }
    }
    ctx.metrics.series("density_profile", "particles (window mean)", xs, emp);
    ctx.metrics.series("density_profile", "PDE solution", xs, ref);
    ctx.summary["times"] = times;
    ctx.summary["distance_mean"] = series.mean;
    ctx.summary["distance_standard_error"] = series.standard_error;
    ctx.summary["baseline_distance"] = series.mean.front();
    ctx.summary["final_distance"] = series.mean.back();
    ctx.summary["eps"] = eps;
    ctx.summary["pde_steps"] = pde.steps;
    ctx.checks.add(ctx.metrics, "hydro_distance_final", series.mean.back() < c.hydro_tolerance, series.mean.back(), c.hydro_tolerance);
}

std::vector<double> random_density(const StateSpaceSector& sector, CounterRng& rng, double spread) {
    std::vector<double> f(sector.size());
    for (auto& v : f) v = std::exp(spread * rng.normal());
    return symmetrize_density(sector, normalize_density(sector, f));
}

void run_exact(Context& ctx) {
    const auto& c = ctx.config;
    TorusLattice L(c.d, c.N);
    auto sector = StateSpaceSector::fixed(L, c.chi, c.alpha, c.particles);
    RateModel model{c.alpha, c.rate_scale};
    auto Q = build_generator(sector, model);
    CounterRng rng(c.seed, 0);
    ctx.manifest.streams.push_back(0);
    ctx.summary["states"] = sector.size();

    double rev = reversibility_residual(sector, Q);
    ctx.checks.add(ctx.metrics, "reversibility", rev < 1e-12, rev, 1e-12);

    double worst_dirichlet = 0;
    for (int i = 0; i < std::min(c.densities, 50); ++i) {
        auto f = normalize_density(sector, [&] {
            std::vector<double> g(sector.size());
            for (auto& v : g) v = std::exp(rng.normal());
            return g;
        }());
        double a = dirichlet_form(sector, f), b = dirichlet_form_from_matrix(sector, Q, f);
        worst_dirichlet = std::max(worst_dirichlet, std::abs(a - b) / std::max(1e-300, std::abs(a)));
    }
    if (c.rate_scale == 1.0) ctx.checks.add(ctx.metrics, "dirichlet_form_routes", worst_dirichlet < 1e-10, worst_dirichlet, 1e-10);

    long violations = 0, comparisons = 0;
    double worst_margin = INFINITY;
    for (int i = 0; i < c.densities; ++i) {
        auto f = random_density(sector, rng, 1.0 + 2.0 * rng.uniform());
        for (Site x = 0; x < L.site_count(); ++x)
            for (Site y = 0; y < L.site_count(); ++y) {
                if (x == y) continue;
                auto r = canonical_path_check(sector, f, x, y);
                ++comparisons;
                worst_margin = std::min(worst_margin, r.margin());
                if (!r.pass) ++violations;
            }
    }
    ctx.summary["canonical_path"] = {{"comparisons", comparisons}, {"violations", violations}, {"worst_margin", worst_margin}};
    ctx.checks.add(ctx.metrics, "canonical_path", violations == 0, static_cast<double>(violations), 0);

    double worst_fk = 0;
    json fk = json::array();
    for (int i = 0; i < c.potentials; ++i) {
        std::vector<double> F(sector.size());
        for (auto& v : F) v = 2.0 * rng.uniform() - 1.0;
        auto r = feynman_kac_eigen(sector, Q, F);
        double gap = std::abs(r.principal - r.variational);
        worst_fk = std::max(worst_fk, gap);
        fk.push_back({{"principal", r.principal}, {"variational", r.variational}});
        ctx.metrics.write({{"record", "feynman_kac"}, {"index", i}, {"principal", r.principal}, {"variational", r.variational}});
        if (i == 0) {
            auto ft = finite_time_feynman_kac(sector, Q, F, 1.0);
            ctx.summary["finite_time_feynman_kac"] = {{"t", 1.0}, {"lhs", ft.lhs}, {"rigorous_bound", ft.rigorous_bound}, {"displayed_bound", ft.displayed_bound}};
        }
    }
    ctx.summary["feynman_kac"] = fk;
    ctx.checks.add(ctx.metrics, "feynman_kac_equality", worst_fk < 1e-8, worst_fk, 1e-8);

    if (L.site_count() >= 2 && c.particles > 0) {
        auto terms = site_regularity_terms(sector, 0, 1);
        double C = calibrate_regularity_constant(sector, Q, terms);
        long fails = 0;
        for (int i = 0; i < c.densities; ++i) {
            auto f = random_density(sector, rng, 1.0 + 2.0 * rng.uniform());
            if (!pathwise_regularity_check(sector, f, terms, C).pass) ++fails;
        }
        ctx.summary["regularity_constant"] = C;
        ctx.checks.add(ctx.metrics, "pathwise_regularity", fails == 0, static_cast<double>(fails), 0);
    }
}

void run_orlicz(Context& ctx) {
    const auto& c = ctx.config;
    const double p = c.p();
    auto young = construct_phi(young_entries(c), c.young_delta, p, c.d);
    std::ofstream(ctx.dir / "young_function.json") << serialize_young(young.corrected, p).dump() << '\n';
    ctx.summary["young"] = {{"a", young.a},
                            {"x0", young.x0},
                            {"ordering_constant", young.ordering_constant},
                            {"p", p},
                            {"growth_max", young.growth_max},
                            {"growth_bound", young.growth_bound},
                            {"scale_value", young.scale_value},
                            {"scale_bound", young.scale_bound},
                            {"convexity_min_margin", young.convexity_min_margin},
                            {"theta_min_second_difference", young.theta_min_second_difference},
                            {"ordering_max_excess", young.ordering_max_excess},
                            {"bidual_error", young.bidual_error}};
    ctx.checks.add(ctx.metrics, "young_growth", young.growth_ok, young.growth_max, young.growth_bound);
    double worst_b = 0;
    for (std::size_t i = 0; i < young.scale_value.size(); ++i) worst_b = std::max(worst_b, young.scale_value[i] / young.scale_bound[i]);
    ctx.checks.add(ctx.metrics, "young_scale", young.scale_ok, worst_b, 1.0);
    ctx.checks.add(ctx.metrics, "young_convexity", young.convexity_ok, young.convexity_min_margin, -1e-8);
    ctx.checks.add(ctx.metrics, "young_theta_convex", young.theta_convex, young.theta_min_second_difference, -1e-8);
    ctx.checks.add(ctx.metrics, "young_ordering", young.ordering, young.ordering_max_excess, 1e-9);
    ctx.checks.add(ctx.metrics, "young_strict", young.strict, 0, 0);

    CounterRng rng(c.seed, 0);
    ctx.manifest.streams.push_back(0);
    long consistency_fail = 0, interpolation_fail = 0;
    double worst_consistency = -INFINITY, worst_interpolation = -INFINITY;
    for (int i = 0; i < c.cases; ++i) {
        int d = 1 + static_cast<int>(rng.below(2));
        int N = d == 1 ? 2 + static_cast<int>(rng.below(63)) : 2 + static_cast<int>(rng.below(15));
        double chi = std::pow(static_cast<double>(N), -(0.5 + rng.uniform()));
        auto fam = build_partition_family(TorusLattice(d, N), chi, c.family_delta);
        int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(fam.K - 1)));
        const auto& fine = fam.levels[k];
        std::vector<double> h(static_cast<std::size_t>(fine.block_count()));
        double spread = 3.0 * rng.uniform();
        for (auto& v : h) v = std::exp(spread * rng.normal());
        bool use_power = rng.uniform() < 0.5;
        YoungFunction power = YoungFunction::power(1.0 + (p - 1.0) * rng.uniform());
        const YoungFunction& phi = use_power ? power : young.corrected;
        auto r = consistency_check(h, fine, fam.levels[k + 1], fam.weight, phi, p);
        worst_consistency = std::max(worst_consistency, (r.lhs - r.rhs) / std::max(1.0, r.rhs));
        if (r.lhs > r.rhs + 1e-9 * std::max(1.0, r.rhs)) ++consistency_fail;
    }
    for (int i = 0; i < c.cases; ++i) {
        std::size_t n = 1 + rng.below(2048);
        double b = 0.1 + 10.0 * rng.uniform();
        double delta = std::pow(10.0, -2.0 * rng.uniform());
        double alpha = 1.0 + 2.0 * rng.uniform();
        std::vector<double> u(n);
        double spread = 3.0 * rng.uniform(), total = 0;
        for (auto& v : u) total += (v = std::exp(spread * rng.normal()));
        double target = b * rng.uniform();
        for (auto& v : u) v *= target * static_cast<double>(n) / total;
        bool use_power = rng.uniform() < 0.5;
        YoungFunction power = YoungFunction::power(1.0 + 2.0 * rng.uniform());
        const YoungFunction& phi = use_power ? power : young.corrected;
        auto bound = interpolation_bound(phi, b, delta, alpha);
        auto r = bound.check(u);
        worst_interpolation = std::max(worst_interpolation, (r.lhs - r.rhs) / std::max(1.0, r.rhs));
        if (r.lhs > r.rhs + 1e-9 * std::max(1.0, r.rhs)) ++interpolation_fail;
    }
    ctx.summary["consistency"] = {{"cases", c.cases}, {"violations", consistency_fail}, {"worst_relative_excess", worst_consistency}};
    ctx.summary["interpolation"] = {{"cases", c.cases}, {"violations", interpolation_fail}, {"worst_relative_excess", worst_interpolation}};
    ctx.checks.add(ctx.metrics, "orlicz_consistency", consistency_fail == 0, static_cast<double>(consistency_fail), 0);
    ctx.checks.add(ctx.metrics, "orlicz_interpolation", interpolation_fail == 0, static_cast<double>(interpolation_fail), 0);
}

void run_multiscale(Context& ctx) {
    const auto& c = ctx.config;
    TorusLattice L(c.d, c.N);
    auto fam = build_partition_family(L, c.chi, c.family_delta);
    auto audit = audit_partition_family(fam);
    ctx.summary["family"] = json::parse(serialize_partition_family(fam));
    ctx.summary["family_failures"] = audit.failures;
    ctx.checks.add(ctx.metrics, "partition_family", audit.ok, static_cast<double>(audit.failures.size()), 0);
    auto schedule = lambda_schedule(fam);
    ctx.summary["lambda"] = schedule.lambda;
    ctx.summary["lambda_sum"] = schedule.sum;
    ctx.summary["lambda_max_partial_product"] = schedule.max_partial_product;
    ctx.checks.add(ctx.metrics, "lambda_in_unit_interval", schedule.all_in_unit_interval, 0, 1);

    auto young = construct_phi(young_entries(c), c.young_delta, c.p(), c.d);
    const ProductMeasure measure = initial_measure(c);
    std::vector<Configuration> samples(static_cast<std::size_t>(c.ensemble));
    for (int i = 0; i < c.ensemble; ++i) {
        CounterRng rng(c.seed, static_cast<std::uint64_t>(i));
        samples[i] = measure.sample(rng);
        ctx.manifest.streams.push_back(static_cast<std::uint64_t>(i));
    }
    std::vector<TelescopeReport> reports(samples.size());
    parallel_for(samples.size(), c.workers, [&](std::size_t i) { reports[i] = telescope(samples[i], fam, young.corrected, schedule, c.alpha); });
    const int d = c.d;
    double worst_residual = 0, worst_top = 0;
    bool first_ok = true, top_ok = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        worst_residual = std::max(worst_residual, r.residual);
        worst_top = std::max(worst_top, r.top_level_identity_error);
        first_ok = first_ok && r.first_level_factor >= std::pow(4.0, -d) * (1 - 1e-12) && r.first_level_factor <= std::pow(2.0, d) * (1 + 1e-12);
        top_ok = top_ok && r.top_level_factor >= std::pow(2.0, -d) * (1 - 1e-12) && r.top_level_factor <= std::pow(2.0, d) * (1 + 1e-12);
        ctx.metrics.write({{"record", "telescope"}, {"sample", i}, {"Z", r.Z}, {"residual", r.residual},
                           {"first_level_factor", r.first_level_factor}, {"top_level_factor", r.top_level_factor}});
    }
    ctx.checks.add(ctx.metrics, "telescope_residual", worst_residual < 1e-10, worst_residual, 1e-10);
    ctx.checks.add(ctx.metrics, "telescope_top_identity", worst_top < 1e-9, worst_top, 1e-9);
    ctx.checks.add(ctx.metrics, "telescope_first_level_factor", first_ok, 0, 0);
    ctx.checks.add(ctx.metrics, "telescope_top_level_factor", top_ok, 0, 0);

    std::vector<double> ks, zmean;
    for (int k = 0; k < fam.K; ++k) {
        ks.push_back(k + 1);
        double s = 0;
        for (const auto& r : reports) s += r.Z[k];
        zmean.push_back(s / static_cast<double>(reports.size()));
    }
    ctx.metrics.series("telescope_levels", "mean Z_k", ks, zmean);

    // one-step ingredients on the first sample
    json steps = json::array();
    std::vector<double> grad_mean, delta_mean, kx;
    for (int k = 0; k + 1 < fam.K; ++k) {
        const auto& fine = fam.levels[k];
        const auto& coarse = fam.levels[k + 1];
        auto lam = block_alpha_averages(samples.front(), fine, fam.weight, c.alpha);
        double g = 0, dl = 0;
        for (std::int64_t B = 0; B < coarse.block_count(); ++B) {
            auto box = coarse.block(B);
            auto inside = blocks_inside(fine, box);
            int side = box.axes.front().length;
            for (const auto& iv : box.axes) side = std::min(side, iv.length);
            g += coarse_gradient_sq_from_values(lam, inside, fine, side, c.alpha);
            dl += delta_btilde(samples.front(), box, fine, fam.weight, c.alpha, c.p(), schedule.lambda[k]);
        }
        g /= static_cast<double>(coarse.block_count());
        dl /= static_cast<double>(coarse.block_count());
        steps.push_back({{"level", k + 1}, {"mean_coarse_gradient", g}, {"mean_delta", dl}});
        kx.push_back(k + 1);
        grad_mean.push_back(g);
        delta_mean.push_back(dl);
    }
    ctx.summary["one_step"] = steps;
    ctx.metrics.series("one_step", "mean coarse gradient", kx, grad_mean);
    ctx.metrics.series("one_step", "mean Delta", kx, delta_mean);
    json z = json::array();
    for (const auto& r : reports) z.push_back(r.Z);
    ctx.summary["Z"] = z;
}

void run_pme(Context& ctx) {
    const auto& c = ctx.config;
    GridField u0 = GridField::sample(c.d, c.grid, density_function(c));
    auto grid = time_grid(c);
    auto sol = solve_pme(u0, c.t_fin, c.alpha, grid);
    double m0 = u0.mass();
    double drift = 0;
    std::vector<double> change;
    for (std::size_t t = 0; t < sol.times.size(); ++t) {
        drift = std::max(drift, std::abs(sol.masses[t] - m0) / std::max(1e-300, std::abs(m0)));
        change.push_back(l1_distance(sol.frames[t], u0));
        ctx.metrics.observation(0, sol.times[t], "mass", sol.masses[t]);
        ctx.metrics.observation(0, sol.times[t], "max", sol.frames[t].max());
        ctx.metrics.observation(0, sol.times[t], "l1_change", change.back());
    }
    ctx.metrics.series("pme_mass", "mass", sol.times, sol.masses);
    std::vector<double> xs, init, fin;
    std::size_t stride = sol.final.size() / static_cast<std::size_t>(c.grid);
    for (int x = 0; x < c.grid; ++x) {
        xs.push_back((x + 0.5) / c.grid);
        init.push_back(u0.values[static_cast<std::size_t>(x) * stride]);
        fin.push_back(sol.final.values[static_cast<std::size_t>(x) * stride]);
    }
    ctx.metrics.series("pme_profile", "t = 0", xs, init);
    ctx.metrics.series("pme_profile", "t = t_fin", xs, fin);
    if (c.keep_snapshots) {
        fs::create_directories(ctx.dir / "snapshots");
        TorusLattice grid_lattice(c.d, c.grid);
        for (std::size_t t = 0; t < sol.frames.size(); ++t)
            write_bytes(ctx.dir / "snapshots" / ("field_t" + std::to_string(t) + ".zrps"),
                        encode_field_snapshot(grid_lattice, 1.0, sol.frames[t].values));
    }
    ctx.summary["steps"] = sol.steps;
    ctx.summary["mass_drift"] = drift;
    ctx.summary["times"] = sol.times;
    ctx.summary["l1_change"] = change;
    ctx.checks.add(ctx.metrics, "mass_conservation", drift < 1e-10, drift, 1e-10);
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
    auto violations = config.validate();
    if (!violations.empty()) throw ConfigError(violations);
    const auto start = std::chrono::steady_clock::now();
    fs::path dir(config.output_dir);
    fs::create_directories(dir);
    RunManifest manifest;
    manifest.config_hash = config.hash();
    manifest.code_version = code_version();
    manifest.kind = to_string(config.kind);
    manifest.output_dir = dir.string();

    json summary{{"config_hash", manifest.config_hash}, {"code_version", manifest.code_version}, {"config", config.to_json()}};
    Checks checks;
    {
        MetricsWriter metrics(dir / "metrics.jsonl", manifest.config_hash, manifest.kind);
        Context ctx{config, dir, metrics, summary, checks, manifest};
        switch (config.kind) {
            case ExperimentKind::Simulate: run_simulate(ctx); break;
            case ExperimentKind::HydroCompare: run_hydro(ctx); break;
            case ExperimentKind::ExactChecks: run_exact(ctx); break;
            case ExperimentKind::OrliczAudit: run_orlicz(ctx); break;
            case ExperimentKind::MultiscaleReport: run_multiscale(ctx); break;
            case ExperimentKind::PmeSolve: run_pme(ctx); break;
        }
    }
    if (!checks.list.empty()) {
        manifest.checks_passed = checks.failed.empty();
        manifest.failed_checks = checks.failed;
    }
    summary["checks"] = checks.list;
    summary["partial"] = manifest.partial;
    summary["events"] = manifest.events;
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json" || rel.ends_with(".svg")) continue;
        manifest.files.push_back({rel, static_cast<std::uint64_t>(entry.file_size())});
    }
    std::sort(manifest.files.begin(), manifest.files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream(dir / "manifest.json") << manifest.to_json().dump(2) << '\n';
    return manifest;
}

PlotOutcome emit_plots(const RunManifest& manifest) {
    PlotOutcome out;
    fs::path dir(manifest.output_dir);
    std::ifstream in(dir / "metrics.jsonl");
    if (!in) {
        out.notices.push_back("metrics.jsonl is missing; no plots written");
        return out;
    }
    std::map<std::string, PlotSpec> plots;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        if (j.value("record", "") != "series") continue;
        std::string id = j.at("plot").get<std::string>();
        PlotSeries s;
        s.label = j.at("label").get<std::string>();
        s.x = j.at("x").get<std::vector<double>>();
        s.y = j.at("y").get<std::vector<double>>();
        if (j.contains("err")) s.err = j["err"].get<std::vector<double>>();
        s.markers = s.x.size() < 40;
        auto& plot = plots[id];
        plot.series.push_back(std::move(s));
    }
    const std::map<std::string, std::vector<std::string>> required{{"hydro-compare", {"hydro_distance", "density_profile"}},
                                                                   {"multiscale-report", {"telescope_levels"}},
                                                                   {"pme-solve", {"pme_mass", "pme_profile"}}};
    if (auto it = required.find(manifest.kind); it != required.end())
        for (const auto& id : it->second)
            if (!plots.count(id)) out.notices.push_back("missing series '" + id + "' for " + manifest.kind);

    auto label = [](PlotSpec& p, const std::string& id) {
        p.title = id;
        p.xlabel = "t";
        p.ylabel = "value";
        if (id == "hydro_distance") p.title = "L1 distance to the PDE solution", p.ylabel = "distance";
        else if (id == "density_profile") p.title = "density profile at t_fin", p.xlabel = "x", p.ylabel = "density";
        else if (id == "vna_vs_eps") p.title = "time-integrated V vs eps", p.xlabel = "eps", p.ylabel = "V", p.logx = true;
        else if (id == "telescope_levels") p.title = "Orlicz norm per level", p.xlabel = "level k", p.ylabel = "Z_k";
        else if (id == "one_step") p.title = "one-step ingredients", p.xlabel = "level k";
        else if (id == "pme_mass") p.title = "PDE mass", p.ylabel = "mass";
        else if (id == "pme_profile") p.title = "PDE profile", p.xlabel = "x", p.ylabel = "u";
    };
    for (auto& [id, plot] : plots) {
        label(plot, id);
        fs::path file = dir / (id + ".svg");
        std::ofstream(file) << render_svg(plot);
        out.files.push_back(file.string());
    }
    if (manifest.kind == "orlicz-audit") {
        std::ifstream yin(dir / "young_function.json");
        if (!yin) out.notices.push_back("missing series 'young_function.json' for orlicz-audit");
        else {
            double p = 1.5;
            auto phi = deserialize_young(json::parse(yin), &p);
            auto psi = phi.dual();
            PlotSpec curves{"Young function and dual", "u", "value", true, true, {}};
            PlotSpec margin{"convexity certificate margin", "x", "((p-1) Phi'^2 - x Phi'') / ((p-1) Phi'^2)", true, false, {}};
            PlotSeries a{"Phi", {}, {}, {}, false}, b{"Psi", {}, {}, {}, false}, m{"margin", {}, {}, {}, false};
            const auto& nd = phi.nodes();
            for (std::size_t i = 1; i < nd.size(); i += 16) {
                double u = nd[i].u;
                if (u < 1e-3 || u > 1e9) continue;
                a.x.push_back(u);
                a.y.push_back(phi(u));
                b.x.push_back(u);
                b.y.push_back(psi(u));
                if (i + 1 < nd.size()) {
                    double second = (nd[i + 1].dleft - nd[i - 1].dright) / (nd[i + 1].u - nd[i - 1].u);
                    double lhs = (p - 1) * nd[i].dright * nd[i].dright;
                    if (lhs > 0) {
                        m.x.push_back(u);
                        m.y.push_back((lhs - u * second) / lhs);
                    }
                }
            }
            curves.series = {a, b};
            margin.series = {m};
            for (auto [name, spec] : {std::pair{"young_curves", &curves}, std::pair{"young_certificate", &margin}}) {
                fs::path file = dir / (std::string(name) + ".svg");
                std::ofstream(file) << render_svg(*spec);
                out.files.push_back(file.string());
            }
        }
    }
    if (out.files.empty()) out.notices.push_back("no plottable series in the metrics stream; no files written");
    return out;
}

}  // namespace zrp
