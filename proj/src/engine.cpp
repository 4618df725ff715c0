#include "moubo/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moubo/csv.hpp"
#include "moubo/rng.hpp"
#include "moubo/sobol.hpp"
#include "moubo/uncertainty.hpp"

namespace moubo {

namespace {

// Child-stream identifiers; every random draw in a run is a pure function of
// (config seeds, stream, iteration), which is what makes resume exact.
enum Stream : std::uint64_t {
    kStreamDesign = 1,
    kStreamUSamples = 2,
    kStreamFit = 3,
    kStreamSearch = 4,
    kStreamPareto = 5,
    kStreamUNext = 6,
    kStreamRandomFill = 7,
    kStreamFinalFit = 8,
};

std::uint64_t stream_seed(std::uint64_t root, Stream stream, std::uint64_t iter) {
    return derive_seed(derive_seed(root, stream), iter);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
}

Box box_from_json(const nlohmann::json& j, const std::string& context) {
    check_keys(j, {"lo", "hi"}, context);
    return Box(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>());
}

nlohmann::json box_to_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    if (external) {
        nlohmann::json e;
        e["command"] = external->command;
        e["x_box"] = box_to_json(external->x_box);
        e["u_box"] = box_to_json(external->u_box);
        e["n_objectives"] = external->n_objectives;
        nlohmann::json ud;
        ud["kind"] = external->u_kind;
        if (external->u_kind == "gaussian") {
            ud["center"] = external->u_center;
            ud["variances"] = external->u_variances;
        }
        e["u_distribution"] = ud;
        j["problem"] = e;
    } else {
        j["problem"] = problem;
    }
    j["n_initial"] = n_initial;
    j["budget"] = budget;
    j["acquisition"] = {{"kind", to_string(acquisition.kind)},
                        {"beta", acquisition.beta},
                        {"n_pareto", acquisition.n_pareto},
                        {"n_u", acquisition.n_u},
                        {"crn", acquisition.crn},
                        {"resample_pareto", acquisition.resample_pareto}};
    j["optimizer"] = {{"n_probes", optimizer.n_probes},
                      {"top_k", optimizer.top_k},
                      {"refine_iters", optimizer.refine_iters}};
    j["seeds"] = {{"design", seeds.design}, {"u", seeds.u}, {"optimizer", seeds.optimizer}};
    j["out_dir"] = out_dir;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    check_keys(j, {"schema_version", "problem", "n_initial", "budget", "acquisition", "optimizer",
                   "seed", "seeds", "out_dir"},
               "config");
    RunConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1) throw ConfigError("config: unsupported schema_version");

    const auto& pj = j.at("problem");
    if (pj.is_string()) {
        c.problem = pj.get<std::string>();
    } else {
        check_keys(pj, {"command", "x_box", "u_box", "n_objectives", "u_distribution"},
                   "config.problem");
        ExternalProblemConfig e;
        e.command = pj.at("command").get<std::string>();
        e.x_box = box_from_json(pj.at("x_box"), "config.problem.x_box");
        e.u_box = box_from_json(pj.at("u_box"), "config.problem.u_box");
        e.n_objectives = pj.value("n_objectives", 2);
        if (pj.contains("u_distribution")) {
            const auto& ud = pj.at("u_distribution");
            check_keys(ud, {"kind", "center", "variances"}, "config.problem.u_distribution");
            e.u_kind = ud.at("kind").get<std::string>();
            if (e.u_kind == "gaussian") {
                e.u_center = ud.at("center").get<Point>();
                e.u_variances = ud.at("variances").get<std::vector<double>>();
            } else if (e.u_kind != "uniform") {
                throw ConfigError("config: u_distribution.kind must be uniform or gaussian");
            }
        }
        c.external = std::move(e);
    }

    c.n_initial = j.value("n_initial", 0);
    if (c.n_initial != 0 && c.n_initial < 2) throw ConfigError("config: n_initial must be >= 2");
    c.budget = j.value("budget", 0);
    if (c.budget < 0) throw ConfigError("config: budget must be >= 0");

    if (j.contains("acquisition")) {
        const auto& a = j.at("acquisition");
        check_keys(a, {"kind", "beta", "n_pareto", "n_u", "crn", "resample_pareto"},
                   "config.acquisition");
        c.acquisition.kind = acquisition_kind_from_string(a.value("kind", std::string("iehvi")));
        c.acquisition.beta = a.value("beta", 10.0);
        c.acquisition.n_pareto = a.value("n_pareto", 256);
        c.acquisition.n_u = a.value("n_u", 64);
        c.acquisition.crn = a.value("crn", true);
        c.acquisition.resample_pareto = a.value("resample_pareto", true);
        if (c.acquisition.n_pareto < 1) throw ConfigError("config: n_pareto must be >= 1");
        if (c.acquisition.n_u < 1) throw ConfigError("config: n_u must be >= 1");
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        check_keys(o, {"n_probes", "top_k", "refine_iters"}, "config.optimizer");
        c.optimizer.n_probes = o.value("n_probes", 512);
        c.optimizer.top_k = o.value("top_k", 5);
        c.optimizer.refine_iters = o.value("refine_iters", 100);
        if (c.optimizer.n_probes < 1) throw ConfigError("config: n_probes must be >= 1");
    }
    if (j.contains("seed") && j.contains("seeds"))
        throw ConfigError("config: give either seed or seeds, not both");
    if (j.contains("seed")) {
        const std::uint64_t master = j.at("seed").get<std::uint64_t>();
        c.seeds.design = derive_seed(master, 1);
        c.seeds.u = derive_seed(master, 2);
        c.seeds.optimizer = derive_seed(master, 3);
    } else if (j.contains("seeds")) {
        const auto& s = j.at("seeds");
        check_keys(s, {"design", "u", "optimizer"}, "config.seeds");
        c.seeds.design = s.value("design", 1);
        c.seeds.u = s.value("u", 2);
        c.seeds.optimizer = s.value("optimizer", 3);
    }
    c.out_dir = j.value("out_dir", std::string());
    return c;
}

ProblemDefinition RunConfig::resolve_problem() const {
    if (external) {
        UDistribution dist =
            external->u_kind == "gaussian"
                ? UDistribution::gaussian(external->u_center, external->u_variances, external->u_box)
                : UDistribution::uniform(external->u_box);
        return external_problem(external->command, external->x_box, external->u_box,
                                external->n_objectives, std::move(dist));
    }
    return find_problem(problem);
}

int RunConfig::resolved_n_initial(const ProblemDefinition& p) const {
    if (n_initial > 0) return n_initial;
    return static_cast<int>(10 * (p.x_box.dim() + p.u_box.dim()));
}

nlohmann::json HistoryRecord::to_json() const {
    nlohmann::json j;
    j["iteration"] = iteration;
    j["x"] = x;
    j["u"] = u;
    j["acquisition_value"] = acquisition_value;
    j["fallback"] = fallback;
    nlohmann::json hp = nlohmann::json::array();
    for (std::size_t k = 0; k < log_params.size(); ++k)
        hp.push_back({{"log_params", log_params[k]}, {"jitter", jitters[k]}});
    j["hyperparams"] = hp;
    return j;
}

HistoryRecord HistoryRecord::from_json(const nlohmann::json& j) {
    HistoryRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.x = j.at("x").get<Point>();
    r.u = j.at("u").get<Point>();
    r.acquisition_value = j.at("acquisition_value").get<double>();
    r.fallback = j.value("fallback", false);
    for (const auto& hp : j.at("hyperparams")) {
        r.log_params.push_back(hp.at("log_params").get<std::vector<double>>());
        r.jitters.push_back(hp.at("jitter").get<double>());
    }
    return r;
}

DesignOfExperiments initial_design(const ProblemDefinition& problem, int n0, std::uint64_t seed) {
    if (n0 < 2) throw ConfigError("initial design: n0 must be >= 2");
    const Box joint = problem.joint_box();
    SobolSequence seq(joint.dim(), derive_seed(seed, 0xD0E));
    DesignOfExperiments doe;
    const std::size_t nx = problem.x_box.dim();
    for (int i = 0; i < n0; ++i) {
        Point z = seq.point(static_cast<std::uint64_t>(i));
        for (std::size_t k = 0; k < joint.dim(); ++k)
            z[k] = joint.lo[k] + (joint.hi[k] - joint.lo[k]) * z[k];
        JointPoint jp;
        jp.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx));
        jp.u.assign(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end());
        ObjectiveVector y = problem.evaluate(jp.x, jp.u);
        doe.add(std::move(jp), std::move(y));
    }
    return doe;
}

namespace {

// Nelder-Mead simplex maximization, every vertex clamped into the box.
MaximizeResult nelder_mead(const std::function<double(const Point&)>& f, const Box& box,
                           Point start, double start_value, int iters) {
    const std::size_t m = box.dim();
    std::vector<Point> simplex;
    std::vector<double> values;
    simplex.push_back(box.clamp(start));
    values.push_back(start_value);
    for (std::size_t k = 0; k < m; ++k) {
        Point v = start;
        const double span = box.hi[k] - box.lo[k];
        double step = 0.05 * (span > 0 ? span : 1.0);
        if (v[k] + step > box.hi[k]) step = -step;
        v[k] += step;
        v = box.clamp(v);
        simplex.push_back(v);
        values.push_back(f(v));
    }

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    for (int it = 0; it < iters; ++it) {
        std::vector<std::size_t> ord(simplex.size());
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            if (values[a] != values[b]) return values[a] > values[b];
            return a < b;
        });
        std::vector<Point> s2;
        std::vector<double> v2;
        for (std::size_t i : ord) {
            s2.push_back(simplex[i]);
            v2.push_back(values[i]);
        }
        simplex = std::move(s2);
        values = std::move(v2);

        Point centroid(m, 0.0);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
            for (std::size_t k = 0; k < m; ++k) centroid[k] += simplex[i][k];
        for (std::size_t k = 0; k < m; ++k) centroid[k] /= static_cast<double>(m);

        const Point& worst = simplex.back();
        Point reflected(m);
        for (std::size_t k = 0; k < m; ++k)
            reflected[k] = centroid[k] + alpha * (centroid[k] - worst[k]);
        reflected = box.clamp(reflected);
        const double fr = f(reflected);

        if (fr > values.front()) {
            Point expanded(m);
            for (std::size_t k = 0; k < m; ++k)
                expanded[k] = centroid[k] + gamma * (reflected[k] - centroid[k]);
            expanded = box.clamp(expanded);
            const double fe = f(expanded);
            if (fe > fr) {
                simplex.back() = expanded;
                values.back() = fe;
            } else {
                simplex.back() = reflected;
                values.back() = fr;
            }
            continue;
        }
        if (fr > values[values.size() - 2]) {
            simplex.back() = reflected;
            values.back() = fr;
            continue;
        }
        Point contracted(m);
        for (std::size_t k = 0; k < m; ++k)
            contracted[k] = centroid[k] + rho * (worst[k] - centroid[k]);
        contracted = box.clamp(contracted);
        const double fc = f(contracted);
        if (fc > values.back()) {
            simplex.back() = contracted;
            values.back() = fc;
            continue;
        }
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            for (std::size_t k = 0; k < m; ++k)
                simplex[i][k] = simplex[0][k] + sigma * (simplex[i][k] - simplex[0][k]);
            simplex[i] = box.clamp(simplex[i]);
            values[i] = f(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
        if (values[i] > values[best]) best = i;
    return {simplex[best], values[best]};
}

}  // namespace

MaximizeResult maximize_scalar(const std::function<double(const Point&)>& f, const Box& box,
                               const OptimizerSettings& settings, std::uint64_t seed, int threads) {
    const std::size_t m = box.dim();
    const std::size_t n_probes = static_cast<std::size_t>(std::max(settings.n_probes, 1));

    std::vector<Point> probes(n_probes);
    std::vector<double> values(n_probes);
    const std::uint64_t probe_seed = derive_seed(seed, 0xA11);
    for (std::size_t i = 0; i < n_probes; ++i) {
        Point p(m);
        for (std::size_t k = 0; k < m; ++k)
            p[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * counter_uniform(probe_seed, i, k);
        probes[i] = std::move(p);
    }
    parallel_for(n_probes, threads, [&](std::size_t i) { values[i] = f(probes[i]); });

    std::vector<std::size_t> order(n_probes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });

    MaximizeResult best{probes[order.front()], values[order.front()]};
    const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(settings.top_k, 0)), n_probes);
    for (std::size_t s = 0; s < starts; ++s) {
        const std::size_t idx = order[s];
        MaximizeResult local =
            nelder_mead(f, box, probes[idx], values[idx], settings.refine_iters);
        if (local.value > best.value) best = local;
    }
    best.point = box.clamp(best.point);
    return best;
}

SelectionResult select_next(const GpSurrogate& model, const AcquisitionSpec& spec,
                            const ProblemDefinition& problem, const OptimizerSettings& settings,
                            std::uint64_t iter_seed, int threads) {
    const std::size_t nx = problem.x_box.dim();
    SelectionResult sel;

    if (spec.kind == AcquisitionKind::random) {
        const Box joint = problem.joint_box();
        const std::uint64_t s = derive_seed(iter_seed, kStreamRandomFill);
        Point z(joint.dim());
        for (std::size_t k = 0; k < joint.dim(); ++k)
            z[k] = joint.lo[k] + (joint.hi[k] - joint.lo[k]) * counter_uniform(s, 0, k);
        sel.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx));
        sel.u.assign(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end());
        return sel;
    }

    spec.validate();
    if (!model.fitted()) throw std::logic_error("select_next: unfitted model");
    const std::uint64_t search_seed = derive_seed(iter_seed, kStreamSearch);

    if (spec.kind == AcquisitionKind::iehvi) {
        ConditionalFrontCache cache(model, spec, threads);
        auto objective = [&](const Point& x) { return cache.iehvi(x); };
        MaximizeResult r = maximize_scalar(objective, problem.x_box, settings, search_seed, threads);
        sel.acquisition_value = r.value;
        if (r.value <= 0.0) {
            sel.fallback = true;
            r = maximize_scalar([&](const Point& x) { return cache.mean_uncertainty(x); },
                                problem.x_box, settings, derive_seed(search_seed, 1), threads);
        }
        sel.x = r.point;
        USampleSet next = sample_u(problem.u_dist, 1, derive_seed(iter_seed, kStreamUNext));
        sel.u = next.samples.front();
        return sel;
    }

    // joint-space kinds: pehvi, wpehvi
    const Box joint = problem.joint_box();
    auto split = [nx](const Point& z) {
        Point x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx));
        Point u(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end());
        return std::make_pair(std::move(x), std::move(u));
    };
    auto objective = [&](const Point& z) {
        auto [x, u] = split(z);
        if (spec.kind == AcquisitionKind::wpehvi) return wpehvi(model, x, u, spec, problem.u_dist);
        return pehvi(model, x, u, spec);
    };
    MaximizeResult r = maximize_scalar(objective, joint, settings, search_seed, threads);
    sel.acquisition_value = r.value;
    if (r.value <= 0.0) {
        sel.fallback = true;
        auto uncertainty = [&](const Point& z) {
            ObjectiveVector mean, stddev;
            model.predict_one(z, mean, stddev);
            double s = 0.0;
            for (double v : stddev) s += v;
            return s;
        };
        r = maximize_scalar(uncertainty, joint, settings, derive_seed(search_seed, 1), threads);
    }
    auto [x, u] = split(r.point);
    sel.x = std::move(x);
    sel.u = std::move(u);
    return sel;
}

namespace {

struct RunFiles {
    std::filesystem::path dir;
    std::filesystem::path config_path;
    std::filesystem::path doe_path;
    std::filesystem::path history_path;
    std::filesystem::path model_path;
    std::filesystem::path timings_path;
};

RunFiles run_files(const std::string& out_dir) {
    if (out_dir.empty()) throw ConfigError("run: out_dir must be set");
    RunFiles f;
    f.dir = out_dir;
    f.config_path = f.dir / "config.json";
    f.doe_path = f.dir / "doe.csv";
    f.history_path = f.dir / "history.jsonl";
    f.model_path = f.dir / "model.json";
    f.timings_path = f.dir / "timings.csv";
    return f;
}

std::string doe_header(std::size_t nx, std::size_t nu, std::size_t d) {
    std::string h;
    for (std::size_t k = 0; k < nx; ++k) h += "x" + std::to_string(k + 1) + ",";
    for (std::size_t k = 0; k < nu; ++k) h += "u" + std::to_string(k + 1) + ",";
    for (std::size_t k = 0; k < d; ++k) h += "f" + std::to_string(k + 1) + (k + 1 < d ? "," : "");
    return h;
}

std::string doe_row(const JointPoint& p, const ObjectiveVector& y) {
    std::string row;
    for (double v : p.x) row += format_double(v) + ",";
    for (double v : p.u) row += format_double(v) + ",";
    for (std::size_t k = 0; k < y.size(); ++k)
        row += format_double(y[k]) + (k + 1 < y.size() ? "," : "");
    return row;
}

DesignOfExperiments load_doe(const std::filesystem::path& path, std::size_t nx, std::size_t nu,
                             std::size_t d) {
    DesignOfExperiments doe;
    std::ifstream in(path);
    if (!in) return doe;
    std::string line;
    if (!std::getline(in, line)) return doe;
    if (line != doe_header(nx, nu, d))
        throw ConfigError("resume: doe.csv header does not match the configured problem");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != nx + nu + d) throw ConfigError("resume: malformed doe.csv row");
        JointPoint p;
        ObjectiveVector y;
        std::size_t i = 0;
        for (std::size_t k = 0; k < nx; ++k) p.x.push_back(std::stod(fields[i++]));
        for (std::size_t k = 0; k < nu; ++k) p.u.push_back(std::stod(fields[i++]));
        for (std::size_t k = 0; k < d; ++k) y.push_back(std::stod(fields[i++]));
        doe.add(std::move(p), std::move(y));
    }
    return doe;
}

std::vector<HistoryRecord> load_history(const std::filesystem::path& path) {
    std::vector<HistoryRecord> records;
    std::ifstream in(path);
    if (!in) return records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(HistoryRecord::from_json(nlohmann::json::parse(line)));
    }
    return records;
}

nlohmann::json comparable_config(const RunConfig& c) {
    nlohmann::json j = c.to_json();
    j.erase("budget");
    j.erase("out_dir");
    return j;
}

}  // namespace

RunOutcome run(const RunConfig& config, int threads) {
    const ProblemDefinition problem = config.resolve_problem();
    const std::size_t nx = problem.x_box.dim();
    const std::size_t nu = problem.u_box.dim();
    const std::size_t d = problem.n_objectives;
    const int n0 = config.resolved_n_initial(problem);
    const int budget = config.budget;

    RunFiles files = run_files(config.out_dir);
    std::filesystem::create_directories(files.dir);

    if (std::filesystem::exists(files.config_path)) {
        std::ifstream in(files.config_path);
        nlohmann::json stored = nlohmann::json::parse(in);
        if (comparable_config(RunConfig::from_json(stored)) != comparable_config(config))
            throw ConfigError("run: " + files.config_path.string() +
                              " belongs to a different configuration; refusing to resume");
    }
    {
        std::ofstream out(files.config_path);
        out << config.to_json().dump(2) << "\n";
    }

    DesignOfExperiments doe = load_doe(files.doe_path, nx, nu, d);
    std::vector<HistoryRecord> history = load_history(files.history_path);
    if (doe.size() > static_cast<std::size_t>(n0) + history.size())
        throw ConfigError("run: doe.csv has more rows than the history explains; directory corrupt");

    const bool fresh_doe = !std::filesystem::exists(files.doe_path);
    std::ofstream doe_out(files.doe_path, std::ios::app);
    if (fresh_doe) doe_out << doe_header(nx, nu, d) << "\n" << std::flush;
    std::ofstream history_out(files.history_path, std::ios::app);
    std::ofstream timings_out(files.timings_path, std::ios::app);

    // Initial design (or the remainder of one that was interrupted).
    if (doe.size() < static_cast<std::size_t>(n0)) {
        if (!history.empty()) throw ConfigError("run: history exists but initial design incomplete");
        const Box joint = problem.joint_box();
        SobolSequence seq(joint.dim(), derive_seed(stream_seed(config.seeds.design, kStreamDesign, 0), 0xD0E));
        for (std::size_t i = doe.size(); i < static_cast<std::size_t>(n0); ++i) {
            Point z = seq.point(i);
            for (std::size_t k = 0; k < joint.dim(); ++k)
                z[k] = joint.lo[k] + (joint.hi[k] - joint.lo[k]) * z[k];
            JointPoint jp;
            jp.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx));
            jp.u.assign(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end());
            ObjectiveVector y = problem.evaluate(jp.x, jp.u);  // failure leaves a partial design
            doe_out << doe_row(jp, y) << "\n" << std::flush;
            doe.add(std::move(jp), std::move(y));
        }
    }

    // CRN u-sample set for iehvi, fixed across iterations.
    USampleSet crn_samples;
    if (config.acquisition.kind == AcquisitionKind::iehvi && config.acquisition.crn) {
        crn_samples = sample_u(problem.u_dist, static_cast<std::size_t>(config.acquisition.n_u),
                               stream_seed(config.seeds.u, kStreamUSamples, 0));
    }

    GpSurrogate model;
    auto fit_model = [&](int iteration, bool final_fit) {
        FitConfig fc;
        fc.input_box = problem.joint_box();
        fc.seed = stream_seed(config.seeds.optimizer, final_fit ? kStreamFinalFit : kStreamFit,
                              static_cast<std::uint64_t>(iteration));
        fc.restarts = 8;
        if (!final_fit && iteration > 0 && !history.empty()) {
            const HistoryRecord& prev = history.back();
            if (!prev.log_params.empty()) {
                fc.warm_start_log_params = prev.log_params;
                fc.restarts = 2;  // warm start plus one fresh restart
            }
        }
        model = GpSurrogate::fit(doe, fc);
    };

    // Pending record: selection persisted before its evaluation landed.
    if (history.size() == static_cast<std::size_t>(doe.size()) - static_cast<std::size_t>(n0) + 1) {
        const HistoryRecord& pending = history.back();
        JointPoint jp{pending.x, pending.u};
        ObjectiveVector y = problem.evaluate(jp.x, jp.u);
        doe_out << doe_row(jp, y) << "\n" << std::flush;
        doe.add(std::move(jp), std::move(y));
    }
    if (doe.size() != static_cast<std::size_t>(n0) + history.size())
        throw ConfigError("run: doe.csv and history.jsonl are inconsistent");

    for (int iter = static_cast<int>(history.size()); iter < budget; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        HistoryRecord rec;
        rec.iteration = iter;

        if (config.acquisition.kind != AcquisitionKind::random) {
            fit_model(iter, false);
            for (const auto& om : model.objectives()) {
                rec.log_params.push_back(om.log_params);
                rec.jitters.push_back(om.jitter);
            }
        }

        AcquisitionSpec spec;
        spec.kind = config.acquisition.kind;
        spec.beta = config.acquisition.beta;
        if (spec.kind != AcquisitionKind::random) {
            const std::uint64_t pareto_seed =
                stream_seed(config.seeds.design, kStreamPareto,
                            config.acquisition.resample_pareto ? static_cast<std::uint64_t>(iter + 1) : 0);
            spec.pareto_candidates = sobol_candidates(
                problem.x_box, static_cast<std::size_t>(config.acquisition.n_pareto), pareto_seed);
        }
        if (spec.kind == AcquisitionKind::iehvi) {
            spec.u_samples = config.acquisition.crn
                                 ? crn_samples
                                 : sample_u(problem.u_dist,
                                            static_cast<std::size_t>(config.acquisition.n_u),
                                            stream_seed(config.seeds.u, kStreamUSamples,
                                                        static_cast<std::uint64_t>(iter + 1)));
        }

        const std::uint64_t iter_seed =
            stream_seed(config.seeds.optimizer, kStreamSearch, static_cast<std::uint64_t>(iter));
        SelectionResult sel = select_next(model, spec, problem, config.optimizer, iter_seed, threads);
        sel.x = problem.x_box.clamp(sel.x);
        sel.u = problem.u_box.clamp(sel.u);

        rec.x = sel.x;
        rec.u = sel.u;
        rec.acquisition_value = sel.acquisition_value;
        rec.fallback = sel.fallback;
        history_out << rec.to_json().dump() << "\n" << std::flush;
        history.push_back(rec);

        JointPoint jp{sel.x, sel.u};
        ObjectiveVector y = problem.evaluate(jp.x, jp.u);
        doe_out << doe_row(jp, y) << "\n" << std::flush;
        doe.add(std::move(jp), std::move(y));

        const auto t1 = std::chrono::steady_clock::now();
        timings_out << iter << ","
                    << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() << "\n"
                    << std::flush;
    }

    fit_model(budget, true);
    {
        std::ofstream out(files.model_path);
        out << model.to_json().dump() << "\n";
    }

    RunOutcome outcome;
    outcome.dir = files.dir;
    outcome.model = std::move(model);
    outcome.doe = std::move(doe);
    return outcome;
}

}  // namespace moubo
