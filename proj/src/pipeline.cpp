#include "axomap/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "axomap/error.hpp"
#include "axomap/svg.hpp"

namespace axomap {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const nlohmann::json& doc, const std::set<std::string>& allowed, const std::string& where)
{
    if (!doc.is_object()) {
        throw ValidationError(where + ": expected a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError(where + ": unknown key \"" + key + "\"");
        }
    }
}

std::string resolve(const std::string& path, const std::string& base)
{
    if (path.empty() || fs::path(path).is_absolute()) {
        return path;
    }
    return (fs::path(base) / path).string();
}

void say(std::ostream* log, const std::string& line)
{
    if (log != nullptr) {
        *log << line << '\n';
    }
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc, const std::string& base_dir)
{
    reject_unknown(doc,
                   {"operator", "sampling", "metrics", "estimator", "map", "ga", "methods", "n_seeds", "const_sf",
                    "ground_truth_fitness", "progression_terms", "app", "app_asset", "out_dir", "seed"},
                   "run config");
    RunConfig c;
    try {
        if (doc.contains("operator")) {
            const auto& op = doc["operator"];
            reject_unknown(op, {"kind", "width", "signed", "netlist"}, "operator");
            if (op.contains("netlist")) {
                c.netlist_path = resolve(op["netlist"].get<std::string>(), base_dir);
                if (!fs::exists(c.netlist_path)) {
                    throw ValidationError("operator: netlist file " + c.netlist_path + " does not exist");
                }
            }
            const auto kind = op.value("kind", std::string("mul"));
            if (kind != "mul" && kind != "add") {
                throw ValidationError("operator: kind must be \"mul\" or \"add\"");
            }
            c.kind = kind == "mul" ? OperatorKind::multiplier : OperatorKind::adder;
            c.width = op.value("width", c.width);
            c.is_signed = op.value("signed", c.kind == OperatorKind::multiplier);
        }
        if (doc.contains("sampling")) {
            const auto& s = doc["sampling"];
            reject_unknown(s, {"exhaustive", "n_random", "seed", "pattern_families", "window_sizes"}, "sampling");
            c.exhaustive = s.value("exhaustive", false);
            c.plan = SamplingPlan::from_json(s);
        } else {
            c.exhaustive = true;
        }
        if (doc.contains("metrics")) {
            const auto& m = doc["metrics"];
            reject_unknown(m, {"ppa", "behav"}, "metrics");
            c.ppa_metric = parse_metric(m.value("ppa", std::string(metric_name(c.ppa_metric))));
            c.behav_metric = parse_metric(m.value("behav", std::string(metric_name(c.behav_metric))));
            if (is_behav_metric(c.ppa_metric) || !is_behav_metric(c.behav_metric)) {
                throw ValidationError("metrics: ppa must be a PPA metric and behav a BEHAV metric");
            }
        }
        if (doc.contains("estimator")) {
            c.estimator = parse_estimator_kind(doc["estimator"].get<std::string>());
        }
        if (doc.contains("map")) {
            const auto& m = doc["map"];
            reject_unknown(m, {"wt_step", "n_quad_schedule", "exact_max_l", "restarts", "budget"}, "map");
            c.pool.wt_step = m.value("wt_step", c.pool.wt_step);
            c.pool.n_quad_schedule = m.value("n_quad_schedule", c.pool.n_quad_schedule);
            c.pool.exact_max_l = m.value("exact_max_l", c.pool.exact_max_l);
            c.pool.heuristic.restarts = m.value("restarts", c.pool.heuristic.restarts);
            c.pool.heuristic.budget = m.value("budget", c.pool.heuristic.budget);
            (void)weight_grid(c.pool.wt_step);
        }
        if (doc.contains("ga")) {
            reject_unknown(doc["ga"],
                           {"pop_size", "max_generations", "tournament_size", "crossover_rate", "mutation_rate", "seed",
                            "constraint_mode"},
                           "ga");
            c.ga = GaSettings::from_json(doc["ga"]);
        }
        c.methods = doc.value("methods", c.methods);
        c.n_seeds = doc.value("n_seeds", c.n_seeds);
        c.const_sf = doc.value("const_sf", c.const_sf);
        c.ground_truth_fitness = doc.value("ground_truth_fitness", c.ground_truth_fitness);
        c.progression_terms = doc.value("progression_terms", c.progression_terms);
        if (doc.contains("app") && !doc["app"].is_null()) {
            c.app = parse_app(doc["app"].get<std::string>());
        }
        if (doc.contains("app_asset")) {
            c.app_asset = resolve(doc["app_asset"].get<std::string>(), base_dir);
            if (!fs::exists(c.app_asset)) {
                throw ValidationError("app_asset " + c.app_asset + " does not exist");
            }
        }
        c.out_dir = resolve(doc.value("out_dir", c.out_dir), base_dir);
        c.seed = doc.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("run config: ") + e.what());
    }
    for (const double sf : c.const_sf) {
        if (!(sf > 0)) {
            throw ValidationError("run config: const_sf values must be positive");
        }
    }
    ExperimentSettings probe;
    probe.methods = c.methods;
    probe.n_seeds = c.n_seeds;
    probe.ga = c.ga;
    probe.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read run config " + path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("run config: ") + e.what());
    }
    return from_json(doc, fs::path(path).parent_path().string());
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json doc;
    if (!netlist_path.empty()) {
        doc["operator"] = {{"netlist", netlist_path}};
    } else {
        doc["operator"] = {{"kind", kind == OperatorKind::multiplier ? "mul" : "add"}, {"width", width}, {"signed", is_signed}};
    }
    if (exhaustive) {
        doc["sampling"] = {{"exhaustive", true}};
    } else {
        doc["sampling"] = plan.to_json();
    }
    doc["metrics"] = {{"ppa", metric_name(ppa_metric)}, {"behav", metric_name(behav_metric)}};
    doc["estimator"] = estimator_kind_name(estimator);
    doc["map"] = {{"wt_step", pool.wt_step},
                  {"n_quad_schedule", pool.n_quad_schedule},
                  {"exact_max_l", pool.exact_max_l},
                  {"restarts", pool.heuristic.restarts},
                  {"budget", pool.heuristic.budget}};
    doc["ga"] = ga.to_json();
    doc["methods"] = methods;
    doc["n_seeds"] = n_seeds;
    doc["const_sf"] = const_sf;
    doc["ground_truth_fitness"] = ground_truth_fitness;
    doc["progression_terms"] = progression_terms;
    if (app) {
        doc["app"] = app_name(*app);
    }
    if (!app_asset.empty()) {
        doc["app_asset"] = app_asset;
    }
    doc["out_dir"] = out_dir;
    doc["seed"] = seed;
    return doc;
}

Netlist make_netlist(const RunConfig& config)
{
    if (!config.netlist_path.empty()) {
        return load_netlist(config.netlist_path);
    }
    return config.kind == OperatorKind::multiplier ? build_multiplier(config.width, config.is_signed)
                                                   : build_adder(config.width);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << text;
}

void write_json(const std::string& path, const nlohmann::json& doc)
{
    write_text(path, doc.dump(2) + "\n");
}

std::string sf_tag(double const_sf)
{
    return "sf" + format_double(const_sf);
}

CorrelationReport write_analysis(const Samples& samples, const std::string& dir, const std::string& prefix, unsigned threads)
{
    auto rep = correlation_report(samples, threads);
    std::ostringstream corr, bi, svg;
    write_correlation_csv(rep, corr);
    write_bivariate_csv(rep, bi);
    write_heatmap_svg(svg, "multivariate r: " + rep.metric_name, rep.removable, rep.multivariate, 0.0, 1.0);
    write_text((fs::path(dir) / (prefix + "correlation.csv")).string(), corr.str());
    write_text((fs::path(dir) / (prefix + "bivariate.csv")).string(), bi.str());
    write_text((fs::path(dir) / (prefix + "heatmap.svg")).string(), svg.str());
    return rep;
}

std::pair<Estimator, FitReport> write_fit(const Samples& samples, EstimatorKind kind, std::uint64_t seed,
                                          std::size_t progression_terms, const std::string& dir, const std::string& prefix,
                                          unsigned threads)
{
    auto fit = fit_estimator(samples, kind, seed, threads);
    nlohmann::json doc;
    doc["model"] = fit.first.to_json();
    doc["report"] = fit.second.to_json();
    write_json((fs::path(dir) / (prefix + "model.json")).string(), doc);

    const auto ranked = rank_quadratic_features(samples, threads);
    const auto steps = poly_progression(samples, ranked, progression_terms, seed);
    std::ostringstream csv;
    csv << "n_quad,r2_train,r2_test,mae_test,mse_test\n";
    for (const auto& r : steps) {
        csv << r.n_quad << ',' << format_double(r.r2_train) << ',' << format_double(r.r2_test) << ','
            << format_double(r.mae_test) << ',' << format_double(r.mse_test) << '\n';
    }
    write_text((fs::path(dir) / (prefix + "r2_progression.csv")).string(), csv.str());
    return fit;
}

nlohmann::json RunSummary::to_json() const
{
    return {{"files", files}};
}

RunSummary run_all(const RunConfig& config, unsigned threads, std::ostream* log)
{
    RunSummary summary;
    const std::string dir = config.out_dir;
    fs::create_directories(dir);
    auto path = [&](const std::string& name) {
        summary.files.push_back(name);
        return (fs::path(dir) / name).string();
    };

    const Netlist netlist = make_netlist(config);
    const int L = netlist.removable_count();
    save_netlist(netlist, path("netlist.json"));
    say(log, "netlist " + netlist.name() + ": L = " + std::to_string(L));

    Dataset data;
    if (config.exhaustive) {
        data.records = characterize(netlist, all_configs(L), threads);
        data.netlist_name = netlist.name();
        data.removable = L;
        data.random_count = data.records.size();
    } else {
        config.plan.validate(L);
        data = build_dataset(netlist, config.plan, threads);
    }
    write_json(path("sampling.json"), config.exhaustive ? nlohmann::json{{"exhaustive", true}} : config.plan.to_json());
    save_csv(data, path("dataset.csv"));
    say(log, "dataset: " + std::to_string(data.size()) + " records");

    ExperimentInputs inputs;
    if (config.app) {
        const AppKernel kernel = config.app_asset.empty() ? builtin_kernel(*config.app) : load_kernel(config.app_asset);
        const auto configs = data.configs();
        inputs = app_inputs(netlist, kernel, configs, config.ppa_metric, threads);
        std::ostringstream csv;
        csv << "config," << inputs.ppa.metric_name << ',' << inputs.behav.metric_name << '\n';
        for (std::size_t i = 0; i < configs.size(); ++i) {
            csv << configs[i].to_string() << ',' << format_double(inputs.ppa.target[i]) << ','
                << format_double(inputs.behav.target[i]) << '\n';
        }
        write_text(path("app_training.csv"), csv.str());
    } else {
        inputs = operator_inputs(netlist, data, config.ppa_metric, config.behav_metric, threads);
    }

    for (const Samples* s : {&inputs.ppa, &inputs.behav}) {
        const std::string prefix = s->metric_name + "_";
        (void)write_analysis(*s, dir, prefix, threads);
        summary.files.push_back(prefix + "correlation.csv");
        summary.files.push_back(prefix + "bivariate.csv");
        summary.files.push_back(prefix + "heatmap.svg");
        (void)write_fit(*s, config.estimator, config.seed, config.progression_terms, dir, prefix, threads);
        summary.files.push_back(prefix + "model.json");
        summary.files.push_back(prefix + "r2_progression.csv");
        say(log, "analyzed and fitted " + s->metric_name);
    }

    ModelLadder ladder(inputs.ppa, inputs.behav, config.seed, threads);
    for (const double sf : config.const_sf) {
        PoolSettings ps = config.pool;
        ps.seed = config.seed;
        ps.threads = threads;
        const auto pool = build_pool(ladder, sf, ps);
        write_json(path("pool_" + sf_tag(sf) + ".json"), pool.to_json());

        ExperimentSettings es;
        es.methods = config.methods;
        es.n_seeds = config.n_seeds;
        es.const_sf = sf;
        es.ga = config.ga;
        es.pool = ps;
        es.estimator = config.estimator;
        es.ground_truth_fitness = config.ground_truth_fitness;
        es.seed = config.seed;
        es.threads = threads;
        const auto report = run_experiment(inputs, es, &pool);
        const std::string sub = "dse_" + sf_tag(sf);
        report.write((fs::path(dir) / sub).string());
        for (const auto& r : report.runs) {
            const std::string stem = sub + "/fronts_" + r.method + "_" + std::to_string(r.seed);
            summary.files.push_back(stem + ".csv");
            summary.files.push_back(stem + ".svg");
        }
        summary.files.push_back(sub + "/hv_trajectory.csv");
        summary.files.push_back(sub + "/summary.csv");
        say(log, "const_sf " + format_double(sf) + ": pool " + std::to_string(pool.entries.size()) + " configs");
    }
    auto echoed = config.to_json();
    echoed.erase("out_dir"); // keep outputs independent of where they are written
    write_json(path("run_config.json"), echoed);
    write_json((fs::path(dir) / "manifest.json").string(), summary.to_json());
    return summary;
}

} // namespace axomap
