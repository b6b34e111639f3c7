// axomap command-line front end. Every subcommand is a thin wrapper over the
// library so that its files match the corresponding API calls byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "axomap/apps.hpp"
#include "axomap/charac.hpp"
#include "axomap/dataset.hpp"
#include "axomap/dse.hpp"
#include "axomap/error.hpp"
#include "axomap/estimate.hpp"
#include "axomap/map.hpp"
#include "axomap/netlist.hpp"
#include "axomap/pipeline.hpp"
#include "axomap/stats.hpp"

namespace fs = std::filesystem;
using namespace axomap;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 0;
    bool json = false;
};

struct OperatorOpts {
    std::string netlist;
    int mul = 0;
    int add = 0;
    bool is_signed = false;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--netlist", netlist, "Netlist JSON file");
        cmd->add_option("--mul", mul, "Generate a WIDTH x WIDTH multiplier")->check(CLI::PositiveNumber);
        cmd->add_option("--add", add, "Generate a WIDTH-bit adder")->check(CLI::PositiveNumber);
        cmd->add_flag("--signed", is_signed, "Signed multiplier");
    }

    [[nodiscard]] Netlist build() const
    {
        const int chosen = (netlist.empty() ? 0 : 1) + (mul > 0 ? 1 : 0) + (add > 0 ? 1 : 0);
        if (chosen != 1) {
            throw ValidationError("give exactly one of --netlist, --mul, --add");
        }
        if (!netlist.empty()) {
            return load_netlist(netlist);
        }
        if (mul > 0) {
            return build_multiplier(mul, is_signed);
        }
        if (is_signed) {
            throw ValidationError("adders are unsigned; drop --signed");
        }
        return build_adder(add);
    }
};

std::string out_path(const Globals& g, const std::string& name)
{
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

// Config length of the first data row of a dataset CSV.
int dataset_removable(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read " + path);
    }
    std::string line;
    std::getline(in, line);
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": no data rows");
    }
    return static_cast<int>(line.find(','));
}

Dataset read_dataset(const std::string& path)
{
    return ingest_csv(path, dataset_removable(path));
}

std::vector<Metric> parse_metrics(const std::vector<std::string>& names)
{
    std::vector<Metric> out;
    for (const auto& n : names) {
        out.push_back(parse_metric(n));
    }
    return out;
}

std::vector<PatternFamily> parse_patterns(const std::string& spec)
{
    if (spec == "none") {
        return {};
    }
    if (spec == "all") {
        return {PatternFamily::runs_of_ones, PatternFamily::runs_of_zeros, PatternFamily::alternating,
                PatternFamily::sliding_window};
    }
    std::vector<PatternFamily> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_family(item));
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"axomap: approximate LUT-based operator exploration"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Global random seed");
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_flag("--json", g.json, "Machine-readable status on stderr");

    std::vector<std::string> outputs;
    nlohmann::json extra;

    // gen
    OperatorOpts gen_op;
    std::string gen_out = "netlist.json";
    auto* gen = app.add_subcommand("gen", "Generate an accurate operator netlist");
    gen_op.attach(gen);
    gen->add_option("-o,--out", gen_out, "Output file name");
    gen->callback([&] {
        const Netlist n = gen_op.build();
        const auto p = out_path(g, gen_out);
        save_netlist(n, p);
        outputs.push_back(p);
        extra["removable"] = n.removable_count();
        std::cout << n.name() << ": L = " << n.removable_count() << " -> " << p << '\n';
    });

    // characterize
    OperatorOpts ch_op;
    std::size_t n_random = 0;
    std::string patterns = "all";
    std::vector<int> windows;
    bool exhaustive = false;
    std::size_t target = 0;
    std::string ch_out = "dataset.csv";
    auto* ch = app.add_subcommand("characterize", "Sample configurations and characterize them");
    ch_op.attach(ch);
    ch->add_option("--n-random", n_random, "Random configurations beyond the patterns");
    ch->add_option("--patterns", patterns, "all, none, or a comma list of families");
    ch->add_option("--windows", windows, "Pattern window sizes (default 1..L)");
    ch->add_option("--size", target, "Total dataset size; random draws fill up after the patterns");
    ch->add_flag("--exhaustive", exhaustive, "All 2^L configurations");
    ch->add_option("-o,--out", ch_out, "Output CSV name");
    ch->callback([&] {
        const Netlist n = ch_op.build();
        const int L = n.removable_count();
        Dataset d;
        if (exhaustive) {
            d.records = characterize(n, all_configs(L), g.threads);
            d.netlist_name = n.name();
            d.removable = L;
        } else {
            SamplingPlan plan = target > 0 ? SamplingPlan::sized(L, target, g.seed) : SamplingPlan::all_patterns(L, n_random, g.seed);
            plan.pattern_families = parse_patterns(patterns);
            if (!windows.empty()) {
                plan.window_sizes = windows;
            }
            if (target > 0) {
                const auto pat = sample_patterns(L, plan).size();
                plan.n_random = target > pat ? target - pat : 0;
            }
            plan.validate(L);
            d = build_dataset(n, plan, g.threads);
            write_json(out_path(g, "sampling.json"), plan.to_json());
        }
        const auto p = out_path(g, ch_out);
        save_csv(d, p);
        outputs.push_back(p);
        extra["records"] = d.size();
        std::cout << d.size() << " records -> " << p << '\n';
    });

    // analyze
    std::string an_data;
    std::vector<std::string> an_metrics{"pdplut", "avg_abs_rel_err"};
    auto* an = app.add_subcommand("analyze", "Bivariate / multivariate correlation analysis");
    an->add_option("--dataset", an_data, "Dataset CSV")->required();
    an->add_option("--metric", an_metrics, "Metrics to analyze");
    an->callback([&] {
        const Dataset d = read_dataset(an_data);
        fs::create_directories(g.out_dir);
        for (const auto m : parse_metrics(an_metrics)) {
            const std::string prefix = std::string(metric_name(m)) + "_";
            const auto rep = write_analysis(make_samples(d, m), g.out_dir, prefix, g.threads);
            for (const char* f : {"correlation.csv", "bivariate.csv", "heatmap.svg"}) {
                outputs.push_back(out_path(g, prefix + f));
            }
            extra[std::string(metric_name(m))] = {{"pairs", rep.ranking.size()}, {"warnings", rep.warnings.size()}};
            std::cout << metric_name(m) << ": " << rep.ranking.size() << " ranked pairs";
            if (!rep.ranking.empty()) {
                std::cout << ", top (" << rep.ranking[0].first << "," << rep.ranking[0].second << ") r = "
                          << rep.at(rep.ranking[0].first, rep.ranking[0].second);
            }
            std::cout << '\n';
        }
    });

    // fit
    std::string fit_data;
    std::vector<std::string> fit_metrics{"pdplut", "avg_abs_rel_err"};
    std::string fit_kind = "poly";
    std::size_t progression = 64;
    auto* fit = app.add_subcommand("fit", "Fit estimators and the R^2 progression over ranked terms");
    fit->add_option("--dataset", fit_data, "Dataset CSV")->required();
    fit->add_option("--metric", fit_metrics, "Target metrics");
    fit->add_option("--kind", fit_kind, "poly or tree_ensemble");
    fit->add_option("--progression", progression, "Ranked quadratic terms in the R^2 progression");
    fit->callback([&] {
        const Dataset d = read_dataset(fit_data);
        fs::create_directories(g.out_dir);
        const auto kind = parse_estimator_kind(fit_kind);
        for (const auto m : parse_metrics(fit_metrics)) {
            const std::string prefix = std::string(metric_name(m)) + "_";
            const auto [est, rep] = write_fit(make_samples(d, m), kind, g.seed, progression, g.out_dir, prefix, g.threads);
            outputs.push_back(out_path(g, prefix + "model.json"));
            outputs.push_back(out_path(g, prefix + "r2_progression.csv"));
            extra[std::string(metric_name(m))] = rep.to_json();
            std::cout << metric_name(m) << ": r2_train " << rep.r2_train << ", r2_test " << rep.r2_test << '\n';
        }
    });

    // map
    std::string map_data, map_ppa = "pdplut", map_behav = "avg_abs_rel_err";
    std::vector<double> map_sf{0.2, 0.5, 0.8, 1.0, 1.2, 1.5};
    PoolSettings pool_settings;
    auto* mp = app.add_subcommand("map", "Build MaP solution pools over the weight sweep");
    mp->add_option("--dataset", map_data, "Dataset CSV")->required();
    mp->add_option("--ppa-metric", map_ppa, "PPA metric");
    mp->add_option("--behav-metric", map_behav, "BEHAV metric");
    mp->add_option("--const-sf", map_sf, "Constraint scaling factors");
    mp->add_option("--wt-step", pool_settings.wt_step, "Weight step");
    mp->add_option("--schedule", pool_settings.n_quad_schedule, "Quadratic term counts (default 0,L/2,L,2L,C(L,2))");
    mp->add_option("--exact-max-l", pool_settings.exact_max_l, "Largest L solved exactly");
    mp->add_option("--restarts", pool_settings.heuristic.restarts, "Heuristic restarts");
    mp->add_option("--budget", pool_settings.heuristic.budget, "Heuristic descent steps per restart");
    mp->callback([&] {
        const Dataset d = read_dataset(map_data);
        ModelLadder ladder(make_samples(d, parse_metric(map_ppa)), make_samples(d, parse_metric(map_behav)), g.seed, g.threads);
        pool_settings.seed = g.seed;
        pool_settings.threads = g.threads;
        for (const double sf : map_sf) {
            const auto pool = build_pool(ladder, sf, pool_settings);
            const auto p = out_path(g, "pool_" + sf_tag(sf) + ".json");
            write_json(p, pool.to_json());
            outputs.push_back(p);
            std::cout << "const_sf " << sf << ": " << pool.entries.size() << " configs from " << pool.problems
                      << " problems (" << pool.infeasible << " infeasible)\n";
        }
    });

    // dse
    OperatorOpts dse_op;
    std::string dse_data, dse_ppa = "pdplut", dse_behav = "avg_abs_rel_err", dse_kind = "poly";
    ExperimentSettings es;
    es.n_seeds = 10;
    double dse_sf = 0.5;
    auto* dse = app.add_subcommand("dse", "GA / MaP / MaP+GA search with PPF and VPF fronts");
    dse_op.attach(dse);
    dse->add_option("--dataset", dse_data, "Training dataset CSV")->required();
    dse->add_option("--ppa-metric", dse_ppa, "PPA metric");
    dse->add_option("--behav-metric", dse_behav, "BEHAV metric");
    dse->add_option("--const-sf", dse_sf, "Constraint scaling factor");
    dse->add_option("--methods", es.methods, "GA, MaP, MaP+GA");
    dse->add_option("--n-seeds", es.n_seeds, "Seeds per method");
    dse->add_option("--generations", es.ga.max_generations, "GA generations");
    dse->add_option("--pop", es.ga.pop_size, "GA population size");
    dse->add_option("--estimator", dse_kind, "Fitness estimator: poly or tree_ensemble");
    dse->add_flag("--ground-truth", es.ground_truth_fitness, "Use simulated metrics as GA fitness");
    dse->callback([&] {
        const Netlist n = dse_op.build();
        const Dataset d = read_dataset(dse_data);
        es.const_sf = dse_sf;
        es.seed = g.seed;
        es.threads = g.threads;
        es.estimator = parse_estimator_kind(dse_kind);
        const auto inputs = operator_inputs(n, d, parse_metric(dse_ppa), parse_metric(dse_behav), g.threads);
        const auto rep = run_experiment(inputs, es);
        rep.write(g.out_dir);
        outputs.push_back(out_path(g, "hv_trajectory.csv"));
        outputs.push_back(out_path(g, "summary.csv"));
        for (const auto& m : es.methods) {
            extra["mean_hv_ppf"][m] = rep.mean_hv_ppf(m);
            std::cout << m << ": mean PPF hypervolume " << rep.mean_hv_ppf(m) << '\n';
        }
    });

    // app
    OperatorOpts app_op;
    std::string app_kernel = "gemv_classify", app_asset, app_data, app_ppa = "pdplut", export_dir;
    ExperimentSettings as;
    as.n_seeds = 3;
    double app_sf = 0.5;
    std::size_t app_size = 500;
    auto* ap = app.add_subcommand("app", "Application-specific search (signed 8x8 multipliers)");
    app_op.attach(ap);
    ap->add_option("--kernel", app_kernel, "fir_peak, gemv_classify or conv2d_psnr");
    ap->add_option("--asset", app_asset, "Kernel asset file (default: bundled data)");
    ap->add_option("--dataset", app_data, "Training configs from a dataset CSV");
    ap->add_option("--size", app_size, "Training configs to sample when no dataset is given");
    ap->add_option("--ppa-metric", app_ppa, "PPA metric");
    ap->add_option("--const-sf", app_sf, "Constraint scaling factor");
    ap->add_option("--methods", as.methods, "GA, MaP, MaP+GA");
    ap->add_option("--n-seeds", as.n_seeds, "Seeds per method");
    ap->add_option("--generations", as.ga.max_generations, "GA generations");
    ap->add_option("--export-assets", export_dir, "Write the bundled kernel assets to this directory and exit");
    ap->callback([&] {
        if (!export_dir.empty()) {
            fs::create_directories(export_dir);
            for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr}) {
                const auto p = (fs::path(export_dir) / (std::string(app_name(k)) + ".bin")).string();
                save_kernel(builtin_kernel(k), p);
                outputs.push_back(p);
            }
            return;
        }
        if (app_op.netlist.empty() && app_op.mul == 0 && app_op.add == 0) {
            app_op.mul = 8;
            app_op.is_signed = true;
        }
        const Netlist n = app_op.build();
        const AppKernel kernel = app_asset.empty() ? builtin_kernel(parse_app(app_kernel)) : load_kernel(app_asset);
        std::vector<Config> configs;
        if (!app_data.empty()) {
            configs = read_dataset(app_data).configs();
        } else {
            configs = plan_configs(n.removable_count(), SamplingPlan::sized(n.removable_count(), app_size, g.seed)).configs;
        }
        as.const_sf = app_sf;
        as.seed = g.seed;
        as.threads = g.threads;
        const auto inputs = app_inputs(n, kernel, configs, parse_metric(app_ppa), g.threads);
        const auto rep = run_experiment(inputs, as);
        rep.write(g.out_dir);
        outputs.push_back(out_path(g, "summary.csv"));
        for (const auto& m : as.methods) {
            extra["mean_hv_ppf"][m] = rep.mean_hv_ppf(m);
            std::cout << m << ": mean PPF hypervolume " << rep.mean_hv_ppf(m) << '\n';
        }
    });

    // run-all
    std::string run_cfg;
    auto* ra = app.add_subcommand("run-all", "Execute the whole flow from a run configuration file");
    ra->add_option("config", run_cfg, "Run configuration JSON")->required();
    ra->callback([&] {
        RunConfig cfg = RunConfig::load(run_cfg);
        if (app.get_option("--out-dir")->count() > 0) {
            cfg.out_dir = g.out_dir;
        }
        if (app.get_option("--seed")->count() > 0) {
            cfg.seed = g.seed;
        }
        const auto summary = run_all(cfg, g.threads, &std::cout);
        for (const auto& f : summary.files) {
            outputs.push_back((fs::path(cfg.out_dir) / f).string());
        }
    });

    int code = 0;
    std::string message;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        code = 1;
        message = e.what();
    } catch (const ValidationError& e) {
        code = 1;
        message = e.what();
    } catch (const ConfigurationError& e) {
        code = 1;
        message = e.what();
    } catch (const DomainError& e) {
        code = 1;
        message = e.what();
    } catch (const ParseError& e) {
        code = 1;
        message = e.what();
    } catch (const std::exception& e) {
        code = 2;
        message = e.what();
    }
    if (code != 0 && !g.json) {
        std::cerr << "axomap: " << message << '\n';
    }
    if (g.json) {
        nlohmann::json status{{"status", code == 0 ? "ok" : "error"}, {"code", code}, {"outputs", outputs}};
        if (code != 0) {
            status["message"] = message;
        }
        if (!extra.is_null()) {
            status["result"] = extra;
        }
        std::cerr << status.dump() << '\n';
    }
    return code;
}
