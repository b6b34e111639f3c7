#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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

namespace py = pybind11;
using namespace axomap;

namespace {

// JSON crosses the boundary as text; the Python side parses it with the json module.
py::object to_py(const nlohmann::json& doc)
{
    return py::module_::import("json").attr("loads")(doc.dump());
}

nlohmann::json from_py(const py::object& obj)
{
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

Config as_config(const py::object& obj)
{
    if (py::isinstance<py::str>(obj)) {
        return Config::parse(obj.cast<std::string>());
    }
    return obj.cast<Config>();
}

} // namespace

PYBIND11_MODULE(_axomap, m)
{
    m.doc() = "Approximate LUT-based operators: characterization, surrogates, MaP and Pareto search.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<Config>(m, "Config")
        .def(py::init<std::uint64_t, int>(), py::arg("mask"), py::arg("size"))
        .def(py::init(&Config::parse), py::arg("text"))
        .def_static("all_ones", &Config::all_ones)
        .def_static("all_zeros", &Config::all_zeros)
        .def_property_readonly("size", &Config::size)
        .def_property_readonly("mask", &Config::mask)
        .def("used", &Config::used)
        .def("count", &Config::count)
        .def("__len__", &Config::size)
        .def("__str__", &Config::to_string)
        .def("__repr__", [](const Config& c) { return "Config('" + c.to_string() + "')"; })
        .def("__hash__", [](const Config& c) { return std::hash<Config>{}(c); })
        .def(py::self == py::self)
        .def("__lt__", [](const Config& a, const Config& b) { return a < b; });

    py::class_<ProductTable>(m, "ProductTable")
        .def("at", &ProductTable::at)
        .def_property_readonly("values", &ProductTable::values)
        .def_property_readonly("width_a", &ProductTable::width_a)
        .def_property_readonly("width_b", &ProductTable::width_b)
        .def_property_readonly("is_signed", &ProductTable::is_signed);

    py::class_<Netlist>(m, "Netlist")
        .def_property_readonly("name", &Netlist::name)
        .def_property_readonly("width_a", &Netlist::width_a)
        .def_property_readonly("width_b", &Netlist::width_b)
        .def_property_readonly("is_signed", &Netlist::is_signed)
        .def_property_readonly("removable", &Netlist::removable_count)
        .def("exact", &Netlist::exact)
        .def("evaluate", [](const Netlist& n, const py::object& c, std::int64_t a, std::int64_t b) {
            return n.evaluate(as_config(c), a, b);
        })
        .def("product_table", [](const Netlist& n, const py::object& c) { return n.product_table(as_config(c)); })
        .def("to_json", [](const Netlist& n) { return to_py(n.to_json()); })
        .def_static("from_json", [](const py::object& doc) { return Netlist::from_json(from_py(doc)); })
        .def("save", [](const Netlist& n, const std::string& path) { save_netlist(n, path); });

    m.def("build_multiplier", &build_multiplier, py::arg("width"), py::arg("signed") = true);
    m.def("build_adder", &build_adder, py::arg("width"));
    m.def("load_netlist", &load_netlist);

    m.def("characterize", [](const Netlist& n, const std::vector<py::object>& configs, unsigned threads) {
        std::vector<Config> cs;
        for (const auto& c : configs) {
            cs.push_back(as_config(c));
        }
        py::list out;
        for (const auto& r : characterize(n, cs, threads)) {
            py::dict d;
            d["config"] = r.config.to_string();
            for (const auto metric : {Metric::avg_abs_err, Metric::avg_abs_rel_err, Metric::prob_err, Metric::max_abs_err,
                                      Metric::power, Metric::cpd, Metric::luts, Metric::pdp, Metric::pdplut}) {
                d[py::str(std::string(metric_name(metric)))] = r.metric(metric);
            }
            out.append(d);
        }
        return out;
    }, py::arg("netlist"), py::arg("configs"), py::arg("threads") = 0);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("removable", &Dataset::removable)
        .def("__len__", &Dataset::size)
        .def("configs", &Dataset::configs)
        .def("column", [](const Dataset& d, const std::string& metric) { return d.column(parse_metric(metric)); })
        .def("save_csv", [](const Dataset& d, const std::string& path) { save_csv(d, path); });

    m.def("build_dataset", [](const Netlist& n, std::size_t size, std::uint64_t seed, unsigned threads) {
        return build_dataset(n, SamplingPlan::sized(n.removable_count(), size, seed), threads);
    }, py::arg("netlist"), py::arg("size"), py::arg("seed") = 0, py::arg("threads") = 0);
    m.def("exhaustive_dataset", [](const Netlist& n, unsigned threads) {
        Dataset d;
        d.records = characterize(n, all_configs(n.removable_count()), threads);
        d.netlist_name = n.name();
        d.removable = n.removable_count();
        return d;
    }, py::arg("netlist"), py::arg("threads") = 0);
    m.def("ingest_csv", py::overload_cast<const std::string&, int>(&ingest_csv), py::arg("path"), py::arg("removable"));

    py::class_<Samples>(m, "Samples")
        .def_readonly("configs", &Samples::configs)
        .def_readonly("target", &Samples::target)
        .def_readonly("removable", &Samples::removable)
        .def("__len__", &Samples::size);
    m.def("make_samples", [](const Dataset& d, const std::string& metric) { return make_samples(d, parse_metric(metric)); });

    m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); });
    m.def("single_regressor_r", [](const std::vector<double>& x, const std::vector<double>& y) {
        return single_regressor_r(x, y);
    });
    m.def("multivariate_r", &multivariate_r);
    m.def("rank_quadratic_features", &rank_quadratic_features, py::arg("samples"), py::arg("threads") = 0);

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("r2_train", &FitReport::r2_train)
        .def_readonly("r2_test", &FitReport::r2_test)
        .def_readonly("n_quad", &FitReport::n_quad)
        .def("to_json", [](const FitReport& r) { return to_py(r.to_json()); });

    py::class_<PolyModel>(m, "PolyModel")
        .def_readonly("intercept", &PolyModel::intercept)
        .def_readonly("linear", &PolyModel::linear)
        .def("predict", [](const PolyModel& p, const py::object& c) { return p.predict(as_config(c)); })
        .def("truncated", &PolyModel::truncated)
        .def("to_json", [](const PolyModel& p) { return to_py(p.to_json()); });

    py::class_<Estimator>(m, "Estimator")
        .def_property_readonly("kind", [](const Estimator& e) { return std::string(estimator_kind_name(e.kind())); })
        .def("predict", [](const Estimator& e, const py::object& c) { return e.predict(as_config(c)); })
        .def("to_json", [](const Estimator& e) { return to_py(e.to_json()); });

    m.def("fit_poly", [](const Samples& s, const std::vector<LutPair>& terms, std::uint64_t seed) {
        return fit_poly(s, terms, seed);
    }, py::arg("samples"), py::arg("quad_terms"), py::arg("seed") = 0);
    m.def("fit_estimator", [](const Samples& s, const std::string& kind, std::uint64_t seed, unsigned threads) {
        return fit_estimator(s, parse_estimator_kind(kind), seed, threads);
    }, py::arg("samples"), py::arg("kind") = "poly", py::arg("seed") = 0, py::arg("threads") = 0);

    py::class_<DatasetMaxima>(m, "DatasetMaxima")
        .def(py::init([](double p, double b) { return DatasetMaxima{p, b}; }), py::arg("p_max"), py::arg("b_max"))
        .def_readonly("p_max", &DatasetMaxima::p_max)
        .def_readonly("b_max", &DatasetMaxima::b_max);

    py::class_<MapProblem>(m, "MapProblem")
        .def("objective", [](const MapProblem& p, const py::object& c) { return p.objective(as_config(c)); })
        .def("feasible", [](const MapProblem& p, const py::object& c) { return p.feasible(as_config(c)); })
        .def_readonly("removable", &MapProblem::removable)
        .def_readonly("max_ppa", &MapProblem::max_ppa)
        .def_readonly("max_behav", &MapProblem::max_behav);

    py::class_<MapSolution>(m, "MapSolution")
        .def_readonly("config", &MapSolution::config)
        .def_readonly("v_ppa", &MapSolution::v_ppa)
        .def_readonly("v_behav", &MapSolution::v_behav)
        .def_readonly("objective", &MapSolution::objective)
        .def_readonly("feasible", &MapSolution::feasible)
        .def("to_json", [](const MapSolution& s) { return to_py(s.to_json()); });

    m.def("formulate", &formulate, py::arg("ppa_model"), py::arg("behav_model"), py::arg("wt_b"), py::arg("const_sf"),
          py::arg("n_quad"), py::arg("maxima"));
    m.def("solve_exact", &solve_exact);
    m.def("solve_heuristic", [](const MapProblem& p, std::uint64_t seed, int restarts, int budget) {
        return solve_heuristic(p, seed, HeuristicSettings{restarts, budget});
    }, py::arg("problem"), py::arg("seed") = 0, py::arg("restarts") = 16, py::arg("budget") = 200);

    m.def("hypervolume2d", [](const std::vector<std::pair<double, double>>& pts, std::pair<double, double> ref) {
        return hypervolume2d(pts, ref);
    }, py::arg("points"), py::arg("reference") = std::pair<double, double>{1.0, 1.0});
    m.def("pareto_filter", [](const std::vector<std::tuple<std::string, double, double>>& pts, double max_ppa,
                              double max_behav) {
        std::vector<ParetoPoint> in;
        for (const auto& [c, p, b] : pts) {
            in.push_back({Config::parse(c), p, b});
        }
        std::vector<std::tuple<std::string, double, double>> out;
        for (const auto& q : pareto_filter(in, Constraints{max_ppa, max_behav}).points) {
            out.emplace_back(q.config.to_string(), q.ppa, q.behav);
        }
        return out;
    }, py::arg("points"), py::arg("max_ppa") = std::numeric_limits<double>::infinity(),
       py::arg("max_behav") = std::numeric_limits<double>::infinity());

    py::class_<AppKernel>(m, "AppKernel")
        .def_property_readonly("kind", [](const AppKernel& k) { return std::string(app_name(k.kind)); })
        .def_readonly("rows", &AppKernel::rows)
        .def_readonly("cols", &AppKernel::cols)
        .def_readonly("data", &AppKernel::data)
        .def_readonly("weights", &AppKernel::weights)
        .def(py::self == py::self);
    m.def("builtin_kernel", [](const std::string& name) { return builtin_kernel(parse_app(name)); });
    m.def("load_kernel", &load_kernel);
    m.def("save_kernel", &save_kernel);
    m.def("app_behav", &app_behav, py::arg("kernel"), py::arg("table"));
    m.def("app_behav_direct", [](const AppKernel& k, const Netlist& n, const py::object& c) {
        return app_behav_direct(k, n, as_config(c));
    });

    m.def("run_all", [](const py::object& config, const std::string& base_dir, unsigned threads) {
        const auto summary = run_all(RunConfig::from_json(from_py(config), base_dir), threads);
        return summary.files;
    }, py::arg("config"), py::arg("base_dir") = ".", py::arg("threads") = 0);
}
