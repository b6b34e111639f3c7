#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "axomap/apps.hpp"
#include "axomap/error.hpp"
#include "axomap/pipeline.hpp"
#include "axomap/rng.hpp"

using namespace axomap;
namespace fs = std::filesystem;

namespace {

const Netlist& mul8()
{
    static const Netlist n = build_multiplier(8, true);
    return n;
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("axomap_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("accurate product table gives zero application error")
{
    const auto table = mul8().product_table(Config::all_ones(36));
    for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr}) {
        CAPTURE(app_name(k));
        CHECK(app_behav(builtin_kernel(k), table) == 0.0);
    }
}

TEST_CASE("heavily approximated multipliers do hurt the applications")
{
    const auto table = mul8().product_table(Config::parse("111111111111111111000000000000000000"));
    for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr}) {
        CAPTURE(app_name(k));
        CHECK(app_behav(builtin_kernel(k), table) > 0.0);
    }
}

TEST_CASE("table-driven and direct evaluation agree on a few configs")
{
    Rng rng(61);
    for (int t = 0; t < 2; ++t) {
        const Config c(rng.next() & ((1ULL << 36) - 1), 36);
        const auto table = mul8().product_table(c);
        for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify}) {
            const auto kernel = builtin_kernel(k);
            CHECK(app_behav(kernel, table) == app_behav_direct(kernel, mul8(), c));
        }
    }
}

TEST_CASE("application kernels require a signed 8x8 operator")
{
    const auto small = build_multiplier(4, true);
    CHECK_THROWS_AS((void)app_behav(builtin_kernel(AppKind::fir_peak), small.product_table(Config::all_ones(10))),
                    DomainError);
}

TEST_CASE("kernel definitions")
{
    const auto fir = builtin_kernel(AppKind::fir_peak);
    CHECK(fir.weights == std::vector<std::int8_t>{1, 3, 6, 10, 14, 17, 19, 20, 19, 17, 14, 10, 6, 3, 1});
    CHECK_FALSE(reference_peaks(fir).empty());
    const auto gemv = builtin_kernel(AppKind::gemv_classify);
    CHECK(gemv.rows == 200);
    CHECK(gemv.cols == 32);
    CHECK(gemv.weights.size() == 320);
    const auto conv = builtin_kernel(AppKind::conv2d_psnr);
    CHECK(conv.rows == 64);
    CHECK(conv.cols == 64);
    CHECK(builtin_kernel(AppKind::gemv_classify) == gemv);
}

TEST_CASE("kernel assets: round trip, checksum and bundled copies")
{
    for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr}) {
        const auto kernel = builtin_kernel(k);
        auto bytes = encode_kernel(kernel);
        CHECK(decode_kernel(bytes) == kernel);
        CHECK(load_kernel(std::string(AXOMAP_SOURCE_DIR) + "/assets/" + std::string(app_name(k)) + ".bin") == kernel);
        bytes[30] ^= 0x01;
        CHECK_THROWS_AS((void)decode_kernel(bytes), ValidationError);
        bytes[0] = 'X';
        CHECK_THROWS_AS((void)decode_kernel(bytes), ParseError);
    }
}

TEST_CASE("run configuration: strict keys, path resolution, round trip")
{
    CHECK_THROWS_AS((void)RunConfig::from_json(nlohmann::json{{"bogus", 1}}), ValidationError);
    CHECK_THROWS_AS((void)RunConfig::from_json(nlohmann::json{{"operator", {{"widht", 4}}}}), ValidationError);
    CHECK_THROWS((void)RunConfig::from_json(nlohmann::json{{"operator", {{"netlist", "missing.json"}}}}));
    CHECK_THROWS((void)RunConfig::from_json(nlohmann::json{{"metrics", {{"ppa", "area"}}}}));

    const auto dir = scratch("cfg");
    const auto cfg = RunConfig::from_json(nlohmann::json{{"out_dir", "out"}, {"seed", 4}, {"const_sf", {0.8}}}, dir.string());
    CHECK(fs::path(cfg.out_dir) == dir / "out");
    CHECK(cfg.seed == 4);
    const auto back = RunConfig::from_json(cfg.to_json(), dir.string());
    CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("run_all writes a complete, reproducible output tree")
{
    const auto dir = scratch("runall");
    nlohmann::json doc{{"operator", {{"kind", "mul"}, {"width", 4}, {"signed", true}}},
                       {"sampling", {{"n_random", 150}, {"seed", 1}}},
                       {"ga", {{"pop_size", 16}, {"max_generations", 8}}},
                       {"n_seeds", 1},
                       {"const_sf", {0.5}},
                       {"progression_terms", 8},
                       {"seed", 2}};
    doc["out_dir"] = (dir / "a").string();
    const auto a = run_all(RunConfig::from_json(doc), 1);
    doc["out_dir"] = (dir / "b").string();
    const auto b = run_all(RunConfig::from_json(doc), 3);
    REQUIRE(a.files == b.files);
    for (const auto* f : {"netlist.json", "dataset.csv", "pdplut_correlation.csv", "avg_abs_rel_err_model.json",
                          "pool_sf0.5.json", "dse_sf0.5/summary.csv"}) {
        CHECK(std::find(a.files.begin(), a.files.end(), f) != a.files.end());
    }
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    for (const auto& f : a.files) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
}

TEST_CASE("svg and numeric helpers")
{
    CHECK(sf_tag(0.5) == "sf0.5");
    CHECK(sf_tag(1.0) == "sf1");
}
