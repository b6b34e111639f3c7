#include "axomap/apps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "axomap/error.hpp"
#include "axomap/parallel.hpp"
#include "axomap/rng.hpp"

namespace axomap {

namespace {

constexpr std::uint32_t kAssetVersion = 1;
constexpr char kMagic[4] = {'A', 'X', 'O', 'K'};

constexpr int kFirTaps[15] = {1, 3, 6, 10, 14, 17, 19, 20, 19, 17, 14, 10, 6, 3, 1};
constexpr int kFirShift = 7;
constexpr int kPeakRefractory = 40;
constexpr int kPeakTolerance = 4;

constexpr int kBinomial[5] = {1, 4, 6, 4, 1};
constexpr int kPixelMax = 127;
constexpr double kPsnrCap = 100.0;

std::int8_t clamp8(int v)
{
    return static_cast<std::int8_t>(std::clamp(v, -128, 127));
}

// Integer-only generators so the bundled data is identical on every platform.

AppKernel make_fir()
{
    AppKernel k;
    k.kind = AppKind::fir_peak;
    k.rows = 2048;
    k.cols = 1;
    k.weights.assign(std::begin(kFirTaps), std::end(kFirTaps));
    Rng rng(0xEC6);
    std::vector<int> x(static_cast<std::size_t>(k.rows), 0);
    int beat = 60;
    while (beat < k.rows - 40) {
        auto add = [&](int at, int v) {
            if (at >= 0 && at < k.rows) {
                x[static_cast<std::size_t>(at)] += v;
            }
        };
        const int r_amp = 80 + static_cast<int>(rng.below(21));
        for (int t = -20; t <= -8; ++t) { // P wave
            const int d = t + 14;
            add(beat + t, std::max(0, 12 - d * d / 3));
        }
        add(beat - 3, -10); // Q
        add(beat - 2, r_amp / 3);
        add(beat - 1, 2 * r_amp / 3);
        add(beat, r_amp); // R
        add(beat + 1, 2 * r_amp / 3);
        add(beat + 2, r_amp / 4);
        add(beat + 3, -18); // S
        add(beat + 4, -8);
        for (int t = 16; t <= 40; ++t) { // T wave
            const int d = t - 28;
            add(beat + t, std::max(0, 20 - d * d / 7));
        }
        beat += 140 + static_cast<int>(rng.below(31));
    }
    for (int n = 0; n < k.rows; ++n) {
        const int phase = n % 512;
        const int wander = (phase < 256 ? phase : 511 - phase) / 16 - 8; // slow triangle baseline
        const int noise = static_cast<int>(rng.below(9)) - 4;
        k.data.push_back(clamp8(x[static_cast<std::size_t>(n)] + wander + noise));
    }
    return k;
}

AppKernel make_gemv()
{
    AppKernel k;
    k.kind = AppKind::gemv_classify;
    k.rows = 200;
    k.cols = 32;
    constexpr int classes = 10;
    Rng rng(0x6E3F);
    for (int c = 0; c < classes; ++c) {
        for (int f = 0; f < k.cols; ++f) {
            k.weights.push_back(clamp8(static_cast<int>(rng.below(121)) - 60));
        }
    }
    for (int r = 0; r < k.rows; ++r) {
        const int label = static_cast<int>(rng.below(classes));
        for (int f = 0; f < k.cols; ++f) {
            const int proto = k.weights[static_cast<std::size_t>(label * k.cols + f)];
            k.data.push_back(clamp8(proto + static_cast<int>(rng.below(101)) - 50));
        }
    }
    return k;
}

AppKernel make_conv()
{
    AppKernel k;
    k.kind = AppKind::conv2d_psnr;
    k.rows = 64;
    k.cols = 64;
    for (const int a : kBinomial) {
        for (const int b : kBinomial) {
            k.weights.push_back(static_cast<std::int8_t>(a * b));
        }
    }
    Rng rng(0x6A55);
    for (int y = 0; y < k.rows; ++y) {
        for (int x = 0; x < k.cols; ++x) {
            int v = (x + y) / 2 + 10;
            const int dx = x - 22, dy = y - 24;
            if (dx * dx + dy * dy < 12 * 12) {
                v += 50;
            }
            if (x >= 40 && x < 56 && y >= 34 && y < 58) {
                v = 110 - (y - 34);
            }
            if ((x / 4 + y / 4) % 2 == 0 && y < 12) {
                v -= 20;
            }
            v += static_cast<int>(rng.below(11)) - 5;
            k.data.push_back(static_cast<std::int8_t>(std::clamp(v, 0, kPixelMax)));
        }
    }
    return k;
}

void check_table(const ProductTable& t)
{
    if (t.width_a() != 8 || t.width_b() != 8 || !t.is_signed()) {
        throw DomainError("application kernels need a signed 8x8 product table");
    }
}

// ---- kernels, parameterized by the multiplier ----

template <typename Mul>
std::vector<std::int32_t> fir_filter(const AppKernel& k, Mul&& mul)
{
    const int taps = static_cast<int>(k.weights.size());
    std::vector<std::int32_t> y(static_cast<std::size_t>(k.rows));
    for (int n = 0; n < k.rows; ++n) {
        std::int32_t acc = 0;
        for (int t = 0; t < taps && t <= n; ++t) {
            acc += mul(k.data[static_cast<std::size_t>(n - t)], k.weights[static_cast<std::size_t>(t)]);
        }
        y[static_cast<std::size_t>(n)] = acc >> kFirShift;
    }
    return y;
}

std::vector<int> detect_peaks(const std::vector<std::int32_t>& y)
{
    std::vector<int> peaks;
    if (y.size() < 3) {
        return peaks;
    }
    const std::int32_t threshold = *std::max_element(y.begin(), y.end()) / 2;
    for (std::size_t n = 1; n + 1 < y.size(); ++n) {
        if (y[n] > threshold && y[n] >= y[n - 1] && y[n] > y[n + 1]) {
            const int at = static_cast<int>(n);
            if (peaks.empty() || at - peaks.back() > kPeakRefractory) {
                peaks.push_back(at);
            }
        }
    }
    return peaks;
}

double peak_error(const std::vector<int>& ref, const std::vector<int>& got)
{
    if (ref.empty()) {
        return got.empty() ? 0.0 : 1.0;
    }
    std::size_t matched = 0, j = 0;
    for (const int r : ref) {
        while (j < got.size() && got[j] < r - kPeakTolerance) {
            ++j;
        }
        if (j < got.size() && got[j] <= r + kPeakTolerance) {
            ++matched;
            ++j;
        }
    }
    const std::size_t missed = ref.size() - matched;
    const std::size_t spurious = got.size() - matched;
    return static_cast<double>(missed + spurious) / static_cast<double>(ref.size());
}

template <typename Mul>
std::vector<int> gemv_argmax(const AppKernel& k, Mul&& mul)
{
    const int classes = static_cast<int>(k.weights.size()) / k.cols;
    std::vector<int> out(static_cast<std::size_t>(k.rows));
    for (int r = 0; r < k.rows; ++r) {
        int best = 0;
        std::int32_t best_score = 0;
        for (int c = 0; c < classes; ++c) {
            std::int32_t s = 0;
            for (int f = 0; f < k.cols; ++f) {
                s += mul(k.data[static_cast<std::size_t>(r * k.cols + f)], k.weights[static_cast<std::size_t>(c * k.cols + f)]);
            }
            if (c == 0 || s > best_score) {
                best = c;
                best_score = s;
            }
        }
        out[static_cast<std::size_t>(r)] = best;
    }
    return out;
}

template <typename Mul>
std::vector<int> conv_image(const AppKernel& k, Mul&& mul)
{
    std::vector<int> out(static_cast<std::size_t>(k.rows * k.cols));
    for (int y = 0; y < k.rows; ++y) {
        for (int x = 0; x < k.cols; ++x) {
            std::int32_t acc = 0;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    const int sy = std::clamp(y + dy, 0, k.rows - 1);
                    const int sx = std::clamp(x + dx, 0, k.cols - 1);
                    acc += mul(k.data[static_cast<std::size_t>(sy * k.cols + sx)],
                               k.weights[static_cast<std::size_t>((dy + 2) * 5 + dx + 2)]);
                }
            }
            out[static_cast<std::size_t>(y * k.cols + x)] = std::clamp((acc + 128) >> 8, 0, kPixelMax);
        }
    }
    return out;
}

double psnr(const AppKernel& k, const std::vector<int>& img)
{
    double sse = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = static_cast<double>(k.data[i]) - img[i];
        sse += d * d;
    }
    if (sse == 0) {
        return kPsnrCap;
    }
    const double mse = sse / static_cast<double>(img.size());
    return std::min(kPsnrCap, 10.0 * std::log10(static_cast<double>(kPixelMax) * kPixelMax / mse));
}

std::int32_t exact_mul(std::int8_t a, std::int8_t b)
{
    return static_cast<std::int32_t>(a) * static_cast<std::int32_t>(b);
}

template <typename Mul>
double behav_with(const AppKernel& k, Mul&& mul)
{
    switch (k.kind) {
    case AppKind::fir_peak:
        return peak_error(detect_peaks(fir_filter(k, exact_mul)), detect_peaks(fir_filter(k, mul)));
    case AppKind::gemv_classify: {
        const auto ref = gemv_argmax(k, exact_mul);
        const auto got = gemv_argmax(k, mul);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            diff += ref[i] != got[i] ? 1 : 0;
        }
        return static_cast<double>(diff) / static_cast<double>(ref.size());
    }
    case AppKind::conv2d_psnr:
        return psnr(k, conv_image(k, exact_mul)) - psnr(k, conv_image(k, mul));
    }
    throw ConfigurationError("unknown application kind");
}

// ---- asset encoding ----

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::uint32_t get32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        }
        return v;
    }
    std::vector<std::int8_t> get_bytes(std::size_t n)
    {
        need(n);
        std::vector<std::int8_t> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = static_cast<std::int8_t>(bytes[pos++]);
        }
        return v;
    }
    void need(std::size_t n) const
    {
        if (pos + n > bytes.size()) {
            throw ParseError("kernel asset: truncated");
        }
    }
};

} // namespace

std::string_view app_name(AppKind k)
{
    switch (k) {
    case AppKind::fir_peak: return "fir_peak";
    case AppKind::gemv_classify: return "gemv_classify";
    case AppKind::conv2d_psnr: return "conv2d_psnr";
    }
    return "?";
}

AppKind parse_app(std::string_view name)
{
    for (const auto k : {AppKind::fir_peak, AppKind::gemv_classify, AppKind::conv2d_psnr}) {
        if (app_name(k) == name) {
            return k;
        }
    }
    throw ConfigurationError("unknown application \"" + std::string(name) + "\" (fir_peak, gemv_classify, conv2d_psnr)");
}

AppKernel builtin_kernel(AppKind kind)
{
    switch (kind) {
    case AppKind::fir_peak: return make_fir();
    case AppKind::gemv_classify: return make_gemv();
    case AppKind::conv2d_psnr: return make_conv();
    }
    throw ConfigurationError("unknown application kind");
}

std::vector<std::uint8_t> encode_kernel(const AppKernel& k)
{
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put32(out, kAssetVersion);
    put32(out, static_cast<std::uint32_t>(k.kind));
    put32(out, static_cast<std::uint32_t>(k.rows));
    put32(out, static_cast<std::uint32_t>(k.cols));
    put32(out, static_cast<std::uint32_t>(k.data.size()));
    for (const auto v : k.data) {
        out.push_back(static_cast<std::uint8_t>(v));
    }
    put32(out, static_cast<std::uint32_t>(k.weights.size()));
    for (const auto v : k.weights) {
        out.push_back(static_cast<std::uint8_t>(v));
    }
    const std::uint64_t sum = fnv1a(out);
    put32(out, static_cast<std::uint32_t>(sum));
    put32(out, static_cast<std::uint32_t>(sum >> 32));
    return out;
}

AppKernel decode_kernel(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ParseError("kernel asset: bad magic");
    }
    const auto body = bytes.first(bytes.size() - 8);
    Reader tail{bytes.last(8)};
    const std::uint64_t stored = tail.get32() | (static_cast<std::uint64_t>(tail.get32()) << 32);
    if (stored != fnv1a(body)) {
        throw ValidationError("kernel asset: checksum mismatch");
    }
    Reader r{body, 4};
    const auto version = r.get32();
    if (version != kAssetVersion) {
        throw ValidationError("kernel asset: unsupported version " + std::to_string(version));
    }
    const auto kind = r.get32();
    if (kind > static_cast<std::uint32_t>(AppKind::conv2d_psnr)) {
        throw ValidationError("kernel asset: unknown kind");
    }
    AppKernel k;
    k.kind = static_cast<AppKind>(kind);
    k.rows = static_cast<int>(r.get32());
    k.cols = static_cast<int>(r.get32());
    k.data = r.get_bytes(r.get32());
    k.weights = r.get_bytes(r.get32());
    if (r.pos != body.size() || k.rows < 1 || k.cols < 1 ||
        k.data.size() != static_cast<std::size_t>(k.rows) * static_cast<std::size_t>(k.cols)) {
        throw ValidationError("kernel asset: inconsistent dimensions");
    }
    return k;
}

void save_kernel(const AppKernel& kernel, const std::string& path)
{
    const auto bytes = encode_kernel(kernel);
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path);
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AppKernel load_kernel(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot read " + path);
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_kernel(bytes);
}

double app_behav(const AppKernel& kernel, const ProductTable& table)
{
    check_table(table);
    return behav_with(kernel, [&](std::int8_t a, std::int8_t b) { return table.at(a, b); });
}

double app_behav_direct(const AppKernel& kernel, const Netlist& netlist, const Config& config)
{
    if (netlist.width_a() != 8 || netlist.width_b() != 8 || !netlist.is_signed() || netlist.kind() != OperatorKind::multiplier) {
        throw DomainError("application kernels need a signed 8x8 multiplier");
    }
    return behav_with(kernel, [&](std::int8_t a, std::int8_t b) {
        return static_cast<std::int32_t>(netlist.evaluate(config, a, b));
    });
}

std::vector<int> reference_peaks(const AppKernel& kernel)
{
    if (kernel.kind != AppKind::fir_peak) {
        throw ConfigurationError("reference peaks exist only for fir_peak");
    }
    return detect_peaks(fir_filter(kernel, exact_mul));
}

PpaMetrics app_ppa(const Config& config, const Netlist& netlist, const PpaModel& model)
{
    return ppa_metrics(netlist, config, model);
}

ExperimentInputs app_inputs(const Netlist& netlist, const AppKernel& kernel, std::span<const Config> training,
                            Metric ppa_metric, unsigned threads)
{
    if (is_behav_metric(ppa_metric)) {
        throw ConfigurationError("application search needs a PPA metric");
    }
    auto truth = [&netlist, kernel, ppa_metric](const Config& c) {
        MetricsRecord r;
        r.ppa = app_ppa(c, netlist);
        return std::pair{r.metric(ppa_metric), app_behav(kernel, netlist.product_table(c))};
    };
    std::vector<std::pair<double, double>> values(training.size());
    parallel_for(training.size(), threads, [&](std::size_t i) { values[i] = truth(training[i]); });

    ExperimentInputs in;
    in.name = netlist.name() + "_" + std::string(app_name(kernel.kind));
    in.removable = netlist.removable_count();
    in.ppa.configs.assign(training.begin(), training.end());
    in.behav.configs = in.ppa.configs;
    in.ppa.removable = in.behav.removable = in.removable;
    in.ppa.metric_name = std::string(metric_name(ppa_metric));
    in.behav.metric_name = std::string(app_name(kernel.kind)) + "_error";
    for (const auto& [p, b] : values) {
        in.ppa.target.push_back(p);
        in.behav.target.push_back(b);
    }
    in.truth = truth;
    return in;
}

} // namespace axomap
