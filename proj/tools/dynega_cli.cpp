// dynega command-line tool. Talks to the library only through dynega.h.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynega.h"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kInternal = 3 };

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void config_error(std::string msg) { throw Failure{kConfig, std::move(msg)}; }
[[noreturn]] void data_error(std::string msg) { throw Failure{kData, std::move(msg)}; }

void check(dynega_status s, const std::string& context) {
    if (s == DYNEGA_OK) return;
    int code = kInternal;
    switch (dynega_status_class(s)) {
    case DYNEGA_CLASS_CONFIG: code = kConfig; break;
    case DYNEGA_CLASS_DATA: code = kData; break;
    default: break;
    }
    throw Failure{code, context + ": " + dynega_status_name(s) + ": " + dynega_last_error()};
}

std::mutex reporter_mutex;

void report(const std::string& line) {
    std::lock_guard lock(reporter_mutex);
    std::cerr << line << '\n';
}

void log_sink(const char* msg, void*) { report(msg); }

std::string text_of(const std::string& v) { return v; }
std::string text_of(bool v) { return v ? "true" : "false"; }
template <class T>
std::string text_of(T v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Options registered here are echoed into the manifest and can be replayed.
class Flags {
public:
    explicit Flags(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* opt(const std::string& name, T& var, const std::string& desc) {
        items_.emplace_back(name, [&var] { return text_of(var); });
        return app_->add_option("--" + name, var, desc)->capture_default_str();
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
        items_.emplace_back(name, [&var] { return text_of(var); });
        return app_->add_flag("--" + name, var, desc);
    }

    ojson resolved() const {
        ojson j = ojson::object();
        for (const auto& [name, get] : items_) j[name] = get();
        return j;
    }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<std::string()>>> items_;
};

struct Globals {
    std::uint64_t seed = 42;
    unsigned threads = 0;
    std::string out = "dynega_out";
    std::string config;
};

struct LandscapeOpts {
    int depth_min = 3;
    int depth_max = 0;
    int depth_step = 5;
    int glla_n = 5;
    int glla_tau = 1;
    double glla_dt = 1.0;
    int glla_order = 2;
    int glla_use_order = 1;
    std::string weights = "0.7,0.3";
    bool normalize_nmi = true;
    int walk_steps = 4;

    void add(Flags& f) {
        f.opt("depth-min", depth_min, "first embedding depth of the sweep");
        f.opt("depth-max", depth_max, "last depth (0: min(D, 1298))");
        f.opt("depth-step", depth_step, "depth increment");
        add_glla(f);
        f.opt("weights", weights, "composite weights w_nmi,w_tefi");
        f.opt("normalize-nmi", normalize_nmi, "min-max normalize NMI before weighting");
        f.opt("walk-steps", walk_steps, "Walktrap random-walk length");
    }

    void add_glla(Flags& f) {
        f.opt("glla-n", glla_n, "embedding dimension (window length)");
        f.opt("glla-tau", glla_tau, "embedding lag");
        f.opt("glla-dt", glla_dt, "sampling interval");
        f.opt("glla-order", glla_order, "highest derivative order fitted");
        f.opt("glla-use-order", glla_use_order, "derivative order used for the network");
    }

    dynega_glla_config glla() const { return {glla_n, glla_tau, glla_dt, glla_order, glla_use_order}; }

    dynega_sweep_config sweep(unsigned threads) const {
        dynega_sweep_config c;
        dynega_sweep_config_default(&c);
        c.depth_min = depth_min;
        c.depth_max = depth_max;
        c.depth_step = depth_step;
        c.glla = glla();
        const auto comma = weights.find(',');
        if (comma == std::string::npos) config_error("--weights expects two numbers, e.g. 0.7,0.3");
        try {
            std::size_t used = 0;
            const std::string a = weights.substr(0, comma), b = weights.substr(comma + 1);
            c.w_nmi = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            c.w_tefi = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
        } catch (const std::exception&) {
            config_error("--weights expects two numbers, e.g. 0.7,0.3; got '" + weights + "'");
        }
        c.normalize_nmi = normalize_nmi ? 1 : 0;
        c.walk_steps = walk_steps;
        c.threads = threads;
        return c;
    }
};

struct SourceOpts {
    std::string pool;
    std::string embeddings;
    std::string endpoint;
    std::string model;
    std::string cache_dir;

    void add(Flags& f, bool embeddings_flag = true) {
        f.opt("pool", pool, "item pool (CSV or JSONL)");
        if (embeddings_flag) f.opt("embeddings", embeddings, "embedding matrix (CSV or JSONL)");
        f.opt("endpoint", endpoint, "embeddings API base URL (fetch instead of --embeddings)");
        f.opt("model", model, "embedding model name");
        f.opt("cache-dir", cache_dir, "per-item response cache");
    }
};

struct Handles {
    dynega_pool pool = nullptr;
    dynega_embeddings emb = nullptr;
    dynega_trace trace = nullptr;
    Handles() = default;
    Handles(const Handles&) = delete;
    Handles& operator=(const Handles&) = delete;
    ~Handles() {
        dynega_trace_free(trace);
        dynega_embeddings_free(emb);
        dynega_pool_free(pool);
    }
};

std::string digest(const std::string& path) {
    char hex[65];
    check(dynega_sha256_file(path.c_str(), hex), "hashing " + path);
    return hex;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) data_error("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) data_error("cannot write " + path.string() + ": " + ec.message());
}

struct Manifest {
    std::string command;
    ojson config;
    ojson inputs = ojson::object();
    std::uint64_t seed = 0;

    void write(const fs::path& dir) const {
        ojson j;
        j["command"] = command;
        j["config"] = config;
        j["inputs"] = inputs;
        j["version"] = dynega_version();
        j["timestamp"] = utc_timestamp();
        j["seed"] = seed;
        write_text(dir / "manifest.json", j.dump(2) + "\n");
    }
};

void prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) data_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void load_sources(const SourceOpts& src, Handles& h, Manifest& m, bool need_embeddings = true) {
    if (src.pool.empty()) config_error("--pool is required");
    check(dynega_pool_load(src.pool.c_str(), &h.pool), "loading pool " + src.pool);
    m.inputs["pool"] = {{"path", src.pool}, {"sha256", digest(src.pool)}};
    if (!need_embeddings) return;

    if (!src.embeddings.empty()) {
        if (!src.endpoint.empty()) config_error("give either --embeddings or --endpoint, not both");
        check(dynega_embeddings_load(src.embeddings.c_str(), h.pool, &h.emb), "loading embeddings " + src.embeddings);
        m.inputs["embeddings"] = {{"path", src.embeddings}, {"sha256", digest(src.embeddings)}};
        return;
    }
    if (src.endpoint.empty()) config_error("--embeddings or --endpoint is required");
    if (src.model.empty()) config_error("--model is required with --endpoint");
    const char* key = std::getenv("EGA_API_KEY");
    if (!key || !*key) config_error("EGA_API_KEY is not set");

    dynega_fetch_config fc{};
    fc.endpoint = src.endpoint.c_str();
    fc.model = src.model.c_str();
    fc.api_key = key;
    fc.cache_dir = src.cache_dir.c_str();
    dynega_fetch_stats stats{};
    check(dynega_embeddings_fetch(&fc, h.pool, &h.emb, &stats), "fetching embeddings from " + src.endpoint);
    report("fetched " + std::to_string(dynega_embeddings_items(h.emb)) + " embeddings (" +
           std::to_string(stats.requests) + " requests, " + std::to_string(stats.retries) + " retries, " +
           std::to_string(stats.cache_hits) + " cached)");
}

std::vector<int> parse_k(const std::string& spec) {
    std::vector<int> ks;
    auto to_int = [&](const std::string& s) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            config_error("--k: cannot parse '" + spec + "' (use 5,10,20 or 3-40)");
        return v;
    };
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-', 1);
        if (dash == std::string::npos) {
            ks.push_back(to_int(part));
            continue;
        }
        const int lo = to_int(part.substr(0, dash)), hi = to_int(part.substr(dash + 1));
        if (hi < lo) config_error("--k: empty range '" + part + "'");
        for (int k = lo; k <= hi; ++k) ks.push_back(k);
    }
    if (ks.empty()) config_error("--k: no values");
    return ks;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// key=value lines (TOML style). Keys are flag names; `[command]` sections
// restrict the following keys to that command.
std::vector<std::string> config_args(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file " + path);
    std::vector<std::string> args;
    std::string line, section;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(path + ":" + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        std::replace(key.begin(), key.end(), '_', '-');
        if (!section.empty() && section != command) continue;
        if (!value.empty()) args.push_back("--" + key + "=" + value);
    }
    return args;
}

int run(std::vector<std::string> argv);

int cmd_replay(const std::string& manifest_path, const std::string& out) {
    std::ifstream in(manifest_path);
    if (!in) data_error("cannot open manifest " + manifest_path);
    ojson m;
    try {
        m = ojson::parse(in);
    } catch (const std::exception& e) {
        data_error("manifest " + manifest_path + ": " + e.what());
    }
    if (!m.contains("command") || !m.contains("config")) data_error("manifest " + manifest_path + " lacks command/config");
    std::vector<std::string> argv{m["command"].get<std::string>()};
    for (const auto& [key, value] : m["config"].items()) {
        // "--x=" would swallow the following argument
        const auto text = value.get<std::string>();
        if (!text.empty()) argv.push_back("--" + key + "=" + text);
    }
    const fs::path target = out.empty() ? fs::path(manifest_path).parent_path() : fs::path(out);
    argv.push_back("--out=" + (target.empty() ? std::string(".") : target.string()));
    return run(std::move(argv));
}

int run(std::vector<std::string> argv) {
    CLI::App app{"Embedding-landscape DynEGA: depth sweeps, Monte Carlo studies and figures"};
    app.set_version_flag("--version", std::string(dynega_version()));
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Globals g;
    app.add_option("--seed", g.seed, "seed for every random draw")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--config", g.config, "key=value file mirroring the flags");

    auto* sweep = app.add_subcommand("sweep", "landscape search over embedding depth for one pool");
    Flags sweep_flags(sweep);
    SourceOpts sweep_src;
    LandscapeOpts sweep_land;
    bool truth_from_pool = false;
    sweep_src.add(sweep_flags);
    sweep_flags.flag("truth-from-pool", truth_from_pool, "score against the pool's dimension labels");
    sweep_land.add(sweep_flags);

    auto* ega = app.add_subcommand("ega", "cross-sectional EGA on the full embedding matrix");
    Flags ega_flags(ega);
    SourceOpts ega_src;
    bool ega_truth = false;
    int ega_steps = 4;
    ega_src.add(ega_flags);
    ega_flags.flag("truth-from-pool", ega_truth, "report NMI against the pool's dimension labels");
    ega_flags.opt("walk-steps", ega_steps, "Walktrap random-walk length");

    auto* mc = app.add_subcommand("montecarlo", "simulation study on synthetic shallow-signal pools");
    Flags mc_flags(mc);
    std::string k_spec = "3-40";
    int iterations = 500;
    dynega_synthetic_spec syn;
    dynega_synthetic_spec_default(&syn);
    double secondary_load = syn.n_secondary ? syn.secondary[0].load : 0.0;
    LandscapeOpts mc_land;
    mc_flags.opt("k", k_spec, "items per dimension: list (5,10,20) or range (3-40)");
    mc_flags.opt("iterations", iterations, "replications per k");
    mc_flags.opt("dimensions", syn.n_dimensions, "latent dimensions per pool");
    mc_flags.opt("total-depth", syn.total_depth, "embedding length D");
    mc_flags.opt("signal-end", syn.signal.end, "signal occupies coordinates [0, signal-end)");
    mc_flags.opt("signal-load", syn.signal.load, "loading of the shallow signal band");
    mc_flags.opt("secondary-load", secondary_load, "loading of the weak deep band (0 disables)");
    mc_flags.opt("noise-sd", syn.noise_sd, "noise standard deviation");
    mc_land.add(mc_flags);

    auto* compare = app.add_subcommand("compare", "baseline vs optimized NMI per k from Monte Carlo results");
    Flags compare_flags(compare);
    std::string compare_results;
    compare_flags.opt("results", compare_results, "Monte Carlo results directory")->required();

    auto* vf = app.add_subcommand("vectorfield", "GLLA vector field over (TEFI, NMI) trajectories");
    Flags vf_flags(vf);
    std::string vf_results;
    LandscapeOpts vf_land;
    vf_flags.opt("results", vf_results, "Monte Carlo results directory")->required();
    vf_land.add_glla(vf_flags);

    auto* fetch = app.add_subcommand("fetch-embeddings", "embed a pool through an embeddings API");
    Flags fetch_flags(fetch);
    SourceOpts fetch_src;
    std::string fetch_format = "csv";
    fetch_src.add(fetch_flags, false);
    fetch_flags.opt("format", fetch_format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

    auto* replay = app.add_subcommand("replay", "rerun a command from its manifest.json");
    std::string replay_manifest;
    replay->add_option("manifest", replay_manifest, "manifest.json to replay")->required();

    std::vector<std::string> args = std::move(argv);
    // merge --config FILE before the explicit flags so the command line wins
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else
            continue;
        auto cmd = std::find_if(args.begin(), args.end(),
                                [&](const std::string& a) { return app.get_subcommand_no_throw(a) != nullptr; });
        if (cmd == args.end()) config_error("--config needs a command");
        const auto extra = config_args(path, *cmd);
        args.insert(cmd + 1, extra.begin(), extra.end());
        break;
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        config_error(e.what());
    }

    const fs::path out_dir(g.out);
    Manifest manifest;
    manifest.seed = g.seed;
    auto resolved = [&](const Flags& f) {
        ojson j;
        j["seed"] = text_of(g.seed);
        j["threads"] = text_of(g.threads);
        const ojson own = f.resolved();
        for (const auto& [k, v] : own.items()) j[k] = v;
        return j;
    };

    if (sweep->parsed()) {
        manifest.command = "sweep";
        manifest.config = resolved(sweep_flags);
        if (!truth_from_pool) config_error("sweep needs --truth-from-pool (NMI is scored against the pool labels)");
        const auto cfg = sweep_land.sweep(g.threads);
        Handles h;
        load_sources(sweep_src, h, manifest);
        check(dynega_sweep(h.emb, h.pool, &cfg, &h.trace), "sweep");
        prepare_out(out_dir);
        check(dynega_trace_write(h.trace, out_dir.string().c_str()), "writing results to " + out_dir.string());
        manifest.write(out_dir);
        dynega_optimum nmi_opt, tefi_opt, comp_opt;
        check(dynega_trace_optima(h.trace, &nmi_opt, &tefi_opt, &comp_opt), "sweep");
        std::cout << "NMI-only   depth " << nmi_opt.depth << "  NMI " << fmt(nmi_opt.nmi) << "  TEFI "
                  << fmt(nmi_opt.tefi) << '\n'
                  << "TEFI-only  depth " << tefi_opt.depth << "  NMI " << fmt(tefi_opt.nmi) << "  TEFI "
                  << fmt(tefi_opt.tefi) << '\n'
                  << "composite  depth " << comp_opt.depth << "  NMI " << fmt(comp_opt.nmi) << "  TEFI "
                  << fmt(comp_opt.tefi) << '\n';
        return kOk;
    }

    if (ega->parsed()) {
        manifest.command = "ega";
        manifest.config = resolved(ega_flags);
        Handles h;
        load_sources(ega_src, h, manifest);
        prepare_out(out_dir);
        dynega_depth_point pt;
        check(dynega_ega(h.emb, ega_truth ? h.pool : nullptr, ega_steps, out_dir.string().c_str(), &pt), "ega");
        manifest.write(out_dir);
        std::cout << "communities " << pt.n_communities << "  TEFI " << fmt(pt.tefi);
        if (pt.has_nmi) std::cout << "  NMI " << fmt(pt.nmi);
        std::cout << '\n';
        return kOk;
    }

    if (mc->parsed()) {
        manifest.command = "montecarlo";
        manifest.config = resolved(mc_flags);
        const auto ks = parse_k(k_spec);
        dynega_band secondary[1];
        dynega_mc_config cfg{};
        cfg.k_grid = ks.data();
        cfg.n_k = ks.size();
        cfg.iterations = iterations;
        cfg.base_seed = g.seed;
        cfg.sweep = mc_land.sweep(g.threads);
        cfg.synthetic = syn;
        if (syn.n_secondary && secondary_load > 0.0) {
            secondary[0] = syn.secondary[0];
            secondary[0].load = secondary_load;
            cfg.synthetic.secondary = secondary;
            cfg.synthetic.n_secondary = 1;
        } else {
            cfg.synthetic.secondary = nullptr;
            cfg.synthetic.n_secondary = 0;
        }
        prepare_out(out_dir);
        dynega_mc_summary summary{};
        check(dynega_montecarlo(&cfg, out_dir.string().c_str(), &summary), "montecarlo");
        manifest.write(out_dir);
        std::cout << summary.cells << " cells (" << summary.computed << " computed, "
                  << summary.cells - summary.computed << " resumed, " << summary.failed << " failed)\n";
        return kOk;
    }

    if (compare->parsed()) {
        manifest.command = "compare";
        manifest.config = resolved(compare_flags);
        const fs::path agg = fs::path(compare_results) / "aggregate.json";
        if (fs::exists(agg)) manifest.inputs["aggregate"] = {{"path", agg.string()}, {"sha256", digest(agg.string())}};
        std::size_t rows = 0;
        prepare_out(out_dir);
        check(dynega_compare(compare_results.c_str(), out_dir.string().c_str(), &rows), "compare " + compare_results);
        manifest.write(out_dir);
        std::cout << rows << " rows written to " << (out_dir / "compare.csv").string() << '\n';
        return kOk;
    }

    if (vf->parsed()) {
        manifest.command = "vectorfield";
        manifest.config = resolved(vf_flags);
        const fs::path agg = fs::path(vf_results) / "aggregate.json";
        if (fs::exists(agg)) manifest.inputs["aggregate"] = {{"path", agg.string()}, {"sha256", digest(agg.string())}};
        const auto glla = vf_land.glla();
        std::size_t arrows = 0;
        prepare_out(out_dir);
        check(dynega_vectorfield(vf_results.c_str(), &glla, out_dir.string().c_str(), &arrows),
              "vectorfield " + vf_results);
        manifest.write(out_dir);
        std::cout << arrows << " arrows written to " << (out_dir / "arrows.csv").string() << '\n';
        return kOk;
    }

    if (fetch->parsed()) {
        manifest.command = "fetch-embeddings";
        manifest.config = resolved(fetch_flags);
        if (fetch_src.endpoint.empty()) config_error("--endpoint is required");
        Handles h;
        load_sources(fetch_src, h, manifest);
        prepare_out(out_dir);
        const fs::path target = out_dir / ("embeddings." + fetch_format);
        check(dynega_embeddings_save(h.emb, target.string().c_str()), "writing " + target.string());
        manifest.write(out_dir);
        std::cout << dynega_embeddings_items(h.emb) << " x " << dynega_embeddings_depth(h.emb) << " written to "
                  << target.string() << '\n';
        return kOk;
    }

    if (replay->parsed()) {
        const bool out_given = app.get_option("--out")->count() > 0;
        return cmd_replay(replay_manifest, out_given ? g.out : std::string());
    }
    config_error("no command given");
}

} // namespace

int main(int argc, char** argv) {
    dynega_set_log(log_sink, nullptr);
    try {
        return run(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const Failure& f) {
        std::cerr << "dynega: error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "dynega: internal error: " << e.what() << '\n';
        return kInternal;
    }
}
