#include "dynega/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "dynega/error.hpp"
#include "svg.hpp"

namespace dynega {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string status_text(const DepthResult& r) {
    return r.ok() ? std::string("ok") : "skipped:" + r.skip_reason;
}

std::string opt_num(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

ordered_json optimum_json(const Optimum& o) {
    return ordered_json{{"depth", o.depth}, {"nmi", o.nmi}, {"tefi", o.tefi}, {"composite", o.composite}};
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << content;
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_trace_csv(const LandscapeTrace& trace, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "depth,status,n_communities,nmi,tefi,composite\n";
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        const auto& p = trace.points[i];
        out << p.depth << ',' << csv::quote(status_text(p)) << ',';
        if (p.ok()) {
            out << p.n_communities << ',' << opt_num(p.nmi) << ',' << csv::format_double(p.tefi) << ','
                << opt_num(i < trace.composite.size() ? trace.composite[i] : std::nullopt);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

std::string optima_json(const LandscapeTrace& trace, const SweepConfig& cfg, std::size_t total_depth) {
    std::size_t ok = 0;
    for (const auto& p : trace.points) ok += p.ok() ? 1 : 0;
    const auto grid = cfg.grid(total_depth);
    ordered_json j;
    j["grid"] = {{"depth_min", cfg.depth_min},
                 {"depth_max", grid.empty() ? 0 : grid.back()},
                 {"depth_step", cfg.depth_step},
                 {"points", trace.points.size()},
                 {"ok", ok},
                 {"skipped", trace.points.size() - ok}};
    j["glla"] = {{"n", cfg.glla.n},
                 {"tau", cfg.glla.tau},
                 {"delta_t", cfg.glla.delta_t},
                 {"max_order", cfg.glla.max_order},
                 {"use_order", cfg.glla.use_order}};
    j["walk_steps"] = cfg.walk_steps;
    j["nmi_only"] = optimum_json(trace.argmax_nmi);
    j["tefi_only"] = optimum_json(trace.argmin_tefi);
    auto comp = optimum_json(trace.composite_opt);
    comp["weights"] = {{"nmi", trace.weights.w_nmi}, {"tefi", trace.weights.w_tefi}};
    comp["normalize_nmi"] = cfg.normalize_nmi;
    j["composite"] = comp;
    return j.dump(2) + "\n";
}

void write_optima_json(const LandscapeTrace& trace, const SweepConfig& cfg, std::size_t total_depth,
                       const std::filesystem::path& path) {
    write_file_atomic(path, optima_json(trace, cfg, total_depth));
}

std::string depth_result_json(const DepthResult& r, const std::vector<std::string>& item_ids) {
    ordered_json j;
    j["depth"] = r.depth;
    j["status"] = status_text(r);
    if (r.ok()) {
        j["n_communities"] = r.n_communities;
        if (r.nmi) j["nmi"] = *r.nmi;
        j["tefi"] = r.tefi;
        ordered_json membership = ordered_json::array();
        for (std::size_t i = 0; i < r.partition.size(); ++i)
            membership.push_back({{"id", i < item_ids.size() ? item_ids[i] : std::to_string(i)},
                                  {"community", r.partition[i]}});
        j["partition"] = membership;
    }
    return j.dump(2) + "\n";
}

void write_landscape_svg(const LandscapeTrace& trace, const std::filesystem::path& path) {
    constexpr double W = 900, H = 480, left = 70, right = 830, top = 50, bottom = 420;
    svg::Canvas c(W, H);
    std::vector<const DepthResult*> ok;
    for (const auto& p : trace.points)
        if (p.ok() && p.nmi) ok.push_back(&p);
    std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->depth < b->depth; });

    double dmin = trace.points.empty() ? 0 : trace.points.front().depth, dmax = dmin;
    for (const auto& p : trace.points) {
        dmin = std::min<double>(dmin, p.depth);
        dmax = std::max<double>(dmax, p.depth);
    }
    double tlo = 0, thi = 0;
    for (std::size_t i = 0; i < ok.size(); ++i) {
        tlo = i ? std::min(tlo, ok[i]->tefi) : ok[i]->tefi;
        thi = i ? std::max(thi, ok[i]->tefi) : ok[i]->tefi;
    }
    auto [tl, th] = svg::padded_range(tlo, thi);
    svg::Axis x{dmin, dmax > dmin ? dmax : dmin + 1, left, right};
    svg::Axis yn{0.0, 1.0, bottom, top};
    svg::Axis yt{tl, th, bottom, top};

    c.rect(left, top, right - left, bottom - top, "none", "#999");
    for (double t : svg::ticks(x.lo, x.hi)) {
        c.line(x.map(t), bottom, x.map(t), bottom + 5, "#555");
        c.text(x.map(t), bottom + 18, svg::num(t).substr(0, svg::num(t).find('.')), 11, "middle");
    }
    for (double t : svg::ticks(0.0, 1.0, 5)) {
        c.line(left - 5, yn.map(t), left, yn.map(t), "#555");
        c.text(left - 8, yn.map(t) + 4, svg::num(t), 11, "end", "#c0392b");
    }
    for (double t : svg::ticks(tl, th, 5)) {
        c.line(right, yt.map(t), right + 5, yt.map(t), "#555");
        c.text(right + 8, yt.map(t) + 4, svg::num(t), 11, "start", "#2e6fd1");
    }
    c.text((left + right) / 2, H - 20, "Embedding depth (leading coordinates)", 13, "middle");
    c.text(22, (top + bottom) / 2, "NMI", 13, "middle", "#c0392b", -90);
    c.text(W - 18, (top + bottom) / 2, "TEFI", 13, "middle", "#2e6fd1", 90);

    std::vector<std::pair<double, double>> nmi_pts, tefi_pts;
    for (auto* p : ok) {
        nmi_pts.emplace_back(x.map(p->depth), yn.map(*p->nmi));
        tefi_pts.emplace_back(x.map(p->depth), yt.map(p->tefi));
    }
    c.polyline(nmi_pts, "#c0392b");
    c.polyline(tefi_pts, "#2e6fd1");

    struct Marker {
        const Optimum* opt;
        const char* colour;
        const char* label;
    };
    const Marker markers[] = {{&trace.argmax_nmi, "#1f4fbf", "NMI-only"},
                              {&trace.argmin_tefi, "#e377c2", "TEFI-only"},
                              {&trace.composite_opt, "#2ca02c", "composite"}};
    double ly = top - 30;
    double lx = left;
    for (const auto& m : markers) {
        if (ok.empty()) break;
        c.line(x.map(m.opt->depth), top, x.map(m.opt->depth), bottom, m.colour, 1.5, "6,4");
        c.line(lx, ly, lx + 24, ly, m.colour, 1.5, "6,4");
        c.text(lx + 30, ly + 4,
               std::string(m.label) + " d=" + std::to_string(m.opt->depth) + " NMI=" + svg::num(m.opt->nmi) +
                   " TEFI=" + svg::num(m.opt->tefi),
               11);
        lx += 250;
    }
    write_file_atomic(path, c.str());
}

std::filesystem::path cell_path(const std::filesystem::path& results_dir, int k, int iteration) {
    char name[64];
    std::snprintf(name, sizeof(name), "k%03d_it%04d.csv", k, iteration);
    return results_dir / "cells" / name;
}

void write_cell(const CellRecord& cell, const std::filesystem::path& path) {
    const auto& s = cell.summary;
    std::ostringstream out;
    out << "# k=" << s.k << ",iteration=" << s.iteration << ",seed=" << s.seed << '\n';
    out << "kind,depth,status,n_communities,nmi,tefi,composite\n";
    if (!s.ok) {
        out << "failed,," << csv::quote(s.failure) << ",,,,\n";
        write_file_atomic(path, out.str());
        return;
    }
    for (std::size_t i = 0; i < cell.points.size(); ++i) {
        const auto& p = cell.points[i];
        out << "point," << p.depth << ',' << csv::quote(status_text(p)) << ',';
        if (p.ok())
            out << p.n_communities << ',' << opt_num(p.nmi) << ',' << csv::format_double(p.tefi) << ','
                << opt_num(i < cell.composite.size() ? cell.composite[i] : std::nullopt);
        else
            out << ",,,";
        out << '\n';
    }
    out << "baseline,,ok," << s.baseline_communities << ',' << csv::format_double(s.baseline_nmi) << ','
        << csv::format_double(s.baseline_tefi) << ",\n";
    auto opt_row = [&](const char* kind, const Optimum& o) {
        out << kind << ',' << o.depth << ",ok,," << csv::format_double(o.nmi) << ',' << csv::format_double(o.tefi)
            << ',' << csv::format_double(o.composite) << '\n';
    };
    opt_row("argmax_nmi", s.argmax_nmi);
    opt_row("argmin_tefi", s.argmin_tefi);
    opt_row("composite_opt", s.composite_opt);
    write_file_atomic(path, out.str());
}

CellRecord read_cell(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    CellRecord rec;
    auto bad = [&](const std::string& why) -> void {
        fail(ErrorCode::Parse, path.string() + ": " + why);
    };
    std::string meta;
    if (!std::getline(in, meta) || meta.rfind("# ", 0) != 0) bad("missing cell header comment");
    if (std::sscanf(meta.c_str(), "# k=%d,iteration=%d,seed=%llu", &rec.summary.k, &rec.summary.iteration,
                    reinterpret_cast<unsigned long long*>(&rec.summary.seed)) != 3)
        bad("malformed cell header comment");

    csv::Reader reader(in);
    std::vector<std::string> f;
    if (!reader.next(f) || f.size() != 7 || f[0] != "kind") bad("missing column header");
    auto number = [&](const std::string& s) {
        double v = 0;
        if (!csv::parse_double(s, v)) bad("bad number '" + s + "'");
        return v;
    };
    auto integer = [&](const std::string& s) { return static_cast<int>(number(s)); };
    auto optimum = [&](const std::vector<std::string>& r) {
        return Optimum{integer(r[1]), number(r[4]), number(r[5]), number(r[6])};
    };
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 7) bad("expected 7 fields");
        const std::string& kind = f[0];
        if (kind == "failed") {
            rec.summary.ok = false;
            rec.summary.failure = f[2];
        } else if (kind == "point") {
            DepthResult p;
            p.depth = integer(f[1]);
            if (f[2] == "ok") {
                p.n_communities = integer(f[3]);
                if (!f[4].empty()) p.nmi = number(f[4]);
                p.tefi = number(f[5]);
                rec.composite.push_back(f[6].empty() ? std::nullopt : std::optional<double>(number(f[6])));
            } else {
                p.status = DepthStatus::Skipped;
                p.skip_reason = f[2].rfind("skipped:", 0) == 0 ? f[2].substr(8) : f[2];
                rec.composite.push_back(std::nullopt);
            }
            rec.points.push_back(std::move(p));
        } else if (kind == "baseline") {
            rec.summary.baseline_communities = integer(f[3]);
            rec.summary.baseline_nmi = number(f[4]);
            rec.summary.baseline_tefi = number(f[5]);
        } else if (kind == "argmax_nmi") {
            rec.summary.argmax_nmi = optimum(f);
        } else if (kind == "argmin_tefi") {
            rec.summary.argmin_tefi = optimum(f);
        } else if (kind == "composite_opt") {
            rec.summary.composite_opt = optimum(f);
        } else {
            bad("unknown row kind '" + kind + "'");
        }
    }
    return rec;
}

std::vector<std::filesystem::path> list_cells(const std::filesystem::path& results_dir) {
    std::vector<std::filesystem::path> out;
    const auto dir = results_dir / "cells";
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

void write_aggregate_json(const MCResults& results, const MonteCarloConfig& cfg, const SyntheticSpec& spec,
                          const std::filesystem::path& path) {
    ordered_json j;
    j["base_seed"] = cfg.base_seed;
    j["iterations"] = cfg.iterations;
    j["k_grid"] = cfg.k_grid;
    j["sweep"] = {{"depth_min", cfg.sweep.depth_min},
                  {"depth_max", cfg.sweep.depth_max},
                  {"depth_step", cfg.sweep.depth_step},
                  {"glla_n", cfg.sweep.glla.n},
                  {"glla_tau", cfg.sweep.glla.tau},
                  {"glla_max_order", cfg.sweep.glla.max_order},
                  {"glla_use_order", cfg.sweep.glla.use_order},
                  {"w_nmi", cfg.sweep.weights.w_nmi},
                  {"w_tefi", cfg.sweep.weights.w_tefi},
                  {"normalize_nmi", cfg.sweep.normalize_nmi},
                  {"walk_steps", cfg.sweep.walk_steps}};
    ordered_json bands = ordered_json::array();
    for (const auto& b : spec.secondary) bands.push_back({{"begin", b.begin}, {"end", b.end}, {"load", b.load}});
    j["synthetic"] = {{"n_dimensions", spec.n_dimensions},
                      {"total_depth", spec.total_depth},
                      {"signal", {{"begin", spec.signal.begin}, {"end", spec.signal.end}, {"load", spec.signal.load}}},
                      {"secondary", bands},
                      {"noise_sd", spec.noise_sd}};
    ordered_json per_k = ordered_json::array();
    for (const auto& a : results.aggregates) {
        per_k.push_back({{"k", a.k},
                         {"cells", a.cells},
                         {"failed", a.failed},
                         {"mean_depth_nmi", a.mean_depth_nmi},
                         {"mean_depth_tefi", a.mean_depth_tefi},
                         {"mean_depth_composite", a.mean_depth_composite},
                         {"mean_baseline_nmi", a.mean_baseline_nmi},
                         {"mean_optimized_nmi", a.mean_optimized_nmi},
                         {"delta", a.delta}});
    }
    j["per_k"] = per_k;
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<CompareRow> compare_results(const std::filesystem::path& results_dir) {
    if (!std::filesystem::is_directory(results_dir))
        fail(ErrorCode::NoResults, "results directory " + results_dir.string() + " does not exist");
    std::vector<CellSummary> cells;
    for (const auto& p : list_cells(results_dir)) cells.push_back(read_cell(p).summary);
    std::vector<CompareRow> rows;
    for (const auto& a : aggregate_cells(cells))
        if (a.cells > 0) rows.push_back({a.k, a.cells, a.mean_baseline_nmi, a.mean_optimized_nmi, a.delta});
    if (rows.empty()) fail(ErrorCode::NoResults, "no completed Monte Carlo cells under " + results_dir.string());
    return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "k,cells,mean_baseline_nmi,mean_optimized_nmi,delta\n";
    for (const auto& r : rows)
        out << r.k << ',' << r.cells << ',' << csv::format_double(r.mean_baseline_nmi) << ','
            << csv::format_double(r.mean_optimized_nmi) << ',' << csv::format_double(r.delta) << '\n';
    write_file_atomic(path, out.str());
}

void write_compare_svg(const std::vector<CompareRow>& rows, const std::filesystem::path& path) {
    constexpr double W = 900, H = 460, left = 70, right = 860, top = 50, bottom = 400;
    svg::Canvas c(W, H);
    svg::Axis y{0.0, 1.0, bottom, top};
    c.rect(left, top, right - left, bottom - top, "none", "#999");
    for (double t : svg::ticks(0.0, 1.0, 5)) {
        c.line(left - 5, y.map(t), right, y.map(t), "#ddd");
        c.text(left - 8, y.map(t) + 4, svg::num(t), 11, "end");
    }
    const double slot = (right - left) / std::max<std::size_t>(rows.size(), 1);
    const double bar = std::min(18.0, slot * 0.38);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double b = std::clamp(rows[i].mean_baseline_nmi, 0.0, 1.0);
        const double o = std::clamp(rows[i].mean_optimized_nmi, 0.0, 1.0);
        c.rect(cx - bar, y.map(b), bar, bottom - y.map(b), "#9e9e9e");
        c.rect(cx, y.map(o), bar, bottom - y.map(o), "#1b9e77");
        c.text(cx, bottom + 16, std::to_string(rows[i].k), 10, "middle");
    }
    c.text((left + right) / 2, H - 18, "Items per dimension (k)", 13, "middle");
    c.text(22, (top + bottom) / 2, "Mean NMI", 13, "middle", "#222", -90);
    c.rect(left, 18, 14, 10, "#9e9e9e");
    c.text(left + 20, 27, "cross-sectional EGA (all coordinates)", 11);
    c.rect(left + 300, 18, 14, 10, "#1b9e77");
    c.text(left + 320, 27, "composite-optimised depth (DynEGA)", 11);
    write_file_atomic(path, c.str());
}

VectorFieldRun vector_field_from_results(const std::filesystem::path& results_dir, const GllaConfig& glla) {
    if (!std::filesystem::is_directory(results_dir))
        fail(ErrorCode::NoResults, "results directory " + results_dir.string() + " does not exist");
    VectorFieldRun run;
    for (const auto& p : list_cells(results_dir)) {
        CellRecord rec = read_cell(p);
        if (!rec.summary.ok) continue;
        ++run.traces;
        LandscapeTrace trace;
        trace.points = std::move(rec.points);
        try {
            auto arrows = vector_field({{rec.summary.k, &trace}}, glla);
            run.arrows.insert(run.arrows.end(), arrows.begin(), arrows.end());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TraceTooShort) throw;
            ++run.skipped_traces;
        }
    }
    if (run.traces == 0) fail(ErrorCode::NoResults, "no completed Monte Carlo cells under " + results_dir.string());
    return run;
}

void write_arrows_csv(const std::vector<Arrow>& arrows, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "tefi,nmi,d_tefi,d_nmi,k,depth_position\n";
    for (const auto& a : arrows)
        out << csv::format_double(a.tefi) << ',' << csv::format_double(a.nmi) << ',' << csv::format_double(a.d_tefi)
            << ',' << csv::format_double(a.d_nmi) << ',' << a.k << ',' << csv::format_double(a.depth_position)
            << '\n';
    write_file_atomic(path, out.str());
}

void write_vector_field_svg(const std::vector<Arrow>& arrows, const std::filesystem::path& path) {
    constexpr double W = 900, H = 640, left = 70, right = 800, top = 40, bottom = 580;
    svg::Canvas c(W, H);
    double tlo = 0, thi = 0, nlo = 0, nhi = 1, klo = 0, khi = 1, plo = 0, phi = 1;
    for (std::size_t i = 0; i < arrows.size(); ++i) {
        const auto& a = arrows[i];
        if (i == 0) {
            tlo = thi = a.tefi;
            nlo = nhi = a.nmi;
            klo = khi = a.k;
            plo = phi = a.depth_position;
        }
        tlo = std::min(tlo, a.tefi);
        thi = std::max(thi, a.tefi);
        nlo = std::min(nlo, a.nmi);
        nhi = std::max(nhi, a.nmi);
        klo = std::min<double>(klo, a.k);
        khi = std::max<double>(khi, a.k);
        plo = std::min(plo, a.depth_position);
        phi = std::max(phi, a.depth_position);
    }
    auto [tl, th] = svg::padded_range(tlo, thi);
    auto [nl, nh] = svg::padded_range(nlo, nhi);
    svg::Axis x{tl, th, left, right};
    svg::Axis y{nl, nh, bottom, top};
    c.rect(left, top, right - left, bottom - top, "none", "#999");
    for (double t : svg::ticks(tl, th)) {
        c.line(x.map(t), bottom, x.map(t), bottom + 5, "#555");
        c.text(x.map(t), bottom + 18, svg::num(t), 11, "middle");
    }
    for (double t : svg::ticks(nl, nh, 5)) {
        c.line(left - 5, y.map(t), left, y.map(t), "#555");
        c.text(left - 8, y.map(t) + 4, svg::num(t), 11, "end");
    }
    c.text((left + right) / 2, H - 20, "TEFI", 13, "middle");
    c.text(22, (top + bottom) / 2, "NMI", 13, "middle", "#222", -90);

    // One grid step of change, rescaled so the typical arrow is ~20 px long.
    std::vector<double> lengths;
    for (const auto& a : arrows) {
        const double dx = x.map(a.tefi + a.d_tefi) - x.map(a.tefi);
        const double dy = y.map(a.nmi + a.d_nmi) - y.map(a.nmi);
        lengths.push_back(std::hypot(dx, dy));
    }
    double scale = 1.0;
    if (!lengths.empty()) {
        auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
        std::nth_element(lengths.begin(), mid, lengths.end());
        if (*mid > 1e-9) scale = 20.0 / *mid;
    }
    for (const auto& a : arrows) {
        const double x1 = x.map(a.tefi), y1 = y.map(a.nmi);
        const double x2 = x1 + scale * (x.map(a.tefi + a.d_tefi) - x1);
        const double y2 = y1 + scale * (y.map(a.nmi + a.d_nmi) - y1);
        const double kt = khi > klo ? (a.k - klo) / (khi - klo) : 0.0;
        const double pt = phi > plo ? (a.depth_position - plo) / (phi - plo) : 0.0;
        c.arrow(x1, y1, x2, y2, svg::ramp_colour(kt), 0.4 + 2.6 * pt);
    }
    for (int i = 0; i < 10; ++i) {
        const double t = i / 10.0;
        c.rect(820, bottom - (bottom - top) * (t + 0.1), 20, (bottom - top) * 0.1, svg::ramp_colour(t + 0.05));
    }
    c.text(830, top - 8, "k=" + std::to_string(static_cast<int>(khi)), 11, "middle");
    c.text(830, bottom + 16, "k=" + std::to_string(static_cast<int>(klo)), 11, "middle");
    write_file_atomic(path, c.str());
}

} // namespace dynega
