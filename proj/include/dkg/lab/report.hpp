#pragma once

// Sweep reports: CSV tables (shortest round-trip float formatting), a fit
// summary and a log-log SVG plot.

#include "dkg/lab/sweep.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dkg::lab {

struct CsvRow {
    double mass = 0.0;
    double error = 0.0;
    double sbar_sup = 0.0;
    double dt_used = 0.0;
};

inline const char* csv_header = "mass,error,sbar_sup,dt_used";

namespace detail {

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

inline double csv_parse(const std::string& cell) {
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size())
        throw std::runtime_error("bad CSV number '" + cell + "'");
    return v;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace detail

inline std::string sweep_csv(const SweepResult& r) {
    std::string out = std::string(csv_header) + "\r\n";
    for (const auto& p : r.points)
        out += detail::csv_number(p.mass) + "," + detail::csv_number(p.error()) + "," + detail::csv_number(p.sbar_sup) +
               "," + detail::csv_number(p.dt_used) + "\r\n";
    return out;
}

/// Per-point details: every exponent, guard outcome and auxiliary norms.
inline std::string sweep_detail_csv(const SweepResult& r) {
    std::string out = "mass,ok,dt_used,guard_certified,guard_halvings,sbar_sup_l2,sbar_in_l2,gram_drift";
    for (double s : r.s_prime) out += ",error_s" + detail::csv_number(s);
    out += "\r\n";
    for (const auto& p : r.points) {
        out += detail::csv_number(p.mass) + "," + (p.ok ? "1" : "0") + "," + detail::csv_number(p.dt_used) + "," +
               (p.guard.certified ? "1" : "0") + "," +
               std::to_string(p.guard.dts.empty() ? 0 : p.guard.dts.size() - 1) + "," +
               detail::csv_number(p.sbar_sup_l2) + "," + detail::csv_number(p.sbar_in_l2) + "," +
               detail::csv_number(p.gram_drift);
        for (double e : p.errors) out += "," + detail::csv_number(e);
        out += "\r\n";
    }
    return out;
}

inline std::vector<CsvRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<CsvRow> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != csv_header) throw std::runtime_error("unexpected CSV header '" + line + "'");
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 4) throw std::runtime_error("CSV row needs 4 columns: '" + line + "'");
        rows.push_back({detail::csv_parse(cells[0]), detail::csv_parse(cells[1]), detail::csv_parse(cells[2]),
                        detail::csv_parse(cells[3])});
    }
    if (header) throw std::runtime_error("CSV is missing its header");
    return rows;
}

inline std::vector<CsvRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_csv(ss.str());
}

inline nlohmann::json fit_summary(const SweepResult& r) {
    nlohmann::json j;
    j["many_body"] = r.many_body;
    j["nld_solves"] = r.nld_solves;
    j["fits"] = nlohmann::json::array();
    for (std::size_t k = 0; k < r.s_prime.size(); ++k) {
        nlohmann::json f{{"s_prime", r.s_prime[k]}};
        if (k < r.fits.size() && r.fits[k]) {
            const RateFit& fit = *r.fits[k];
            f["rate"] = fit.rate;
            f["residual"] = fit.residual;
            f["log10_c"] = fit.log10_c;
            f["points"] = fit.points;
        } else {
            f["rate"] = nullptr;
        }
        j["fits"].push_back(f);
    }
    return j;
}

/// Log-log plot of the primary error against mass, with the fitted line when available.
inline std::string sweep_svg(const SweepResult& r) {
    const double w = 640, h = 480, left = 80, right = 30, top = 30, bottom = 60;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : r.points)
        if (p.ok && p.error() > 0.0 && std::isfinite(p.error())) pts.emplace_back(std::log10(p.mass), std::log10(p.error()));

    double x0 = 0, x1 = 1, y0 = -1, y1 = 0;
    if (!pts.empty()) {
        x0 = x1 = pts.front().first;
        y0 = y1 = pts.front().second;
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    }
    const double padx = std::max(0.1, 0.08 * (x1 - x0)), pady = std::max(0.1, 0.08 * (y1 - y0));
    x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * (h - top - bottom); };

    std::ostringstream s;
    s.precision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w - left - right << "\" height=\""
      << h - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d)
        s << "<line x1=\"" << left << "\" x2=\"" << w - right << "\" y1=\"" << py(d) << "\" y2=\"" << py(d)
          << "\" stroke=\"#ddd\"/><text x=\"" << left - 8 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e"
          << d << "</text>\n";
    for (const auto& p : r.points)
        s << "<text x=\"" << px(std::log10(p.mass)) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">"
          << p.mass << "</text>\n";
    s << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">mass</text>\n";
    s << "<text x=\"20\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (top + h - bottom) / 2 << ")\">error</text>\n";
    s << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w - left - right
      << "\" height=\"" << h - top - bottom << "\"/></clipPath>\n";
    if (const auto fit = r.fit()) {
        const RateFit& f = *fit;
        auto fy = [&](double x) { return f.log10_c - f.rate * x; };
        s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(fy(x1))
          << "\" stroke=\"#c33\" stroke-dasharray=\"6 4\" clip-path=\"url(#plot)\"/>\n";
        s << "<text x=\"" << w - right - 8 << "\" y=\"" << top + 18 << "\" text-anchor=\"end\">rate " << f.rate
          << ", residual " << f.residual << "</text>\n";
    }
    for (auto [x, y] : pts) s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\"#236\"/>\n";
    s << "</svg>\n";
    return s.str();
}

struct ReportFiles {
    std::string csv;
    std::string detail_csv;
    std::string fit_json;
    std::string plot;  ///< empty when the sweep has no points
};

inline ReportFiles emit_report(const SweepResult& r, const std::string& dir, const std::string& stem = "sweep") {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    ReportFiles f;
    f.csv = (base / (stem + ".csv")).string();
    f.detail_csv = (base / (stem + "_detail.csv")).string();
    f.fit_json = (base / (stem + "_fit.json")).string();
    detail::write_text(f.csv, sweep_csv(r));
    detail::write_text(f.detail_csv, sweep_detail_csv(r));
    detail::write_text(f.fit_json, fit_summary(r).dump(2) + "\n");
    if (!r.points.empty()) {
        f.plot = (base / (stem + ".svg")).string();
        detail::write_text(f.plot, sweep_svg(r));
    }
    return f;
}

}  // namespace dkg::lab
