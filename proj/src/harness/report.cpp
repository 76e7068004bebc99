#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hope/harness.hpp"

namespace hope {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_raw_csv(std::ostream& os, const std::vector<RegretTrace>& traces) {
    os << "scenario,policy,repetition,seed,round,cumulative_regret\n";
    for (const auto& t : traces) {
        const std::string prefix = t.scenario + "," + t.policy + "," + std::to_string(t.repetition) + "," +
                                   std::to_string(t.seed) + ",";
        for (std::size_t r = 0; r < t.cumulative.size(); ++r) {
            os << prefix << (r + 1) << ',' << format_double(t.cumulative[r]) << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream& os, const AggregateResult& agg) {
    os << "scenario,policy,round,mean,std\n";
    for (const auto& s : agg.series) {
        for (std::size_t r = 0; r < s.mean.size(); ++r) {
            os << s.scenario << ',' << s.policy << ',' << (r + 1) << ',' << format_double(s.mean[r]) << ','
               << format_double(s.std[r]) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const AggregateResult& agg) {
    os << "scenario,policy,repetitions,final_mean,final_std,wall_seconds\n";
    for (const auto& s : agg.series) {
        os << s.scenario << ',' << s.policy << ',' << s.repetitions << ',' << format_double(s.final_mean()) << ','
           << format_double(s.final_std()) << ',' << format_double(s.wall_seconds) << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw StructuralError("csv line " + std::to_string(line_no) + ": invalid number '" + s + "'");
}

long parse_long(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw StructuralError("csv line " + std::to_string(line_no) + ": invalid integer '" + s + "'");
}

std::vector<std::vector<std::string>> read_rows(std::istream& is, const std::string& header) {
    std::string line;
    if (!std::getline(is, line) || line != header) {
        throw StructuralError("csv: expected header '" + header + "'");
    }
    const std::size_t width = split_fields(header).size();
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != width) {
            throw StructuralError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                  " fields");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

std::vector<RegretTrace> read_raw_csv(std::istream& is) {
    const auto rows = read_rows(is, "scenario,policy,repetition,seed,round,cumulative_regret");
    std::vector<RegretTrace> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i];
        const std::size_t line_no = i + 2;
        const int rep = static_cast<int>(parse_long(f[2], line_no));
        const long round = parse_long(f[4], line_no);
        const bool continues = !out.empty() && out.back().scenario == f[0] && out.back().policy == f[1] &&
                               out.back().repetition == rep && round != 1;
        if (!continues) {
            RegretTrace t;
            t.scenario = f[0];
            t.policy = f[1];
            t.repetition = rep;
            t.seed = std::stoull(f[3]);
            out.push_back(std::move(t));
        }
        RegretTrace& t = out.back();
        if (round != static_cast<long>(t.cumulative.size()) + 1) {
            throw StructuralError("csv line " + std::to_string(line_no) + ": rounds out of sequence");
        }
        t.cumulative.push_back(parse_double(f[5], line_no));
    }
    return out;
}

AggregateResult read_aggregate_csv(std::istream& is) {
    const auto rows = read_rows(is, "scenario,policy,round,mean,std");
    AggregateResult out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i];
        const std::size_t line_no = i + 2;
        const long round = parse_long(f[2], line_no);
        if (out.series.empty() || out.series.back().scenario != f[0] || out.series.back().policy != f[1] ||
            round == 1) {
            AggregateSeries s;
            s.scenario = f[0];
            s.policy = f[1];
            out.series.push_back(std::move(s));
        }
        AggregateSeries& s = out.series.back();
        if (round != static_cast<long>(s.mean.size()) + 1) {
            throw StructuralError("csv line " + std::to_string(line_no) + ": rounds out of sequence");
        }
        s.mean.push_back(parse_double(f[3], line_no));
        s.std.push_back(parse_double(f[4], line_no));
    }
    return out;
}

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::uint32_t fnv1a(const std::string& s) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::string policy_color(const std::string& name) {
    const std::uint32_t h = fnv1a(name);
    const double hue = static_cast<double>(h % 360u);
    const double sat = 0.55 + 0.25 * static_cast<double>((h >> 9) % 100u) / 100.0;
    const double light = 0.38 + 0.12 * static_cast<double>((h >> 17) % 100u) / 100.0;
    // HSL to RGB.
    const double chroma = (1.0 - std::abs(2.0 * light - 1.0)) * sat;
    const double hp = hue / 60.0;
    const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = chroma; g = x; }
    else if (hp < 2) { r = x; g = chroma; }
    else if (hp < 3) { g = chroma; b = x; }
    else if (hp < 4) { g = x; b = chroma; }
    else if (hp < 5) { r = x; b = chroma; }
    else { r = chroma; b = x; }
    const double m = light - chroma / 2.0;
    auto to_byte = [&](double v) { return static_cast<int>(std::lround(std::clamp(v + m, 0.0, 1.0) * 255.0)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", to_byte(r), to_byte(g), to_byte(b));
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= f * mag) return f * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const AggregateResult& agg, const std::string& scenario) {
    std::vector<const AggregateSeries*> rows;
    for (const auto& s : agg.series) {
        if (s.scenario == scenario) rows.push_back(&s);
    }
    if (rows.empty()) {
        throw StructuralError("render_svg: no policies for scenario '" + scenario + "'");
    }
    std::size_t rounds = 1;
    double ymax = 0.0;
    for (const auto* s : rows) {
        rounds = std::max(rounds, s->mean.size());
        for (std::size_t r = 0; r < s->mean.size(); ++r) ymax = std::max(ymax, s->mean[r] + s->std[r]);
    }
    if (!(ymax > 0.0) || !std::isfinite(ymax)) ymax = 1.0;
    const double ystep = nice_step(ymax);
    ymax = std::ceil(ymax / ystep) * ystep;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double round) { return kLeft + plot_w * round / static_cast<double>(rounds); };
    auto py = [&](double v) { return kTop + plot_h * (1.0 - std::clamp(v, 0.0, ymax) / ymax); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"16\">Cumulative regret: " << xml_escape(scenario) << "</text>\n";
    os << "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\"" << fixed(kLeft + plot_w)
       << "\" y2=\"" << fixed(kTop + plot_h) << "\"/>\n";
    os << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft) << "\" y2=\""
       << fixed(kTop + plot_h) << "\"/>\n";
    os << "</g>\n";
    os << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
    for (double v = 0.0; v <= ymax + 1e-9 * ymax; v += ystep) {
        os << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(v) + 4) << "\" text-anchor=\"end\">"
           << tick_label(v) << "</text>\n";
    }
    const double xstep = nice_step(static_cast<double>(rounds));
    for (double v = 0.0; v <= static_cast<double>(rounds) + 1e-9; v += xstep) {
        os << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(kTop + plot_h + 16)
           << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
    }
    os << "</g>\n";
    os << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 10)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">round</text>\n";
    os << "<text x=\"18\" y=\"" << fixed(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"13\" transform=\"rotate(-90 18 " << fixed(kTop + plot_h / 2) << ")\">cumulative regret</text>\n";

    for (const auto* s : rows) {
        const std::string color = policy_color(s->policy);
        os << "<polygon class=\"band\" data-policy=\"" << xml_escape(s->policy) << "\" fill=\"" << color
           << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (std::size_t r = 0; r < s->mean.size(); ++r) {
            os << (r ? " " : "") << fixed(px(static_cast<double>(r + 1))) << ',' << fixed(py(s->mean[r] + s->std[r]));
        }
        for (std::size_t r = s->mean.size(); r-- > 0;) {
            os << ' ' << fixed(px(static_cast<double>(r + 1))) << ',' << fixed(py(s->mean[r] - s->std[r]));
        }
        os << "\"/>\n";
    }
    for (const auto* s : rows) {
        const std::string color = policy_color(s->policy);
        os << "<path class=\"mean\" data-policy=\"" << xml_escape(s->policy) << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"2\" d=\"";
        for (std::size_t r = 0; r < s->mean.size(); ++r) {
            os << (r ? " L" : "M") << fixed(px(static_cast<double>(r + 1))) << ',' << fixed(py(s->mean[r]));
        }
        os << "\"/>\n";
    }
    os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = kTop + 10 + 22.0 * static_cast<double>(i);
        const double x = kWidth - kRight + 15;
        os << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x + 24) << "\" y2=\""
           << fixed(y) << "\" stroke=\"" << policy_color(rows[i]->policy) << "\" stroke-width=\"3\"/>\n";
        os << "<text x=\"" << fixed(x + 30) << "\" y=\"" << fixed(y + 4) << "\">" << xml_escape(rows[i]->policy)
           << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_plots(const AggregateResult& agg, const std::filesystem::path& dir) {
    if (agg.series.empty()) {
        throw StructuralError("emit_plots: aggregate has no policies");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create plot directory '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    for (const auto& scenario : agg.scenarios()) {
        const auto path = dir / ("plot_" + scenario + ".svg");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out << render_svg(agg, scenario);
        out.flush();
        if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
        written.push_back(path);
    }
    return written;
}

}  // namespace hope
