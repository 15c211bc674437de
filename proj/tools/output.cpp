#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ldlab::tools {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void put_num(json& j, const std::string& key, double v) {
    if (std::isfinite(v)) {
        j[key] = v;
    } else {
        j["unreliable"] = true;
    }
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    emit(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_)
        throw std::runtime_error("csv row width mismatch");
    emit(fields);
}

void CsvWriter::emit(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& f = fields[i];
        bool quote = f.find_first_of(",\"\r\n") != std::string::npos;
        if (i) out_ << ',';
        if (quote) {
            out_ << '"';
            for (char c : f) {
                if (c == '"') out_ << '"';
                out_ << c;
            }
            out_ << '"';
        } else {
            out_ << f;
        }
    }
    out_ << "\r\n";
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

void svg_plot(const std::filesystem::path& path, const std::string& title,
              const std::string& xlabel, const std::string& ylabel,
              const std::vector<double>& xs, const std::vector<double>& ys,
              bool logx, bool logy) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    std::vector<double> px, py;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        double x = xs[i], y = ys[i];
        if (logx) {
            if (x <= 0) continue;
            x = std::log10(x);
        }
        if (logy) {
            if (y <= 0) continue;
            y = std::log10(y);
        }
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        px.push_back(x);
        py.push_back(y);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    if (px.size() >= 2) {
        double xmin = px[0], xmax = px[0], ymin = py[0], ymax = py[0];
        for (std::size_t i = 1; i < px.size(); ++i) {
            xmin = std::min(xmin, px[i]); xmax = std::max(xmax, px[i]);
            ymin = std::min(ymin, py[i]); ymax = std::max(ymax, py[i]);
        }
        if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
        if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }
        auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
        auto Y = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
        out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < px.size(); ++i)
            out << X(px[i]) << ',' << Y(py[i]) << ' ';
        out << "\"/>\n";
        for (std::size_t i = 0; i < px.size(); ++i)
            out << "<circle cx=\"" << X(px[i]) << "\" cy=\"" << Y(py[i])
                << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
            << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
            << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
        auto label = [&](double v, bool is_log) {
            return fmt_num(is_log ? std::pow(10.0, v) : v);
        };
        out << "<text x=\"" << ml << "\" y=\"" << H - mb + 18
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << label(xmin, logx) << "</text>\n";
        out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << label(xmax, logx) << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << label(ymin, logy) << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << label(ymax, logy) << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << xlabel << (logx ? " (log)" : "") << "</text>\n";
    out << "<text x=\"16\" y=\"" << H / 2
        << "\" transform=\"rotate(-90 16 " << H / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << ylabel << (logy ? " (log)" : "") << "</text>\n";
    out << "</svg>\n";
}

} // namespace ldlab::tools
