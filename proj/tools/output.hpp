#ifndef LDLAB_TOOLS_OUTPUT_HPP
#define LDLAB_TOOLS_OUTPUT_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace ldlab::tools {

using json = nlohmann::ordered_json;

// Full-precision decimal form; round-trips a double exactly.
std::string fmt_num(double v);

// Sets j[key] = v when finite; otherwise marks the record unreliable and
// omits the value (the JSON payload never carries NaN/Inf).
void put_num(json& j, const std::string& key, double v);

// RFC-4180-style CSV: header mandatory, fields quoted only when needed.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t width_;
    void emit(const std::vector<std::string>& fields);
};

void write_json(const std::filesystem::path& path, const json& j);

// Single-file SVG line plot, optionally log-scaled per axis; a convenience
// view of the CSV/JSON payload, never an input to checks.
void svg_plot(const std::filesystem::path& path, const std::string& title,
              const std::string& xlabel, const std::string& ylabel,
              const std::vector<double>& xs, const std::vector<double>& ys,
              bool logx, bool logy);

} // namespace ldlab::tools

#endif
