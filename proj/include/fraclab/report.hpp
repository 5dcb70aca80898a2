#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace fraclab {

/// Report values carry their provenance: computed | config | derived-oracle.
nlohmann::json prov(double value, const char* provenance);
nlohmann::json prov(bool value, const char* provenance);
nlohmann::json prov(const std::string& value, const char* provenance);

/// Atomic write (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);
void write_report_json(const std::string& outdir, const nlohmann::json& report);

/// Fixed-column CSV with %.17g floats.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    void add_row_mixed(const std::vector<std::string>& values);
    std::string str() const;
    void write(const std::string& outdir) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

std::string format_double(double v);

/// Minimal self-contained log-log SVG polyline plot.
std::string loglog_svg(const std::vector<std::vector<double>>& xs,
                       const std::vector<std::vector<double>>& ys,
                       const std::vector<std::string>& labels, const std::string& title);

} // namespace fraclab
