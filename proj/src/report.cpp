#include "fraclab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

nlohmann::json prov(double value, const char* provenance) {
    return nlohmann::json{{"value", value}, {"provenance", provenance}};
}
nlohmann::json prov(bool value, const char* provenance) {
    return nlohmann::json{{"value", value}, {"provenance", provenance}};
}
nlohmann::json prov(const std::string& value, const char* provenance) {
    return nlohmann::json{{"value", value}, {"provenance", provenance}};
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

void write_report_json(const std::string& outdir, const nlohmann::json& report) {
    write_text_file(outdir + "/report.json", report.dump(2) + "\n");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw PreconditionError("csv row width mismatch");
    std::ostringstream os;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << format_double(values[i]);
    }
    rows_.push_back(os.str());
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& values) {
    if (values.size() != columns_.size())
        throw PreconditionError("csv row width mismatch");
    std::ostringstream os;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    rows_.push_back(os.str());
}

std::string CsvWriter::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (i) os << ',';
        os << columns_[i];
    }
    os << '\n';
    for (const auto& r : rows_) os << r << '\n';
    return os.str();
}

void CsvWriter::write(const std::string& outdir) const {
    write_text_file(outdir + "/trace.csv", str());
}

std::string loglog_svg(const std::vector<std::vector<double>>& xs,
                       const std::vector<std::vector<double>>& ys,
                       const std::vector<std::string>& labels, const std::string& title) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (size_t k = 0; k < xs.size(); ++k)
        for (size_t i = 0; i < xs[k].size(); ++i) {
            if (xs[k][i] <= 0.0 || ys[k][i] <= 0.0) continue;
            xlo = std::min(xlo, std::log10(xs[k][i]));
            xhi = std::max(xhi, std::log10(xs[k][i]));
            ylo = std::min(ylo, std::log10(ys[k][i]));
            yhi = std::max(yhi, std::log10(ys[k][i]));
        }
    if (xhi <= xlo) { xlo -= 0.5; xhi += 0.5; }
    if (yhi <= ylo) { ylo -= 0.5; yhi += 0.5; }
    auto px = [&](double lx) { return ML + (lx - xlo) / (xhi - xlo) * (W - ML - MR); };
    auto py = [&](double ly) { return H - MB - (ly - ylo) / (yhi - ylo) * (H - MT - MB); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
       << "</text>\n";
    os << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
       << "' stroke='black'/>\n";
    os << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
       << "' stroke='black'/>\n";
    for (int t = static_cast<int>(std::ceil(xlo)); t <= static_cast<int>(std::floor(xhi)); ++t)
        os << "<text x='" << px(t) << "' y='" << H - MB + 20
           << "' text-anchor='middle' font-size='11'>1e" << t << "</text>\n";
    for (int t = static_cast<int>(std::ceil(ylo)); t <= static_cast<int>(std::floor(yhi)); ++t)
        os << "<text x='" << ML - 8 << "' y='" << py(t) + 4
           << "' text-anchor='end' font-size='11'>1e" << t << "</text>\n";
    for (size_t k = 0; k < xs.size(); ++k) {
        os << "<polyline fill='none' stroke='" << colors[k % 5] << "' stroke-width='1.5' points='";
        for (size_t i = 0; i < xs[k].size(); ++i) {
            if (xs[k][i] <= 0.0 || ys[k][i] <= 0.0) continue;
            os << px(std::log10(xs[k][i])) << ',' << py(std::log10(ys[k][i])) << ' ';
        }
        os << "'/>\n";
        if (k < labels.size())
            os << "<text x='" << W - MR - 150 << "' y='" << MT + 16 * (k + 1) << "' fill='"
               << colors[k % 5] << "' font-size='12'>" << labels[k] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace fraclab
