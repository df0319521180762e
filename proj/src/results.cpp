#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cbrc/errors.hpp"
#include "cbrc/harness.hpp"

namespace cbrc {

namespace {

constexpr const char* kHeader =
    "dataset,policy,mean_error_pct,std_error_pct,cells,horizon,config_digest";

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    if (quoted) throw ParseError("unterminated quote", line_no);
    return fields;
}

int policy_rank(const std::string& name) {
    const auto kinds = all_policy_kinds();
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (to_string(kinds[i]) == name) return static_cast<int>(i);
    }
    return static_cast<int>(kinds.size());
}

}  // namespace

std::string format_results_csv(std::span<const ResultsRow> rows) {
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += quote(r.dataset) + ',' + quote(r.policy) + ',' + fixed2(r.mean_error_pct) + ',' +
               fixed2(r.std_error_pct) + ',' + std::to_string(r.cells) + ',' +
               std::to_string(r.horizon) + ',' + quote(r.config_digest) + '\n';
    }
    return out;
}

std::vector<ResultsRow> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<ResultsRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line != kHeader) throw ParseError("unexpected results header", line_no);
            continue;
        }
        if (line.empty()) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 7) {
            throw ParseError("expected 7 fields, found " + std::to_string(f.size()), line_no);
        }
        try {
            rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]),
                            static_cast<std::size_t>(std::stoull(f[4])),
                            static_cast<std::uint64_t>(std::stoull(f[5])), f[6]});
        } catch (const std::logic_error&) {
            throw ParseError("malformed numeric field", line_no);
        }
    }
    if (line_no == 0) throw ParseError("empty results file", 1);
    return rows;
}

void write_results(const std::filesystem::path& path, std::span<const ResultsRow> rows) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << format_results_csv(rows);
    if (!out) throw IoError("write failed for " + path.string());
}

std::string render_table(std::span<const ResultsRow> rows) {
    std::vector<std::string> datasets;
    std::vector<std::string> policies;
    std::map<std::pair<std::string, std::string>, std::string> cells;
    for (const auto& r : rows) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
            datasets.push_back(r.dataset);
        }
        if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) {
            policies.push_back(r.policy);
        }
        cells[{r.dataset, r.policy}] = fixed2(r.mean_error_pct) + " ± " + fixed2(r.std_error_pct);
    }
    std::stable_sort(policies.begin(), policies.end(), [](const auto& a, const auto& b) {
        return policy_rank(a) < policy_rank(b);
    });

    // Column widths in code points; "±" is two bytes in UTF-8.
    auto width = [](const std::string& s) {
        std::size_t n = 0;
        for (unsigned char c : s) n += (c & 0xC0) != 0x80;
        return n;
    };
    std::size_t first = 7;
    for (const auto& d : datasets) first = std::max(first, width(d));
    std::vector<std::size_t> widths;
    for (const auto& p : policies) {
        std::size_t w = width(p);
        for (const auto& d : datasets) {
            auto it = cells.find({d, p});
            if (it != cells.end()) w = std::max(w, width(it->second));
        }
        widths.push_back(w);
    }

    auto pad = [&](const std::string& s, std::size_t w) {
        return s + std::string(w - std::min(w, width(s)), ' ');
    };
    std::string out = pad("dataset", first);
    for (std::size_t j = 0; j < policies.size(); ++j) out += " | " + pad(policies[j], widths[j]);
    out += '\n';
    out += std::string(first, '-');
    for (std::size_t w : widths) out += "-+-" + std::string(w, '-');
    out += '\n';
    for (const auto& d : datasets) {
        out += pad(d, first);
        for (std::size_t j = 0; j < policies.size(); ++j) {
            auto it = cells.find({d, policies[j]});
            out += " | " + pad(it == cells.end() ? "-" : it->second, widths[j]);
        }
        out += '\n';
    }
    return out;
}

std::string curve_file_name(const std::string& dataset, const Cell& cell) {
    char sparsity[32];
    std::snprintf(sparsity, sizeof sparsity, "%g", cell.sparsity * 100.0);
    std::string safe = dataset;
    for (char& c : safe) {
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    }
    return safe + "__" + std::string(to_string(cell.policy)) + "__sp" + sparsity + "__seed" +
           std::to_string(cell.seed) + ".csv";
}

void write_curve(const std::filesystem::path& path, const RegretLog& log, std::uint64_t stride) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    if (stride == 0) stride = 1;
    out << "t,cumulative_mistakes\n";
    for (std::size_t t = 1; t <= log.size(); ++t) {
        if (t % stride == 0 || t == log.size()) out << t << ',' << log.mistakes_through(t) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace cbrc
