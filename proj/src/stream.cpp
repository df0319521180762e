#include "cbrc/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "cbrc/errors.hpp"

namespace cbrc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view token) {
    if (token.empty()) return std::nullopt;
    if (token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

std::vector<double> normalize(std::span<const double> raw, std::size_t num_features) {
    std::vector<double> out(raw.begin(), raw.end());
    if (num_features == 0 || raw.empty()) return out;
    const std::size_t rows = raw.size() / num_features;
    for (std::size_t c = 0; c < num_features; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r = 0; r < rows; ++r) {
            lo = std::min(lo, raw[r * num_features + c]);
            hi = std::max(hi, raw[r * num_features + c]);
        }
        const double span = hi - lo;
        for (std::size_t r = 0; r < rows; ++r) {
            double& v = out[r * num_features + c];
            v = span > 0.0 ? (v - lo) / span : 0.0;
        }
    }
    return out;
}

Dataset build_dataset(std::string name, std::span<const double> raw_features,
                      std::size_t num_features, std::span<const std::string> raw_labels) {
    if (raw_labels.empty()) throw EmptyDataset(name + ": no instances");
    if (num_features == 0) throw EmptyDataset(name + ": no feature columns");
    if (raw_features.size() != raw_labels.size() * num_features) {
        throw DimensionMismatch(name + ": feature matrix does not match label count");
    }

    Dataset ds;
    ds.name = std::move(name);
    ds.num_instances = raw_labels.size();
    ds.num_features = num_features;
    ds.features = normalize(raw_features, num_features);
    ds.labels.reserve(raw_labels.size());

    std::unordered_map<std::string, std::size_t> index;
    for (const auto& token : raw_labels) {
        auto [it, inserted] = index.try_emplace(token, ds.class_names.size());
        if (inserted) ds.class_names.push_back(token);
        ds.labels.push_back(it->second);
    }
    ds.num_classes = ds.class_names.size();
    if (ds.num_classes < 2) {
        throw SingleClass(ds.name + ": only one class present");
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvFormat& format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());

    std::vector<double> raw;
    std::vector<std::string> labels;
    std::size_t arity = 0;
    std::size_t label_col = 0;
    std::size_t line_no = 0;
    std::string line;
    bool header_pending = format.has_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (format.max_rows && labels.size() >= *format.max_rows) break;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto tokens = split(view, format.delimiter);
        if (arity == 0) {
            arity = tokens.size();
            if (arity < 2) throw ParseError("need at least one feature and a label", line_no);
            const long col = format.label_column < 0
                                 ? static_cast<long>(arity) + format.label_column
                                 : format.label_column;
            if (col < 0 || col >= static_cast<long>(arity)) {
                throw ParseError("label column " + std::to_string(format.label_column) +
                                     " outside " + std::to_string(arity) + " columns",
                                 line_no);
            }
            label_col = static_cast<std::size_t>(col);
        } else if (tokens.size() != arity) {
            throw ParseError("expected " + std::to_string(arity) + " fields, found " +
                                 std::to_string(tokens.size()),
                             line_no);
        }
        for (std::size_t c = 0; c < arity; ++c) {
            if (c == label_col) {
                if (tokens[c].empty()) throw ParseError("empty label", line_no);
                labels.emplace_back(tokens[c]);
                continue;
            }
            const auto value = parse_number(tokens[c]);
            if (!value) {
                throw ParseError("non-numeric feature '" + std::string(tokens[c]) +
                                     "' in column " + std::to_string(c),
                                 line_no);
            }
            raw.push_back(*value);
        }
    }
    if (labels.empty()) throw EmptyDataset(path.string() + ": no instances");
    return build_dataset(path.stem().string(), raw, arity - 1, labels);
}

StreamRound next_round(const Dataset& dataset, std::uint64_t t,
                       const std::optional<DriftSchedule>& drift) {
    const std::size_t i = static_cast<std::size_t>(t % dataset.num_instances);
    std::size_t label = dataset.labels[i];
    if (drift && drift->period > 0) label = drift->relabel(label, t, dataset.num_classes);
    return {t, dataset.row(i), label};
}

int reward(std::size_t arm, const StreamRound& round, std::size_t num_classes) {
    if (arm >= num_classes) {
        throw ArmOutOfRange("arm " + std::to_string(arm) + " of " + std::to_string(num_classes));
    }
    return arm == round.true_label ? 1 : 0;
}

}  // namespace cbrc
