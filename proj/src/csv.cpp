#include "smoothnorm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <unordered_map>

namespace smoothnorm {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
    throw std::invalid_argument(std::string(source) + ", line " + std::to_string(line) + ": " +
                                what);
}

}  // namespace

LabeledDataset read_csv(std::istream& in, std::string_view source_name) {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) {
        throw std::invalid_argument(std::string(source_name) + ": file is empty");
    }
    ++lineno;
    {
        const std::string_view header = trim(line);
        const auto comma = header.find(',');
        if (comma == std::string_view::npos || trim(header.substr(0, comma)) != "group" ||
            trim(header.substr(comma + 1)) != "value") {
            fail(source_name, lineno, "expected header 'group,value'");
        }
    }

    LabeledDataset out;
    std::unordered_map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) {
            fail(source_name, lineno, "expected 'group,value'");
        }
        const std::string label(trim(row.substr(0, comma)));
        if (label.empty()) fail(source_name, lineno, "empty group label");
        const std::string_view value_text = trim(row.substr(comma + 1));

        double value = 0.0;
        const auto* begin = value_text.data();
        const auto* end = value_text.data() + value_text.size();
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr != end || value_text.empty()) {
            fail(source_name, lineno,
                 "cannot parse value '" + std::string(value_text) + "' as a real number");
        }
        if (!std::isfinite(value)) {
            fail(source_name, lineno, "value must be finite");
        }

        auto [it, inserted] = index.try_emplace(label, out.data.groups.size());
        if (inserted) {
            out.data.groups.emplace_back();
            out.labels.push_back(label);
        }
        out.data.groups[it->second].push_back(value);
    }

    const std::size_t total = out.data.total_size();
    if (total == 0) {
        throw std::invalid_argument(std::string(source_name) + ": no observations");
    }
    if (total == 1) {
        throw std::invalid_argument(std::string(source_name) +
                                    ": a single observation cannot be tested");
    }
    return out;
}

LabeledDataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument(path + ": cannot open file");
    }
    return read_csv(in, path);
}

}  // namespace smoothnorm
