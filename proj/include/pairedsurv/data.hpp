#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "pairedsurv/common.hpp"

namespace pairedsurv {

// One subject: the observed first time t1 (event indicator delta1, 1 in the
// default model where the first time is always observed) and the possibly
// right-censored second time y2 with indicator delta2.
struct PairedRecord {
    std::string id;
    double t1 = 0.0;
    int delta1 = 1;
    double y2 = 0.0;
    int delta2 = 1;
};

struct PairedDataset {
    std::vector<PairedRecord> records;

    std::size_t n() const { return records.size(); }
};

namespace detail {

inline double parse_number(const std::string& cell, const std::string& row_name,
                           const std::string& column) {
    double out = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("malformed numeric cell in row \"" + row_name + "\", column " + column +
                         ": \"" + cell + "\"");
    }
    return out;
}

inline int parse_indicator(const std::string& cell, const std::string& row_name,
                           const std::string& column) {
    const double v = parse_number(cell, row_name, column);
    if (v != 0.0 && v != 1.0) {
        throw ValidationError("indicator must be 0 or 1 in row \"" + row_name + "\", column " +
                              column);
    }
    return static_cast<int>(v);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

inline void validate_record(const PairedRecord& r) {
    if (!(r.t1 > 0.0)) {
        throw ValidationError("nonpositive time in row \"" + r.id + "\", column t1");
    }
    if (!(r.y2 > 0.0)) {
        throw ValidationError("nonpositive time in row \"" + r.id + "\", column y2");
    }
    if (r.delta1 != 0 && r.delta1 != 1) {
        throw ValidationError("delta1 must be 0 or 1 in row \"" + r.id + "\"");
    }
    if (r.delta2 != 0 && r.delta2 != 1) {
        throw ValidationError("delta2 must be 0 or 1 in row \"" + r.id + "\"");
    }
}

inline void validate_dataset(const PairedDataset& ds) {
    if (ds.records.empty()) throw ValidationError("dataset must contain at least one record");
    std::unordered_set<std::string> seen;
    for (const auto& r : ds.records) {
        validate_record(r);
        if (!seen.insert(r.id).second) throw ValidationError("duplicate id \"" + r.id + "\"");
    }
}

// Loads a comma-separated file with a header row naming columns
// id, t1, delta1 (optional; filled with 1), y2, delta2. Row order is preserved.
inline PairedDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = detail::split_csv_line(line);
    int col_id = -1, col_t1 = -1, col_d1 = -1, col_y2 = -1, col_d2 = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "id") col_id = static_cast<int>(i);
        else if (h == "t1") col_t1 = static_cast<int>(i);
        else if (h == "delta1") col_d1 = static_cast<int>(i);
        else if (h == "y2") col_y2 = static_cast<int>(i);
        else if (h == "delta2") col_d2 = static_cast<int>(i);
    }
    if (col_id < 0 || col_t1 < 0 || col_y2 < 0 || col_d2 < 0) {
        throw ParseError("header must name columns id,t1[,delta1],y2,delta2 in " + path);
    }

    PairedDataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() < header.size()) {
            throw ParseError("row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        PairedRecord r;
        r.id = cells[static_cast<std::size_t>(col_id)];
        r.t1 = detail::parse_number(cells[static_cast<std::size_t>(col_t1)], r.id, "t1");
        r.delta1 = col_d1 >= 0
                       ? detail::parse_indicator(cells[static_cast<std::size_t>(col_d1)], r.id,
                                                 "delta1")
                       : 1;
        r.y2 = detail::parse_number(cells[static_cast<std::size_t>(col_y2)], r.id, "y2");
        r.delta2 = detail::parse_indicator(cells[static_cast<std::size_t>(col_d2)], r.id, "delta2");
        ds.records.push_back(std::move(r));
    }
    validate_dataset(ds);
    return ds;
}

inline void save_csv(const PairedDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out.precision(17);
    out << "id,t1,delta1,y2,delta2\n";
    for (const auto& r : ds.records) {
        out << r.id << ',' << r.t1 << ',' << r.delta1 << ',' << r.y2 << ',' << r.delta2 << '\n';
    }
}

// Human-readable diagnostics; never throws. `delta` enables the within-pair
// tie check between delta*t1 and y2.
inline std::vector<std::string> validate(const PairedDataset& ds,
                                         std::optional<double> delta = std::nullopt) {
    std::vector<std::string> warnings;
    if (ds.records.empty()) {
        warnings.emplace_back("dataset is empty");
        return warnings;
    }
    std::size_t censored = 0;
    std::size_t ties = 0;
    for (const auto& r : ds.records) {
        if (r.delta2 == 0) ++censored;
        if (delta && *delta * r.t1 == r.y2) ++ties;
    }
    if (censored == ds.n()) warnings.emplace_back("no uncensored second events");
    if (censored > 0) {
        std::ostringstream os;
        os << censored << " of " << ds.n() << " second components censored ("
           << (100.0 * static_cast<double>(censored) / static_cast<double>(ds.n())) << "%)";
        warnings.push_back(os.str());
    }
    if (ties > 0) {
        warnings.push_back(std::to_string(ties) +
                           " row(s) with delta*t1 exactly equal to y2 (within-pair tie)");
    }
    return warnings;
}

}  // namespace pairedsurv
