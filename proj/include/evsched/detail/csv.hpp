#ifndef EVSCHED_DETAIL_CSV_HPP
#define EVSCHED_DETAIL_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evsched/common.hpp"

namespace evsched::detail {

// Reads a two-column CSV "slot,<value>" with a mandatory header line.
// Slot indices must run 1..N ascending without gaps. Returns the values
// in slot order. expected_rows < 0 accepts any positive row count.
inline std::vector<double> read_slot_csv(const std::string& path,
                                         const std::string& expected_header,
                                         int expected_rows) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": no data rows");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header) {
        throw ValidationError(path + ": expected header '" + expected_header +
                              "', got '" + line + "'");
    }
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": malformed row '" + line + "'");
        }
        std::size_t pos = 0;
        int slot = 0;
        double value = 0.0;
        try {
            slot = std::stoi(line.substr(0, comma), &pos);
            if (pos != comma) throw std::invalid_argument("trailing junk");
            value = std::stod(line.substr(comma + 1), &pos);
            if (pos != line.size() - comma - 1) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": malformed row '" + line + "'");
        }
        if (slot != static_cast<int>(values.size()) + 1) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": slot indices must ascend from 1, got " +
                                  std::to_string(slot));
        }
        values.push_back(value);
    }
    if (values.empty()) {
        throw ValidationError(path + ": no data rows");
    }
    if (expected_rows >= 0 && static_cast<int>(values.size()) != expected_rows) {
        throw ValidationError(path + ": expected " + std::to_string(expected_rows) +
                              " rows, got " + std::to_string(values.size()));
    }
    return values;
}

} // namespace evsched::detail

#endif // EVSCHED_DETAIL_CSV_HPP
