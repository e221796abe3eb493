#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mbjcas/types.hpp"

namespace mbjcas {

/// Fixed "%.12g" rendering so equal values always produce equal bytes.
inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Line-oriented CSV writer with one schema header row.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw ValidationError("cannot write file: " + path.string());
    }

    void header(const std::string& line) { out_ << line << "\n"; }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << csv_number(values[i]);
        }
        out_ << "\n";
    }

    void raw_row(const std::string& line) { out_ << line << "\n"; }

private:
    std::ofstream out_;
};

} // namespace mbjcas
