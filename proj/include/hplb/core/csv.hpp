#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/numfmt.hpp"

namespace hplb {

// One-line-header CSV writer. Doubles are written with 17 significant digits
// so repeated runs of a deterministic pipeline produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary), columns_(header.size()) {
        if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) {
            throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(columns_));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    static std::string num(double v) { return format_g17(v); }
    static std::string num(std::size_t v) { return std::to_string(v); }
    static std::string num(int v) { return std::to_string(v); }

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace hplb
