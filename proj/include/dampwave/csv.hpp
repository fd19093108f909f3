#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dampwave::csv {

// Shortest form that still carries 17 significant digits; stable across runs.
std::string number(double x);

class Writer {
public:
    Writer(std::ostream& os, const std::vector<std::string>& header);
    Writer& operator<<(double x);
    Writer& operator<<(const std::string& s);
    Writer& operator<<(int x);
    void end_row();

private:
    std::ostream& os_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Numeric CSV with one header line.
Table read(std::istream& is);

}  // namespace dampwave::csv
