#include "dampwave/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "dampwave/errors.hpp"

namespace dampwave::csv {

std::string number(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

Writer::Writer(std::ostream& os, const std::vector<std::string>& header) : os_(os), columns_(header.size())
{
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
}

Writer& Writer::operator<<(double x) { return *this << number(x); }

Writer& Writer::operator<<(int x) { return *this << std::to_string(x); }

Writer& Writer::operator<<(const std::string& s)
{
    if (filled_ == columns_) throw Error("csv row has more fields than the header");
    os_ << (filled_ ? "," : "") << s;
    ++filled_;
    return *this;
}

void Writer::end_row()
{
    if (filled_ != columns_) throw Error("csv row has fewer fields than the header");
    os_ << '\n';
    filled_ = 0;
}

Table read(std::istream& is)
{
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw Error("csv: empty input");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc()) throw Error("csv: not a number: '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.header.size()) throw Error("csv: row width does not match header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace dampwave::csv
