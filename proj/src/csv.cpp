#include "fdaderiv/csv.hpp"

#include "fdaderiv/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

namespace fdaderiv {

std::string format_double(double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_csv_double(const std::string& field, std::size_t row, std::size_t col) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
        std::ostringstream os;
        os << "CSV parse error at row " << row << ", column " << col << ": '" << field
           << "' is not a number";
        throw IoError(os.str());
    }
    return v;
}

} // namespace fdaderiv
