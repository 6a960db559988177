#ifndef CCP_TESTS_ARFF_CHECK_HPP
#define CCP_TESTS_ARFF_CHECK_HPP

// Minimal ARFF grammar checker: @RELATION, a block of @ATTRIBUTE declarations
// (numeric or a nominal {..} class), then @DATA rows whose arity and value
// kinds match the declarations. Returns an empty string when valid, otherwise
// a description of the first violation.

#include <cctype>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace ccp::testing {

inline bool arff_numeric_token(const std::string& token) {
    if (token == "?") return true;
    char* end = nullptr;
    std::string copy = token;
    std::strtod(copy.c_str(), &end);
    return end && *end == '\0' && end != copy.c_str();
}

inline std::string check_arff(std::istream& in) {
    enum { Header, Attributes, Data } state = Header;
    std::vector<bool> numeric;           // per attribute: numeric vs nominal
    std::vector<std::vector<std::string>> nominal_values;
    std::string line;
    std::size_t line_no = 0, data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '%') continue;
        std::string where = "line " + std::to_string(line_no) + ": ";
        if (state == Header) {
            if (line.rfind("@RELATION ", 0) != 0 && line.rfind("@relation ", 0) != 0)
                return where + "expected @RELATION";
            if (line.size() <= 10) return where + "missing relation name";
            state = Attributes;
        } else if (state == Attributes) {
            if (line.rfind("@DATA", 0) == 0 || line.rfind("@data", 0) == 0) {
                if (numeric.empty()) return where + "@DATA before any @ATTRIBUTE";
                state = Data;
                continue;
            }
            if (line.rfind("@ATTRIBUTE ", 0) != 0 && line.rfind("@attribute ", 0) != 0)
                return where + "expected @ATTRIBUTE or @DATA";
            std::string rest = line.substr(11);
            auto space = rest.find_last_of(" \t");
            if (space == std::string::npos) return where + "attribute needs a name and a type";
            std::string type = rest.substr(space + 1);
            std::string name = rest.substr(0, space);
            if (name.empty()) return where + "empty attribute name";
            if (type == "NUMERIC" || type == "numeric" || type == "REAL" || type == "real") {
                numeric.push_back(true);
                nominal_values.emplace_back();
            } else if (!type.empty() && type.front() == '{' && type.back() == '}') {
                std::vector<std::string> values;
                std::string body = type.substr(1, type.size() - 2);
                std::stringstream ss(body);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item.empty()) return where + "empty nominal value";
                    values.push_back(item);
                }
                if (values.empty()) return where + "nominal attribute without values";
                numeric.push_back(false);
                nominal_values.push_back(std::move(values));
            } else {
                return where + "unsupported attribute type: " + type;
            }
        } else {
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, ',')) fields.push_back(item);
            if (fields.size() != numeric.size())
                return where + "row arity " + std::to_string(fields.size()) + " != " +
                       std::to_string(numeric.size()) + " attributes";
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (numeric[i]) {
                    if (!arff_numeric_token(fields[i]))
                        return where + "non-numeric value '" + fields[i] + "'";
                } else {
                    bool ok = fields[i] == "?";
                    for (const auto& v : nominal_values[i]) ok |= v == fields[i];
                    if (!ok) return where + "value '" + fields[i] + "' not in the nominal set";
                }
            }
            ++data_rows;
        }
    }
    if (state != Data) return "no @DATA section";
    return "";
}

}  // namespace ccp::testing

#endif
