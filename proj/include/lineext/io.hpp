#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

/// Accepts "re,im", a bare real, or complex-literal syntax like "3+0i",
/// "-1.5-2e-3i", "2i".
inline Complex parse_complex(const std::string& text) {
    auto to_double = [&](const std::string& tok) {
        if (tok.empty()) throw ParseError("empty number in \"" + text + "\"");
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("bad number \"" + tok + "\" in \"" + text + "\"");
        }
    };
    const auto comma = text.find(',');
    if (comma != std::string::npos)
        return {to_double(text.substr(0, comma)), to_double(text.substr(comma + 1))};
    if (!text.empty() && text.back() == 'i') {
        const std::string body = text.substr(0, text.size() - 1);
        // split at the last +/- that is not a leading sign or an exponent sign
        std::size_t split = std::string::npos;
        for (std::size_t i = body.size(); i-- > 1;) {
            if ((body[i] == '+' || body[i] == '-') &&
                body[i - 1] != 'e' && body[i - 1] != 'E') {
                split = i;
                break;
            }
        }
        if (split == std::string::npos) {
            if (body.empty() || body == "+") return {0.0, 1.0};
            if (body == "-") return {0.0, -1.0};
            return {0.0, to_double(body)};
        }
        std::string im = body.substr(split);
        if (im == "+") im = "1";
        if (im == "-") im = "-1";
        return {to_double(body.substr(0, split)), to_double(im)};
    }
    return {to_double(text), 0.0};
}

/// "re,im" with 17 significant digits per part.
inline std::string format_complex(Complex v) {
    return fmt17(v.real()) + "," + fmt17(v.imag());
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

/// Reads a whole CSV file; returns rows of raw fields (header included).
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open \"" + path + "\"");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_row(line));
    }
    return rows;
}

inline double parse_double(const std::string& tok) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad number \"" + tok + "\"");
    }
}

/// Collects files written during one command; unless commit() is called,
/// everything is removed again on destruction so failed runs leave no
/// partial outputs behind.
class EmittedFiles {
public:
    EmittedFiles() = default;
    EmittedFiles(const EmittedFiles&) = delete;
    EmittedFiles& operator=(const EmittedFiles&) = delete;

    std::ofstream open(const std::string& path) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw Error("cannot write \"" + path + "\"");
        paths_.push_back(path);
        return out;
    }

    void commit() { committed_ = true; }

    ~EmittedFiles() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

} // namespace lineext
