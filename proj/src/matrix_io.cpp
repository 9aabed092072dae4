#include "linsync/matrix_io.hpp"

#include "linsync/errors.hpp"
#include "linsync/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace linsync {
namespace {

constexpr std::string_view kMagic = "linsync-matrix 1";

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

double parse_value(std::string_view tok, int line) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(line, "non-numeric token '" + std::string(tok) + "'");
    }
    if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + std::string(tok) + "'");
    return v;
}

} // namespace

ConnectivityMatrix read_matrix(std::istream& in) {
    std::string buf;
    int line = 0;

    if (!std::getline(in, buf)) throw ParseError(1, "missing header");
    ++line;
    if (trim(buf) != kMagic) throw ParseError(line, "expected header '" + std::string(kMagic) + "'");

    if (!std::getline(in, buf)) throw ParseError(2, "missing node count");
    ++line;
    long long n = 0;
    {
        const auto t = trim(buf);
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
        if (ec != std::errc{} || ptr != t.data() + t.size() || n <= 0) {
            throw ParseError(line, "node count must be a positive integer, got '" + std::string(t) + "'");
        }
    }

    Eigen::MatrixXd m(n, n);
    long long row = 0;
    while (std::getline(in, buf)) {
        ++line;
        const auto toks = tokens(buf);
        if (toks.empty()) continue;
        if (row == n) throw ParseError(line, "dimension mismatch: more than " + std::to_string(n) + " rows");
        if (static_cast<long long>(toks.size()) != n) {
            throw ParseError(line, "row length mismatch: expected " + std::to_string(n) + " values, found " +
                                       std::to_string(toks.size()));
        }
        for (long long i = 0; i < n; ++i) m(row, i) = parse_value(toks[static_cast<std::size_t>(i)], line);
        ++row;
    }
    if (row != n) {
        throw ParseError(line, "dimension mismatch: header declares " + std::to_string(n) + " rows, found " +
                                   std::to_string(row));
    }
    return ConnectivityMatrix(std::move(m));
}

ConnectivityMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_matrix(in);
}

void write_matrix(const ConnectivityMatrix& c, std::ostream& out) {
    const auto& w = c.weights();
    out << kMagic << '\n' << w.rows() << '\n';
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
        for (Eigen::Index i = 0; i < w.cols(); ++i) {
            if (i) out << ' ';
            out << format_double(w(j, i));
        }
        out << '\n';
    }
}

void write_matrix(const ConnectivityMatrix& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_matrix(c, out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace linsync
