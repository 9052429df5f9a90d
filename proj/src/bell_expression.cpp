#include "bellopt/bell_expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

namespace bellopt {

BellExpression builtin_chsh() {
    BellExpression e(2, 2);
    e.entry(1, 1) = 1;
    e.entry(1, 2) = 1;
    e.entry(2, 1) = 1;
    e.entry(2, 2) = -1;
    e.entry(1, 0) = -1;
    e.entry(0, 1) = -1;
    return e;
}

BellExpression builtin_i3322() {
    BellExpression e(3, 3);
    e.entry(2, 0) = -1;
    e.entry(0, 1) = -1;
    e.entry(0, 2) = -2;
    e.entry(1, 1) = 1;
    e.entry(1, 2) = 1;
    e.entry(2, 1) = 1;
    e.entry(2, 2) = 1;
    e.entry(1, 3) = -1;
    e.entry(2, 3) = 1;
    e.entry(3, 1) = -1;
    e.entry(3, 2) = 1;
    return e;
}

namespace {

// Reads the next line that is neither blank nor a '#' comment.
bool next_data_line(std::istream& in, std::string& line, int& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        return true;
    }
    return false;
}

std::vector<double> parse_numbers(const std::string& line, int lineno) {
    std::vector<double> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        double v = 0.0;
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw ParseError(lineno, "non-numeric token '" + tok + "'");
        if (!std::isfinite(v))
            throw ParseError(lineno, "non-finite coefficient '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

BellExpression parse_bell_expression(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!next_data_line(in, line, lineno))
        throw ParseError(lineno, "missing header");
    const auto header = parse_numbers(line, lineno);
    if (header.size() != 2)
        throw ParseError(lineno, "header must be 'm_A m_B'");
    const int ma = static_cast<int>(header[0]);
    const int mb = static_cast<int>(header[1]);
    if (ma < 1 || mb < 1 || header[0] != ma || header[1] != mb)
        throw ParseError(lineno, "setting counts must be positive integers");

    BellExpression expr(ma, mb);
    for (int mu = 0; mu <= ma; ++mu) {
        if (!next_data_line(in, line, lineno))
            throw ParseError(lineno, "expected " + std::to_string(ma + 1) +
                                         " coefficient rows, got " + std::to_string(mu));
        const auto row = parse_numbers(line, lineno);
        if (static_cast<int>(row.size()) != mb + 1)
            throw ParseError(lineno, "expected " + std::to_string(mb + 1) +
                                         " coefficients in row, got " +
                                         std::to_string(row.size()));
        for (int nu = 0; nu <= mb; ++nu) expr.entry(mu, nu) = row[nu];
    }
    return expr;
}

BellExpression parse_bell_expression_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open inequality file: " + path);
    return parse_bell_expression(in);
}

std::string format_shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string serialize(const BellExpression& expr) {
    std::ostringstream out;
    out << expr.m_A << ' ' << expr.m_B << '\n';
    for (int mu = 0; mu <= expr.m_A; ++mu) {
        for (int nu = 0; nu <= expr.m_B; ++nu) {
            if (nu) out << ' ';
            out << format_shortest(expr.entry(mu, nu));
        }
        out << '\n';
    }
    return out.str();
}

double classical_bound(const BellExpression& expr) {
    const int bits = expr.m_A + expr.m_B;
    if (bits > 30)
        throw std::length_error("classical_bound: enumeration limited to m_A + m_B <= 30");

    // a_0 = b_0 = 1 always; enumerate the rest.
    double best = -std::numeric_limits<double>::infinity();
    const std::uint64_t total = 1ULL << bits;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double value = 0.0;
        for (int mu = 0; mu <= expr.m_A; ++mu) {
            const int a = (mu == 0) ? 1 : static_cast<int>((mask >> (mu - 1)) & 1);
            if (!a) continue;
            for (int nu = 0; nu <= expr.m_B; ++nu) {
                const int b =
                    (nu == 0) ? 1 : static_cast<int>((mask >> (expr.m_A + nu - 1)) & 1);
                if (b) value += expr.entry(mu, nu);
            }
        }
        best = std::max(best, value);
    }
    return best;
}

} // namespace bellopt
