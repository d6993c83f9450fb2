#include "sobflow/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sobflow {

std::string format_decimal17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field(std::ostream& out, const RadialField& f) {
    const auto r = f.grid().nodes();
    out << "# d=" << f.dimension() << " n=" << f.size() << " R_max=" << format_decimal17(f.grid().r_max()) << '\n';
    for (int i = 0; i < f.size(); ++i) {
        out << format_decimal17(r[static_cast<std::size_t>(i)]) << ' ' << format_decimal17(f[i]) << '\n';
    }
}

void write_field(const std::string& path, const RadialField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_field(out, f);
}

namespace {

double parse_number(const std::string& token, const std::string& source, int line) {
    char* end = nullptr;
    const double x = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw ParseError(source + ":" + std::to_string(line) + ": not a number: '" + token + "'");
    }
    return x;
}

}  // namespace

TabulatedField read_field(std::istream& in, const std::string& source) {
    TabulatedField table;
    std::string line;
    int lineno = 0;
    int declared_n = -1;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!have_header) {
            if (std::sscanf(line.c_str(), "# d=%d n=%d", &table.d, &declared_n) != 2) {
                throw ParseError(source + ":" + std::to_string(lineno) + ": expected header '# d=<d> n=<n> R_max=<R>'");
            }
            const auto pos = line.find("R_max=");
            if (pos == std::string::npos) {
                throw ParseError(source + ":" + std::to_string(lineno) + ": header lacks R_max");
            }
            table.r_max = parse_number(line.substr(pos + 6), source, lineno);
            have_header = true;
            continue;
        }
        if (line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra)) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected two columns");
        }
        table.r.push_back(parse_number(a, source, lineno));
        table.values.push_back(parse_number(b, source, lineno));
    }
    if (!have_header) throw ParseError(source + ": missing header");
    if (static_cast<int>(table.r.size()) != declared_n) {
        throw ParseError(source + ": header declares n=" + std::to_string(declared_n) + " but " +
                         std::to_string(table.r.size()) + " rows were read");
    }
    if (table.d < 2) throw ParseError(source + ": dimension must be >= 2");
    for (std::size_t i = 1; i < table.r.size(); ++i) {
        if (!(table.r[i] > table.r[i - 1])) throw ParseError(source + ": radii must be strictly increasing");
    }
    for (double v : table.values) {
        if (!std::isfinite(v)) throw ParseError(source + ": non-finite value");
    }
    return table;
}

TabulatedField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open field file '" + path + "'");
    return read_field(in, path);
}

RadialField resample(const TabulatedField& table, GridPtr grid) {
    if (table.d != grid->dimension()) {
        throw std::invalid_argument("tabulated field has d=" + std::to_string(table.d) + ", grid has d=" +
                                    std::to_string(grid->dimension()));
    }
    const auto nodes = grid->nodes();
    if (table.r.size() == nodes.size() && std::equal(table.r.begin(), table.r.end(), nodes.begin())) {
        return RadialField(std::move(grid), table.values);
    }
    const auto& x = table.r;
    const auto& y = table.values;
    const std::size_t m = x.size();
    if (m < 2) throw std::invalid_argument("need at least two tabulated points");

    // Fritsch-Carlson slopes.
    std::vector<double> delta(m - 1), slope(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    slope[0] = delta[0];
    slope[m - 1] = delta[m - 2];
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            slope[i] = 0.0;
        } else {
            const double w1 = 2 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            const double w2 = (x[i + 1] - x[i]) + 2 * (x[i] - x[i - 1]);
            slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Power-law tail past the table.
    double decay = 0.0;
    const bool power_tail = y[m - 1] > 0.0 && y[m - 2] > 0.0 && x[m - 2] > 0.0;
    if (power_tail) decay = -std::log(y[m - 1] / y[m - 2]) / std::log(x[m - 1] / x[m - 2]);

    std::vector<double> out(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double r = nodes[k];
        if (r <= x.front()) {
            out[k] = y.front();
        } else if (r >= x.back()) {
            out[k] = power_tail ? y.back() * std::pow(x.back() / r, decay) : (r == x.back() ? y.back() : 0.0);
        } else {
            const auto it = std::upper_bound(x.begin(), x.end(), r);
            const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
            const double h = x[i + 1] - x[i];
            const double t = (r - x[i]) / h;
            const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
            const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
            out[k] = h00 * y[i] + h10 * h * slope[i] + h01 * y[i + 1] + h11 * h * slope[i + 1];
        }
    }
    return RadialField(std::move(grid), std::move(out));
}

}  // namespace sobflow
