#include "fdlab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace fdlab {

namespace {

const char* kSeriesColumns =
    "t,F,I,Q,mass,second_moment,tail_A,relerr_sup,ratio_min,ratio_max";

void write_meta_line(std::ostream& out, const std::string& key, const std::string& value) {
    out << "# " << key << " = " << value << "\n";
}

bool parse_meta_line(const std::string& line, std::string& key, std::string& value) {
    if (line.size() < 2 || line[0] != '#') return false;
    const std::size_t eq = line.find(" = ");
    if (eq == std::string::npos) return false;
    std::size_t start = 1;
    while (start < line.size() && line[start] == ' ') ++start;
    key = line.substr(start, eq - start);
    value = line.substr(eq + 3);
    return !key.empty();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(line.substr(pos));
            break;
        }
        parts.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return parts;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double x = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin != end && *begin == ' ') ++begin;
    const auto res = std::from_chars(begin, end, x);
    if (res.ec != std::errc()) throw std::runtime_error("not a number: '" + s + "'");
    return x;
}

void write_field(const std::string& path, const RadialGrid& g, const RadialField& f,
                 const MetaMap& meta) {
    if (f.values.size() != g.size()) throw std::invalid_argument("write_field: size mismatch");
    std::ofstream out = open_out(path);
    write_meta_line(out, "n_eff", format_double(g.n_eff));
    write_meta_line(out, "alpha", format_double(g.alpha));
    write_meta_line(out, "angular", format_double(g.angular));
    std::ostringstream edges;
    for (std::size_t j = 0; j < g.edges.size(); ++j) {
        if (j) edges << ' ';
        edges << format_double(g.edges[j]);
    }
    write_meta_line(out, "edges", edges.str());
    write_meta_line(out, "columns", "r,value");
    for (const auto& [key, value] : meta) {
        if (key == "n_eff" || key == "alpha" || key == "angular" || key == "edges" ||
            key == "columns") {
            continue;
        }
        write_meta_line(out, key, value);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << format_double(g.nodes[i]) << ',' << format_double(f.values[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

FieldFile read_field(const std::string& path) {
    std::ifstream in = open_in(path);
    FieldFile ff;
    std::string line;
    std::vector<double> nodes, values;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string key, value;
            if (parse_meta_line(line, key, value)) ff.meta[key] = value;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 2) throw std::runtime_error("read_field: expected two columns");
        nodes.push_back(parse_double(parts[0]));
        values.push_back(parse_double(parts[1]));
    }
    const auto need = [&](const char* key) -> std::string {
        const auto it = ff.meta.find(key);
        if (it == ff.meta.end()) {
            throw std::runtime_error(std::string("read_field: missing header ") + key);
        }
        return it->second;
    };
    RadialGrid& g = ff.grid;
    g.n_eff = parse_double(need("n_eff"));
    g.alpha = parse_double(need("alpha"));
    g.angular = parse_double(need("angular"));
    for (const std::string& tok : split(need("edges"), ' ')) {
        if (!tok.empty()) g.edges.push_back(parse_double(tok));
    }
    if (g.edges.size() != nodes.size() + 1) {
        throw std::runtime_error("read_field: edge count does not match rows");
    }
    g.nodes = std::move(nodes);
    // volumes follow the exact power rule; grids built by make_grid round-trip
    // bit for bit (transported reconstruction volumes do not survive a dump)
    g.volumes.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.volumes.size(); ++i) {
        g.volumes[i] = (std::pow(g.edges[i + 1], g.n_eff) - std::pow(g.edges[i], g.n_eff)) /
                       g.n_eff;
    }
    ff.field.values = std::move(values);
    return ff;
}

void write_series(const std::string& path, const FlowSeries& s, const MetaMap& meta) {
    std::ofstream out = open_out(path);
    write_meta_line(out, "columns", kSeriesColumns);
    for (const auto& [key, value] : meta) {
        if (key == "columns") continue;
        write_meta_line(out, key, value);
    }
    for (const SeriesRow& row : s.rows) {
        const auto& r = row.report;
        const double q = r.quotient_defined ? r.quotient
                                            : std::numeric_limits<double>::quiet_NaN();
        out << format_double(r.t) << ',' << format_double(r.entropy) << ','
            << format_double(r.fisher) << ',' << format_double(q) << ','
            << format_double(r.mass) << ',' << format_double(r.second_moment) << ','
            << format_double(r.tail_A) << ',' << format_double(r.relerr_sup) << ','
            << format_double(row.ratio_min) << ',' << format_double(row.ratio_max) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

SeriesFile read_series(const std::string& path) {
    std::ifstream in = open_in(path);
    SeriesFile sf;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string key, value;
            if (parse_meta_line(line, key, value)) sf.meta[key] = value;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 10) throw std::runtime_error("read_series: expected ten columns");
        SeriesRow row;
        auto& r = row.report;
        r.t = parse_double(parts[0]);
        r.entropy = parse_double(parts[1]);
        r.fisher = parse_double(parts[2]);
        r.quotient = parse_double(parts[3]);
        r.quotient_defined = !std::isnan(r.quotient);
        r.mass = parse_double(parts[4]);
        r.second_moment = parse_double(parts[5]);
        r.tail_A = parse_double(parts[6]);
        r.relerr_sup = parse_double(parts[7]);
        row.ratio_min = parse_double(parts[8]);
        row.ratio_max = parse_double(parts[9]);
        sf.rows.push_back(row);
    }
    return sf;
}

}  // namespace fdlab
