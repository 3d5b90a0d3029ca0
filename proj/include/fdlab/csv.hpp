#pragma once

#include <map>
#include <string>
#include <vector>

#include "fdlab/flow.hpp"
#include "fdlab/profiles.hpp"

// CSV artifacts. Numbers are written in shortest round-trip form so golden
// files are bit-stable and re-reading reproduces identical doubles. Headers
// are `# key = value` comment lines that echo configuration.

namespace fdlab {

std::string format_double(double x);  // shortest representation that round-trips
double parse_double(const std::string& s);

using MetaMap = std::map<std::string, std::string>;

// Field files carry two columns (r, value); the header lines carry the grid
// frame scalars and the full edge list, so the grid round-trips exactly.
void write_field(const std::string& path, const RadialGrid& g, const RadialField& f,
                 const MetaMap& meta = {});

struct FieldFile {
    RadialGrid grid;
    RadialField field;
    MetaMap meta;
};
FieldFile read_field(const std::string& path);

// Series files carry the report schema plus the sandwich ratio columns:
// t, F, I, Q, mass, second_moment, tail_A, relerr_sup, ratio_min, ratio_max.
void write_series(const std::string& path, const FlowSeries& s, const MetaMap& meta = {});

struct SeriesFile {
    std::vector<SeriesRow> rows;  // snapshot fields left empty
    MetaMap meta;
};
SeriesFile read_series(const std::string& path);

}  // namespace fdlab
