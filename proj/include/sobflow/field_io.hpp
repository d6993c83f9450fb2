/// @file field_io.hpp
/// @brief Two-column text format for radial fields.
///
/// Layout:
///
///     # d=<d> n=<n> R_max=<R>
///     <r_0> <v_0>
///     ...
///
/// Numbers are written with 17 significant digits, so reading back a file
/// written by write_field reproduces every node and value bit for bit.

#pragma once

#include "sobflow/radial.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobflow {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TabulatedField {
    int d = 0;
    double r_max = 0.0;
    std::vector<double> r;
    std::vector<double> values;
};

/// "%.17g" formatting shared by every text artifact.
std::string format_decimal17(double x);

void write_field(std::ostream& out, const RadialField& f);
void write_field(const std::string& path, const RadialField& f);

/// Throws ParseError naming the offending line.
TabulatedField read_field(std::istream& in, const std::string& source = "<stream>");
TabulatedField read_field(const std::string& path);

/// Places tabulated data on a grid: exact copy when the nodes coincide,
/// otherwise monotone cubic interpolation with power-law extrapolation past
/// the last tabulated radius.
RadialField resample(const TabulatedField& table, GridPtr grid);

}  // namespace sobflow
