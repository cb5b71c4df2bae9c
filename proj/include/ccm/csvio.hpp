#pragma once

#include <istream>
#include <string>
#include <vector>

namespace ccm {

// Floats are emitted with 12 significant digits so that equal doubles give
// byte-identical output across runs.
std::string fmt_g12(double v);

std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::vector<double>> read_numeric_csv(std::istream& in);
double parse_double(const std::string& s);

}  // namespace ccm
