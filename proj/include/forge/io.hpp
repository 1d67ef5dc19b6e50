#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "forge/field.hpp"

namespace forge {

// Field dump: raw little-endian float64 samples, component-major with x
// fastest inside each component, plus a JSON sidecar
// {"N": int, "rank": "scalar|vector|matrix", "time": float, "name": string}.
// `base` is the path without extension; writes base.f64 and base.json.
void dump_field(const std::filesystem::path& base, const RealField& f, double time,
                const std::string& name);
RealField load_field(const std::filesystem::path& base, double* time = nullptr,
                     std::string* name = nullptr);

// CSV with fixed %.17g formatting so identical runs are byte-identical.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& cells);
    static std::string fmt(double v);

  private:
    std::ofstream out_;
    std::size_t ncols_;
};

}  // namespace forge
