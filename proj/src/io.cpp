#include "forge/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace forge {

void dump_field(const std::filesystem::path& base, const RealField& f, double time,
                const std::string& name) {
    const int n = f.grid.n;
    std::filesystem::path raw = base;
    raw += ".f64";
    std::ofstream os(raw, std::ios::binary);
    if (!os) throw std::runtime_error("dump_field: cannot open " + raw.string());
    std::vector<double> line(n);
    // internal layout is z-fastest; the dump format is x-fastest
    for (int c = 0; c < f.comps(); ++c)
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy) {
                for (int ix = 0; ix < n; ++ix) line[ix] = f.at(c, f.grid.idx(ix, iy, iz));
                os.write(reinterpret_cast<const char*>(line.data()), sizeof(double) * n);
            }
    nlohmann::json meta;
    meta["N"] = n;
    meta["rank"] = rank_name(f.rank);
    meta["time"] = time;
    meta["name"] = name;
    std::filesystem::path side = base;
    side += ".json";
    std::ofstream js(side);
    js << meta.dump(2) << "\n";
}

RealField load_field(const std::filesystem::path& base, double* time, std::string* name) {
    std::filesystem::path side = base;
    side += ".json";
    std::ifstream js(side);
    if (!js) throw std::runtime_error("load_field: cannot open " + side.string());
    nlohmann::json meta = nlohmann::json::parse(js);
    const int n = meta.at("N").get<int>();
    RealField f(TorusGrid(n), rank_from_name(meta.at("rank").get<std::string>()));
    if (time) *time = meta.at("time").get<double>();
    if (name) *name = meta.at("name").get<std::string>();
    std::filesystem::path raw = base;
    raw += ".f64";
    std::ifstream is(raw, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + raw.string());
    std::vector<double> line(n);
    for (int c = 0; c < f.comps(); ++c)
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy) {
                is.read(reinterpret_cast<char*>(line.data()), sizeof(double) * n);
                for (int ix = 0; ix < n; ++ix) f.at(c, f.grid.idx(ix, iy, iz)) = line[ix];
            }
    if (!is) throw std::runtime_error("load_field: short read in " + raw.string());
    return f;
}

std::string CsvWriter::fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), ncols_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << header[i] << (i + 1 == header.size() ? "\n" : ",");
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_) throw std::invalid_argument("CsvWriter: column count");
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << fmt(values[i]) << (i + 1 == values.size() ? "\n" : ",");
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw std::invalid_argument("CsvWriter: column count");
    for (std::size_t i = 0; i < cells.size(); ++i)
        out_ << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
}

}  // namespace forge
