#include "bcm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bcm/errors.hpp"

namespace bcm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string phase_field_name(std::size_t index, CellType type) {
  return "phi_" + std::to_string(index) + "_" + to_string(type);
}

void write_field(const fs::path& dir, const std::string& name, const ScalarField& f, double time) {
  const GridSpec& g = f.spec();
  std::string csv;
  csv.reserve(static_cast<std::size_t>(g.size()) * 24);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i > 0) csv += ',';
      csv += format_double(f(i, j));
    }
    csv += '\n';
  }
  write_text(dir / (name + ".csv"), csv);

  const json meta = {{"nx", g.nx},         {"ny", g.ny},     {"dx", g.dx},
                     {"origin", {g.x0, g.y0}}, {"field_name", name}, {"time", time}};
  write_text(dir / (name + ".json"), meta.dump(2) + "\n");
}

ScalarField read_field(const fs::path& dir, const std::string& name, FieldMeta* meta) {
  json j;
  try {
    j = json::parse(read_text(dir / (name + ".json")));
  } catch (const json::exception& e) {
    throw ConfigError("bad field sidecar " + (dir / (name + ".json")).string() + ": " + e.what());
  }
  GridSpec g;
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  g.dx = j.at("dx").get<double>();
  g.x0 = j.at("origin").at(0).get<double>();
  g.y0 = j.at("origin").at(1).get<double>();
  g.validate();

  ScalarField f(g);
  std::istringstream in(read_text(dir / (name + ".csv")));
  std::string line;
  for (int r = 0; r < g.ny; ++r) {
    if (!std::getline(in, line)) throw StructuralError("field " + name + ": too few rows");
    std::istringstream row(line);
    std::string cell;
    for (int i = 0; i < g.nx; ++i) {
      if (!std::getline(row, cell, ','))
        throw StructuralError("field " + name + ": too few columns in row " + std::to_string(r));
      f(i, r) = std::strtod(cell.c_str(), nullptr);
    }
  }
  if (meta != nullptr) {
    meta->field_name = j.value("field_name", name);
    meta->time = j.value("time", 0.0);
  }
  return f;
}

}  // namespace bcm
