#pragma once

// Field serialisation: a CSV of ny rows x nx columns ("%.17g", so doubles
// round-trip exactly) next to a JSON sidecar {nx, ny, dx, origin,
// field_name, time}.

#include <filesystem>
#include <string>

#include "bcm/grid.hpp"
#include "bcm/phase.hpp"

namespace bcm {

struct FieldMeta {
  std::string field_name;
  double time = 0.0;
};

/// Writes <dir>/<name>.csv and <dir>/<name>.json; creates dir if needed.
void write_field(const std::filesystem::path& dir, const std::string& name, const ScalarField& f,
                 double time);

/// Reads a field written by write_field from <dir>/<name>.{csv,json}.
ScalarField read_field(const std::filesystem::path& dir, const std::string& name,
                       FieldMeta* meta = nullptr);

/// "phi_<index>_<type>"
std::string phase_field_name(std::size_t index, CellType type);

/// Text helpers used by every CSV writer: "%.17g".
std::string format_double(double v);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace bcm
