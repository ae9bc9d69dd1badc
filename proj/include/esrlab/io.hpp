#pragma once

#include "esrlab/fitting.hpp"
#include "esrlab/hybridization.hpp"
#include "esrlab/spectra.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace esrlab::io {

struct Provenance {
  std::string source;
  std::size_t rows = 0;
  std::uint64_t checksum = 0;  // FNV-1a 64 of the raw bytes
};

template <typename T>
struct Loaded {
  T value;
  Provenance provenance;
  std::vector<std::string> warnings;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Header B_tesla,f_GHz,snr_class[,sigma_f_GHz]. Row errors are DataError
/// messages of the form "<source>:<line>:<column>: ...".
Loaded<std::vector<InteractionPoint>> read_interaction_points(std::istream& in, const std::string& source = "<stream>");
Loaded<std::vector<InteractionPoint>> load_interaction_points(const std::filesystem::path& path);
void write_interaction_points(std::ostream& out, const std::vector<InteractionPoint>& points);

/// Header B_tesla,f_GHz,branch[,Q]; an empty Q cell means not measured.
Loaded<CrossingData> read_crossing_data(std::istream& in, const std::string& source = "<stream>");
Loaded<CrossingData> load_crossing_data(const std::filesystem::path& path);
void write_crossing_data(std::ostream& out, const CrossingData& data);

/// Header f_GHz,mag.
Loaded<std::vector<TraceSample>> read_trace(std::istream& in, const std::string& source = "<stream>");
Loaded<std::vector<TraceSample>> load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const std::vector<TraceSample>& trace);

/// Header B_tesla,m,n,f_residual_GHz.
void write_resonances(std::ostream& out, const std::vector<ResonanceHit>& hits);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace esrlab::io
