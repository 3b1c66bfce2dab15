#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "polymor/system.hpp"
#include "polymor/types.hpp"

namespace polymor {

// Matrix Market, coordinate real general, 1-based indices, 17 significant digits.
void write_market(const std::filesystem::path& path, const SpMat& M);
void write_market(const std::filesystem::path& path, const UnfoldingMat& M);
void write_market(const std::filesystem::path& path, const MatX& M);  // stored as coordinate
SpMat read_market(const std::filesystem::path& path);
UnfoldingMat read_market_wide(const std::filesystem::path& path);

// Matrix Market array (dense) format.
void write_market_dense(const std::filesystem::path& path, const MatX& M);
MatX read_market_dense(const std::filesystem::path& path);

// Plain key: value manifest files.
using Manifest = std::map<std::string, std::string>;
void write_manifest(const std::filesystem::path& path, const Manifest& kv);
Manifest read_manifest(const std::filesystem::path& path);

// One directory per system: manifest.txt plus one .mtx file per matrix.
// Hadamard nonlinearities keep their factor structure on disk.
void save_system(const std::filesystem::path& dir, const PolynomialSystem& sys);
PolynomialSystem load_system(const std::filesystem::path& dir);

void save_system(const std::filesystem::path& dir, const AffineParametricSystem& psys);
AffineParametricSystem load_parametric_system(const std::filesystem::path& dir);

// True when dir holds a parametric family (manifest kind).
bool is_parametric_dir(const std::filesystem::path& dir);

// CSV with full double precision.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_full(double v);  // %.17g

}  // namespace polymor
