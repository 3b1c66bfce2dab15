#include "polymor/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polymor {

namespace fs = std::filesystem;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void open_or_throw(std::ofstream& out, const fs::path& path) {
  out.open(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
}

void open_or_throw(std::ifstream& in, const fs::path& path) {
  in.open(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
}

template <typename Mat>
void write_coordinate(const fs::path& path, const Mat& M, std::int64_t nnz,
                      const std::function<void(std::ofstream&)>& body) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << nnz << '\n';
  body(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct CoordinateData {
  std::int64_t rows = 0, cols = 0;
  std::vector<std::int64_t> r, c;
  std::vector<double> v;
};

CoordinateData read_coordinate(const fs::path& path) {
  std::ifstream in;
  open_or_throw(in, path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("not a MatrixMarket file: " + path.string());
  if (line.find("coordinate") == std::string::npos)
    throw std::runtime_error("expected coordinate format: " + path.string());
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  CoordinateData data;
  std::int64_t nnz = 0;
  {
    std::istringstream hdr(line);
    if (!(hdr >> data.rows >> data.cols >> nnz))
      throw std::runtime_error("bad size line in " + path.string());
  }
  data.r.reserve(nnz);
  data.c.reserve(nnz);
  data.v.reserve(nnz);
  std::int64_t i, j;
  double val;
  while (in >> i >> j >> val) {
    data.r.push_back(i - 1);
    data.c.push_back(j - 1);
    data.v.push_back(val);
  }
  if (static_cast<std::int64_t>(data.v.size()) != nnz)
    throw std::runtime_error("entry count mismatch in " + path.string());
  return data;
}

}  // namespace

void write_market(const fs::path& path, const SpMat& M) {
  write_coordinate(path, M, M.nonZeros(), [&](std::ofstream& out) {
    for (Index col = 0; col < M.outerSize(); ++col)
      for (SpMat::InnerIterator it(M, col); it; ++it)
        out << (it.row() + 1) << ' ' << (col + 1) << ' ' << format_full(it.value()) << '\n';
  });
}

void write_market(const fs::path& path, const UnfoldingMat& M) {
  write_coordinate(path, M, M.nonZeros(), [&](std::ofstream& out) {
    for (Index row = 0; row < M.outerSize(); ++row)
      for (UnfoldingMat::InnerIterator it(M, row); it; ++it)
        out << (row + 1) << ' ' << (it.index() + 1) << ' ' << format_full(it.value()) << '\n';
  });
}

void write_market(const fs::path& path, const MatX& M) {
  std::int64_t nnz = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (M(i, j) != 0.0) ++nnz;
  write_coordinate(path, M, nnz, [&](std::ofstream& out) {
    for (Index j = 0; j < M.cols(); ++j)
      for (Index i = 0; i < M.rows(); ++i)
        if (M(i, j) != 0.0)
          out << (i + 1) << ' ' << (j + 1) << ' ' << format_full(M(i, j)) << '\n';
  });
}

SpMat read_market(const fs::path& path) {
  const auto data = read_coordinate(path);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(data.v.size());
  for (std::size_t k = 0; k < data.v.size(); ++k)
    trip.emplace_back(static_cast<int>(data.r[k]), static_cast<int>(data.c[k]), data.v[k]);
  SpMat M(static_cast<Index>(data.rows), static_cast<Index>(data.cols));
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

UnfoldingMat read_market_wide(const fs::path& path) {
  const auto data = read_coordinate(path);
  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  trip.reserve(data.v.size());
  for (std::size_t k = 0; k < data.v.size(); ++k)
    trip.emplace_back(data.r[k], data.c[k], data.v[k]);
  UnfoldingMat M(static_cast<Index>(data.rows), data.cols);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

void write_market_dense(const fs::path& path, const MatX& M) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) out << format_full(M(i, j)) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MatX read_market_dense(const fs::path& path) {
  std::ifstream in;
  open_or_throw(in, path);
  std::string line;
  if (!std::getline(in, line) || line.find("array") == std::string::npos)
    throw std::runtime_error("expected MatrixMarket array format: " + path.string());
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  Index rows, cols;
  {
    std::istringstream hdr(line);
    if (!(hdr >> rows >> cols)) throw std::runtime_error("bad size line in " + path.string());
  }
  MatX M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (!(in >> M(i, j))) throw std::runtime_error("truncated array data: " + path.string());
  return M;
}

void write_manifest(const fs::path& path, const Manifest& kv) {
  std::ofstream out;
  open_or_throw(out, path);
  for (const auto& [k, v] : kv) out << k << ": " << v << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in;
  open_or_throw(in, path);
  Manifest kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find(':');
    if (pos == std::string::npos) continue;
    std::string key = line.substr(0, pos);
    std::string val = line.substr(pos + 1);
    const auto strip = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      s = (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
    };
    strip(key);
    strip(val);
    kv[key] = val;
  }
  return kv;
}

namespace {

std::string coeff_tag(const CoefficientFn& c) {
  switch (c.kind) {
    case CoefficientFn::Kind::One:
      return "one";
    case CoefficientFn::Kind::ParamComponent:
      return "param " + std::to_string(c.component);
    case CoefficientFn::Kind::Callback:
      return "callback " + c.name;
  }
  return "one";
}

CoefficientFn parse_coeff_tag(const std::string& tag) {
  if (tag == "one") return CoefficientFn::one();
  if (tag.rfind("param ", 0) == 0) return CoefficientFn::param(std::stoi(tag.substr(6)));
  if (tag.rfind("callback ", 0) == 0) {
    // Callbacks must be re-bound by the caller after loading.
    CoefficientFn c;
    c.kind = CoefficientFn::Kind::Callback;
    c.name = tag.substr(9);
    return c;
  }
  throw std::runtime_error("unknown coefficient tag: " + tag);
}

std::string vec_to_string(const VecX& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_full(v[i]);
  }
  return s;
}

VecX vec_from_string(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  return Eigen::Map<const VecX>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace

void save_system(const fs::path& dir, const PolynomialSystem& sys) {
  fs::create_directories(dir);
  Manifest man;
  man["kind"] = "polynomial";
  man["n"] = std::to_string(sys.n);
  man["m"] = std::to_string(sys.m);
  man["q"] = std::to_string(sys.q);
  man["d"] = std::to_string(sys.d);
  write_market(dir / "E.mtx", sys.E);
  write_market(dir / "A.mtx", sys.A);
  write_market(dir / "B.mtx", sys.B);
  write_market(dir / "C.mtx", sys.C);
  for (const auto& [xi, nl] : sys.H) {
    const std::string base = "H" + std::to_string(xi);
    if (nl.has_hadamard()) {
      man[base + "_storage"] = "hadamard";
      man[base + "_terms"] = std::to_string(nl.terms.size());
      for (std::size_t t = 0; t < nl.terms.size(); ++t) {
        man[base + "_term" + std::to_string(t) + "_coefficient"] =
            format_full(nl.terms[t].coefficient);
        for (std::size_t f = 0; f < nl.terms[t].factors.size(); ++f)
          write_market(dir / (base + "_term" + std::to_string(t) + "_factor" +
                              std::to_string(f) + ".mtx"),
                       nl.terms[t].factors[f]);
      }
    } else if (nl.has_unfolding()) {
      man[base + "_storage"] = "unfolding";
      write_market(dir / (base + ".mtx"), *nl.unfolding);
    }
  }
  for (const auto& [eta, Ne] : sys.N) {
    man["N" + std::to_string(eta) + "_storage"] = "unfolding";
    write_market(dir / ("N" + std::to_string(eta) + ".mtx"), Ne);
  }
  write_manifest(dir / "manifest.txt", man);
}

PolynomialSystem load_system(const fs::path& dir) {
  const Manifest man = read_manifest(dir / "manifest.txt");
  if (man.count("kind") && man.at("kind") != "polynomial")
    throw std::runtime_error("load_system: directory holds a " + man.at("kind") + " system");
  PolynomialSystem sys;
  sys.n = std::stoll(man.at("n"));
  sys.m = std::stoll(man.at("m"));
  sys.q = std::stoll(man.at("q"));
  sys.d = std::stoi(man.at("d"));
  sys.E = read_market(dir / "E.mtx");
  sys.A = read_market(dir / "A.mtx");
  sys.B = read_market(dir / "B.mtx");
  sys.C = read_market(dir / "C.mtx");
  for (int xi = 2; xi <= sys.d; ++xi) {
    const std::string base = "H" + std::to_string(xi);
    const auto it = man.find(base + "_storage");
    if (it == man.end()) continue;
    PolynomialNonlinearity nl;
    if (it->second == "hadamard") {
      const std::size_t nterms = std::stoul(man.at(base + "_terms"));
      for (std::size_t t = 0; t < nterms; ++t) {
        HadamardTerm term;
        term.coefficient = std::stod(man.at(base + "_term" + std::to_string(t) + "_coefficient"));
        for (int f = 0; f < xi; ++f)
          term.factors.push_back(read_market(
              dir / (base + "_term" + std::to_string(t) + "_factor" + std::to_string(f) + ".mtx")));
        nl.terms.push_back(std::move(term));
      }
    } else {
      nl.unfolding = read_market_wide(dir / (base + ".mtx"));
    }
    sys.H[xi] = std::move(nl);
  }
  for (int eta = 1; eta <= sys.d; ++eta) {
    const std::string base = "N" + std::to_string(eta);
    if (!man.count(base + "_storage")) continue;
    sys.N[eta] = read_market_wide(dir / (base + ".mtx"));
  }
  sys.validate();
  return sys;
}

void save_system(const fs::path& dir, const AffineParametricSystem& psys) {
  fs::create_directories(dir);
  Manifest man;
  man["kind"] = "parametric";
  man["n"] = std::to_string(psys.n);
  man["m"] = std::to_string(psys.m);
  man["q"] = std::to_string(psys.q);
  man["d"] = std::to_string(psys.d);
  man["np"] = std::to_string(psys.np);
  man["box_lo"] = vec_to_string(psys.box_lo);
  man["box_hi"] = vec_to_string(psys.box_hi);

  auto save_family = [&](const char* name, const auto& terms) {
    man[std::string(name) + "_terms"] = std::to_string(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string base = std::string(name) + "_term" + std::to_string(t);
      man[base + "_coeff"] = coeff_tag(terms[t].alpha);
      write_market(dir / (base + ".mtx"), terms[t].value);
    }
  };
  save_family("E", psys.E_terms);
  save_family("A", psys.A_terms);
  save_family("B", psys.B_terms);
  save_family("C", psys.C_terms);

  for (const auto& [xi, terms] : psys.H_terms) {
    const std::string base = "H" + std::to_string(xi);
    man[base + "_terms"] = std::to_string(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tb = base + "_term" + std::to_string(t);
      man[tb + "_coeff"] = coeff_tag(terms[t].alpha);
      if (terms[t].value.has_hadamard()) {
        man[tb + "_storage"] = "hadamard";
        man[tb + "_hterms"] = std::to_string(terms[t].value.terms.size());
        for (std::size_t h = 0; h < terms[t].value.terms.size(); ++h) {
          man[tb + "_h" + std::to_string(h) + "_coefficient"] =
              format_full(terms[t].value.terms[h].coefficient);
          for (std::size_t f = 0; f < terms[t].value.terms[h].factors.size(); ++f)
            write_market(dir / (tb + "_h" + std::to_string(h) + "_factor" + std::to_string(f) +
                                ".mtx"),
                         terms[t].value.terms[h].factors[f]);
        }
      } else {
        man[tb + "_storage"] = "unfolding";
        write_market(dir / (tb + ".mtx"), *terms[t].value.unfolding);
      }
    }
  }
  for (const auto& [eta, terms] : psys.N_terms) {
    const std::string base = "N" + std::to_string(eta);
    man[base + "_terms"] = std::to_string(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tb = base + "_term" + std::to_string(t);
      man[tb + "_coeff"] = coeff_tag(terms[t].alpha);
      write_market(dir / (tb + ".mtx"), terms[t].value);
    }
  }
  write_manifest(dir / "manifest.txt", man);
}

AffineParametricSystem load_parametric_system(const fs::path& dir) {
  const Manifest man = read_manifest(dir / "manifest.txt");
  if (!man.count("kind") || man.at("kind") != "parametric")
    throw std::runtime_error("load_parametric_system: not a parametric system directory");
  AffineParametricSystem psys;
  psys.n = std::stoll(man.at("n"));
  psys.m = std::stoll(man.at("m"));
  psys.q = std::stoll(man.at("q"));
  psys.d = std::stoi(man.at("d"));
  psys.np = std::stoll(man.at("np"));
  psys.box_lo = vec_from_string(man.at("box_lo"));
  psys.box_hi = vec_from_string(man.at("box_hi"));

  auto load_family = [&](const char* name, auto& terms) {
    const std::size_t count = std::stoul(man.at(std::string(name) + "_terms"));
    for (std::size_t t = 0; t < count; ++t) {
      const std::string base = std::string(name) + "_term" + std::to_string(t);
      typename std::decay_t<decltype(terms)>::value_type term;
      term.alpha = parse_coeff_tag(man.at(base + "_coeff"));
      term.value = read_market(dir / (base + ".mtx"));
      terms.push_back(std::move(term));
    }
  };
  load_family("E", psys.E_terms);
  load_family("A", psys.A_terms);
  load_family("B", psys.B_terms);
  load_family("C", psys.C_terms);

  for (int xi = 2; xi <= psys.d; ++xi) {
    const std::string base = "H" + std::to_string(xi);
    if (!man.count(base + "_terms")) continue;
    const std::size_t count = std::stoul(man.at(base + "_terms"));
    std::vector<AffineNonlinearTerm> terms;
    for (std::size_t t = 0; t < count; ++t) {
      const std::string tb = base + "_term" + std::to_string(t);
      AffineNonlinearTerm term;
      term.alpha = parse_coeff_tag(man.at(tb + "_coeff"));
      if (man.at(tb + "_storage") == "hadamard") {
        const std::size_t hterms = std::stoul(man.at(tb + "_hterms"));
        for (std::size_t h = 0; h < hterms; ++h) {
          HadamardTerm ht;
          ht.coefficient = std::stod(man.at(tb + "_h" + std::to_string(h) + "_coefficient"));
          for (int f = 0; f < xi; ++f)
            ht.factors.push_back(read_market(
                dir / (tb + "_h" + std::to_string(h) + "_factor" + std::to_string(f) + ".mtx")));
          term.value.terms.push_back(std::move(ht));
        }
      } else {
        term.value.unfolding = read_market_wide(dir / (tb + ".mtx"));
      }
      terms.push_back(std::move(term));
    }
    psys.H_terms[xi] = std::move(terms);
  }
  for (int eta = 1; eta <= psys.d; ++eta) {
    const std::string base = "N" + std::to_string(eta);
    if (!man.count(base + "_terms")) continue;
    const std::size_t count = std::stoul(man.at(base + "_terms"));
    std::vector<AffineTerm<UnfoldingMat>> terms;
    for (std::size_t t = 0; t < count; ++t) {
      const std::string tb = base + "_term" + std::to_string(t);
      AffineTerm<UnfoldingMat> term;
      term.alpha = parse_coeff_tag(man.at(tb + "_coeff"));
      term.value = read_market_wide(dir / (tb + ".mtx"));
      terms.push_back(std::move(term));
    }
    psys.N_terms[eta] = std::move(terms);
  }
  return psys;
}

bool is_parametric_dir(const fs::path& dir) {
  const Manifest man = read_manifest(dir / "manifest.txt");
  return man.count("kind") && man.at("kind") == "parametric";
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const fs::path& path) : impl_(new Impl) {
  open_or_throw(impl_->out, path);
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << names[i];
  }
  impl_->out << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << format_full(values[i]);
  }
  impl_->out << '\n';
}

void CsvWriter::raw_row(const std::string& line) { impl_->out << line << '\n'; }

}  // namespace polymor
