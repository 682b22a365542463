#include "qmcslice/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "qmcslice/error.hpp"
#include "qmcslice/rng.hpp"

namespace qmcslice {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::string tok = line.substr(pos, end - pos);
    const auto b = tok.find_first_not_of(" \t\r");
    const auto e = tok.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    tok = tok.substr(b, e - b + 1);
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      return false;
    }
    if (used != tok.size() || !std::isfinite(v)) return false;
    out.push_back(v);
    pos = end + 1;
  }
  return true;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> vals;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, vals)) {
      if (rows.empty() && lineno == 1) continue;  // header
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": malformed CSV row");
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(rows.front().size()) + " fields, got " + std::to_string(vals.size()));
    rows.push_back(vals);
  }
  require(!rows.empty(), ErrorKind::Parse, path + ": no data rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path + "'");
}

Vector read_vector(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  require(m.cols() == 1, ErrorKind::Parse, path + ": expected one value per line");
  return m.col(0);
}

void write_vector(const Vector& v, const std::string& path) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  write_matrix_csv(m, path);
}

Matrix gaussian_blobs(int n, int d, std::uint64_t seed, int clusters, double spread) {
  require(n >= 1 && d >= 1 && clusters >= 1 && spread > 0.0, ErrorKind::Parameter, "invalid blob parameters");
  Rng rng(seed, 0x626c6f62ULL);
  Matrix centers(clusters, d);
  for (int c = 0; c < clusters; ++c)
    for (int j = 0; j < d; ++j) centers(c, j) = rng.normal();
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(clusters)));
    for (int j = 0; j < d; ++j) m(i, j) = centers(c, j) + spread * rng.normal();
  }
  return m;
}

Matrix uniform_cube(int n, int d, std::uint64_t seed) {
  require(n >= 1 && d >= 1, ErrorKind::Parameter, "invalid cube parameters");
  Rng rng(seed, 0x63756265ULL);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.uniform();
  return m;
}

}  // namespace qmcslice
