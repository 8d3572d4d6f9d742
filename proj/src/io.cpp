#include "rgm/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>

#include "rgm/errors.hpp"

namespace rgm::io {

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParameterError("io: truncated file");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("io: cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("io: cannot open " + path.string());
  return is;
}

void check_magic(std::istream& is, const char (&magic)[4], const std::filesystem::path& path) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0) throw ParameterError("io: bad magic in " + path.string());
  if (get<std::uint32_t>(is) != kFormatVersion) throw ParameterError("io: unsupported version in " + path.string());
}

void put_lower(std::ostream& os, const Mat& m) {
  for (Index i = 1; i < m.rows(); ++i)
    for (Index j = 0; j < i; ++j) put<double>(os, m(i, j));
}

Mat get_lower(std::istream& is, Index n) {
  Mat m = Mat::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) {
      const double x = get<double>(is);
      m(i, j) = x;
      m(j, i) = x;
    }
  return m;
}

}  // namespace

void save_instance(const std::filesystem::path& path, const CorrelatedInstance& inst) {
  auto os = open_out(path);
  os.write(kInstanceMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(inst.n));
  put<double>(os, inst.rho);
  put<std::uint64_t>(os, inst.rng_seed);
  put_lower(os, inst.a);
  put_lower(os, inst.b);
  for (Index i = 0; i < inst.n; ++i) put<std::uint64_t>(os, static_cast<std::uint64_t>(inst.pi_star(i)));
  if (!os) throw ParameterError("io: write failed for " + path.string());
}

CorrelatedInstance load_instance(const std::filesystem::path& path) {
  auto is = open_in(path);
  check_magic(is, kInstanceMagic, path);
  CorrelatedInstance inst;
  inst.n = static_cast<Index>(get<std::uint64_t>(is));
  inst.rho = get<double>(is);
  inst.rng_seed = get<std::uint64_t>(is);
  if (inst.n < 2 || inst.n > (Index{1} << 20)) throw ParameterError("io: implausible n in " + path.string());
  inst.a = get_lower(is, inst.n);
  inst.b = get_lower(is, inst.n);
  std::vector<Index> map(static_cast<std::size_t>(inst.n));
  for (auto& v : map) v = static_cast<Index>(get<std::uint64_t>(is));
  inst.pi_star = Permutation(std::move(map));
  return inst;
}

void save_matrix(const std::filesystem::path& path, const Mat& m) {
  auto os = open_out(path);
  os.write(kMatrixMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!os) throw ParameterError("io: write failed for " + path.string());
}

Mat load_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  check_magic(is, kMatrixMagic, path);
  const auto rows = static_cast<Index>(get<std::uint64_t>(is));
  const auto cols = static_cast<Index>(get<std::uint64_t>(is));
  Mat m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!is) throw ParameterError("io: truncated matrix in " + path.string());
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
  std::ofstream os(path);
  if (!os) throw ParameterError("io: cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
}

void write_assignment_csv(const std::filesystem::path& path, const Permutation& pi) {
  std::ofstream os(path);
  if (!os) throw ParameterError("io: cannot open " + path.string() + " for writing");
  os << "u,v\n";
  for (Index u = 0; u < pi.size(); ++u) os << u << ',' << pi(u) << '\n';
}

}  // namespace rgm::io
