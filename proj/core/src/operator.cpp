#include "smallball/operator.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "smallball/errors.hpp"
#include "smallball/rng.hpp"

namespace sblab {

SingularSpectrum singular_values(const Eigen::MatrixXd& a) {
  if (a.size() == 0) throw InputError("singular_values: empty matrix");
  if (!a.allFinite()) throw InputError("singular_values: non-finite entry");
  SingularSpectrum s;
  Eigen::VectorXd sv;
  if (std::min(a.rows(), a.cols()) <= 16) {
    sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  } else {
    sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  }
  s.values.assign(sv.data(), sv.data() + sv.size());
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  for (double& v : s.values) v = std::max(v, 0.0);
  s.tolerance = kRankTolerance * s.largest();
  s.rank = static_cast<std::size_t>(std::count_if(
      s.values.begin(), s.values.end(), [&](double v) { return v > s.tolerance; }));
  return s;
}

Operator::Operator(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw InputError("Operator: dimensions must be at least 1x1");
  }
  spectrum_ = singular_values(entries_);
}

Operator Operator::identity(Eigen::Index n) {
  if (n < 1) throw ParameterError("identity: n must be >= 1");
  return Operator(Eigen::MatrixXd::Identity(n, n));
}

Operator Operator::diagonal(std::span<const double> values) {
  if (values.empty()) throw ParameterError("diagonal: empty value list");
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = values[static_cast<std::size_t>(i)];
  return Operator(std::move(d));
}

Operator Operator::gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ParameterError("gaussian: dimensions must be >= 1");
  TrialRng rng(seed, Stream::kOperatorEntries, 0);
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return Operator(std::move(a));
}

Operator Operator::parse_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) {
        throw InputError("csv line " + std::to_string(line_no) + ": empty field");
      }
      const std::string token = field.substr(first, last - first + 1);
      char* stop = nullptr;
      const double v = std::strtod(token.c_str(), &stop);
      if (stop != token.c_str() + token.size()) {
        throw InputError("csv line " + std::to_string(line_no) + ": not a number: " + token);
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("csv line " + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (rows.empty()) throw InputError("csv: no rows");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Operator(std::move(a));
}

Operator Operator::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

double Operator::frobenius_norm() const { return schatten_norm(spectrum_.values, 2.0); }

SingularSpectrum singular_values(const Operator& t) { return t.spectrum(); }

double schatten_norm(std::span<const double> s, double q) {
  if (!(q >= 1.0)) throw ParameterError("schatten_norm: q must be >= 1");
  double top = 0.0;
  for (double v : s) top = std::max(top, v);
  if (std::isinf(q) || top == 0.0) return top;
  // Scale by s_1 so large q cannot overflow.
  double acc = 0.0;
  for (double v : s) acc += std::pow(v / top, q);
  return top * std::pow(acc, 1.0 / q);
}

double schatten_norm(const Operator& t, double q) {
  return schatten_norm(t.spectrum().values, q);
}

double stable_rank(std::span<const double> s, double q) {
  if (!(q > 2.0)) throw ParameterError("stable_rank: q must be > 2");
  const double s2 = schatten_norm(s, 2.0);
  if (s2 == 0.0) throw DomainError("stable_rank: zero operator");
  const double sq = schatten_norm(s, q);
  const double ratio = s2 / sq;
  if (std::isinf(q)) return ratio * ratio;
  return std::pow(ratio, 2.0 * q / (q - 2.0));
}

double stable_rank(const Operator& t, double q) {
  return stable_rank(t.spectrum().values, q);
}

std::vector<double> truncate_spectrum(const Operator& t, std::size_t m) {
  if (m < 1) throw ParameterError("truncate_spectrum: m must be >= 1");
  if (t.is_zero()) throw DomainError("truncate_spectrum: zero operator");
  const double cap = t.frobenius_norm() / std::sqrt(static_cast<double>(m));
  std::vector<double> out;
  out.reserve(t.spectrum().rank);
  for (double v : t.spectrum().nonzero()) out.push_back(std::min(v, cap));
  return out;
}

}  // namespace sblab
