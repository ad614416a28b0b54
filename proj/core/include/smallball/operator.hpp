#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace sblab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative rank tolerance: values at or below kRankTolerance * s_1 count as zero.
inline constexpr double kRankTolerance = 1e-10;

struct SingularSpectrum {
  std::vector<double> values;  // non-increasing, min(m, n) entries
  std::size_t rank = 0;
  double tolerance = 0.0;

  double largest() const { return values.empty() ? 0.0 : values.front(); }
  /// The leading `rank` values.
  std::span<const double> nonzero() const { return {values.data(), rank}; }
};

/// Singular values of an arbitrary dense matrix. Throws InputError on
/// non-finite entries.
SingularSpectrum singular_values(const Eigen::MatrixXd& a);

/// A real m x n matrix with its singular spectrum computed at construction.
/// Immutable after construction, so freely shareable between threads.
class Operator {
 public:
  explicit Operator(Eigen::MatrixXd entries);

  static Operator identity(Eigen::Index n);
  static Operator diagonal(std::span<const double> values);
  /// Entries iid N(0,1), drawn row by row from the kOperatorEntries stream.
  static Operator gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
  static Operator from_csv(const std::filesystem::path& path);
  static Operator parse_csv(std::string_view text);

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const SingularSpectrum& spectrum() const { return spectrum_; }

  bool is_zero() const { return spectrum_.rank == 0; }
  double frobenius_norm() const;
  Operator scaled(double c) const { return Operator(c * entries_); }
  Operator transposed() const { return Operator(entries_.transpose()); }

 private:
  Eigen::MatrixXd entries_;
  SingularSpectrum spectrum_;
};

SingularSpectrum singular_values(const Operator& t);

/// (sum s_i^q)^{1/q}; q = kInf gives s_1. Throws ParameterError for q < 1.
double schatten_norm(std::span<const double> singular_values, double q);
double schatten_norm(const Operator& t, double q);

/// (||T||_{S2} / ||T||_{Sq})^{2q/(q-2)}, with q = kInf giving the classical
/// stable rank. Throws ParameterError for q <= 2, DomainError for T = 0.
double stable_rank(std::span<const double> singular_values, double q);
double stable_rank(const Operator& t, double q);

/// min(s_i, ||T||_{S2}/sqrt(m)) for each nonzero singular value, in order.
std::vector<double> truncate_spectrum(const Operator& t, std::size_t m);

}  // namespace sblab
